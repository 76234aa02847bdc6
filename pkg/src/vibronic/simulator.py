"""Statevector execution of compiled circuits and the exact propagation oracle.

Two backends run a gate list:

* ``semantic`` keeps only the system amplitudes. Ancilla registers are
  classical functions of the system basis label (every arithmetic gate is a
  reversible function of basis labels), so they are tracked as integer arrays
  and each phase-gradient addition becomes a phase on the amplitudes.
* ``faithful`` holds the full register file (at most 24 qubits) and executes
  every gate as a permutation or bit-level unitary, with the phase register
  prepared in the gradient state and projected back at the end.

The oracle diagonalizes the dense Hamiltonian once and reuses the
eigendecomposition for every time.
"""

from __future__ import annotations

import json

import numpy as np
import scipy.sparse.linalg as spla

from .circuit.ir import (
    CNOT,
    Circuit,
    Hadamard,
    MultiControlledLoad,
    PhaseAdd,
    QFTConj,
    RegisterLayout,
    SignedMult,
    SignedMultAccumulatePhase,
    Uncompute,
    X,
    _Negated,
)
from .circuit.trotter import KINETIC, plan_evolution
from .errors import SizeCapError
from .fragmentation import clifford_matrix, conjugated_coefficients, fragments
from .grid import DENSE_CAP, GridConfig, _check_size, build_hamiltonian, monomial_on_grid, position_values

ORACLE_CAP = 1 << 12
FAITHFUL_MAX_QUBITS = 24
FAITHFUL_MAX_W = 12


class StateVector:
    """System amplitudes shaped ``(N, K, ..., K)`` (electronic axis first)."""

    def __init__(self, amplitudes, n_states: int, n_modes: int, k: int):
        K = 1 << k
        shape = (n_states,) + (K,) * n_modes
        self.amplitudes = np.asarray(amplitudes, dtype=complex).reshape(shape)
        self.n_states, self.n_modes, self.k = n_states, n_modes, k

    @classmethod
    def for_model(cls, model, g: GridConfig, amplitudes):
        return cls(amplitudes, model.n_states, model.n_modes, g.k)

    @classmethod
    def basis(cls, model, g: GridConfig, j: int, xs=()):
        a = np.zeros((model.n_states,) + (g.K,) * model.n_modes, dtype=complex)
        a[(j, *xs)] = 1.0
        return cls(a, model.n_states, model.n_modes, g.k)

    @property
    def flat(self) -> np.ndarray:
        return self.amplitudes.reshape(-1)

    @property
    def size(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.flat))

    def copy(self):
        return StateVector(self.amplitudes.copy(), self.n_states, self.n_modes, self.k)

    def with_amplitudes(self, amplitudes):
        return StateVector(amplitudes, self.n_states, self.n_modes, self.k)

    def overlap(self, other) -> complex:
        return complex(np.vdot(self.flat, other.flat))

    def fidelity(self, other) -> float:
        return abs(self.overlap(other)) ** 2

    def save(self, path):
        """Write a JSON header line followed by little-endian interleaved (re, im) doubles."""
        header = {
            "format": "vibronic-state",
            "version": 1,
            "n_states": self.n_states,
            "n_modes": self.n_modes,
            "k": self.k,
            "shape": list(self.amplitudes.shape),
            "dtype": "<c16",
            "order": "C",
        }
        with open(path, "wb") as fh:
            fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
            fh.write(np.ascontiguousarray(self.flat, dtype="<c16").tobytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            header = json.loads(fh.readline())
            data = np.frombuffer(fh.read(), dtype="<c16")
        if header.get("format") != "vibronic-state":
            raise ValueError(f"{path}: not a state snapshot")
        return cls(data.astype(complex), header["n_states"], header["n_modes"], header["k"])


def distance(a: StateVector, b: StateVector) -> float:
    """Trace distance between the pure states ``a`` and ``b``."""
    return float(np.sqrt(max(0.0, 1.0 - a.fidelity(b))))


def _signed(v, bits):
    half = np.int64(1) << np.int64(bits - 1)
    return np.where(v >= half, v - (half << np.int64(1)), v)


def _frac_phase(v, w_frac):
    """``exp(2*pi*i*v / 2**w_frac)`` computed from ``v mod 2**w_frac`` to keep float precision."""
    v = np.asarray(v, dtype=np.int64) & np.int64((1 << w_frac) - 1)
    return np.exp(2j * np.pi * (v.astype(float) / float(1 << w_frac)))


# -- semantic backend ----------------------------------------------------------


class _Semantic:
    def __init__(self, layout: RegisterLayout, amps):
        self.layout = layout
        self.amps = amps  # (D, B)
        self.D = amps.shape[0]
        self.idx = np.arange(self.D, dtype=np.int64)
        self.system = {r.name for r in layout.registers if r.name.startswith("mode") or r.name == "el"}
        self.anc: dict = {}
        self.stack: list = []

    def value(self, name):
        reg = self.layout.register(name)
        if name in self.system:
            return (self.idx >> reg.offset) & reg.mask
        return self.anc.get(name, np.zeros(self.D, dtype=np.int64))

    def signed(self, name):
        return _signed(self.value(name), self.layout.register(name).width)

    def require_clean(self, gate):
        if self.stack or any(np.any(v) for v in self.anc.values()):
            raise RuntimeError(f"{gate.op} applied while ancillas are entangled; semantic backend cannot execute it")

    def system_qubit(self, q, gate):
        name, _ = self.layout.locate(q)
        if name not in self.system:
            raise RuntimeError(f"{gate.op} on ancilla qubit {q} is not supported by the semantic backend")

    def load(self, g):
        table = np.array(g.table, dtype=np.int64)
        sel = np.zeros(self.D, dtype=np.int64) if g.selector is None else self.value(g.selector)
        self.anc[g.target] = self.value(g.target) ^ table[sel]

    def mult(self, g, undo=False):
        reg = self.layout.register(g.dst)
        prod = self.signed(g.src_a) * self.signed(g.src_b)
        self.anc[g.dst] = (self.value(g.dst) + (-prod if undo else prod)) & reg.mask

    def phase(self, v):
        self.amps *= _frac_phase(v, self.layout.w_frac)[:, None]

    def apply(self, g):
        if isinstance(g, MultiControlledLoad):
            self.load(g)
            self.stack.append((g.tag, g))
        elif isinstance(g, SignedMult):
            self.mult(g)
            self.stack.append((g.tag, g))
        elif isinstance(g, Uncompute):
            if not self.stack or self.stack[-1][0] != g.tag:
                raise ValueError(f"Uncompute({g.tag}) does not match the open computation")
            _, src = self.stack.pop()
            if isinstance(src, MultiControlledLoad):
                self.load(src)
            else:
                self.mult(src, undo=True)
        elif isinstance(g, SignedMultAccumulatePhase):
            self.phase(self.signed(g.src_a) * self.signed(g.src_b))
        elif isinstance(g, PhaseAdd):
            self.phase(self.signed(g.src))
        elif isinstance(g, _Negated):
            inner = g.gate
            if isinstance(inner, PhaseAdd):
                self.phase(-self.signed(inner.src))
            else:
                self.phase(-(self.signed(inner.src_a) * self.signed(inner.src_b)))
        elif isinstance(g, Hadamard):
            self.require_clean(g)
            self.system_qubit(g.qubit, g)
            self.amps = _hadamard(self.amps, g.qubit)
        elif isinstance(g, CNOT):
            self.require_clean(g)
            self.system_qubit(g.control, g)
            self.system_qubit(g.target, g)
            flip = ((self.idx >> g.control) & 1) << g.target
            self.amps = self.amps[self.idx ^ flip]
        elif isinstance(g, X):
            self.require_clean(g)
            self.system_qubit(g.qubit, g)
            self.amps = self.amps[self.idx ^ (1 << g.qubit)]
        elif isinstance(g, QFTConj):
            self.require_clean(g)
            reg = self.layout.register(g.register)
            self.amps = _qft(self.amps, reg.offset, reg.width, g.inverse)
        else:
            raise TypeError(f"unknown gate {g!r}")

    def ancillas_clean(self) -> bool:
        return not self.stack and not any(np.any(v) for v in self.anc.values())


def _hadamard(amps, q):
    D = amps.shape[0]
    a = amps.reshape(D >> (q + 1), 2, 1 << q, -1)
    out = np.empty_like(a)
    out[:, 0] = (a[:, 0] + a[:, 1]) / np.sqrt(2)
    out[:, 1] = (a[:, 0] - a[:, 1]) / np.sqrt(2)
    return out.reshape(amps.shape)


def _qft(amps, offset, width, inverse):
    D = amps.shape[0]
    a = amps.reshape(D >> (offset + width), 1 << width, 1 << offset, -1)
    a = np.fft.fft(a, axis=1, norm="ortho") if inverse else np.fft.ifft(a, axis=1, norm="ortho")
    return a.reshape(amps.shape)


def run_semantic(circuit: Circuit, amps: np.ndarray):
    """Apply ``circuit`` to columns of ``amps`` (shape ``(D, B)``). Returns (amps, ancillas_clean)."""
    layout = circuit.layout
    D = 1 << layout.system_qubits
    if amps.shape[0] != D:
        raise ValueError(f"state has {amps.shape[0]} amplitudes, layout expects {D}")
    if D > DENSE_CAP:
        raise SizeCapError(f"semantic backend limited to {DENSE_CAP} system amplitudes, got {D}")
    sim = _Semantic(layout, np.array(amps, dtype=complex))
    for g in circuit.gates:
        sim.apply(g)
    return sim.amps, sim.ancillas_clean()


# -- gate-faithful backend -----------------------------------------------------


def gradient_state(w: int, w_frac: int) -> np.ndarray:
    """Phase-gradient resource state ``R_y = exp(-2*pi*i*y/2**w_frac) / sqrt(2**w)``."""
    y = np.arange(1 << w)
    return np.exp(-2j * np.pi * y / (1 << w_frac)) / np.sqrt(1 << w)


class _Faithful:
    def __init__(self, layout: RegisterLayout, system_amps):
        Q = layout.allocated_qubits
        if Q > FAITHFUL_MAX_QUBITS:
            raise SizeCapError(f"gate-faithful backend limited to {FAITHFUL_MAX_QUBITS} qubits, layout has {Q}")
        if layout.w > FAITHFUL_MAX_W:
            raise SizeCapError(f"gate-faithful backend limited to w <= {FAITHFUL_MAX_W}, got w={layout.w}")
        self.layout = layout
        self.S = layout.system_qubits
        self.idx = np.arange(1 << Q, dtype=np.int64)
        phase = layout.register("phase")
        psi = np.zeros(1 << Q, dtype=complex)
        # every ancilla zero except the gradient register
        rows = np.arange(1 << layout.w, dtype=np.int64) << phase.offset
        psi[rows[:, None] | np.arange(1 << self.S)[None, :]] = np.outer(gradient_state(layout.w, layout.w_frac), system_amps)
        self.psi = psi
        self.stack: list = []

    def field(self, name):
        reg = self.layout.register(name)
        return (self.idx >> reg.offset) & reg.mask

    def signed(self, name):
        return _signed(self.field(name), self.layout.register(name).width)

    def replace(self, name, value):
        reg = self.layout.register(name)
        cleared = self.idx & ~(np.int64(reg.mask) << reg.offset)
        return cleared | ((value & reg.mask) << reg.offset)

    def permute(self, dest):
        out = np.empty_like(self.psi)
        out[dest] = self.psi
        self.psi = out

    def forward(self, g, sign=1):
        """Destination index of every basis state under ``g`` (``sign=-1`` for the inverse)."""
        if isinstance(g, MultiControlledLoad):
            table = np.array(g.table, dtype=np.int64)
            sel = np.zeros_like(self.idx) if g.selector is None else self.field(g.selector)
            return self.replace(g.target, self.field(g.target) ^ table[sel])
        if isinstance(g, SignedMult):
            return self.replace(g.dst, self.field(g.dst) + sign * self.signed(g.src_a) * self.signed(g.src_b))
        if isinstance(g, SignedMultAccumulatePhase):
            return self.replace(g.phase, self.field(g.phase) + sign * self.signed(g.src_a) * self.signed(g.src_b))
        if isinstance(g, PhaseAdd):
            return self.replace(g.phase, self.field(g.phase) + sign * self.signed(g.src))
        raise TypeError(f"{g!r} is not an arithmetic gate")

    def apply(self, g):
        if isinstance(g, (MultiControlledLoad, SignedMult)):
            self.permute(self.forward(g))
            self.stack.append((g.tag, g))
        elif isinstance(g, Uncompute):
            if not self.stack or self.stack[-1][0] != g.tag:
                raise ValueError(f"Uncompute({g.tag}) does not match the open computation")
            _, src = self.stack.pop()
            self.permute(self.forward(src, sign=-1))
        elif isinstance(g, (SignedMultAccumulatePhase, PhaseAdd)):
            self.permute(self.forward(g))
        elif isinstance(g, _Negated):
            self.permute(self.forward(g.gate, sign=-1))
        elif isinstance(g, Hadamard):
            self.psi = _hadamard(self.psi[:, None], g.qubit)[:, 0]
        elif isinstance(g, CNOT):
            self.psi = self.psi[self.idx ^ (((self.idx >> g.control) & 1) << g.target)]
        elif isinstance(g, X):
            self.psi = self.psi[self.idx ^ (1 << g.qubit)]
        elif isinstance(g, QFTConj):
            reg = self.layout.register(g.register)
            self.psi = _qft(self.psi[:, None], reg.offset, reg.width, g.inverse)[:, 0]
        else:
            raise TypeError(f"unknown gate {g!r}")

    def project(self):
        """System amplitudes with ancillas projected onto ``|0...0>`` and the gradient state."""
        layout = self.layout
        phase = layout.register("phase")
        rows = np.arange(1 << layout.w, dtype=np.int64) << phase.offset
        block = self.psi[(rows[:, None] | np.arange(1 << self.S)[None, :])]
        R = gradient_state(layout.w, layout.w_frac)
        return R.conj() @ block


def run_faithful(circuit: Circuit, system_amps: np.ndarray):
    """Returns (projected system amplitudes, ancilla overlap = squared norm of the projection)."""
    sim = _Faithful(circuit.layout, np.asarray(system_amps, dtype=complex).reshape(-1))
    for g in circuit.gates:
        sim.apply(g)
    out = sim.project()
    norm_in = np.linalg.norm(system_amps) ** 2
    return out, float(np.linalg.norm(out) ** 2 / norm_in)


def apply_gates(state: StateVector, circuit: Circuit, backend: str = "semantic") -> StateVector:
    """Run ``circuit`` on ``state``. Ancillas must end clean; raises otherwise."""
    if backend == "semantic":
        amps, clean = run_semantic(circuit, state.flat[:, None])
        if not clean:
            raise RuntimeError("ancilla registers were not returned to zero")
        return state.with_amplitudes(amps[:, 0])
    if backend == "faithful":
        out, overlap = run_faithful(circuit, state.flat)
        if overlap < 1 - 1e-8:
            raise RuntimeError(f"ancilla registers not returned to zero (overlap {overlap:.3g})")
        return state.with_amplitudes(out)
    raise ValueError(f"unknown backend {backend!r}; expected 'semantic' or 'faithful'")


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense system unitary of ``circuit`` from the semantic backend."""
    D = 1 << circuit.layout.system_qubits
    if D > ORACLE_CAP:
        raise SizeCapError(f"dense unitary limited to {ORACLE_CAP} system amplitudes, got {D}")
    U, clean = run_semantic(circuit, np.eye(D, dtype=complex))
    if not clean:
        raise RuntimeError("ancilla registers were not returned to zero")
    return U


# -- exact oracle --------------------------------------------------------------


class ExactPropagator:
    """``exp(i*sign*t*H)`` through a cached Hermitian eigendecomposition."""

    def __init__(self, model, g: GridConfig, include_v0=True):
        size = _check_size(model, g)
        if size > ORACLE_CAP:
            raise SizeCapError(f"exact oracle limited to N*K^M <= {ORACLE_CAP}, got {size}")
        self.model, self.grid = model, g
        H = build_hamiltonian(model, g, include_v0).toarray()
        H = 0.5 * (H + H.conj().T)
        self.energies, self.vectors = np.linalg.eigh(H)
        self.H = H

    def unitary(self, t: float, sign=1) -> np.ndarray:
        return (self.vectors * np.exp(1j * sign * t * self.energies)) @ self.vectors.conj().T

    def evolve(self, state: StateVector, t: float, sign=1) -> StateVector:
        c = self.vectors.conj().T @ state.flat
        return state.with_amplitudes(self.vectors @ (np.exp(1j * sign * t * self.energies) * c))

    def evolve_many(self, state: StateVector, times, sign=1) -> list:
        c = self.vectors.conj().T @ state.flat
        return [
            state.copy() if t == 0 else state.with_amplitudes(self.vectors @ (np.exp(1j * sign * t * self.energies) * c))
            for t in times
        ]


def exact_evolve(model, g: GridConfig, t: float, state: StateVector, sign=1, include_v0=True) -> StateVector:
    return ExactPropagator(model, g, include_v0).evolve(state, t, sign)


def krylov_evolve(model, g: GridConfig, t: float, state: StateVector, sign=1, include_v0=True) -> StateVector:
    """Reference propagation for sizes beyond the dense oracle (sparse Krylov action)."""
    _check_size(model, g)
    H = build_hamiltonian(model, g, include_v0)
    out = spla.expm_multiply((1j * sign * t) * H, state.flat.astype(complex))
    return state.with_amplitudes(out)


def reference_evolve(model, g, t, state, sign=1, include_v0=True) -> StateVector:
    if state.size <= ORACLE_CAP:
        return exact_evolve(model, g, t, state, sign, include_v0)
    return krylov_evolve(model, g, t, state, sign, include_v0)


# -- exact-arithmetic product formulas -----------------------------------------


class ProductFormulaPropagator:
    """Product formulas with exact exponentials of each fragment (no fixed point).

    Uses the same plan and fragment diagonalizers as the compiler, so it is the
    infinite-precision limit of the compiled circuit.
    """

    def __init__(self, model, g: GridConfig, include_v0=True):
        _check_size(model, g)
        self.model, self.grid, self.include_v0 = model, g, include_v0
        N, M = model.n_states, model.n_modes
        shape = (g.K,) * M
        self.diag, self.clifford = {}, {}
        for frag in fragments(model):
            table = conjugated_coefficients(frag, model, include_v0)
            if not table:
                continue
            D = np.zeros((N,) + shape)
            for alpha, (coeffs, _) in table.items():
                surface = np.broadcast_to(monomial_on_grid(alpha, g, M), shape)
                D += coeffs.reshape((N,) + (1,) * M) * surface
            self.diag[frag.m] = D
            self.clifford[frag.m] = None if frag.clifford is None else clifford_matrix(frag.clifford, model.n_qubits)
        q2 = position_values(g) ** 2
        self.kinetic = [0.5 * w * q2 for w in model.frequencies]

    def _fragment(self, psi, m, angle):
        C = self.clifford[m]
        if C is not None:
            psi = np.tensordot(C, psi, axes=(1, 0))
        extra = psi.ndim - self.diag[m].ndim
        psi = psi * np.exp(1j * angle * self.diag[m]).reshape(self.diag[m].shape + (1,) * extra)
        if C is not None:
            psi = np.tensordot(C.conj().T, psi, axes=(1, 0))
        return psi

    def _kinetic(self, psi, angle):
        for r, t2 in enumerate(self.kinetic):
            ax = 1 + r
            psi = np.fft.ifft(psi, axis=ax, norm="ortho")
            shape = [1] * psi.ndim
            shape[ax] = t2.size
            psi = psi * np.exp(1j * angle * t2).reshape(shape)
            psi = np.fft.fft(psi, axis=ax, norm="ortho")
        return psi

    def apply_plan(self, psi, plan):
        for tag, x in plan.sequence:
            angle = x * plan.step_angle
            psi = self._kinetic(psi, angle) if tag == KINETIC else self._fragment(psi, tag, angle)
        return psi

    def evolve(self, state: StateVector, t: float, r: int, p: int, sign=1) -> StateVector:
        plan = plan_evolution(self.model, sign * t, r, p, self.include_v0)
        return state.with_amplitudes(self.apply_plan(state.amplitudes, plan))

    def unitary(self, t: float, r: int, p: int, sign=1) -> np.ndarray:
        D = self.model.n_states * self.grid.K**self.model.n_modes
        if D > ORACLE_CAP:
            raise SizeCapError(f"dense unitary limited to {ORACLE_CAP} system amplitudes, got {D}")
        plan = plan_evolution(self.model, sign * t, r, p, self.include_v0)
        eye = np.eye(D, dtype=complex).reshape(self.diag_shape() + (D,))
        return self.apply_plan(eye, plan).reshape(D, D)

    def diag_shape(self):
        return (self.model.n_states,) + (self.grid.K,) * self.model.n_modes


def operator_distance(A: np.ndarray, B: np.ndarray) -> float:
    """Spectral-norm distance."""
    return float(np.linalg.norm(A - B, 2))
