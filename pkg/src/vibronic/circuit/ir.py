"""Register layout and the typed gate list produced by the compiler.

Qubit numbering follows the little-endian basis index of the full register
file. Mode ``M-1`` occupies the lowest ``k`` bits, mode 0 sits just below the
electronic register, and the ancilla registers (coefficient, phase gradient,
product caches) follow. With this ordering the system part of a basis index is
the C-order flat index of an ``(N, K, ..., K)`` amplitude array.

Arithmetic gates act on whole registers and are addressed by register name;
Clifford gates address single qubits by global index. Every gate that writes
an ancilla carries a ``tag`` and is undone by ``Uncompute(tag)`` in LIFO order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

# Electronic-register qubits reserved for the QROM unary iterator. Floored so
# the accounting is constant over the small electronic registers seen in
# practice (n <= 3).
SELECT_ANCILLA_FLOOR = 3


@dataclass(frozen=True)
class Register:
    name: str
    offset: int
    width: int

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(range(self.offset, self.offset + self.width))

    @property
    def mask(self) -> int:
        return (1 << self.width) - 1


def mode_name(r: int) -> str:
    return f"mode{r}"


def cache_name(level: int) -> str:
    return f"cache{level}"


@dataclass(frozen=True)
class RegisterLayout:
    """Register file for ``n`` electronic qubits and ``M`` modes of ``k`` qubits.

    ``w = w_int + w_frac`` is the width of the coefficient and phase-gradient
    registers. Product caches exist for degrees ``2..cache_degree``, degree
    ``l`` being ``l*k`` qubits wide. ``select_ancilla`` is counted in the
    qubit budget but not allocated in simulation (coefficient loads are
    executed directly as table lookups).
    """

    n_electronic: int
    n_modes: int
    k: int
    w: int
    w_frac: int
    cache_degree: int = 0
    registers: tuple[Register, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        if self.w <= self.w_frac:
            raise ValueError(f"need at least one integer bit: w={self.w}, w_frac={self.w_frac}")
        regs = []
        offset = 0
        for r in reversed(range(self.n_modes)):
            regs.append(Register(mode_name(r), offset, self.k))
            offset += self.k
        regs.append(Register("el", offset, self.n_electronic))
        offset += self.n_electronic
        for name in ("coeff", "phase"):
            regs.append(Register(name, offset, self.w))
            offset += self.w
        for level in range(2, self.cache_degree + 1):
            regs.append(Register(cache_name(level), offset, level * self.k))
            offset += level * self.k
        object.__setattr__(self, "registers", tuple(regs))

    @property
    def w_int(self) -> int:
        return self.w - self.w_frac

    def register(self, name: str) -> Register:
        for reg in self.registers:
            if reg.name == name:
                return reg
        raise KeyError(f"no register {name!r} in layout")

    def __contains__(self, name):
        return any(reg.name == name for reg in self.registers)

    def locate(self, qubit: int) -> tuple[str, int]:
        """``(register name, bit within register)`` of a global qubit index."""
        for reg in self.registers:
            if reg.offset <= qubit < reg.offset + reg.width:
                return reg.name, qubit - reg.offset
        raise IndexError(f"qubit {qubit} outside layout")

    def electronic_qubit(self, q: int) -> int:
        """Global index of electronic qubit ``q`` (bit ``q`` of the state label)."""
        if not 0 <= q < self.n_electronic:
            raise IndexError(f"electronic qubit {q} out of range")
        return self.register("el").offset + q

    @property
    def system_qubits(self) -> int:
        return self.n_modes * self.k + self.n_electronic

    @property
    def ancilla_names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.registers if r.name in ("coeff", "phase") or r.name.startswith("cache"))

    @property
    def allocated_qubits(self) -> int:
        return sum(r.width for r in self.registers)

    @property
    def select_ancilla(self) -> int:
        return max(self.n_electronic, SELECT_ANCILLA_FLOOR)

    @property
    def ancilla_budget(self) -> int:
        """Accounting ancilla count (independent of how many caches a circuit touches)."""
        return ancilla_budget(self.w, self.cache_degree, self.k, self.n_electronic)

    @property
    def total_qubits(self) -> int:
        return self.system_qubits + self.ancilla_budget


def ancilla_budget(w: int, d: int, k: int, n: int) -> int:
    """Coefficient + phase gradient + one product cache per degree ``2..max(d, 2)`` + iterator.

    The degree-2 cache is always present: the kinetic and harmonic terms square
    every mode register.
    """
    caches = sum(level * k for level in range(2, max(d, 2) + 1))
    return 2 * w + caches + max(n, SELECT_ANCILLA_FLOOR)


# -- gates -------------------------------------------------------------------


@dataclass(frozen=True)
class Hadamard:
    qubit: int
    op = "H"


@dataclass(frozen=True)
class CNOT:
    control: int
    target: int
    op = "CNOT"


@dataclass(frozen=True)
class X:
    qubit: int
    op = "X"


@dataclass(frozen=True)
class MultiControlledLoad:
    """XOR ``table[j]`` into ``target`` where ``j`` is the value of ``selector``.

    With ``selector=None`` the table has one entry (a classical constant).
    """

    selector: str | None
    table: tuple[int, ...]
    target: str
    tag: int
    label: str = ""
    op = "LOAD"


@dataclass(frozen=True)
class SignedMult:
    """``dst += s(src_a) * s(src_b)`` in two's complement (mod ``2**width(dst)``)."""

    src_a: str
    src_b: str
    dst: str
    tag: int
    label: str = ""
    op = "MULT"


@dataclass(frozen=True)
class SignedMultAccumulatePhase:
    """``phase += s(src_a) * s(src_b)``; against the gradient state this is a phase kick."""

    src_a: str
    src_b: str
    phase: str = "phase"
    label: str = ""
    op = "MULT_PHASE"


@dataclass(frozen=True)
class PhaseAdd:
    """``phase += s(src)``: the degree-0 (constant) term."""

    src: str
    phase: str = "phase"
    label: str = ""
    op = "ADD_PHASE"


@dataclass(frozen=True)
class QFTConj:
    register: str
    inverse: bool = False
    op = "QFT"


@dataclass(frozen=True)
class Uncompute:
    tag: int
    op = "UNCOMPUTE"


GATE_TYPES = (
    Hadamard,
    CNOT,
    X,
    MultiControlledLoad,
    SignedMult,
    SignedMultAccumulatePhase,
    PhaseAdd,
    QFTConj,
    Uncompute,
)


@dataclass
class Circuit:
    layout: RegisterLayout
    gates: list
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)


def check_gates(gates, layout: RegisterLayout):
    """Validate operands against the layout and the LIFO uncompute discipline."""
    stack = []
    for pos, g in enumerate(gates):
        if isinstance(g, (Hadamard, X)):
            layout.locate(g.qubit)
        elif isinstance(g, CNOT):
            layout.locate(g.control)
            layout.locate(g.target)
        elif isinstance(g, MultiControlledLoad):
            if g.selector is not None:
                layout.register(g.selector)
            layout.register(g.target)
            stack.append(g.tag)
        elif isinstance(g, SignedMult):
            for name in (g.src_a, g.src_b, g.dst):
                layout.register(name)
            stack.append(g.tag)
        elif isinstance(g, SignedMultAccumulatePhase):
            for name in (g.src_a, g.src_b, g.phase):
                layout.register(name)
        elif isinstance(g, PhaseAdd):
            layout.register(g.src)
            layout.register(g.phase)
        elif isinstance(g, QFTConj):
            layout.register(g.register)
        elif isinstance(g, _Negated):
            check_gates([g.gate], layout)
        elif isinstance(g, Uncompute):
            if not stack or stack[-1] != g.tag:
                raise ValueError(f"gate {pos}: Uncompute({g.tag}) does not match the open computation")
            stack.pop()
        else:
            raise TypeError(f"gate {pos}: unknown gate {g!r}")
    if stack:
        raise ValueError(f"unbalanced computations left open: tags {stack}")


def inverse_gates(gates) -> list:
    """Gate list realizing the inverse unitary (reversed, each gate inverted)."""
    by_tag = {}
    for g in gates:
        if hasattr(g, "tag") and not isinstance(g, Uncompute):
            by_tag[g.tag] = g
    out = []
    for g in reversed(gates):
        if isinstance(g, Uncompute):
            out.append(by_tag[g.tag])
        elif isinstance(g, (MultiControlledLoad, SignedMult)):
            out.append(Uncompute(g.tag))
        elif isinstance(g, SignedMultAccumulatePhase):
            out.append(_Negated(g))
        elif isinstance(g, PhaseAdd):
            out.append(_Negated(g))
        elif isinstance(g, _Negated):
            out.append(g.gate)
        elif isinstance(g, QFTConj):
            out.append(QFTConj(g.register, not g.inverse))
        else:
            out.append(g)
    return out


@dataclass(frozen=True)
class _Negated:
    """Inverse of a phase accumulation (subtracts instead of adds)."""

    gate: object

    @property
    def op(self):
        return self.gate.op + "_DAG"


# -- text export ---------------------------------------------------------------


def _qubits(layout, *names):
    out = []
    for name in names:
        if name is not None:
            out.extend(layout.register(name).qubits)
    return out


def export_gates(circuit: Circuit) -> str:
    """One line per gate: ``GATE op q0 q1 ... # params``. Deterministic."""
    layout = circuit.layout
    lines = [
        f"# layout n={layout.n_electronic} M={layout.n_modes} k={layout.k} "
        f"w={layout.w} w_frac={layout.w_frac} cache_degree={layout.cache_degree}"
    ]
    for reg in layout.registers:
        lines.append(f"# register {reg.name} offset={reg.offset} width={reg.width}")
    for g in circuit.gates:
        if isinstance(g, _Negated):
            inner = g.gate
            names = (inner.src_a, inner.src_b, inner.phase) if hasattr(inner, "src_a") else (inner.src, inner.phase)
            qs, params = _qubits(layout, *names), f"negated {inner.label}".strip()
        elif isinstance(g, (Hadamard, X)):
            qs, params = [g.qubit], ""
        elif isinstance(g, CNOT):
            qs, params = [g.control, g.target], ""
        elif isinstance(g, MultiControlledLoad):
            qs = _qubits(layout, g.selector, g.target)
            params = f"tag={g.tag} selector={g.selector} target={g.target} table={list(g.table)} {g.label}"
        elif isinstance(g, SignedMult):
            qs = _qubits(layout, g.src_a, g.src_b, g.dst)
            params = f"tag={g.tag} a={g.src_a} b={g.src_b} dst={g.dst} {g.label}"
        elif isinstance(g, SignedMultAccumulatePhase):
            qs = _qubits(layout, g.src_a, g.src_b, g.phase)
            params = f"a={g.src_a} b={g.src_b} {g.label}"
        elif isinstance(g, PhaseAdd):
            qs = _qubits(layout, g.src, g.phase)
            params = f"src={g.src} {g.label}"
        elif isinstance(g, QFTConj):
            qs = _qubits(layout, g.register)
            params = f"register={g.register} inverse={int(g.inverse)}"
        elif isinstance(g, Uncompute):
            qs, params = [], f"tag={g.tag}"
        else:
            raise TypeError(f"cannot export {g!r}")
        body = " ".join(str(q) for q in qs)
        line = f"GATE {g.op} {body}".rstrip()
        params = params.strip()
        lines.append(f"{line} # {params}" if params else line)
    return "\n".join(lines) + "\n"
