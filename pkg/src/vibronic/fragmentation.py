"""XOR fragmentation of the vibronic potential and Clifford block-diagonalization.

``V = sum_m H_m`` with ``H_m = sum_j |j><m^j| (x) V_{j, m^j}``. Fragment 0 is
already diagonal in the electronic register. For ``m != 0`` a CNOT ladder from
one set bit of ``m`` (the control) to every other set bit maps each pair
``(j, m^j)`` onto a pair differing only in the control bit, and a Hadamard on
the control turns the resulting X into Z. After conjugation the fragment is
``sum_j' |j'><j'| (x) (+-) V_{b, b^m}`` with ``b = j'`` with the control bit
cleared and the sign set by the control bit of ``j'``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .grid import GridConfig, _check_size, coupling_surfaces
from .model import MultiIndex, VibronicModel


@dataclass(frozen=True)
class DiagonalizerRecipe:
    control_qubit: int
    cnots: tuple[tuple[int, int], ...]
    hadamard_on: int

    def gates(self):
        """Time-ordered ``("CNOT", c, t)`` / ``("H", q)`` tuples realizing ``U``."""
        return [("CNOT", c, t) for c, t in self.cnots] + [("H", self.hadamard_on)]

    def inverse_gates(self):
        return list(reversed(self.gates()))


@dataclass(frozen=True)
class Fragment:
    m: int
    pairs: tuple[tuple[int, int], ...]
    clifford: DiagonalizerRecipe | None

    @property
    def is_diagonal(self) -> bool:
        return self.m == 0


def diagonalizer_for(m: int, n: int) -> DiagonalizerRecipe:
    """Clifford recipe for fragment ``m`` on ``n`` electronic qubits.

    The control is the lowest set bit of ``m``.
    """
    if m == 0:
        raise ValueError("fragment 0 is already diagonal")
    if not 0 < m < (1 << n):
        raise ValueError(f"fragment index {m} out of range for {n} electronic qubits")
    bits = [q for q in range(n) if (m >> q) & 1]
    control = bits[0]
    return DiagonalizerRecipe(control, tuple((control, t) for t in bits[1:]), control)


def fragments(model: VibronicModel) -> list:
    """All ``N`` fragments in ascending ``m``."""
    N, n = model.n_states, model.n_qubits
    out = []
    for m in range(N):
        if m == 0:
            out.append(Fragment(0, tuple((j, j) for j in range(N)), None))
        else:
            pairs = tuple((j, j ^ m) for j in range(N) if j < j ^ m)
            out.append(Fragment(m, pairs, diagonalizer_for(m, n)))
    return out


def fragment_of(j: int, i: int) -> int:
    return j ^ i


def clifford_matrix(recipe: DiagonalizerRecipe | None, n: int) -> np.ndarray:
    """Dense ``2**n x 2**n`` unitary of a recipe (qubit ``q`` is bit ``q`` of the label)."""
    N = 1 << n
    U = np.eye(N)
    if recipe is None:
        return U
    labels = np.arange(N)
    h = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2)
    for gate in recipe.gates():
        if gate[0] == "CNOT":
            _, c, t = gate
            perm = np.where((labels >> c) & 1, labels ^ (1 << t), labels)
            G = np.eye(N)[perm]
        else:
            q = gate[1]
            G = np.zeros((N, N))
            for col in range(N):
                b = (col >> q) & 1
                for out_bit in (0, 1):
                    row = (col & ~(1 << q)) | (out_bit << q)
                    G[row, col] = h[out_bit, b]
        U = G @ U
    return U


def conjugated_coefficients(fragment: Fragment, model: VibronicModel, include_v0=True) -> dict:
    """Per-monomial coefficient tables of the diagonalized fragment.

    Returns ``{alpha: (coeffs, origins)}``: ``coeffs[j']`` is the coefficient of
    ``Q^alpha`` for conjugated electronic state ``j'`` (sign included) and
    ``origins[j']`` the model key ``(j, i, alpha)`` it came from (``None`` for
    the harmonic term or a zero entry). Monomials whose coefficients all
    vanish are omitted.
    """
    N = model.n_states
    m = fragment.m
    table: dict = {}

    def slot(alpha):
        if alpha not in table:
            table[alpha] = (np.zeros(N), [None] * N)
        return table[alpha]

    if m == 0:
        for (j, i, a), c in model.couplings.items():
            if j == i:
                coeffs, origins = slot(a)
                coeffs[j] += c
                origins[j] = (j, i, a)
        if include_v0:
            for r, w in enumerate(model.frequencies):
                coeffs, _ = slot(MultiIndex(((r, 2),)))
                coeffs += 0.5 * w
    else:
        ctl = fragment.clifford.control_qubit
        for (j, i, a), c in model.couplings.items():
            if j ^ i != m or (j >> ctl) & 1:
                continue
            coeffs, origins = slot(a)
            # j has control bit 0 and maps to itself; its partner maps to j ^ (1 << ctl)
            coeffs[j] = c
            coeffs[j | (1 << ctl)] = -c
            origins[j] = origins[j | (1 << ctl)] = (j, i, a)
    return {a: v for a, v in sorted(table.items()) if np.any(v[0] != 0)}


def fragment_matrix(fragment: Fragment, model: VibronicModel, g: GridConfig, include_v0=True):
    """Sparse dense-equivalent of ``H_m`` in the two's-complement labeling."""
    _check_size(model, g)
    N, D = model.n_states, g.K**model.n_modes
    total = sp.csr_array((N * D, N * D))
    for (j, i), surface in coupling_surfaces(model, g, include_v0).items():
        if j ^ i != fragment.m:
            continue
        e = sp.csr_array(([1.0], ([j], [i])), shape=(N, N))
        total = total + sp.kron(e, sp.diags_array(surface.ravel()), format="csr")
    return total.tocsr()


def conjugate_fragment(fragment, model, g, include_v0=True, recipe=None):
    """``U H_m U^dag`` as a sparse matrix (``recipe`` overrides the fragment's own)."""
    H = fragment_matrix(fragment, model, g, include_v0)
    recipe = fragment.clifford if recipe is None else recipe
    if recipe is None:
        return H
    D = g.K**model.n_modes
    U = sp.kron(sp.csr_array(clifford_matrix(recipe, model.n_qubits)), sp.identity(D), format="csr")
    return (U @ H @ U.T).tocsr()


def verify_block_diagonal(fragment, model, g, include_v0=True, recipe=None) -> float:
    """Largest magnitude of ``U H_m U^dag`` outside the electronic-diagonal blocks."""
    C = conjugate_fragment(fragment, model, g, include_v0, recipe).tocoo()
    D = g.K**model.n_modes
    off = (C.row // D) != (C.col // D)
    if not np.any(off):
        return 0.0
    return float(np.max(np.abs(C.data[off])))
