"""Real-space grid for the normal-mode coordinates and dense reference operators.

Each mode is discretized on ``K = 2**k`` points with spacing
``delta = sqrt(2*pi/K)``. Two labelings of the same grid are used:

* offset binary, ``Q|x> = delta*(x - K/2)|x>``;
* two's complement, ``Q|x> = delta*s(x)|x>`` with ``s`` the signed reading of
  the ``k``-bit label.

They differ by an X on the most significant qubit. The circuit compiler works
in two's complement, so every builder here defaults to ``signed=True`` and the
dense oracle sees the same operator the circuits implement.

Operator builders return ``scipy.sparse`` arrays: the potential is diagonal in
the grid labels and the kinetic term is a Kronecker sum, so a dense matrix of
the capped size (``2**20``) would not fit in memory.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.sparse as sp

from .errors import SizeCapError

DENSE_CAP = 1 << 20
MOMENTUM_CAP = 1 << 12


@dataclass(frozen=True)
class GridConfig:
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"grid needs at least one qubit per mode, got k={self.k}")

    @property
    def K(self) -> int:
        return 1 << self.k

    @property
    def delta(self) -> float:
        return float(np.sqrt(2 * np.pi / self.K))


def _check_label(g: GridConfig, x):
    x = np.asarray(x)
    if np.any((x < 0) | (x >= g.K)):
        raise ValueError(f"grid label out of range [0, {g.K})")
    return x


def signed_int(x, bits):
    """Two's-complement reading of unsigned ``bits``-wide integers (scalar or array)."""
    x = np.asarray(x, dtype=np.int64)
    half = np.int64(1) << (bits - 1)
    out = np.where(x >= half, x - (np.int64(1) << bits), x)
    return out if out.ndim else int(out)


def position_value(g: GridConfig, x):
    """Offset-binary eigenvalue ``delta*(x - K/2)``."""
    x = _check_label(g, x)
    return g.delta * (x - g.K // 2)


def signed_value(g: GridConfig, x):
    """Two's-complement eigenvalue ``delta*s(x)``."""
    x = _check_label(g, x)
    return g.delta * signed_int(x, g.k)


def position_values(g: GridConfig, signed=True) -> np.ndarray:
    x = np.arange(g.K)
    return signed_value(g, x) if signed else position_value(g, x)


def qft_matrix(g: GridConfig) -> np.ndarray:
    """``F|x> = K**-1/2 sum_y exp(+2 pi i x y / K)|y>``; columns indexed by ``x``."""
    x = np.arange(g.K)
    return np.exp(2j * np.pi * np.outer(x, x) / g.K) / np.sqrt(g.K)


def msb_flip(g: GridConfig) -> np.ndarray:
    """Permutation matrix of an X gate on the most significant qubit."""
    return np.eye(g.K)[np.arange(g.K) ^ (g.K >> 1)]


def position_matrix(g: GridConfig, signed=True) -> np.ndarray:
    return np.diag(position_values(g, signed))


def momentum_matrix(g: GridConfig) -> np.ndarray:
    """``P = F^dag X_msb Q X_msb F`` with ``Q`` in offset binary (Hermitian)."""
    if g.K > MOMENTUM_CAP:
        raise SizeCapError(f"dense momentum matrix limited to K <= {MOMENTUM_CAP}")
    F = qft_matrix(g)
    X = msb_flip(g)
    return F.conj().T @ X @ position_matrix(g, signed=False) @ X @ F


def _check_size(m, g):
    size = m.n_states * g.K ** m.n_modes
    if size > DENSE_CAP:
        raise SizeCapError(
            f"N*K^M = {size} exceeds the dense budget {DENSE_CAP} "
            f"(N={m.n_states}, K={g.K}, M={m.n_modes})"
        )
    return size


def monomial_on_grid(alpha, g: GridConfig, n_modes, signed=True) -> np.ndarray:
    """Values of ``prod_r Q_r^a_r`` on the grid, broadcastable to ``(K,)*n_modes``."""
    q = position_values(g, signed)
    out = np.ones((1,) * n_modes)
    for r, e in alpha.powers:
        shape = [1] * n_modes
        shape[r] = g.K
        out = out * (q**e).reshape(shape)
    return out


def harmonic_on_grid(m, g: GridConfig, signed=True) -> np.ndarray:
    """``V_0 = sum_r omega_r Q_r^2 / 2`` on the full mode grid."""
    q2 = position_values(g, signed) ** 2
    out = np.zeros((g.K,) * m.n_modes)
    for r, w in enumerate(m.frequencies):
        shape = [1] * m.n_modes
        shape[r] = g.K
        out = out + 0.5 * w * q2.reshape(shape)
    return out


def coupling_surfaces(m, g: GridConfig, include_v0=True, signed=True) -> dict:
    """``{(j, i): V_ji(x)}`` for every nonzero block, each of shape ``(K,)*M``.

    With ``include_v0`` the harmonic potential is added to every diagonal
    block, padded states included.
    """
    shape = (g.K,) * m.n_modes
    out = {}
    for (j, i, a), c in sorted(m.couplings.items()):
        block = out.setdefault((j, i), np.zeros(shape))
        block += c * monomial_on_grid(a, g, m.n_modes, signed)
    if include_v0:
        v0 = harmonic_on_grid(m, g, signed)
        for j in range(m.n_states):
            out[(j, j)] = out.get((j, j), np.zeros(shape)) + v0
    return out


def build_potential_matrix(m, g: GridConfig, include_v0=True, signed=True):
    """Sparse ``V = sum_ji |j><i| (x) V_ji`` on ``N*K^M`` basis states."""
    _check_size(m, g)
    N, D = m.n_states, g.K**m.n_modes
    total = sp.csr_array((N * D, N * D))
    for (j, i), surface in coupling_surfaces(m, g, include_v0, signed).items():
        e = sp.csr_array(([1.0], ([j], [i])), shape=(N, N))
        total = total + sp.kron(e, sp.diags_array(surface.ravel()), format="csr")
    return total.tocsr()


def _kron_sum(mats, K):
    terms = []
    for r, A in enumerate(mats):
        factors = [sp.identity(K, format="csr")] * len(mats)
        factors[r] = sp.csr_array(A)
        terms.append(reduce(lambda a, b: sp.kron(a, b, format="csr"), factors))
    return reduce(lambda a, b: a + b, terms)


def kinetic_mode_matrix(g: GridConfig, omega: float) -> np.ndarray:
    P = momentum_matrix(g)
    return 0.5 * omega * (P @ P)


def build_kinetic_matrix(m, g: GridConfig):
    """Sparse ``T = I_el (x) sum_r omega_r P_r^2 / 2``."""
    _check_size(m, g)
    if m.n_modes == 0:
        return sp.csr_array((m.n_states, m.n_states), dtype=complex)
    T_vib = _kron_sum([kinetic_mode_matrix(g, w) for w in m.frequencies], g.K)
    return sp.kron(sp.identity(m.n_states, format="csr"), T_vib, format="csr")


def build_hamiltonian(m, g: GridConfig, include_v0=True):
    """Sparse ``H = T + V`` in the two's-complement labeling."""
    return (build_kinetic_matrix(m, g) + build_potential_matrix(m, g, include_v0)).tocsr()
