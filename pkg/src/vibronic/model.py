"""Vibronic model containers, the JSON model format, and validation.

A model holds ``N_raw`` diabatic states, ``M`` harmonic frequencies and a sparse
table of real polynomial couplings ``c[j, i, alpha]`` where ``alpha`` is a
multi-index over the dimensionless normal-mode coordinates. Coefficients are
stored exactly as given (converted to Hartree); grid factors are applied later
by the compiler and the dense builders.

The electronic dimension is padded to the next power of two. Padded states
carry no couplings, so they never exchange population with the physical ones.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ModelError
from .units import energy_to_au


@dataclass(frozen=True, order=True)
class MultiIndex:
    """Exponents of a monomial ``Q_0^a0 Q_1^a1 ...`` as sorted ``(mode, exponent)`` pairs."""

    powers: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        modes = [r for r, _ in self.powers]
        if any(b <= a for a, b in zip(modes, modes[1:])):
            raise ValueError(f"mode indices must be strictly increasing: {self.powers}")
        if any(e < 1 for _, e in self.powers):
            raise ValueError(f"exponents must be >= 1: {self.powers}")
        if any(r < 0 for r in modes):
            raise ValueError(f"negative mode index: {self.powers}")

    @classmethod
    def from_powers(cls, pairs) -> "MultiIndex":
        """Build from arbitrary ``(mode, exp)`` pairs, merging repeated modes and dropping zeros."""
        acc: dict[int, int] = {}
        for r, e in pairs:
            r, e = int(r), int(e)
            if e < 0:
                raise ValueError(f"negative exponent for mode {r}")
            acc[r] = acc.get(r, 0) + e
        return cls(tuple(sorted((r, e) for r, e in acc.items() if e > 0)))

    @classmethod
    def from_factors(cls, modes) -> "MultiIndex":
        """``from_factors([0, 0, 1])`` is ``Q0^2 Q1``."""
        return cls.from_powers((r, 1) for r in modes)

    @property
    def degree(self) -> int:
        return sum(e for _, e in self.powers)

    @property
    def modes(self) -> tuple[int, ...]:
        return tuple(r for r, _ in self.powers)

    def factors(self) -> tuple[int, ...]:
        """Mode index of every linear factor, sorted, with repetition."""
        return tuple(r for r, e in self.powers for _ in range(e))

    def __str__(self):
        if not self.powers:
            return "1"
        return "*".join(f"Q{r}" if e == 1 else f"Q{r}^{e}" for r, e in self.powers)


CONSTANT = MultiIndex()


def next_power_of_two_exponent(n: int) -> int:
    return max(0, int(n - 1).bit_length())


@dataclass
class VibronicModel:
    """A polynomial vibronic Hamiltonian in Hartree atomic units.

    ``couplings`` maps ``(j, i, MultiIndex)`` to a real coefficient and always
    holds both ``(j, i, a)`` and ``(i, j, a)``.
    """

    n_states_logical: int
    frequencies: np.ndarray
    couplings: dict = field(default_factory=dict)
    max_degree: int = 0
    dipole: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        self.frequencies = np.asarray(self.frequencies, dtype=float)
        if self.dipole is not None:
            self.dipole = np.asarray(self.dipole, dtype=float)

    @classmethod
    def from_terms(cls, n_states, frequencies, terms, max_degree=None, dipole=None, name=""):
        """Build a model from ``{(j, i, alpha): value}``, filling in missing mirror entries.

        ``alpha`` may be a MultiIndex or an iterable of ``(mode, exp)`` pairs.
        """
        couplings = {}
        for (j, i, alpha), value in dict(terms).items():
            if not isinstance(alpha, MultiIndex):
                alpha = MultiIndex.from_powers(alpha)
            _insert_symmetric(couplings, int(j), int(i), alpha, float(value))
        if max_degree is None:
            max_degree = max((a.degree for (_, _, a) in couplings), default=0)
        return cls(n_states, frequencies, couplings, max_degree, dipole, name)

    @property
    def n_modes(self) -> int:
        return len(self.frequencies)

    @property
    def n_qubits(self) -> int:
        return next_power_of_two_exponent(self.n_states_logical)

    @property
    def n_states(self) -> int:
        return 1 << self.n_qubits

    def coupling(self, j, i, alpha=CONSTANT) -> float:
        return self.couplings.get((j, i, alpha), 0.0)

    def block(self, j, i) -> dict:
        """Polynomial of block ``V_ji`` as ``{MultiIndex: coefficient}``."""
        return {a: c for (jj, ii, a), c in self.couplings.items() if jj == j and ii == i}

    def monomials(self) -> set:
        return {a for (_, _, a) in self.couplings}

    def copy(self) -> "VibronicModel":
        return VibronicModel(
            self.n_states_logical,
            self.frequencies.copy(),
            dict(self.couplings),
            self.max_degree,
            None if self.dipole is None else self.dipole.copy(),
            self.name,
        )

    def restrict_modes(self, modes) -> "VibronicModel":
        """Sub-model on the listed modes; couplings touching any other mode are dropped."""
        modes = list(modes)
        remap = {r: k for k, r in enumerate(modes)}
        couplings = {}
        for (j, i, a), c in self.couplings.items():
            if all(r in remap for r in a.modes):
                b = MultiIndex.from_powers((remap[r], e) for r, e in a.powers)
                couplings[(j, i, b)] = c
        return VibronicModel(
            self.n_states_logical,
            self.frequencies[modes],
            couplings,
            self.max_degree,
            self.dipole,
            self.name,
        )

    def __eq__(self, other):
        if not isinstance(other, VibronicModel):
            return NotImplemented
        same_dipole = (self.dipole is None and other.dipole is None) or (
            self.dipole is not None
            and other.dipole is not None
            and np.array_equal(self.dipole, other.dipole)
        )
        return (
            self.n_states_logical == other.n_states_logical
            and np.array_equal(self.frequencies, other.frequencies)
            and self.couplings == other.couplings
            and self.max_degree == other.max_degree
            and same_dipole
        )


def _insert_symmetric(couplings, j, i, alpha, value):
    for key in ((j, i, alpha), (i, j, alpha)):
        old = couplings.get(key)
        if old is not None and old != value:
            raise ModelError(f"asymmetric coupling {key}: {old} vs {value}")
        couplings[key] = value


# -- JSON format ------------------------------------------------------------


def parse_model(text: str) -> VibronicModel:
    """Parse a JSON model document and return a validated, padded model.

    Fields: ``states`` (int), ``modes`` (frequencies), ``unit`` (``eV``,
    ``cm-1`` or ``au``), ``max_degree`` (int), ``couplings`` (records with
    ``bra``, ``ket``, ``powers`` and ``value``) and optionally ``dipole``
    (``states x states`` matrix) and ``name``.

    A coupling given only once is mirrored. Giving the same ``(bra, ket,
    powers)`` twice is an error, as is a mirror entry with a different value.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"syntax error: {exc.msg}", exc.lineno, exc.colno) from None
    if not isinstance(doc, dict):
        raise ModelError("top-level JSON value must be an object")

    for key in ("states", "modes", "couplings"):
        if key not in doc:
            raise ModelError(f"missing field {key!r}")
    unit = doc.get("unit", "au")
    n_states = doc["states"]
    if not isinstance(n_states, int) or isinstance(n_states, bool) or n_states < 1:
        raise ModelError(f"'states' must be a positive integer, got {n_states!r}")
    try:
        frequencies = energy_to_au(np.asarray(doc["modes"], dtype=float), unit)
    except (TypeError, ValueError) as exc:
        raise ModelError(str(exc)) from None
    if frequencies.ndim != 1:
        raise ModelError("'modes' must be a flat list of frequencies")
    for r, w in enumerate(frequencies):
        if not w > 0:
            raise ModelError(f"frequency nonpositive, mode {r}")
    n_modes = len(frequencies)

    couplings = {}
    seen = set()
    max_seen = 0
    for idx, rec in enumerate(doc["couplings"]):
        where = f"coupling record {idx}"
        try:
            j, i, value = rec["bra"], rec["ket"], rec["value"]
            powers = rec.get("powers", [])
            alpha = MultiIndex.from_powers((p[0], p[1]) for p in powers)
        except (KeyError, TypeError, IndexError, ValueError) as exc:
            raise ModelError(f"{where}: malformed ({exc})") from None
        if not (0 <= j < n_states and 0 <= i < n_states):
            raise ModelError(f"{where}: state index out of range ({j}, {i}) for {n_states} states")
        if any(not 0 <= r < n_modes for r in alpha.modes):
            raise ModelError(f"{where}: mode index out of range in {alpha}")
        if (j, i, alpha) in seen:
            raise ModelError(f"{where}: duplicate coupling ({j}, {i}, {alpha})")
        seen.add((j, i, alpha))
        max_seen = max(max_seen, alpha.degree)
        _insert_symmetric(couplings, j, i, alpha, float(energy_to_au(float(value), unit)))

    max_degree = doc.get("max_degree", max_seen)
    if max_seen > max_degree:
        raise ModelError(f"coupling degree {max_seen} exceeds declared max_degree {max_degree}")

    dipole = None
    if doc.get("dipole") is not None:
        dipole = np.asarray(doc["dipole"], dtype=float)
        if dipole.shape != (n_states, n_states):
            raise ModelError(f"dipole must be {n_states}x{n_states}, got {dipole.shape}")
        if not np.allclose(dipole, dipole.T, rtol=0, atol=1e-12):
            raise ModelError("dipole matrix is not symmetric")

    model = VibronicModel(n_states, frequencies, couplings, max_degree, dipole, doc.get("name", ""))
    problems = validate_model(model)
    if problems:
        raise ModelError("; ".join(str(p) for p in problems))
    return model


def load_model(path) -> VibronicModel:
    return parse_model(Path(path).read_text(encoding="utf-8"))


def serialize_model(model: VibronicModel) -> str:
    """JSON document (unit ``au``) that parses back to an equal model."""
    records = []
    for (j, i, a), c in sorted(model.couplings.items()):
        if j <= i:
            records.append({"bra": j, "ket": i, "powers": [list(p) for p in a.powers], "value": c})
    doc = {
        "name": model.name,
        "states": model.n_states_logical,
        "unit": "au",
        "modes": [float(w) for w in model.frequencies],
        "max_degree": model.max_degree,
        "couplings": records,
    }
    if model.dipole is not None:
        doc["dipole"] = model.dipole.tolist()
    return json.dumps(doc, indent=1)


# -- validation ---------------------------------------------------------------


@dataclass(frozen=True)
class Diagnostic:
    invariant: str
    key: object
    message: str

    def __str__(self):
        return self.message


def validate_model(m: VibronicModel) -> list:
    """Check every model invariant; an empty list means the model is valid."""
    out = []
    for r, w in enumerate(m.frequencies):
        if not w > 0:
            out.append(Diagnostic("frequency", r, f"frequency nonpositive, mode {r}"))
    for key, c in m.couplings.items():
        j, i, a = key
        if not (0 <= j < m.n_states_logical and 0 <= i < m.n_states_logical):
            if 0 <= j < m.n_states and 0 <= i < m.n_states:
                out.append(Diagnostic("padding", key, f"coupling in padded block {key}"))
            else:
                out.append(Diagnostic("range", key, f"state index out of range {key}"))
        if any(not 0 <= r < m.n_modes for r in a.modes):
            out.append(Diagnostic("range", key, f"mode index out of range {key}"))
        if a.degree > m.max_degree:
            out.append(Diagnostic("degree", key, f"degree {a.degree} > max_degree {m.max_degree} {key}"))
        if m.couplings.get((i, j, a)) != c:
            out.append(Diagnostic("symmetry", key, f"asymmetric coupling {key}"))
        if not np.isfinite(c):
            out.append(Diagnostic("finite", key, f"non-finite coupling {key}"))
    if m.dipole is not None:
        if m.dipole.shape != (m.n_states_logical, m.n_states_logical):
            out.append(Diagnostic("dipole", None, f"dipole shape {m.dipole.shape}"))
        elif not np.allclose(m.dipole, m.dipole.T, rtol=0, atol=1e-12):
            out.append(Diagnostic("dipole", None, "dipole matrix is not symmetric"))
    return out


def dipole_matrix(m: VibronicModel) -> np.ndarray:
    """Dipole padded to ``n_states x n_states`` (zeros in padded rows and columns)."""
    if m.dipole is None:
        raise ModelError("model has no dipole matrix")
    out = np.zeros((m.n_states, m.n_states))
    n = m.n_states_logical
    out[:n, :n] = m.dipole
    return out
