"""Compile fragment and kinetic exponentials into gate lists.

A diagonal term ``exp(i*a*c_j*Delta^|alpha| * x^alpha)`` is applied by loading
the fixed-point coefficient ``a*c_j*Delta^|alpha|/(2*pi)`` (in turns) selected
by the electronic register, multiplying it into the phase-gradient register
together with the (cached) product ``x^alpha``, and uncomputing the load. The
gradient register holds an eigenstate of modular addition, so adding ``v``
multiplies the amplitude by ``exp(2*pi*i*v / 2**w_frac)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import CompileError
from ..fragmentation import Fragment, conjugated_coefficients
from ..grid import GridConfig
from ..model import MultiIndex, VibronicModel
from .ir import (
    CNOT,
    Hadamard,
    MultiControlledLoad,
    PhaseAdd,
    QFTConj,
    RegisterLayout,
    SignedMult,
    SignedMultAccumulatePhase,
    Uncompute,
    cache_name,
    mode_name,
)
from .schedule import schedule_monomials

DEFAULT_W_FRAC = 24
# signed products of the coefficient and x^alpha must stay exact in int64
MAX_ARITH_BITS = 63


@dataclass(frozen=True)
class FixedPoint:
    """Coefficient format. ``w=None`` sizes the integer part from the terms."""

    w_frac: int = DEFAULT_W_FRAC
    w: int | None = None

    def __post_init__(self):
        if self.w_frac < 1:
            raise ValueError("w_frac must be positive")
        if self.w is not None and self.w <= self.w_frac:
            raise ValueError(f"w={self.w} leaves no integer bit with w_frac={self.w_frac}")


@dataclass(frozen=True)
class Term:
    """One monomial of one exponential: ``coeffs[j]`` already includes Delta^|alpha|."""

    alpha: MultiIndex
    coeffs: np.ndarray
    keys: tuple
    selector: str | None

    @property
    def degree(self):
        return self.alpha.degree


def fragment_terms(fragment: Fragment, model: VibronicModel, g: GridConfig, include_v0=True) -> list:
    """Terms of the conjugated fragment in canonical order, scaled by Delta^|alpha|."""
    selector = "el" if model.n_qubits > 0 else None
    out = []
    for alpha, (coeffs, origins) in conjugated_coefficients(fragment, model, include_v0).items():
        scaled = coeffs * g.delta**alpha.degree
        keys = tuple(o if o is not None else ("V0", alpha) for o in origins)
        out.append(Term(alpha, scaled, keys, selector))
    return out


def kinetic_terms(model: VibronicModel, g: GridConfig) -> list:
    """``omega_r/2 * Delta^2 * s(x_r)^2`` in the Fourier-conjugated frame, one per mode."""
    return [
        Term(MultiIndex(((r, 2),)), np.array([0.5 * w * g.delta**2]), (("T", r),), None)
        for r, w in enumerate(model.frequencies)
    ]


def _term_magnitude(term: Term, angle: float, k: int):
    """Largest ``|coef_turns| * max|x^alpha|`` over the table and the index of its entry."""
    turns = np.abs(angle * term.coeffs) / (2 * math.pi)
    pos = int(np.argmax(turns))
    return float(turns[pos]) * 2.0 ** ((k - 1) * term.degree), pos


def required_w_int(terms, angle: float, k: int) -> int:
    """Smallest integer width keeping every scaled product inside the signed range."""
    need = 1
    for term in terms:
        val, _ = _term_magnitude(term, angle, k)
        if val > 0:
            need = max(need, math.floor(math.log2(val)) + 2)
    return need


def resolve_width(groups, k: int, d: int, fp: FixedPoint) -> int:
    """Total width ``w`` for ``groups`` = iterable of ``(terms, angle)``.

    With an explicit width, the first term that would overflow raises; under
    auto-sizing a width beyond the exact-arithmetic budget raises instead.
    """
    groups = list(groups)
    if fp.w is not None:
        w_int = fp.w - fp.w_frac
        for terms, angle in groups:
            for term in terms:
                val, pos = _term_magnitude(term, angle, k)
                if val >= 2.0 ** (w_int - 1):
                    raise CompileError(
                        f"fixed-point overflow in term {_describe(term.keys[pos])}: "
                        f"scaled magnitude {val:.3g} turns needs more than w_int={w_int} integer bits",
                        term=term.keys[pos],
                    )
        w = fp.w
    else:
        w_int, worst = 1, None
        for terms, angle in groups:
            for term in terms:
                val, pos = _term_magnitude(term, angle, k)
                if val > 0:
                    need = math.floor(math.log2(val)) + 2
                    if need > w_int:
                        w_int, worst = need, term.keys[pos]
        w = w_int + fp.w_frac
        if w + max(d, 2) * k > MAX_ARITH_BITS:
            raise CompileError(
                f"fixed-point overflow in term {_describe(worst)}: needs {w_int} integer bits, "
                f"exceeding the {MAX_ARITH_BITS}-bit arithmetic budget",
                term=worst,
            )
    if w + max(d, 2) * k > MAX_ARITH_BITS:
        raise CompileError(f"width w={w} with k={k}, d={d} exceeds the {MAX_ARITH_BITS}-bit arithmetic budget")
    return w


def _describe(key):
    if key is None:
        return "?"
    if key[0] == "T":
        return f"kinetic mode {key[1]}"
    if key[0] == "V0":
        return f"harmonic {key[1]}"
    j, i, a = key
    return f"(j={j}, i={i}, alpha={a})"


def encode(turns, w: int, w_frac: int) -> tuple:
    """Round to ``w_frac`` fractional bits and store as unsigned ``w``-bit words."""
    ints = np.rint(np.asarray(turns, dtype=float) * 2.0**w_frac).astype(np.int64)
    return tuple(int(v) % (1 << w) for v in ints)


class CompileContext:
    """Tag allocator and gate sink shared across one compilation."""

    def __init__(self, layout: RegisterLayout):
        self.layout = layout
        self.gates: list = []
        self._tag = 0

    def new_tag(self) -> int:
        self._tag += 1
        return self._tag

    def emit(self, gate):
        self.gates.append(gate)
        return gate


def _operand(alpha: MultiIndex) -> str:
    """Register holding ``x^alpha`` when its phase is applied."""
    if alpha.degree == 1:
        return mode_name(alpha.modes[0])
    return cache_name(alpha.degree)


def emit_terms(ctx: CompileContext, terms, angle: float, caching=True):
    """Emit the phase for every term at ``angle`` following the caching schedule."""
    layout = ctx.layout
    by_alpha = {t.alpha: t for t in terms}
    open_products = {}
    for step in schedule_monomials(by_alpha, caching=caching):
        if step.kind == "compute":
            level = step.level
            if level == 2:
                a, b = (mode_name(r) for r in step.monomial.factors())
            else:
                a, b = cache_name(level - 1), mode_name(step.mode)
            tag = ctx.new_tag()
            ctx.emit(SignedMult(a, b, cache_name(level), tag, label=str(step.monomial)))
            open_products[step.monomial] = tag
        elif step.kind == "release":
            ctx.emit(Uncompute(open_products.pop(step.monomial)))
        else:
            term = by_alpha[step.monomial]
            table = encode(angle * term.coeffs / (2 * math.pi), layout.w, layout.w_frac)
            tag = ctx.new_tag()
            ctx.emit(MultiControlledLoad(term.selector, table, "coeff", tag, label=str(term.alpha)))
            if term.degree == 0:
                ctx.emit(PhaseAdd("coeff", label=str(term.alpha)))
            else:
                ctx.emit(SignedMultAccumulatePhase(_operand(term.alpha), "coeff", label=str(term.alpha)))
            ctx.emit(Uncompute(tag))


def compile_diagonal_fragment(
    fragment: Fragment,
    model: VibronicModel,
    g: GridConfig,
    angle: float,
    layout: RegisterLayout,
    include_v0=True,
    caching=True,
    ctx: CompileContext | None = None,
) -> list:
    """Gates for ``exp(i*angle*H_m)``: diagonalizer, phase body, inverse diagonalizer."""
    ctx = ctx or CompileContext(layout)
    start = len(ctx.gates)
    terms = fragment_terms(fragment, model, g, include_v0)
    recipe = fragment.clifford
    if recipe is not None:
        for c, t in recipe.cnots:
            ctx.emit(CNOT(layout.electronic_qubit(c), layout.electronic_qubit(t)))
        ctx.emit(Hadamard(layout.electronic_qubit(recipe.hadamard_on)))
    emit_terms(ctx, terms, angle, caching)
    if recipe is not None:
        ctx.emit(Hadamard(layout.electronic_qubit(recipe.hadamard_on)))
        for c, t in reversed(recipe.cnots):
            ctx.emit(CNOT(layout.electronic_qubit(c), layout.electronic_qubit(t)))
    return ctx.gates[start:]


def compile_kinetic(
    model: VibronicModel,
    g: GridConfig,
    angle: float,
    layout: RegisterLayout,
    ctx: CompileContext | None = None,
) -> list:
    """Gates for ``exp(i*angle*T)``, one independent block per mode.

    The MSB flips around the squared block are absorbed into the signed
    arithmetic: the block reads the register in two's complement directly.
    """
    ctx = ctx or CompileContext(layout)
    start = len(ctx.gates)
    for term in kinetic_terms(model, g):
        r = term.alpha.modes[0]
        ctx.emit(QFTConj(mode_name(r)))
        emit_terms(ctx, [term], angle)
        ctx.emit(QFTConj(mode_name(r), inverse=True))
    return ctx.gates[start:]
