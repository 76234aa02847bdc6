"""Product-formula plans and full evolution circuits.

A step visits the nonempty potential fragments in ascending ``m`` and then the
kinetic term (tag ``"T"``). Second order is the symmetric (Strang) product of
half-angle sweeps; fourth order is Suzuki's five-fold composition of second
order steps. Adjacent exponentials of the same fragment are fused, both inside
a step and across step boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..fragmentation import conjugated_coefficients, fragments
from ..grid import GridConfig
from ..model import VibronicModel
from .compiler import (
    CompileContext,
    FixedPoint,
    compile_diagonal_fragment,
    compile_kinetic,
    fragment_terms,
    kinetic_terms,
    resolve_width,
)
from .ir import Circuit, RegisterLayout

ORDERS = (1, 2, 4)
KINETIC = "T"


def suzuki_u(order: int = 4) -> float:
    """Outer weight of the five-fold symmetric recursion from ``order - 2`` to ``order``."""
    return 1.0 / (4.0 - 4.0 ** (1.0 / (order - 1)))


def _check_order(p):
    if p not in ORDERS:
        raise ValueError(f"product-formula order must be one of {ORDERS}, got {p}")


def active_tags(model: VibronicModel, include_v0=True) -> list:
    """Fragments with at least one term, in execution order, then the kinetic tag."""
    tags = [f.m for f in fragments(model) if _fragment_nonempty(f, model, include_v0)]
    if model.n_modes > 0:
        tags.append(KINETIC)
    return tags


def _fragment_nonempty(fragment, model, include_v0):
    return bool(conjugated_coefficients(fragment, model, include_v0))


def raw_step(tags, p: int) -> list:
    """Unfused ``(tag, multiplier)`` sequence of one step; multipliers are fractions of the step angle."""
    _check_order(p)
    if p == 1:
        return [(t, 1.0) for t in tags]
    if p == 2:
        return [(t, 0.5) for t in tags] + [(t, 0.5) for t in reversed(tags)]
    u = suzuki_u(4)
    out = []
    for c in (u, u, 1.0 - 4.0 * u, u, u):
        out.extend((t, c * x) for t, x in raw_step(tags, 2))
    return out


def fuse(sequence) -> list:
    out = []
    for tag, x in sequence:
        if out and out[-1][0] == tag:
            out[-1] = (tag, out[-1][1] + x)
        else:
            out.append((tag, x))
    return out


@dataclass(frozen=True)
class TrotterPlan:
    """``sequence`` covers the whole evolution; angles are ``multiplier * step_angle``."""

    order: int
    step_angle: float
    n_steps: int
    step_sequence: tuple
    sequence: tuple = field(repr=False)

    def totals(self) -> dict:
        """Summed multiplier per tag over the whole evolution (equals ``n_steps`` for every tag)."""
        acc: dict = {}
        for tag, x in self.sequence:
            acc[tag] = acc.get(tag, 0.0) + x
        return acc

    def distinct(self) -> list:
        """Distinct ``(tag, multiplier)`` exponentials, first-seen order."""
        seen = {}
        for item in self.sequence:
            seen.setdefault(item, None)
        return list(seen)


def plan_step(model, theta: float, p: int, include_v0=True) -> TrotterPlan:
    return plan_evolution(model, theta, 1, p, include_v0)


def plan_evolution(model, t: float, r: int, p: int, include_v0=True) -> TrotterPlan:
    """Plan ``r`` steps of order ``p`` covering total angle ``t`` (sign included)."""
    _check_order(p)
    if r < 1:
        raise ValueError(f"need at least one step, got r={r}")
    tags = active_tags(model, include_v0)
    step = raw_step(tags, p)
    return TrotterPlan(p, t / r, r, tuple(fuse(step)), tuple(fuse(step * r)))


def _terms_for(tag, model, g, include_v0, frag_by_m):
    if tag == KINETIC:
        return kinetic_terms(model, g)
    return fragment_terms(frag_by_m[tag], model, g, include_v0)


def compile_plan(
    model: VibronicModel,
    g: GridConfig,
    plan: TrotterPlan,
    fixed_point: FixedPoint = FixedPoint(),
    include_v0=True,
    caching=True,
) -> Circuit:
    """Gate list realizing ``plan``; the width is sized once for every exponential."""
    frag_by_m = {f.m: f for f in fragments(model)}
    distinct = plan.distinct()
    terms = {tag: _terms_for(tag, model, g, include_v0, frag_by_m) for tag, _ in distinct}
    groups = [(terms[tag], x * plan.step_angle) for tag, x in distinct]
    w = resolve_width(groups, g.k, model.max_degree, fixed_point)
    top = max((t.degree for ts in terms.values() for t in ts), default=0)
    layout = RegisterLayout(model.n_qubits, model.n_modes, g.k, w, fixed_point.w_frac, top if top >= 2 else 0)
    ctx = CompileContext(layout)
    blocks = {}
    for tag, x in distinct:
        angle = x * plan.step_angle
        if tag == KINETIC:
            blocks[(tag, x)] = compile_kinetic(model, g, angle, layout, ctx)
        else:
            blocks[(tag, x)] = compile_diagonal_fragment(
                frag_by_m[tag], model, g, angle, layout, include_v0, caching, ctx
            )
    gates = [gate for item in plan.sequence for gate in blocks[item]]
    meta = {
        "order": plan.order,
        "n_steps": plan.n_steps,
        "step_angle": plan.step_angle,
        "sequence": [[str(tag), x] for tag, x in plan.sequence],
        "include_v0": include_v0,
        "caching": caching,
    }
    return Circuit(layout, gates, meta)


def build_trotter_step(model, g, theta, p, fixed_point=FixedPoint(), include_v0=True, caching=True, sign=1):
    """One step of ``exp(i*sign*theta*H)``."""
    return compile_plan(model, g, plan_step(model, sign * theta, p, include_v0), fixed_point, include_v0, caching)


def build_evolution(model, g, t, r, p, fixed_point=FixedPoint(), include_v0=True, caching=True, sign=1):
    """``r`` steps approximating ``exp(i*sign*t*H)`` (``t`` in atomic units)."""
    return compile_plan(model, g, plan_evolution(model, sign * t, r, p, include_v0), fixed_point, include_v0, caching)
