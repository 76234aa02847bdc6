"""Toffoli and qubit accounting.

The streaming estimator walks the same term schedules the compiler emits,
without building tables or gate lists, so its per-step count equals the
summed gate costs of a compiled step exactly.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .circuit.compiler import DEFAULT_W_FRAC
from .circuit.ir import (
    Circuit,
    MultiControlledLoad,
    PhaseAdd,
    QFTConj,
    SignedMult,
    SignedMultAccumulatePhase,
    Uncompute,
    _Negated,
    ancilla_budget,
)
from .circuit.schedule import schedule_monomials
from .circuit.trotter import KINETIC, plan_step
from .fragmentation import conjugated_coefficients, fragments
from .grid import GridConfig
from .model import MultiIndex, VibronicModel
from .units import au_to_fs

# Accounting width of the coefficient and gradient registers: 24 fractional
# plus 4 integer bits. With k = 4 and degree <= 2 this gives 67 ancillas.
ACCOUNTING_W = DEFAULT_W_FRAC + 4


@dataclass(frozen=True)
class CostModel:
    """Toffoli cost per gate class.

    ``mult(a, b) = 2ab - a`` for an ``a``-bit by ``b``-bit signed product
    (schoolbook controlled additions), a table load over ``N`` entries costs
    ``N - 1``, a ``b``-bit adder ``b - 1``. QFTs are rotations and excluded
    unless ``include_qft`` is set, in which case a ``k``-qubit QFT is charged
    ``k(k-1)/2``. ``overrides`` maps gate ops to fixed costs.
    """

    include_qft: bool = False
    overrides: tuple = ()

    def _override(self, op):
        for key, value in self.overrides:
            if key == op:
                return value
        return None

    def mult(self, a: int, b: int) -> int:
        o = self._override("MULT")
        return o if o is not None else 2 * a * b - a

    def load(self, entries: int) -> int:
        o = self._override("LOAD")
        return o if o is not None else max(entries - 1, 0)

    def adder(self, b: int) -> int:
        o = self._override("ADD_PHASE")
        return o if o is not None else max(b - 1, 0)

    def qft(self, width: int) -> int:
        o = self._override("QFT")
        if o is not None:
            return o
        return width * (width - 1) // 2 if self.include_qft else 0


DEFAULT_COST = CostModel()


def gate_cost(g, layout, cost: CostModel = DEFAULT_COST) -> int:
    """Cost of one gate (``Uncompute`` is priced by :func:`count_toffoli`)."""
    width = lambda name: layout.register(name).width  # noqa: E731
    if isinstance(g, _Negated):
        return gate_cost(g.gate, layout, cost)
    if isinstance(g, MultiControlledLoad):
        return 0 if g.selector is None else cost.load(len(g.table))
    if isinstance(g, SignedMult):
        return cost.mult(width(g.src_a), width(g.src_b))
    if isinstance(g, SignedMultAccumulatePhase):
        return cost.mult(width(g.src_a), width(g.src_b))
    if isinstance(g, PhaseAdd):
        return cost.adder(width(g.src))
    if isinstance(g, QFTConj):
        return cost.qft(width(g.register))
    return 0


def _gate_class(g):
    if isinstance(g, _Negated):
        return _gate_class(g.gate)
    if isinstance(g, MultiControlledLoad):
        return "load"
    if isinstance(g, SignedMult):
        return "product"
    if isinstance(g, (SignedMultAccumulatePhase, PhaseAdd)):
        return "phase"
    if isinstance(g, QFTConj):
        return "qft"
    return "clifford"


def count_toffoli(circuit: Circuit, cost: CostModel = DEFAULT_COST):
    """Total Toffolis of a gate list and a per-class breakdown; uncomputes cost as much as the computation."""
    by_tag, total, classes = {}, 0, {}
    for g in circuit.gates:
        if isinstance(g, Uncompute):
            src = by_tag[g.tag]
            c, cls = gate_cost(src, circuit.layout, cost), _gate_class(src)
        else:
            if hasattr(g, "tag"):
                by_tag[g.tag] = g
            c, cls = gate_cost(g, circuit.layout, cost), _gate_class(g)
        total += c
        classes[cls] = classes.get(cls, 0) + c
    return total, classes


def qubit_count(model: VibronicModel, g: GridConfig, w: int = ACCOUNTING_W, d: int | None = None):
    """``(system, ancilla, total)`` qubits."""
    d = model.max_degree if d is None else d
    system = model.n_modes * g.k + model.n_qubits
    anc = ancilla_budget(w, d, g.k, model.n_qubits)
    return system, anc, system + anc


def _terms_cost(alphas, n_entries, selector, k, w, cost, caching, classes):
    total = 0
    for step in schedule_monomials(alphas, caching=caching):
        if step.kind == "compute":
            a = k if step.level == 2 else (step.level - 1) * k
            c = 2 * cost.mult(a, k)
            classes["product"] = classes.get("product", 0) + c
        elif step.kind == "term":
            load = 2 * (cost.load(n_entries) if selector else 0)
            if step.monomial.degree == 0:
                ph = cost.adder(w)
            else:
                ph = cost.mult(k * step.monomial.degree, w)
            classes["load"] = classes.get("load", 0) + load
            classes["phase"] = classes.get("phase", 0) + ph
            c = load + ph
        else:
            c = 0
        total += c
    return total


def fragment_cost(model, g, m, w, cost=DEFAULT_COST, include_v0=True, caching=True, classes=None) -> int:
    """Toffolis of one exponential of fragment ``m`` (or the kinetic tag)."""
    classes = {} if classes is None else classes
    k = g.k
    if m == KINETIC:
        total = 0
        for _ in range(model.n_modes):
            q = 2 * cost.qft(k)
            classes["qft"] = classes.get("qft", 0) + q
            total += q + _terms_cost([_square(0)], 1, None, k, w, cost, caching, classes)
        return total
    frag = fragments(model)[m]
    alphas = list(conjugated_coefficients(frag, model, include_v0))
    selector = model.n_qubits > 0
    return _terms_cost(alphas, model.n_states, selector, k, w, cost, caching, classes)


def _square(r):
    return MultiIndex(((r, 2),))


@dataclass
class StepEstimate:
    toffoli_per_step: int
    by_fragment: dict
    by_class: dict
    step_sequence: list
    seam_tag: object = None
    seam_cost: int = 0


def estimate_step(
    model: VibronicModel,
    g: GridConfig,
    p: int,
    cost: CostModel = DEFAULT_COST,
    w: int = ACCOUNTING_W,
    include_v0=True,
    caching=True,
) -> StepEstimate:
    """Toffolis of one fused step of order ``p``, with breakdowns by fragment and gate class."""
    plan = plan_step(model, 1.0, p, include_v0)
    per_tag, classes_per_tag = {}, {}
    for tag, _ in plan.step_sequence:
        if tag not in per_tag:
            cls = {}
            per_tag[tag] = fragment_cost(model, g, tag, w, cost, include_v0, caching, cls)
            classes_per_tag[tag] = cls
    by_fragment, by_class, total = {}, {}, 0
    for tag, _ in plan.step_sequence:
        total += per_tag[tag]
        by_fragment[str(tag)] = by_fragment.get(str(tag), 0) + per_tag[tag]
        for key, v in classes_per_tag[tag].items():
            by_class[key] = by_class.get(key, 0) + v
    seq = plan.step_sequence
    seam = seq[0][0] if len(seq) > 1 and seq[0][0] == seq[-1][0] else None
    return StepEstimate(total, by_fragment, by_class, [str(t) for t, _ in seq], seam, per_tag[seam] if seam is not None else 0)


def evolution_toffoli(step: StepEstimate, r: int) -> int:
    """``r`` steps with the exponentials at step boundaries fused."""
    return r * step.toffoli_per_step - (r - 1) * step.seam_cost


@dataclass
class ResourceReport:
    name: str
    n_states: int
    n_modes: int
    k: int
    order: int
    system_qubits: int
    ancilla_qubits: int
    total_qubits: int
    toffoli_per_step: int
    n_steps: int
    total_toffoli: int
    t_fs: float | None
    epsilon: float | None
    step_method: str
    breakdown: dict = field(default_factory=dict)
    step_selection: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, default=str)

    def parameters(self) -> str:
        parts = [f"N={self.n_states}", f"M={self.n_modes}"]
        if self.t_fs is not None:
            parts.append(f"t={self.t_fs:g} fs")
        if self.epsilon is not None:
            parts.append(f"eps={self.epsilon:g}")
        parts.append(f"p={self.order}")
        parts.append(f"r={self.n_steps}")
        return ", ".join(parts)

    def to_table(self) -> str:
        return format_table([self])


def format_table(reports) -> str:
    rows = [("System", "# Qubits", "# Toffoli Gates", "Parameters")]
    rows += [(r.name or "-", str(r.total_qubits), f"{r.total_toffoli:.3e}", r.parameters()) for r in reports]
    widths = [max(len(row[i]) for row in rows) for i in range(4)]
    line = lambda row: " | ".join(c.ljust(wd) for c, wd in zip(row, widths)).rstrip()  # noqa: E731
    out = [line(rows[0]), "-+-".join("-" * wd for wd in widths)]
    out += [line(row) for row in rows[1:]]
    return "\n".join(out) + "\n"


def estimate_total(
    model: VibronicModel,
    g: GridConfig,
    t: float | None,
    epsilon: float | None,
    p: int,
    cost: CostModel = DEFAULT_COST,
    r: int | None = None,
    w: int = ACCOUNTING_W,
    include_v0=True,
    caching=True,
    probe_budget: int | None = None,
    sign=1,
) -> ResourceReport:
    """Assemble the report; ``r=None`` selects the step count empirically (needs ``t`` and ``epsilon``)."""
    step = estimate_step(model, g, p, cost, w, include_v0, caching)
    selection = {}
    if r is None:
        from .circuit.stepcount import DEFAULT_PROXY_BUDGET, select_step_count

        if t is None or epsilon is None:
            raise ValueError("empirical step selection needs both a time and an error target")
        res = select_step_count(model, g, t, epsilon, p, probe_budget or DEFAULT_PROXY_BUDGET, include_v0=include_v0, sign=sign)
        r, method = res.r, "empirical-fit"
        selection = {
            "prefactor": res.a,
            "probes": [[int(x), float(e)] for x, e in res.probes],
            "proxy_modes": [int(x) for x in res.proxy_modes],
            "fitted_slope": res.fitted_slope,
            **res.meta,
        }
    else:
        if r < 1:
            raise ValueError(f"need at least one step, got r={r}")
        method = "user-supplied"
    system, anc, total = qubit_count(model, g, w)
    return ResourceReport(
        name=model.name,
        n_states=model.n_states_logical,
        n_modes=model.n_modes,
        k=g.k,
        order=p,
        system_qubits=system,
        ancilla_qubits=anc,
        total_qubits=total,
        toffoli_per_step=step.toffoli_per_step,
        n_steps=r,
        total_toffoli=evolution_toffoli(step, r),
        t_fs=None if t is None else au_to_fs(t),
        epsilon=epsilon,
        step_method=method,
        breakdown={"by_fragment": step.by_fragment, "by_class": step.by_class, "seam": str(step.seam_tag)},
        step_selection=selection,
    )
