"""Circuit IR, compilers, caching scheduler and product-formula planner."""

from .compiler import (
    CompileContext,
    FixedPoint,
    compile_diagonal_fragment,
    compile_kinetic,
    fragment_terms,
    kinetic_terms,
    resolve_width,
)
from .ir import (
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
    ancilla_budget,
    check_gates,
    export_gates,
    inverse_gates,
)
from .schedule import schedule_monomials
from .trotter import TrotterPlan, build_evolution, build_trotter_step, plan_evolution, plan_step

__all__ = [
    "CNOT",
    "Circuit",
    "CompileContext",
    "FixedPoint",
    "Hadamard",
    "MultiControlledLoad",
    "PhaseAdd",
    "QFTConj",
    "RegisterLayout",
    "SignedMult",
    "SignedMultAccumulatePhase",
    "TrotterPlan",
    "Uncompute",
    "X",
    "ancilla_budget",
    "build_evolution",
    "build_trotter_step",
    "check_gates",
    "compile_diagonal_fragment",
    "compile_kinetic",
    "export_gates",
    "fragment_terms",
    "inverse_gates",
    "kinetic_terms",
    "plan_evolution",
    "plan_step",
    "resolve_width",
    "schedule_monomials",
]
