"""Empirical Trotter step-count selection.

The error of ``r`` steps is measured on a proxy model small enough to
propagate exactly: the modes with the largest total coupling weight, as many
as fit in the amplitude budget. Probe step counts ``r0, 2 r0, 4 r0`` are
chosen so the probes sit in the asymptotic regime, the power law
``err(r) = a * r**-p`` is fitted with the slope fixed at the formula order,
and the smallest ``r`` with predicted error at most ``epsilon`` is taken. That
``r`` is then checked on the proxy and raised until the measured error meets
``epsilon``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import FitError
from ..grid import DENSE_CAP, GridConfig
from ..model import VibronicModel

DEFAULT_PROXY_BUDGET = 1 << 14
ASYMPTOTIC_ERROR = 0.3
MAX_PROBE_STEPS = 1 << 16


@dataclass
class StepCountResult:
    r: int
    a: float
    order: int
    probes: list  # [(r, error)]
    proxy_modes: list
    fitted_slope: float
    method: str = "empirical-fit"
    meta: dict = field(default_factory=dict)

    def predicted_error(self, r: int) -> float:
        return self.a * r ** (-self.order)


def mode_weights(model: VibronicModel) -> np.ndarray:
    """Total absolute coupling attached to each mode (ties broken by frequency)."""
    w = np.zeros(model.n_modes)
    for (_, _, a), c in model.couplings.items():
        for r in a.modes:
            w[r] += abs(c)
    return w


def proxy_modes(model: VibronicModel, g: GridConfig, budget: int = DEFAULT_PROXY_BUDGET) -> list:
    """Largest-coupling modes that fit ``N*K^M' <= budget``, returned in ascending index order."""
    budget = min(budget, DENSE_CAP)
    max_m = 0
    while max_m < model.n_modes and model.n_states * g.K ** (max_m + 1) <= budget:
        max_m += 1
    w = mode_weights(model)
    order = sorted(range(model.n_modes), key=lambda r: (-w[r], -model.frequencies[r], r))
    return sorted(order[:max_m])


def select_step_count(
    model: VibronicModel,
    g: GridConfig,
    t: float,
    epsilon: float,
    p: int,
    probe_budget: int = DEFAULT_PROXY_BUDGET,
    initial_state: int = 0,
    include_v0=True,
    sign=1,
) -> StepCountResult:
    """Smallest ``r`` whose fitted error on the proxy is at most ``epsilon``.

    Errors are trace distances between the product-formula state and the
    reference propagation of the vertical excitation of ``initial_state``.
    """
    from ..observables import prepare_vertical_excitation
    from ..simulator import ProductFormulaPropagator, distance, reference_evolve

    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    modes = proxy_modes(model, g, probe_budget)
    proxy = model.restrict_modes(modes)
    psi0 = prepare_vertical_excitation(proxy, g, initial_state)
    ref = reference_evolve(proxy, g, t, psi0, sign, include_v0)
    pf = ProductFormulaPropagator(proxy, g, include_v0)
    errors = {}

    def err(r):
        if r not in errors:
            errors[r] = distance(pf.evolve(psi0, t, r, p, sign), ref)
        return errors[r]

    base = dict(order=p, proxy_modes=modes)
    if err(1) <= epsilon:
        return StepCountResult(1, err(1), p, [(1, err(1))], modes, float("nan"), meta={"reason": "r=1 meets target"})
    r0 = 1
    while err(r0) > ASYMPTOTIC_ERROR:
        r0 *= 2
        if r0 > MAX_PROBE_STEPS:
            raise FitError("probe errors never entered the asymptotic regime", {"probes": sorted(errors.items()), **base})
    probes = [(r, err(r)) for r in (r0, 2 * r0, 4 * r0)]
    es = [e for _, e in probes]
    if not all(b < a for a, b in zip(es, es[1:])):
        raise FitError("probe errors are not monotonically decreasing", {"probes": probes, **base})
    rs = np.log([r for r, _ in probes])
    slope = float(np.polyfit(rs, np.log(es), 1)[0])
    # prefactor from the two finest probes, conservative of the pair
    a = max(e * r**p for r, e in probes[1:])
    fit = max(1, math.ceil((a / epsilon) ** (1.0 / p) - 1e-9))
    # the error is not monotone at coarse steps; confirm the fitted r on the proxy
    r = fit
    while err(r) > epsilon and r < MAX_PROBE_STEPS:
        r += max(1, r // 20)
    meta = {"fitted_r": fit, "proxy_error": err(r)}
    return StepCountResult(r, a, p, probes, modes, slope, meta=meta)
