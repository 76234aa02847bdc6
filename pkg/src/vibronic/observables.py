"""Initial states, diabatic populations, dipole autocorrelation and spectra."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .grid import GridConfig, position_values
from .model import VibronicModel, dipole_matrix
from .simulator import ExactPropagator, StateVector, apply_gates
from .units import HARTREE_IN_EV, au_to_fs


def ground_gaussian(g: GridConfig) -> np.ndarray:
    """Normalized discretized zeroth Hermite-Gauss function on the two's-complement grid.

    ``exp(-q**2/2)`` at ``q = Delta*s(x)``; in offset-binary labels this is
    ``exp(-pi*(x - K/2)**2 / K)``.
    """
    q = position_values(g)
    chi = np.exp(-0.5 * q**2)
    return chi / np.linalg.norm(chi)


def _product_state(model, g, electronic):
    chi = ground_gaussian(g)
    amps = np.asarray(electronic, dtype=complex)
    for _ in range(model.n_modes):
        amps = np.multiply.outer(amps, chi)
    return StateVector.for_model(model, g, amps)


def prepare_vertical_excitation(model: VibronicModel, g: GridConfig, j: int) -> StateVector:
    """``|j> (x) chi_0 (x) ... (x) chi_0``."""
    if not 0 <= j < model.n_states_logical:
        raise ValueError(f"state {j} out of range [0, {model.n_states_logical})")
    el = np.zeros(model.n_states)
    el[j] = 1.0
    return _product_state(model, g, el)


def prepare_dipole_state(model: VibronicModel, g: GridConfig, mu=None) -> StateVector:
    """Normalized ``mu|0>`` on the electronic register with every mode in its Gaussian."""
    mu = dipole_matrix(model) if mu is None else _pad(np.asarray(mu, dtype=float), model.n_states)
    col = mu[:, 0]
    norm = np.linalg.norm(col)
    if norm == 0:
        raise ValueError("dipole column mu|0> vanishes; no bright state to prepare")
    return _product_state(model, g, col / norm)


def _pad(mu, N):
    out = np.zeros((N, N))
    out[: mu.shape[0], : mu.shape[1]] = mu
    return out


def populations(state: StateVector, n_logical: int | None = None, shots: int | None = None, rng=None) -> np.ndarray:
    """Diabatic populations; with ``shots``, estimated from computational-basis samples."""
    p = np.sum(np.abs(state.amplitudes.reshape(state.n_states, -1)) ** 2, axis=1)
    n = state.n_states if n_logical is None else n_logical
    if shots is None:
        return p[:n]
    rng = np.random.default_rng(rng)
    probs = np.clip(p, 0, None)
    counts = rng.multinomial(shots, probs / probs.sum())
    return counts[:n] / shots


@dataclass
class PopulationTrace:
    times_fs: np.ndarray
    populations: np.ndarray  # (n_times, N_raw)
    meta: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["time_fs"] + [f"p_{j}" for j in range(self.populations.shape[1])])
        for t, row in zip(self.times_fs, self.populations):
            writer.writerow([repr(float(t))] + [repr(float(v)) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {"times_fs": list(map(float, self.times_fs)), "populations": self.populations.tolist(), "meta": self.meta},
            indent=2,
            sort_keys=True,
        )


def _propagator(model, g, include_v0, sign, circuit_factory, backend):
    """``times -> states`` function. ``circuit_factory(dt)`` switches to compiled evolution."""
    if circuit_factory is None:
        oracle = ExactPropagator(model, g, include_v0)
        return lambda state, times: oracle.evolve_many(state, times, sign)

    def run(state, times):
        times = np.asarray(times, dtype=float)
        dts = np.diff(times, prepend=0.0)
        cache = {}
        out, cur = [], state
        for dt in dts:
            if dt != 0.0:
                key = round(float(dt), 12)
                if key not in cache:
                    cache[key] = circuit_factory(dt)
                cur = apply_gates(cur, cache[key], backend)
            out.append(cur)
        return out

    return run


def population_trace(
    model,
    g,
    initial: StateVector,
    times_au,
    include_v0=True,
    sign=1,
    circuit_factory=None,
    backend="semantic",
    shots=None,
    seed=None,
) -> PopulationTrace:
    """Populations at ``times_au`` (ascending) from the oracle or a compiled circuit per interval."""
    times_au = np.asarray(times_au, dtype=float)
    states = _propagator(model, g, include_v0, sign, circuit_factory, backend)(initial, times_au)
    rng = np.random.default_rng(seed)
    pops = np.array([populations(s, model.n_states_logical, shots, rng) for s in states])
    return PopulationTrace(au_to_fs(times_au), pops, {"sign": sign, "shots": shots})


def _mu_operator(model, mu):
    mu = dipole_matrix(model) if mu is None else _pad(np.asarray(mu, dtype=float), model.n_states)
    return mu


def _apply_mu(mu, state: StateVector) -> StateVector:
    return state.with_amplitudes(np.tensordot(mu, state.amplitudes, axes=(1, 0)))


def autocorrelation(
    model,
    g,
    t_max: float,
    n_samples: int,
    mu=None,
    reference: StateVector | None = None,
    include_v0=True,
    sign=1,
    circuit_factory=None,
    backend="semantic",
):
    """``C(t_i) = <psi| U(t)^dag mu U(t) mu |psi>`` on ``t_i = i*t_max/(n_samples-1)``.

    ``U(t) = exp(i*sign*t*H)``; ``reference`` defaults to ``|0> (x) chi_0``.
    Returns ``(times, C)``.
    """
    if n_samples < 2:
        raise ValueError("need at least two time samples")
    mu = _mu_operator(model, mu)
    psi = prepare_vertical_excitation(model, g, 0) if reference is None else reference
    times = np.linspace(0.0, t_max, n_samples)
    prop = _propagator(model, g, include_v0, sign, circuit_factory, backend)
    left = prop(psi, times)
    right = prop(_apply_mu(mu, psi), times)
    C = np.array([a.overlap(_apply_mu(mu, b)) for a, b in zip(left, right)])
    return times, C


@dataclass
class SpectrumResult:
    omega: np.ndarray  # atomic units
    intensity: np.ndarray
    damping: float
    dt: float
    meta: dict = field(default_factory=dict)

    @property
    def omega_ev(self):
        return self.omega * HARTREE_IN_EV

    @property
    def bin_width(self) -> float:
        return float(self.omega[1] - self.omega[0])

    def integral(self) -> float:
        return float(np.sum(self.intensity) * self.bin_width)

    def peaks(self, min_height=0.0, top=None) -> np.ndarray:
        """Local maxima, refined by a parabola through each maximum and its neighbours."""
        y = self.intensity
        idx = np.where((y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:]) & (y[1:-1] > min_height))[0] + 1
        if top is not None:
            idx = idx[np.argsort(y[idx])[::-1][:top]]
        out = []
        for i in sorted(idx):
            a, b, c = y[i - 1], y[i], y[i + 1]
            den = a - 2 * b + c
            shift = 0.5 * (a - c) / den if den != 0 else 0.0
            out.append(self.omega[i] + shift * self.bin_width)
        return np.array(out)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["omega_ev", "intensity"])
        for w, s in zip(self.omega_ev, self.intensity):
            writer.writerow([repr(float(w)), repr(float(s))])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {
                "omega_ev": self.omega_ev.tolist(),
                "intensity": self.intensity.tolist(),
                "damping": self.damping,
                "meta": self.meta,
            },
            indent=2,
            sort_keys=True,
        )


def spectrum(times, C, damping: float | None = None, pad_factor: int = 4) -> SpectrumResult:
    """Damped two-sided transform of uniformly sampled ``C(t)``, ``t >= 0``.

    Negative times follow from ``C(-t) = conj(C(t))``, giving
    ``S(w) = dt/(2 pi) * (2 Re sum_i exp(-i w t_i) g_i - g_0)`` with
    ``g_i = C(t_i) exp(-eta t_i)``. The trapezoid weight on ``g_0`` makes
    ``sum S * dw`` equal ``Re C(0)`` exactly.
    """
    times = np.asarray(times, dtype=float)
    C = np.asarray(C, dtype=complex)
    if times.size < 2:
        raise ValueError("need at least two samples")
    dt = float(times[1] - times[0])
    if not np.allclose(np.diff(times), dt, rtol=1e-9, atol=0):
        raise ValueError("time samples must be uniform")
    t_max = float(times[-1] - times[0])
    eta = 5.0 / t_max if damping is None else float(damping)
    if eta <= 0:
        raise ValueError(f"damping must be positive, got {eta}")
    gvals = C * np.exp(-eta * (times - times[0]))
    n_pad = max(2 * times.size, int(pad_factor) * times.size)
    G = np.fft.fft(gvals, n=n_pad)  # sum_i g_i exp(-2 pi i k i / n)
    S = dt / (2 * np.pi) * (2 * G.real - gvals[0].real)
    omega = 2 * np.pi * np.fft.fftfreq(n_pad, d=dt)
    order = np.argsort(omega)
    return SpectrumResult(omega[order], S[order], eta, dt, {"n_samples": int(times.size), "n_pad": n_pad})


def mirror(result: SpectrumResult) -> SpectrumResult:
    """Spectrum under the opposite time-evolution sign: ``S(w) -> S(-w)``."""
    return SpectrumResult(-result.omega[::-1], result.intensity[::-1], result.damping, result.dt, dict(result.meta))


def parseval_residual(times, C, result: SpectrumResult) -> float:
    """``|sum S dw - Re C(0)|``: the transform's zero-time consistency check."""
    return abs(result.integral() - float(np.real(C[0])))
