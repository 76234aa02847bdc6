"""Two-state walkthrough: population transfer, compiled vs exact, and the absorption spectrum.

Run with ``python3 demos/rabi_and_spectrum.py``.
"""

import numpy as np

from vibronic.circuit import FixedPoint, build_evolution
from vibronic.grid import GridConfig
from vibronic.model import MultiIndex, VibronicModel
from vibronic.observables import autocorrelation, population_trace, prepare_vertical_excitation, spectrum
from vibronic.resources import count_toffoli

Q0 = MultiIndex.from_powers([(0, 1)])

# one mode, a shifted upper surface and a weak linear coupling (atomic units)
model = VibronicModel.from_terms(
    2,
    [0.2],
    {(1, 1, MultiIndex()): 0.5, (1, 1, Q0): 0.1, (0, 1, MultiIndex()): 0.03, (0, 1, Q0): 0.01},
    dipole=np.array([[0.0, 1.0], [1.0, 0.0]]),
)
g = GridConfig(3)
psi0 = prepare_vertical_excitation(model, g, 1)
times = np.linspace(0.0, 200.0, 11)

exact = population_trace(model, g, psi0, times)


def factory(dt):
    return build_evolution(model, g, dt, 8, 2, FixedPoint(w_frac=20))


compiled = population_trace(model, g, psi0, times, circuit_factory=factory)

print("t (au)   p_1 exact   p_1 compiled")
for t, a, b in zip(times, exact.populations[:, 1], compiled.populations[:, 1]):
    print(f"{t:7.1f}  {a:.6f}    {b:.6f}")

circuit = factory(times[1])
toffoli, classes = count_toffoli(circuit)
print(f"\none interval: {len(circuit)} gates, {toffoli} Toffolis {classes}")

t, C = autocorrelation(model, g, 2000.0, 4001)
result = spectrum(t, C)
print("\nstrongest spectral lines (eV):", np.round(result.peaks(top=3) * 27.211386245988, 4))
print(f"integral of S = {result.integral():.12f}, C(0) = {C[0].real:.12f}")
