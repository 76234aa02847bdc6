"""How much the depth-first product cache saves on a cubic model."""

import numpy as np

from vibronic.circuit.schedule import schedule_monomials
from vibronic.grid import GridConfig
from vibronic.model import MultiIndex, VibronicModel
from vibronic.resources import estimate_step

rng = np.random.default_rng(0)
M = 5
terms = {}
for a in range(M):
    for b in range(a, M):
        terms[(0, 1, MultiIndex.from_factors((a, b)))] = rng.normal(0, 0.01)
        for c in range(b, M):
            terms[(0, 0, MultiIndex.from_factors((a, b, c)))] = rng.normal(0, 0.001)
model = VibronicModel.from_terms(2, np.ones(M), terms)

for step in schedule_monomials([k[2] for k in terms if k[0] == 0][:6]):
    print(step)

g = GridConfig(4)
on = estimate_step(model, g, 2, caching=True).toffoli_per_step
off = estimate_step(model, g, 2, caching=False).toffoli_per_step
print(f"\nper step: {on} Toffolis cached, {off} uncached ({100 * (off - on) / off:.1f}% saved)")
