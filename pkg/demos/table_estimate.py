"""Resource table for the bundled Table-1-sized models at a fixed step count.

The bundled couplings are placeholders; only the dimensions follow the named
systems. Pass ``--fit`` to select step counts empirically (slow, about a
minute per model).
"""

import sys
from importlib.resources import files

from vibronic.grid import GridConfig
from vibronic.model import load_model
from vibronic.resources import estimate_total, format_table
from vibronic.units import fs_to_au

ROWS = [
    ("no4_anth_n5_m19_qvc", 0.01),
    ("no4_anth_dimer_n6_m21_qvc", 0.01),
    ("anth_c60_n4_m11_lvc", 0.01),
    ("anth_c60_n4_m246_lvc", 0.01),
]

fit = "--fit" in sys.argv
reports = []
for name, eps in ROWS:
    model = load_model(files("vibronic") / "data" / f"{name}.json")
    r = None if fit else 100
    reports.append(estimate_total(model, GridConfig(4), fs_to_au(100.0), eps, 2, r=r))
print(format_table(reports), end="")
for rep in reports:
    print(f"{rep.name}: {rep.toffoli_per_step} Toffolis per step, by class {rep.breakdown['by_class']}")
