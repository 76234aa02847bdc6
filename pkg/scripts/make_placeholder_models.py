"""Regenerate the placeholder model files shipped in ``src/vibronic/data``.

Only the dimensions (states, modes, coupling degree) correspond to the
systems the files are named after. Every number is drawn from a seeded
generator at magnitudes typical of organic chromophores (frequencies
0.02-0.2 eV, couplings tens of meV); none is a fitted physical parameter.

    python3 scripts/make_placeholder_models.py
"""

import json
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "vibronic" / "data"

MODELS = [
    # file stem, states, modes, degree, seed
    ("no4_anth_n5_m19_qvc", 5, 19, 2, 1905),
    ("no4_anth_dimer_n6_m21_qvc", 6, 21, 2, 2106),
    ("anth_c60_n4_m11_lvc", 4, 11, 1, 1104),
    ("anth_c60_n4_m246_lvc", 4, 246, 1, 24604),
]

NOTE = (
    "PLACEHOLDER PARAMETERS: only the numbers of states, modes and the coupling degree "
    "match the named system; all values are synthetic (seeded) and are not physical parameters."
)


def _r(x):
    return float(f"{x:.6g}")


def build(stem, n, m, degree, seed):
    rng = np.random.default_rng(seed)
    freqs = np.sort(np.exp(rng.uniform(np.log(0.02), np.log(0.2), m)))
    couplings = []

    def add(j, i, powers, value):
        couplings.append({"bra": j, "ket": i, "powers": powers, "value": _r(value)})

    # vertical energies and constant couplings
    for j in range(n):
        add(j, j, [], 0.1 * j + rng.normal(0, 0.02))
        for i in range(j + 1, n):
            add(j, i, [], rng.normal(0, 0.05))
    # linear terms; the per-mode scale shrinks with sqrt(M) so the total
    # reorganization energy stays comparable across model sizes
    scale = 0.08 / np.sqrt(m / 10)
    for r in range(m):
        for j in range(n):
            add(j, j, [[r, 1]], rng.normal(0, scale))
            for i in range(j + 1, n):
                if rng.random() < 0.3:
                    add(j, i, [[r, 1]], rng.normal(0, 0.4 * scale))
    if degree >= 2:
        qscale = 0.01 / np.sqrt(m / 10)
        for j in range(n):
            for r in range(m):
                add(j, j, [[r, 2]], rng.normal(0, qscale))
                for s in range(r + 1, m):
                    if rng.random() < 0.5:
                        add(j, j, [[r, 1], [s, 1]], rng.normal(0, 0.3 * qscale))
    dipole = np.zeros((n, n))
    dipole[0, 1:] = dipole[1:, 0] = [_r(x) for x in rng.uniform(0.2, 1.0, n - 1)]
    dipole[0, 1] = dipole[1, 0] = 1.0
    return {
        "name": stem,
        "note": NOTE,
        "states": n,
        "unit": "eV",
        "modes": [_r(w) for w in freqs],
        "max_degree": degree,
        "couplings": couplings,
        "dipole": dipole.tolist(),
    }


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for spec in MODELS:
        doc = build(*spec)
        (OUT / f"{spec[0]}.json").write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
        print(f"wrote {spec[0]}.json ({len(doc['couplings'])} couplings)")


if __name__ == "__main__":
    main()
