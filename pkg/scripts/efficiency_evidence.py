"""Regenerate tests/data/efficiency_evidence.json.

The average "all photons survive" efficiency of the gate is an exact
polynomial in a real reflection amplitude r (with r0 = -1). Because photons
a, b, c pass steps 1-4 and 5-8 through disjoint NV pairs, it factors into one
polynomial per half of the circuit. Coefficients are extracted by sampling r on
the unit circle and taking an FFT, then rounded to exact rationals over 2048.

Usage: python3 scripts/efficiency_evidence.py [output.json]
"""

import json
import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path
from types import SimpleNamespace

import numpy as np

from hyperc2pf import metrics
from hyperc2pf.cavity import resonant_pair
from hyperc2pf.gate import canonical_script, transfer_columns

N = 16
DEN = 2048


def _poly(script, project: bool) -> list:
    mats = []
    for k in range(N):
        # unit-modulus samples only: the pair is never physical, so skip validation
        pair = SimpleNamespace(r=np.exp(2j * np.pi * k / N), r0=-1 + 0j)
        m = transfer_columns(script, pair)
        if project:
            m = m.reshape(*script.layout.shape, -1)[..., :2, :, :, :, :, :].reshape(-1, m.shape[-1])
        mats.append(m)
    c = np.fft.fft(np.array(mats), axis=0) / N
    p = np.zeros(2 * N - 1)
    for d in range(N):
        for e in range(N):
            p[d + e] += np.sum((c[d] * c[e].conj()).real)
    p /= mats[0].shape[-1]
    scaled = p * DEN
    ints = np.rint(scaled).astype(int)
    if np.max(np.abs(scaled - ints)) > 1e-6:
        raise RuntimeError("coefficients are not multiples of 1/2048")
    while len(ints) > 1 and ints[-1] == 0:
        ints = ints[:-1]
    return [int(v) for v in ints]


def _eval(coefs, r) -> Fraction:
    return sum(Fraction(c, DEN) * r**k for k, c in enumerate(coefs))


def main(out: str) -> None:
    s = canonical_script()
    bare = replace(s, measurements=(), feed_forward=())
    halves = {
        "steps_1_4": replace(bare, steps=s.steps[:4]),
        "steps_5_8": replace(bare, steps=s.steps[4:]),
    }
    polys = {name: _poly(sc, project=True) for name, sc in halves.items()}
    unprojected = {name: _poly(sc, project=False) for name, sc in halves.items()}

    def product(r):
        return _eval(polys["steps_1_4"], r) * _eval(polys["steps_5_8"], r)

    grid = [0.5 + 0.45 * k for k in range(11)]
    rows = []
    for x in grid:
        pair = resonant_pair(x)
        eta = metrics.exact_efficiency(pair)[0]
        r = Fraction(pair.r.real).limit_denominator(10**12)
        rows.append(
            {
                "x": x,
                "r": pair.r.real,
                "eta_all_survive": eta,
                "eta_photon_fraction": metrics.exact_efficiency(pair, "photon_fraction")[0],
                "eta_polynomial": float(product(r)),
                "eta_closed_corrected": metrics.efficiency_closed_form(pair.r.real),
                "eta_closed_printed": metrics.efficiency_closed_form(pair.r.real, "printed"),
            }
        )
    doc = {
        "about": "Average efficiency of the simulated gate versus the published closed form (r0 = -1).",
        "denominator": DEN,
        "all_survive_factors": polys,
        "unprojected_factors": unprojected,
        "closed_form_at_0": str(metrics.efficiency_closed_form(Fraction(0))),
        "closed_form_bracket_factors_at_0": ["121/512", "91/256"],
        "model_at_0": {
            "all_survive": str(product(Fraction(0))),
            "photon_fraction": rows[0]["eta_photon_fraction"],
        },
        "grid": rows,
    }
    Path(out).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else str(Path(__file__).resolve().parents[1] / "tests/data/efficiency_evidence.json"))
