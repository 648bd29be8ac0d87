"""Expected ideal-pair states after each of the eight circuit steps.

Each state is written out as a sum of product terms in the input coefficients,
independently of the element-by-element simulator, and then laid onto the
canonical tensor layout. Photon c's L-path detour (c1 -> c4, c2 -> c5) is open
after steps 6 and 7; terms on that path carry a ``shift`` flag.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .hilbert import CANONICAL_LAYOUT, HyperState, InputSpec

_S = 1 / math.sqrt(2)

# A factor is a list of (coefficient, assignment) pairs; an assignment maps
# keys such as ("a", "pol"), ("c", "mode"), ("c", "shift") or ("nv", "1") to values.


def _f(*terms):
    return [(c, dict(a)) for c, a in terms]


def _prod(*factors):
    out = [(1.0 + 0j, {})]
    for fac in factors:
        nxt = []
        for (c1, a1), (c2, a2) in itertools.product(out, fac):
            clash = [k for k in a1.keys() & a2.keys() if a1[k] != a2[k]]
            if clash:
                raise ValueError(f"conflicting assignment for {clash}")
            nxt.append((c1 * c2, {**a1, **a2}))
        out = nxt
    return out


def _sum(*factors):
    return [t for fac in factors for t in fac]


def _pol(photon, coefs, pols=("R", "L")):
    return _f(*[(c, {(photon, "pol"): p}) for c, p in zip(coefs, pols)])


def _modes(photon, coefs, modes):
    return _f(*[(c, {(photon, "mode"): m}) for c, m in zip(coefs, modes)])


def _spin(nv, s):
    return _f((1.0, {("nv", nv): s}))


def _nv_init(nv, sign):
    return _f((_S, {("nv", nv): "+"}), (sign * _S, {("nv", nv): "-"}))


def _to_state(terms, layout=CANONICAL_LAYOUT) -> HyperState:
    amp = np.zeros(layout.shape, dtype=complex)
    for c, a in terms:
        ix = []
        for p in layout.photons:
            ix.append("RL".index(a[(p.name, "pol")]))
            m = p.modes.index(a[(p.name, "mode")])
            if a.get((p.name, "shift")):
                m += 3
            ix.append(m)
        for n in layout.nvs:
            ix.append("+-".index(a[("nv", n.name)]))
        amp[tuple(ix)] += c
    return HyperState(layout, amp)


def expected_checkpoints(spec: InputSpec) -> dict:
    """Ideal states after steps "1" .. "8" for a product input, keyed like the simulator's checkpoints."""
    al, sg = spec.photons["a"].pol, spec.photons["a"].spatial
    be, ze = spec.photons["b"].pol, spec.photons["b"].spatial
    de, xi = spec.photons["c"].pol, spec.photons["c"].spatial

    a_pol = _pol("a", al)
    a_sp = _modes("a", sg, ("a1", "a2"))
    b_sp = _modes("b", ze, ("b1", "b2"))
    c_pol = _pol("c", de)
    c12 = _modes("c", xi, ("c1", "c2"))
    c12_minus = _modes("c", (xi[0], -xi[1]), ("c1", "c2"))
    e2, e3, e4 = _nv_init("2", -1), _nv_init("3", 1), _nv_init("4", -1)

    b_nv1 = _sum(_prod(_pol("b", (be[0],), ("R",)), _spin("1", "-")), _prod(_pol("b", (be[1],), ("L",)), _spin("1", "+")))
    bR1 = _prod(_pol("b", (be[0],), ("R",)), _spin("1", "-"))
    bL1 = _prod(_pol("b", (be[1],), ("L",)), _spin("1", "+"))
    aR2 = _prod(_pol("a", (al[0],), ("R",)), _spin("2", "+"))
    aL2 = _prod(_pol("a", (al[1],), ("L",)), _spin("2", "-"))

    # photons a, b and c-spatial with NV1 and NV2, as it stands from step 4 on
    block = _sum(
        _prod(aR2, b_nv1, c12),
        _prod(aL2, _sum(_prod(bR1, c12), _prod(bL1, c12_minus))),
    )

    # photon b spatial and c polarization with NV3, and photon a spatial with NV4
    b_nv3 = _sum(_prod(_modes("b", (ze[0],), ("b1",)), _spin("3", "+")), _prod(_modes("b", (ze[1],), ("b2",)), _spin("3", "-")))
    c_shifted = _f((de[0], {("c", "pol"): "R"}), (de[1], {("c", "pol"): "L", ("c", "shift"): True}))
    c_shifted_r = _f((de[0], {("c", "pol"): "R"}), (de[1], {("c", "pol"): "R", ("c", "shift"): True}))
    b_c_nv3 = _sum(
        _prod(_modes("b", (ze[0],), ("b1",)), c_shifted_r, _spin("3", "+")),
        _prod(_modes("b", (ze[1],), ("b2",)), c_shifted, _spin("3", "-")),
    )
    a_nv4 = _sum(_prod(_modes("a", (sg[0],), ("a1",)), _spin("4", "-")), _prod(_modes("a", (sg[1],), ("a2",)), _spin("4", "+")))
    c_minus = _pol("c", (de[0], -de[1]))

    cp = {}
    cp["1"] = _prod(a_pol, a_sp, c_pol, c12, e2, e3, e4, b_sp, b_nv1)
    cp["2"] = _prod(
        a_pol, a_sp, e2, e3, e4, b_sp, c_pol,
        _sum(
            _prod(bR1, _modes("c", (xi[0], -xi[1]), ("c1", "c3"))),
            _prod(bL1, _modes("c", xi, ("c1", "c2"))),
        ),
    )
    cp["3"] = _prod(
        a_sp, b_sp, c_pol, _sum(aR2, aL2),
        _sum(_prod(bR1, _modes("c", (xi[0], -xi[1]), ("c1", "c3"))), _prod(bL1, c12)),
        e3, e4,
    )
    cp["4"] = _prod(a_sp, b_sp, c_pol, block, e3, e4)
    cp["5"] = _prod(block, a_sp, b_nv3, c_pol, e4)
    cp["6"] = _prod(block, a_sp, b_c_nv3, e4)
    cp["7"] = _prod(block, a_nv4, b_c_nv3)
    cp["8"] = _prod(
        block,
        _sum(
            _prod(_modes("a", (sg[0],), ("a1",)), _spin("4", "-"), b_nv3, c_pol),
            _prod(
                _modes("a", (sg[1],), ("a2",)),
                _spin("4", "+"),
                _sum(
                    _prod(_modes("b", (ze[0],), ("b1",)), c_pol, _spin("3", "+")),
                    _prod(_modes("b", (ze[1],), ("b2",)), c_minus, _spin("3", "-")),
                ),
            ),
        ),
    )
    return {k: _to_state(v) for k, v in cp.items()}


def checkpoint_overlaps(spec: InputSpec, checkpoints: dict) -> dict:
    """|<expected|simulated>| per step, both normalized."""
    out = {}
    for k, exp in expected_checkpoints(spec).items():
        got = checkpoints[k].amplitudes.ravel()
        e = exp.amplitudes.ravel()
        out[k] = float(abs(np.vdot(e, got)) / (np.linalg.norm(e) * np.linalg.norm(got)))
    return out


def term_signs(spec: InputSpec, checkpoints: dict, atol: float = 1e-9) -> dict:
    """Per step, the basis entries whose simulated amplitude is the negative of the expected one.

    Amplitudes are compared after removing the global phase. An empty list
    means the step agrees term by term.
    """
    out = {}
    for k, exp in expected_checkpoints(spec).items():
        e = exp.amplitudes.ravel()
        g = checkpoints[k].amplitudes.ravel()
        ov = np.vdot(e, g)
        phase = ov / abs(ov) if abs(ov) > 0 else 1.0
        g = g / phase
        flipped = np.nonzero((np.abs(e) > atol) & (np.abs(g + e) <= atol))[0]
        out[k] = [tuple(int(i) for i in np.unravel_index(j, exp.layout.shape)) for j in flipped]
    return out
