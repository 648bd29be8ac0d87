"""Dense-operator reference for the circuit simulator.

Every element is rebuilt here as an explicit sparse matrix over the full basis,
by listing what it does to each basis configuration. Nothing is shared with the
tensor-axis code in ``hilbert`` except the layout description, so agreement
between the two is a meaningful check.
"""

from __future__ import annotations

import itertools
import math
from functools import reduce

import numpy as np
import scipy.sparse as sp

from .gate import BeamSplitter, CircuitScript, Encounter, Hwp, NvHadamard, PolarizingSplitter, computational_basis
from .hilbert import POLARIZATIONS, SPIN_INIT

_S = 1 / math.sqrt(2)


def _basis(layout):
    return list(itertools.product(*[range(d) for d in layout.shape]))


def _flat(layout, index) -> int:
    return int(np.ravel_multi_index(index, layout.shape))


def _rules(layout, el, pairs):
    """Return f(index) -> list of (new_index, amplitude) describing the element on one basis state."""
    names = [p.name for p in layout.photons]

    if isinstance(el, NvHadamard):
        ax = 2 * len(names) + [n.name for n in layout.nvs].index(el.nv)

        def f(ix):
            s = ix[ax]
            up = ix[:ax] + (0,) + ix[ax + 1 :]
            dn = ix[:ax] + (1,) + ix[ax + 1 :]
            return [(up, _S), (dn, _S if s == 0 else -_S)]

        return f

    k = names.index(el.photon)
    pol_ax, sp_ax = 2 * k, 2 * k + 1
    modes = layout.photons[k].modes
    sel = set(range(len(modes))) if el.modes is None else {modes.index(m) for m in el.modes}

    if isinstance(el, Hwp):

        def f(ix):
            if ix[sp_ax] not in sel:
                return [(ix, 1.0)]
            p = ix[pol_ax]
            r_ix = ix[:pol_ax] + (0,) + ix[pol_ax + 1 :]
            l_ix = ix[:pol_ax] + (1,) + ix[pol_ax + 1 :]
            if el.kind == "X":
                return [(l_ix if p == 0 else r_ix, 1.0)]
            return [(r_ix, _S), (l_ix, _S if p == 0 else -_S)]

        return f

    if isinstance(el, BeamSplitter):
        m1, m2 = (modes.index(m) for m in el.modes)

        def f(ix):
            s = ix[sp_ax]
            if s not in (m1, m2):
                return [(ix, 1.0)]
            a = ix[:sp_ax] + (m1,) + ix[sp_ax + 1 :]
            b = ix[:sp_ax] + (m2,) + ix[sp_ax + 1 :]
            return [(a, _S), (b, _S if s == m1 else -_S)]

        return f

    if isinstance(el, PolarizingSplitter):
        m1, m2 = (modes.index(m) for m in el.modes)

        def f(ix):
            s = ix[sp_ax]
            if ix[pol_ax] == 0 or s not in (m1, m2):
                return [(ix, 1.0)]
            other = m2 if s == m1 else m1
            return [(ix[:sp_ax] + (other,) + ix[sp_ax + 1 :], 1.0)]

        return f

    if isinstance(el, Encounter):
        spin_ax = 2 * len(names) + [n.name for n in layout.nvs].index(el.nv)
        pair = pairs[el.nv]

        def f(ix):
            if ix[sp_ax] not in sel:
                return [(ix, 1.0)]
            entering = el.routing.value[ix[pol_ax]]
            if entering is None:
                return [(ix, 1.0)]
            spin = "+-"[ix[spin_ax]]
            coupled = (entering, spin) in (("R", "+"), ("L", "-"))
            return [(ix, pair.r if coupled else pair.r0)]

        return f

    raise TypeError(f"unsupported element {el!r}")


def element_matrix(layout, el, pairs) -> sp.csr_matrix:
    f = _rules(layout, el, pairs)
    rows, cols, vals = [], [], []
    for ix in _basis(layout):
        j = _flat(layout, ix)
        for out, amp in f(ix):
            rows.append(_flat(layout, out))
            cols.append(j)
            vals.append(amp)
    n = layout.size
    return sp.csr_matrix((np.array(vals, dtype=complex), (rows, cols)), shape=(n, n))


def script_operator(script: CircuitScript, pair) -> sp.csr_matrix:
    pairs = pair if isinstance(pair, dict) else {n.name: pair for n in script.layout.nvs}
    mats = [element_matrix(script.layout, el, pairs) for el in script.elements]
    return reduce(lambda acc, m: m @ acc, mats, sp.identity(script.layout.size, dtype=complex, format="csr"))


def input_columns(layout) -> np.ndarray:
    """Basis product inputs (photonic basis state times NV preparations) as columns."""
    spins = reduce(np.kron, [SPIN_INIT[n.init] for n in layout.nvs], np.ones(1, dtype=complex))
    cols = []
    for conf in computational_basis(layout):
        vec = np.ones(1, dtype=complex)
        for p in layout.photons:
            pol, mode = conf[p.name]
            e_pol = np.zeros(2, dtype=complex)
            e_pol[POLARIZATIONS.index(pol)] = 1
            e_sp = np.zeros(len(p.modes), dtype=complex)
            e_sp[p.modes.index(mode)] = 1
            vec = np.kron(vec, np.kron(e_pol, e_sp))
        cols.append(np.kron(vec, spins))
    return np.array(cols).T


def dense_transfer(script: CircuitScript, pair) -> np.ndarray:
    """Pre-measurement outputs for every photonic basis input, as columns."""
    return script_operator(script, pair) @ input_columns(script.layout)


def output_mask(layout) -> np.ndarray:
    """1 on basis states where every photon sits in one of its first two modes."""
    mask = np.zeros(layout.size)
    for ix in _basis(layout):
        if all(ix[2 * k + 1] < 2 for k in range(len(layout.photons))):
            mask[_flat(layout, ix)] = 1
    return mask
