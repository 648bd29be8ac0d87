"""Average fidelity and efficiency of the hyper-C^2PF gate against coupling strength.

The circuit is linear in the photonic input, so for a fixed reflection pair it
is captured by its transfer columns on the 64 photonic basis inputs. Every
quantity averaged here is a ratio of quadratic forms in the product input
vector, and the forms reduce to 64x64 Gram matrices; ``GateModel`` holds them.
``fidelity_single`` and ``efficiency_single`` instead run the script directly
and serve as the per-sample reference.

Efficiency has two candidate meanings:

* ``"all_survive"``: squared norm of the realistic output restricted to the
  output ports, i.e. the probability that all three photons come out.
* ``"photon_fraction"``: expected fraction of the three photons that come out,
  computed by tracking every loss event as a separate, incoherent branch.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import hilbert as hb
from .cavity import ReflectionPair, resonant_pair
from .gate import (
    CircuitScript,
    Encounter,
    GateFailure,
    branch_operators,
    canonical_script,
    evolve,
    transfer_columns,
)
from .hilbert import HyperState, InputSpec

TWO_PI = 2 * math.pi
# Product-vector index order is (pol_a, spat_a, pol_b, spat_b, pol_c, spat_c);
# angles come as (alpha, beta, delta, sigma, zeta, xi).
_ANGLE_ORDER = (0, 3, 1, 4, 2, 5)
DEFINITIONS = ("all_survive", "photon_fraction")


def default_workers() -> int:
    return int(os.environ.get("HYPERC2PF_WORKERS", "1"))


# -- samplers ------------------------------------------------------------------


@dataclass(frozen=True)
class MonteCarlo:
    n: int = 100_000
    seed: int = 0
    chunk: int = 10_000

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("Monte Carlo needs at least two samples")


@dataclass(frozen=True)
class ProductQuadrature:
    """Uniform trapezoidal nodes pi*j/points, j < points, for each of the six angles.

    The integrands have period pi in every angle, so these nodes resolve as
    much as twice as many nodes spread over [0, 2pi).

    ``refine_to`` reruns at a finer grid and reports the difference as the error
    estimate; ``None`` skips it.
    """

    points: int = 8
    refine_to: Optional[int] = 16

    def __post_init__(self):
        if self.points < 2:
            raise ValueError("quadrature needs at least two points per angle")


@dataclass(frozen=True)
class Estimate:
    mean: float
    se: float
    n: int


# -- closed form ---------------------------------------------------------------


def _f(r):
    return 128 * r + 164 * r**2 + 40 * r**3 + 14 * r**4 + r**5 * (2 + r) ** 2 * (4 + r)


def _h(r):
    return 58 * r + 42 * r**2 + 18 * r**3 + 12 * r**4 + 14 * r**5 + 14 * r**6 + r**7 * (6 + r)


def efficiency_closed_form(r_mag, reading: str = "corrected"):
    """Closed-form average-efficiency polynomial in |r| used as a reference curve.

    ``"corrected"`` reads it as ``(121 + f) * (91 + h) / 131072``, the only
    bracketing that gives 1 at |r| = 1. ``"printed"`` keeps the bracketing
    ``(121 + f * (91 + h)) / 131072``. Exact for ``Fraction`` input.

    The simulated circuit does not reproduce this curve under either
    efficiency definition; the exact simulated polynomial is archived in
    ``tests/data/efficiency_evidence.json``.
    """
    if r_mag < 0 or r_mag > 1:
        raise ValueError(f"|r| must lie in [0, 1], got {r_mag}")
    if reading == "corrected":
        num = (121 + _f(r_mag)) * (91 + _h(r_mag))
    elif reading == "printed":
        num = 121 + _f(r_mag) * (91 + _h(r_mag))
    else:
        raise ValueError(f"unknown reading {reading!r}")
    if isinstance(r_mag, (Fraction, int)):
        return Fraction(num, 131072)
    return num / 131072


# -- direct (per-sample) path --------------------------------------------------


def _script(script):
    return script if script is not None else canonical_script()


def _outputs(angles, pair, script):
    spec = InputSpec.from_angles(angles, [p.name for p in script.layout.photons])
    state = hb.product_input(spec, script.layout)
    ideal = evolve(state, script, ReflectionPair.ideal_pair())
    real = hb.output_projection(evolve(state, script, pair))
    return ideal, real


def fidelity_single(angles: Sequence[float], pair, script: Optional[CircuitScript] = None) -> float:
    """|<ideal|realistic>|^2 between normalized pre-measurement outputs for one input."""
    script = _script(script)
    ideal, real = _outputs(angles, pair, script)
    n = hb.norm(real)
    if n <= 1e-150:
        raise GateFailure("realistic output has zero norm")
    return abs(hb.inner_product(ideal, real)) ** 2 / (hb.norm(ideal) ** 2 * n**2)


def efficiency_single(angles: Sequence[float], pair, script: Optional[CircuitScript] = None) -> float:
    """Probability that all photons leave through the output ports, for one input."""
    script = _script(script)
    _, real = _outputs(angles, pair, script)
    return hb.norm(real) ** 2


# -- loss tracking ---------------------------------------------------------------


def loss_branches(state: HyperState, script: CircuitScript, pair) -> dict:
    """Evolve while splitting off every loss event as its own incoherent branch.

    Keys are tuples with one entry per photon: 0 while present, otherwise the
    1-based index of the encounter where it was lost. A lost photon stays
    frozen in the mode and polarization it had when it entered the cavity and
    is skipped by all later elements; spins keep evolving.
    """
    pairs = pair if isinstance(pair, dict) else {n.name: pair for n in script.layout.nvs}
    lay = script.layout
    names = [p.name for p in lay.photons]
    branches = {(0,) * len(names): state}
    enc_id = 0
    for el in script.elements:
        if not isinstance(el, Encounter):
            new = {}
            for key, st in branches.items():
                photon = getattr(el, "photon", None)
                if photon is not None and key[names.index(photon)] != 0:
                    new[key] = st
                else:
                    new[key] = el.apply(st, pairs)
            branches = new
            continue
        enc_id += 1
        k = names.index(el.photon)
        new = {}
        for key, st in branches.items():
            if key[k] != 0:
                new[key] = st
                continue
            new[key] = el.apply(st, pairs)
            lost = _lost_part(st, el, pairs[el.nv])
            if lost is not None:
                lk = key[:k] + (enc_id,) + key[k + 1 :]
                new[lk] = lost
        branches = new
    return branches


def _lost_part(state: HyperState, el: Encounter, pair) -> Optional[HyperState]:
    lay = state.layout
    cols = lay.mode_indices(el.photon, el.modes)
    spin = lay.spin_axis(el.nv)
    pol_axis = lay.pol_axis(el.photon)
    amp = state.amplitudes
    out = np.zeros_like(amp)
    nd = amp.ndim
    for p, entering in enumerate(el.routing.value):
        if entering is None:
            continue
        leak = np.sqrt(np.clip(1 - np.abs(hb.coupling_factors(pair, entering)) ** 2, 0, None))
        if not np.any(leak):
            continue
        idx = [slice(None)] * nd
        idx[pol_axis] = slice(p, p + 1)
        idx[lay.spat_axis(el.photon)] = cols
        idx = tuple(idx)
        shape = [1] * nd
        shape[spin] = 2
        out[idx] = amp[idx] * leak.reshape(shape)
    if not np.any(out):
        return None
    return state.with_amplitudes(out)


def _photon_in_output(state: HyperState, photon: str) -> np.ndarray:
    amp = state.amplitudes.copy()
    lay = state.layout
    idx = [slice(None)] * amp.ndim
    idx[lay.spat_axis(photon)] = slice(2, None)
    amp[tuple(idx)] = 0
    return amp


# -- Gram-matrix model -----------------------------------------------------------


class GateModel:
    """Transfer operators of a script for one reflection pair, reduced to 64x64 forms.

    For a product input vector v on the photonic computational basis:
    overlap = v^H G_cross v, realistic squared norm = v^H G_real v,
    ideal squared norm = v^H G_ideal v.
    """

    def __init__(self, pair, script: Optional[CircuitScript] = None):
        self.script = _script(script)
        self.pair = pair
        ideal = transfer_columns(self.script, ReflectionPair.ideal_pair())
        real = transfer_columns(self.script, pair)
        mask = _output_mask(self.script.layout)
        real = real * mask[:, None]
        self.g_cross = ideal.conj().T @ real
        self.g_real = real.conj().T @ real
        self.g_ideal = ideal.conj().T @ ideal
        self._g_yield = None
        self._post = None

    @property
    def dim(self) -> int:
        return self.g_real.shape[0]

    def yield_form(self) -> np.ndarray:
        """Gram form of the expected surviving-photon fraction."""
        if self._g_yield is None:
            lay = self.script.layout
            from .gate import computational_basis

            inputs = np.stack([hb.basis_state(lay, b).amplitudes for b in computational_basis(lay)])
            branches = loss_branches(HyperState(lay, inputs), self.script, self.pair)
            n_ph = len(lay.photons)
            g = np.zeros((len(inputs), len(inputs)), dtype=complex)
            for key, st in branches.items():
                for k, p in enumerate(lay.photons):
                    if key[k] != 0:
                        continue
                    # photon k must be in an output port; lost photons count as absent, not as failures
                    amp = _photon_in_output(st, p.name).reshape(len(inputs), -1).T
                    g += amp.conj().T @ amp
            self._g_yield = g / n_ph
        return self._g_yield

    def post_forms(self):
        """Per-branch forms for the post-feed-forward fidelity."""
        if self._post is None:
            ideal_ops = branch_operators(self.script, ReflectionPair.ideal_pair())
            real_ops = _real_branch_operators(self.script, self.pair)
            target = next(iter(ideal_ops.values()))
            target = target / (np.linalg.norm(target) / math.sqrt(target.shape[0]))
            self._post = ([target.conj().T @ k for k in real_ops.values()], sum(k.conj().T @ k for k in real_ops.values()))
        return self._post


def _output_mask(layout) -> np.ndarray:
    mask = np.zeros(layout.shape)
    idx = []
    for _ in layout.photons:
        idx += [slice(None), slice(0, 2)]
    mask[tuple(idx)] = 1
    return mask.ravel()


def _real_branch_operators(script, pair) -> dict:
    """Branch operators for a lossy pair, with wrong-port amplitude discarded first."""
    import itertools

    from .gate import MeasurementRecord, _computational_slice, _spin_vectors, computational_basis, feed_forward

    lay = script.layout
    inputs = np.stack([hb.basis_state(lay, b).amplitudes for b in computational_basis(lay)])
    pre = hb.output_projection(evolve(HyperState(lay, inputs), script, pair))
    comp = _computational_slice(lay)
    ops = {}
    for combo in itertools.product(("+'", "-'"), repeat=len(script.measurements)):
        outcomes = dict(zip(script.measurements, combo))
        branch = pre
        for nv in script.measurements:
            branch = hb.project_nv(branch, nv, outcomes[nv])
        branch = feed_forward(branch, MeasurementRecord(outcomes, 0.0), script.feed_forward)
        photonic = hb.contract_spins(branch, _spin_vectors(script, outcomes))
        ops[combo] = photonic.amplitudes[(slice(None),) + comp].reshape(len(inputs), -1).T
    return ops


# -- product vectors and quadratic forms -----------------------------------------


def product_vectors(angles: np.ndarray) -> np.ndarray:
    """Rows are the 64-dim photonic product inputs for rows of six angles."""
    angles = np.atleast_2d(angles)
    v = np.ones((len(angles), 1))
    for col in _ANGLE_ORDER:
        u = np.stack([np.cos(angles[:, col]), np.sin(angles[:, col])], axis=1)
        v = (v[:, :, None] * u[:, None, :]).reshape(len(angles), -1)
    return v


def _qform(v: np.ndarray, g: np.ndarray) -> np.ndarray:
    return np.sum((v.conj() @ g) * v, axis=1)


@dataclass(frozen=True)
class _Integrand:
    """A pointwise function of a few quadratic forms of the product input."""

    forms: tuple
    combine: object

    def on_vectors(self, v: np.ndarray) -> np.ndarray:
        return self.combine([_qform(v, g) for g in self.forms])


def _fidelity_integrand(model: GateModel, mode: str) -> _Integrand:
    def check(n_real):
        if np.any(n_real <= 1e-150):
            raise GateFailure("realistic output has zero norm for some input")
        return n_real

    if mode == "pre":

        def combine(q):
            ov, n_real, n_ideal = q
            return np.abs(ov) ** 2 / (n_ideal.real * check(n_real.real))

        return _Integrand((model.g_cross, model.g_real, model.g_ideal), combine)
    if mode == "post":
        forms, total = model.post_forms()

        def combine(q):
            return sum(np.abs(a) ** 2 for a in q[:-1]) / check(q[-1].real)

        return _Integrand(tuple(forms) + (total,), combine)
    raise ValueError(f"unknown fidelity mode {mode!r}")


def _form_integrand(g: np.ndarray) -> _Integrand:
    return _Integrand((g,), lambda q: q[0].real)


def _pair_tensor(g: np.ndarray) -> np.ndarray:
    """Regroup a 64x64 form so axis k holds the (row bit, column bit) pair of factor k."""
    t = g.reshape((2,) * 12)
    t = t.transpose([k for i in range(6) for k in (i, i + 6)])
    return t.reshape((4,) * 6)


def _grid_values(n: int, integrand: _Integrand) -> np.ndarray:
    """Integrand on the n^6 product grid with nodes pi*j/n.

    Every quadratic form is invariant under theta -> theta + pi in each angle
    (the factor just flips sign), so the half period carries the full average.
    Forms are contracted one factor at a time instead of building the 64-dim
    vectors at every node.
    """
    theta = math.pi * np.arange(n) / n
    u = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    w = (u[:, :, None] * u[:, None, :]).reshape(n, 4)
    tensors = [_pair_tensor(g) for g in integrand.forms]
    out = []
    for t in range(n):
        q = []
        for tens in tensors:
            s = np.tensordot(w[t], tens, axes=(0, 0))
            for _ in range(5):
                s = np.tensordot(s, w, axes=([0], [1]))
            q.append(s.ravel())
        out.append(integrand.combine(q))
    return np.concatenate(out)


def _mc_chunks(sampler: MonteCarlo, integrand: _Integrand, workers: int):
    """Per-chunk (sum, sum of squares, count), in a fixed order independent of ``workers``."""
    n_chunks = -(-sampler.n // sampler.chunk)
    seeds = np.random.SeedSequence(sampler.seed).spawn(n_chunks)
    sizes = [min(sampler.chunk, sampler.n - i * sampler.chunk) for i in range(n_chunks)]

    def job(i):
        rng = np.random.default_rng(seeds[i])
        vals = integrand.on_vectors(product_vectors(rng.uniform(0, TWO_PI, size=(sizes[i], 6))))
        return math.fsum(vals), math.fsum(vals * vals), len(vals)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(job, range(n_chunks)))
    return [job(i) for i in range(n_chunks)]


def _mc_estimate(parts) -> Estimate:
    total = math.fsum(p[0] for p in parts)
    total_sq = math.fsum(p[1] for p in parts)
    n = sum(p[2] for p in parts)
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0) * n / (n - 1)
    return Estimate(mean, math.sqrt(var / n), n)


def _grid_mean(n: int, integrand: _Integrand) -> float:
    return math.fsum(_grid_values(n, integrand)) / n**6


def _average(integrand: _Integrand, sampler, workers: Optional[int]) -> Estimate:
    workers = default_workers() if workers is None else workers
    if isinstance(sampler, MonteCarlo):
        return _mc_estimate(_mc_chunks(sampler, integrand, workers))
    if isinstance(sampler, ProductQuadrature):
        mean = _grid_mean(sampler.points, integrand)
        err = 0.0
        if sampler.refine_to:
            err = abs(_grid_mean(sampler.refine_to, integrand) - mean)
        return Estimate(mean, err, sampler.points**6)
    raise TypeError(f"unknown sampler {sampler!r}")


def _model(pair, script, model):
    if model is not None:
        return model
    return GateModel(pair, script)


def average_fidelity(pair, sampler=None, mode: str = "pre", workers: Optional[int] = None, script=None, model=None) -> Estimate:
    """Mean fidelity over uniformly random real product inputs.

    ``mode="pre"`` compares the pre-measurement states; ``"post"`` averages the
    corrected photonic output over measurement branches, weighted by their
    probabilities.
    """
    sampler = sampler or MonteCarlo()
    m = _model(pair, script, model)
    return _average(_fidelity_integrand(m, mode), sampler, workers)


def efficiency_form(model: GateModel, definition: str) -> np.ndarray:
    if definition == "all_survive":
        return model.g_real
    if definition == "photon_fraction":
        return model.yield_form()
    raise ValueError(f"unknown efficiency definition {definition!r}")


def average_efficiency_numeric(
    pair, sampler=None, definition: str = "all_survive", workers: Optional[int] = None, script=None, model=None
) -> Estimate:
    """Mean efficiency over the input angles under ``definition``.

    The integrand is a trigonometric polynomial of degree two in each angle, so
    a product grid with two or more points per angle is exact.
    """
    sampler = sampler or ProductQuadrature(4, None)
    m = _model(pair, script, model)
    g = efficiency_form(m, definition)
    return _average(_form_integrand(g), sampler, workers)


def exact_efficiency(pair, definition: str = "all_survive", script=None, model=None, tol: float = 1e-12) -> tuple[float, int]:
    """Quadrature refined point by point until two successive grids agree within ``tol``.

    Returns the value and the number of points per angle at which it settled.
    """
    m = _model(pair, script, model)
    g = efficiency_form(m, definition)
    prev = None
    for n in range(2, 9):
        val = _grid_mean(n, _form_integrand(g))
        if prev is not None and abs(val - prev) <= tol:
            return val, n - 1
        prev = val
    raise RuntimeError("efficiency quadrature did not settle")


def basis_average_efficiency(pair, definition: str = "all_survive", script=None, model=None) -> float:
    """Mean over the 64 basis inputs: the cross terms of a real product input average to zero."""
    m = _model(pair, script, model)
    return float(np.trace(efficiency_form(m, definition)).real / m.dim)


# -- sweep -----------------------------------------------------------------------


@dataclass
class SweepRow:
    x: float
    r: float
    f_mean: float
    f_se: float
    eta_numeric: float
    eta_numeric_se: float
    eta_closed: float


@dataclass
class SweepTable:
    rows: list
    metadata: dict = field(default_factory=dict)

    COLUMNS = ("x", "r", "F_mean", "F_se", "eta_numeric", "eta_numeric_se", "eta_closed")

    def monotone(self, column: str, se_column: Optional[str] = None, k: float = 3.0) -> bool:
        """Nondecreasing in x within ``k`` combined standard errors."""
        vals = [getattr(r, column) for r in self.rows]
        ses = [getattr(r, se_column) if se_column else 0.0 for r in self.rows]
        return all(
            vals[i] <= vals[i + 1] + k * math.hypot(ses[i], ses[i + 1]) + 1e-12 for i in range(len(vals) - 1)
        )


def sweep(
    x_grid: Sequence[float],
    sampler=None,
    workers: Optional[int] = None,
    definition: str = "all_survive",
    fidelity_mode: str = "pre",
) -> SweepTable:
    """Fidelity and efficiency at each resonant coupling ratio g / sqrt(kappa*gamma).

    Fidelity uses ``sampler``; Monte Carlo rows get independent seeds derived
    from the base seed and the row number. Efficiency is always computed by
    exact quadrature, so its standard-error column is zero.
    """
    xs = [float(x) for x in x_grid]
    if not xs:
        raise ValueError("empty coupling grid")
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise ValueError("coupling grid must be strictly increasing")
    if xs[0] < 0.5:
        raise ValueError("coupling ratios below 0.5 give r < 0; the gate is studied for x >= 0.5")
    sampler = sampler or MonteCarlo()
    rows = []
    for i, x in enumerate(xs):
        pair = resonant_pair(x)
        model = GateModel(pair)
        s = sampler
        if isinstance(sampler, MonteCarlo):
            s = MonteCarlo(sampler.n, _row_seed(sampler.seed, i), sampler.chunk)
        f = average_fidelity(pair, s, fidelity_mode, workers, model=model)
        # the efficiency integrand is a low-degree trigonometric polynomial: quadrature is exact
        eta, _ = exact_efficiency(pair, definition, model=model)
        rows.append(SweepRow(x, pair.r.real, f.mean, f.se, eta, 0.0, efficiency_closed_form(abs(pair.r))))
    meta = {"sampler": sampler, "definition": definition, "fidelity_mode": fidelity_mode}
    return SweepTable(rows, meta)


def _row_seed(seed: int, row: int) -> int:
    return int(np.random.SeedSequence([seed, row]).generate_state(1)[0])
