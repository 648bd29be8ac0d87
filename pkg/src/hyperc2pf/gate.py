"""The scripted hyper-parallel controlled-controlled-phase-flip circuit.

A circuit is a list of named steps, each an ordered list of primitive
elements, followed by NV measurements and outcome-conditioned feed-forward.
``run`` executes a script against a state and a reflection pair and records a
checkpoint after every step.

The canonical script realizes two independent C^2PF gates on photons a, b, c:
one with controls pol_a, pol_b and target spat_c (L, L, c2 flip the sign), the
other with controls spat_a, spat_b and target pol_c (a2, b2, L).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import hilbert as hb
from .cavity import ReflectionPair
from .hilbert import CANONICAL_LAYOUT, HyperState, Layout, Routing


class GateFailure(RuntimeError):
    """The photons were lost: nothing is left to measure or correct."""


class ScriptError(ValueError):
    pass


# -- elements ------------------------------------------------------------------


@dataclass(frozen=True)
class Hwp:
    kind: str  # "H" or "X"
    photon: str
    modes: Optional[tuple[str, ...]] = None

    def apply(self, state, pairs):
        f = hb.apply_hwp_h if self.kind == "H" else hb.apply_hwp_x
        return f(state, self.photon, self.modes)


@dataclass(frozen=True)
class BeamSplitter:
    photon: str
    modes: tuple[str, str]

    def apply(self, state, pairs):
        return hb.apply_bs(state, self.photon, self.modes)


@dataclass(frozen=True)
class PolarizingSplitter:
    photon: str
    modes: tuple[str, str]

    def apply(self, state, pairs):
        return hb.apply_pbs(state, self.photon, self.modes)


@dataclass(frozen=True)
class Encounter:
    nv: str
    photon: str
    routing: Routing
    modes: Optional[tuple[str, ...]] = None

    def apply(self, state, pairs):
        return hb.apply_cavity_encounter(state, self.photon, self.nv, self.routing, pairs[self.nv], self.modes)


@dataclass(frozen=True)
class NvHadamard:
    nv: str

    def apply(self, state, pairs):
        return hb.apply_nv_hadamard(state, self.nv)


Element = Union[Hwp, BeamSplitter, PolarizingSplitter, Encounter, NvHadamard]


@dataclass(frozen=True)
class BlockSpec:
    name: str
    elements: tuple


@dataclass(frozen=True)
class FeedForwardRule:
    """Correction applied when ``nv`` is found in |-'>.

    ``action`` is ``"phase"`` (pi on ``mode``), ``"z"`` (sigma_z) or ``"-z"`` (-sigma_z).
    """

    nv: str
    action: str
    photon: str
    mode: Optional[str] = None

    def apply(self, state: HyperState) -> HyperState:
        if self.action == "phase":
            return hb.apply_spatial_phase(state, self.photon, self.mode, np.pi)
        if self.action == "z":
            return hb.apply_pol_sigma_z(state, self.photon, 1)
        if self.action == "-z":
            return hb.apply_pol_sigma_z(state, self.photon, -1)
        raise ScriptError(f"unknown feed-forward action {self.action!r}")


@dataclass(frozen=True)
class CircuitScript:
    layout: Layout
    steps: tuple[BlockSpec, ...]
    measurements: tuple[str, ...] = ()
    feed_forward: tuple[FeedForwardRule, ...] = ()

    def __post_init__(self):
        lay = self.layout
        for block in self.steps:
            for el in block.elements:
                _validate_element(lay, el)
        for nv in self.measurements:
            lay.nv_index(nv)
        if len(set(self.measurements)) != len(self.measurements):
            raise ScriptError("an NV is measured twice")
        for rule in self.feed_forward:
            if rule.nv not in self.measurements:
                raise ScriptError(f"feed-forward conditions on NV {rule.nv}, which is never measured")
            if rule.action == "phase":
                lay.mode_indices(rule.photon, [rule.mode])
            else:
                lay.photon(rule.photon)

    @property
    def elements(self) -> list:
        return [el for block in self.steps for el in block.elements]

    def encounters(self) -> list[tuple[int, Encounter]]:
        """(1-based step number, encounter) for every cavity encounter."""
        return [(i + 1, el) for i, b in enumerate(self.steps) for el in b.elements if isinstance(el, Encounter)]


def _validate_element(lay: Layout, el) -> None:
    if isinstance(el, NvHadamard):
        lay.nv_index(el.nv)
        return
    lay.photon(el.photon)
    if isinstance(el, (BeamSplitter, PolarizingSplitter)):
        if el.modes[0] == el.modes[1]:
            raise ScriptError("splitter needs two distinct modes")
        lay.mode_indices(el.photon, el.modes)
    elif el.modes is not None:
        lay.mode_indices(el.photon, el.modes)
    if isinstance(el, Encounter):
        lay.nv_index(el.nv)


# -- canonical circuit ---------------------------------------------------------

_D, _X, _L = Routing.DIRECT, Routing.XCONJ, Routing.LDIRECT


def canonical_script() -> CircuitScript:
    """The eight-step hyper-C^2PF circuit with its NV measurements and feed-forward corrections.

    Routings were fixed so that, with ideal reflections, the state after each
    step is exactly the corresponding intermediate state of the derivation
    (see ``reference.expected_checkpoints``).
    """
    lpaths = ("c4", "c5")
    steps = (
        BlockSpec("1", (Encounter("1", "b", _D), NvHadamard("1"))),
        BlockSpec(
            "2",
            (
                BeamSplitter("c", ("c2", "c3")),
                Encounter("1", "c", _X, ("c2",)),
                BeamSplitter("c", ("c2", "c3")),
            ),
        ),
        BlockSpec("3", (Encounter("2", "a", _D), NvHadamard("2"))),
        BlockSpec(
            "4",
            (
                Encounter("2", "c", _X, ("c2",)),
                BeamSplitter("c", ("c2", "c3")),
                Encounter("1", "c", _X, ("c2",)),
                BeamSplitter("c", ("c2", "c3")),
            ),
        ),
        BlockSpec("5", (Encounter("3", "b", _X, ("b2",)), NvHadamard("3"))),
        BlockSpec(
            "6",
            (
                PolarizingSplitter("c", ("c1", "c4")),
                PolarizingSplitter("c", ("c2", "c5")),
                Hwp("H", "c", lpaths),
                Encounter("3", "c", _L, lpaths),
                Hwp("H", "c", lpaths),
            ),
        ),
        BlockSpec("7", (Encounter("4", "a", _X, ("a2",)), NvHadamard("4"))),
        BlockSpec(
            "8",
            (
                Encounter("4", "c", _L, lpaths),
                Hwp("H", "c", lpaths),
                Encounter("3", "c", _L, lpaths),
                Hwp("H", "c", lpaths),
                PolarizingSplitter("c", ("c1", "c4")),
                PolarizingSplitter("c", ("c2", "c5")),
            ),
        ),
    )
    feed_forward = (
        FeedForwardRule("4", "phase", "a", "a1"),
        FeedForwardRule("3", "phase", "b", "b2"),
        FeedForwardRule("2", "z", "a"),
        FeedForwardRule("1", "-z", "b"),
    )
    return CircuitScript(CANONICAL_LAYOUT, steps, ("4", "3", "2", "1"), feed_forward)


# -- execution -----------------------------------------------------------------


@dataclass(frozen=True)
class MeasurementRecord:
    """Outcomes keyed by NV name and the branch's absolute probability.

    Probabilities are squared norms of the projected branch, so over all
    branches they add up to the pre-measurement squared norm.
    """

    outcomes: dict
    probability: float

    def outcome_tuple(self, nvs: Sequence[str]) -> tuple[str, ...]:
        return tuple(self.outcomes[n] for n in nvs)


@dataclass
class BranchResult:
    record: MeasurementRecord
    state: Optional[HyperState]  # normalized, corrected full state; None if the branch is empty
    photonic: Optional[HyperState]  # photonic factor after disentangling the spins

    @property
    def failed(self) -> bool:
        return self.state is None


@dataclass
class GateOutcome:
    pre_measurement: HyperState
    checkpoints: dict
    branches: list = field(default_factory=list)

    @property
    def final(self) -> Optional[HyperState]:
        return self.branches[0].photonic

    @property
    def record(self) -> MeasurementRecord:
        return self.branches[0].record


def _pair_map(script: CircuitScript, pair) -> dict:
    if isinstance(pair, dict):
        missing = [n.name for n in script.layout.nvs if n.name not in pair]
        if missing:
            raise ScriptError(f"no reflection pair for NVs {missing}")
        return dict(pair)
    return {n.name: pair for n in script.layout.nvs}


def evolve(state: HyperState, script: CircuitScript, pair, checkpoints: Optional[dict] = None) -> HyperState:
    """Run every step of the script (no measurement). Works on batched states."""
    pairs = _pair_map(script, pair)
    for block in script.steps:
        for el in block.elements:
            state = el.apply(state, pairs)
        if checkpoints is not None:
            checkpoints[block.name] = state
    return state


def feed_forward(state: HyperState, record: MeasurementRecord, rules: Sequence[FeedForwardRule] = None) -> HyperState:
    """Apply the corrections for every NV found in |-'>.

    Defaults to the canonical rules: NV4 -> pi on a1, NV3 -> pi on b2,
    NV2 -> sigma_z on photon a, NV1 -> -sigma_z on photon b.
    """
    if rules is None:
        rules = canonical_script().feed_forward
    for rule in rules:
        if rule.nv not in record.outcomes:
            raise ScriptError(f"measurement record has no outcome for NV {rule.nv}")
    for rule in rules:
        if record.outcomes[rule.nv] == "-'":
            state = rule.apply(state)
    return state


def _spin_vectors(script: CircuitScript, outcomes: dict) -> dict:
    vecs = {}
    for n in script.layout.nvs:
        if n.name in outcomes:
            vecs[n.name] = hb.PRIME_BASIS[outcomes[n.name]]
        else:
            raise ScriptError(f"NV {n.name} is not measured; cannot extract a photonic factor")
    return vecs


def _finish_branch(script, pre: HyperState, outcomes: dict) -> BranchResult:
    branch = pre
    for nv in script.measurements:
        branch = hb.project_nv(branch, nv, outcomes[nv])
    prob = float(hb.norm(branch) ** 2)
    record = MeasurementRecord(dict(outcomes), prob)
    if prob <= 1e-300:
        return BranchResult(record, None, None)
    corrected = feed_forward(hb.normalize(branch), record, script.feed_forward)
    photonic = None
    if len(script.measurements) == len(script.layout.nvs):
        photonic = hb.contract_spins(corrected, _spin_vectors(script, outcomes))
    return BranchResult(record, corrected, photonic)


def run(state: HyperState, script: CircuitScript, pair, branch_policy="enumerate") -> GateOutcome:
    """Execute ``script`` on ``state``.

    ``branch_policy`` is ``"enumerate"`` (all outcome combinations, in
    measurement order), ``("sample", seed)`` or ``("fixed", outcomes)`` with
    outcomes either a dict keyed by NV name or a tuple in measurement order.
    Raises ``GateFailure`` if no amplitude is left before the measurements.
    """
    if state.batch_shape:
        raise ScriptError("run takes a single state; use evolve for batches")
    checkpoints: dict = {}
    pre = evolve(state, script, pair, checkpoints)
    total = hb.norm(pre) ** 2
    if script.measurements and total <= 1e-300:
        raise GateFailure("all photon amplitude was lost before the NV measurements")
    outcome = GateOutcome(pre, checkpoints)
    nvs = script.measurements
    if not nvs:
        outcome.branches.append(BranchResult(MeasurementRecord({}, float(total)), pre, None))
        return outcome

    if branch_policy == "enumerate":
        for combo in itertools.product(("+'", "-'"), repeat=len(nvs)):
            outcome.branches.append(_finish_branch(script, pre, dict(zip(nvs, combo))))
        return outcome

    kind, arg = branch_policy
    if kind == "fixed":
        outcomes = dict(arg) if isinstance(arg, dict) else dict(zip(nvs, arg))
        outcome.branches.append(_finish_branch(script, pre, outcomes))
    elif kind == "sample":
        rng = np.random.default_rng(arg)
        current = pre
        outcomes = {}
        for nv in nvs:
            o, _, current = hb.measure_nv(current, nv, rng)
            outcomes[nv] = o
        outcome.branches.append(_finish_branch(script, pre, outcomes))
    else:
        raise ScriptError(f"unknown branch policy {branch_policy!r}")
    return outcome


# -- truth tables --------------------------------------------------------------


def computational_basis(layout: Layout = CANONICAL_LAYOUT) -> list[dict]:
    """Photonic basis configurations ``{photon: (pol, mode)}`` in C order over (pol, first-two-modes) axes."""
    choices = []
    for p in layout.photons:
        choices.append([(pol, mode) for pol in hb.POLARIZATIONS for mode in p.modes[:2]])
    return [dict(zip([p.name for p in layout.photons], combo)) for combo in itertools.product(*choices)]


def _computational_slice(layout: Layout) -> tuple:
    idx = []
    for _ in layout.photons:
        idx += [slice(None), slice(0, 2)]
    return tuple(idx)


def transfer_columns(script: CircuitScript, pair) -> np.ndarray:
    """Pre-measurement output for every photonic basis input, as columns of a (state size x 4^n) matrix."""
    inputs = np.stack([hb.basis_state(script.layout, b).amplitudes for b in computational_basis(script.layout)])
    out = evolve(HyperState(script.layout, inputs), script, pair)
    return out.amplitudes.reshape(len(inputs), -1).T


def branch_operators(script: CircuitScript, pair) -> dict:
    """Per measurement branch, the photonic operator restricted to the computational subspace.

    Entry ``[j, i]`` is the corrected, spin-disentangled output amplitude on
    basis state j for basis input i, without renormalization.
    """
    lay = script.layout
    basis = computational_basis(lay)
    inputs = np.stack([hb.basis_state(lay, b).amplitudes for b in basis])
    pre = evolve(HyperState(lay, inputs), script, pair)
    comp = _computational_slice(lay)
    ops = {}
    for combo in itertools.product(("+'", "-'"), repeat=len(script.measurements)):
        outcomes = dict(zip(script.measurements, combo))
        branch = pre
        for nv in script.measurements:
            branch = hb.project_nv(branch, nv, outcomes[nv])
        record = MeasurementRecord(outcomes, 0.0)
        branch = feed_forward(branch, record, script.feed_forward)
        photonic = hb.contract_spins(branch, _spin_vectors(script, outcomes))
        amp = photonic.amplitudes
        leak = np.abs(amp).sum() - np.abs(amp[(slice(None),) + comp]).sum()
        if leak > 1e-10:
            raise ScriptError("output has amplitude outside the computational modes")
        ops[combo] = amp[(slice(None),) + comp].reshape(len(basis), -1).T
    return ops


def ideal_transfer_matrix(script: Optional[CircuitScript] = None, atol: float = 1e-10) -> np.ndarray:
    """The common photonic operator of all measurement branches under ideal reflections.

    Every branch operator is rescaled to unit column norm and phase-aligned; a
    disagreement between branches beyond ``atol`` raises ``ScriptError``.
    """
    script = script or canonical_script()
    ops = branch_operators(script, ReflectionPair.ideal_pair())
    dim = next(iter(ops.values())).shape[0]
    reference = None
    for combo, op in ops.items():
        scale = np.linalg.norm(op) / np.sqrt(dim)
        if scale == 0:
            raise ScriptError(f"branch {combo} is empty")
        op = hb.phase_align(op / scale)
        if reference is None:
            reference = op
        elif np.max(np.abs(op - reference)) > atol:
            raise ScriptError(f"branch {combo} disagrees with the first branch")
    return reference


def reference_truth_table() -> np.ndarray:
    """Two independent C^2Z gates written down directly, on the 64-state photonic basis.

    Sign -1 when (pol_a, pol_b, spat_c) = (L, L, c2), independently -1 when
    (spat_a, spat_b, pol_c) = (a2, b2, L).
    """
    diag = np.ones(64, dtype=complex)
    for k, (pa, sa, pb, sb, pc, sc) in enumerate(itertools.product((0, 1), repeat=6)):
        if pa and pb and sc:
            diag[k] *= -1
        if sa and sb and pc:
            diag[k] *= -1
    return np.diag(diag)
