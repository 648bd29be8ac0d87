"""Composite state space of dual-DOF photons and NV spins, and the optical elements acting on it.

A state is a dense complex tensor with one polarization axis and one spatial
axis per photon, followed by one axis per NV spin. Amplitude tensors may carry
leading batch axes; every element acts on the trailing layout axes only, so a
whole set of inputs can be pushed through a circuit in one pass.

Photon loss is not flagged explicitly: a lossy reflection simply shrinks the
squared norm.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

POLARIZATIONS = ("R", "L")
SPINS = ("+", "-")

_S2 = 1 / math.sqrt(2)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) * _S2
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# NV preparation tags understood by the netlist and the layout.
SPIN_INIT = {
    "plus": np.array([1, 0], dtype=complex),
    "minus": np.array([0, 1], dtype=complex),
    "plusminus": np.array([1, 1], dtype=complex) * _S2,
    "minusplus": np.array([1, -1], dtype=complex) * _S2,
}

# Measurement basis |+'> and |->' written in the {|+>, |->} basis.
PRIME_BASIS = {
    "+'": np.array([1, 1], dtype=complex) * _S2,
    "-'": np.array([1, -1], dtype=complex) * _S2,
}


class StateError(ValueError):
    pass


@dataclass(frozen=True)
class PhotonSpec:
    name: str
    modes: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if len(self.modes) < 1:
            raise StateError(f"photon {self.name} needs at least one spatial mode")
        if len(set(self.modes)) != len(self.modes):
            raise StateError(f"photon {self.name} has duplicate spatial modes")


@dataclass(frozen=True)
class NvSpec:
    name: str
    init: str = "plusminus"

    def __post_init__(self):
        if self.init not in SPIN_INIT:
            raise StateError(f"unknown NV preparation {self.init!r}")


@dataclass(frozen=True)
class Layout:
    """Axis layout of a state tensor: (pol, spatial) per photon, then one axis per NV."""

    photons: tuple[PhotonSpec, ...]
    nvs: tuple[NvSpec, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "photons", tuple(self.photons))
        object.__setattr__(self, "nvs", tuple(self.nvs))
        names = [p.name for p in self.photons]
        if len(set(names)) != len(names):
            raise StateError("duplicate photon names")
        nv_names = [n.name for n in self.nvs]
        if len(set(nv_names)) != len(nv_names):
            raise StateError("duplicate NV names")

    @property
    def shape(self) -> tuple[int, ...]:
        dims: list[int] = []
        for p in self.photons:
            dims += [2, len(p.modes)]
        return tuple(dims) + (2,) * len(self.nvs)

    @property
    def ndim(self) -> int:
        return 2 * len(self.photons) + len(self.nvs)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def photon(self, name: str) -> PhotonSpec:
        for p in self.photons:
            if p.name == name:
                return p
        raise StateError(f"unknown photon {name!r}")

    def photon_index(self, name: str) -> int:
        for i, p in enumerate(self.photons):
            if p.name == name:
                return i
        raise StateError(f"unknown photon {name!r}")

    def nv_index(self, name) -> int:
        name = str(name)
        for i, n in enumerate(self.nvs):
            if n.name == name:
                return i
        raise StateError(f"unknown NV {name!r}")

    # Axis positions counted from the end, so batch axes are transparent.
    def pol_axis(self, photon: str) -> int:
        return 2 * self.photon_index(photon) - self.ndim

    def spat_axis(self, photon: str) -> int:
        return 2 * self.photon_index(photon) + 1 - self.ndim

    def spin_axis(self, nv) -> int:
        return 2 * len(self.photons) + self.nv_index(nv) - self.ndim

    def mode_indices(self, photon: str, modes: Iterable[str] | None) -> list[int]:
        spec = self.photon(photon)
        if modes is None:
            return list(range(len(spec.modes)))
        modes = list(modes)
        if not modes:
            raise StateError("empty spatial filter")
        out = []
        for m in modes:
            if m not in spec.modes:
                raise StateError(f"photon {photon} has no spatial mode {m!r}")
            out.append(spec.modes.index(m))
        return out

    def axis_labels(self) -> list[tuple[str, tuple[str, ...]]]:
        labels: list[tuple[str, tuple[str, ...]]] = []
        for p in self.photons:
            labels.append((f"pol_{p.name}", POLARIZATIONS))
            labels.append((f"spat_{p.name}", p.modes))
        for n in self.nvs:
            labels.append((f"spin_{n.name}", SPINS))
        return labels

    def photonic(self) -> "Layout":
        return Layout(self.photons, ())

    def computational(self) -> "Layout":
        """Photonic layout keeping only the first two spatial modes of each photon."""
        return Layout(tuple(PhotonSpec(p.name, p.modes[:2]) for p in self.photons), ())


CANONICAL_LAYOUT = Layout(
    photons=(
        PhotonSpec("a", ("a1", "a2")),
        PhotonSpec("b", ("b1", "b2")),
        # c3 is the beam-splitter ancilla arm; c4/c5 carry the L component of
        # arms c1/c2 between the polarizing splits of steps six and eight.
        PhotonSpec("c", ("c1", "c2", "c3", "c4", "c5")),
    ),
    nvs=(
        NvSpec("1", "plusminus"),
        NvSpec("2", "minusplus"),
        NvSpec("3", "plusminus"),
        NvSpec("4", "minusplus"),
    ),
)


@dataclass
class HyperState:
    layout: Layout
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        n = self.layout.ndim
        if self.amplitudes.shape[self.amplitudes.ndim - n:] != self.layout.shape:
            raise StateError(
                f"amplitude shape {self.amplitudes.shape} does not end with layout shape {self.layout.shape}"
            )

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.amplitudes.shape[: self.amplitudes.ndim - self.layout.ndim]

    def copy(self) -> "HyperState":
        return HyperState(self.layout, self.amplitudes.copy())

    def with_amplitudes(self, amplitudes: np.ndarray) -> "HyperState":
        return HyperState(self.layout, amplitudes)

    def norm(self):
        return norm(self)

    def __getitem__(self, batch_index) -> "HyperState":
        return HyperState(self.layout, self.amplitudes[batch_index])


# -- inputs ------------------------------------------------------------------


@dataclass(frozen=True)
class PhotonInput:
    pol: tuple[complex, complex]
    spatial: tuple[complex, complex]


@dataclass(frozen=True)
class InputSpec:
    """Product input: per photon, a polarization pair (R, L) and a spatial pair over its first two modes."""

    photons: dict

    def __post_init__(self):
        for name, inp in self.photons.items():
            for label, pair in (("polarization", inp.pol), ("spatial", inp.spatial)):
                n2 = abs(pair[0]) ** 2 + abs(pair[1]) ** 2
                if abs(n2 - 1) > 1e-9:
                    raise StateError(f"photon {name} {label} coefficients are not normalized (|x1|^2+|x2|^2={n2})")

    @classmethod
    def from_coefficients(cls, alpha, beta, delta, sigma, zeta, xi) -> "InputSpec":
        """Three-photon spec: (alpha, beta, delta) polarizations and (sigma, zeta, xi) spatial pairs of a, b, c."""
        return cls(
            {
                "a": PhotonInput(tuple(alpha), tuple(sigma)),
                "b": PhotonInput(tuple(beta), tuple(zeta)),
                "c": PhotonInput(tuple(delta), tuple(xi)),
            }
        )

    @classmethod
    def from_angles(cls, angles: Sequence[float], photons: Sequence[str] = ("a", "b", "c")) -> "InputSpec":
        """Real spec from angles: all polarization angles first, then all spatial angles.

        For the three-photon gate the order is (alpha, beta, delta, sigma, zeta, xi).
        """
        n = len(photons)
        if len(angles) != 2 * n:
            raise StateError(f"expected {2 * n} angles, got {len(angles)}")
        return cls(
            {
                name: PhotonInput(
                    (math.cos(angles[i]), math.sin(angles[i])),
                    (math.cos(angles[n + i]), math.sin(angles[n + i])),
                )
                for i, name in enumerate(photons)
            }
        )

    @classmethod
    def basis(cls, assignment: dict) -> "InputSpec":
        """Computational basis input from ``{photon: (pol_bit, spatial_bit)}``."""
        vecs = {0: (1.0, 0.0), 1: (0.0, 1.0)}
        return cls({name: PhotonInput(vecs[p], vecs[s]) for name, (p, s) in assignment.items()})


def product_input(spec: InputSpec, layout: Layout = CANONICAL_LAYOUT) -> HyperState:
    """Product of the photon inputs and the declared NV preparations."""
    factors: list[np.ndarray] = []
    for p in layout.photons:
        if p.name not in spec.photons:
            raise StateError(f"input spec has no entry for photon {p.name}")
        if len(p.modes) < 2:
            raise StateError(f"photon {p.name} needs two spatial modes for a product input")
        inp = spec.photons[p.name]
        factors.append(np.asarray(inp.pol, dtype=complex))
        spatial = np.zeros(len(p.modes), dtype=complex)
        spatial[:2] = inp.spatial
        factors.append(spatial)
    for n in layout.nvs:
        factors.append(SPIN_INIT[n.init])
    amp = factors[0]
    for f in factors[1:]:
        amp = np.multiply.outer(amp, f)
    return HyperState(layout, amp)


def basis_state(layout: Layout, photonic_index: dict) -> HyperState:
    """Basis photonic configuration ``{photon: (pol_label, mode_label)}`` with the NVs in their preparations."""
    factors: list[np.ndarray] = []
    for p in layout.photons:
        pol, mode = photonic_index[p.name]
        v = np.zeros(2, dtype=complex)
        v[POLARIZATIONS.index(pol)] = 1
        s = np.zeros(len(p.modes), dtype=complex)
        s[p.modes.index(mode)] = 1
        factors += [v, s]
    for n in layout.nvs:
        factors.append(SPIN_INIT[n.init])
    amp = factors[0]
    for f in factors[1:]:
        amp = np.multiply.outer(amp, f)
    return HyperState(layout, amp)


# -- elements ----------------------------------------------------------------


def _apply_on_axis(amp: np.ndarray, matrix: np.ndarray, axis: int) -> np.ndarray:
    out = np.tensordot(matrix, amp, axes=([1], [axis]))
    return np.moveaxis(out, 0, axis)


def _apply_pol_matrix(state: HyperState, photon: str, modes, matrix: np.ndarray) -> HyperState:
    lay = state.layout
    cols = lay.mode_indices(photon, modes)
    amp = state.amplitudes.copy()
    idx = [slice(None)] * amp.ndim
    idx[lay.spat_axis(photon)] = cols
    idx = tuple(idx)
    amp[idx] = _apply_on_axis(amp[idx], matrix, lay.pol_axis(photon))
    return state.with_amplitudes(amp)


def apply_hwp_h(state: HyperState, photon: str, spatial_filter=None) -> HyperState:
    """Half-wave plate at 22.5 degrees on the listed spatial modes: R -> (R+L)/sqrt2, L -> (R-L)/sqrt2."""
    return _apply_pol_matrix(state, photon, spatial_filter, HADAMARD)


def apply_hwp_x(state: HyperState, photon: str, spatial_filter=None) -> HyperState:
    """Half-wave plate at 45 degrees on the listed spatial modes: R <-> L."""
    return _apply_pol_matrix(state, photon, spatial_filter, PAULI_X)


def apply_bs(state: HyperState, photon: str, mode_pair: Sequence[str]) -> HyperState:
    """Balanced beam splitter: |m1> -> (|m1>+|m2>)/sqrt2, |m2> -> (|m1>-|m2>)/sqrt2."""
    m1, m2 = mode_pair
    if m1 == m2:
        raise StateError("beam splitter needs two distinct modes")
    lay = state.layout
    cols = lay.mode_indices(photon, (m1, m2))
    amp = state.amplitudes.copy()
    axis = lay.spat_axis(photon)
    idx = [slice(None)] * amp.ndim
    idx[axis] = cols
    idx = tuple(idx)
    amp[idx] = _apply_on_axis(amp[idx], HADAMARD, axis)
    return state.with_amplitudes(amp)


def apply_pbs(state: HyperState, photon: str, mode_pair: Sequence[str]) -> HyperState:
    """Polarizing beam splitter between two spatial modes: R stays, the L components swap modes.

    Used both to split the L component of a mode into its own path and to merge
    it back.
    """
    m1, m2 = mode_pair
    if m1 == m2:
        raise StateError("polarizing beam splitter needs two distinct modes")
    lay = state.layout
    i1, i2 = lay.mode_indices(photon, (m1, m2))
    amp = state.amplitudes.copy()
    pol, spat = lay.pol_axis(photon), lay.spat_axis(photon)
    a = [slice(None)] * amp.ndim
    b = [slice(None)] * amp.ndim
    a[pol] = b[pol] = 1
    a[spat], b[spat] = i1, i2
    a, b = tuple(a), tuple(b)
    amp[a], amp[b] = state.amplitudes[b], state.amplitudes[a]
    return state.with_amplitudes(amp)


class Routing(enum.Enum):
    """Polarization wiring of a cavity block.

    Each value maps the photon's R and L components to the polarization with
    which they hit the cavity, or ``None`` when that component bypasses it.
    """

    DIRECT = ("R", None)  # PBS -> NV -> PBS: R reflects off the cavity, L bypasses
    XCONJ = ("R", "R")  # PBS -> X -> NV -> X -> PBS: L is flipped to R for the cavity, so both see it as R
    BOTH = ("R", "L")  # no splitter: both components reflect as themselves
    LDIRECT = (None, "L")  # L reflects off the cavity, R bypasses

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, text: str) -> "Routing":
        try:
            return cls[text.upper()]
        except KeyError:
            raise StateError(f"unknown routing {text!r}") from None


def coupling_factors(pair, entering: str) -> np.ndarray:
    """Reflection amplitude over the spin basis (+, -) for a photon hitting the cavity as ``entering``."""
    if entering == "R":
        return np.array([pair.r, pair.r0], dtype=complex)
    if entering == "L":
        return np.array([pair.r0, pair.r], dtype=complex)
    raise StateError(f"bad polarization {entering!r}")


def apply_cavity_encounter(state: HyperState, photon: str, nv, routing: Routing, pair, spatial_filter=None) -> HyperState:
    """Reflect the photon's filtered spatial modes off NV ``nv``'s cavity.

    Components that enter the cavity pick up ``r`` when coupled to the spin and
    ``r0`` otherwise; bypassing components are untouched.
    """
    lay = state.layout
    cols = lay.mode_indices(photon, spatial_filter)
    spin = lay.spin_axis(nv)
    pol_axis = lay.pol_axis(photon)
    amp = state.amplitudes.copy()
    nd = amp.ndim
    for p, entering in enumerate(routing.value):
        if entering is None:
            continue
        idx = [slice(None)] * nd
        idx[pol_axis] = slice(p, p + 1)
        idx[lay.spat_axis(photon)] = cols
        idx = tuple(idx)
        shape = [1] * nd
        shape[spin] = 2
        amp[idx] = amp[idx] * coupling_factors(pair, entering).reshape(shape)
    return state.with_amplitudes(amp)


def apply_nv_hadamard(state: HyperState, nv) -> HyperState:
    """pi/2 microwave pulse: |+> -> (|+>+|->)/sqrt2, |-> -> (|+>-|->)/sqrt2."""
    axis = state.layout.spin_axis(nv)
    return state.with_amplitudes(_apply_on_axis(state.amplitudes, HADAMARD, axis))


def apply_spatial_phase(state: HyperState, photon: str, mode: str, phase: float) -> HyperState:
    lay = state.layout
    (col,) = lay.mode_indices(photon, [mode])
    amp = state.amplitudes.copy()
    idx = [slice(None)] * amp.ndim
    idx[lay.spat_axis(photon)] = col
    amp[tuple(idx)] *= np.exp(1j * phase)
    return state.with_amplitudes(amp)


def apply_pol_sigma_z(state: HyperState, photon: str, sign: int = 1) -> HyperState:
    """Apply ``sign * (|R><R| - |L><L|)`` to the photon's polarization."""
    if sign not in (1, -1):
        raise StateError("sign must be +1 or -1")
    return _apply_pol_matrix(state, photon, None, sign * PAULI_Z)


def project_nv(state: HyperState, nv, outcome: str) -> HyperState:
    """Unnormalized projection of spin ``nv`` onto |+'> or |-'>."""
    if outcome not in PRIME_BASIS:
        raise StateError(f"unknown outcome {outcome!r}")
    v = PRIME_BASIS[outcome]
    axis = state.layout.spin_axis(nv)
    return state.with_amplitudes(_apply_on_axis(state.amplitudes, np.outer(v, v.conj()), axis))


def measure_nv(state: HyperState, nv, rng_or_branch) -> tuple[str, float, HyperState]:
    """Measure spin ``nv`` in the {|+'>, |-'>} basis.

    ``rng_or_branch`` is either an outcome label (``"+'"`` or ``"-'"``) for
    deterministic branch selection or a ``numpy.random.Generator``. Returns the
    outcome, its probability relative to the incoming squared norm, and the
    renormalized post-measurement state.
    """
    if state.batch_shape:
        raise StateError("measure_nv takes a single (unbatched) state")
    total = norm(state) ** 2
    if total <= 0:
        raise StateError("cannot measure a zero-norm state")
    if isinstance(rng_or_branch, str):
        outcome = rng_or_branch
        branch = project_nv(state, nv, outcome)
        prob = norm(branch) ** 2 / total
    else:
        plus = project_nv(state, nv, "+'")
        p_plus = norm(plus) ** 2 / total
        if rng_or_branch.random() < p_plus:
            outcome, branch, prob = "+'", plus, p_plus
        else:
            outcome = "-'"
            branch = project_nv(state, nv, outcome)
            prob = norm(branch) ** 2 / total
    if prob <= 0:
        return outcome, 0.0, branch
    return outcome, float(prob), normalize(branch)


def contract_spins(state: HyperState, spin_vectors: dict) -> HyperState:
    """Photonic factor left after projecting every spin onto the given vectors."""
    lay = state.layout
    amp = state.amplitudes
    # contract from the last spin axis inward so earlier axis positions stay valid
    for n in reversed(lay.nvs):
        v = np.asarray(spin_vectors[n.name], dtype=complex)
        amp = np.tensordot(amp, v.conj(), axes=([amp.ndim - 1], [0]))
    return HyperState(lay.photonic(), amp)


# -- plumbing ------------------------------------------------------------------


def _layout_axes(state: HyperState) -> tuple[int, ...]:
    n = state.layout.ndim
    return tuple(range(state.amplitudes.ndim - n, state.amplitudes.ndim))


def inner_product(s1: HyperState, s2: HyperState):
    """<s1|s2>, conjugate-linear in the first argument; batched over leading axes."""
    if s1.layout != s2.layout:
        raise StateError("states have different layouts")
    axes = _layout_axes(s1)
    out = np.sum(s1.amplitudes.conj() * s2.amplitudes, axis=axes)
    return complex(out) if np.ndim(out) == 0 else out


def norm(state: HyperState):
    axes = _layout_axes(state)
    out = np.sqrt(np.sum(np.abs(state.amplitudes) ** 2, axis=axes))
    return float(out) if np.ndim(out) == 0 else out


def normalize(state: HyperState) -> HyperState:
    n = norm(state)
    if np.any(np.asarray(n) == 0):
        raise StateError("cannot normalize a zero-norm state")
    shape = np.shape(n) + (1,) * state.layout.ndim
    return state.with_amplitudes(state.amplitudes / np.reshape(n, shape))


def phase_align(amp: np.ndarray) -> np.ndarray:
    """Remove the global phase by making the largest-magnitude amplitude real and positive."""
    flat = amp.ravel()
    k = int(np.argmax(np.abs(flat)))
    if flat[k] == 0:
        return amp.copy()
    return amp * (abs(flat[k]) / flat[k])


def output_projection(state: HyperState) -> HyperState:
    """Keep only amplitude in each photon's first two (output) spatial modes; the rest left through the wrong port."""
    amp = state.amplitudes.copy()
    lay = state.layout
    for p in lay.photons:
        if len(p.modes) > 2:
            idx = [slice(None)] * amp.ndim
            idx[lay.spat_axis(p.name)] = slice(2, None)
            amp[tuple(idx)] = 0
    return state.with_amplitudes(amp)


def to_triples(state: HyperState, cutoff: float = 1e-15) -> list:
    """Nonzero amplitudes as ``(index_tuple, re, im)`` in layout axis order."""
    if state.batch_shape:
        raise StateError("serialize one state at a time")
    out = []
    for index in zip(*np.nonzero(np.abs(state.amplitudes) >= cutoff)):
        a = state.amplitudes[index]
        out.append((tuple(int(i) for i in index), float(a.real), float(a.imag)))
    return out


def from_triples(layout: Layout, triples) -> HyperState:
    amp = np.zeros(layout.shape, dtype=complex)
    for index, re, im in triples:
        amp[tuple(index)] = complex(re, im)
    return HyperState(layout, amp)


def snapshot(state: HyperState, cutoff: float = 1e-15) -> dict:
    """JSON-ready snapshot: axis labels plus the sparse amplitude triples."""
    return {
        "axes": [{"name": name, "labels": list(labels)} for name, labels in state.layout.axis_labels()],
        "amplitudes": [[list(i), re, im] for i, re, im in to_triples(state, cutoff)],
    }
