import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperc2pf import hilbert as hb
from hyperc2pf.cavity import ReflectionPair
from hyperc2pf.hilbert import CANONICAL_LAYOUT as LAY
from hyperc2pf.hilbert import InputSpec, Layout, NvSpec, PhotonSpec, Routing

S = 1 / math.sqrt(2)
SMALL = Layout((PhotonSpec("p", ("m1", "m2", "m3")),), (NvSpec("1", "plus"),))


def small_state(pol, mode, spin=(1, 0)):
    amp = np.zeros(SMALL.shape, dtype=complex)
    for i, a in enumerate(pol):
        for j, b in enumerate(mode):
            for k, c in enumerate(spin):
                amp[i, j, k] = a * b * c
    return hb.HyperState(SMALL, amp)


def test_canonical_shape():
    assert LAY.shape == (2, 2, 2, 2, 2, 5, 2, 2, 2, 2)
    assert LAY.size == 2560


def test_product_input_basics():
    s = hb.product_input(InputSpec.basis({"a": (0, 0), "b": (0, 0), "c": (0, 0)}))
    assert hb.norm(s) == pytest.approx(1)
    photonic = s.amplitudes[0, 0, 0, 0, 0, 0]
    # spins plusminus, minusplus, plusminus, minusplus
    assert photonic[0, 0, 0, 0] == pytest.approx(0.25)
    assert photonic[1, 1, 1, 1] == pytest.approx(0.25)
    assert photonic[1, 0, 0, 0] == pytest.approx(0.25)
    assert photonic[0, 1, 0, 0] == pytest.approx(-0.25)
    s = hb.product_input(InputSpec.from_angles([math.pi / 4] * 6))
    amp = s.amplitudes[:, :2, :, :2, :, :2].reshape(64, 16)
    assert np.allclose(np.abs(amp), S**6 * 0.25)


def test_hwp_h_and_x():
    s = small_state((1, 0), (1, 0, 0))
    h = hb.apply_hwp_h(s, "p", ("m1",))
    assert np.allclose(h.amplitudes[:, 0, 0], [S, S])
    s = small_state((0, 1), (1, 0, 0))
    assert np.allclose(hb.apply_hwp_h(s, "p").amplitudes[:, 0, 0], [S, -S])
    x = hb.apply_hwp_x(s, "p")
    assert np.allclose(x.amplitudes[:, 0, 0], [1, 0])
    # unfiltered mode untouched
    s = small_state((0, 1), (0, 1, 0))
    assert np.array_equal(hb.apply_hwp_x(s, "p", ("m1",)).amplitudes, s.amplitudes)


def test_bs_convention():
    s = small_state((1, 0), (0, 1, 0))
    out = hb.apply_bs(s, "p", ("m2", "m3"))
    assert np.allclose(out.amplitudes[0, :, 0], [0, S, S])
    s = small_state((1, 0), (0, 0, 1))
    out = hb.apply_bs(s, "p", ("m2", "m3"))
    assert np.allclose(out.amplitudes[0, :, 0], [0, S, -S])


def test_pbs_moves_only_l():
    s = small_state((S, S), (1, 0, 0))
    out = hb.apply_pbs(s, "p", ("m1", "m3"))
    assert np.allclose(out.amplitudes[0, :, 0], [S, 0, 0])
    assert np.allclose(out.amplitudes[1, :, 0], [0, 0, S])


def test_cavity_encounter_examples():
    ideal = ReflectionPair.ideal_pair()
    s = small_state((1, 0), (1, 0, 0), (S, S))
    out = hb.apply_cavity_encounter(s, "p", "1", Routing.DIRECT, ideal)
    assert np.allclose(out.amplitudes[0, 0], [S, -S])
    s = small_state((0, 1), (1, 0, 0), (S, S))
    out = hb.apply_cavity_encounter(s, "p", "1", Routing.DIRECT, ideal)
    assert np.allclose(out.amplitudes, s.amplitudes)
    lossy = ReflectionPair(0, -1)
    s = small_state((1, 0), (1, 0, 0), (1, 0))
    assert hb.norm(hb.apply_cavity_encounter(s, "p", "1", Routing.DIRECT, lossy)) == 0
    s = small_state((S, S), (1, 0, 0), (1, 0))
    assert hb.norm(hb.apply_cavity_encounter(s, "p", "1", Routing.DIRECT, lossy)) == pytest.approx(S)


def test_routings_on_spin_basis():
    ideal = ReflectionPair.ideal_pair()
    # (R, L) x (+, -) sign pattern per routing
    expect = {
        Routing.DIRECT: [[1, -1], [1, 1]],
        Routing.XCONJ: [[1, -1], [1, -1]],
        Routing.BOTH: [[1, -1], [-1, 1]],
        Routing.LDIRECT: [[1, 1], [-1, 1]],
    }
    for routing, signs in expect.items():
        s = small_state((1, 1), (1, 0, 0), (1, 1))
        out = hb.apply_cavity_encounter(s, "p", "1", routing, ideal)
        assert np.allclose(out.amplitudes[:, 0, :], signs), routing
    assert Routing.parse("XConj") is Routing.XCONJ
    with pytest.raises(hb.StateError):
        Routing.parse("sideways")


def test_nv_hadamard():
    s = small_state((1, 0), (1, 0, 0), (1, 0))
    assert np.allclose(hb.apply_nv_hadamard(s, "1").amplitudes[0, 0], [S, S])
    s = small_state((1, 0), (1, 0, 0), (S, -S))
    assert np.allclose(hb.apply_nv_hadamard(s, "1").amplitudes[0, 0], [0, 1])


def test_measurement():
    s = small_state((1, 0), (1, 0, 0), (S, S))
    o, p, post = hb.measure_nv(s, "1", np.random.default_rng(0))
    assert o == "+'" and p == pytest.approx(1)
    s = small_state((1, 0), (1, 0, 0), (1, 0))
    for outcome in ("+'", "-'"):
        o, p, post = hb.measure_nv(s, "1", outcome)
        assert o == outcome and p == pytest.approx(0.5)
        assert hb.norm(post) == pytest.approx(1)


def test_corrections():
    s = small_state((S, S), (S, S, 0))
    out = hb.apply_spatial_phase(s, "p", "m1", math.pi)
    assert np.allclose(out.amplitudes[:, 0, 0], [-0.5, -0.5])
    assert np.allclose(out.amplitudes[:, 1, 0], [0.5, 0.5])
    assert np.allclose(hb.apply_spatial_phase(s, "p", "m1", 0).amplitudes, s.amplitudes)
    z = hb.apply_pol_sigma_z(s, "p", 1)
    assert np.allclose(z.amplitudes[:, 0, 0], [0.5, -0.5])
    mz = hb.apply_pol_sigma_z(s, "p", -1)
    assert np.allclose(mz.amplitudes[:, 0, 0], [-0.5, 0.5])


def test_triples_round_trip_and_cutoff():
    s = hb.product_input(InputSpec.from_angles([0.3, 1.1, 2.0, 0.2, 0.7, 1.9]))
    back = hb.from_triples(LAY, hb.to_triples(s))
    assert np.allclose(back.amplitudes, s.amplitudes, atol=1e-15)
    s2 = s.with_amplitudes(s.amplitudes * 0 + 1e-16)
    assert hb.to_triples(s2) == []


def test_orthogonal_basis_states():
    a = hb.basis_state(LAY, {"a": ("R", "a1"), "b": ("R", "b1"), "c": ("R", "c1")})
    b = hb.basis_state(LAY, {"a": ("L", "a1"), "b": ("R", "b1"), "c": ("R", "c1")})
    assert abs(hb.inner_product(a, b)) == 0
    assert hb.inner_product(a, a) == pytest.approx(1)


# -- property tests ---------------------------------------------------------------

angles = st.lists(st.floats(0, 2 * math.pi, allow_nan=False), min_size=6, max_size=6)
unit = st.floats(0.0, 1.0, allow_nan=False)
phase = st.floats(-math.pi, math.pi, allow_nan=False)


def _random_state(seed):
    rng = np.random.default_rng(seed)
    amp = rng.normal(size=SMALL.shape) + 1j * rng.normal(size=SMALL.shape)
    return hb.normalize(hb.HyperState(SMALL, amp))


ELEMENTS = [
    lambda s, pr: hb.apply_hwp_h(s, "p", ("m1", "m3")),
    lambda s, pr: hb.apply_hwp_x(s, "p"),
    lambda s, pr: hb.apply_bs(s, "p", ("m1", "m2")),
    lambda s, pr: hb.apply_pbs(s, "p", ("m2", "m3")),
    lambda s, pr: hb.apply_cavity_encounter(s, "p", "1", Routing.XCONJ, pr),
    lambda s, pr: hb.apply_cavity_encounter(s, "p", "1", Routing.BOTH, pr, ("m2",)),
    lambda s, pr: hb.apply_nv_hadamard(s, "1"),
]


@settings(max_examples=1000, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(0, len(ELEMENTS) - 1), c=st.complex_numbers(max_magnitude=3))
def test_linearity(seed, k, c):
    pr = ReflectionPair(0.4 + 0.3j, -0.9)
    s1, s2 = _random_state(seed), _random_state(seed + 1)
    el = ELEMENTS[k]
    lhs = el(s1.with_amplitudes(s1.amplitudes + c * s2.amplitudes), pr).amplitudes
    rhs = el(s1, pr).amplitudes + c * el(s2, pr).amplitudes
    assert np.allclose(lhs, rhs, atol=1e-12)


@settings(max_examples=1000, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(0, len(ELEMENTS) - 1), p1=phase, p2=phase)
def test_norm_preserved_for_unimodular_reflections(seed, k, p1, p2):
    pr = ReflectionPair(complex(math.cos(p1), math.sin(p1)), complex(math.cos(p2), math.sin(p2)))
    s = _random_state(seed)
    assert hb.norm(ELEMENTS[k](s, pr)) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=1000, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(0, len(ELEMENTS) - 1), m1=unit, m2=unit, p1=phase, p2=phase)
def test_contraction_for_lossy_reflections(seed, k, m1, m2, p1, p2):
    pr = ReflectionPair(m1 * complex(math.cos(p1), math.sin(p1)), m2 * complex(math.cos(p2), math.sin(p2)))
    s = _random_state(seed)
    assert hb.norm(ELEMENTS[k](s, pr)) <= 1 + 1e-12


@settings(max_examples=1000, deadline=None)
@given(a=angles)
def test_measurement_completeness(a):
    s = hb.product_input(InputSpec.from_angles(a))
    total = 0.0
    for combo in np.ndindex(2, 2, 2, 2):
        b = s
        for nv, o in zip("1234", combo):
            b = hb.project_nv(b, nv, ("+'", "-'")[o])
        total += hb.norm(b) ** 2
    assert total == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=1000, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_disjoint_elements_commute(seed):
    pr = ReflectionPair(0.2 + 0.5j, -0.8 + 0.1j)
    rng = np.random.default_rng(seed)
    amp = rng.normal(size=LAY.shape) + 1j * rng.normal(size=LAY.shape)
    s = hb.HyperState(LAY, amp)
    ops = [
        lambda x: hb.apply_hwp_h(x, "a"),
        lambda x: hb.apply_bs(x, "c", ("c2", "c3")),
        lambda x: hb.apply_cavity_encounter(x, "b", "3", Routing.DIRECT, pr),
        lambda x: hb.apply_nv_hadamard(x, "1"),
    ]
    i, j = rng.choice(4, size=2, replace=False)
    assert np.allclose(ops[i](ops[j](s)).amplitudes, ops[j](ops[i](s)).amplitudes, atol=1e-12)


@settings(max_examples=1000, deadline=None)
@given(a=angles)
def test_fresh_product_input_is_normalized(a):
    assert hb.norm(hb.product_input(InputSpec.from_angles(a))) == pytest.approx(1.0, abs=1e-12)
