import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperc2pf.gate import (
    BeamSplitter,
    BlockSpec,
    CircuitScript,
    Encounter,
    FeedForwardRule,
    Hwp,
    NvHadamard,
    PolarizingSplitter,
    canonical_script,
)
from hyperc2pf.hilbert import Layout, NvSpec, PhotonSpec, Routing
from hyperc2pf.netlist import IMPLICIT_STEP, NetlistError, format_netlist, parse_netlist, shipped_netlist_text

HEADER = "photon a spatial (a1, a2)\nnv 1 init plus\n"


def test_shipped_file_is_canonical():
    assert parse_netlist(shipped_netlist_text()) == canonical_script()


def test_round_trip_fixed_point():
    text = format_netlist(canonical_script())
    again = parse_netlist(text)
    assert again == canonical_script()
    assert format_netlist(again) == text


def test_empty_and_comment_only():
    for text in ("", "\n\n", "# nothing here\n   # still nothing"):
        s = parse_netlist(text)
        assert s.steps == () and s.layout.photons == () and s.measurements == ()
    assert format_netlist(parse_netlist("")) == ""


def test_implicit_step_and_mode_lists():
    s = parse_netlist(HEADER + "H a a1, a2\nNV 1 a a2 both\nHNV 1\n")
    assert s.steps == (
        BlockSpec(IMPLICIT_STEP, (Hwp("H", "a", ("a1", "a2")), Encounter("1", "a", Routing.BOTH, ("a2",)), NvHadamard("1"))),
    )


def test_statement_keywords_are_upper_case():
    # lower-case "nv" is the declaration keyword, so statements must be upper case
    e = _err(HEADER + "bs a a1 a2\n")
    assert (e.line, e.column) == (3, 1) and "unknown statement 'bs'" in str(e)
    s = parse_netlist(HEADER + "NV 1 a Direct\n")
    assert s.steps[0].elements == (Encounter("1", "a", Routing.DIRECT),)


def test_table1_feed_forward():
    text = shipped_netlist_text()
    body = "\n".join(line for line in text.splitlines() if not line.startswith("FF")) + "\nFF table1\n"
    assert parse_netlist(body) == canonical_script()


def _err(text):
    with pytest.raises(NetlistError) as info:
        parse_netlist(text)
    return info.value


@pytest.mark.parametrize(
    "text, line, col, fragment",
    [
        (HEADER + "NV 2 a direct", 3, 4, "undeclared NV '2'"),
        (HEADER + "H q", 3, 3, "undeclared photon 'q'"),
        (HEADER + "H a a3", 3, 5, "no mode 'a3'"),
        (HEADER + "BS a a1", 3, 8, "end of line"),
        (HEADER + "BS a a1 a2 a1", 3, 12, "unexpected 'a1'"),
        (HEADER + "BS a a1 a1", 3, 1, "two distinct modes"),
        (HEADER + "NV 1 a sideways", 3, 8, "unknown routing"),
        (HEADER + "HNV", 3, 4, "expected NV name"),
        (HEADER + "MEASURE 1\nMEASURE 1", 4, 9, "measured twice"),
        (HEADER + "FF 1 z a", 3, 4, "before it is measured"),
        (HEADER + "MEASURE 1\nFF 1 flip a", 4, 6, "unknown feed-forward action"),
        (HEADER + "FROB a", 3, 1, "unknown statement"),
        (HEADER + "STEP x\nSTEP x", 4, 6, "appears twice"),
        ("photon a spatial (a1 a2)", 1, 22, "expected ',' or ')'"),
        ("photon a spatial (a1, a1)", 1, 8, "lists a mode twice"),
        ("photon a spatial (a1)\nphoton a spatial (a2)", 2, 8, "declared twice"),
        ("nv 1 init sideways", 1, 11, "unknown initial state"),
        ("nv 1 state plus", 1, 6, "expected 'init'"),
        ("NV 1 a direct\nnv 1 init plus", 1, 4, "undeclared NV"),
    ],
)
def test_errors_carry_position(text, line, col, fragment):
    e = _err(text)
    assert (e.line, e.column) == (line, col)
    assert fragment in str(e)
    assert str(e).startswith(f"line {line}, column {col}: ")


# -- round trip over generated scripts ------------------------------------------

MODES = ("m1", "m2", "m3")
LAYOUT = Layout((PhotonSpec("p", MODES), PhotonSpec("q", ("n1", "n2"))), (NvSpec("1", "plus"), NvSpec("x2", "minusplus")))


def _modes(photon):
    pool = MODES if photon == "p" else ("n1", "n2")
    return st.one_of(st.none(), st.lists(st.sampled_from(pool), min_size=1, max_size=len(pool), unique=True).map(tuple))


def _pair(photon):
    pool = MODES if photon == "p" else ("n1", "n2")
    return st.lists(st.sampled_from(pool), min_size=2, max_size=2, unique=True).map(tuple)


photons = st.sampled_from(("p", "q"))
nvs = st.sampled_from(("1", "x2"))
element = st.one_of(
    photons.flatmap(lambda ph: st.builds(Hwp, st.sampled_from("HX"), st.just(ph), _modes(ph))),
    photons.flatmap(lambda ph: st.builds(BeamSplitter, st.just(ph), _pair(ph))),
    photons.flatmap(lambda ph: st.builds(PolarizingSplitter, st.just(ph), _pair(ph))),
    photons.flatmap(lambda ph: st.builds(Encounter, nvs, st.just(ph), st.sampled_from(list(Routing)), _modes(ph))),
    st.builds(NvHadamard, nvs),
)


@st.composite
def scripts(draw):
    n_steps = draw(st.integers(0, 4))
    steps = tuple(BlockSpec(f"s{i}", tuple(draw(st.lists(element, max_size=5)))) for i in range(n_steps))
    measured = tuple(draw(st.permutations(["1", "x2"]))[: draw(st.integers(0, 2))])
    rules = []
    for nv in measured:
        kind = draw(st.sampled_from(("phase", "z", "-z")))
        if kind == "phase":
            rules.append(FeedForwardRule(nv, "phase", "p", draw(st.sampled_from(MODES))))
        else:
            rules.append(FeedForwardRule(nv, kind, draw(photons)))
    return CircuitScript(LAYOUT, steps, measured, tuple(rules))


@settings(max_examples=300, deadline=None)
@given(s=scripts())
def test_generated_round_trip(s):
    text = format_netlist(s)
    parsed = parse_netlist(text)
    assert parsed == s
    assert format_netlist(parsed) == text
