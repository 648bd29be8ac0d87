"""Line-oriented text format for photon/NV-cavity circuits.

One statement per line, ``#`` starts a comment. Example::

    photon c spatial (c1, c2, c3)
    nv 1 init plusminus
    STEP 2
    BS c c2 c3
    NV 1 c c2 xconj
    BS c c2 c3
    MEASURE 1
    FF 1 z c

Declarations (``photon``, ``nv``) must come before any statement that uses
them. Elements are ``H``/``X`` (wave plates), ``BS``/``PBS`` (splitters between
two modes), ``NV`` (cavity encounter with a routing), ``HNV`` (spin Hadamard).
Where a mode filter is allowed it may be a comma-separated list. ``FF table1``
expands to the four standard corrections of the three-photon gate.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

from .gate import (
    BeamSplitter,
    BlockSpec,
    CircuitScript,
    Encounter,
    FeedForwardRule,
    Hwp,
    NvHadamard,
    PolarizingSplitter,
    ScriptError,
    canonical_script,
)
from .hilbert import SPIN_INIT, Layout, NvSpec, PhotonSpec, Routing, StateError

_TOKEN = re.compile(r"[(),]|[^\s(),#]+")
_IDENT = re.compile(r"[A-Za-z0-9_]+$")
IMPLICIT_STEP = "main"


class NetlistError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass
class _Tok:
    text: str
    line: int
    col: int


class _Line:
    def __init__(self, toks: list, lineno: int, end_col: int):
        self.toks = toks
        self.pos = 0
        self.lineno = lineno
        self.end_col = end_col

    def error(self, msg, tok: Optional[_Tok] = None):
        if tok is None:
            tok = self.toks[self.pos] if self.pos < len(self.toks) else None
        col = tok.col if tok else self.end_col
        return NetlistError(msg, self.lineno, col)

    def peek(self) -> Optional[_Tok]:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def next(self, what: str) -> _Tok:
        tok = self.peek()
        if tok is None:
            raise self.error(f"expected {what}, found end of line")
        self.pos += 1
        return tok

    def ident(self, what: str) -> _Tok:
        tok = self.next(what)
        if not _IDENT.match(tok.text):
            raise self.error(f"expected {what}, found {tok.text!r}", tok)
        return tok

    def expect(self, text: str) -> _Tok:
        tok = self.next(repr(text))
        if tok.text != text:
            raise self.error(f"expected {text!r}, found {tok.text!r}", tok)
        return tok

    def remaining(self) -> int:
        return len(self.toks) - self.pos

    def done(self):
        tok = self.peek()
        if tok is not None:
            raise self.error(f"unexpected {tok.text!r}", tok)


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        toks = [_Tok(m.group(), lineno, m.start() + 1) for m in _TOKEN.finditer(body)]
        if toks:
            yield _Line(toks, lineno, len(body.rstrip()) + 1)


@dataclass
class _Builder:
    photons: dict = field(default_factory=dict)  # name -> modes
    nvs: dict = field(default_factory=dict)  # name -> init
    steps: list = field(default_factory=list)  # [name, [elements]]
    measurements: list = field(default_factory=list)
    feed_forward: list = field(default_factory=list)

    def photon(self, ln: _Line) -> str:
        tok = ln.ident("photon name")
        if tok.text not in self.photons:
            raise ln.error(f"undeclared photon {tok.text!r}", tok)
        return tok.text

    def nv(self, ln: _Line) -> str:
        tok = ln.ident("NV name")
        if tok.text not in self.nvs:
            raise ln.error(f"undeclared NV {tok.text!r}", tok)
        return tok.text

    def mode(self, ln: _Line, photon: str) -> str:
        tok = ln.ident("spatial mode")
        if tok.text not in self.photons[photon]:
            raise ln.error(f"photon {photon!r} has no mode {tok.text!r}", tok)
        return tok.text

    def modes(self, ln: _Line, photon: str) -> tuple:
        out = [self.mode(ln, photon)]
        while ln.peek() is not None and ln.peek().text == ",":
            ln.pos += 1
            out.append(self.mode(ln, photon))
        if len(set(out)) != len(out):
            raise ln.error("repeated mode in list")
        return tuple(out)

    def add(self, element):
        if not self.steps:
            self.steps.append([IMPLICIT_STEP, []])
        self.steps[-1][1].append(element)


def _declare_photon(b: _Builder, ln: _Line):
    name = ln.ident("photon name")
    if name.text in b.photons:
        raise ln.error(f"photon {name.text!r} declared twice", name)
    ln.expect("spatial")
    ln.expect("(")
    modes = [ln.ident("spatial mode").text]
    while True:
        tok = ln.next("',' or ')'")
        if tok.text == ")":
            break
        if tok.text != ",":
            raise ln.error(f"expected ',' or ')', found {tok.text!r}", tok)
        modes.append(ln.ident("spatial mode").text)
    if len(set(modes)) != len(modes):
        raise ln.error(f"photon {name.text!r} lists a mode twice", name)
    ln.done()
    b.photons[name.text] = tuple(modes)


def _declare_nv(b: _Builder, ln: _Line):
    name = ln.ident("NV name")
    if name.text in b.nvs:
        raise ln.error(f"NV {name.text!r} declared twice", name)
    ln.expect("init")
    tok = ln.next("initial state")
    if tok.text not in SPIN_INIT:
        raise ln.error(f"unknown initial state {tok.text!r}; expected one of {', '.join(SPIN_INIT)}", tok)
    ln.done()
    b.nvs[name.text] = tok.text


def _statement(b: _Builder, ln: _Line, kw: str, kw_tok: _Tok):
    if kw == "STEP":
        name = ln.ident("step name")
        ln.done()
        if any(s[0] == name.text for s in b.steps):
            raise ln.error(f"step {name.text!r} appears twice", name)
        b.steps.append([name.text, []])
    elif kw in ("H", "X"):
        photon = b.photon(ln)
        modes = b.modes(ln, photon) if ln.remaining() else None
        ln.done()
        b.add(Hwp(kw, photon, modes))
    elif kw in ("BS", "PBS"):
        photon = b.photon(ln)
        m1 = b.mode(ln, photon)
        m2 = b.mode(ln, photon)
        ln.done()
        if m1 == m2:
            raise ln.error("splitter needs two distinct modes", kw_tok)
        b.add((BeamSplitter if kw == "BS" else PolarizingSplitter)(photon, (m1, m2)))
    elif kw == "NV":
        nv = b.nv(ln)
        photon = b.photon(ln)
        modes = b.modes(ln, photon) if ln.remaining() > 1 else None
        tok = ln.next("routing")
        try:
            routing = Routing.parse(tok.text)
        except StateError:
            names = ", ".join(r.label for r in Routing)
            raise ln.error(f"unknown routing {tok.text!r}; expected one of {names}", tok) from None
        ln.done()
        b.add(Encounter(nv, photon, routing, modes))
    elif kw == "HNV":
        nv = b.nv(ln)
        ln.done()
        b.add(NvHadamard(nv))
    elif kw == "MEASURE":
        tok = ln.peek()
        nv = b.nv(ln)
        ln.done()
        if nv in b.measurements:
            raise ln.error(f"NV {nv!r} measured twice", tok)
        b.measurements.append(nv)
    elif kw == "FF":
        _feed_forward(b, ln)
    else:
        raise ln.error(f"unknown statement {kw_tok.text!r}", kw_tok)


def _feed_forward(b: _Builder, ln: _Line):
    first = ln.peek()
    if first is not None and first.text.lower() == "table1" and ln.remaining() == 1:
        ln.pos += 1
        for rule in canonical_script().feed_forward:
            if rule.nv not in b.measurements:
                raise ln.error(f"table1 conditions on NV {rule.nv!r}, which is not measured", first)
            if rule.photon not in b.photons or (rule.mode and rule.mode not in b.photons[rule.photon]):
                raise ln.error(f"table1 needs photon {rule.photon!r} with mode {rule.mode!r}", first)
            b.feed_forward.append(rule)
        return
    nv_tok = ln.peek()
    nv = b.nv(ln)
    if nv not in b.measurements:
        raise ln.error(f"feed-forward on NV {nv!r} before it is measured", nv_tok)
    act = ln.next("feed-forward action")
    if act.text == "phase":
        photon = b.photon(ln)
        mode = b.mode(ln, photon)
        ln.done()
        b.feed_forward.append(FeedForwardRule(nv, "phase", photon, mode))
    elif act.text in ("z", "-z"):
        photon = b.photon(ln)
        ln.done()
        b.feed_forward.append(FeedForwardRule(nv, act.text, photon))
    else:
        raise ln.error(f"unknown feed-forward action {act.text!r}; expected phase, z or -z", act)


def parse_netlist(text: str) -> CircuitScript:
    """Parse netlist text into a validated script; raises ``NetlistError`` with line and column."""
    b = _Builder()
    for ln in _lines(text):
        kw_tok = ln.next("statement")
        if kw_tok.text == "photon":
            _declare_photon(b, ln)
        elif kw_tok.text == "nv":
            _declare_nv(b, ln)
        else:
            _statement(b, ln, kw_tok.text, kw_tok)
    layout = Layout(
        tuple(PhotonSpec(n, m) for n, m in b.photons.items()),
        tuple(NvSpec(n, i) for n, i in b.nvs.items()),
    )
    try:
        return CircuitScript(
            layout,
            tuple(BlockSpec(name, tuple(els)) for name, els in b.steps),
            tuple(b.measurements),
            tuple(b.feed_forward),
        )
    except (ScriptError, StateError) as exc:  # pragma: no cover - the parser checks these first
        raise NetlistError(str(exc), 0, 0) from exc


def _mode_list(modes) -> str:
    return "" if modes is None else " " + ",".join(modes)


def format_element(el) -> str:
    if isinstance(el, Hwp):
        return f"{el.kind} {el.photon}{_mode_list(el.modes)}"
    if isinstance(el, BeamSplitter):
        return f"BS {el.photon} {el.modes[0]} {el.modes[1]}"
    if isinstance(el, PolarizingSplitter):
        return f"PBS {el.photon} {el.modes[0]} {el.modes[1]}"
    if isinstance(el, Encounter):
        return f"NV {el.nv} {el.photon}{_mode_list(el.modes)} {el.routing.label}"
    if isinstance(el, NvHadamard):
        return f"HNV {el.nv}"
    raise TypeError(f"cannot print {el!r}")


def format_netlist(script: CircuitScript) -> str:
    """Canonical text for ``script``; ``parse_netlist`` of the result gives an equal script."""
    out = []
    for p in script.layout.photons:
        out.append(f"photon {p.name} spatial ({', '.join(p.modes)})")
    for n in script.layout.nvs:
        out.append(f"nv {n.name} init {n.init}")
    for block in script.steps:
        out.append("")
        out.append(f"STEP {block.name}")
        out.extend(format_element(el) for el in block.elements)
    if script.measurements:
        out.append("")
        out.extend(f"MEASURE {nv}" for nv in script.measurements)
    for rule in script.feed_forward:
        if rule.action == "phase":
            out.append(f"FF {rule.nv} phase {rule.photon} {rule.mode}")
        else:
            out.append(f"FF {rule.nv} {rule.action} {rule.photon}")
    return "\n".join(out) + "\n" if out else ""


def load_netlist(path) -> CircuitScript:
    with open(path, encoding="utf-8") as fh:
        return parse_netlist(fh.read())


def shipped_netlist_text() -> str:
    """Text of the bundled three-photon gate netlist."""
    return resources.files(__package__).joinpath("data/hyper_c2pf.net").read_text(encoding="utf-8")
