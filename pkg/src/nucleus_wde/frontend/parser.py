"""Recursive-descent parser for the waveform (.wdl) and BSP (.bsp) dialects.

Both dialects share one lexical layer and one attribute-block syntax
(``{ key = value; ... }``). Values are first read into a small generic form
(:class:`Value`) and interpreted per statement, so that semantic errors can
point at the exact value that caused them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from ..model import (
    Bsp, CostModel, DataFormat, EdgeSpec, Flavor, FormatKind, InterconnectLink,
    KernelSpec, PathLatency, PEClass, Platform, ProcessingElement, Rounding,
    Scaling, SizeSet, Throughput, WaveformGraph, validate_graph,
)
from .diagnostics import DiagCode, FrontendError, ParseDiagnostic, Severity, SourceSpan
from .lexer import Token, tokenize

FREQ_UNITS = {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9}
BANDWIDTH_UNITS = {"Bps": 1.0, "kBps": 1e3, "MBps": 1e6, "GBps": 1e9}
TIME_UNITS = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9}
ENERGY_UNITS = {"J": 1.0, "mJ": 1e-3, "uJ": 1e-6, "nJ": 1e-9, "pJ": 1e-12, "fJ": 1e-15}
RATE_UNITS = {"fps": 1.0}


class _SyntaxAbort(Exception):
    pass


@dataclass
class Value:
    kind: str  # "num", "ident", "string", "call", "range", "list", "terms", "none"
    tok: Token
    num: float | int | None = None
    unit: Optional[Token] = None
    text: str = ""
    args: dict = field(default_factory=dict)
    items: list = field(default_factory=list)


@dataclass
class Attr:
    key: Token
    value: Value


class _Parser:
    def __init__(self, source: str, filename: str):
        self.filename = filename
        self.tokens, self.diags = tokenize(source, filename)
        self.pos = 0

    # -- diagnostics --------------------------------------------------------
    def span(self, tok: Token) -> SourceSpan:
        return SourceSpan(self.filename, tok.line, tok.column, max(len(tok.text), 1))

    def error(self, code: DiagCode, message: str, tok: Token) -> None:
        self.diags.append(ParseDiagnostic(Severity.ERROR, code, message, self.span(tok)))

    def warning(self, code: DiagCode, message: str, tok: Token) -> None:
        self.diags.append(ParseDiagnostic(Severity.WARNING, code, message, self.span(tok)))

    def has_errors(self) -> bool:
        return any(d.severity is Severity.ERROR for d in self.diags)

    # -- token stream -------------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("punct", "ident") and t.text == text

    def fail(self, expected: str):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        self.error(DiagCode.SYNTAX, f"expected {expected}, found {found}", t)
        raise _SyntaxAbort

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(repr(text))
        return self.advance()

    def expect_kind(self, kind: str, what: str) -> Token:
        if self.tok.kind != kind:
            self.fail(what)
        return self.advance()

    # -- generic values -----------------------------------------------------
    def number(self) -> Token:
        if self.tok.kind not in ("int", "real"):
            self.fail("a number")
        return self.advance()

    def value(self) -> Value:
        t = self.tok
        if t.kind in ("int", "real"):
            return self.terms()
        if t.kind == "string":
            self.advance()
            return Value("string", t, text=t.value)
        if t.kind == "ident":
            self.advance()
            if self.at("("):
                return self.call(t)
            if t.text == "none":
                return Value("none", t, text="none")
            return Value("ident", t, text=t.text)
        if self.at("["):
            return self.bracket()
        self.fail("a value")

    def terms(self) -> Value:
        first = self.tok
        items = []
        while True:
            num = self.number()
            var = None
            if self.at("*"):
                self.advance()
                var = self.expect_kind("ident", "'n' or 'nlogn'")
            items.append((num, var))
            if not self.at("+"):
                break
            self.advance()
        if len(items) == 1 and items[0][1] is None:
            unit = self.advance() if self.tok.kind == "ident" else None
            return Value("num", first, num=first.value, unit=unit)
        return Value("terms", first, items=items)

    def call(self, name: Token) -> Value:
        self.expect("(")
        args: dict[str, tuple[Token, Value]] = {}
        while not self.at(")"):
            key = self.expect_kind("ident", "an argument name")
            self.expect("=")
            val = self.value()
            if key.text in args:
                self.error(DiagCode.BAD_VALUE, f"duplicate argument '{key.text}'", key)
            args[key.text] = (key, val)
            if not self.at(","):
                break
            self.advance()
        self.expect(")")
        return Value("call", name, text=name.text, args=args)

    def bracket(self) -> Value:
        open_tok = self.expect("[")
        items = []
        if self.tok.kind == "ident":
            while True:
                items.append(self.expect_kind("ident", "an identifier"))
                if not self.at(","):
                    break
                self.advance()
            self.expect("]")
            return Value("list", open_tok, items=items)
        first = self.expect_kind("int", "an integer")
        if self.at(".."):
            self.advance()
            hi = self.expect_kind("int", "an integer")
            base = self.expect_kind("ident", "'pow2' or 'pow4'")
            self.expect("]")
            return Value("range", open_tok, items=[first, hi, base])
        items.append(first)
        while self.at(","):
            self.advance()
            items.append(self.expect_kind("int", "an integer"))
        self.expect("]")
        return Value("list", open_tok, items=items)

    def block(self) -> list[Attr]:
        self.expect("{")
        attrs = []
        while not self.at("}"):
            key = self.expect_kind("ident", "an attribute name")
            self.expect("=")
            val = self.value()
            self.expect(";")
            attrs.append(Attr(key, val))
        self.expect("}")
        return attrs

    # -- value interpretation ----------------------------------------------
    def as_int(self, v: Value, minimum: int = 1) -> Optional[int]:
        if v.kind != "num" or v.tok.kind != "int" or v.unit is not None:
            self.error(DiagCode.BAD_VALUE, "expected an integer", v.tok)
            return None
        if v.num < minimum:
            self.error(DiagCode.BAD_VALUE, f"value must be >= {minimum}", v.tok)
            return None
        return v.num

    def as_real(self, v: Value, units: dict[str, float], default_unit: str,
                positive: bool = True) -> Optional[float]:
        if v.kind != "num":
            self.error(DiagCode.BAD_VALUE, "expected a number", v.tok)
            return None
        scale = units.get(default_unit, 1.0)
        if v.unit is not None:
            if v.unit.text not in units:
                expected = f"one of {', '.join(units)}" if units else "no unit"
                self.error(DiagCode.BAD_VALUE, f"unknown unit '{v.unit.text}' (expected {expected})", v.unit)
                return None
            scale = units[v.unit.text]
        x = float(v.num) * scale
        if not math.isfinite(x) or x < 0 or (positive and x == 0):
            self.error(DiagCode.BAD_VALUE, "value must be " + ("positive" if positive else "nonnegative"), v.tok)
            return None
        return x

    def as_tag(self, v: Value) -> Optional[str]:
        if v.kind in ("ident", "string"):
            return v.text
        self.error(DiagCode.BAD_VALUE, "expected an identifier or string", v.tok)
        return None

    def as_format(self, v: Value) -> Optional[DataFormat]:
        kinds = {k.value: k for k in FormatKind}
        if v.kind != "call" or v.text not in kinds:
            self.error(DiagCode.BAD_VALUE,
                       "expected a format literal (q15, q31, cfloat32, float32)", v.tok)
            return None
        kind = kinds[v.text]
        ok = True
        block = scaling = rounding = None
        for name, (key, val) in v.args.items():
            if name == "block":
                block = self.as_int(val)
                ok &= block is not None
            elif name == "scaling":
                scaling = self._enum(val, Scaling)
                ok &= scaling is not None
            elif name == "rounding":
                rounding = self._enum(val, Rounding)
                ok &= rounding is not None
            else:
                self.error(DiagCode.UNKNOWN_ATTRIBUTE, f"unknown format argument '{name}'", key)
                ok = False
        if "block" not in v.args:
            self.error(DiagCode.MISSING_ATTRIBUTE, f"{v.text} format requires 'block'", v.tok)
            ok = False
        if kind.is_fixed_point and "rounding" not in v.args:
            self.error(DiagCode.MISSING_ATTRIBUTE, f"{v.text} format requires 'rounding'", v.tok)
            ok = False
        if not ok:
            return None
        return DataFormat(kind, block, scaling or Scaling.NONE, rounding)

    def _enum(self, v: Value, enum_cls):
        choices = {e.value: e for e in enum_cls}
        if v.kind not in ("ident", "none") or v.text not in choices:
            self.error(DiagCode.BAD_VALUE, f"expected one of {', '.join(choices)}", v.tok)
            return None
        return choices[v.text]

    def attr_dict(self, attrs: list[Attr], known: Optional[set[str]]) -> dict[str, Attr]:
        out: dict[str, Attr] = {}
        for a in attrs:
            if a.key.text in out:
                self.error(DiagCode.BAD_VALUE, f"duplicate attribute '{a.key.text}'", a.key)
                continue
            if known is not None and a.key.text not in known:
                self.error(DiagCode.UNKNOWN_ATTRIBUTE, f"unknown attribute '{a.key.text}'", a.key)
                continue
            out[a.key.text] = a
        return out

    def require(self, attrs: dict[str, Attr], names: list[str], owner: Token, what: str) -> bool:
        missing = [n for n in names if n not in attrs]
        for n in missing:
            self.error(DiagCode.MISSING_ATTRIBUTE, f"{what} '{owner.text}' is missing required attribute '{n}'", owner)
        return not missing

    def header(self, keyword: str) -> str:
        self.expect(keyword)
        name = self.expect_kind("string", "a quoted name").value
        self.expect("{")
        return name

    def finish(self):
        self.expect("}")
        if self.tok.kind != "eof":
            self.fail("end of input")


# -- waveform dialect -------------------------------------------------------

class _WaveformParser(_Parser):
    def parse(self) -> Optional[WaveformGraph]:
        if self.has_errors():
            return None
        try:
            name = self.header("waveform")
            kernels, edges, constraints = [], [], []
            while not self.at("}"):
                if self.at("kernel"):
                    kernels.append(self.kernel_stmt())
                elif self.at("edge"):
                    edges.append(self.edge_stmt())
                elif self.at("constraint"):
                    constraints.append(self.constraint_stmt())
                else:
                    self.fail("'kernel', 'edge', 'constraint' or '}'")
            self.finish()
        except _SyntaxAbort:
            return None
        return self.build(name, kernels, edges, constraints)

    def kernel_stmt(self):
        self.expect("kernel")
        kid = self.expect_kind("ident", "a kernel id")
        self.expect(":")
        nucleus = None
        if self.at("nucleus"):
            self.advance()
            self.expect("(")
            nucleus = self.expect_kind("ident", "a nucleus name")
            self.expect(")")
        elif self.at("nonnucleus"):
            self.advance()
        else:
            self.fail("'nucleus(...)' or 'nonnucleus'")
        return kid, nucleus, self.block()

    def edge_stmt(self):
        self.expect("edge")
        src = self.expect_kind("ident", "a kernel id")
        self.expect("->")
        dst = self.expect_kind("ident", "a kernel id")
        return src, dst, self.block()

    def constraint_stmt(self):
        kw = self.expect("constraint")
        if self.at("latency"):
            self.advance()
            self.expect("(")
            self.expect("path")
            self.expect("=")
            self.expect("[")
            path = [self.expect_kind("ident", "a kernel id")]
            while self.at(","):
                self.advance()
                path.append(self.expect_kind("ident", "a kernel id"))
            self.expect("]")
            self.expect(")")
            self.expect("<=")
            bound = self.terms()
            self.expect(";")
            return "latency", kw, path, bound
        if self.at("throughput"):
            self.advance()
            self.expect(">=")
            bound = self.terms()
            self.expect(";")
            return "throughput", kw, None, bound
        self.fail("'latency' or 'throughput'")

    def build(self, name, kernel_stmts, edge_stmts, constraint_stmts) -> Optional[WaveformGraph]:
        kernels: list[KernelSpec] = []
        ids: dict[str, Token] = {}
        for kid, nucleus, attrs in kernel_stmts:
            if kid.text in ids:
                self.error(DiagCode.DUPLICATE_ID,
                           f"duplicate kernel id '{kid.text}' (first declared at line {ids[kid.text].line})", kid)
                continue
            ids[kid.text] = kid
            k = self.kernel(kid, nucleus, attrs)
            if k is not None:
                kernels.append(k)

        edges: list[EdgeSpec] = []
        pairs: set[tuple[str, str]] = set()
        succ: dict[str, set[str]] = {}
        for src, dst, attrs in edge_stmts:
            bad = False
            for end in (src, dst):
                if end.text not in ids:
                    self.error(DiagCode.UNKNOWN_REF, f"edge references unknown kernel '{end.text}'", end)
                    bad = True
            if src.text == dst.text and not bad:
                self.error(DiagCode.CYCLE, f"edge {src.text} -> {dst.text} is a self loop", src)
                bad = True
            if (src.text, dst.text) in pairs:
                self.error(DiagCode.DUPLICATE_ID, f"duplicate edge {src.text} -> {dst.text}", src)
                bad = True
            d = self.attr_dict(attrs, {"tokens", "format"})
            if not self.require(d, ["tokens", "format"], src, "edge from"):
                bad = True
            tokens = self.as_int(d["tokens"].value) if "tokens" in d else None
            fmt = self.as_format(d["format"].value) if "format" in d else None
            if bad or tokens is None or fmt is None:
                continue
            if _reaches(succ, dst.text, src.text):
                self.error(DiagCode.CYCLE,
                           f"cycle detected: edge {src.text} -> {dst.text} closes a cycle", src)
                continue
            pairs.add((src.text, dst.text))
            succ.setdefault(src.text, set()).add(dst.text)
            edges.append(EdgeSpec(src.text, dst.text, tokens, fmt))

        constraints = []
        for kind, kw, path, bound in constraint_stmts:
            if kind == "latency":
                known = True
                for p in path:
                    if p.text not in ids:
                        self.error(DiagCode.UNKNOWN_REF, f"constraint references unknown kernel '{p.text}'", p)
                        known = False
                value = self.as_real(bound, TIME_UNITS, "us")
                if not known or value is None:
                    continue
                names = tuple(p.text for p in path)
                broken = next(((s, d) for s, d in zip(names, names[1:]) if (s, d) not in pairs), None)
                if broken is not None:
                    self.error(DiagCode.PATH_NOT_CONNECTED,
                               f"path not connected: no edge {broken[0]} -> {broken[1]}", kw)
                    continue
                constraints.append(PathLatency(names, value))
            else:
                value = self.as_real(bound, RATE_UNITS, "fps")
                if value is not None:
                    constraints.append(Throughput(value))

        if len(ids) > 1:
            touched = {e.src for e in edges} | {e.dst for e in edges}
            for k in kernels:
                if k.id not in touched:
                    self.warning(DiagCode.ISOLATED_KERNEL, f"kernel '{k.id}' has no edges", ids[k.id])

        if self.has_errors():
            return None
        g = WaveformGraph(name, tuple(kernels), tuple(edges), tuple(constraints))
        leftovers = validate_graph(g)
        if leftovers:  # parser checks above should make this unreachable
            for v in leftovers:
                self.error(DiagCode.BAD_VALUE, str(v), self.tokens[0])
            return None
        return g

    def kernel(self, kid: Token, nucleus: Optional[Token], attrs: list[Attr]) -> Optional[KernelSpec]:
        if nucleus is None:
            d = self.attr_dict(attrs, {"load", "invocations"})
            if not self.require(d, ["load"], kid, "non-nucleus kernel"):
                return None
            load = self.as_int(d["load"].value)
            inv = self.as_int(d["invocations"].value) if "invocations" in d else 1
            if load is None or inv is None:
                return None
            return KernelSpec(kid.text, load_ops=load, invocations=inv)
        d = self.attr_dict(attrs, None)
        if not self.require(d, ["size"], kid, "nucleus kernel"):
            return None
        ok = True
        params = []
        inv, fallback = 1, None
        for key, attr in d.items():
            val = self.as_int(attr.value, minimum=1 if key in ("size", "invocations", "fallback_load") else 0)
            if val is None:
                ok = False
            elif key == "invocations":
                inv = val
            elif key == "fallback_load":
                fallback = val
            else:
                params.append((key, val))
        if not ok:
            return None
        return KernelSpec(kid.text, nucleus=nucleus.text, params=tuple(params),
                          invocations=inv, fallback_load=fallback)


def _reaches(succ: dict[str, set[str]], start: str, goal: str) -> bool:
    stack, seen = [start], {start}
    while stack:
        n = stack.pop()
        if n == goal:
            return True
        for m in succ.get(n, ()):
            if m not in seen:
                seen.add(m)
                stack.append(m)
    return False


# -- BSP dialect ------------------------------------------------------------

class _BspParser(_Parser):
    def parse(self) -> Optional[Bsp]:
        if self.has_errors():
            return None
        stmts = []
        try:
            name = self.header("bsp")
            while not self.at("}"):
                if self.at("pe"):
                    self.advance()
                    pid = self.expect_kind("ident", "a PE id")
                    self.expect(":")
                    cls = self.expect_kind("ident", "a PE class")
                    stmts.append(("pe", pid, cls, self.block()))
                elif self.at("link"):
                    self.advance()
                    lid = self.expect_kind("ident", "a link id")
                    self.expect(":")
                    a = self.expect_kind("ident", "a PE id")
                    self.expect("<->")
                    b = self.expect_kind("ident", "a PE id")
                    stmts.append(("link", lid, (a, b), self.block()))
                elif self.at("flavor"):
                    self.advance()
                    fid = self.expect_kind("ident", "a flavor id")
                    self.expect(":")
                    nucleus = self.expect_kind("ident", "a nucleus name")
                    self.expect("on")
                    pe = self.expect_kind("ident", "a PE id")
                    stmts.append(("flavor", fid, (nucleus, pe), self.block()))
                elif self.at("glue"):
                    kw = self.advance()
                    src = self.expect_kind("ident", "a format kind")
                    self.expect("->")
                    dst = self.expect_kind("ident", "a format kind")
                    self.expect("=")
                    val = self.value()
                    self.expect(";")
                    stmts.append(("glue", kw, (src, dst), val))
                else:
                    self.fail("'pe', 'link', 'flavor', 'glue' or '}'")
            self.finish()
        except _SyntaxAbort:
            return None
        return self.build(name, stmts)

    def build(self, name, stmts) -> Optional[Bsp]:
        pes: list[ProcessingElement] = []
        pe_ids: dict[str, Token] = {}
        for kind, tok, extra, attrs in stmts:
            if kind != "pe":
                continue
            if tok.text in pe_ids:
                self.error(DiagCode.DUPLICATE_ID, f"duplicate PE id '{tok.text}'", tok)
                continue
            pe_ids[tok.text] = tok
            classes = {c.value: c for c in PEClass}
            if extra.text not in classes:
                self.error(DiagCode.BAD_VALUE, f"unknown PE class '{extra.text}' (expected {', '.join(classes)})", extra)
                continue
            d = self.attr_dict(attrs, {"clock", "efficiency"})
            if not self.require(d, ["clock"], tok, "PE"):
                continue
            clock = self.as_real(d["clock"].value, FREQ_UNITS, "MHz")
            eff = self.as_real(d["efficiency"].value, {}, "", positive=True) if "efficiency" in d else 1.0
            if clock is not None and eff is not None:
                pes.append(ProcessingElement(tok.text, classes[extra.text], clock, eff))

        links: list[InterconnectLink] = []
        link_ids: set[str] = set()
        link_pairs: set[frozenset] = set()
        for kind, tok, extra, attrs in stmts:
            if kind != "link":
                continue
            a, b = extra
            bad = False
            if tok.text in link_ids:
                self.error(DiagCode.DUPLICATE_ID, f"duplicate link id '{tok.text}'", tok)
                bad = True
            link_ids.add(tok.text)
            for end in (a, b):
                if end.text not in pe_ids:
                    self.error(DiagCode.UNKNOWN_PE, f"link references unknown PE '{end.text}'", end)
                    bad = True
            if a.text == b.text:
                self.error(DiagCode.BAD_VALUE, f"link '{tok.text}' connects '{a.text}' to itself", a)
                bad = True
            pair = frozenset((a.text, b.text))
            if not bad and pair in link_pairs:
                self.error(DiagCode.DUPLICATE_LINK,
                           f"duplicate link between PE pair {a.text} <-> {b.text}", tok)
                bad = True
            d = self.attr_dict(attrs, {"bandwidth", "latency", "energy_per_byte"})
            if not self.require(d, ["bandwidth"], tok, "link"):
                continue
            bw = self.as_real(d["bandwidth"].value, BANDWIDTH_UNITS, "MBps")
            lat = self.as_real(d["latency"].value, TIME_UNITS, "us", positive=False) if "latency" in d else 0.0
            epb = (self.as_real(d["energy_per_byte"].value, ENERGY_UNITS, "J", positive=False)
                   if "energy_per_byte" in d else 0.0)
            if bad or None in (bw, lat, epb):
                continue
            link_pairs.add(pair)
            links.append(InterconnectLink(tok.text, a.text, b.text, bw, lat, epb))

        flavors: list[Flavor] = []
        flavor_ids: set[str] = set()
        for kind, tok, extra, attrs in stmts:
            if kind != "flavor":
                continue
            nucleus, pe = extra
            bad = False
            if tok.text in flavor_ids:
                self.error(DiagCode.DUPLICATE_ID, f"duplicate flavor id '{tok.text}'", tok)
                bad = True
            flavor_ids.add(tok.text)
            if pe.text not in pe_ids:
                self.error(DiagCode.UNKNOWN_PE, f"flavor '{tok.text}' references unknown PE '{pe.text}'", pe)
                bad = True
            f = self.flavor(tok, nucleus, pe, attrs)
            if f is not None and not bad:
                flavors.append(f)

        rules = []
        seen_rules: set[tuple] = set()
        kinds = {k.value: k for k in FormatKind}
        for kind, tok, extra, val in stmts:
            if kind != "glue":
                continue
            src, dst = extra
            bad = False
            for end in (src, dst):
                if end.text not in kinds:
                    self.error(DiagCode.BAD_VALUE, f"unknown format kind '{end.text}'", end)
                    bad = True
            if bad:
                continue
            key = (kinds[src.text], kinds[dst.text])
            if key in seen_rules:
                self.error(DiagCode.DUPLICATE_ID, f"duplicate glue rule {src.text} -> {dst.text}", tok)
                continue
            seen_rules.add(key)
            if val.kind == "none":
                rules.append((*key, None))
            else:
                gamma = self.as_real(val, {}, "")
                if gamma is not None:
                    rules.append((*key, gamma))

        if self.has_errors():
            return None
        return Bsp(Platform(name, tuple(pes), tuple(links), tuple(rules)), tuple(flavors))

    def flavor(self, tok: Token, nucleus: Token, pe: Token, attrs: list[Attr]) -> Optional[Flavor]:
        d = self.attr_dict(attrs, {"algorithm", "vendor", "sizes", "input", "output", "cycles", "energy"})
        if not self.require(d, ["sizes", "input", "output", "cycles"], tok, "flavor"):
            return None
        algorithm = self.as_tag(d["algorithm"].value) if "algorithm" in d else "generic"
        vendor = self.as_tag(d["vendor"].value) if "vendor" in d else "generic"
        sizes = self.sizes(d["sizes"].value)
        fin = self.as_format(d["input"].value)
        fout = self.as_format(d["output"].value)
        cyc = self.poly(d["cycles"].value, ("", "n", "nlogn"))
        energy = self.poly(d["energy"].value, ("", "n")) if "energy" in d else (0.0, 0.0)
        if None in (algorithm, vendor, sizes, fin, fout, cyc, energy):
            return None
        cost = CostModel(*cyc, *energy)
        return Flavor(tok.text, nucleus.text, pe.text, algorithm, sizes, fin, fout, cost, vendor)

    def sizes(self, v: Value) -> Optional[SizeSet]:
        if v.kind == "range":
            lo, hi, base = v.items
            if base.text not in ("pow2", "pow4"):
                self.error(DiagCode.BAD_VALUE, "size range must end in 'pow2' or 'pow4'", base)
                return None
            try:
                return SizeSet.pow_range(lo.value, hi.value, 2 if base.text == "pow2" else 4)
            except ValueError as exc:
                self.error(DiagCode.BAD_VALUE, str(exc), lo)
                return None
        if v.kind == "list" and v.items and all(t.kind == "int" for t in v.items):
            for t in v.items:
                if t.value < 1:
                    self.error(DiagCode.BAD_VALUE, "sizes must be >= 1", t)
                    return None
            return SizeSet(tuple(t.value for t in v.items))
        self.error(DiagCode.BAD_VALUE, "expected sizes as [lo..hi pow2] or [n1, n2, ...]", v.tok)
        return None

    def poly(self, v: Value, variables: tuple[str, ...]) -> Optional[tuple[float, ...]]:
        coef = dict.fromkeys(variables, 0.0)
        if v.kind == "num" and v.unit is None:
            items = [(v.tok, None)]
        elif v.kind == "terms":
            items = v.items
        else:
            self.error(DiagCode.BAD_VALUE, "expected a cost expression like 'a + b*n + c*nlogn'", v.tok)
            return None
        seen = set()
        for num, var in items:
            name = var.text if var is not None else ""
            where = var or num
            if name not in coef:
                self.error(DiagCode.BAD_VALUE,
                           f"unknown cost variable '{name}' (expected {', '.join(x for x in variables if x)})", where)
                return None
            if name in seen:
                self.error(DiagCode.BAD_VALUE, f"repeated cost term '{name or 'constant'}'", where)
                return None
            seen.add(name)
            x = float(num.value)
            if not math.isfinite(x):
                self.error(DiagCode.BAD_VALUE, "cost coefficient must be finite", num)
                return None
            coef[name] = x
        return tuple(coef[n] for n in variables)


# -- public entry points ----------------------------------------------------

def check_waveform(source: str, filename: str = "<input>") -> tuple[Optional[WaveformGraph], list[ParseDiagnostic]]:
    """Parse waveform text, returning the graph (or ``None``) and all diagnostics."""
    p = _WaveformParser(source, filename)
    g = p.parse()
    return g, p.diags


def check_bsp(source: str, filename: str = "<input>") -> tuple[Optional[Bsp], list[ParseDiagnostic]]:
    p = _BspParser(source, filename)
    b = p.parse()
    return b, p.diags


def parse_waveform(source: str, filename: str = "<input>") -> WaveformGraph:
    g, diags = check_waveform(source, filename)
    if g is None:
        raise FrontendError(diags)
    return g


def parse_bsp(source: str, filename: str = "<input>") -> Bsp:
    b, diags = check_bsp(source, filename)
    if b is None:
        raise FrontendError(diags)
    return b
