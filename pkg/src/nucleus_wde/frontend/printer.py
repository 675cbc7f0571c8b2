"""Canonical text rendering of waveform graphs and BSPs.

Output re-parses to an equal model value. Physical quantities are printed in
the preferred unit only when that round-trips bit-exactly; otherwise the base
unit is used.
"""

from __future__ import annotations

import re
from functools import singledispatch

from ..model import Bsp, DataFormat, PathLatency, Throughput, WaveformGraph
from .parser import BANDWIDTH_UNITS, ENERGY_UNITS, FREQ_UNITS, TIME_UNITS

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def _real(x: float) -> str:
    return repr(float(x))


def _quantity(x: float, units: dict[str, float], preferred: str) -> str:
    base = next(u for u, s in units.items() if s == 1.0)
    for unit in (preferred, base):
        text = _real(x / units[unit]) if unit != base else _real(x)
        if float(text) * units[unit] == x:
            return f"{text} {unit}"
    return f"{_real(x)} {base}"


def _string(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _tag(s: str) -> str:
    return s if _IDENT.match(s) and s != "none" else _string(s)


def format_literal(fmt: DataFormat) -> str:
    return str(fmt)


@singledispatch
def pretty_print(value) -> str:
    raise TypeError(f"cannot print {type(value).__name__}")


@pretty_print.register
def _(g: WaveformGraph) -> str:
    lines = [f"waveform {_string(g.name)} {{"]
    for k in g.kernels:
        if k.is_nucleus:
            attrs = [f"{name} = {val};" for name, val in k.params]
            attrs.append(f"invocations = {k.invocations};")
            if k.fallback_load is not None:
                attrs.append(f"fallback_load = {k.fallback_load};")
            lines.append(f"  kernel {k.id} : nucleus({k.nucleus}) {{ {' '.join(attrs)} }}")
        else:
            lines.append(f"  kernel {k.id} : nonnucleus {{ load = {k.load_ops}; invocations = {k.invocations}; }}")
    for e in g.edges:
        lines.append(f"  edge {e.src} -> {e.dst} {{ tokens = {e.tokens}; format = {format_literal(e.format)}; }}")
    for c in g.constraints:
        if isinstance(c, PathLatency):
            bound = _quantity(c.bound_s, TIME_UNITS, "us")
            lines.append(f"  constraint latency(path = [{', '.join(c.path)}]) <= {bound};")
        elif isinstance(c, Throughput):
            lines.append(f"  constraint throughput >= {_real(c.min_fps)} fps;")
    lines.append("}")
    return "\n".join(lines) + "\n"


@pretty_print.register
def _(bsp: Bsp) -> str:
    p = bsp.platform
    lines = [f"bsp {_string(p.name)} {{"]
    for pe in p.pes:
        clock = _quantity(pe.clock_hz, FREQ_UNITS, "MHz")
        lines.append(f"  pe {pe.id} : {pe.pe_class.value} {{ clock = {clock}; efficiency = {_real(pe.gpp_efficiency)}; }}")
    for ln in p.links:
        bw = _quantity(ln.bandwidth_bytes_per_s, BANDWIDTH_UNITS, "MBps")
        lat = _quantity(ln.latency_s, TIME_UNITS, "ns")
        epb = _quantity(ln.energy_per_byte_j, ENERGY_UNITS, "J")
        lines.append(f"  link {ln.id} : {ln.a} <-> {ln.b} {{ bandwidth = {bw}; latency = {lat}; energy_per_byte = {epb}; }}")
    for f in bsp.flavors:
        c = f.cost
        attrs = [
            f"algorithm = {_tag(f.algorithm)};",
            f"vendor = {_tag(f.vendor)};",
            f"sizes = {f.sizes};",
            f"input = {format_literal(f.input_format)};",
            f"output = {format_literal(f.output_format)};",
            f"cycles = {_real(c.a)} + {_real(c.b)}*n + {_real(c.c)}*nlogn;",
            f"energy = {_real(c.e0)} + {_real(c.e1)}*n;",
        ]
        lines.append(f"  flavor {f.id} : {f.nucleus} on {f.pe} {{ {' '.join(attrs)} }}")
    for src, dst, gamma in p.glue_rules:
        value = "none" if gamma is None else _real(gamma)
        lines.append(f"  glue {src.value} -> {dst.value} = {value};")
    lines.append("}")
    return "\n".join(lines) + "\n"
