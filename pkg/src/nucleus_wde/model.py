"""Shared domain types: waveforms, platforms, flavors, mappings and schedules.

All values are frozen dataclasses. Durations are stored in seconds, clocks in
hertz and bandwidths in bytes per second; the text formats convert units.
"""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Union

__all__ = [
    "FormatKind", "Scaling", "Rounding", "DataFormat", "bytes_per_sample",
    "KernelSpec", "EdgeSpec", "PathLatency", "Throughput", "Constraint", "WaveformGraph",
    "PEClass", "ProcessingElement", "InterconnectLink", "CostModel", "SizeSet",
    "Flavor", "Platform", "Bsp", "Binding", "GlueTask", "Mapping",
    "ScheduleEntry", "LinkEntry", "Schedule", "Violation",
    "validate_graph", "cycles_of", "edge_formats", "edge_bytes", "topological_order", "DEFAULT_GLUE_CYCLES",
]

DEFAULT_GLUE_CYCLES = 2.0


class FormatKind(enum.Enum):
    Q15 = "q15"
    Q31 = "q31"
    CFLOAT32 = "cfloat32"
    FLOAT32 = "float32"

    @property
    def is_fixed_point(self) -> bool:
        return self in (FormatKind.Q15, FormatKind.Q31)


class Scaling(enum.Enum):
    NONE = "none"
    PERSTAGE = "perstage"
    BLOCK = "block"


class Rounding(enum.Enum):
    TRUNCATE = "trunc"
    NEAREST = "nearest"


_SAMPLE_BYTES = {
    FormatKind.Q15: 2,
    FormatKind.Q31: 4,
    FormatKind.FLOAT32: 4,
    FormatKind.CFLOAT32: 8,
}


@dataclass(frozen=True)
class DataFormat:
    kind: FormatKind
    block_size: int
    scaling: Scaling = Scaling.NONE
    rounding: Optional[Rounding] = None

    def __post_init__(self):
        if self.block_size < 1:
            raise ValueError(f"block size must be positive, got {self.block_size}")
        if self.kind.is_fixed_point and self.rounding is None:
            raise ValueError(f"{self.kind.value} format requires a rounding mode")

    @property
    def sample_bytes(self) -> int:
        return _SAMPLE_BYTES[self.kind]

    def __str__(self) -> str:
        parts = [f"block={self.block_size}"]
        if self.kind.is_fixed_point or self.scaling is not Scaling.NONE:
            parts.append(f"scaling={self.scaling.value}")
        if self.rounding is not None:
            parts.append(f"rounding={self.rounding.value}")
        return f"{self.kind.value}({', '.join(parts)})"


def bytes_per_sample(fmt: DataFormat) -> int:
    return fmt.sample_bytes


# -- waveform ---------------------------------------------------------------

@dataclass(frozen=True)
class KernelSpec:
    """A waveform kernel.

    A nucleus kernel names its nucleus and carries integer parameters (``size``
    is mandatory). A non-nucleus kernel carries only an abstract operation
    load per invocation. ``fallback_load`` lets a nucleus kernel run as a
    non-nucleus kernel when no flavor in the BSP can implement it.
    """

    id: str
    nucleus: Optional[str] = None
    params: tuple[tuple[str, int], ...] = ()
    load_ops: Optional[int] = None
    invocations: int = 1
    fallback_load: Optional[int] = None

    @property
    def is_nucleus(self) -> bool:
        return self.nucleus is not None

    def param(self, name: str, default: Optional[int] = None) -> Optional[int]:
        for key, value in self.params:
            if key == name:
                return value
        return default

    @property
    def size(self) -> Optional[int]:
        return self.param("size")


@dataclass(frozen=True)
class EdgeSpec:
    src: str
    dst: str
    tokens: int
    format: DataFormat

    @property
    def id(self) -> str:
        return f"{self.src}->{self.dst}"


@dataclass(frozen=True)
class PathLatency:
    path: tuple[str, ...]
    bound_s: float


@dataclass(frozen=True)
class Throughput:
    min_fps: float


Constraint = Union[PathLatency, Throughput]


@dataclass(frozen=True)
class WaveformGraph:
    name: str
    kernels: tuple[KernelSpec, ...] = ()
    edges: tuple[EdgeSpec, ...] = ()
    constraints: tuple[Constraint, ...] = ()

    @cached_property
    def kernel_map(self) -> dict[str, KernelSpec]:
        return {k.id: k for k in self.kernels}

    def kernel(self, kid: str) -> KernelSpec:
        return self.kernel_map[kid]

    def predecessors(self, kid: str) -> list[EdgeSpec]:
        return [e for e in self.edges if e.dst == kid]

    def successors(self, kid: str) -> list[EdgeSpec]:
        return [e for e in self.edges if e.src == kid]


# -- platform ---------------------------------------------------------------

class PEClass(enum.Enum):
    DSP = "dsp"
    ASIP = "asip"
    GPP = "gpp"
    HWACC = "hwacc"


@dataclass(frozen=True)
class ProcessingElement:
    id: str
    pe_class: PEClass
    clock_hz: float
    gpp_efficiency: float = 1.0

    def __post_init__(self):
        if not (self.clock_hz > 0 and math.isfinite(self.clock_hz)):
            raise ValueError(f"PE {self.id}: clock must be positive and finite")
        if not (self.gpp_efficiency > 0 and math.isfinite(self.gpp_efficiency)):
            raise ValueError(f"PE {self.id}: efficiency must be positive and finite")

    @property
    def runs_software(self) -> bool:
        return self.pe_class is not PEClass.HWACC


@dataclass(frozen=True)
class InterconnectLink:
    id: str
    a: str
    b: str
    bandwidth_bytes_per_s: float
    latency_s: float = 0.0
    energy_per_byte_j: float = 0.0

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError(f"link {self.id} connects {self.a} to itself")
        if not self.bandwidth_bytes_per_s > 0:
            raise ValueError(f"link {self.id}: bandwidth must be positive")
        if self.latency_s < 0 or self.energy_per_byte_j < 0:
            raise ValueError(f"link {self.id}: latency and energy must be nonnegative")

    @property
    def endpoints(self) -> frozenset[str]:
        return frozenset((self.a, self.b))

    def transfer_time(self, nbytes: int) -> float:
        return self.latency_s + nbytes / self.bandwidth_bytes_per_s


@dataclass(frozen=True)
class CostModel:
    """cycles(n) = a + b*n + c*n*log2(n); energy(n) = e0 + e1*n joules."""

    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    e0: float = 0.0
    e1: float = 0.0

    def __post_init__(self):
        for name in ("a", "b", "c", "e0", "e1"):
            value = getattr(self, name)
            if not (value >= 0 and math.isfinite(value)):
                raise ValueError(f"cost coefficient {name} must be finite and nonnegative, got {value}")

    def cycles(self, n: int) -> float:
        return cycles_of(self, n)

    def energy(self, n: int) -> float:
        if n < 1:
            raise ValueError(f"size must be >= 1, got {n}")
        return self.e0 + self.e1 * n


def cycles_of(cost: CostModel, n: int) -> float:
    """Cycle count of one invocation at size ``n``, never below one cycle."""
    if n < 1:
        raise ValueError(f"size must be >= 1, got {n}")
    raw = cost.a + cost.b * n + cost.c * n * math.log2(n)
    return max(raw, 1.0)


def _is_pow(n: int, base: int) -> bool:
    if n < 1:
        return False
    while n % base == 0:
        n //= base
    return n == 1


@dataclass(frozen=True)
class SizeSet:
    """Either an explicit list of sizes or a ``[lo..hi pow2|pow4]`` range."""

    explicit: tuple[int, ...] = ()
    lo: int = 0
    hi: int = 0
    base: int = 0

    def __post_init__(self):
        if self.base and (self.base not in (2, 4) or self.lo < 1 or self.hi < self.lo):
            raise ValueError(f"bad size range [{self.lo}..{self.hi} pow{self.base}]")
        if not self.base and not self.explicit:
            raise ValueError("size set is empty")
        if not self.base and any(n < 1 for n in self.explicit):
            raise ValueError("sizes must be positive")
        if self.base and not list(self):
            raise ValueError(f"size range [{self.lo}..{self.hi} pow{self.base}] contains no size")

    @classmethod
    def pow_range(cls, lo: int, hi: int, base: int = 2) -> "SizeSet":
        return cls(lo=lo, hi=hi, base=base)

    def __contains__(self, n: object) -> bool:
        if not isinstance(n, int):
            return False
        if self.base:
            return self.lo <= n <= self.hi and _is_pow(n, self.base)
        return n in self.explicit

    def __iter__(self):
        if not self.base:
            yield from self.explicit
            return
        n = 1
        while n <= self.hi:
            if n >= self.lo:
                yield n
            n *= self.base

    def __str__(self) -> str:
        if self.base:
            return f"[{self.lo}..{self.hi} pow{self.base}]"
        return "[" + ", ".join(str(n) for n in self.explicit) + "]"


@dataclass(frozen=True)
class Flavor:
    """One nucleus implementation (NI) bundled with the PE it runs on."""

    id: str
    nucleus: str
    pe: str
    algorithm: str
    sizes: SizeSet
    input_format: DataFormat
    output_format: DataFormat
    cost: CostModel
    vendor: str = "generic"

    @property
    def ni_name(self) -> str:
        return f"NI({self.nucleus},{self.pe})"


@dataclass(frozen=True)
class Platform:
    name: str
    pes: tuple[ProcessingElement, ...] = ()
    links: tuple[InterconnectLink, ...] = ()
    # (from kind, to kind) -> cycles per sample, or None when no conversion exists
    glue_rules: tuple[tuple[FormatKind, FormatKind, Optional[float]], ...] = ()

    @cached_property
    def pe_map(self) -> dict[str, ProcessingElement]:
        return {pe.id: pe for pe in self.pes}

    def pe(self, pid: str) -> ProcessingElement:
        return self.pe_map[pid]

    @cached_property
    def _link_index(self) -> dict[frozenset, InterconnectLink]:
        return {link.endpoints: link for link in self.links}

    def link_between(self, p: str, q: str) -> Optional[InterconnectLink]:
        return self._link_index.get(frozenset((p, q)))

    def glue_cycles_per_sample(self, src: FormatKind, dst: FormatKind) -> Optional[float]:
        """Conversion cost between two format kinds; ``None`` if unsupported."""
        for a, b, gamma in self.glue_rules:
            if a is src and b is dst:
                return gamma
        return DEFAULT_GLUE_CYCLES


@dataclass(frozen=True)
class Bsp:
    platform: Platform
    flavors: tuple[Flavor, ...] = ()

    @cached_property
    def flavor_map(self) -> dict[str, Flavor]:
        return {f.id: f for f in self.flavors}

    def flavor(self, fid: str) -> Flavor:
        return self.flavor_map[fid]


# -- mapping and schedule ---------------------------------------------------

@dataclass(frozen=True)
class Binding:
    """Spatial binding of one kernel: a flavor (nuclei) or a bare PE."""

    kernel: str
    pe: str
    flavor: Optional[str] = None

    @property
    def target(self) -> str:
        return self.flavor if self.flavor is not None else self.pe


@dataclass(frozen=True)
class GlueTask:
    src: str
    dst: str
    from_format: DataFormat
    to_format: DataFormat
    placed_on: str
    cycles: int

    @property
    def edge_id(self) -> str:
        return f"{self.src}->{self.dst}"

    @property
    def id(self) -> str:
        return f"glue({self.src}->{self.dst})"


@dataclass(frozen=True)
class Mapping:
    bindings: tuple[Binding, ...]
    glue: tuple[GlueTask, ...] = ()

    @cached_property
    def binding_map(self) -> dict[str, Binding]:
        return {b.kernel: b for b in self.bindings}

    def pe_of(self, kernel: str) -> str:
        return self.binding_map[kernel].pe

    def flavor_of(self, kernel: str) -> Optional[str]:
        return self.binding_map[kernel].flavor

    def glue_for(self, src: str, dst: str) -> Optional[GlueTask]:
        for g in self.glue:
            if g.src == src and g.dst == dst:
                return g
        return None

    def key(self) -> tuple[str, ...]:
        """Candidate ids ordered by kernel id; used as deterministic tie-break."""
        return tuple(b.target for b in sorted(self.bindings, key=lambda b: b.kernel))


@dataclass(frozen=True)
class ScheduleEntry:
    task: str
    pe: str
    start_s: float
    end_s: float


@dataclass(frozen=True)
class LinkEntry:
    edge: str
    link: str
    start_s: float
    end_s: float


@dataclass(frozen=True)
class Schedule:
    entries: tuple[ScheduleEntry, ...]
    link_entries: tuple[LinkEntry, ...] = ()

    @property
    def makespan_s(self) -> float:
        ends = [e.end_s for e in self.entries] + [e.end_s for e in self.link_entries]
        return max(ends, default=0.0)

    @cached_property
    def by_task(self) -> dict[str, ScheduleEntry]:
        return {e.task: e for e in self.entries}

    def pe_busy(self) -> dict[str, float]:
        busy: dict[str, float] = {}
        for e in self.entries:
            busy[e.pe] = busy.get(e.pe, 0.0) + (e.end_s - e.start_s)
        return busy

    def link_busy(self) -> dict[str, float]:
        busy: dict[str, float] = {}
        for e in self.link_entries:
            busy[e.link] = busy.get(e.link, 0.0) + (e.end_s - e.start_s)
        return busy


def edge_formats(edge: EdgeSpec, mapping: Mapping, bsp: Bsp) -> tuple[DataFormat, DataFormat]:
    """(producer output format, consumer input format) of an edge.

    A kernel bound to a flavor speaks that flavor's formats; a kernel bound
    to a bare PE speaks the format declared on the edge.
    """
    src_flavor = mapping.flavor_of(edge.src)
    dst_flavor = mapping.flavor_of(edge.dst)
    out_fmt = bsp.flavor(src_flavor).output_format if src_flavor else edge.format
    in_fmt = bsp.flavor(dst_flavor).input_format if dst_flavor else edge.format
    return out_fmt, in_fmt


def edge_bytes(edge: EdgeSpec, mapping: Mapping, bsp: Bsp) -> int:
    """Bytes carried by an edge per frame, encoded in the producer's format."""
    return edge.tokens * edge_formats(edge, mapping, bsp)[0].sample_bytes


# -- validation -------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    subject: str = ""

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


def topological_order(nodes: Iterable[str], edges: Iterable[tuple[str, str]]) -> Optional[list[str]]:
    """Kahn's algorithm with lexicographic tie-break; ``None`` on a cycle."""
    nodes = list(nodes)
    indeg = {n: 0 for n in nodes}
    succ: dict[str, list[str]] = {n: [] for n in nodes}
    for s, d in edges:
        if s in indeg and d in indeg:
            succ[s].append(d)
            indeg[d] += 1
    heap = [n for n in nodes if indeg[n] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        n = heapq.heappop(heap)
        order.append(n)
        for m in succ[n]:
            indeg[m] -= 1
            if indeg[m] == 0:
                heapq.heappush(heap, m)
    return order if len(order) == len(nodes) else None


def validate_graph(g: WaveformGraph) -> list[Violation]:
    """Report every structural problem of a waveform graph; empty means valid."""
    out: list[Violation] = []
    seen: set[str] = set()
    for k in g.kernels:
        if not k.id:
            out.append(Violation("empty-id", "kernel id is empty"))
        if k.id in seen:
            out.append(Violation("duplicate-kernel", f"duplicate kernel id '{k.id}'", k.id))
        seen.add(k.id)
        if k.invocations < 1:
            out.append(Violation("bad-invocations", f"kernel '{k.id}' has invocations < 1", k.id))
        if k.is_nucleus:
            if not k.nucleus:
                out.append(Violation("empty-nucleus", f"kernel '{k.id}' names an empty nucleus", k.id))
            size = k.size
            if size is None:
                out.append(Violation("missing-size", f"nucleus kernel '{k.id}' lacks a size parameter", k.id))
            elif size < 1:
                out.append(Violation("bad-size", f"kernel '{k.id}' has size < 1", k.id))
            if k.fallback_load is not None and k.fallback_load < 1:
                out.append(Violation("bad-load", f"kernel '{k.id}' has fallback_load < 1", k.id))
        else:
            if k.load_ops is None or k.load_ops < 1:
                out.append(Violation("bad-load", f"non-nucleus kernel '{k.id}' needs load >= 1", k.id))

    pairs: set[tuple[str, str]] = set()
    for e in g.edges:
        for end in (e.src, e.dst):
            if end not in seen:
                out.append(Violation("dangling-edge", f"edge {e.id} references unknown kernel '{end}'", e.id))
        if e.src == e.dst:
            out.append(Violation("self-loop", f"edge {e.id} is a self loop", e.id))
        if (e.src, e.dst) in pairs:
            out.append(Violation("duplicate-edge", f"duplicate edge {e.id}", e.id))
        pairs.add((e.src, e.dst))
        if e.tokens < 1:
            out.append(Violation("bad-tokens", f"edge {e.id} carries < 1 token", e.id))

    if topological_order(seen, [(e.src, e.dst) for e in g.edges if e.src != e.dst]) is None:
        out.append(Violation("cycle", "cycle detected in waveform graph"))

    for c in g.constraints:
        if isinstance(c, PathLatency):
            label = "[" + ", ".join(c.path) + "]"
            if not c.path:
                out.append(Violation("empty-path", "latency constraint has an empty path"))
            unknown = [k for k in c.path if k not in seen]
            for k in unknown:
                out.append(Violation("unknown-kernel", f"constraint path references unknown kernel '{k}'", k))
            if not unknown:
                for s, d in zip(c.path, c.path[1:]):
                    if (s, d) not in pairs:
                        out.append(Violation("path-not-connected",
                                             f"path {label} not connected: no edge {s}->{d}", label))
                        break
            if not (c.bound_s > 0 and math.isfinite(c.bound_s)):
                out.append(Violation("bad-bound", f"latency bound of {label} must be positive", label))
        elif isinstance(c, Throughput):
            if not (c.min_fps > 0 and math.isfinite(c.min_fps)):
                out.append(Violation("bad-bound", "throughput bound must be positive"))
    return out
