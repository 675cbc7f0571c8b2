"""Mapping evaluation: metrics, constraint verdicts and a scalar score.

Lower scores are better. Every score term is divided by an upper bound that
depends only on the (waveform, BSP) instance, so scores of different
mappings of one instance are directly comparable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .model import (
    Bsp, Mapping, PathLatency, Schedule, Throughput, WaveformGraph, edge_bytes,
)
from .scheduler import build_task_graph, schedule_task_graph, steady_state_throughput

NN_ENERGY_PER_OP_J = 1e-10


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class Weights:
    latency: float = 1.0
    comm: float = 1.0
    sync: float = 0.5
    util: float = 0.5
    energy: float = 1.0

    def __post_init__(self):
        values = self.as_tuple()
        if any(not math.isfinite(w) or w < 0 for w in values):
            raise ConfigurationError(f"weights must be finite and nonnegative, got {values}")
        if not any(values):
            raise ConfigurationError("at least one weight must be positive")

    @classmethod
    def parse(cls, text: str) -> "Weights":
        try:
            values = [float(x) for x in text.split(",")]
        except ValueError:
            raise ConfigurationError(f"weights must be five comma-separated numbers, got {text!r}") from None
        if len(values) != 5:
            raise ConfigurationError(f"expected 5 weights, got {len(values)}")
        return cls(*values)

    def as_tuple(self) -> tuple[float, ...]:
        return (self.latency, self.comm, self.sync, self.util, self.energy)


DEFAULT_WEIGHTS = Weights()


@dataclass(frozen=True)
class Metrics:
    makespan_s: float
    data_localization: float
    comm_bytes: int
    total_bytes: int
    comm_time_s: float
    sync_count: int
    utilization: dict[str, float]
    mean_utilization: float
    energy_j: float
    throughput_fps: float


@dataclass(frozen=True)
class ScoreBounds:
    """Instance-wide normalizers for the five score terms."""

    time_s: float
    bytes: float
    edges: float
    energy_j: float


@dataclass(frozen=True)
class Verdict:
    constraint: str
    satisfied: bool
    measured: float
    bound: float
    unit: str


@dataclass(frozen=True)
class EvaluationReport:
    mapping: Mapping
    schedule: Schedule
    metrics: Metrics
    verdicts: tuple[Verdict, ...]
    score: float

    @property
    def feasible(self) -> bool:
        return all(v.satisfied for v in self.verdicts)

    @property
    def rank_key(self) -> tuple:
        # feasible mappings always sort before infeasible ones
        return (not self.feasible, self.score, self.mapping.key())


def compute_metrics(g: WaveformGraph, mapping: Mapping, schedule: Schedule, bsp: Bsp,
                    nn_energy_per_op: float = NN_ENERGY_PER_OP_J) -> Metrics:
    platform = bsp.platform
    total = local = 0
    sync = 0
    link_energy = 0.0
    for e in g.edges:
        nbytes = edge_bytes(e, mapping, bsp)
        total += nbytes
        if mapping.pe_of(e.src) == mapping.pe_of(e.dst):
            local += nbytes
        else:
            sync += 1
    comm_time = 0.0
    for le in schedule.link_entries:
        comm_time += le.end_s - le.start_s
    tg = build_task_graph(g, mapping, bsp)
    for tr in tg.transfers:
        for link_id, _ in tr.legs:
            link = next(ln for ln in platform.links if ln.id == link_id)
            link_energy += link.energy_per_byte_j * tr.nbytes

    compute_energy = 0.0
    for k in g.kernels:
        fid = mapping.flavor_of(k.id)
        if fid is not None:
            compute_energy += k.invocations * bsp.flavor(fid).cost.energy(k.size)
        else:
            load = k.fallback_load if k.is_nucleus else k.load_ops
            compute_energy += k.invocations * load * nn_energy_per_op

    makespan = schedule.makespan_s
    busy = schedule.pe_busy()
    util = {pe.id: (min(busy.get(pe.id, 0.0) / makespan, 1.0) if makespan > 0 else 0.0)
            for pe in platform.pes}
    mean_util = sum(util.values()) / len(util) if util else 0.0
    return Metrics(
        makespan_s=makespan,
        data_localization=local / total if total else 1.0,
        comm_bytes=total - local,
        total_bytes=total,
        comm_time_s=comm_time,
        sync_count=sync,
        utilization=util,
        mean_utilization=mean_util,
        energy_j=compute_energy + link_energy,
        throughput_fps=steady_state_throughput(schedule, platform),
    )


def constraint_label(c) -> str:
    if isinstance(c, PathLatency):
        return "latency(" + "->".join(c.path) + ")"
    return "throughput"


def check_constraints(g: WaveformGraph, schedule: Schedule, throughput: float) -> list[Verdict]:
    verdicts = []
    for c in g.constraints:
        if isinstance(c, PathLatency):
            missing = [k for k in (c.path[0], c.path[-1]) if k not in schedule.by_task]
            if missing:
                raise ValueError(f"constraint references unscheduled kernel(s) {missing}")
            measured = schedule.by_task[c.path[-1]].end_s - schedule.by_task[c.path[0]].start_s
            verdicts.append(Verdict(constraint_label(c), measured <= c.bound_s, measured, c.bound_s, "s"))
        elif isinstance(c, Throughput):
            verdicts.append(Verdict("throughput", throughput >= c.min_fps, throughput, c.min_fps, "fps"))
    return verdicts


def score(metrics: Metrics, weights: Weights, bounds: ScoreBounds) -> float:
    def ratio(x: float, ub: float) -> float:
        return x / ub if ub > 0 else 0.0

    return (weights.latency * ratio(metrics.makespan_s, bounds.time_s)
            + weights.comm * ratio(metrics.comm_bytes, bounds.bytes)
            + weights.sync * ratio(metrics.sync_count, bounds.edges)
            + weights.util * (1.0 - metrics.mean_utilization)
            + weights.energy * ratio(metrics.energy_j, bounds.energy_j))


def instance_bounds(g: WaveformGraph, bsp: Bsp, nn_energy_per_op: float = NN_ENERGY_PER_OP_J) -> ScoreBounds:
    """Upper bounds over every binding the BSP offers for this waveform."""
    from .mapper import enumerate_candidates  # mapper depends on this module

    platform = bsp.platform
    candidates = enumerate_candidates(g, bsp)
    time_ub = energy_ub = bytes_ub = 0.0
    min_clock = min((pe.clock_hz for pe in platform.pes), default=1.0)
    max_gamma = max([gm for _, _, gm in platform.glue_rules if gm is not None] + [2.0])
    max_epb = max((ln.energy_per_byte_j for ln in platform.links), default=0.0)
    max_hop_time = {}
    for k in g.kernels:
        worst_t = worst_e = 0.0
        for c in candidates.get(k.id, ()):
            clock = platform.pe(c.pe).clock_hz
            worst_t = max(worst_t, c.est_cycles / clock)
            if c.flavor is not None:
                e = k.invocations * bsp.flavor(c.flavor).cost.energy(k.size)
            else:
                load = k.fallback_load if k.is_nucleus else k.load_ops
                e = k.invocations * load * nn_energy_per_op
            worst_e = max(worst_e, e)
        time_ub += worst_t
        energy_ub += worst_e
    for e in g.edges:
        sample = max([e.format.sample_bytes]
                     + [bsp.flavor(c.flavor).output_format.sample_bytes
                        for c in candidates.get(e.src, ()) if c.flavor is not None])
        nbytes = e.tokens * sample
        bytes_ub += nbytes
        if nbytes not in max_hop_time:
            max_hop_time[nbytes] = max((ln.transfer_time(nbytes) for ln in platform.links), default=0.0)
        time_ub += 2 * max_hop_time[nbytes] + max_gamma * e.tokens / min_clock
        energy_ub += 2 * nbytes * max_epb
    return ScoreBounds(time_ub, bytes_ub, float(len(g.edges)), energy_ub)


@dataclass
class Evaluator:
    """Schedules a mapping and scores it; pure apart from a bounds cache."""

    weights: Weights = DEFAULT_WEIGHTS
    nn_energy_per_op: float = NN_ENERGY_PER_OP_J
    _bounds: dict = field(default_factory=dict, repr=False)

    def bounds(self, g: WaveformGraph, bsp: Bsp) -> ScoreBounds:
        key = (id(g), id(bsp))
        if key not in self._bounds:
            self._bounds[key] = (g, bsp, instance_bounds(g, bsp, self.nn_energy_per_op))
        return self._bounds[key][2]

    def evaluate(self, g: WaveformGraph, mapping: Mapping, bsp: Bsp,
                 order: Optional[Sequence[str]] = None) -> EvaluationReport:
        schedule = schedule_task_graph(build_task_graph(g, mapping, bsp), order)
        metrics = compute_metrics(g, mapping, schedule, bsp, self.nn_energy_per_op)
        verdicts = check_constraints(g, schedule, metrics.throughput_fps)
        s = score(metrics, self.weights, self.bounds(g, bsp))
        return EvaluationReport(mapping, schedule, metrics, tuple(verdicts), s)
