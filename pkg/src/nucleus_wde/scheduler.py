"""Static non-preemptive list scheduling of a mapped waveform.

The mapped waveform is lowered to a :class:`TaskGraph`: one task per kernel
(all invocations of a frame back to back), one per glue conversion, and one
:class:`Transfer` per data dependency. Cross-PE transfers occupy one link, or
two links in sequence when the PEs are only connected through an
intermediate PE. Links carry one transfer at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .model import (
    Bsp, EdgeSpec, GlueTask, InterconnectLink, KernelSpec, LinkEntry, Mapping,
    Platform, Schedule, ScheduleEntry, WaveformGraph, cycles_of, edge_bytes,
)


class UnroutableEdgeError(Exception):
    def __init__(self, edge: str, src_pe: str, dst_pe: str):
        self.edge = edge
        super().__init__(f"edge {edge}: no route between {src_pe} and {dst_pe} within two hops")


@dataclass(frozen=True)
class Task:
    id: str
    pe: str
    duration_s: float


@dataclass(frozen=True)
class Transfer:
    edge: str
    src: str
    dst: str
    legs: tuple[tuple[str, float], ...] = ()  # (link id, seconds)
    nbytes: int = 0

    @property
    def duration_s(self) -> float:
        return sum(d for _, d in self.legs)


@dataclass(frozen=True)
class TaskGraph:
    tasks: tuple[Task, ...]
    transfers: tuple[Transfer, ...]


# -- timing model -----------------------------------------------------------

def kernel_cycles(kernel: KernelSpec, mapping: Mapping, bsp: Bsp) -> float:
    """Cycles for all invocations of ``kernel`` in one frame under ``mapping``."""
    b = mapping.binding_map[kernel.id]
    if b.flavor is not None:
        per_call = cycles_of(bsp.flavor(b.flavor).cost, kernel.size)
    else:
        load = kernel.load_ops if not kernel.is_nucleus else kernel.fallback_load
        if load is None:
            raise ValueError(f"nucleus kernel '{kernel.id}' is bound to a bare PE but has no fallback_load")
        per_call = load / bsp.platform.pe(b.pe).gpp_efficiency
    return kernel.invocations * per_call


def task_duration(task: Union[KernelSpec, GlueTask], mapping: Mapping, bsp: Bsp) -> float:
    if isinstance(task, GlueTask):
        return task.cycles / bsp.platform.pe(task.placed_on).clock_hz
    pe = bsp.platform.pe(mapping.pe_of(task.id))
    return kernel_cycles(task, mapping, bsp) / pe.clock_hz


def route(platform: Platform, src_pe: str, dst_pe: str, nbytes: int) -> Optional[tuple[InterconnectLink, ...]]:
    """Links carrying ``nbytes`` from one PE to another; direct link first, else the cheapest 2-hop path."""
    if src_pe == dst_pe:
        return ()
    direct = platform.link_between(src_pe, dst_pe)
    if direct is not None:
        return (direct,)
    best, best_time = None, math.inf
    for mid in sorted(platform.pe_map):
        if mid in (src_pe, dst_pe):
            continue
        first, second = platform.link_between(src_pe, mid), platform.link_between(mid, dst_pe)
        if first is None or second is None:
            continue
        t = first.transfer_time(nbytes) + second.transfer_time(nbytes)
        if t < best_time:
            best, best_time = (first, second), t
    return best


def transfer_legs(edge: EdgeSpec, src_pe: str, dst_pe: str, nbytes: int,
                  platform: Platform) -> tuple[tuple[str, float], ...]:
    links = route(platform, src_pe, dst_pe, nbytes)
    if links is None:
        raise UnroutableEdgeError(edge.id, src_pe, dst_pe)
    return tuple((ln.id, ln.transfer_time(nbytes)) for ln in links)


def transfer_duration(edge: EdgeSpec, mapping: Mapping, bsp: Bsp) -> float:
    src_pe, dst_pe = mapping.pe_of(edge.src), mapping.pe_of(edge.dst)
    legs = transfer_legs(edge, src_pe, dst_pe, edge_bytes(edge, mapping, bsp), bsp.platform)
    return sum(d for _, d in legs)


def build_task_graph(g: WaveformGraph, mapping: Mapping, bsp: Bsp) -> TaskGraph:
    tasks = [Task(k.id, mapping.pe_of(k.id), task_duration(k, mapping, bsp)) for k in g.kernels]
    transfers = []
    for glue in mapping.glue:
        tasks.append(Task(glue.id, glue.placed_on, task_duration(glue, mapping, bsp)))
    for e in g.edges:
        nbytes = edge_bytes(e, mapping, bsp)
        src_pe, dst_pe = mapping.pe_of(e.src), mapping.pe_of(e.dst)
        legs = transfer_legs(e, src_pe, dst_pe, nbytes, bsp.platform)
        glue = mapping.glue_for(e.src, e.dst)
        if glue is None:
            transfers.append(Transfer(e.id, e.src, e.dst, legs, nbytes))
        else:
            transfers.append(Transfer(e.id, e.src, glue.id, legs, nbytes))
            transfers.append(Transfer(e.id, glue.id, e.dst, (), 0))
    return TaskGraph(tuple(tasks), tuple(transfers))


# -- scheduling -------------------------------------------------------------

def upward_ranks(tg: TaskGraph) -> dict[str, float]:
    """Longest path (task + transfer durations) from each task to an exit task."""
    duration = {t.id: t.duration_s for t in tg.tasks}
    out: dict[str, list[Transfer]] = {t.id: [] for t in tg.tasks}
    for tr in tg.transfers:
        out[tr.src].append(tr)
    rank: dict[str, float] = {}

    def visit(tid: str) -> float:
        if tid not in rank:
            tail = max((tr.duration_s + visit(tr.dst) for tr in out[tid]), default=0.0)
            rank[tid] = duration[tid] + tail
        return rank[tid]

    for t in tg.tasks:
        visit(t.id)
    return rank


def schedule_task_graph(tg: TaskGraph, order: Optional[Sequence[str]] = None) -> Schedule:
    """List-schedule ``tg``.

    Without ``order``, the ready task with the highest upward rank goes next
    (ties by task id). With ``order``, the earliest ready task in that
    sequence goes next. A task starts once all its inputs have arrived and
    its PE is free; its input transfers are placed on their links when the
    task is dispatched, in order of producer finish time.
    """
    tasks = {t.id: t for t in tg.tasks}
    incoming: dict[str, list[Transfer]] = {tid: [] for tid in tasks}
    pending = {tid: 0 for tid in tasks}
    for tr in tg.transfers:
        incoming[tr.dst].append(tr)
        pending[tr.dst] += 1

    if order is None:
        rank = upward_ranks(tg)
        priority = {tid: (-rank[tid], tid) for tid in tasks}
    else:
        if sorted(order) != sorted(tasks):
            raise ValueError("priority order must list every task exactly once")
        priority = {tid: (i, tid) for i, tid in enumerate(order)}

    ready = {tid for tid, n in pending.items() if n == 0}
    finish: dict[str, float] = {}
    pe_free: dict[str, float] = {}
    link_free: dict[str, float] = {}
    entries: list[ScheduleEntry] = []
    link_entries: list[LinkEntry] = []

    while ready:
        tid = min(ready, key=priority.__getitem__)
        ready.remove(tid)
        task = tasks[tid]
        data_ready = 0.0
        for tr in sorted(incoming[tid], key=lambda tr: (finish[tr.src], tr.edge, tr.src)):
            arrival = finish[tr.src]
            for link, dur in tr.legs:
                start = max(arrival, link_free.get(link, 0.0))
                arrival = start + dur
                link_free[link] = arrival
                link_entries.append(LinkEntry(tr.edge, link, start, arrival))
            data_ready = max(data_ready, arrival)
        start = max(data_ready, pe_free.get(task.pe, 0.0))
        end = start + task.duration_s
        pe_free[task.pe] = end
        finish[tid] = end
        entries.append(ScheduleEntry(tid, task.pe, start, end))
        for tr in tg.transfers:
            if tr.src == tid:
                pending[tr.dst] -= 1
                if pending[tr.dst] == 0:
                    ready.add(tr.dst)

    if len(finish) != len(tasks):
        raise ValueError("task graph contains a cycle")
    return Schedule(tuple(entries), tuple(link_entries))


def list_schedule(g: WaveformGraph, mapping: Mapping, bsp: Bsp) -> Schedule:
    return schedule_task_graph(build_task_graph(g, mapping, bsp))


def steady_state_throughput(schedule: Schedule, platform: Optional[Platform] = None) -> float:
    """Frames per second when frames are pipelined; the busiest resource sets the rate."""
    busy = list(schedule.pe_busy().values()) + list(schedule.link_busy().values())
    bottleneck = max(busy, default=0.0)
    return math.inf if bottleneck <= 0 else 1.0 / bottleneck
