"""Spatial mapping of waveform kernels onto BSP flavors and PEs.

A nucleus kernel binds to a flavor (which fixes its PE). A non-nucleus
kernel, or a nucleus kernel with ``fallback_load`` and no matching flavor,
binds to any PE that runs software. Edges whose two ends disagree on data
format get a glue task on the consumer's PE.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

from .evaluator import EvaluationReport, Evaluator
from .model import (
    Binding, Bsp, Flavor, GlueTask, KernelSpec, Mapping, WaveformGraph,
    cycles_of, edge_formats, topological_order,
)
from .scheduler import UnroutableEdgeError

DEFAULT_ENUMERATION_BOUND = 10**6
DEFAULT_MOVE_BUDGET = 1000


class UnmappableFormatError(Exception):
    def __init__(self, edge: str, src_kind, dst_kind):
        self.edge = edge
        super().__init__(f"edge {edge}: no conversion rule from {src_kind.value} to {dst_kind.value}")


class EnumerationBoundExceeded(Exception):
    def __init__(self, product: int, bound: int):
        self.product = product
        self.bound = bound
        super().__init__(f"{product} candidate mappings exceed the enumeration bound {bound}; "
                         f"use the greedy strategy")


class InfeasibleMapping(Exception):
    """No feasible mapping exists (or none was reached)."""

    def __init__(self, empty_kernels: list[str], reasons: list[str],
                 best: Optional[EvaluationReport] = None):
        self.empty_kernels = empty_kernels
        self.reasons = reasons
        self.best = best
        lines = [f"kernel '{k}' has no compatible flavor or PE" for k in empty_kernels] + reasons
        super().__init__("no feasible mapping: " + "; ".join(lines))


@dataclass(frozen=True)
class BindingCandidate:
    kernel: str
    pe: str
    flavor: Optional[str]
    est_cycles: float
    format_penalty_cycles: float = 0.0

    @property
    def target(self) -> str:
        return self.flavor if self.flavor is not None else self.pe

    def binding(self) -> Binding:
        return Binding(self.kernel, self.pe, self.flavor)


@dataclass(frozen=True)
class MappingResult:
    mapping: Mapping
    report: EvaluationReport
    ranked: tuple[EvaluationReport, ...]
    evaluated: int


def compatible(kernel: KernelSpec, flavor: Flavor) -> bool:
    """Genre members declared under a nucleus bind to that nucleus's flavors."""
    if not kernel.is_nucleus:
        raise ValueError(f"kernel '{kernel.id}' is not a nucleus kernel")
    return flavor.nucleus == kernel.nucleus and kernel.size in flavor.sizes


def enumerate_candidates(g: WaveformGraph, bsp: Bsp) -> dict[str, list[BindingCandidate]]:
    """All binding options per kernel, sorted by candidate id; lists may be empty."""
    software_pes = [pe for pe in bsp.platform.pes if pe.runs_software]
    out: dict[str, list[BindingCandidate]] = {}
    for k in g.kernels:
        cands = []
        if k.is_nucleus:
            for f in bsp.flavors:
                if compatible(k, f):
                    cands.append(BindingCandidate(k.id, f.pe, f.id, k.invocations * cycles_of(f.cost, k.size)))
        load = k.load_ops if not k.is_nucleus else (k.fallback_load if not cands else None)
        if load is not None:
            for pe in software_pes:
                cands.append(BindingCandidate(k.id, pe.id, None, k.invocations * load / pe.gpp_efficiency))
        out[k.id] = sorted(cands, key=lambda c: c.target)
    return out


def insert_glue(g: WaveformGraph, bindings, bsp: Bsp) -> list[GlueTask]:
    """Glue tasks for every format-mismatched edge, placed on the consumer PE."""
    partial = Mapping(tuple(bindings))
    glue = []
    for e in g.edges:
        out_fmt, in_fmt = edge_formats(e, partial, bsp)
        if out_fmt == in_fmt:
            continue
        gamma = bsp.platform.glue_cycles_per_sample(out_fmt.kind, in_fmt.kind)
        if gamma is None:
            raise UnmappableFormatError(e.id, out_fmt.kind, in_fmt.kind)
        cycles = max(1, math.ceil(gamma * e.tokens))
        glue.append(GlueTask(e.src, e.dst, out_fmt, in_fmt, partial.pe_of(e.dst), cycles))
    return glue


def build_mapping(g: WaveformGraph, bindings, bsp: Bsp) -> Mapping:
    bindings = tuple(sorted(bindings, key=lambda b: b.kernel))
    return Mapping(bindings, tuple(insert_glue(g, bindings, bsp)))


def _try_evaluate(g, bsp, evaluator, bindings) -> tuple[Optional[EvaluationReport], Optional[str]]:
    try:
        mapping = build_mapping(g, bindings, bsp)
        return evaluator.evaluate(g, mapping, bsp), None
    except (UnmappableFormatError, UnroutableEdgeError) as exc:
        return None, str(exc)


def _infeasibility(best: Optional[EvaluationReport], errors: list[str]) -> InfeasibleMapping:
    reasons = []
    if best is not None:
        for v in best.verdicts:
            if not v.satisfied:
                reasons.append(f"constraint {v.constraint} violated in every mapping "
                               f"(best measured {v.measured:.6g} {v.unit} vs bound {v.bound:.6g} {v.unit})")
    reasons.extend(sorted(set(errors))[:5])
    return InfeasibleMapping([], reasons, best)


def _thread_count() -> int:
    raw = os.environ.get("NUCLEUS_WDE_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else 1


def _evaluate_chunk(args):
    g, bsp, weights, nn_energy, kernel_ids, cand_lists, start, stop = args
    evaluator = Evaluator(weights, nn_energy)
    reports, errors = [], []
    for combo in itertools.islice(itertools.product(*cand_lists), start, stop):
        rep, err = _try_evaluate(g, bsp, evaluator, [c.binding() for c in combo])
        if rep is None:
            errors.append(err)
        else:
            reports.append(rep)
    return reports, errors


def map_exhaustive(g: WaveformGraph, bsp: Bsp, evaluator: Optional[Evaluator] = None, *,
                   bound: int = DEFAULT_ENUMERATION_BOUND, top_k: int = 1,
                   workers: Optional[int] = None) -> MappingResult:
    """Evaluate every total binding and return the best feasible one.

    Ties on score go to the mapping whose candidate ids, read in kernel-id
    order, sort first.
    """
    evaluator = evaluator or Evaluator()
    cands = enumerate_candidates(g, bsp)
    empty = sorted(k for k, c in cands.items() if not c)
    if empty:
        raise InfeasibleMapping(empty, [])
    kernel_ids = sorted(cands)
    cand_lists = [cands[k] for k in kernel_ids]
    product = math.prod(len(c) for c in cand_lists)
    if product > bound:
        raise EnumerationBoundExceeded(product, bound)

    workers = workers or _thread_count()
    if workers > 1 and product > 64:
        step = math.ceil(product / workers)
        chunks = [(g, bsp, evaluator.weights, evaluator.nn_energy_per_op, kernel_ids, cand_lists,
                   s, min(s + step, product)) for s in range(0, product, step)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_evaluate_chunk, chunks))
        reports = [r for rs, _ in parts for r in rs]
        errors = [e for _, es in parts for e in es]
    else:
        reports, errors = [], []
        for combo in itertools.product(*cand_lists):
            rep, err = _try_evaluate(g, bsp, evaluator, [c.binding() for c in combo])
            if rep is None:
                errors.append(err)
            else:
                reports.append(rep)

    reports.sort(key=lambda r: r.rank_key)
    if not reports or not reports[0].feasible:
        raise _infeasibility(reports[0] if reports else None, errors)
    best = reports[0]
    return MappingResult(best.mapping, best, tuple(reports[:max(top_k, 1)]), product)


def _format_penalty(g: WaveformGraph, bsp: Bsp, chosen: dict[str, Binding],
                    cand: BindingCandidate) -> float:
    trial = dict(chosen)
    trial[cand.kernel] = cand.binding()
    partial = Mapping(tuple(trial.values()))
    penalty = 0.0
    for e in g.edges:
        if cand.kernel not in (e.src, e.dst) or e.src not in trial or e.dst not in trial:
            continue
        out_fmt, in_fmt = edge_formats(e, partial, bsp)
        if out_fmt != in_fmt:
            gamma = bsp.platform.glue_cycles_per_sample(out_fmt.kind, in_fmt.kind)
            penalty += math.inf if gamma is None else gamma * e.tokens
    return penalty


def map_greedy(g: WaveformGraph, bsp: Bsp, evaluator: Optional[Evaluator] = None, *,
               move_budget: int = DEFAULT_MOVE_BUDGET) -> MappingResult:
    """Cheapest-candidate construction in topological order, then first-improvement
    local search over single-kernel rebinds."""
    evaluator = evaluator or Evaluator()
    cands = enumerate_candidates(g, bsp)
    empty = sorted(k for k, c in cands.items() if not c)
    if empty:
        raise InfeasibleMapping(empty, [])

    order = topological_order([k.id for k in g.kernels], [(e.src, e.dst) for e in g.edges])
    chosen: dict[str, Binding] = {}
    for kid in order:
        best = min(cands[kid], key=lambda c: (c.est_cycles + _format_penalty(g, bsp, chosen, c), c.target))
        chosen[kid] = best.binding()

    errors: list[str] = []
    current, err = _try_evaluate(g, bsp, evaluator, chosen.values())
    if err:
        errors.append(err)
    evaluated = 1
    improved = True
    while improved and evaluated < move_budget:
        improved = False
        for kid in sorted(cands):
            for c in cands[kid]:
                if c.binding() == chosen[kid] or evaluated >= move_budget:
                    continue
                trial = dict(chosen)
                trial[kid] = c.binding()
                rep, err = _try_evaluate(g, bsp, evaluator, trial.values())
                evaluated += 1
                if rep is None:
                    errors.append(err)
                    continue
                if current is None or rep.rank_key[:2] < current.rank_key[:2]:
                    current, chosen, improved = rep, trial, True
    if current is None or not current.feasible:
        raise _infeasibility(current, errors)
    return MappingResult(current.mapping, current, (current,), evaluated)
