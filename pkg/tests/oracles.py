"""Independent reference computations used by the tests.

Nothing here calls the code path it checks: transforms are evaluated from
their defining sums, schedules are re-simulated from scratch, and mapping
optima are found by a separate enumeration.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


# -- transforms -------------------------------------------------------------

def dft_matrix(n: int) -> np.ndarray:
    """W[k, m] = exp(-2j*pi*k*m/n), with k*m reduced mod n for accuracy."""
    km = np.outer(np.arange(n), np.arange(n)) % n
    return np.exp(-2j * np.pi * km / n)


def naive_dft(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    n = x.size
    return np.array([sum(x[m] * np.exp(-2j * np.pi * ((k * m) % n) / n) for m in range(n))
                     for k in range(n)])


def naive_idft(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.complex128)
    n = X.size
    return np.array([sum(X[k] * np.exp(2j * np.pi * ((k * m) % n) / n) for k in range(n)) / n
                     for m in range(n)])


def dct2_matrix(n: int) -> np.ndarray:
    """C[k, m] = cos(pi*(m + 1/2)*k/n) = cos(pi*((2m+1)k mod 4n)/(2n))."""
    arg = (np.outer(np.arange(n), 2 * np.arange(n) + 1)) % (4 * n)
    return np.cos(np.pi * arg / (2 * n))


def naive_dct2(x) -> np.ndarray:
    n = len(x)
    return np.array([sum(x[m] * math.cos(math.pi * (m + 0.5) * k / n) for m in range(n))
                     for k in range(n)])


def dht_matrix(n: int) -> np.ndarray:
    theta = 2 * np.pi * (np.outer(np.arange(n), np.arange(n)) % n) / n
    return np.cos(theta) + np.sin(theta)


def naive_dht(x) -> np.ndarray:
    n = len(x)
    return np.array([sum(x[m] * (math.cos(2 * math.pi * m * k / n) + math.sin(2 * math.pi * m * k / n))
                         for m in range(n)) for k in range(n)])


def _rows(kind: str, n: int, lo: int, hi: int) -> np.ndarray:
    k = np.arange(lo, hi)[:, None]
    m = np.arange(n)[None, :]
    if kind == "dft":
        return np.exp(-2j * np.pi * ((k * m) % n) / n)
    if kind == "idft":
        return np.exp(2j * np.pi * ((k * m) % n) / n) / n
    if kind == "dct2":
        return np.cos(np.pi * ((k * (2 * m + 1)) % (4 * n)) / (2 * n))
    if kind == "dht":
        theta = 2 * np.pi * ((k * m) % n) / n
        return np.cos(theta) + np.sin(theta)
    raise ValueError(kind)


def reference_transform(kind: str, X: np.ndarray, block: int = 512) -> np.ndarray:
    """Apply the defining O(N^2) sum to every column of ``X``, one row block at a time."""
    n = X.shape[0]
    out = np.empty(X.shape, dtype=np.complex128)
    for lo in range(0, n, block):
        hi = min(n, lo + block)
        out[lo:hi] = _rows(kind, n, lo, hi) @ X
    return out


# -- scheduling -------------------------------------------------------------

def topological_orders(task_ids, deps):
    """All linear extensions of the precedence relation ``deps`` (pairs)."""
    preds = {t: {s for s, d in deps if d == t} for t in task_ids}
    for perm in itertools.permutations(task_ids):
        pos = {t: i for i, t in enumerate(perm)}
        if all(pos[s] < pos[d] for s, d in deps):
            yield perm


def simulate_order(tasks, transfers, order):
    """Makespan of dispatching tasks in ``order``.

    tasks: {id: (pe, duration)}; transfers: list of (edge, src, dst, [(link, dur), ...]).
    A task starts when its PE is free and all inputs have arrived; input
    transfers are queued on their links when the task is dispatched, earliest
    producer first.
    """
    finish, pe_free, link_free = {}, {}, {}
    for tid in order:
        pe, dur = tasks[tid]
        arrivals = [0.0]
        inputs = sorted((t for t in transfers if t[2] == tid), key=lambda t: (finish[t[1]], t[0], t[1]))
        for edge, src, _, legs in inputs:
            t = finish[src]
            for link, ldur in legs:
                t = max(t, link_free.get(link, 0.0)) + ldur
                link_free[link] = t
            arrivals.append(t)
        start = max(max(arrivals), pe_free.get(pe, 0.0))
        finish[tid] = pe_free[pe] = start + dur
    return max(list(finish.values()) + list(link_free.values()), default=0.0)


def best_order_makespan(tasks, transfers):
    deps = {(src, dst) for _, src, dst, _ in transfers}
    return min(simulate_order(tasks, transfers, order)
               for order in topological_orders(sorted(tasks), deps))


# -- metrics ----------------------------------------------------------------

SAMPLE_BYTES = {"q15": 2, "q31": 4, "float32": 4, "cfloat32": 8}


def recount_comm_bytes(g, mapping, bsp) -> int:
    """Bytes of every edge whose endpoints sit on different PEs, by direct scan."""
    pe = {b.kernel: b.pe for b in mapping.bindings}
    flavor = {b.kernel: b.flavor for b in mapping.bindings}
    total = 0
    for e in g.edges:
        if pe[e.src] == pe[e.dst]:
            continue
        fmt = e.format
        if flavor[e.src] is not None:
            fmt = next(f for f in bsp.flavors if f.id == flavor[e.src]).output_format
        total += e.tokens * SAMPLE_BYTES[fmt.kind.value]
    return total


# -- mapping ----------------------------------------------------------------

def oracle_candidates(g, bsp):
    """Binding options derived straight from the compatibility definition."""
    out = {}
    for k in g.kernels:
        opts = []
        if k.nucleus is not None:
            for f in bsp.flavors:
                if f.nucleus == k.nucleus and k.size in set(f.sizes):
                    opts.append((f.pe, f.id))
        if k.nucleus is None or (not opts and k.fallback_load is not None):
            for pe in bsp.platform.pes:
                if pe.pe_class.value != "hwacc":
                    opts.append((pe.id, None))
        out[k.id] = opts
    return out


def oracle_glue(g, assignment, bsp):
    """Glue tasks by scanning edges; None if some mismatch has no conversion rule."""
    from nucleus_wde.model import GlueTask

    flavors = {f.id: f for f in bsp.flavors}
    glue = []
    for e in g.edges:
        src_pe, src_f = assignment[e.src]
        dst_pe, dst_f = assignment[e.dst]
        out_fmt = flavors[src_f].output_format if src_f else e.format
        in_fmt = flavors[dst_f].input_format if dst_f else e.format
        if out_fmt == in_fmt:
            continue
        gamma = bsp.platform.glue_cycles_per_sample(out_fmt.kind, in_fmt.kind)
        if gamma is None:
            return None
        glue.append(GlueTask(e.src, e.dst, out_fmt, in_fmt, dst_pe, max(1, math.ceil(gamma * e.tokens))))
    return glue


def oracle_optimum(g, bsp, evaluator):
    """(best feasible score, number of feasible mappings) by recursive enumeration."""
    from nucleus_wde.model import Binding, Mapping

    cands = oracle_candidates(g, bsp)
    ids = [k.id for k in g.kernels]
    best = math.inf
    feasible = 0

    def rec(i, assignment):
        nonlocal best, feasible
        if i == len(ids):
            glue = oracle_glue(g, assignment, bsp)
            if glue is None:
                return
            bindings = tuple(sorted((Binding(k, pe, f) for k, (pe, f) in assignment.items()),
                                    key=lambda b: b.kernel))
            try:
                rep = evaluator.evaluate(g, Mapping(bindings, tuple(glue)), bsp)
            except Exception as exc:  # unroutable
                if type(exc).__name__ != "UnroutableEdgeError":
                    raise
                return
            if rep.feasible:
                feasible += 1
                best = min(best, rep.score)
            return
        for opt in cands[ids[i]]:
            assignment[ids[i]] = opt
            rec(i + 1, assignment)
        del assignment[ids[i]]

    if all(cands.values()):
        rec(0, {})
    return best, feasible


# -- schedule validity ------------------------------------------------------

def schedule_violations(tg, schedule, eps=1e-15):
    """Every precedence or exclusivity breach in ``schedule`` for task graph ``tg``."""
    out = []
    by = {e.task: e for e in schedule.entries}
    if set(by) != {t.id for t in tg.tasks}:
        out.append("scheduled tasks differ from task graph")
        return out
    for t in tg.tasks:
        e = by[t.id]
        if e.pe != t.pe:
            out.append(f"{t.id} on {e.pe}, bound to {t.pe}")
        if abs((e.end_s - e.start_s) - t.duration_s) > eps * max(1.0, e.end_s):
            out.append(f"{t.id} has wrong duration")
        if not e.end_s > e.start_s:
            out.append(f"{t.id} has empty interval")
    for tr in tg.transfers:
        need = by[tr.src].end_s + sum(d for _, d in tr.legs)
        if by[tr.dst].start_s < need - eps * max(1.0, need):
            out.append(f"{tr.src}->{tr.dst} starts before its data arrives")

    def overlaps(items, what):
        items = sorted(items)
        for (s0, e0, a), (s1, e1, b) in zip(items, items[1:]):
            if s1 < e0 - eps * max(1.0, e0):
                out.append(f"{what}: {a} overlaps {b}")

    for pe in {e.pe for e in schedule.entries}:
        overlaps([(e.start_s, e.end_s, e.task) for e in schedule.entries if e.pe == pe], pe)
    for link in {e.link for e in schedule.link_entries}:
        overlaps([(e.start_s, e.end_s, e.edge) for e in schedule.link_entries if e.link == link], link)
    return out


def work_bound(tg):
    """Sum of every task and transfer duration: no list schedule can exceed it."""
    return sum(t.duration_s for t in tg.tasks) + sum(sum(d for _, d in tr.legs) for tr in tg.transfers)
