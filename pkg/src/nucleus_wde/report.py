"""Structured (JSON) exploration reports and their text rendering."""

from __future__ import annotations

import json
import math
from typing import Optional

from .evaluator import EvaluationReport, Weights
from .model import Bsp, WaveformGraph

SCHEMA_VERSION = 1


def _num(x: float) -> Optional[float]:
    return x if math.isfinite(x) else None


def _binding_rows(g: WaveformGraph, rep: EvaluationReport, bsp: Bsp) -> list[dict]:
    rows = []
    for k in g.kernels:
        b = rep.mapping.binding_map[k.id]
        if b.flavor is not None:
            f = bsp.flavor(b.flavor)
            rows.append({"kernel": k.id, "kind": "nucleus", "nucleus": k.nucleus,
                         "ni": f.ni_name, "flavor": f.id, "algorithm": f.algorithm,
                         "vendor": f.vendor, "pe": b.pe})
        else:
            kind = "fallback" if k.is_nucleus else "nonnucleus"
            rows.append({"kernel": k.id, "kind": kind, "nucleus": k.nucleus,
                         "ni": None, "flavor": None, "algorithm": None, "vendor": None, "pe": b.pe})
    return rows


def _candidate_row(rank: int, strategy: str, rep: EvaluationReport) -> dict:
    return {
        "rank": rank,
        "strategy": strategy,
        "score": rep.score,
        "feasible": rep.feasible,
        "makespan_s": rep.metrics.makespan_s,
        "binding": {b.kernel: b.target for b in rep.mapping.bindings},
    }


def build_report(g: WaveformGraph, bsp: Bsp, chosen: EvaluationReport, *, strategy: str,
                 weights: Weights, ranked: list[tuple[str, EvaluationReport]],
                 exploration: dict) -> dict:
    m = chosen.metrics
    return {
        "schema_version": SCHEMA_VERSION,
        "waveform": g.name,
        "bsp": bsp.platform.name,
        "strategy": strategy,
        "weights": list(weights.as_tuple()),
        "feasible": chosen.feasible,
        "score": chosen.score,
        "binding": _binding_rows(g, chosen, bsp),
        "glue": [
            {"edge": gt.edge_id, "task": gt.id, "from": str(gt.from_format), "to": str(gt.to_format),
             "placed_on": gt.placed_on, "cycles": gt.cycles}
            for gt in chosen.mapping.glue
        ],
        "schedule": {
            "makespan_s": chosen.schedule.makespan_s,
            "entries": [{"task": e.task, "pe": e.pe, "start_s": e.start_s, "end_s": e.end_s}
                        for e in chosen.schedule.entries],
            "link_entries": [{"edge": e.edge, "link": e.link, "start_s": e.start_s, "end_s": e.end_s}
                             for e in chosen.schedule.link_entries],
        },
        "metrics": {
            "makespan_s": m.makespan_s,
            "data_localization": m.data_localization,
            "comm_bytes": m.comm_bytes,
            "total_bytes": m.total_bytes,
            "comm_time_s": m.comm_time_s,
            "sync_count": m.sync_count,
            "utilization": dict(sorted(m.utilization.items())),
            "mean_utilization": m.mean_utilization,
            "energy_j": m.energy_j,
            "throughput_fps": _num(m.throughput_fps),
        },
        "constraints": [
            {"constraint": v.constraint, "satisfied": v.satisfied, "measured": _num(v.measured),
             "bound": v.bound, "unit": v.unit}
            for v in chosen.verdicts
        ],
        "ranked": [_candidate_row(i + 1, s, r) for i, (s, r) in enumerate(ranked)],
        "exploration": exploration,
    }


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def _us(x: float) -> str:
    return f"{x * 1e6:.3f}"


def _table(header: list[str], rows: list[list[str]], indent: str = "  ") -> list[str]:
    widths = [max(len(str(c)) for c in col) for col in zip(header, *rows)]
    fmt = indent + "  ".join(f"{{:<{w}}}" for w in widths)
    lines = [fmt.format(*header).rstrip(), indent + "  ".join("-" * w for w in widths)]
    lines += [fmt.format(*map(str, r)).rstrip() for r in rows]
    return lines


def timeline_rows(report: dict) -> list[dict]:
    """Schedule entries ordered by PE, then start time."""
    return sorted(report["schedule"]["entries"], key=lambda e: (e["pe"], e["start_s"], e["task"]))


def render_text(report: dict, width: int = 60) -> str:
    out = [
        f"waveform {report['waveform']} on bsp {report['bsp']} "
        f"(strategy {report['strategy']}, schema v{report['schema_version']})",
        f"score {report['score']:.6f}  feasible {'yes' if report['feasible'] else 'no'}",
        "",
        "binding:",
    ]
    out += _table(["kernel", "kind", "target", "pe"],
                  [[b["kernel"], b["kind"], f"{b['ni']} [{b['flavor']}]" if b["ni"] else "-", b["pe"]]
                   for b in report["binding"]])
    out += ["", "glue:"]
    if report["glue"]:
        out += _table(["edge", "from", "to", "pe", "cycles"],
                      [[gl["edge"], gl["from"], gl["to"], gl["placed_on"], gl["cycles"]]
                       for gl in report["glue"]])
    else:
        out.append("  (none)")

    rows = timeline_rows(report)
    out += ["", "schedule (us):"]
    out += _table(["task", "pe", "start", "end"],
                  [[e["task"], e["pe"], _us(e["start_s"]), _us(e["end_s"])] for e in rows])
    if report["schedule"]["link_entries"]:
        out += ["", "transfers (us):"]
        out += _table(["edge", "link", "start", "end"],
                      [[e["edge"], e["link"], _us(e["start_s"]), _us(e["end_s"])]
                       for e in sorted(report["schedule"]["link_entries"],
                                       key=lambda e: (e["link"], e["start_s"]))])

    makespan = report["schedule"]["makespan_s"]
    out += ["", f"timeline (makespan {_us(makespan)} us):"]
    for e in rows:
        if makespan > 0:
            a = int(round(e["start_s"] / makespan * width))
            b = max(int(round(e["end_s"] / makespan * width)), a + 1)
        else:
            a, b = 0, 1
        bar = "." * a + "#" * (b - a) + "." * max(width - b, 0)
        out.append(f"  {e['pe']:<8} |{bar}| {e['task']}")

    m = report["metrics"]
    out += ["", "metrics:"]
    out += [
        f"  data localization  {m['data_localization']:.4f}",
        f"  comm bytes         {m['comm_bytes']}",
        f"  comm time          {_us(m['comm_time_s'])} us",
        f"  sync count         {m['sync_count']}",
        f"  mean utilization   {m['mean_utilization']:.4f}",
        f"  energy             {m['energy_j']:.6g} J",
        f"  throughput         {m['throughput_fps']:.6g} fps" if m["throughput_fps"] is not None
        else "  throughput         unbounded",
    ]
    if report["constraints"]:
        out += ["", "constraints:"]
        out += _table(["constraint", "ok", "measured", "bound"],
                      [[v["constraint"], "yes" if v["satisfied"] else "NO",
                        f"{v['measured']:.6g} {v['unit']}" if v["measured"] is not None else "inf",
                        f"{v['bound']:.6g} {v['unit']}"] for v in report["constraints"]])
    if report["ranked"]:
        out += ["", "ranked candidates:"]
        out += _table(["rank", "strategy", "score", "feasible", "binding"],
                      [[r["rank"], r["strategy"], f"{r['score']:.6f}", "yes" if r["feasible"] else "no",
                        ", ".join(f"{k}={v}" for k, v in sorted(r["binding"].items()))]
                       for r in report["ranked"]])
    return "\n".join(out) + "\n"
