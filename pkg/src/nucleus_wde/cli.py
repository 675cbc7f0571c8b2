"""Command-line driver: ``nucleus-wde validate | map | report``.

Exit codes: 0 success, 1 invalid input, 2 I/O or usage error, 3 no feasible
mapping, 4 enumeration bound exceeded.
"""

from __future__ import annotations

import argparse
import enum
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .evaluator import ConfigurationError, Evaluator, Weights
from .frontend import Severity, check_bsp, check_waveform
from .mapper import (
    DEFAULT_ENUMERATION_BOUND, DEFAULT_MOVE_BUDGET, EnumerationBoundExceeded,
    InfeasibleMapping, enumerate_candidates, map_exhaustive, map_greedy,
)
from .report import build_report, dumps, render_text

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_BOUND = 0, 1, 2, 3, 4


class Strategy(enum.Enum):
    EXHAUSTIVE = "exhaustive"
    GREEDY = "greedy"
    BOTH = "both"


@dataclass(frozen=True)
class ExplorationConfig:
    strategy: Strategy = Strategy.BOTH
    weights: Weights = Weights()
    move_budget: int = DEFAULT_MOVE_BUDGET
    enumeration_bound: int = DEFAULT_ENUMERATION_BOUND
    top_k: int = 1

    def __post_init__(self):
        if self.top_k < 1 or self.move_budget < 1 or self.enumeration_bound < 1:
            raise ConfigurationError("top-k, move budget and enumeration bound must be positive")


class _Usage(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise _Usage(f"cannot read {path}: {exc}") from None


def _load(wdl_path: str, bsp_path: str, quiet: bool, out=None):
    out = out or sys.stdout
    wdl_src, bsp_src = _read(wdl_path), _read(bsp_path)
    g, wdiags = check_waveform(wdl_src, wdl_path)
    bsp, bdiags = check_bsp(bsp_src, bsp_path)
    for d in wdiags + bdiags:
        if d.severity is Severity.ERROR or not quiet:
            print(d, file=out)
    return g, bsp


def cmd_validate(args) -> int:
    g, bsp = _load(args.wdl, args.bsp, args.quiet)
    if g is None or bsp is None:
        return EXIT_INVALID
    if not args.quiet:
        for kid, cands in enumerate_candidates(g, bsp).items():
            if not cands:
                print(f"{args.wdl}: warning: kernel '{kid}' has no compatible flavor in {args.bsp}")
        print(f"ok: {len(g.kernels)} kernels, {len(g.edges)} edges, "
              f"{len(bsp.platform.pes)} PEs, {len(bsp.flavors)} flavors")
    return EXIT_OK


def run_exploration(g, bsp, config: ExplorationConfig, log=None):
    """Run the configured strategies; returns (best report, ranked rows, exploration info)."""
    log = log or sys.stderr
    evaluator = Evaluator(config.weights)
    ranked = []
    info = {}
    results = []
    if config.strategy in (Strategy.EXHAUSTIVE, Strategy.BOTH):
        try:
            ex = map_exhaustive(g, bsp, evaluator, bound=config.enumeration_bound, top_k=config.top_k)
            info["exhaustive_evaluated"] = ex.evaluated
            ranked += [("exhaustive", r) for r in ex.ranked]
            results.append(ex.report)
        except EnumerationBoundExceeded as exc:
            if config.strategy is Strategy.EXHAUSTIVE:
                raise
            print(f"note: {exc}", file=log)
            info["exhaustive_skipped"] = exc.product
    if config.strategy in (Strategy.GREEDY, Strategy.BOTH):
        gr = map_greedy(g, bsp, evaluator, move_budget=config.move_budget)
        info["greedy_evaluated"] = gr.evaluated
        ranked.append(("greedy", gr.report))
        results.append(gr.report)
    best = min(results, key=lambda r: r.rank_key)
    ranked.sort(key=lambda sr: (sr[1].rank_key, sr[0]))
    return best, ranked, info


def cmd_map(args) -> int:
    try:
        weights = Weights.parse(args.weights) if args.weights else Weights()
        config = ExplorationConfig(Strategy(args.strategy), weights, args.move_budget,
                                   args.enumeration_bound, args.top_k)
    except ConfigurationError as exc:
        raise _Usage(str(exc)) from None
    g, bsp = _load(args.wdl, args.bsp, args.quiet, out=sys.stderr)
    if g is None or bsp is None:
        return EXIT_INVALID
    try:
        best, ranked, info = run_exploration(g, bsp, config)
    except InfeasibleMapping as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except EnumerationBoundExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BOUND
    report = build_report(g, bsp, best, strategy=config.strategy.value, weights=config.weights,
                          ranked=ranked, exploration=info)
    text = dumps(report)
    if args.out:
        try:
            Path(args.out).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise _Usage(f"cannot write {args.out}: {exc}") from None
        if not args.quiet:
            print(f"wrote {args.out}: score {best.score:.6f}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_report(args) -> int:
    path = Path(args.report)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise _Usage(f"cannot read {args.report}: {exc}") from None
    if args.format == "json":
        sys.stdout.buffer.write(raw)
        sys.stdout.flush()
        return EXIT_OK
    try:
        report = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        print(f"{args.report}: not a report: {exc}", file=sys.stderr)
        return EXIT_INVALID
    sys.stdout.write(render_text(report))
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nucleus-wde", description="Map nucleus-based waveforms onto a BSP.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check a waveform and a BSP file")
    p.add_argument("wdl")
    p.add_argument("bsp")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("map", help="map, schedule and evaluate; writes a JSON report")
    p.add_argument("wdl")
    p.add_argument("bsp")
    p.add_argument("--strategy", choices=[s.value for s in Strategy], default="both")
    p.add_argument("--weights", help="w_latency,w_comm,w_sync,w_util,w_energy (default 1,1,0.5,0.5,1)")
    p.add_argument("--top-k", type=int, default=1)
    p.add_argument("--move-budget", type=int, default=DEFAULT_MOVE_BUDGET)
    p.add_argument("--enumeration-bound", type=int, default=DEFAULT_ENUMERATION_BOUND)
    p.add_argument("--seed", type=int, default=None, help="reserved; all strategies are deterministic")
    p.add_argument("--out")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("report", help="render a stored report")
    p.add_argument("report")
    p.add_argument("--format", default="text")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "report" and args.format not in ("text", "json"):
        print(f"unknown report format '{args.format}' (expected text or json)", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except _Usage as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
