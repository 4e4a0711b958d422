"""Command-line entry point: ``deliberank rank|compare|simulate``.

Exit codes: 0 success, 1 data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from .baseline import RandomPolicy, derive_seed
from .holistic import HolisticMethod
from .integrated import APPROVAL_COUNT, IntegratedConfig
from .io import DataError, Dataset, dumps_json, load_dataset_dir, load_integrated_config, load_scenario
from .methods import METHODS, MethodSpec
from .metrics import (
    Geometric,
    TopK,
    attention_gini,
    attention_weights,
    coverage_at_k,
    first_hit_positions,
    proportionality_deviation,
)
from .model import SortContext, TieBreak
from .simulator import experiment_feedback_loop, experiment_timing, run_simulation


def _add_method_options(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tiebreak", choices=[t.value for t in TieBreak], default="id")
    p.add_argument("--random-policy", choices=[r.value for r in RandomPolicy], default="per-view")
    p.add_argument("--session-key")
    p.add_argument("--viewer")
    p.add_argument("--now", type=float, help="epoch seconds; defaults to the wall clock")
    p.add_argument("--oldest-first", action="store_true", help="date: oldest proposals first")
    p.add_argument("--lowest-first", action="store_true", help="cost: cheapest proposals first")
    p.add_argument("--prior-approvals", type=float, default=1.0)
    p.add_argument("--prior-total", type=float, default=2.0)
    p.add_argument("--window", type=float, default=3 * 86400.0, help="active: window in seconds")
    p.add_argument("--no-reset", action="store_true", help="coverage: no layered reset")
    p.add_argument("--config", type=Path, help="integrated: TOML file with IntegratedConfig keys")
    p.add_argument("--min-views", type=int)
    p.add_argument("--base", choices=[APPROVAL_COUNT] + [m.value for m in HolisticMethod])
    p.add_argument("--out", type=Path)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deliberank", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    rank = sub.add_parser("rank", help="rank the proposals of a dataset")
    rank.add_argument("--method", required=True, choices=METHODS)
    rank.add_argument("--input-dir", required=True, type=Path)
    _add_method_options(rank)

    compare = sub.add_parser("compare", help="side-by-side prefixes and metrics of several methods")
    compare.add_argument("--methods", required=True, help="comma-separated method names")
    compare.add_argument("--k", type=int, default=5)
    compare.add_argument("--input-dir", required=True, type=Path)
    compare.add_argument("--attention", default="geometric:0.7", help="geometric:P or topk:K")
    _add_method_options(compare)

    simulate = sub.add_parser("simulate", help="run the attention simulator")
    simulate.add_argument("--scenario", required=True, type=Path)
    simulate.add_argument("--method", default="approvals", choices=METHODS)
    simulate.add_argument("--runs", type=int, default=1)
    simulate.add_argument("--experiment", choices=["none", "timing", "feedback"], default="none")
    _add_method_options(simulate)
    return parser


def _integrated_config(args, parser) -> IntegratedConfig:
    cfg = load_integrated_config(args.config) if args.config else IntegratedConfig()
    changes = {}
    if args.min_views is not None:
        changes["min_views"] = args.min_views
    if args.base is not None:
        changes["base"] = args.base
    if changes:
        fields = {k: getattr(cfg, k) for k in cfg.__dataclass_fields__}
        fields.update(changes)
        try:
            cfg = IntegratedConfig(**fields)
        except ValueError as exc:
            parser.error(str(exc))
    return cfg


def _method_spec(name, args, parser) -> MethodSpec:
    if name not in METHODS:
        parser.error(f"unknown method {name!r}; valid methods: {', '.join(METHODS)}")
    if name == "random" and args.random_policy == "per-session" and not args.session_key:
        parser.error("--random-policy per-session requires --session-key")
    if args.prior_total <= 0 or not 0 <= args.prior_approvals <= args.prior_total:
        parser.error("priors must satisfy 0 <= --prior-approvals <= --prior-total and --prior-total > 0")
    if args.window <= 0:
        parser.error("--window must be positive")
    return MethodSpec(
        name=name,
        tiebreak=TieBreak(args.tiebreak),
        newest_first=not args.oldest_first,
        highest_first=not args.lowest_first,
        prior_approvals=args.prior_approvals,
        prior_total=args.prior_total,
        window=args.window,
        random_policy=RandomPolicy(args.random_policy),
        reset_on_saturation=not args.no_reset,
        integrated=_integrated_config(args, parser) if name == "integrated" else IntegratedConfig(),
    )


def _context(args) -> SortContext:
    now = args.now if args.now is not None else float(int(time.time()))
    return SortContext(now=now, seed=args.seed, session_key=args.session_key, viewer=args.viewer)


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _rank(spec: MethodSpec, data: Dataset, ctx: SortContext):
    return spec.rank(data.proposals, data.profile(), data.events, data.inspections, ctx)


def cmd_rank(args, parser) -> int:
    spec = _method_spec(args.method, args, parser)
    data = load_dataset_dir(args.input_dir)
    ranked = _rank(spec, data, _context(args))
    _emit(dumps_json(ranked.to_dict()), args.out)
    return 0


def _parse_attention(text: str, parser):
    kind, _, value = text.partition(":")
    try:
        if kind == "geometric":
            return Geometric(float(value or 0.7))
        if kind == "topk":
            return TopK(int(value or 10))
    except ValueError as exc:
        parser.error(f"--attention: {exc}")
    parser.error("--attention must look like geometric:0.7 or topk:10")


def _percentiles(values):
    if not values:
        return None
    arr = np.asarray(values)
    return {
        f"p{q}": int(np.percentile(arr, q, method="inverted_cdf")) for q in (50, 90, 100)
    }


def cmd_compare(args, parser) -> int:
    names = [m.strip() for m in args.methods.split(",") if m.strip()]
    if not names:
        parser.error("--methods needs at least one method")
    specs = [_method_spec(n, args, parser) for n in names]
    attention = _parse_attention(args.attention, parser)
    data = load_dataset_dir(args.input_dir)
    n = len(data.proposals)
    if args.k < 1 or (n and args.k > n):
        parser.error(f"--k must lie in [1, {n}]")
    profile = data.profile()
    ctx = _context(args)
    report = {
        "k": args.k,
        "n_proposals": n,
        "n_users": len(profile.users),
        "attention": {"model": type(attention).__name__, **attention.__dict__},
        "methods": {},
    }
    for spec in specs:
        ranked = _rank(spec, data, ctx)
        entry = {"prefix": list(ranked.order[: args.k])}
        if n == 0:
            entry.update(coverage_at_k=None, first_hit=None, proportionality_deviation=None, attention_gini=None)
        else:
            hits = first_hit_positions(profile, ranked.order)
            try:
                deviation = proportionality_deviation(profile, ranked.order, args.k)
            except ValueError:
                deviation = None
            entry.update(
                coverage_at_k=coverage_at_k(profile, ranked.order, args.k),
                first_hit=_percentiles([h for h in hits.values() if h is not None]),
                proportionality_deviation=deviation,
                attention_gini=attention_gini(attention_weights(n, attention)),
            )
        report["methods"][spec.name] = entry
    _emit(dumps_json(report), args.out)
    return 0


def cmd_simulate(args, parser) -> int:
    scenario = load_scenario(args.scenario)
    if args.runs < 1:
        parser.error("--runs must be positive")
    if args.experiment == "feedback":
        result = experiment_feedback_loop(scenario, args.seed, args.runs, _integrated_config(args, parser))
        _emit(dumps_json({"experiment": "feedback", **result.to_dict()}), args.out)
        return 0
    spec = _method_spec(args.method, args, parser)
    if args.experiment == "timing":
        try:
            result = experiment_timing(scenario, spec, args.seed, args.runs)
        except ValueError as exc:
            raise DataError(str(exc), args.scenario) from exc
        _emit(dumps_json({"experiment": "timing", **result.to_dict()}), args.out)
        return 0
    if args.runs == 1:
        payload = run_simulation(scenario, spec, args.seed).to_dict()
    else:
        seeds = [derive_seed("run", args.seed, i) for i in range(args.runs)]
        payload = [run_simulation(scenario, spec, s).to_dict() for s in seeds]
    _emit(dumps_json(payload), args.out)
    return 0


COMMANDS = {"rank": cmd_rank, "compare": cmd_compare, "simulate": cmd_simulate}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args, parser)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
