"""Command-line entry point: ``qsearch <subcommand>`` or ``python -m qsearch``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import theory as T
from .errors import QSearchError
from .experiments import ExperimentSpec, run_experiment


def _floats(text: str) -> tuple[float, ...]:
    """Comma list with optional ``a:b`` integer ranges, e.g. ``2:10,20,50``."""
    out: list[float] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            a, b = part.split(":")
            out.extend(float(v) for v in range(int(a), int(b) + 1))
        else:
            out.append(float(part))
    return tuple(out)


def _names(text: str) -> tuple[str, ...]:
    return tuple(s.strip() for s in text.split(",") if s.strip())


def _spec_from(args, kind: str, keys: Sequence[str]) -> ExperimentSpec:
    d = {"kind": kind}
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            d[k] = v
    if args.spec:
        d.update(json.loads(Path(args.spec).read_text()))
    d.setdefault("kind", kind)
    # no silent default seed: noisy specs without one are rejected
    d.setdefault("seed", None)
    return ExperimentSpec.from_dict(d)


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


# ------------------------------------------------------------------ theory
def cmd_theory(args) -> int:
    lines = ["m,n,p,dqs_expected_error,pqs_error_bound,dqs_expected_distance"]
    for m in args.m_grid:
        for n in args.n_grid:
            for p in args.p_grid:
                lines.append(f"{m!r},{int(n)},{p!r},{T.dqs_expected_error(m, int(n))!r},"
                             f"{T.pqs_error_bound(m, p, int(n))!r},{T.dqs_expected_distance(m)!r}")
    _emit("\n".join(lines) + "\n", args.output)
    return 0


# ------------------------------------------------------------------ sweeps
_SWEEP_KEYS = ("strategies", "n_theta", "replicates", "p", "seed", "m_grid", "lambda_grid", "epsilon",
               "delta", "n_samples", "gammas", "velocities", "strip_length", "output", "summary", "workers")


def cmd_sweep(args) -> int:
    spec = _spec_from(args, args.kind, _SWEEP_KEYS)
    res = run_experiment(spec)
    if not spec.output:
        sys.stdout.write(res.table.to_csv())
    return 0


def cmd_compare(args) -> int:
    spec = _spec_from(args, "compare_grid", _SWEEP_KEYS + ("p_values",))
    res = run_experiment(spec)
    if not spec.summary:
        sys.stdout.write(json.dumps(res.summary["grids"], indent=2, sort_keys=True) + "\n")
    return 0


# ------------------------------------------------------------------ single search
def cmd_search(args) -> int:
    from .montecarlo import StrategySpec, run_strategy
    from .oracle import StepOracle

    if args.p > 0 and args.seed is None:
        raise QSearchError("--seed is required when p > 0")
    spec = StrategySpec(args.strategy, m=args.m, lam=args.lam, p=args.p, epsilon=args.epsilon, delta=args.delta)
    tr = run_strategy(spec, StepOracle(args.theta, args.p, args.seed or 0))
    if args.output:
        tr.to_csv(args.output)
    print(json.dumps({"strategy": spec.label, "theta": args.theta, "estimate": tr.estimate,
                      "error": abs(tr.estimate - args.theta), "samples": tr.n, "distance": tr.distance,
                      "converged": tr.converged}, sort_keys=True))
    return 0


# ------------------------------------------------------------------ missions
def run_mission_config(cfg: dict) -> dict:
    """Run a mission described by a JSON-style dict and return the report.

    Keys: ``region`` (raster path) or ``region_spec`` (+ ``region_seed``);
    ``transects`` (list of ``[[x0, y0], [x1, y1]]``, with ``spacing``) or
    ``layout`` (``K``, ``fragment``, ``span``); ``strategy``; ``params``
    (``m`` may be ``"auto"``); ``improvements``; ``cost`` (``gamma``,
    ``velocity``); ``seed``; optional ``outdir``.
    """
    from .boundary import MissionParams, mission_m, run_mission, write_outputs
    from .oracle import RegionRaster
    from .regions import RegionSpec, StripPlan, auto_layout, make_synthetic_region

    known = {"region", "region_spec", "region_seed", "transects", "spacing", "traversal_order", "layout",
             "strategy", "params", "improvements", "cost", "seed", "outdir"}
    extra = set(cfg) - known
    if extra:
        raise QSearchError(f"unknown mission keys: {sorted(extra)}")
    if "region" in cfg:
        region = RegionRaster.load(cfg["region"])
        if "region_spec" in cfg:
            # the raster file carries no analytic parameters; regenerate them
            region.meta = make_synthetic_region(RegionSpec(**cfg["region_spec"]), cfg.get("region_seed", 0)).meta
    else:
        region = make_synthetic_region(RegionSpec(**cfg.get("region_spec", {})), cfg.get("region_seed", 0))
    if "transects" in cfg:
        plan = StripPlan.from_dict({"transects": cfg["transects"], "spacing": cfg["spacing"],
                                    "traversal_order": cfg.get("traversal_order")})
    else:
        plan = auto_layout(region, **cfg.get("layout", {}))
    params = dict(cfg.get("params", {}))
    cost_d = cfg.get("cost", {"gamma": 10.0, "velocity": 0.5})
    cost = T.CostModel(float(cost_d["gamma"]), float(cost_d["velocity"]), plan.length(0))
    if params.get("m") == "auto":
        params["m"] = mission_m(cost, params.get("epsilon", 1e-3))
    p = float(params.get("p", 0.0))
    if p > 0 and "seed" not in cfg:
        raise QSearchError("noisy missions need a seed")
    est, report = run_mission(region, plan, cfg.get("strategy", "dqs"), MissionParams(**params),
                              cfg.get("improvements", "none"), cost, int(cfg.get("seed", 0)))
    if cfg.get("outdir"):
        write_outputs(cfg["outdir"], est, report)
    return json.loads(report.to_json())


def cmd_mission(args) -> int:
    if args.config:
        cfg = json.loads(Path(args.config).read_text())
    else:
        cfg = {"layout": {"K": args.K}, "strategy": args.strategy, "improvements": args.improvements,
               "cost": {"gamma": args.gamma, "velocity": args.velocity},
               "params": {"m": args.m if args.m == "auto" else float(args.m), "p": args.p,
                          "epsilon": args.epsilon}}
        if args.region:
            cfg["region"] = args.region
        else:
            cfg["region_spec"] = {"shape": args.shape}
        if args.seed is not None:
            cfg["seed"] = args.seed
    if args.outdir:
        cfg["outdir"] = args.outdir
    report = run_mission_config(cfg)
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def cmd_region(args) -> int:
    from .regions import RegionSpec, make_synthetic_region

    spec = RegionSpec(shape=args.shape, ncols=args.ncols, nrows=args.nrows, cell_size=args.cell_size,
                      amplitude=args.amplitude)
    region = make_synthetic_region(spec, args.seed)
    region.save(args.output)
    print(f"wrote {args.output}: {region.nrows}x{region.ncols} cells of {region.cell_size:g} m")
    return 0


# ------------------------------------------------------------------ verify
def cmd_verify(args) -> int:
    from .verify import report_json, run_suite

    checks = run_suite(args.suite, seed=args.seed)
    text = report_json(checks, args.suite, args.seed)
    if args.output:
        Path(args.output).write_text(text)
    for c in checks:
        print(c.line(), file=sys.stderr)
    if not args.output:
        sys.stdout.write(text)
    return 0 if all(c.passed for c in checks) else 1


# ------------------------------------------------------------------ parser
def _add_sweep_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--strategies", type=_names)
    p.add_argument("--m-grid", dest="m_grid", type=_floats)
    p.add_argument("--lambda-grid", dest="lambda_grid", type=_floats)
    p.add_argument("--n-theta", dest="n_theta", type=int)
    p.add_argument("--replicates", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--n-samples", dest="n_samples", type=int)
    p.add_argument("--gammas", type=_floats)
    p.add_argument("--velocities", type=_floats)
    p.add_argument("--strip-length", dest="strip_length", type=float)
    p.add_argument("--output", help="CSV path (stdout when omitted)")
    p.add_argument("--summary", help="JSON summary path")
    p.add_argument("--workers", type=int)
    p.add_argument("--spec", help="JSON file whose fields override the flags")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qsearch", description="Travel-aware change point search experiments.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("theory", help="closed-form error, bound and distance tables as CSV")
    p.add_argument("--m-grid", dest="m_grid", type=_floats, default=(2.0, 3.0, 5.0, 10.0, 20.0))
    p.add_argument("--n-grid", dest="n_grid", type=_floats, default=(0.0, 5.0, 10.0, 20.0))
    p.add_argument("--p-grid", dest="p_grid", type=_floats, default=(0.0, 0.1))
    p.add_argument("--output")
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("sweep", help="Monte Carlo sweep over m or lambda")
    p.add_argument("--kind", default="sweep_m", choices=("sweep_m", "sweep_lambda", "error_curve", "distance_curve"))
    _add_sweep_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="quantile search vs proactive learning over a cost grid")
    _add_sweep_flags(p)
    p.add_argument("--p-values", dest="p_values", type=_floats)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("search", help="run one search and print or save its trace")
    p.add_argument("--strategy", default="dqs")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--m", type=float, default=2.0)
    p.add_argument("--lam", type=float, default=0.0)
    p.add_argument("--p", type=float, default=0.0)
    p.add_argument("--seed", type=int)
    p.add_argument("--epsilon", type=float, default=1e-4)
    p.add_argument("--delta", type=float, default=1e-3)
    p.add_argument("--output", help="trace CSV path")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("mission", help="strip-based boundary estimation mission")
    p.add_argument("--config", help="mission JSON")
    p.add_argument("--region", help="raster file")
    p.add_argument("--shape", default="smooth_blob")
    p.add_argument("--K", type=int, default=11)
    p.add_argument("--strategy", default="dqs")
    p.add_argument("--m", default="auto")
    p.add_argument("--p", type=float, default=0.0)
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--improvements", default="I1")
    p.add_argument("--gamma", type=float, default=10.0)
    p.add_argument("--velocity", type=float, default=0.5)
    p.add_argument("--seed", type=int)
    p.add_argument("--outdir")
    p.set_defaults(func=cmd_mission)

    p = sub.add_parser("region", help="synthetic region tools")
    rsub = p.add_subparsers(dest="region_command", required=True)
    g = rsub.add_parser("gen", help="write a synthetic raster")
    g.add_argument("--shape", default="smooth_blob", choices=("half_plane", "smooth_blob", "two_fragment"))
    g.add_argument("--ncols", type=int, default=800)
    g.add_argument("--nrows", type=int, default=400)
    g.add_argument("--cell-size", dest="cell_size", type=float, default=100.0)
    g.add_argument("--amplitude", type=float, default=0.08)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--output", required=True)
    g.set_defaults(func=cmd_region)

    p = sub.add_parser("verify", help="run a verification suite; nonzero exit on failure")
    p.add_argument("--suite", default="all", choices=("theory", "equivalence", "monotonicity", "all"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", help="JSON report path")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return int(args.func(args) or 0)
    except (QSearchError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
