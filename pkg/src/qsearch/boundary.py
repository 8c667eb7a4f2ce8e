"""Boundary estimation in the plane as a sequence of 1D searches along strips.

Each transect of a :class:`~qsearch.regions.StripPlan` is searched with a 1D
strategy; the estimates are joined into a polyline. Travel is charged in
meters: in-strip legs are the unit-interval distance times the transect
length, and the leg between strips is the straight line from the last sample
of one strip to the first sample of the next.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, EstimationError
from .montecarlo import StrategySpec, run_strategy
from .oracle import RegionRaster, TransectOracle, scan_change_point, validate_single_crossing
from .posterior import PosteriorGrid
from .regions import StripPlan
from .theory import CostModel, optimize_m

IMPROVEMENTS = ("none", "I1", "I1+I2.1", "I1+I2.2")
_MISSION_STREAM = 7


@dataclass(frozen=True)
class MissionParams:
    """Strategy parameters for a mission.

    ``lipschitz`` sizes the I-2 priors: a number, a ``{group: value}`` mapping,
    or ``None`` to estimate it from the region's ground truth.
    """

    m: float = 2.0
    lam: float = 0.0
    p: float = 0.0
    p_update: float | None = None
    epsilon: float = 1e-3
    delta: float = 1e-3
    stop_mass: float = 0.9
    lipschitz: float | dict | None = None
    prior_ratio: float = 100.0


@dataclass
class StripResult:
    index: int
    theta_hat: float
    samples: int
    distance_units: float
    strip_distance_m: float
    approach_m: float
    converged: bool
    crossings: int
    theta_true: float
    first_sample: float
    last_sample: float


@dataclass
class BoundaryEstimate:
    """Per-strip estimates in traversal order plus mission totals."""

    per_strip: list[StripResult]
    polyline: list[tuple[float, float]]
    total_time_s: float
    total_distance_m: float
    total_samples: int

    def theta_by_index(self) -> dict[int, float]:
        return {s.index: s.theta_hat for s in self.per_strip}


@dataclass
class MissionReport:
    strategy: str
    improvements: str
    m: float
    lam: float
    p: float
    gamma: float
    velocity: float
    total_time_s: float
    total_time_days: float
    total_distance_m: float
    total_samples: int
    mean_abs_error: float
    max_abs_error: float
    lipschitz: dict = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def estimate_lipschitz(xs: Sequence[float], fs: Sequence[float], W: float, delta_frac: float = 0.1) -> float:
    """Largest finite-difference slope ``|f(x_i) - f(x_i + d)| / d`` with
    ``d = delta_frac * W``; ``f`` between samples is linearly interpolated."""
    x = np.asarray(xs, dtype=float)
    f = np.asarray(fs, dtype=float)
    if x.shape != f.shape or x.size < 2:
        raise EstimationError("need at least two boundary samples")
    order = np.argsort(x)
    x, f = x[order], f[order]
    d = delta_frac * W
    if not d > 0:
        raise EstimationError("finite-difference step must be positive")
    ok = x + d <= x[-1] + 1e-9 * max(1.0, abs(x[-1]))
    if not ok.any():
        raise EstimationError("samples do not span one finite-difference step")
    shifted = np.interp(x[ok] + d, x, f)
    return float(np.max(np.abs(f[ok] - shifted)) / d)


def ground_truth_profile(region: RegionRaster, plan: StripPlan, group: str, step: float) -> tuple[np.ndarray, np.ndarray]:
    """Boundary position (meters along the strip) on a dense set of parallel
    transects spanning the given group, spaced ``step`` apart."""
    ks = [k for k in range(plan.K) if plan.groups[k] == group]
    (s0, e0), (s1, e1) = plan.transects[ks[0]], plan.transects[ks[-1]]
    n = max(2, int(math.ceil(math.dist(s0, s1) / step)) + 1)
    xs, fs = [], []
    for t in np.linspace(0.0, 1.0, n):
        start = (s0[0] + t * (s1[0] - s0[0]), s0[1] + t * (s1[1] - s0[1]))
        end = (e0[0] + t * (e1[0] - e0[0]), e0[1] + t * (e1[1] - e0[1]))
        oracle = TransectOracle.oriented(region, start, end)
        xs.append(t * math.dist(s0, s1))
        fs.append(scan_change_point(oracle) * oracle.length)
    return np.array(xs), np.array(fs)


def _lipschitz_by_group(region, plan, params: MissionParams) -> dict[str, float]:
    groups = sorted(set(plan.groups))
    if isinstance(params.lipschitz, (int, float)):
        return {g: float(params.lipschitz) for g in groups}
    if isinstance(params.lipschitz, dict):
        missing = [g for g in groups if g not in params.lipschitz]
        if missing:
            raise ConfigurationError(f"no Lipschitz constant for groups {missing}")
        return {g: float(params.lipschitz[g]) for g in groups}
    out = {}
    for g in groups:
        if sum(1 for x in plan.groups if x == g) < 2:
            out[g] = 1.0
            continue
        xs, fs = ground_truth_profile(region, plan, g, 0.05 * plan.spacing)
        out[g] = estimate_lipschitz(xs, fs, plan.spacing)
    return out


def make_prior(kind: str, theta_prev: float, halfwidth: float, delta: float, ratio: float = 100.0) -> PosteriorGrid:
    """I-2.1 (``piecewise``) or I-2.2 (``gaussian``) prior centered at the
    previous estimate; the window is never narrower than one bin."""
    hw = max(halfwidth, delta)
    if kind == "piecewise":
        return PosteriorGrid.piecewise_uniform(delta, theta_prev, hw, ratio)
    if kind == "gaussian":
        return PosteriorGrid.gaussian(delta, theta_prev, hw)
    raise ConfigurationError(f"unknown prior kind {kind!r}")


def piecewise_linear(per_strip_estimates: Sequence[float], plan: StripPlan) -> list[tuple[float, float]]:
    """Polyline through ``plan.point(k, theta_k)`` in traversal order.

    ``per_strip_estimates`` is indexed by transect.
    """
    if len(per_strip_estimates) != plan.K:
        raise ConfigurationError("need one estimate per strip")
    return [plan.point(k, float(per_strip_estimates[k])) for k in plan.traversal_order]


def _strategy_spec(strategy: str, params: MissionParams) -> StrategySpec:
    if strategy == "dqs" and params.p > 0:
        raise ConfigurationError("dqs is a noiseless strategy; use pqs or tpqs when p > 0")
    m = 2.0 if strategy == "bisection" else params.m
    return StrategySpec(strategy, m=m, lam=params.lam, p=params.p, p_update=params.p_update,
                        epsilon=params.epsilon, delta=params.delta, stop_mass=params.stop_mass)


def run_mission(
    region: RegionRaster,
    plan: StripPlan,
    strategy: str,
    params: MissionParams,
    improvements: str,
    cost: CostModel,
    seed: int = 0,
) -> tuple[BoundaryEstimate, MissionReport]:
    """Search every strip in traversal order and total time and distance.

    The first strip of each group starts at its transect origin, with the
    approach counted. Later strips in a group use the previous estimate as
    the first sample (I-1) and, for posterior-based strategies, a prior of
    half-width ``L * W`` around it (I-2.1 / I-2.2).
    """
    if improvements not in IMPROVEMENTS:
        raise ConfigurationError(f"improvements must be one of {IMPROVEMENTS}")
    spec = _strategy_spec(strategy, params)
    resolved = spec.resolved().name
    use_prior = improvements in ("I1+I2.1", "I1+I2.2") and resolved != "dqs"
    flags: list[str] = []
    if improvements.startswith("I1+") and resolved == "dqs":
        flags.append("I-2 priors do not apply to the deterministic search; only I-1 used")
    lips = _lipschitz_by_group(region, plan, params) if use_prior else {}

    results: list[StripResult] = []
    prev_group = None
    prev_theta = None
    prev_point = None
    for j, k in enumerate(plan.traversal_order):
        group = plan.groups[k]
        ss = np.random.SeedSequence(int(seed), spawn_key=(_MISSION_STREAM, k))
        oracle = TransectOracle.oriented(region, *plan.transects[k], p=params.p, rng_seed=ss)
        length = oracle.length
        chained = improvements != "none" and group == prev_group and prev_theta is not None
        first = prev_theta if chained else None
        prior = None
        if chained and use_prior:
            kind = "piecewise" if improvements == "I1+I2.1" else "gaussian"
            prior = make_prior(kind, prev_theta, lips[group] * plan.spacing / length, params.delta,
                               params.prior_ratio)
        first_strip = j == 0
        tr = run_strategy(spec, oracle, prior, start=0.0, first_sample=first, count_approach=first_strip)
        x1 = float(tr.locations[0])
        if first_strip:
            approach = tr.legs()[0] * length
        else:
            approach = math.dist(prev_point, plan.point(k, x1))
        crossings = validate_single_crossing(oracle)
        truth = scan_change_point(oracle)
        if crossings != 1:
            flags.append(f"strip {k}: {crossings} label changes along the transect")
        if not tr.converged:
            flags.append(f"strip {k}: stopped at the step cap without converging")
        in_strip = (tr.distance * length) - (approach if first_strip else 0.0)
        results.append(StripResult(
            index=k, theta_hat=float(tr.estimate), samples=tr.n, distance_units=float(tr.distance),
            strip_distance_m=float(in_strip), approach_m=float(approach), converged=bool(tr.converged),
            crossings=crossings, theta_true=float(truth), first_sample=x1,
            last_sample=float(tr.locations[-1]),
        ))
        prev_group, prev_theta = group, float(tr.estimate)
        prev_point = plan.point(k, float(tr.locations[-1]))

    total_samples = sum(r.samples for r in results)
    total_m = sum(r.strip_distance_m + r.approach_m for r in results)
    total_time = cost.gamma * total_samples + total_m / cost.velocity
    thetas = [0.0] * plan.K
    for r in results:
        thetas[r.index] = r.theta_hat
    est = BoundaryEstimate(results, piecewise_linear(thetas, plan), total_time, total_m, total_samples)
    mean_e, max_e = _errors(results)
    report = MissionReport(
        strategy=strategy, improvements=improvements, m=spec.resolved().m, lam=params.lam, p=params.p,
        gamma=cost.gamma, velocity=cost.velocity, total_time_s=total_time,
        total_time_days=total_time / 86400.0, total_distance_m=total_m, total_samples=total_samples,
        mean_abs_error=mean_e, max_abs_error=max_e, lipschitz=lips, flags=flags,
    )
    return est, report


def _errors(results: Sequence[StripResult]) -> tuple[float, float]:
    e = [abs(r.theta_hat - r.theta_true) for r in results if r.crossings == 1]
    if not e:
        return math.nan, math.nan
    return float(np.mean(e)), float(np.max(e))


def boundary_error(estimate: BoundaryEstimate, region: RegionRaster, plan: StripPlan) -> tuple[float, float]:
    """Mean and max ``|theta_hat - theta|`` over strips with exactly one
    crossing, with the truth from a dense raster scan of each transect."""
    theta = estimate.theta_by_index()
    errs = []
    for k in range(plan.K):
        oracle = TransectOracle.oriented(region, *plan.transects[k])
        if validate_single_crossing(oracle) != 1 or k not in theta:
            continue
        errs.append(abs(theta[k] - scan_change_point(oracle)))
    if not errs:
        raise EstimationError("no strip with a single crossing")
    return float(np.mean(errs)), float(np.max(errs))


def mission_m(cost_per_strip: CostModel, epsilon: float, m_grid: Sequence[float] = tuple(range(2, 101))) -> float:
    """Quantile parameter chosen by the closed-form optimizer for one strip."""
    return optimize_m(cost_per_strip, epsilon, 0.0, "closed_form", m_grid)[0]


def write_outputs(outdir: str | Path, estimate: BoundaryEstimate, report: MissionReport) -> None:
    """Write ``boundary.csv``, ``polyline.csv`` and ``report.json``."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    rows = ["strip,theta_hat,samples,distance,distance_m,theta_true,crossings,converged"]
    for r in sorted(estimate.per_strip, key=lambda r: r.index):
        rows.append(f"{r.index},{r.theta_hat!r},{r.samples},{r.distance_units!r},"
                    f"{r.strip_distance_m + r.approach_m!r},{r.theta_true!r},{r.crossings},{int(r.converged)}")
    (out / "boundary.csv").write_text("\n".join(rows) + "\n")
    poly = ["x,y"] + [f"{x!r},{y!r}" for x, y in estimate.polyline]
    (out / "polyline.csv").write_text("\n".join(poly) + "\n")
    (out / "report.json").write_text(report.to_json() + "\n")
