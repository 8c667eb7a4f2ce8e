"""Programmatic checks of the laws and orderings the strategies should obey.

Each ``check_*`` function runs one experiment and returns a :class:`Check`.
The ``verify`` suites call them at reduced sizes; the acceptance tests call
the same functions at full size.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels as K
from . import theory as T
from .deterministic import dqs
from .montecarlo import BatchResult, StrategySpec, simulate, theta_grid
from .oracle import StepOracle
from .posterior import PosteriorGrid
from .proactive import ProactiveConfig, proactive
from .probabilistic import ProbSearchConfig, pbs, pqs, tpqs

SUITES = ("theory", "equivalence", "monotonicity", "all")


@dataclass
class Check:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}"


def _f(x) -> float:
    return float(round(float(x), 12))


def default_alpha(p: float) -> float:
    """Update probability of the conservative variant: a tenth of the way
    from ``p`` to 1/2."""
    return p + (0.5 - p) / 10.0


# ---------------------------------------------------------------- theory laws
def check_error_law(m_values: Sequence[float] = (2, 3, 5, 10, 20), n: int = 20, n_theta: int = 1000) -> Check:
    """Mean DQS error after ``n`` samples against the closed form, within 3 SE."""
    rows, ok = [], True
    for m in m_values:
        r = simulate(StrategySpec("dqs", m=m, budget=n), n_theta=n_theta)
        mu, se = r.mean_se("error")
        th = T.dqs_expected_error(m, n)
        good = abs(mu - th) <= 3 * se
        ok &= good
        rows.append({"m": _f(m), "mean": _f(mu), "se": _f(se), "theory": _f(th), "pass": bool(good)})
    return Check(f"error law (n={n}, {n_theta} thetas)", bool(ok), {"rows": rows})


def check_distance_law(m_values: Sequence[float] = (2, 3, 5, 10, 20), epsilon: float = 1e-4,
                       n_theta: int = 1000) -> Check:
    """Mean DQS distance to convergence against ``m / (2m - 2)``.

    A run stopped at width ``2 epsilon`` is short of the infinite-horizon
    distance by at most the final width, so the tolerance is
    ``3 SE + 2 epsilon``. Also checks the leg-sum identity to 1e-12.
    """
    rows, ok = [], True
    for m in m_values:
        r = simulate(StrategySpec("dqs", m=m, epsilon=epsilon), n_theta=n_theta)
        mu, se = r.mean_se("distance")
        th = T.dqs_expected_distance(m)
        good = abs(mu - th) <= 3 * se + 2 * epsilon
        ok &= good
        rows.append({"m": _f(m), "mean": _f(mu), "se": _f(se), "theory": _f(th), "pass": bool(good)})
    legs = []
    for m in (2, 3, 10):
        s, n = 0.0, 1
        while True:
            term = T.dqs_expected_leg_distance(m, n)
            s += term
            if term < 1e-18:
                break
            n += 1
        good = abs(s - T.dqs_expected_distance(m)) <= 1e-12
        ok &= good
        legs.append({"m": m, "sum": _f(s), "pass": bool(good)})
    return Check(f"distance law (eps={epsilon:g}, {n_theta} thetas)", bool(ok), {"rows": rows, "leg_sums": legs})


def check_bound_dominance(m_values=(2, 3, 5, 10, 20), ns=range(0, 61, 5)) -> Check:
    bad = [(m, n) for m in m_values for n in ns if T.pqs_error_bound(m, 0.0, n) < T.dqs_expected_error(m, n)]
    return Check("noisy bound dominates noiseless error law", not bad, {"violations": bad})


# ---------------------------------------------------------------- orderings
def sweep(strategy: str, p: float, m_values: Sequence[float], n_theta: int, replicates: int,
          seed: int) -> dict[float, BatchResult]:
    return {m: simulate(StrategySpec(strategy, m=m, p=p), n_theta=n_theta, replicates=replicates, seed=seed)
            for m in m_values}


def _pair_tol(a: tuple[float, float], b: tuple[float, float]) -> float:
    return 3.0 * math.hypot(a[1], b[1])


def check_monotone(results: dict[float, BatchResult], label: str) -> Check:
    """Samples nondecreasing and distance nonincreasing in ``m`` for every
    adjacent pair, up to 3 standard errors of the difference."""
    ms = sorted(results)
    rows, ok = [], True
    for a, b in zip(ms, ms[1:]):
        sa, sb = results[a].mean_se("samples"), results[b].mean_se("samples")
        da, db = results[a].mean_se("distance"), results[b].mean_se("distance")
        good_s = sb[0] >= sa[0] - _pair_tol(sa, sb)
        good_d = db[0] <= da[0] + _pair_tol(da, db)
        ok &= good_s and good_d
        rows.append({"m": [_f(a), _f(b)], "samples": [_f(sa[0]), _f(sb[0])], "distance": [_f(da[0]), _f(db[0])],
                     "pass": bool(good_s and good_d)})
    return Check(f"monotone tradeoff in m: {label}", bool(ok), {"pairs": rows})


def check_dominance(pqs_res: dict[float, BatchResult], tpqs_res: dict[float, BatchResult]) -> Check:
    """TPQS mean samples and distance at most PQS's plus 3 standard errors."""
    rows, ok = [], True
    for m in sorted(pqs_res):
        ps, ts = pqs_res[m].mean_se("samples"), tpqs_res[m].mean_se("samples")
        pd, td = pqs_res[m].mean_se("distance"), tpqs_res[m].mean_se("distance")
        good = ts[0] <= ps[0] + _pair_tol(ps, ts) and td[0] <= pd[0] + _pair_tol(pd, td)
        ok &= good
        rows.append({"m": _f(m), "pqs": [_f(ps[0]), _f(pd[0])], "tpqs": [_f(ts[0]), _f(td[0])], "pass": bool(good)})
    return Check("truncated search dominates", bool(ok), {"rows": rows})


# ---------------------------------------------------------------- equivalences
def check_m2_identity(p: float = 0.1, n_theta: int = 20, seed: int = 0) -> Check:
    """PQS, TPQS and probabilistic bisection agree bitwise at ``m = 2``."""
    bad = []
    cfg = ProbSearchConfig(m=2.0, p=p)
    for i, th in enumerate(theta_grid(n_theta)):
        seq = np.random.SeedSequence(seed, spawn_key=(0, i, 0))
        a = pqs(StepOracle(th, p, seq), cfg)
        b = tpqs(StepOracle(th, p, seq), cfg)
        c = pbs(StepOracle(th, p, seq), p)
        same = all(np.array_equal(getattr(a, f), getattr(o, f))
                   for o in (b, c) for f in ("locations", "labels", "estimates"))
        if not same:
            bad.append(i)
    return Check("m=2 identity of PQS, TPQS and bisection", not bad, {"mismatched_thetas": bad})


def _prefix_gap(a: np.ndarray, b: np.ndarray) -> float:
    k = min(a.size, b.size)
    return float(np.max(np.abs(a[:k] - b[:k]))) if k else 0.0


def check_tpqs_noiseless(m_values: Sequence[float] = (2, 3, 5, 10, 20), n_theta: int = 100,
                         delta: float = 1e-3) -> Check:
    """With p = 0, TPQS locations follow DQS's within one bin width."""
    worst, bad = 0.0, []
    for m in m_values:
        for i, th in enumerate(theta_grid(n_theta)):
            d = dqs(StepOracle(th), m, 1e-4)
            t = tpqs(StepOracle(th), ProbSearchConfig(m=m, p=0.0, delta=delta))
            gap = _prefix_gap(d.locations, t.locations)
            worst = max(worst, gap)
            if gap > delta:
                bad.append([_f(m), i])
    return Check("noiseless TPQS follows DQS", not bad, {"worst_gap": _f(worst), "violations": bad})


def check_proactive_bisection(ps: Sequence[float] = (0.0, 0.1), n_theta: int = 100, seed: int = 0,
                              delta: float = 1e-3) -> Check:
    """Proactive learning with lam = 0 samples where probabilistic bisection does."""
    worst, bad = 0.0, []
    for p in ps:
        for i, th in enumerate(theta_grid(n_theta)):
            seq = np.random.SeedSequence(seed, spawn_key=(0, i, 0))
            a = pqs(StepOracle(th, p, seq), ProbSearchConfig(m=2.0, p=p, delta=delta))
            b = proactive(StepOracle(th, p, seq), ProactiveConfig(lam=0.0, p=p, delta=delta))
            gap = _prefix_gap(a.locations, b.locations)
            worst = max(worst, gap)
            if gap > delta:
                bad.append([p, i])
    return Check("proactive at lam=0 follows bisection", not bad, {"worst_gap": _f(worst), "violations": bad})


# ---------------------------------------------------------------- envelope
def check_envelope(m_values=(2, 5, 10), p_values=(0.05, 0.1, 0.2), ns=tuple(range(5, 51, 5)),
                   n_theta: int = 50, replicates: int = 40, seed: int = 0) -> Check:
    """Worst-case (over theta) mean error of the conservative-update PQS stays
    under the geometric bound."""
    rows, ok = [], True
    for m in m_values:
        for p in p_values:
            spec = StrategySpec("pqs", m=m, p=p, p_update=default_alpha(p), budget=max(ns))
            r = simulate(spec, n_theta=n_theta, replicates=replicates, seed=seed, checkpoints=ns)
            sup = r.errors_at.mean(axis=1).max(axis=0)
            bound = np.array([T.pqs_error_bound(m, p, n) for n in ns])
            good = bool(np.all(sup <= bound))
            ok &= good
            rows.append({"m": m, "p": p, "worst_ratio": _f((sup / bound).max()), "pass": good})
    return Check("error envelope of the conservative update", bool(ok), {"rows": rows})


# ---------------------------------------------------------------- posterior
def check_posterior(n_updates: int = 100_000, delta: float = 1e-3, seed: int = 0) -> Check:
    """Normalization under many updates, total probability, truncation and
    information maximizer."""
    rng = np.random.default_rng(seed)
    nb = round(1 / delta)
    detail: dict = {}
    g = PosteriorGrid.uniform(delta)
    edges, mass = g.edges, g.mass
    worst = 0.0
    # bin-aligned locations keep the segment count fixed
    locs = rng.integers(0, nb + 1, n_updates) / nb
    labels = rng.integers(0, 2, n_updates)
    ps = rng.uniform(0.01, 0.45, n_updates)
    for x, y, p in zip(locs, labels, ps):
        e2, m2, ok = K.bayes_update(edges, mass, float(x), int(y), float(p))
        if not ok:
            continue
        edges, mass = e2, m2
        worst = max(worst, abs(mass.sum() - 1.0))
    detail["normalization_error"] = worst
    norm_ok = worst <= 1e-9

    recon = 0.0
    med_shift = 0.0
    mi_gap = 0.0
    for trial in range(50):
        w = rng.gamma(0.5, size=nb)
        prior = PosteriorGrid.from_bin_weights(delta, w)
        x = float(rng.uniform())
        p = float(rng.uniform(0, 0.45))
        phi = prior.cdf(x)
        py0 = phi * (1 - p) + (1 - phi) * p
        mix = py0 * prior.update(x, 0, p).weights + (1 - py0) * prior.update(x, 1, p).weights
        recon = max(recon, float(np.abs(mix - prior.weights).max()))
        tg, _ = prior.truncate_tails(x)
        med_shift = max(med_shift, abs(tg.median() - prior.median()))
    for p in (0.0, 0.1, 0.3):
        for trial in range(10):
            prior = PosteriorGrid.from_bin_weights(delta, rng.gamma(0.5, size=nb))
            cand = np.arange(nb + 1) / nb
            mi = np.array([prior.mutual_information(c, p) for c in cand])
            best = cand[int(np.argmax(mi))]
            mi_gap = max(mi_gap, abs(best - prior.median()))
    detail.update(reconstruction_error=recon, median_shift=med_shift, mi_argmax_gap=mi_gap)
    ok = norm_ok and recon <= 1e-9 and med_shift <= delta and mi_gap <= delta
    return Check("posterior properties", bool(ok), {k: _f(v) for k, v in detail.items()})


# ---------------------------------------------------------------- optimizer
def check_optimizer_trend(gammas=(1.0, 10.0, 30.0, 60.0), velocities=(4.0, 2.0, 1.0, 0.5),
                          strip_length: float = 40_000.0, epsilon: float = 1e-4) -> Check:
    """With gamma fixed, the optimal m never decreases as velocity drops."""
    rows, ok = [], True
    for g in gammas:
        ms = [T.optimize_m(T.CostModel(g, v, strip_length), epsilon)[0] for v in velocities]
        good = all(b >= a for a, b in zip(ms, ms[1:]))
        ok &= good
        rows.append({"gamma": g, "m_star": ms, "pass": good})
    return Check("optimal m grows as travel slows", bool(ok), {"rows": rows})


# ---------------------------------------------------------------- missions
def check_mission_ordering(seed: int = 0, K_strips: int = 11, gamma: float = 10.0, velocity: float = 0.5,
                           factor: float = 0.8) -> Check:
    from .boundary import MissionParams, mission_m, run_mission
    from .regions import RegionSpec, auto_layout, make_synthetic_region

    region = make_synthetic_region(RegionSpec("smooth_blob"), seed=seed)
    plan = auto_layout(region, K_strips)
    cost = T.CostModel(gamma, velocity, plan.length(0))
    m = mission_m(cost, 1e-3)
    t_dqs = run_mission(region, plan, "dqs", MissionParams(m=m), "I1", cost, seed)[1].total_time_s
    t_b1 = run_mission(region, plan, "bisection", MissionParams(), "I1", cost, seed)[1].total_time_s
    t_b0 = run_mission(region, plan, "bisection", MissionParams(), "none", cost, seed)[1].total_time_s
    ok = t_dqs < t_b1 < t_b0 and t_dqs <= factor * t_b1
    return Check("mission time ordering", bool(ok),
                 {"m": m, "dqs_I1": _f(t_dqs), "bisection_I1": _f(t_b1), "bisection": _f(t_b0),
                  "ratio": _f(t_dqs / t_b1)})


def check_mission_accuracy(seed: int = 0, K_strips: int = 11, epsilon: float = 1e-3) -> Check:
    from .boundary import MissionParams, run_mission
    from .regions import RegionSpec, auto_layout, make_synthetic_region

    region = make_synthetic_region(RegionSpec("smooth_blob"), seed=seed)
    plan = auto_layout(region, K_strips)
    cost = T.CostModel(10.0, 0.5, plan.length(0))
    est, rep = run_mission(region, plan, "dqs", MissionParams(m=2.0, epsilon=epsilon), "none", cost, seed)
    cell = region.cell_size / plan.length(0)
    singles = [s for s in est.per_strip if s.crossings == 1]
    worst = max(abs(s.theta_hat - s.theta_true) for s in singles)
    return Check("noiseless mission accuracy", bool(singles) and worst <= epsilon + cell,
                 {"max_abs_error": _f(worst), "tolerance": _f(epsilon + cell), "strips": len(singles)})


# ---------------------------------------------------------------- comparison grid
def check_compare_grid(**kw) -> Check:
    from .experiments import ExperimentSpec, run_experiment

    spec = ExperimentSpec(kind="compare_grid", **kw)
    res = run_experiment(spec)
    ok = True
    detail = {}
    for p, grid in res.summary["grids"].items():
        cell = next(c for c in grid["cells"] if c["gamma"] == 10.0 and c["velocity"] == 0.5)
        good = cell["quantile_time_s"] < cell["proactive_time_s"]
        ok &= good
        detail[p] = {"quantile": cell["quantile_time_s"], "proactive": cell["proactive_time_s"],
                     "contour_points": len(grid["contour"]), "pass": good}
    return Check("quantile search beats proactive at 10 s / 0.5 m/s", bool(ok), detail)


# ---------------------------------------------------------------- suites
def run_suite(suite: str = "all", seed: int = 0) -> list[Check]:
    """Reduced-size checks. Sizes: error/distance laws on 200 thetas;
    equivalences on 30 thetas; noisy sweeps on 20 thetas x 10 replicates."""
    if suite not in SUITES:
        raise ValueError(f"suite must be one of {SUITES}")
    checks: list[Check] = []
    if suite in ("theory", "all"):
        checks += [check_error_law(n_theta=200), check_distance_law(n_theta=200), check_bound_dominance(),
                   check_optimizer_trend()]
    if suite in ("equivalence", "all"):
        checks += [check_m2_identity(n_theta=30, seed=seed), check_tpqs_noiseless(n_theta=30),
                   check_proactive_bisection(n_theta=30, seed=seed)]
    if suite in ("monotonicity", "all"):
        dq = {m: simulate(StrategySpec("dqs", m=m), n_theta=200) for m in (2, 3, 5, 10, 20)}
        checks.append(check_monotone(dq, "dqs"))
        ms = (2, 5, 10, 20)
        pq = sweep("pqs", 0.1, ms, 20, 10, seed)
        tq = sweep("tpqs", 0.1, ms, 20, 10, seed)
        checks += [check_monotone(pq, "pqs p=0.1"), check_monotone(tq, "tpqs p=0.1"), check_dominance(pq, tq)]
    return checks


def report_json(checks: list[Check], suite: str, seed: int) -> str:
    doc = {"suite": suite, "seed": seed, "passed": all(c.passed for c in checks),
           "checks": [asdict(c) for c in checks]}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"

