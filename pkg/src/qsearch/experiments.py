"""Experiment specifications, result tables and the runner behind the CLI.

Result CSVs start with the schema line ``# qsl-schema v1``; rows are sorted
by ``(strategy, parameter, scenario)`` and every float is written with
``repr`` so that equal inputs give byte-identical files.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np

from . import theory as T
from .errors import ConfigurationError
from .montecarlo import STRATEGIES, BatchResult, StrategySpec, simulate

SCHEMA = "# qsl-schema v1"
KINDS = ("sweep_m", "sweep_lambda", "error_curve", "distance_curve", "compare_grid", "mission", "verify")
SECONDS_PER_DAY = 86400.0


@dataclass
class ExperimentSpec:
    """Everything one experiment needs; unknown JSON keys are rejected."""

    kind: str
    strategies: tuple[str, ...] = ("dqs",)
    n_theta: int = 100
    replicates: int = 1
    p: float = 0.0
    seed: int | None = 0
    m_grid: tuple[float, ...] = (2, 3, 5, 10, 20)
    lambda_grid: tuple[float, ...] = tuple(i / 10 for i in range(11))
    epsilon: float = 1e-4
    delta: float = 1e-3
    n_samples: int = 20
    gammas: tuple[float, ...] = (10.0,)
    velocities: tuple[float, ...] = (0.5,)
    strip_length: float = 40_000.0
    p_values: tuple[float, ...] | None = None
    mission: dict | None = None
    suite: str = "all"
    output: str | None = None
    summary: str | None = None
    workers: int = 1

    def __post_init__(self):
        for name in ("strategies", "m_grid", "lambda_grid", "gammas", "velocities"):
            setattr(self, name, tuple(getattr(self, name)))
        if self.p_values is not None:
            self.p_values = tuple(self.p_values)
        self.validate()

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ExperimentSpec:
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ConfigurationError(f"unknown experiment fields: {sorted(extra)}")
        return cls(**d)

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ConfigurationError(f"kind must be one of {KINDS}, got {self.kind!r}")
        for name in ("strategies", "m_grid", "lambda_grid", "gammas", "velocities"):
            if not getattr(self, name):
                raise ConfigurationError(f"{name} must be nonempty")
        bad = [s for s in self.strategies if s not in STRATEGIES]
        if bad:
            raise ConfigurationError(f"unknown strategies {bad}")
        if min(self.m_grid) < 2:
            raise ConfigurationError("m values must be >= 2")
        if min(self.lambda_grid) < 0 or max(self.lambda_grid) > 1:
            raise ConfigurationError("lambda values must lie in [0, 1]")
        if self.n_theta < 1 or self.replicates < 1:
            raise ConfigurationError("n_theta and replicates must be >= 1")
        ps = self.p_values if self.p_values is not None else (self.p,)
        if any(not 0 <= p < 0.5 for p in ps):
            raise ConfigurationError("p must lie in [0, 0.5)")
        if any(p > 0 for p in ps) and self.seed is None:
            raise ConfigurationError("noisy experiments need a seed")
        if min(self.gammas) < 0 or min(self.velocities) <= 0 or self.strip_length <= 0:
            raise ConfigurationError("cost grid needs gamma >= 0, velocity > 0, strip_length > 0")
        if self.kind == "mission" and not self.mission:
            raise ConfigurationError("mission experiments need a mission config")


@dataclass
class ResultTable:
    """Rows keyed by ``(strategy, parameter, scenario)``."""

    columns: tuple[str, ...]
    rows: list[dict] = field(default_factory=list)

    def add(self, **row) -> None:
        self.rows.append(row)

    def sorted_rows(self) -> list[dict]:
        return sorted(self.rows, key=lambda r: (str(r["strategy"]), float(r["parameter"]), str(r["scenario"])))

    def to_csv(self, path: str | Path | None = None) -> str:
        lines = [SCHEMA, ",".join(self.columns)]
        for r in self.sorted_rows():
            lines.append(",".join(_fmt(r.get(c, "")) for c in self.columns))
        text = "\n".join(lines) + "\n"
        if path is not None:
            Path(path).parent.mkdir(parents=True, exist_ok=True)
            Path(path).write_text(text)
        return text


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


@dataclass
class ExperimentResult:
    table: ResultTable | None
    summary: dict


STAT_COLUMNS = (
    "strategy", "parameter", "scenario", "p", "n",
    "samples_mean", "samples_se", "distance_mean", "distance_se", "error_mean", "error_se",
    "converged", "theory", "gamma", "eta", "time_s", "time_days",
)


def _scenarios(spec: ExperimentSpec) -> list[tuple[str, float, float]]:
    out = []
    for g in spec.gammas:
        for v in spec.velocities:
            eta = spec.strip_length / v
            out.append((f"g={g:g};v={v:g}", float(g), eta))
    return out


def _stat_rows(table: ResultTable, spec: ExperimentSpec, name: str, param: float, res: BatchResult,
               theory: float, p: float) -> None:
    s = res.mean_se("samples")
    d = res.mean_se("distance")
    e = res.mean_se("error")
    for scen, g, eta in _scenarios(spec):
        t = g * s[0] + eta * d[0]
        table.add(strategy=name, parameter=float(param), scenario=scen, p=float(p), n=res.count,
                  samples_mean=s[0], samples_se=s[1], distance_mean=d[0], distance_se=d[1],
                  error_mean=e[0], error_se=e[1], converged=float(res.converged.mean()),
                  theory=float(theory), gamma=g, eta=eta, time_s=t, time_days=t / SECONDS_PER_DAY)


def _strategy_spec(spec: ExperimentSpec, name: str, m: float = 2.0, lam: float = 0.0, p: float | None = None,
                   budget: int | None = None) -> StrategySpec:
    p = spec.p if p is None else p
    return StrategySpec(name, m=m, lam=lam, p=p, epsilon=spec.epsilon, delta=spec.delta, budget=budget)


def _sim(spec: ExperimentSpec, s: StrategySpec) -> BatchResult:
    reps = 1 if s.p == 0 else spec.replicates
    return simulate(s, n_theta=spec.n_theta, replicates=reps, seed=spec.seed or 0, workers=spec.workers)


def _sweep_m(spec: ExperimentSpec) -> ExperimentResult:
    table = ResultTable(STAT_COLUMNS)
    for name in spec.strategies:
        if name == "proactive":
            raise ConfigurationError("use sweep_lambda for the proactive strategy")
        for m in spec.m_grid:
            res = _sim(spec, _strategy_spec(spec, name, m=m))
            th = T.dqs_expected_distance(m) if name == "dqs" else math.nan
            _stat_rows(table, spec, name, m, res, th, spec.p)
    return ExperimentResult(table, {"kind": spec.kind, "rows": len(table.rows)})


def _sweep_lambda(spec: ExperimentSpec) -> ExperimentResult:
    table = ResultTable(STAT_COLUMNS)
    for lam in spec.lambda_grid:
        res = _sim(spec, _strategy_spec(spec, "proactive", lam=lam))
        _stat_rows(table, spec, "proactive", lam, res, math.nan, spec.p)
    return ExperimentResult(table, {"kind": spec.kind, "rows": len(table.rows)})


def _error_curve(spec: ExperimentSpec) -> ExperimentResult:
    table = ResultTable(STAT_COLUMNS)
    for name in spec.strategies:
        for m in spec.m_grid:
            res = _sim(spec, _strategy_spec(spec, name, m=m, budget=spec.n_samples))
            if name == "dqs":
                th = T.dqs_expected_error(m, spec.n_samples)
            else:
                th = T.pqs_error_bound(m, spec.p, spec.n_samples)
            _stat_rows(table, spec, name, m, res, th, spec.p)
    return ExperimentResult(table, {"kind": spec.kind, "n_samples": spec.n_samples, "rows": len(table.rows)})


def _distance_curve(spec: ExperimentSpec) -> ExperimentResult:
    table = ResultTable(STAT_COLUMNS)
    for m in spec.m_grid:
        res = _sim(spec, _strategy_spec(spec, "dqs", m=m, p=0.0))
        _stat_rows(table, spec, "dqs", m, res, T.dqs_expected_distance(m), 0.0)
    return ExperimentResult(table, {"kind": spec.kind, "rows": len(table.rows)})


def contour_points(gammas, velocities, diff: np.ndarray) -> list[dict]:
    """Where ``diff`` (shape ``(len(gammas), len(velocities))``) changes sign
    between grid neighbours, located by linear interpolation."""
    pts = []
    g = np.asarray(gammas, dtype=float)
    v = np.asarray(velocities, dtype=float)
    for i in range(len(g)):
        for j in range(len(v)):
            if i + 1 < len(g) and np.sign(diff[i, j]) != np.sign(diff[i + 1, j]):
                t = diff[i, j] / (diff[i, j] - diff[i + 1, j])
                pts.append({"gamma": float(g[i] + t * (g[i + 1] - g[i])), "velocity": float(v[j])})
            if j + 1 < len(v) and np.sign(diff[i, j]) != np.sign(diff[i, j + 1]):
                t = diff[i, j] / (diff[i, j] - diff[i, j + 1])
                pts.append({"gamma": float(g[i]), "velocity": float(v[j] + t * (v[j + 1] - v[j]))})
    return sorted(pts, key=lambda q: (q["gamma"], q["velocity"]))


def _compare_grid(spec: ExperimentSpec) -> ExperimentResult:
    """Quantile search (DQS when noiseless, TPQS otherwise) against proactive
    learning. The sample and distance curves are simulated once; each cost
    scenario then picks the best ``m`` and ``lam`` analytically."""
    table = ResultTable(STAT_COLUMNS)
    grids = {}
    for p in spec.p_values if spec.p_values is not None else (spec.p,):
        qname = "dqs" if p == 0 else "tpqs"
        q_curve = {m: _sim(spec, _strategy_spec(spec, qname, m=m, p=p)) for m in spec.m_grid}
        l_curve = {lam: _sim(spec, _strategy_spec(spec, "proactive", lam=lam, p=p)) for lam in spec.lambda_grid}
        for m, res in q_curve.items():
            _stat_rows(table, spec, qname, m, res, math.nan, p)
        for lam, res in l_curve.items():
            _stat_rows(table, spec, "proactive", lam, res, math.nan, p)
        qs = {m: (r.samples.mean(), r.distance.mean()) for m, r in q_curve.items()}
        ls = {lam: (r.samples.mean(), r.distance.mean()) for lam, r in l_curve.items()}
        diff = np.zeros((len(spec.gammas), len(spec.velocities)))
        cells = []
        for i, g in enumerate(spec.gammas):
            for j, v in enumerate(spec.velocities):
                cost = T.CostModel(g, v, spec.strip_length)
                qt = {m: T.sampling_time(cost, *nd) for m, nd in qs.items()}
                lt = {lam: T.sampling_time(cost, *nd) for lam, nd in ls.items()}
                m_best = min(qt, key=lambda k: (qt[k], k))
                l_best = min(lt, key=lambda k: (lt[k], k))
                diff[i, j] = qt[m_best] - lt[l_best]
                cells.append({"gamma": float(g), "velocity": float(v), "m_star": float(m_best),
                              "lambda_star": float(l_best), "quantile_time_s": float(qt[m_best]),
                              "proactive_time_s": float(lt[l_best]), "difference_s": float(diff[i, j])})
        grids[f"p={p:g}"] = {"quantile": qname, "cells": cells,
                             "contour": contour_points(spec.gammas, spec.velocities, diff)}
    return ExperimentResult(table, {"kind": spec.kind, "grids": grids})


def _mission(spec: ExperimentSpec) -> ExperimentResult:
    from .cli import run_mission_config

    report = run_mission_config(spec.mission)
    return ExperimentResult(None, {"kind": spec.kind, "report": report})


def _verify(spec: ExperimentSpec) -> ExperimentResult:
    from .verify import report_json, run_suite

    checks = run_suite(spec.suite, seed=spec.seed or 0)
    return ExperimentResult(None, json.loads(report_json(checks, spec.suite, spec.seed or 0)))


_RUNNERS = {
    "sweep_m": _sweep_m,
    "sweep_lambda": _sweep_lambda,
    "error_curve": _error_curve,
    "distance_curve": _distance_curve,
    "compare_grid": _compare_grid,
    "mission": _mission,
    "verify": _verify,
}


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Run ``spec``; write the CSV to ``spec.output`` and the JSON summary to
    ``spec.summary`` when those are set."""
    spec.validate()
    result = _RUNNERS[spec.kind](spec)
    result.summary["spec"] = {k: v for k, v in asdict(spec).items() if k not in ("output", "summary", "workers")}
    if spec.output and result.table is not None:
        result.table.to_csv(spec.output)
    if spec.summary:
        Path(spec.summary).parent.mkdir(parents=True, exist_ok=True)
        Path(spec.summary).write_text(json.dumps(result.summary, indent=2, sort_keys=True) + "\n")
    return result


__all__ = ["ExperimentSpec", "ExperimentResult", "ResultTable", "run_experiment", "contour_points"]
