"""Seeded replicate simulation of the 1D strategies.

Replicate ``r`` at change point index ``i`` draws its label noise from
``SeedSequence(seed, spawn_key=(stream, i, r))``. The strategy is not part of
the key, so every strategy sees the same noise stream for the same
``(i, r)``: comparisons between strategies use common random numbers.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .deterministic import dqs, dqs_with_init
from .errors import ConfigurationError
from .oracle import StepOracle
from .proactive import ProactiveConfig, proactive
from .probabilistic import ProbSearchConfig, pqs, tpqs
from .trace import SearchTrace

STRATEGIES = ("dqs", "bisection", "pqs", "tpqs", "proactive")


def theta_grid(n: int) -> np.ndarray:
    """Midpoints ``(i + 0.5) / n`` of ``n`` equal cells of [0, 1]."""
    if n < 1:
        raise ConfigurationError("theta grid needs at least one point")
    return (np.arange(n) + 0.5) / n


def replicate_seed(seed: int, theta_index: int, replicate: int, stream: int = 0) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(seed), spawn_key=(int(stream), int(theta_index), int(replicate)))


@dataclass(frozen=True)
class StrategySpec:
    """A 1D strategy with its parameters.

    ``budget`` fixes the number of samples and disables the stopping rules,
    which is what error-after-n curves need. ``p_update`` (PQS/TPQS only)
    switches to the conservative update.
    """

    name: str
    m: float = 2.0
    lam: float = 0.0
    p: float = 0.0
    p_update: float | None = None
    epsilon: float = 1e-4
    delta: float = 1e-3
    stop_mass: float = 0.9
    budget: int | None = None

    def __post_init__(self):
        if self.name not in STRATEGIES:
            raise ConfigurationError(f"unknown strategy {self.name!r}; choose from {STRATEGIES}")
        if self.name == "dqs" and self.p > 0:
            raise ConfigurationError("dqs needs p = 0")
        if self.budget is not None and self.budget < 1:
            raise ConfigurationError("budget must be positive")

    @property
    def label(self) -> str:
        if self.name == "proactive":
            return f"proactive(lam={self.lam:g})"
        if self.name == "bisection":
            return "bisection"
        return f"{self.name}(m={self.m:g})"

    def resolved(self) -> StrategySpec:
        """Bisection as a concrete strategy: DQS when noiseless, else PQS with m = 2."""
        if self.name != "bisection":
            return self
        return replace(self, name="dqs" if self.p == 0 else "pqs", m=2.0)


def run_strategy(spec: StrategySpec, oracle, prior=None, *, start: float = 0.0,
                 first_sample: float | None = None, count_approach: bool = True) -> SearchTrace:
    """Dispatch one search. ``prior`` is ignored by DQS, which has none."""
    s = spec.resolved()
    if s.name == "dqs":
        eps = 0.0 if s.budget is not None else s.epsilon
        if first_sample is None:
            return dqs(oracle, s.m, eps, start=start, max_samples=s.budget, count_approach=count_approach)
        return dqs_with_init(oracle, s.m, eps, x0=first_sample,
                             position=start if count_approach else None, max_samples=s.budget)
    kw = dict(start=start, first_sample=first_sample, count_approach=count_approach)
    if s.name == "proactive":
        cfg = ProactiveConfig(lam=s.lam, p=s.p, delta=s.delta, epsilon=s.epsilon,
                              stop_mass=1.0 if s.budget else s.stop_mass, max_steps=s.budget)
        return proactive(oracle, cfg, prior, **kw)
    cfg = ProbSearchConfig(m=s.m, p=s.p, p_update=s.p_update, delta=s.delta,
                           stop_mass=None if s.budget else s.stop_mass, max_steps=s.budget)
    return (pqs if s.name == "pqs" else tpqs)(oracle, cfg, prior, **kw)


@dataclass
class BatchResult:
    """Per-(theta, replicate) outcomes, arrays of shape ``(n_theta, replicates)``.

    ``errors_at[..., j]`` is the error after ``checkpoints[j]`` samples (the
    final estimate is held once a run stops early).
    """

    spec: StrategySpec
    thetas: np.ndarray
    samples: np.ndarray
    distance: np.ndarray
    error: np.ndarray
    converged: np.ndarray
    checkpoints: tuple[int, ...] = ()
    errors_at: np.ndarray = field(default_factory=lambda: np.empty((0, 0, 0)))

    @property
    def count(self) -> int:
        return int(self.samples.size)

    def mean_se(self, name: str) -> tuple[float, float]:
        return mean_and_se(getattr(self, name).ravel())


def mean_and_se(values) -> tuple[float, float]:
    """Mean and standard error ``std(ddof=1) / sqrt(N)`` (0 for one value)."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ConfigurationError("no values")
    if v.size == 1:
        return float(v[0]), 0.0
    return float(v.mean()), float(v.std(ddof=1) / np.sqrt(v.size))


def _run_rows(args):
    spec, thetas, idx, replicates, seed, stream, checkpoints = args
    out = []
    for i in idx:
        theta = float(thetas[i])
        for r in range(replicates):
            oracle = StepOracle(theta, spec.p, replicate_seed(seed, i, r, stream))
            tr = run_strategy(spec, oracle)
            errs = [tr.error_after(min(c, tr.n), theta) for c in checkpoints]
            out.append((i, r, tr.n, tr.distance, abs(tr.estimate - theta), tr.converged, errs))
    return out


def simulate(spec: StrategySpec, n_theta: int = 100, replicates: int = 1, seed: int = 0, *,
             thetas: Sequence[float] | None = None, stream: int = 0,
             checkpoints: Sequence[int] = (), workers: int = 1) -> BatchResult:
    """Run ``spec`` for every change point and replicate.

    The result does not depend on ``workers``: each run has its own seed and
    rows are placed by index.
    """
    th = theta_grid(n_theta) if thetas is None else np.asarray(thetas, dtype=float)
    if replicates < 1:
        raise ConfigurationError("replicates must be >= 1")
    cps = tuple(int(c) for c in checkpoints)
    shape = (th.size, replicates)
    samples = np.zeros(shape, dtype=np.int64)
    dist = np.zeros(shape)
    err = np.zeros(shape)
    conv = np.zeros(shape, dtype=bool)
    errs_at = np.zeros(shape + (len(cps),))
    idx = np.arange(th.size)
    if workers <= 1:
        rows = _run_rows((spec, th, idx, replicates, seed, stream, cps))
    else:
        chunks = np.array_split(idx, workers)
        with ProcessPoolExecutor(workers) as ex:
            parts = ex.map(_run_rows, [(spec, th, c, replicates, seed, stream, cps) for c in chunks])
            rows = [row for part in parts for row in part]
    for i, r, n, d, e, c, ea in rows:
        samples[i, r] = n
        dist[i, r] = d
        err[i, r] = e
        conv[i, r] = c
        errs_at[i, r] = ea
    return BatchResult(spec, th, samples, dist, err, conv, cps, errs_at)
