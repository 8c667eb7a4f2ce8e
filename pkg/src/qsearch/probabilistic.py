"""Probabilistic quantile search (PQS) and its truncated variant (TPQS).

PQS samples at the ``1/m`` quantile of the posterior. TPQS first removes
equal tail masses so that the next sample always lies between the current
location and the posterior median, then takes whichever of the truncated
``1/m`` and ``(m-1)/m`` quantiles is nearer. Both stop once a single bin holds
``stop_mass`` of the posterior and report the posterior median.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import ConfigurationError, ContradictionError
from .oracle import StepOracle
from .posterior import PosteriorGrid, binary_entropy, stopping_reached
from .theory import samples_to_error
from .trace import SearchTrace

__all__ = ["ProbSearchConfig", "pqs", "tpqs", "pbs", "stopping_reached", "default_max_steps"]


def default_max_steps(m: float, p: float, delta: float) -> int:
    """Ten times the noiseless sample count to reach ``delta``, divided by the
    channel capacity ``1 - H_b(p)``."""
    capacity = max(1.0 - binary_entropy(p), 0.05)
    return int(math.ceil(10 * max(samples_to_error(m, delta), 1) / capacity))


@dataclass(frozen=True)
class ProbSearchConfig:
    """Parameters of PQS/TPQS.

    ``p_update`` defaults to ``p``; set it above ``p`` for the conservative
    (alpha) update. ``stop_mass=None`` disables early stopping, so the search
    runs for exactly ``max_steps`` samples.
    """

    m: float = 2.0
    p: float = 0.0
    p_update: float | None = None
    delta: float = 1e-3
    stop_mass: float | None = 0.9
    max_steps: int | None = None

    def __post_init__(self):
        if not self.m >= 2:
            raise ConfigurationError("m must be >= 2")
        if not 0.0 <= self.p < 0.5:
            raise ConfigurationError("p must lie in [0, 0.5)")
        if self.p_update is not None and not self.p <= self.p_update < 0.5:
            raise ConfigurationError("p_update must lie in [p, 0.5)")
        if self.stop_mass is not None and not 0.5 < self.stop_mass <= 1.0:
            raise ConfigurationError("stop_mass must lie in (0.5, 1]")
        if self.stop_mass is None and self.max_steps is None:
            raise ConfigurationError("a fixed-budget search needs max_steps")

    @property
    def update_p(self) -> float:
        return self.p if self.p_update is None else self.p_update

    @property
    def step_cap(self) -> int:
        if self.max_steps is not None:
            return int(self.max_steps)
        return default_max_steps(self.m, self.update_p, self.delta)


def _trace(xs, ys, est, stat, util, sa, sb, dist, grid, converged, start, counted, mode) -> SearchTrace:
    cols = {"a": np.asarray(sa), "b": np.asarray(sb), "max_bin_mass": np.asarray(stat)}
    if mode == K.PROACTIVE:
        cols["utility"] = np.asarray(util)
    return SearchTrace(
        locations=np.asarray(xs, dtype=float),
        labels=np.asarray(ys, dtype=int),
        estimates=np.asarray(est, dtype=float),
        distance=float(dist),
        estimate=grid.median(),
        converged=converged,
        start=start,
        approach_counted=counted,
        columns=cols,
    )


def run_posterior_search(
    oracle, prior: PosteriorGrid, *, mode: int, m: float, lam: float, p_update: float,
    stop_mass: float | None, support_eps: float, max_steps: int, start: float,
    first: float | None, count_approach: bool, ngrid: int = 0, compiled: bool = True,
) -> SearchTrace:
    """Shared driver for PQS, TPQS and proactive learning.

    Step oracles run through the compiled loop; any other oracle (or
    ``compiled=False``) goes through the Python loop built from the same
    compiled step functions. Both consume one noise draw per sample.
    """
    first_v = math.nan if first is None else float(first)
    stop_v = 0.0 if stop_mass is None else float(stop_mass)
    if compiled and type(oracle) is StepOracle:
        u = oracle._peek_uniforms(max_steps)
        xs, ys, est, stat, util, sa, sb, n, dist, status, edges, mass = K.run_search(
            prior.edges, prior.mass, prior.nbins, oracle.theta, oracle.p, p_update, float(m), mode,
            float(lam), float(start), first_v, count_approach, stop_v, float(support_eps),
            int(max_steps), u, int(ngrid),
        )
        oracle._commit(n)
        if status == -1:
            raise ContradictionError("label with zero predictive probability; is p_update below the true p?")
        grid = PosteriorGrid(prior.delta, edges, mass)
        return _trace(xs, ys, est, stat, util, sa, sb, dist, grid, status == 1, start, count_approach, mode)

    grid = prior
    pos = float(start)
    dist = 0.0
    xs, ys, est, stat, util, sa, sb = [], [], [], [], [], [], []
    converged = False
    n = 0
    while True:
        if n >= 1 and K.should_stop(grid.edges, grid.mass, grid.cum, grid.nbins, stop_v, float(support_eps)):
            converged = True
            break
        if n >= max_steps:
            break
        x, ut = K.next_location(grid.edges, grid.mass, grid.cum, grid.nbins, mode, float(m), float(lam),
                                p_update, pos, n, first_v, int(ngrid))
        if n > 0 or count_approach:
            dist += abs(x - pos)
        pos = x
        y = int(oracle.measure(x))
        grid = grid.update(x, y, p_update)
        n += 1
        xs.append(x)
        ys.append(y)
        util.append(ut)
        est.append(grid.median())
        stat.append(K.median_bin_mass(grid.edges, grid.mass, grid.cum, grid.nbins))
        a, b = grid.support()
        sa.append(a)
        sb.append(b)
    return _trace(xs, ys, est, stat, util, sa, sb, dist, grid, converged, float(start), count_approach, mode)


def _search(oracle, config: ProbSearchConfig, prior, mode, start, first_sample, count_approach, compiled):
    if prior is None:
        prior = PosteriorGrid.uniform(config.delta)
    elif abs(prior.delta - config.delta) > 1e-15:
        raise ConfigurationError("prior bin width differs from config.delta")
    if abs(prior.total() - 1.0) > 1e-9:
        raise ConfigurationError("prior is not normalized")
    return run_posterior_search(
        oracle, prior, mode=mode, m=config.m, lam=0.0, p_update=config.update_p,
        stop_mass=config.stop_mass, support_eps=0.0, max_steps=config.step_cap, start=start,
        first=first_sample, count_approach=count_approach, compiled=compiled,
    )


def pqs(oracle, config: ProbSearchConfig = ProbSearchConfig(), prior: PosteriorGrid | None = None, *,
        start: float = 0.0, first_sample: float | None = None, count_approach: bool = True,
        compiled: bool = True) -> SearchTrace:
    """Probabilistic quantile search.

    Samples at the ``1/m`` posterior quantile (``first_sample`` overrides the
    first location), updates with the binary-symmetric-channel likelihood and
    returns the trace with the posterior median as estimate. Runs out of steps
    are returned with ``converged=False``.
    """
    return _search(oracle, config, prior, K.PQS, start, first_sample, count_approach, compiled)


def tpqs(oracle, config: ProbSearchConfig = ProbSearchConfig(), prior: PosteriorGrid | None = None, *,
         start: float = 0.0, first_sample: float | None = None, count_approach: bool = True,
         compiled: bool = True) -> SearchTrace:
    """Truncated probabilistic quantile search.

    After the first sample, equal tail masses ``chi = min(F(X_n), 1 - F(X_n))``
    are cut from the posterior, and the nearer of the truncated ``1/m`` and
    ``(m-1)/m`` quantiles is sampled (ties take the lower one). The untruncated
    posterior is what gets updated. With ``m = 2`` the step is the posterior
    median, exactly as in :func:`pqs`.
    """
    return _search(oracle, config, prior, K.TPQS, start, first_sample, count_approach, compiled)


def pbs(oracle, p: float, delta: float = 1e-3, **kw) -> SearchTrace:
    """Probabilistic bisection: PQS with ``m = 2``."""
    return pqs(oracle, ProbSearchConfig(m=2.0, p=p, delta=delta), **kw)
