"""Proactive learning baseline: sample where information gain minus a travel
penalty is largest.

The utility of a location ``x`` given the current position ``X_n`` is
``I(x) - lam * |X_n - x|`` where ``I`` is the mutual information between the
change point and a noisy label at ``x``. By default the argmax is exact over
the continuum; ``candidate_grid`` restricts it to ``i / candidate_grid``.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import _kernels as K
from .errors import ConfigurationError
from .posterior import PosteriorGrid
from .probabilistic import default_max_steps, run_posterior_search
from .trace import SearchTrace

# sample counts of proactive runs track quantile search with m of about 4
_CAP_M = 4.0


@dataclass(frozen=True)
class ProactiveConfig:
    """Parameters of the proactive baseline.

    Noiseless runs stop when the posterior support is no wider than
    ``2 * epsilon``; noisy runs stop once a bin holds ``stop_mass``.
    """

    lam: float = 0.0
    p: float = 0.0
    delta: float = 1e-3
    epsilon: float = 1e-4
    stop_mass: float = 0.9
    candidate_grid: int | None = None
    max_steps: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ConfigurationError("lam must lie in [0, 1]")
        if not 0.0 <= self.p < 0.5:
            raise ConfigurationError("p must lie in [0, 0.5)")
        if not self.epsilon > 0:
            raise ConfigurationError("epsilon must be positive")
        if not 0.5 < self.stop_mass <= 1.0:
            raise ConfigurationError("stop_mass must lie in (0.5, 1]")
        if self.candidate_grid is not None and self.candidate_grid < 1:
            raise ConfigurationError("candidate_grid must be positive")

    @property
    def step_cap(self) -> int:
        if self.max_steps is not None:
            return int(self.max_steps)
        tol = self.epsilon if self.p == 0 else self.delta
        return default_max_steps(_CAP_M, self.p, tol)


def utility(grid: PosteriorGrid, x: float, position: float, lam: float, p: float) -> float:
    """``MI(x) - lam * |position - x|`` in bits."""
    return grid.mutual_information(x, p) - lam * abs(position - x)


def proactive(oracle, config: ProactiveConfig = ProactiveConfig(), prior: PosteriorGrid | None = None, *,
              start: float = 0.0, first_sample: float | None = None, count_approach: bool = True,
              compiled: bool = True) -> SearchTrace:
    """Run proactive learning; the trace carries a ``utility`` column.

    Ties in utility (within 1e-12) go to the location nearest ``X_n``, then to
    the smaller location.
    """
    if prior is None:
        prior = PosteriorGrid.uniform(config.delta)
    if abs(prior.total() - 1.0) > 1e-9:
        raise ConfigurationError("prior is not normalized")
    noiseless = config.p == 0
    return run_posterior_search(
        oracle, prior, mode=K.PROACTIVE, m=2.0, lam=config.lam, p_update=config.p,
        stop_mass=None if noiseless else config.stop_mass,
        support_eps=config.epsilon if noiseless else 0.0,
        max_steps=config.step_cap, start=start, first=first_sample,
        count_approach=count_approach, ngrid=config.candidate_grid or 0, compiled=compiled,
    )


def best_candidate(grid: PosteriorGrid, position: float, lam: float, p: float) -> tuple[float, float]:
    """Exact utility maximizer over [0, 1] and its utility."""
    x, u = K.proactive_argmax(grid.edges, grid.mass, grid.cum, float(position), float(lam), float(p))
    return float(x), float(u)


__all__ = ["ProactiveConfig", "proactive", "utility", "best_candidate"]
