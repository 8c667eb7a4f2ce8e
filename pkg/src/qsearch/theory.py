"""Closed-form error and distance laws, the sampling-time model, and the
parameter selectors built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import ConfigurationError


@dataclass(frozen=True)
class CostModel:
    """Mission time model ``T = gamma * N + eta * D``.

    Parameters
    ----------
    gamma : float
        Seconds per sample.
    velocity : float
        Travel speed in m/s.
    strip_length : float
        Meters spanned by the unit interval.
    """

    gamma: float
    velocity: float
    strip_length: float = 40_000.0

    def __post_init__(self):
        if self.gamma < 0:
            raise ConfigurationError("gamma must be nonnegative")
        if not self.velocity > 0:
            raise ConfigurationError("velocity must be positive")
        if not self.strip_length > 0:
            raise ConfigurationError("strip_length must be positive")

    @property
    def eta(self) -> float:
        """Seconds per unit of unit-interval travel."""
        return self.strip_length / self.velocity

    @classmethod
    def from_eta(cls, gamma: float, eta: float) -> CostModel:
        if eta < 0:
            raise ConfigurationError("eta must be nonnegative")
        if eta == 0:
            return cls(gamma, math.inf, 1.0)
        return cls(gamma, 1.0 / eta, 1.0)

    def time(self, n_samples: float, distance_units: float) -> float:
        return sampling_time(self, n_samples, distance_units)


def _rate(m: float) -> float:
    rho = (m - 1.0) / m
    return rho * rho + (1.0 - rho) ** 2


def dqs_expected_error(m: float, n: int) -> float:
    """Expected ``|estimate - theta|`` of quantile search after ``n`` samples,
    for ``theta`` uniform on [0, 1].

    >>> round(dqs_expected_error(5, 1), 12)
    0.17
    """
    if m < 2 or n < 0:
        raise ConfigurationError("need m >= 2 and n >= 0")
    return 0.25 * _rate(m) ** n


def dqs_expected_distance(m: float) -> float:
    """Expected total travel of quantile search started at 0, run to convergence."""
    if not m > 1:
        raise ConfigurationError("need m > 1")
    return m / (2.0 * m - 2.0)


def dqs_expected_leg_distance(m: float, n: int) -> float:
    """Expected length of the ``n``-th leg between direction reversals."""
    if not m > 1 or n < 1:
        raise ConfigurationError("need m > 1 and n >= 1")
    return m / (2.0 * m - 1.0) ** n


def pqs_error_bound(m: float, p: float, n: int) -> float:
    """Upper bound on the worst-case expected error of discretized PQS."""
    if m < 2 or not 0.0 <= p <= 0.5 or n < 0:
        raise ConfigurationError("need m >= 2, p in [0, 0.5] and n >= 0")
    base = (m - 1.0) / m + 2.0 * math.sqrt(p * (1.0 - p)) / m
    return 2.0 * base ** (n / 2.0)


def sampling_time(cost: CostModel, n_samples: float, distance_units: float) -> float:
    """``gamma * N + eta * D`` in seconds."""
    if n_samples < 0 or distance_units < 0:
        raise ConfigurationError("samples and distance must be nonnegative")
    if distance_units == 0:
        return cost.gamma * n_samples
    return cost.gamma * n_samples + cost.eta * distance_units


def samples_to_error(m: float, epsilon: float) -> int:
    """Smallest ``n`` with ``dqs_expected_error(m, n) <= epsilon``.

    >>> samples_to_error(10, 1e-4)
    40
    """
    if not epsilon > 0:
        raise ConfigurationError("epsilon must be positive")
    if epsilon >= 0.25:
        return 0
    n = max(0, math.ceil(math.log(4.0 * epsilon) / math.log(_rate(m))))
    # the logarithm can land one off either way near exact powers
    while n > 0 and dqs_expected_error(m, n - 1) <= epsilon:
        n -= 1
    while dqs_expected_error(m, n) > epsilon:
        n += 1
    return n


def _argmin(grid: Sequence[float], values: Sequence[float]) -> tuple[float, float]:
    best = None
    for g, v in sorted(zip(grid, values)):
        if best is None or v < best[1]:
            best = (g, v)
    return float(best[0]), float(best[1])


def expected_time_closed_form(cost: CostModel, m: float, epsilon: float) -> float:
    return sampling_time(cost, samples_to_error(m, epsilon), dqs_expected_distance(m))


def optimize_m(
    cost: CostModel,
    epsilon: float = 1e-4,
    p: float = 0.0,
    mode: str = "closed_form",
    m_grid: Sequence[float] = tuple(range(2, 101)),
    *,
    strategy: str | None = None,
    replicates: int = 20,
    n_theta: int = 50,
    seed: int = 0,
    delta: float = 1e-3,
) -> tuple[float, float]:
    """Quantile parameter minimizing expected mission time.

    ``closed_form`` (noiseless only) uses the expected-error inversion for the
    sample count and the closed-form distance. ``monte_carlo`` simulates
    ``strategy`` (``dqs`` when ``p == 0``, else ``tpqs``) with common random
    numbers across ``m``. Ties go to the smaller ``m``.
    """
    if not m_grid:
        raise ConfigurationError("m_grid is empty")
    if min(m_grid) < 2:
        raise ConfigurationError("m values must be >= 2")
    if mode == "closed_form":
        if p != 0:
            raise ConfigurationError("closed_form mode covers the noiseless case only")
        return _argmin(m_grid, [expected_time_closed_form(cost, m, epsilon) for m in m_grid])
    if mode != "monte_carlo":
        raise ConfigurationError(f"unknown mode {mode!r}")
    if replicates < 1 or n_theta < 1:
        raise ConfigurationError("monte_carlo mode needs at least one replicate and one theta")
    from .montecarlo import StrategySpec, simulate

    name = strategy or ("dqs" if p == 0 else "tpqs")
    times = []
    for m in m_grid:
        spec = StrategySpec(name, m=m, p=p, epsilon=epsilon, delta=delta)
        res = simulate(spec, n_theta=n_theta, replicates=replicates, seed=seed)
        times.append(sampling_time(cost, res.samples.mean(), res.distance.mean()))
    return _argmin(m_grid, times)


def optimize_lambda(
    cost: CostModel,
    epsilon: float = 1e-4,
    p: float = 0.0,
    lambda_grid: Sequence[float] = tuple(i / 10 for i in range(11)),
    *,
    replicates: int = 20,
    n_theta: int = 50,
    seed: int = 0,
    delta: float = 1e-3,
) -> tuple[float, float]:
    """Cost weight of proactive learning minimizing simulated mission time."""
    if not lambda_grid:
        raise ConfigurationError("lambda_grid is empty")
    if min(lambda_grid) < 0 or max(lambda_grid) > 1:
        raise ConfigurationError("lambda values must lie in [0, 1]")
    if replicates < 1 or n_theta < 1:
        raise ConfigurationError("need at least one replicate and one theta")
    from .montecarlo import StrategySpec, simulate

    times = []
    for lam in lambda_grid:
        spec = StrategySpec("proactive", lam=lam, p=p, epsilon=epsilon, delta=delta)
        res = simulate(spec, n_theta=n_theta, replicates=replicates, seed=seed)
        times.append(sampling_time(cost, res.samples.mean(), res.distance.mean()))
    return _argmin(lambda_grid, times)
