"""Discretized posterior over the change point.

The grid has ``1/delta`` bins; bin ``i`` covers ``[i delta, (i+1) delta)``.
Priors are piecewise constant on the bins. Sample locations are continuous:
each update splits the density at the sample point, so the posterior stays an
exact piecewise-constant density and ``weights`` (the per-bin masses) are read
off its CDF.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels as K
from .errors import ConfigurationError, ContradictionError, DomainError


def _nbins(delta: float) -> int:
    n = round(1.0 / delta)
    if n < 2 or abs(n * delta - 1.0) > 1e-9:
        raise ConfigurationError(f"1/delta must be an integer >= 2, got delta={delta}")
    return n


def binary_entropy(q: float) -> float:
    """Entropy of a Bernoulli(q) variable in bits, with H_b(0) = H_b(1) = 0."""
    return float(K.binary_entropy(float(q)))


def update_factors(phi: float, y: int, p: float) -> tuple[float, float]:
    """Scale factors (left of x, right of x) for label ``y`` at a point with
    prior CDF ``phi``, written over the normalizer ``phi * p``.

    For ``y = 1`` these factors are only proportional to the likelihood; the
    update renormalizes afterwards.
    """
    s = phi * (1.0 - p) + (1.0 - phi) * p
    if y == 0:
        return (1.0 - p) / s, p / s
    return p / s, (1.0 - p) / s


@dataclass(frozen=True)
class UpdateParams:
    """``p_update`` is the flip probability used in the update (the true p, or a
    larger alpha for the conservative variant); ``m`` the quantile parameter."""

    p_update: float = 0.0
    m: float = 2.0

    def __post_init__(self):
        if not 0.0 <= self.p_update < 0.5:
            raise ConfigurationError("p_update must lie in [0, 0.5)")
        if self.m < 2:
            raise ConfigurationError("m must be >= 2")


class PosteriorGrid:
    """Piecewise-constant density on [0, 1] with bin width ``delta``."""

    __slots__ = ("delta", "nbins", "edges", "mass", "_cum")

    def __init__(self, delta: float, edges: np.ndarray, mass: np.ndarray):
        self.delta = float(delta)
        self.nbins = _nbins(delta)
        self.edges = np.ascontiguousarray(edges, dtype=float)
        self.mass = np.ascontiguousarray(mass, dtype=float)
        self._cum = None

    # construction -----------------------------------------------------------
    @classmethod
    def from_bin_weights(cls, delta: float, weights) -> PosteriorGrid:
        n = _nbins(delta)
        w = np.asarray(weights, dtype=float)
        if w.shape != (n,):
            raise ConfigurationError(f"expected {n} bin weights, got {w.shape}")
        if np.any(w < 0) or not np.isfinite(w).all() or w.sum() <= 0:
            raise ConfigurationError("bin weights must be nonnegative with positive sum")
        return cls(delta, np.arange(n + 1) / n, w / w.sum())

    @classmethod
    def uniform(cls, delta: float = 1e-3) -> PosteriorGrid:
        n = _nbins(delta)
        return cls(delta, np.arange(n + 1) / n, np.full(n, 1.0 / n))

    @classmethod
    def piecewise_uniform(cls, delta: float, center: float, halfwidth: float, ratio: float = 100.0) -> PosteriorGrid:
        """Bins overlapping ``[center - halfwidth, center + halfwidth]`` get
        ``ratio`` times the per-bin mass of the others."""
        if not ratio > 1:
            raise ConfigurationError("ratio must exceed 1")
        if not 0.0 <= center <= 1.0 or not halfwidth > 0:
            raise ConfigurationError("need center in [0, 1] and halfwidth > 0")
        n = _nbins(delta)
        left = np.arange(n) / n
        right = np.arange(1, n + 1) / n
        inside = np.maximum(left, center - halfwidth) < np.minimum(right, center + halfwidth)
        if not inside.any():
            warnings.warn("prior window misses every bin; using a uniform prior", stacklevel=2)
            return cls.uniform(delta)
        return cls.from_bin_weights(delta, np.where(inside, ratio, 1.0))

    @classmethod
    def gaussian(cls, delta: float, center: float, sigma: float) -> PosteriorGrid:
        """Bin masses proportional to a Gaussian kernel at the bin centers.

        Weights are floored at 1e-300 (relative to the peak) so that no
        hypothesis is ruled out by underflow.
        """
        if not sigma > 0:
            raise ConfigurationError("sigma must be positive")
        n = _nbins(delta)
        mid = (np.arange(n) + 0.5) / n
        logw = -((mid - center) ** 2) / (2.0 * sigma**2)
        w = np.exp(logw - logw.max())
        return cls.from_bin_weights(delta, np.maximum(w, 1e-300))

    def copy(self) -> PosteriorGrid:
        return PosteriorGrid(self.delta, self.edges.copy(), self.mass.copy())

    # queries ------------------------------------------------------------------
    @property
    def cum(self) -> np.ndarray:
        if self._cum is None:
            self._cum = K.cumulative(self.mass)
        return self._cum

    @property
    def weights(self) -> np.ndarray:
        """Per-bin masses, length ``1/delta``."""
        return K.bin_masses(self.edges, self.mass, self.cum, self.nbins)

    def total(self) -> float:
        return float(self.cum[-1])

    def cdf(self, x: float) -> float:
        return float(K.cdf_at(self.edges, self.mass, self.cum, float(x)))

    def quantile(self, q: float) -> float:
        """Smallest x with ``cdf(x) >= q`` (linear inside each segment)."""
        if not 0.0 <= q <= 1.0:
            raise ConfigurationError("quantile level must lie in [0, 1]")
        return float(K.quantile_lower(self.edges, self.mass, self.cum, float(q)))

    def upper_quantile(self, tail: float) -> float:
        """Largest x whose mass to the right is at least ``tail``."""
        if not 0.0 <= tail <= 1.0:
            raise ConfigurationError("tail level must lie in [0, 1]")
        return float(K.quantile_upper(self.edges, self.mass, K.tail_cumulative(self.mass), float(tail)))

    def median(self) -> float:
        return self.quantile(0.5)

    def support(self) -> tuple[float, float]:
        """Smallest interval carrying all the mass."""
        a, b = K.support(self.edges, self.mass)
        return float(a), float(b)

    def max_bin_mass(self) -> tuple[float, int]:
        """Largest single-bin mass and its index (ties go to the lowest index)."""
        w = self.weights
        # masses come from cumulative differences; absorb their rounding in ties
        i = int(np.flatnonzero(w >= w.max() - 1e-12)[0])
        return float(w[i]), i

    def mutual_information(self, x: float, p: float) -> float:
        """Information (bits) a label at ``x`` carries about the change point."""
        if not 0.0 <= p <= 0.5:
            raise ConfigurationError("p must lie in [0, 0.5]")
        return float(K.mutual_information(self.cdf(x), float(p)))

    # transformations ----------------------------------------------------------
    def update(self, x: float, y: int, p: float) -> PosteriorGrid:
        """Posterior after observing label ``y`` at ``x`` through a channel with
        flip probability ``p``."""
        if not 0.0 <= x <= 1.0:
            raise DomainError(f"sample location {x} outside [0, 1]")
        if y not in (0, 1):
            raise ConfigurationError("labels are 0 or 1")
        ne, nm, ok = K.bayes_update(self.edges, self.mass, float(x), int(y), float(p))
        if not ok:
            raise ContradictionError(f"label {y} at x={x} has zero probability under the current posterior")
        return PosteriorGrid(self.delta, ne, nm)

    def truncate_tails(self, x_current: float) -> tuple[PosteriorGrid, float]:
        """Remove equal tail masses ``chi = min(F(x), 1 - F(x))`` from both ends."""
        ne, nm, chi = K.truncate_tails(
            self.edges, self.mass, self.cum, K.tail_cumulative(self.mass), float(x_current), self.nbins
        )
        return PosteriorGrid(self.delta, ne, nm), float(chi)

    def to_csv(self, path: str | Path) -> None:
        """Dump ``bin_index,left_edge,mass``."""
        w = self.weights
        lines = ["bin_index,left_edge,mass"]
        lines += [f"{i},{i / self.nbins!r},{float(v)!r}" for i, v in enumerate(w)]
        Path(path).write_text("\n".join(lines) + "\n")

    def __repr__(self) -> str:
        return f"PosteriorGrid(delta={self.delta}, segments={self.mass.size}, median={self.median():.6g})"


def new_uniform(delta: float = 1e-3) -> PosteriorGrid:
    return PosteriorGrid.uniform(delta)


def new_piecewise_uniform(delta: float, center: float, halfwidth: float, ratio: float = 100.0) -> PosteriorGrid:
    return PosteriorGrid.piecewise_uniform(delta, center, halfwidth, ratio)


def new_gaussian(delta: float, center: float, sigma: float) -> PosteriorGrid:
    return PosteriorGrid.gaussian(delta, center, sigma)


def mutual_information_at(phi: float, p: float) -> float:
    """``H_b(phi * p) - H_b(p)`` for a point whose prior CDF is ``phi``."""
    if not 0.0 <= phi <= 1.0:
        raise DomainError("phi must lie in [0, 1]")
    return float(K.mutual_information(float(phi), float(p)))


def stopping_reached(grid: PosteriorGrid, stop_mass: float = 0.9) -> bool:
    """True iff some bin holds at least ``stop_mass`` of the posterior."""
    return grid.max_bin_mass()[0] >= stop_mass


def _entropy_bits(weights: np.ndarray) -> float:
    w = weights[weights > 0]
    return float(-(w * np.log2(w)).sum())


def bin_entropy(grid: PosteriorGrid) -> float:
    """Discrete entropy of the bin masses in bits."""
    return _entropy_bits(grid.weights)

