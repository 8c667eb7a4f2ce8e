"""Deterministic quantile search for noiseless labels.

Each step moves a fraction ``1/m`` of the feasible interval's width forward
(after a 1) or backward (after a 0). Since the current location always sits
on an end of the feasible interval, the new sample is its interior ``1/m`` or
``(m-1)/m`` point. ``m = 2`` is plain bisection; larger ``m`` trades extra
samples for less travel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ContradictionError, MisuseError
from .trace import SearchTrace

DEFAULT_EPSILON = 1e-4


@dataclass
class FeasibleInterval:
    """Change points consistent with the noiseless labels seen so far: (a, b]."""

    a: float = 0.0
    b: float = 1.0

    @property
    def width(self) -> float:
        return self.b - self.a

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.a + self.b)

    def observe(self, x: float, y: int) -> None:
        if y == 1:
            self.a = max(self.a, x)
        else:
            self.b = min(self.b, x)
        if self.a >= self.b:
            raise ContradictionError(f"labels leave an empty feasible interval ({self.a}, {self.b}]")


def _require_noiseless(oracle) -> None:
    if getattr(oracle, "p", 0.0) > 0.0:
        raise MisuseError("deterministic quantile search needs a noiseless oracle (p = 0)")


def _check(m: float, epsilon: float, max_samples: int | None) -> None:
    if not m >= 2:
        raise ConfigurationError(f"m must be >= 2, got {m}")
    if epsilon < 0 or (epsilon == 0 and max_samples is None):
        raise ConfigurationError("epsilon must be positive unless a sample budget is given")


def _walk(oracle, m, epsilon, max_samples, first, position) -> SearchTrace:
    _require_noiseless(oracle)
    _check(m, epsilon, max_samples)
    cap = np.inf if max_samples is None else max_samples
    iv = FeasibleInterval()
    xs, ys, est, aa, bb = [], [], [], [], []
    counted = position is not None
    pos = 0.0 if position is None else float(position)
    start = pos
    dist = 0.0
    x_prev, y_prev = 0.0, 1
    n = 0
    while iv.width > 2 * epsilon and n < cap:
        if n == 0 and first is not None:
            x = float(first)
        elif y_prev == 1:
            x = x_prev + iv.width / m
        else:
            x = x_prev - iv.width / m
        y = int(oracle.measure(x))
        if n > 0 or counted:
            dist += abs(x - pos)
        pos = x
        iv.observe(x, y)
        xs.append(x)
        ys.append(y)
        est.append(iv.midpoint)
        aa.append(iv.a)
        bb.append(iv.b)
        x_prev, y_prev = x, y
        n += 1
    return SearchTrace(
        locations=np.array(xs),
        labels=np.array(ys, dtype=int),
        estimates=np.array(est),
        distance=dist,
        estimate=iv.midpoint,
        converged=iv.width <= 2 * epsilon,
        start=start,
        approach_counted=counted,
        columns={"a": np.array(aa), "b": np.array(bb)},
    )


def dqs(oracle, m: float = 2.0, epsilon: float = DEFAULT_EPSILON, start: float = 0.0,
        max_samples: int | None = None, count_approach: bool = True) -> SearchTrace:
    """Deterministic quantile search from the left end of the interval.

    The search begins as if a 1 had been observed at ``x = 0`` and stops when
    the feasible interval is no wider than ``2 * epsilon`` (or after
    ``max_samples`` samples). ``start`` is the craft's position, used only for
    distance accounting when ``count_approach`` is set.

    >>> from qsearch.oracle import StepOracle
    >>> dqs(StepOracle(1 / 3), m=5, max_samples=4, epsilon=0).locations.round(4).tolist()
    [0.2, 0.36, 0.328, 0.3344]
    """
    return _walk(oracle, m, epsilon, max_samples, None, start if count_approach else None)


def dqs_with_init(oracle, m: float = 2.0, epsilon: float = DEFAULT_EPSILON, x0: float = 0.0,
                  position: float | None = None, max_samples: int | None = None) -> SearchTrace:
    """Quantile search whose first sample is taken at ``x0``.

    The first label moves one end of [0, 1] to ``x0``; the walk then follows
    the usual rule from there. Travel from ``position`` to ``x0`` is counted
    when ``position`` is given. ``x0 = 0`` reduces to :func:`dqs`.
    """
    if not 0.0 <= x0 <= 1.0:
        raise ConfigurationError("x0 must lie in [0, 1]")
    if x0 == 0.0:
        # the left end is known to read 1, so this is the plain search
        return _walk(oracle, m, epsilon, max_samples, None, position)
    return _walk(oracle, m, epsilon, max_samples, x0, position)


def bisection(oracle, epsilon: float = DEFAULT_EPSILON, **kw) -> SearchTrace:
    return dqs(oracle, 2.0, epsilon, **kw)
