"""Search traces shared by every 1D strategy."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class SearchTrace:
    """Ordered record of one search.

    ``distance`` is the path length in unit-interval units: the sum of
    ``|X_i - X_{i-1}|`` including the approach from ``start`` to the first
    sample when ``approach_counted`` is set. ``estimates[i]`` is the estimate
    after ``i + 1`` samples. ``columns`` carries strategy-specific per-step
    values (feasible bounds, bin mass, utility).
    """

    locations: np.ndarray
    labels: np.ndarray
    estimates: np.ndarray
    distance: float
    estimate: float
    converged: bool = True
    start: float = 0.0
    approach_counted: bool = True
    columns: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return int(len(self.locations))

    @property
    def samples(self) -> list[tuple[float, int]]:
        return [(float(x), int(y)) for x, y in zip(self.locations, self.labels)]

    def legs(self) -> np.ndarray:
        prev = np.concatenate([[self.start], self.locations[:-1]])
        legs = np.abs(self.locations - prev)
        if not self.approach_counted and legs.size:
            legs[0] = 0.0
        return legs

    def cumulative_distance(self) -> np.ndarray:
        return np.cumsum(self.legs())

    def error_after(self, n: int, theta: float) -> float:
        """``|estimate - theta|`` after ``n`` samples (``n = 0`` uses 0.5)."""
        if n == 0:
            return abs(0.5 - theta)
        return abs(float(self.estimates[min(n, self.n) - 1]) - theta)

    def to_csv(self, path: str | Path | None = None) -> str:
        """Write ``step,x,y,a,b,cum_distance`` plus any extra columns."""
        extra = [c for c in ("max_bin_mass", "utility") if c in self.columns]
        header = ["step", "x", "y", "a", "b", "cum_distance", *extra]
        cum = self.cumulative_distance()
        a = self.columns.get("a", np.full(self.n, np.nan))
        b = self.columns.get("b", np.full(self.n, np.nan))
        lines = [",".join(header)]
        for i in range(self.n):
            row = [str(i + 1), repr(float(self.locations[i])), str(int(self.labels[i])),
                   repr(float(a[i])), repr(float(b[i])), repr(float(cum[i]))]
            row += [repr(float(self.columns[c][i])) for c in extra]
            lines.append(",".join(row))
        text = "\n".join(lines) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text
