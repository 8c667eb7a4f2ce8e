"""Measurement environments: the hidden step function and raster transects.

Every noisy measurement consumes exactly one uniform draw from the oracle's
generator, also when ``p == 0``, so traces taken with a shared seed line up
across noise levels.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DomainError, ExtentError

_HEADER_KEYS = ("ncols", "nrows", "xll", "yll", "cellsize", "threshold")


def _meta_path(path: str | Path) -> Path:
    return Path(str(path) + ".meta.json")


def _check_p(p: float) -> None:
    if not 0.0 <= p < 0.5:
        raise ConfigurationError(f"flip probability must lie in [0, 0.5), got {p}")


@dataclass
class StepOracle:
    """Noisy step function ``f(x) = 1{x < theta}`` on the unit interval.

    Parameters
    ----------
    theta : float
        Change point in [0, 1].
    p : float
        Probability that a label is flipped, in [0, 0.5).
    rng_seed : int
        Seed for the label-noise stream.
    """

    theta: float
    p: float = 0.0
    rng_seed: int = 0
    n_measurements: int = field(default=0, init=False)

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta <= 1.0:
            raise ConfigurationError(f"theta must lie in [0, 1], got {self.theta}")
        _check_p(self.p)
        self._rng = np.random.default_rng(self.rng_seed)

    def label(self, x: float) -> int:
        """Noiseless label at ``x``."""
        return 1 if x < self.theta else 0

    def measure(self, x: float) -> int:
        if not 0.0 <= x <= 1.0:
            raise DomainError(f"query location {x} outside [0, 1]")
        flip = self._rng.random() < self.p
        self.n_measurements += 1
        return self.label(x) ^ int(flip)

    # Block access for the compiled search loops. The stream is peeked without
    # advancing, then exactly the consumed prefix is committed.
    def _peek_uniforms(self, k: int) -> np.ndarray:
        state = self._rng.bit_generator.state
        u = self._rng.random(k)
        self._rng.bit_generator.state = state
        return u

    def _commit(self, n: int) -> None:
        if n:
            self._rng.random(n)
        self.n_measurements += n


@dataclass
class RegionRaster:
    """Scalar field on a regular grid; label 1 where the value does not exceed
    the threshold.

    ``values`` has shape ``(nrows, ncols)``; row 0 is the northernmost row, as in
    ESRI ASCII grids. ``origin`` is the lower-left corner in meters.
    """

    values: np.ndarray
    cell_size: float
    origin: tuple[float, float] = (0.0, 0.0)
    threshold: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ConfigurationError("raster values must be two-dimensional")
        if not self.cell_size > 0:
            raise ConfigurationError("cell_size must be positive")
        self.origin = (float(self.origin[0]), float(self.origin[1]))

    @property
    def nrows(self) -> int:
        return self.values.shape[0]

    @property
    def ncols(self) -> int:
        return self.values.shape[1]

    @property
    def width(self) -> float:
        return self.ncols * self.cell_size

    @property
    def height(self) -> float:
        return self.nrows * self.cell_size

    @property
    def extent(self) -> tuple[float, float, float, float]:
        """``(xmin, xmax, ymin, ymax)`` in meters."""
        x0, y0 = self.origin
        return x0, x0 + self.width, y0, y0 + self.height

    def cell_index(self, x, y):
        """Nearest-cell ``(row, col)`` for planar points (vectorized)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        x0, y0 = self.origin
        cx = (x - x0) / self.cell_size
        cy = (y - y0) / self.cell_size
        tol = 1e-9
        if np.any(cx < -tol) or np.any(cx > self.ncols + tol) or np.any(cy < -tol) or np.any(cy > self.nrows + tol):
            raise ExtentError("point outside raster extent")
        col = np.clip(np.floor(cx).astype(int), 0, self.ncols - 1)
        row_up = np.clip(np.floor(cy).astype(int), 0, self.nrows - 1)
        return self.nrows - 1 - row_up, col

    def value_at(self, x, y):
        row, col = self.cell_index(x, y)
        return self.values[row, col]

    def label_at(self, x, y):
        """Noiseless label(s) at planar point(s): 1 iff value <= threshold."""
        lab = (self.value_at(x, y) <= self.threshold).astype(int)
        return int(lab) if lab.ndim == 0 else lab

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-center coordinate grids shaped like ``values``."""
        x0, y0 = self.origin
        xs = x0 + (np.arange(self.ncols) + 0.5) * self.cell_size
        ys = y0 + (self.nrows - np.arange(self.nrows) - 0.5) * self.cell_size
        return np.meshgrid(xs, ys)

    def save(self, path: str | Path) -> None:
        x0, y0 = self.origin
        lines = [
            f"ncols {self.ncols}",
            f"nrows {self.nrows}",
            f"xll {x0!r}",
            f"yll {y0!r}",
            f"cellsize {self.cell_size!r}",
            f"threshold {self.threshold!r}",
        ]
        lines += [" ".join(repr(float(v)) for v in row) for row in self.values]
        Path(path).write_text("\n".join(lines) + "\n")
        if self.meta:
            _meta_path(path).write_text(json.dumps(self.meta, indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> RegionRaster:
        """Read the plain-text raster format (six header lines, then rows).

        Region parameters are restored from the ``.meta.json`` sidecar when
        one sits next to the file.
        """
        text = Path(path).read_text().split("\n")
        header: dict[str, float] = {}
        i = 0
        while len(header) < len(_HEADER_KEYS):
            if i >= len(text):
                raise ConfigurationError(f"{path}: truncated raster header")
            parts = text[i].split()
            i += 1
            if not parts:
                continue
            key = parts[0].lower()
            if key not in _HEADER_KEYS or len(parts) != 2:
                raise ConfigurationError(f"{path}: unexpected header line {text[i - 1]!r}")
            header[key] = float(parts[1])
        ncols, nrows = int(header["ncols"]), int(header["nrows"])
        rows = [line.split() for line in text[i:] if line.strip()]
        values = np.array(rows, dtype=float)
        if values.shape != (nrows, ncols):
            raise ConfigurationError(f"{path}: expected {nrows}x{ncols} values, found {values.shape}")
        mp = _meta_path(path)
        meta = json.loads(mp.read_text()) if mp.exists() else {}
        return cls(values, header["cellsize"], (header["xll"], header["yll"]), header["threshold"], meta)


@dataclass
class TransectOracle:
    """Step-function view of a raster along the segment ``start -> end``.

    A query at ``t`` looks up the nearest cell of ``start + t (end - start)``.
    With ``complement`` set, labels are inverted so that the start reads 1.
    """

    region: RegionRaster
    start: tuple[float, float]
    end: tuple[float, float]
    p: float = 0.0
    rng_seed: int = 0
    complement: bool = False
    n_measurements: int = field(default=0, init=False)

    def __post_init__(self) -> None:
        _check_p(self.p)
        self.start = (float(self.start[0]), float(self.start[1]))
        self.end = (float(self.end[0]), float(self.end[1]))
        self._rng = np.random.default_rng(self.rng_seed)
        # fail early if the transect leaves the raster
        self.region.cell_index([self.start[0], self.end[0]], [self.start[1], self.end[1]])

    @classmethod
    def oriented(cls, region, start, end, p=0.0, rng_seed=0) -> TransectOracle:
        """Build an oracle whose noiseless label at ``t = 0`` is 1."""
        probe = cls(region, start, end, 0.0, 0)
        return cls(region, start, end, p, rng_seed, complement=probe.label(0.0) == 0)

    @property
    def length(self) -> float:
        return math.dist(self.start, self.end)

    def point(self, t):
        t = np.asarray(t, dtype=float)
        x = self.start[0] + t * (self.end[0] - self.start[0])
        y = self.start[1] + t * (self.end[1] - self.start[1])
        return x, y

    def label(self, t):
        lab = self.region.label_at(*self.point(t))
        return 1 - lab if self.complement else lab

    def measure(self, t: float) -> int:
        if not 0.0 <= t <= 1.0:
            raise DomainError(f"query location {t} outside [0, 1]")
        flip = self._rng.random() < self.p
        self.n_measurements += 1
        return int(self.label(t)) ^ int(flip)

    def default_resolution(self) -> int:
        return max(64, int(math.ceil(4 * self.length / self.region.cell_size)))


def _scan(oracle: TransectOracle, resolution: int | None):
    n = resolution or oracle.default_resolution()
    t = np.linspace(0.0, 1.0, n + 1)
    return t, np.asarray(oracle.label(t))


def validate_single_crossing(oracle: TransectOracle, resolution: int | None = None) -> int:
    """Number of noiseless label changes along a dense scan of the transect.

    1 means the strip obeys the step-function model; 0 or >= 2 are reported,
    never raised.
    """
    _, lab = _scan(oracle, resolution)
    return int(np.count_nonzero(np.diff(lab)))


def scan_change_point(oracle: TransectOracle, resolution: int | None = None, tol: float = 1e-12) -> float:
    """Ground-truth change point of a transect by dense scan plus bisection.

    Returns the location of the first label change, refined to ``tol``. With
    no change the result is 1 if the strip reads all 1 and 0 otherwise.
    """
    t, lab = _scan(oracle, resolution)
    changes = np.flatnonzero(np.diff(lab))
    if changes.size == 0:
        return 1.0 if lab[0] == 1 else 0.0
    i = changes[0]
    lo, hi = t[i], t[i + 1]
    left = lab[i]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if oracle.label(mid) == left:
            lo = mid
        else:
            hi = mid
    # labels switch at hi (right-open indicator convention)
    return float(hi)
