"""Synthetic regions with known boundaries, and strip layouts over them.

Every raster stores its analytic parameters in ``meta`` so that the field can
be evaluated off-grid with :func:`analytic_field`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigurationError
from .oracle import RegionRaster

SHAPES = ("half_plane", "smooth_blob", "two_fragment")


@dataclass(frozen=True)
class RegionSpec:
    """Shape parameters of a synthetic region.

    Lengths ``semi_axes`` and ``center`` are fractions of the raster width and
    height. ``amplitude`` scales the radial perturbation of the ellipse, which
    is a sum of cosines of orders ``harmonics`` with phases drawn from ``seed``.
    """

    shape: str = "smooth_blob"
    ncols: int = 800
    nrows: int = 400
    cell_size: float = 100.0
    semi_axes: tuple[float, float] = (0.35, 0.4)
    center: tuple[float, float] = (0.5, 0.5)
    amplitude: float = 0.08
    harmonics: tuple[int, ...] = (2, 3)
    axis: str = "x"

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ConfigurationError(f"unknown shape {self.shape!r}; choose from {SHAPES}")
        if self.ncols < 2 or self.nrows < 2 or not self.cell_size > 0:
            raise ConfigurationError("raster needs at least 2x2 cells of positive size")
        if not 0 <= self.amplitude < 0.5:
            raise ConfigurationError("amplitude must lie in [0, 0.5)")
        if self.axis not in ("x", "y"):
            raise ConfigurationError("axis is 'x' or 'y'")


def _phases(harmonics, seed: int) -> list[float]:
    rng = np.random.default_rng(seed)
    return [float(v) for v in rng.uniform(0.0, 2.0 * math.pi, len(harmonics))]


def analytic_field(meta: dict, x, y):
    """Field value at planar points from the stored region parameters.

    Half planes read ``coordinate - boundary`` (label 1 on the low side).
    Blobs read ``1 - s**2`` with ``s`` the perturbed normalized radius, so the
    outside (``s >= 1``) has label 1 at threshold 0.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if meta["shape"] == "half_plane":
        return (x if meta["axis"] == "x" else y) - meta["boundary"]
    cx, cy = meta["center_m"]
    a, b = meta["semi_axes_m"]
    dx, dy = (x - cx) / a, (y - cy) / b
    r = np.hypot(dx, dy)
    ang = np.arctan2(dy, dx)
    pert = np.zeros_like(r)
    for k, ph in zip(meta["harmonics"], meta["phases"]):
        pert = pert + np.cos(k * ang + ph)
    pert = pert / max(len(meta["harmonics"]), 1)
    s = r / (1.0 + meta["amplitude"] * pert)
    return 1.0 - s * s


def make_synthetic_region(spec: RegionSpec = RegionSpec(), seed: int = 0) -> RegionRaster:
    """Deterministic raster for ``spec``; the same seed gives the same phases."""
    width, height = spec.ncols * spec.cell_size, spec.nrows * spec.cell_size
    meta: dict = {"shape": spec.shape, "seed": int(seed), "spec": asdict(spec)}
    if spec.shape == "half_plane":
        meta.update(axis=spec.axis, boundary=0.5 * (width if spec.axis == "x" else height))
    else:
        meta.update(
            center_m=(spec.center[0] * width, spec.center[1] * height),
            semi_axes_m=(spec.semi_axes[0] * width, spec.semi_axes[1] * height),
            amplitude=spec.amplitude,
            harmonics=list(spec.harmonics),
            phases=_phases(spec.harmonics, seed),
        )
    region = RegionRaster(np.zeros((spec.nrows, spec.ncols)), spec.cell_size, (0.0, 0.0), 0.0, meta)
    xs, ys = region.cell_centers()
    region.values = analytic_field(meta, xs, ys)
    return region


@dataclass
class StripPlan:
    """Ordered transects in meters.

    ``traversal_order`` lists transect indices in visiting order; ``groups``
    tags each transect (e.g. ``upper``/``lower``) so that Lipschitz constants
    can be set per group.
    """

    transects: list[tuple[tuple[float, float], tuple[float, float]]]
    spacing: float
    traversal_order: list[int] | None = None
    groups: list[str] = field(default_factory=list)

    def __post_init__(self):
        if len(self.transects) < 2:
            raise ConfigurationError("a strip plan needs at least two transects")
        if not self.spacing > 0:
            raise ConfigurationError("strip spacing must be positive")
        if self.traversal_order is None:
            self.traversal_order = list(range(len(self.transects)))
        if sorted(self.traversal_order) != list(range(len(self.transects))):
            raise ConfigurationError("traversal_order must be a permutation of the transect indices")
        if not self.groups:
            self.groups = ["all"] * len(self.transects)

    @property
    def K(self) -> int:
        return len(self.transects)

    def point(self, k: int, t: float) -> tuple[float, float]:
        (x0, y0), (x1, y1) = self.transects[k]
        return x0 + t * (x1 - x0), y0 + t * (y1 - y0)

    def length(self, k: int) -> float:
        return math.dist(*self.transects[k])

    def to_dict(self) -> dict:
        return {
            "transects": [[list(s), list(e)] for s, e in self.transects],
            "spacing": self.spacing,
            "traversal_order": self.traversal_order,
            "groups": self.groups,
        }

    @classmethod
    def from_dict(cls, d: dict) -> StripPlan:
        tr = [(tuple(map(float, s)), tuple(map(float, e))) for s, e in d["transects"]]
        return cls(tr, float(d["spacing"]), d.get("traversal_order"), list(d.get("groups", [])))


def _span(region: RegionRaster, span: float) -> tuple[float, float]:
    meta = region.meta
    if meta.get("shape") in ("smooth_blob", "two_fragment"):
        cx = meta["center_m"][0]
        half = span * meta["semi_axes_m"][0]
    else:
        x0, x1, _, _ = region.extent
        cx, half = 0.5 * (x0 + x1), 0.5 * span * (x1 - x0)
    return cx - half, cx + half


def auto_layout(region: RegionRaster, K: int = 11, fragment: str | None = None, span: float = 0.7) -> StripPlan:
    """Evenly spaced transects over the central ``span`` of the region.

    Half planes along ``x`` get horizontal transects from the west edge to the
    east edge (vertical boundaries are crossed once). Otherwise transects are
    vertical: ``upper`` runs from the north edge down to the center line,
    ``lower`` from the south edge up to it, and ``both`` (the default for
    ``two_fragment``) splits ``K`` between the halves and orders them
    counterclockwise: upper strips east to west, then lower strips west to east.
    """
    if K < 2:
        raise ConfigurationError("K must be >= 2")
    xmin, xmax, ymin, ymax = region.extent
    meta = region.meta
    shape = meta.get("shape")
    if shape == "half_plane" and meta.get("axis") == "x":
        ys = np.linspace(ymin, ymax, K + 2)[1:-1]
        tr = [((xmin, float(y)), (xmax, float(y))) for y in ys]
        return StripPlan(tr, float(ys[1] - ys[0]))
    if fragment is None:
        fragment = "both" if shape == "two_fragment" else "upper"
    if fragment not in ("upper", "lower", "both"):
        raise ConfigurationError("fragment is 'upper', 'lower' or 'both'")
    mid = meta["center_m"][1] if "center_m" in meta else 0.5 * (ymin + ymax)
    lo, hi = _span(region, span) if shape != "half_plane" else (xmin + 0.5 * (1 - span) * (xmax - xmin),
                                                                  xmax - 0.5 * (1 - span) * (xmax - xmin))
    if fragment != "both":
        xs = np.linspace(lo, hi, K)
        y0 = ymax if fragment == "upper" else ymin
        tr = [((float(x), y0), (float(x), mid)) for x in xs]
        return StripPlan(tr, float(xs[1] - xs[0]), groups=[fragment] * K)
    ku = (K + 1) // 2
    kl = K - ku
    if kl < 1:
        raise ConfigurationError("K must be >= 2 for a two-fragment plan")
    xu = np.linspace(lo, hi, ku)
    xl = np.linspace(lo, hi, kl) if kl > 1 else np.array([0.5 * (lo + hi)])
    tr = [((float(x), ymax), (float(x), mid)) for x in xu]
    tr += [((float(x), ymin), (float(x), mid)) for x in xl]
    order = list(range(ku - 1, -1, -1)) + list(range(ku, ku + kl))
    spacing = float(xu[1] - xu[0]) if ku > 1 else float(hi - lo)
    return StripPlan(tr, spacing, order, ["upper"] * ku + ["lower"] * kl)
