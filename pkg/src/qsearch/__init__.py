"""Travel-aware change point search on the unit interval and strip-based
boundary estimation in the plane."""

from .deterministic import bisection, dqs, dqs_with_init
from .oracle import RegionRaster, StepOracle, TransectOracle
from .posterior import PosteriorGrid
from .proactive import ProactiveConfig, proactive
from .probabilistic import ProbSearchConfig, pbs, pqs, tpqs
from .theory import CostModel
from .trace import SearchTrace

__all__ = [
    "CostModel", "PosteriorGrid", "ProactiveConfig", "ProbSearchConfig", "RegionRaster",
    "SearchTrace", "StepOracle", "TransectOracle", "bisection", "dqs", "dqs_with_init",
    "pbs", "pqs", "proactive", "tpqs",
]
__version__ = "0.1.0"
