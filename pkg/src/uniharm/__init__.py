"""Numerical univalence certificates for polyharmonic and log-p-harmonic maps of the unit disk."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    AlmansiMap,
    HarmonicComponent,
    LogPHarmonicMap,
    PointMetrics,
    PolyZZbar,
    TwoTermMap,
    metrics,
)
from .criteria import RatioKind, SupPlan, certify, sup_disk  # noqa: E402
from .oracle import univalence_verdict  # noqa: E402

__all__ = [
    "AlmansiMap", "HarmonicComponent", "LogPHarmonicMap", "PointMetrics", "PolyZZbar",
    "TwoTermMap", "metrics", "RatioKind", "SupPlan", "certify", "sup_disk",
    "univalence_verdict",
]
