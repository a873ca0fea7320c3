"""Rate-distortion-classification tradeoffs and universal representations."""

from .model import (
    CaseLabel,
    DiscreteSource,
    GaussianPair,
    RDCError,
    TradeoffCurve,
    TradeoffPoint,
    feasibility_threshold,
)

__all__ = [
    "CaseLabel",
    "DiscreteSource",
    "GaussianPair",
    "RDCError",
    "TradeoffCurve",
    "TradeoffPoint",
    "feasibility_threshold",
]
