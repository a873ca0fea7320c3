"""Squared 2-Wasserstein distance between scalar distributions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import RDCError

MASS_TOL = 1e-10


class UnbalancedMasses(RDCError):
    pass


class NegativeVariance(RDCError):
    pass


@dataclass(frozen=True)
class TransportPlan:
    coupling: np.ndarray  # coupling[i, j] moves mass from xs[i] to ys[j]
    cost: float


def _check(weights, name):
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or np.any(w < 0) or abs(w.sum() - 1.0) > MASS_TOL:
        raise UnbalancedMasses(f"{name} weights must be nonnegative and sum to 1")
    return w


def w2_discrete(xs, px, ys, py) -> TransportPlan:
    """Optimal coupling for squared distance via the sorted (quantile) pairing.

    For a convex cost on the line the monotone coupling is optimal, so the
    plan is the north-west corner rule applied after sorting both supports.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    px = _check(px, "source")
    py = _check(py, "target")
    if xs.shape != px.shape or ys.shape != py.shape:
        raise ValueError("support and weight vectors must have matching lengths")
    ox = np.argsort(xs, kind="stable")
    oy = np.argsort(ys, kind="stable")
    F = np.cumsum(px[ox])
    G = np.cumsum(py[oy])
    F[-1] = G[-1] = 1.0
    # quantile levels where either cumulative distribution jumps
    t = np.union1d(np.concatenate([[0.0], F]), G)
    t = t[(t >= 0.0) & (t <= 1.0)]
    mass = np.diff(t)
    mid = 0.5 * (t[:-1] + t[1:])
    i = np.minimum(np.searchsorted(F, mid, side="right"), xs.size - 1)
    j = np.minimum(np.searchsorted(G, mid, side="right"), ys.size - 1)
    plan = np.zeros((xs.size, ys.size))
    np.add.at(plan, (ox[i], oy[j]), mass)
    cost = float(np.sum(plan * (xs[:, None] - ys[None, :]) ** 2))
    return TransportPlan(plan, max(cost, 0.0))


def w2_gaussian(mu1: float, s2_1: float, mu2: float, s2_2: float) -> float:
    if s2_1 < 0 or s2_2 < 0:
        raise NegativeVariance("variances must be nonnegative")
    return (mu1 - mu2) ** 2 + (math.sqrt(s2_1) - math.sqrt(s2_2)) ** 2
