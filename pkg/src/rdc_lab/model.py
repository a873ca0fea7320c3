"""Domain types shared by every module.

All information quantities are in nats. Differential entropies (the Gaussian
classification loss) may be negative.
"""

from __future__ import annotations

import enum
import hashlib
import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import entr

PROB_TOL = 1e-12


class RDCError(Exception):
    """Base class for all errors raised by this package."""


class NonPositiveVariance(RDCError):
    pass


class CovarianceExceedsCauchySchwarz(RDCError):
    pass


class DegenerateCorrelation(RDCError):
    pass


class InfeasibleClassification(RDCError):
    pass


class NonPositiveDistortion(RDCError):
    pass


class NegativeRate(RDCError):
    pass


class InvalidDistribution(RDCError):
    pass


class InvariantViolation(RDCError):
    """An emitted curve or report broke one of its structural invariants."""


class CaseLabel(str, enum.Enum):
    DISTORTION_ACTIVE = "DistortionActive"
    CLASSIFICATION_ACTIVE = "ClassificationActive"
    BOTH_INACTIVE = "BothInactive"
    INFEASIBLE = "Infeasible"


def entropy(p, axis: int = 0) -> np.ndarray | float:
    """Shannon entropy in nats with 0 ln 0 = 0."""
    return entr(np.asarray(p, dtype=float)).sum(axis=axis)


def gaussian_entropy(variance: float) -> float:
    return 0.5 * math.log(2.0 * math.pi * math.e * variance)


def max_workers() -> int:
    """Worker cap from ``RDC_LAB_THREADS``, defaulting to the CPU count."""
    raw = os.environ.get("RDC_LAB_THREADS", "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _frozen(a) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class GaussianPair:
    """Jointly Gaussian source ``X`` and label ``S`` with ``Cov(X, S) = theta1``."""

    mu_x: float
    sigma2_x: float
    mu_s: float
    sigma2_s: float
    theta1: float

    @property
    def rho(self) -> float:
        return self.theta1 / math.sqrt(self.sigma2_x * self.sigma2_s)

    @property
    def h_s(self) -> float:
        return gaussian_entropy(self.sigma2_s)

    @property
    def sigma_x(self) -> float:
        return math.sqrt(self.sigma2_x)

    @property
    def sigma_s(self) -> float:
        return math.sqrt(self.sigma2_s)

    def digest(self) -> str:
        return params_digest("gaussian", self.mu_x, self.sigma2_x, self.mu_s,
                             self.sigma2_s, self.theta1)


def validate_gaussian(p: GaussianPair) -> GaussianPair:
    if not (p.sigma2_x > 0 and p.sigma2_s > 0):
        raise NonPositiveVariance(
            f"variances must be positive, got sigma2_x={p.sigma2_x}, sigma2_s={p.sigma2_s}")
    if p.theta1 ** 2 > p.sigma2_x * p.sigma2_s * (1.0 + 1e-12):
        raise CovarianceExceedsCauchySchwarz(
            f"theta1^2={p.theta1 ** 2} exceeds sigma2_x*sigma2_s={p.sigma2_x * p.sigma2_s}")
    return p


def feasibility_threshold(p: GaussianPair) -> float:
    """Smallest classification loss any reconstruction can reach.

    Equals ``0.5 ln(1 - rho^2) + h(S)``; ``-inf`` when ``|rho| = 1``.
    """
    validate_gaussian(p)
    one_minus = 1.0 - p.rho ** 2
    if one_minus <= 0.0:
        return -math.inf
    return 0.5 * math.log(one_minus) + p.h_s


@dataclass(frozen=True)
class DiscreteSource:
    """Finite-alphabet source with a classifier channel and distortion matrix.

    ``T[j, i] = P(S = j | X = i)``; ``distortion[i, a]`` is the cost of
    reconstructing source letter ``i`` as reconstruction letter ``a``.
    """

    q: np.ndarray
    T: np.ndarray
    values: np.ndarray
    reconstruction_values: np.ndarray
    distortion: np.ndarray
    kind: str = "custom"

    def __post_init__(self):
        for name in ("q", "T", "values", "reconstruction_values", "distortion"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        q, T, D = self.q, self.T, self.distortion
        n = q.shape[0]
        if q.ndim != 1 or np.any(q < 0) or abs(q.sum() - 1.0) > PROB_TOL:
            raise InvalidDistribution("q must be a probability vector")
        if T.ndim != 2 or T.shape[1] != n or np.any(T < 0):
            raise InvalidDistribution(f"T must be m x {n} and nonnegative")
        if np.any(np.abs(T.sum(axis=0) - 1.0) > PROB_TOL):
            raise InvalidDistribution("every column of T must sum to 1")
        if self.values.shape != (n,):
            raise InvalidDistribution("values must have one entry per source letter")
        k = self.reconstruction_values.shape[0]
        if D.shape != (n, k) or np.any(D < 0):
            raise InvalidDistribution(f"distortion must be a nonnegative {n} x {k} matrix")
        if self.kind == "mse":
            expected = (self.values[:, None] - self.reconstruction_values[None, :]) ** 2
            if not np.allclose(D, expected, rtol=0, atol=1e-12):
                raise InvalidDistribution("MSE distortion does not match the value embedding")

    @classmethod
    def mse(cls, q, T, values, reconstruction_values=None) -> "DiscreteSource":
        values = np.asarray(values, dtype=float)
        recon = values if reconstruction_values is None else np.asarray(reconstruction_values, float)
        dist = (values[:, None] - recon[None, :]) ** 2
        return cls(q, T, values, recon, dist, kind="mse")

    @classmethod
    def hamming(cls, q, T, values=None) -> "DiscreteSource":
        n = len(q)
        values = np.arange(n, dtype=float) if values is None else np.asarray(values, float)
        return cls(q, T, values, values, 1.0 - np.eye(n), kind="hamming")

    @property
    def n(self) -> int:
        return self.q.shape[0]

    @property
    def k(self) -> int:
        return self.reconstruction_values.shape[0]

    @property
    def source_entropy(self) -> float:
        return float(entropy(self.q))

    @property
    def label_entropy(self) -> float:
        """H(S)."""
        return float(entropy(self.T @ self.q))

    @property
    def label_equivocation(self) -> float:
        """H(S|X), the smallest classification loss any decoder can reach."""
        return float(self.q @ entropy(self.T, axis=0))

    def digest(self) -> str:
        return params_digest("discrete", self.q.tolist(), self.T.tolist(), self.values.tolist(),
                             self.reconstruction_values.tolist(), self.distortion.tolist())


@dataclass(frozen=True)
class TradeoffPoint:
    D: float
    C: float
    R: float
    case_label: CaseLabel

    def __post_init__(self):
        if self.R < 0 or self.D < 0:
            raise InvariantViolation(f"negative rate or distortion in {self}")


@dataclass(frozen=True)
class TradeoffCurve:
    points: tuple[TradeoffPoint, ...]
    sweep_axis: str
    params_digest: str
    tolerance: float = field(default=1e-12, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if self.sweep_axis not in ("C", "D", "R"):
            raise ValueError(f"unknown sweep axis {self.sweep_axis!r}")
        keys = [getattr(pt, self.sweep_axis) for pt in self.points]
        if any(b < a for a, b in zip(keys, keys[1:])):
            raise InvariantViolation(f"points are not sorted by {self.sweep_axis}")

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(pt, name) for pt in self.points], dtype=float)

    def check_monotone(self) -> float:
        """Largest increase of the dependent coordinate along the sweep.

        Along a C- or R-sweep the distortion must not increase; along a
        D-sweep the rate must not increase.
        """
        dep = "R" if self.sweep_axis == "D" else "D"
        vals = self.column(dep)
        finite = vals[np.isfinite(vals)]
        if finite.size < 2:
            return 0.0
        return float(max(0.0, np.max(np.diff(finite))))

    def validate(self) -> "TradeoffCurve":
        worst = self.check_monotone()
        if worst > self.tolerance:
            raise InvariantViolation(
                f"curve is not monotone along {self.sweep_axis}: increase {worst:.3e}")
        return self


def params_digest(*parts) -> str:
    return hashlib.sha256(repr(parts).encode()).hexdigest()[:16]


def as_probability(p: Sequence[float], name: str = "distribution") -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 1 or np.any(arr < 0) or abs(arr.sum() - 1.0) > 1e-10:
        raise InvalidDistribution(f"{name} must be a nonnegative vector summing to 1")
    return arr
