"""Closed-form rate/distortion/classification tradeoffs for a scalar Gaussian source.

Everything here assumes MSE distortion, classification loss ``H(S | Xhat)``
and a reconstruction that is jointly Gaussian with ``X`` with matched mean.
The reconstruction is then summarised by its variance ``sigma2_xhat`` and its
covariance ``theta2`` with ``X``, and

    I(X; Xhat)  = -0.5 ln(1 - theta2^2 / (sigma2_x sigma2_xhat))
    H(S | Xhat) = h(S) + 0.5 ln(1 - rho^2 theta2^2 / (sigma2_x sigma2_xhat))
    E(X-Xhat)^2 = sigma2_x + sigma2_xhat - 2 theta2
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    CaseLabel,
    GaussianPair,
    InfeasibleClassification,
    NegativeRate,
    NonPositiveDistortion,
    RDCError,
    TradeoffCurve,
    TradeoffPoint,
    feasibility_threshold,
    validate_gaussian,
)

FEAS_TOL = 1e-12


class InfeasibleOnGrid(RDCError):
    pass


@dataclass(frozen=True)
class GaussianOptimum:
    """Witnessing reconstruction of a closed-form optimum.

    ``rate``, ``distortion`` and ``class_loss`` are the values the witness
    ``(sigma2_xhat, theta2)`` actually attains, recomputed from its
    second-order statistics.
    """

    sigma2_xhat: float
    theta2: float
    rate: float
    distortion: float
    class_loss: float
    case_label: CaseLabel


def _witness(p: GaussianPair, sigma2_xhat: float, theta2: float, label: CaseLabel,
             distortion: float | None = None) -> GaussianOptimum:
    corr2 = 0.0 if sigma2_xhat <= 0 else min(1.0, theta2 ** 2 / (p.sigma2_x * sigma2_xhat))
    rate = -0.5 * math.log1p(-corr2) if corr2 < 1.0 else math.inf
    class_loss = p.h_s + 0.5 * math.log1p(-p.rho ** 2 * corr2) if p.rho ** 2 * corr2 < 1 else -math.inf
    if distortion is None:
        distortion = p.sigma2_x + sigma2_xhat - 2.0 * theta2
    return GaussianOptimum(sigma2_xhat, theta2, max(rate, 0.0), distortion, class_loss, label)


def _check_class(p: GaussianPair, C: float) -> None:
    c_min = feasibility_threshold(p)
    if C < c_min - FEAS_TOL:
        raise InfeasibleClassification(f"C={C} is below the feasibility threshold {c_min}")


def _label_gap(p: GaussianPair, C: float) -> float:
    """1 - exp(2C - 2h(S)): the squared label correlation the reconstruction must carry."""
    return -math.expm1(2.0 * C - 2.0 * p.h_s)


def min_class_loss(p: GaussianPair, R: float) -> float:
    """Smallest ``H(S | Xhat)`` reachable with ``I(X; Xhat) <= R``.

    This is also the case-1 boundary of the distortion-classification-rate
    function: at or above it the classification constraint is slack.
    """
    validate_gaussian(p)
    if R < 0:
        raise NegativeRate(f"rate must be nonnegative, got {R}")
    return p.h_s + 0.5 * math.log1p(p.rho ** 2 * math.expm1(-2.0 * R))


def rate_of(p: GaussianPair, D: float, C: float) -> GaussianOptimum:
    """Minimal rate ``R(D, C)`` and its witness."""
    validate_gaussian(p)
    if not D > 0:
        raise NonPositiveDistortion(f"distortion must be positive, got {D}")
    _check_class(p, C)
    s2 = p.sigma2_x
    if C > p.h_s and D > s2:
        return GaussianOptimum(0.0, 0.0, 0.0, s2, p.h_s, CaseLabel.BOTH_INACTIVE)
    gap = _label_gap(p, C)
    if p.rho == 0.0:
        # C >= h(S) here; only the distortion constraint can bind
        d_boundary = math.inf
    else:
        d_boundary = s2 * (1.0 - gap / p.rho ** 2)
    if D <= d_boundary:
        if D >= s2:
            return GaussianOptimum(0.0, 0.0, 0.0, s2, p.h_s, CaseLabel.BOTH_INACTIVE)
        opt = _witness(p, s2 - D, s2 - D, CaseLabel.DISTORTION_ACTIVE)
        return GaussianOptimum(opt.sigma2_xhat, opt.theta2, 0.5 * math.log(s2 / D), D,
                               opt.class_loss, opt.case_label)
    needed = gap / p.rho ** 2
    rate = -0.5 * math.log1p(-needed) if needed < 1.0 else math.inf
    var = p.sigma2_s * s2 ** 2 * gap / p.theta1 ** 2
    opt = _witness(p, var, var, CaseLabel.CLASSIFICATION_ACTIVE)
    return GaussianOptimum(var, var, rate, opt.distortion, opt.class_loss, opt.case_label)


def distortion_of(p: GaussianPair, C: float, R: float) -> GaussianOptimum:
    """Three-case closed form of ``D(C, R)`` as published.

    Case 1 (``C`` at or above :func:`min_class_loss`) is the Shannon value
    ``sigma2_x e^{-2R}``. Case 2 assigns the reconstruction the variance
    demanded by ``C`` and the correlation allowed by ``R``; the returned
    witness reports the classification loss that reconstruction really has,
    which exceeds ``C`` throughout case 2 (see :func:`exact_distortion`).
    Case 3 (``C > h(S)``) only differs from case 1 at ``R = 0``.
    """
    validate_gaussian(p)
    if R < 0:
        raise NegativeRate(f"rate must be nonnegative, got {R}")
    _check_class(p, C)
    s2 = p.sigma2_x
    v = -math.expm1(-2.0 * R)
    if C > p.h_s and R == 0.0:
        return GaussianOptimum(0.0, 0.0, 0.0, s2, p.h_s, CaseLabel.BOTH_INACTIVE)
    if C >= min_class_loss(p, R):
        return _witness(p, s2 * v, s2 * v, CaseLabel.DISTORTION_ACTIVE, s2 * math.exp(-2.0 * R))
    gap = _label_gap(p, C)
    var = p.sigma2_s * s2 ** 2 * gap / p.theta1 ** 2
    D = (s2 + var
         - 2.0 * p.sigma_s * p.sigma_x ** 3 * math.sqrt(gap * v) / abs(p.theta1))
    theta2 = p.sigma_x * math.sqrt(var * v)
    return _witness(p, var, theta2, CaseLabel.CLASSIFICATION_ACTIVE, D)


def exact_distortion(p: GaussianPair, C: float, R: float) -> float:
    """Constrained minimum distortion, ``inf`` where no reconstruction exists.

    With ``S - X - Xhat`` jointly Gaussian the squared label correlation is
    ``rho^2`` times the squared source correlation, so the rate budget caps
    how small ``H(S | Xhat)`` can be; below :func:`min_class_loss` the problem
    is infeasible and above it the Shannon value is attained.
    """
    validate_gaussian(p)
    if R < 0:
        raise NegativeRate(f"rate must be nonnegative, got {R}")
    if C < min_class_loss(p, R) - FEAS_TOL:
        return math.inf
    return p.sigma2_x * math.exp(-2.0 * R)


def sample_dcr_curve(p: GaussianPair, R: float, num_points: int,
                     margin: float = 0.25) -> TradeoffCurve:
    """D(C, R) at fixed rate for ``C`` from the feasibility threshold to ``h(S) + margin``."""
    if num_points < 2:
        raise ValueError("num_points must be at least 2")
    if R < 0:
        raise NegativeRate(f"rate must be nonnegative, got {R}")
    c_lo = feasibility_threshold(p)
    if not math.isfinite(c_lo):
        raise InfeasibleClassification("|rho| = 1 has no finite feasibility threshold")
    cs = np.linspace(c_lo, p.h_s + margin, num_points)
    points = []
    for C in cs:
        opt = distortion_of(p, float(C), R)
        points.append(TradeoffPoint(opt.distortion, float(C), R, opt.case_label))
    return TradeoffCurve(points, "C", p.digest()).validate()


def sample_rdc_curve(p: GaussianPair, C: float, num_points: int,
                     d_max_factor: float = 1.25) -> TradeoffCurve:
    """R(D, C) at fixed classification level for ``D`` up to ``d_max_factor * sigma2_x``."""
    if num_points < 2:
        raise ValueError("num_points must be at least 2")
    ds = np.linspace(p.sigma2_x / num_points, d_max_factor * p.sigma2_x, num_points)
    points = []
    for D in ds:
        opt = rate_of(p, float(D), C)
        points.append(TradeoffPoint(float(D), C, opt.rate, opt.case_label))
    return TradeoffCurve(points, "D", p.digest()).validate()


def numeric_oracle(p: GaussianPair, C: float, R: float, grid: int = 200,
                   rounds: int = 5) -> float:
    """Brute-force ``D(C, R)`` over jointly Gaussian reconstructions.

    Searches the standard deviation ``s`` of the reconstruction on
    ``[0, 3 sigma_x]`` and its correlation ``t`` with ``X`` (so
    ``theta2 = t sigma_x s``). Both constraints depend on ``t`` alone, so the
    ``t`` axis is restricted to the interval they allow; the grid is then
    zoomed 10x around the incumbent for ``rounds`` rounds. Shares no code
    with the closed forms.
    """
    if grid < 100:
        raise ValueError("grid must be at least 100")
    validate_gaussian(p)
    sx, s2 = p.sigma_x, p.sigma2_x
    rho2 = p.rho ** 2
    t2_max = -np.expm1(-2.0 * R)
    need = -np.expm1(2.0 * C - 2.0 * p.h_s)

    t_min = math.sqrt(min(1.0, max(need, 0.0) / rho2)) if rho2 > 0 else (0.0 if need <= 0 else 2.0)
    t_max = math.sqrt(max(t2_max, 0.0))
    if t_min > t_max * (1.0 + 1e-15):
        raise InfeasibleOnGrid(f"no reconstruction satisfies C={C}, R={R}")
    t_floor, t_ceil = t_min, max(t_min, t_max)
    s_lo, s_hi, t_lo, t_hi = 0.0, 3.0 * sx, t_floor, t_ceil
    best = None
    for _ in range(rounds + 1):
        s = np.linspace(s_lo, s_hi, grid + 1)[:, None]
        # descending, so ties (e.g. at s = 0) go to the largest t, which is never worse
        t = np.linspace(t_hi, t_lo, grid + 1)[None, :]
        ok = np.broadcast_to(s >= 0, (grid + 1, grid + 1))
        if not ok.any():
            if best is None:
                raise InfeasibleOnGrid(f"no grid point satisfies C={C}, R={R}")
            break
        obj = np.where(ok, s2 + s ** 2 - 2.0 * t * sx * s, np.inf)
        i, j = np.unravel_index(np.argmin(obj), obj.shape)
        val = float(obj[i, j])
        if best is None or val < best[0]:
            best = (val, float(s[i, 0]), float(t[0, j]))
        _, s_c, t_c = best
        ds, dt = (s_hi - s_lo) / 20.0, (t_hi - t_lo) / 20.0
        s_lo, s_hi = max(0.0, s_c - ds), s_c + ds
        t_lo, t_hi = max(t_floor, t_c - dt), min(t_ceil, t_c + dt)
    return best[0]
