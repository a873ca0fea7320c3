"""One Gaussian representation shared by every (D, C) target, with per-target decoders.

The representation ``Z`` is jointly Gaussian with ``X`` (and, through ``X``,
with ``S``); it is normalised to ``mu_z = 0``, ``sigma2_z = 1``. A decoder is
the affine map ``Xhat = sign * gamma * (Z - mu_z) + mu_x`` plus optional
independent Gaussian noise of variance ``noise_var``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .gaussian_rdc import distortion_of, min_class_loss, sample_dcr_curve
from .model import (
    GaussianPair,
    InfeasibleClassification,
    NegativeRate,
    RDCError,
    feasibility_threshold,
    validate_gaussian,
)

PAIR_TOL = 1e-9


class InfeasiblePair(RDCError):
    pass


@dataclass(frozen=True)
class GaussianRepresentation:
    rho_xz: float
    mu_z: float = 0.0
    sigma2_z: float = 1.0

    @property
    def rate(self) -> float:
        return -0.5 * math.log1p(-self.rho_xz ** 2) if abs(self.rho_xz) < 1 else math.inf


@dataclass(frozen=True)
class UniversalDecoder:
    gamma: float
    sign: int
    mu_z: float
    mu_x: float
    target_D: float
    target_C: float
    noise_var: float = 0.0

    def __call__(self, z):
        return self.sign * self.gamma * (np.asarray(z) - self.mu_z) + self.mu_x


class Performance(NamedTuple):
    D: float
    C: float


def build_representation(p: GaussianPair, R: float) -> GaussianRepresentation:
    """Representation with ``I(X; Z) = R``, i.e. ``rho_xz^2 = 1 - e^{-2R}``."""
    validate_gaussian(p)
    if R < 0:
        raise NegativeRate(f"rate must be nonnegative, got {R}")
    return GaussianRepresentation(rho_xz=math.sqrt(-math.expm1(-2.0 * R)))


def _cov_xz(p: GaussianPair, z: GaussianRepresentation) -> float:
    return z.rho_xz * p.sigma_x * math.sqrt(z.sigma2_z)


def decoder_for(p: GaussianPair, z: GaussianRepresentation, D: float,
                C: float) -> UniversalDecoder:
    """Affine decoder whose output variance is the one demanded by the target ``C``.

    ``gamma = sigma_s sigma_x^2 sqrt(1 - e^{2C - 2h(S)}) / (|theta1| sigma_z)``.
    The resulting distortion equals the case-2 closed form evaluated at the
    representation's own rate; see :func:`analytic_performance` for what the
    decoder actually achieves.
    """
    validate_gaussian(p)
    c_min = feasibility_threshold(p)
    if C < c_min - PAIR_TOL:
        raise InfeasibleClassification(f"C={C} is below the feasibility threshold {c_min}")
    boundary = distortion_of(p, C, z.rate).distortion
    if D < boundary - PAIR_TOL:
        raise InfeasiblePair(f"(D={D}, C={C}) lies below the boundary value {boundary}")
    gap = max(0.0, -math.expm1(2.0 * C - 2.0 * p.h_s))
    if p.theta1 == 0.0:
        gamma = 0.0
    else:
        gamma = p.sigma_s * p.sigma2_x * math.sqrt(gap) / (abs(p.theta1) * math.sqrt(z.sigma2_z))
    sign = 1 if z.rho_xz >= 0 else -1
    return UniversalDecoder(gamma, sign, z.mu_z, p.mu_x, D, C)


def distortion_matching_decoder(p: GaussianPair, z: GaussianRepresentation, D: float,
                                C: float | None = None) -> UniversalDecoder:
    """Noise-free decoder whose distortion is exactly ``D``.

    Takes the smaller root of ``sigma2_x + g^2 sigma2_z - 2 g |Cov(X, Z)| = D``;
    needs ``D >= sigma2_x (1 - rho_xz^2)``. ``D >= sigma2_x`` gives ``gamma = 0``.
    """
    validate_gaussian(p)
    s2 = p.sigma2_x
    floor = s2 * (1.0 - z.rho_xz ** 2)
    if D < floor - PAIR_TOL:
        raise InfeasiblePair(f"D={D} is below what the representation supports ({floor})")
    cov = abs(_cov_xz(p, z))
    if D >= s2:
        gamma = 0.0
    else:
        slope = cov / z.sigma2_z
        disc = max(0.0, slope ** 2 - (s2 - D) / z.sigma2_z)
        gamma = slope - math.sqrt(disc)
    sign = 1 if z.rho_xz >= 0 else -1
    return UniversalDecoder(gamma, sign, z.mu_z, p.mu_x, D,
                            math.nan if C is None else C)


def target_matching_decoder(p: GaussianPair, z: GaussianRepresentation, D: float,
                            C: float) -> UniversalDecoder:
    """Stochastic decoder hitting ``(D, C)`` exactly.

    Independent output noise lowers the correlation between ``Xhat`` and ``Z``
    to the value that makes ``H(S | Xhat) = C``; the affine gain and noise are
    then split so the output variance gives distortion ``D``.
    """
    validate_gaussian(p)
    if p.theta1 == 0.0:
        raise InfeasiblePair("the label carries no information about X")
    rho2 = p.rho ** 2
    c2 = -math.expm1(2.0 * C - 2.0 * p.h_s) / rho2
    if c2 < -PAIR_TOL or c2 > z.rho_xz ** 2 + PAIR_TOL:
        raise InfeasiblePair(f"C={C} is outside the range this representation supports")
    c2 = min(max(c2, 0.0), z.rho_xz ** 2)
    s2, sx = p.sigma2_x, p.sigma_x
    c = math.sqrt(c2)
    disc = s2 * c2 - s2 + D
    if disc < -PAIR_TOL:
        raise InfeasiblePair(f"D={D} is below {s2 * (1 - c2)} at this classification level")
    sd = sx * c + math.sqrt(max(disc, 0.0))
    if z.rho_xz == 0.0:
        gamma, noise = 0.0, sd ** 2
    else:
        gamma = c * sd / (abs(z.rho_xz) * math.sqrt(z.sigma2_z))
        noise = max(0.0, sd ** 2 - gamma ** 2 * z.sigma2_z)
    sign = 1 if z.rho_xz >= 0 else -1
    return UniversalDecoder(gamma, sign, z.mu_z, p.mu_x, D, C, noise_var=noise)


def analytic_performance(p: GaussianPair, z: GaussianRepresentation,
                         dec: UniversalDecoder) -> Performance:
    """Exact ``(E(X - Xhat)^2, H(S | Xhat))`` of a decoder applied to ``z``."""
    var_xhat = dec.gamma ** 2 * z.sigma2_z + dec.noise_var
    cov = dec.sign * dec.gamma * _cov_xz(p, z)
    D = (dec.mu_x - p.mu_x) ** 2 + p.sigma2_x + var_xhat - 2.0 * cov
    if var_xhat <= 0.0:
        return Performance(D, p.h_s)
    corr2 = cov ** 2 / (p.sigma2_x * var_xhat)
    return Performance(D, p.h_s + 0.5 * math.log1p(-p.rho ** 2 * corr2))


@dataclass
class NoPenaltyReport:
    r_max: float
    boundary: str
    n_points: int = 0
    max_D_violation: float = 0.0
    max_C_violation: float = 0.0
    rows: list = field(default_factory=list)

    @property
    def max_violation(self) -> float:
        return max(self.max_D_violation, self.max_C_violation)


def _exact_boundary(p: GaussianPair, r: float, num: int, margin: float):
    c_lo = min_class_loss(p, r)
    D = p.sigma2_x * math.exp(-2.0 * r)
    return [(D, float(C)) for C in np.linspace(c_lo, p.h_s + margin, num)]


def verify_no_penalty(p: GaussianPair, rates: Sequence[float], points_per_rate: int,
                      boundary: str = "stated", margin: float = 0.25) -> NoPenaltyReport:
    """Check that one representation at ``max(rates)`` serves every boundary point.

    ``boundary="stated"`` takes the targets from :func:`sample_dcr_curve` and
    decodes with :func:`decoder_for`. ``boundary="exact"`` takes targets on
    the constrained optimum (:func:`~rdc_lab.gaussian_rdc.exact_distortion`)
    and decodes with :func:`distortion_matching_decoder`. Achieved values are
    always recomputed with :func:`analytic_performance`.
    """
    rates = [float(r) for r in rates]
    if not rates:
        raise ValueError("rates must be non-empty")
    if min(rates) < 0:
        raise NegativeRate("rates must be nonnegative")
    r_max = max(rates)
    z = build_representation(p, r_max)
    report = NoPenaltyReport(r_max=r_max, boundary=boundary)
    for r in rates:
        if boundary == "stated":
            curve = sample_dcr_curve(p, r, points_per_rate, margin=margin)
            targets = [(pt.D, pt.C) for pt in curve.points]
        elif boundary == "exact":
            targets = _exact_boundary(p, r, points_per_rate, margin)
        else:
            raise ValueError(f"unknown boundary {boundary!r}")
        for D, C in targets:
            if boundary == "stated":
                dec = decoder_for(p, z, D, C)
            else:
                dec = distortion_matching_decoder(p, z, D, C)
            got = analytic_performance(p, z, dec)
            dv, cv = got.D - D, got.C - C
            report.max_D_violation = max(report.max_D_violation, dv)
            report.max_C_violation = max(report.max_C_violation, cv)
            report.rows.append((r, D, C, got.D, got.C, dec.gamma))
            report.n_points += 1
    return report


class MonteCarloEstimate(NamedTuple):
    D_hat: float
    C_hat: float
    D_se: float
    C_se: float


def sample_joint(p: GaussianPair, z: GaussianRepresentation, n_samples: int,
                 rng: np.random.Generator) -> np.ndarray:
    """Draw ``(X, S, Z)`` rows with ``S`` and ``Z`` conditionally independent given ``X``."""
    sx, sz = p.sigma_x, math.sqrt(z.sigma2_z)
    cov_xz = z.rho_xz * sx * sz
    cov_sz = p.theta1 * cov_xz / p.sigma2_x
    cov = np.array([
        [p.sigma2_x, p.theta1, cov_xz],
        [p.theta1, p.sigma2_s, cov_sz],
        [cov_xz, cov_sz, z.sigma2_z],
    ])
    try:
        L = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        # |rho| = 1 or |rho_xz| = 1 makes the covariance singular
        w, V = np.linalg.eigh(cov)
        L = V * np.sqrt(np.clip(w, 0.0, None))
    mean = np.array([p.mu_x, p.mu_s, z.mu_z])
    return mean + rng.standard_normal((n_samples, 3)) @ L.T


def monte_carlo_check(p: GaussianPair, dec: UniversalDecoder, z: GaussianRepresentation,
                      n_samples: int, seed: int) -> MonteCarloEstimate:
    """Empirical distortion and Gaussian plug-in classification loss of ``dec``.

    Uses a single PCG64 generator seeded with ``seed``; ``Xhat`` noise (if any)
    is drawn after the joint sample.
    """
    if n_samples < 10_000:
        raise ValueError("n_samples must be at least 1e4")
    rng = np.random.default_rng(seed)
    xsz = sample_joint(p, z, n_samples, rng)
    x, s, zz = xsz[:, 0], xsz[:, 1], xsz[:, 2]
    xhat = dec(zz)
    if dec.noise_var > 0:
        xhat = xhat + math.sqrt(dec.noise_var) * rng.standard_normal(n_samples)
    err2 = (x - xhat) ** 2
    D_hat = float(err2.mean())
    D_se = float(err2.std(ddof=1) / math.sqrt(n_samples))
    if np.ptp(xhat) == 0.0:
        return MonteCarloEstimate(D_hat, p.h_s, D_se, 0.0)
    r = float(np.corrcoef(s, xhat)[0, 1])
    C_hat = p.h_s + 0.5 * math.log1p(-r * r)
    # delta method: Var(r) ~ (1 - r^2)^2 / n and dC/dr = -r / (1 - r^2)
    C_se = abs(r) / math.sqrt(n_samples)
    return MonteCarloEstimate(D_hat, C_hat, D_se, C_se)
