"""Posterior sampling costs exactly twice the MMSE.

If ``Xhat`` is drawn from the law of ``X`` given the message ``M``,
independently of ``X``, then ``E(X - Xhat)^2 = 2 E Var(X | M)``. The discrete
check evaluates both sides exactly; the Gaussian check simulates the
Shannon-optimal test channel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fixed_rep_region import gap_lower_bounds  # noqa: F401  (re-exported)
from .model import GaussianPair, RDCError, entropy, validate_gaussian

PSNR_DROP_DB = 10.0 * math.log10(2.0)


class InvalidJoint(RDCError):
    pass


@dataclass(frozen=True)
class PosteriorSamplingResult:
    d_min: float
    d_ps: float
    ratio: float
    d_ps_se: float = 0.0
    class_loss: float | None = None

    @property
    def psnr_drop_db(self) -> float:
        """``10 log10(d_ps / d_min)``; ``nan`` when ``d_min = 0``."""
        if self.d_min <= 0 or self.d_ps <= 0:
            return math.nan
        return 10.0 * math.log10(self.d_ps / self.d_min)


def posterior_sampling_check_discrete(joint, values, T=None) -> PosteriorSamplingResult:
    """Exact MMSE and posterior-sampling distortion for a joint ``p(x, m)``.

    ``d_ps`` is the literal double sum over ``(x, xhat, m)``; it is not
    derived from ``d_min``. With a classifier channel ``T`` (``T[s, x]``) the
    achieved ``H(S | Xhat)`` of the sampler is reported too.
    """
    P = np.asarray(joint, dtype=float)
    x = np.asarray(values, dtype=float)
    if P.ndim != 2 or P.shape[0] != x.size:
        raise InvalidJoint("joint must be an n x |M| matrix with one row per value")
    if np.any(P < 0) or abs(P.sum() - 1.0) > 1e-12 or not np.all(np.isfinite(x)):
        raise InvalidJoint("joint must be nonnegative and sum to 1, values finite")
    p_m = P.sum(axis=0)
    live = p_m > 0
    post = P[:, live] / p_m[live]
    means = x @ post
    d_min = math.fsum((P[:, live] * (x[:, None] - means[None, :]) ** 2).ravel())
    sq = (x[:, None] - x[None, :]) ** 2
    terms = []
    for j, pm in enumerate(p_m[live]):
        terms.extend((pm * np.outer(post[:, j], post[:, j]) * sq).ravel())
    d_ps = math.fsum(terms)
    ratio = d_ps / d_min if d_min > 0 else math.nan
    class_loss = None
    if T is not None:
        Tm = np.asarray(T, dtype=float)
        # Xhat has the law sum_m p(m) p(x | m) = p(x) jointly with the label through X
        p_xhat_x = post @ (p_m[live][:, None] * post.T)  # p(xhat, x)
        p_s_xhat = Tm @ p_xhat_x.T
        class_loss = float(entropy(p_s_xhat.ravel()) - entropy(p_s_xhat.sum(axis=0)))
    return PosteriorSamplingResult(d_min, d_ps, ratio, 0.0, class_loss)


def posterior_sampling_check_gaussian(p: GaussianPair, R: float, n_samples: int,
                                      seed: int) -> PosteriorSamplingResult:
    """Simulate the rate-``R`` Gaussian test channel and a posterior sample.

    Backward channel ``X = U + W`` with ``U ~ N(mu_x, sigma2_x - d)``,
    ``W ~ N(0, d)``, ``d = sigma2_x e^{-2R}``; the MMSE estimate is ``U`` and
    a posterior sample is ``U + W'`` with an independent copy ``W'``.
    """
    validate_gaussian(p)
    if not R > 0:
        raise ValueError("R must be positive")
    if n_samples < 100_000:
        raise ValueError("n_samples must be at least 1e5")
    d = p.sigma2_x * math.exp(-2.0 * R)
    rng = np.random.default_rng(seed)
    u = p.mu_x + math.sqrt(p.sigma2_x - d) * rng.standard_normal(n_samples)
    sd = math.sqrt(d)
    x = u + sd * rng.standard_normal(n_samples)
    xhat = u + sd * rng.standard_normal(n_samples)
    err2 = (x - xhat) ** 2
    d_ps = float(err2.mean())
    se = float(err2.std(ddof=1) / math.sqrt(n_samples))
    return PosteriorSamplingResult(d, d_ps, d_ps / d, se)
