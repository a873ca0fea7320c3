"""Independent reference computations used only by the tests."""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import brentq, linprog


def binary_entropy(d: float) -> float:
    if d <= 0.0 or d >= 1.0:
        return 0.0
    return -d * math.log(d) - (1 - d) * math.log(1 - d)


def binary_shannon_distortion(R: float) -> float:
    """Hamming D(R) of a fair coin: solve ln 2 - H_b(D) = R for D in [0, 1/2]."""
    if R >= math.log(2):
        return 0.0
    if R <= 0:
        return 0.5
    return brentq(lambda d: math.log(2) - binary_entropy(d) - R, 1e-15, 0.5, xtol=1e-15)


def blahut_arimoto_dr(q, dist, R, iters=4000):
    """Classical D(R) by bisection on the Blahut-Arimoto slope parameter."""
    q = np.asarray(q, float)
    dist = np.asarray(dist, float)

    def point(beta):
        r = np.full(dist.shape[1], 1.0 / dist.shape[1])
        for _ in range(iters):
            A = r[None, :] * np.exp(-beta * dist)
            Q = A / A.sum(axis=1, keepdims=True)
            r = q @ Q
        D = float(np.sum(q[:, None] * Q * dist))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(Q > 0, Q / r[None, :], 1.0)
        I = float(np.sum(q[:, None] * Q * np.log(ratio)))
        return D, I

    lo, hi = 0.0, 200.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        _, I = point(mid)
        if I > R:
            hi = mid
        else:
            lo = mid
    return point(lo)[0]


def gaussian_min_rate(sigma2_x, sigma2_s, theta1, D, C):
    """R(D, C) by scanning the correlation t of a jointly Gaussian reconstruction.

    For a given t the least distortion is sigma2_x (1 - t^2) and the class loss
    is h(S) + 0.5 ln(1 - rho^2 t^2); the rate is -0.5 ln(1 - t^2).
    """
    rho2 = theta1 ** 2 / (sigma2_x * sigma2_s)
    h = 0.5 * math.log(2 * math.pi * math.e * sigma2_s)
    t = np.linspace(0.0, 1.0, 2_000_001)
    ok = (sigma2_x * (1 - t ** 2) <= D + 1e-15) & (h + 0.5 * np.log1p(-rho2 * t ** 2) <= C + 1e-15)
    t0 = t[np.argmax(ok)]
    # refine the first feasible t by bisection
    lo, hi = max(0.0, t0 - 1e-6), t0
    feas = lambda s: sigma2_x * (1 - s * s) <= D and h + 0.5 * math.log1p(-rho2 * s * s) <= C
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if feas(mid):
            hi = mid
        else:
            lo = mid
    return -0.5 * math.log1p(-hi * hi)


def transport_lp(xs, px, ys, py):
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    n, m = xs.size, ys.size
    cost = ((xs[:, None] - ys[None, :]) ** 2).ravel()
    A = np.vstack([np.kron(np.eye(n), np.ones(m)), np.kron(np.ones(n), np.eye(m))])
    res = linprog(cost, A_eq=A, b_eq=np.concatenate([px, py]), method="highs")
    return float(res.fun)


def atom_lp_highs(src, grid, C, R):
    """The same atom LP, solved by HiGHS with inequality rows."""
    P = grid.posteriors.T
    A_ub = np.vstack([grid.class_entropies, -grid.entropies])
    b_ub = np.array([C, R - src.source_entropy])
    res = linprog(grid.distortions, A_ub=A_ub, b_ub=b_ub, A_eq=P, b_eq=src.q,
                  bounds=(0, None), method="highs")
    return float(res.fun) if res.status == 0 else math.inf


def decoder_performance_bruteforce(q, T, values, channel, out_values, decoder):
    """(D, H(S|Xhat)) by summing over every (s, x, z, xhat)."""
    n, nz, a = len(q), channel.shape[0], len(out_values)
    m = T.shape[0]
    D = 0.0
    p_sa = np.zeros((m, a))
    for x, z, j in itertools.product(range(n), range(nz), range(a)):
        w = q[x] * channel[z, x] * decoder[j, z]
        D += w * (values[x] - out_values[j]) ** 2
        for s in range(m):
            p_sa[s, j] += T[s, x] * w
    H = 0.0
    for j in range(a):
        pa = p_sa[:, j].sum()
        for s in range(m):
            if p_sa[s, j] > 0:
                H -= p_sa[s, j] * math.log(p_sa[s, j] / pa)
    return D, H


def random_discrete(seed, n=3, m=None, mse=True):
    from rdc_lab.model import DiscreteSource
    rng = np.random.default_rng(seed)
    m = n if m is None else m
    q = rng.dirichlet(np.ones(n))
    T = rng.dirichlet(np.ones(m), size=n).T
    if mse:
        return DiscreteSource.mse(q, T, np.sort(rng.normal(size=n)))
    return DiscreteSource.hamming(q, T)
