"""Dense two-phase revised simplex for ``min c^T x  s.t.  A x = b, x >= 0``.

Built for the shapes that appear in this package: a handful of rows and up
to a few million columns. The basis inverse is never formed; each iteration
solves two ``m x m`` systems, which is negligible next to pricing.

Pivoting is deterministic. The entering column is the most negative reduced
cost with ties going to the smallest index; after a run of degenerate pivots
the rule switches to Bland's (first improving index) until progress resumes.
The leaving row is chosen by the minimum ratio with ties going to the basic
variable of smallest index.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-11
COST_TOL = 1e-10
FEAS_TOL = 1e-9
DEGENERATE_SWITCH = 50


class LPStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"


@dataclass(frozen=True)
class LPResult:
    status: LPStatus
    x: np.ndarray
    objective: float
    iterations: int
    basis: tuple[int, ...]
    infeasibility: float = 0.0


def _iterate(A, b, c, basis, allowed, max_iter):
    """Run primal simplex from a feasible basis; returns (status, basis, x_B, iterations)."""
    m, N = A.shape
    basis = list(basis)
    degenerate = 0
    for it in range(max_iter):
        B = A[:, basis]
        x_B = np.linalg.solve(B, b)
        y = np.linalg.solve(B.T, c[basis])
        d = c - y @ A
        d[~allowed] = 0.0
        d[basis] = 0.0
        scale = 1.0 + np.abs(c).max()
        if degenerate >= DEGENERATE_SWITCH:
            cand = np.flatnonzero(d < -COST_TOL * scale)
            if cand.size == 0:
                return LPStatus.OPTIMAL, basis, x_B, it
            j = int(cand[0])
        else:
            j = int(np.argmin(d))
            if d[j] >= -COST_TOL * scale:
                return LPStatus.OPTIMAL, basis, x_B, it
        u = np.linalg.solve(B, A[:, j])
        pos = u > PIVOT_TOL
        if not pos.any():
            return LPStatus.UNBOUNDED, basis, x_B, it
        ratios = np.full(m, np.inf)
        ratios[pos] = np.maximum(x_B[pos], 0.0) / u[pos]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + 1e-14 * (1.0 + best))
        r = int(min(ties, key=lambda i: basis[i]))
        degenerate = degenerate + 1 if best <= 1e-14 else 0
        basis[r] = j
    B = A[:, basis]
    return LPStatus.ITERATION_LIMIT, basis, np.linalg.solve(B, b), max_iter


def solve_standard_form(c, A_eq, b_eq, max_iter: int = 50_000) -> LPResult:
    """Minimise ``c @ x`` over ``A_eq @ x = b_eq, x >= 0``."""
    c = np.asarray(c, dtype=float)
    A = np.array(A_eq, dtype=float)
    b = np.array(b_eq, dtype=float)
    m, N = A.shape
    flip = b < 0
    A[flip] *= -1.0
    b[flip] *= -1.0

    # phase 1: artificial identity block appended after the structural columns
    A1 = np.hstack([A, np.eye(m)])
    c1 = np.concatenate([np.zeros(N), np.ones(m)])
    allowed = np.ones(N + m, dtype=bool)
    status, basis, x_B, it1 = _iterate(A1, b, c1, range(N, N + m), allowed, max_iter)
    if status is LPStatus.ITERATION_LIMIT:
        return LPResult(status, np.zeros(N), np.nan, it1, tuple(basis))
    infeas = float(sum(x_B[i] for i, j in enumerate(basis) if j >= N))
    if infeas > FEAS_TOL * (1.0 + np.abs(b).max()):
        return LPResult(LPStatus.INFEASIBLE, np.zeros(N), np.nan, it1, tuple(basis), infeas)

    # drive zero-level artificials out of the basis; drop rows that are redundant
    rows = list(range(m))
    r = 0
    while r < len(basis):
        if basis[r] < N:
            r += 1
            continue
        B = A1[np.ix_(rows, basis)]
        e = np.zeros(len(rows))
        e[r] = 1.0
        row = np.linalg.solve(B.T, e) @ A1[rows, :N]
        row[[j for j in basis if j < N]] = 0.0
        cand = np.flatnonzero(np.abs(row) > 1e-9)
        if cand.size:
            basis[r] = int(cand[0])
            r += 1
        else:
            # the artificial's own constraint is a combination of the others
            rows.remove(basis[r] - N)
            del basis[r]

    A2 = A[rows]
    b2 = b[rows]
    allowed = np.ones(N, dtype=bool)
    status, basis, x_B, it2 = _iterate(A2, b2, c, basis, allowed, max_iter)
    x = np.zeros(N)
    x[basis] = np.maximum(x_B, 0.0)
    return LPResult(status, x, float(c @ x), it1 + it2, tuple(basis))
