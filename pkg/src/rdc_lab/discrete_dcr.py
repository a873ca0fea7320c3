"""Distortion-classification-rate function of a finite-alphabet source.

A test channel is described by a mixture of atoms. An atom pairs a
reconstruction letter ``alpha`` with a posterior ``p_alpha`` over source
letters; the mixture weights ``w`` must reproduce the source law ``q``. Then

    E d(X, Xhat)  = sum_a w_a d_alpha . p_a
    H(S | Xhat)   = sum_a w_a H(T p_a)
    I(X; Xhat)    = H(q) - sum_a w_a H(p_a)

and ``D(C, R)`` is a linear program in ``w`` once the posteriors are restricted
to a simplex grid. Atoms sharing a letter are treated as distinct tagged
reconstruction symbols, so the LP value is the grid approximation of the
optimum over channels with arbitrary output alphabets.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import comb

from .model import DiscreteSource, NegativeRate, RDCError, entropy
from .simplex import LPStatus, solve_standard_form

DEFAULT_ATOM_BUDGET = 2_000_000
LP_TOL = 1e-9


class AtomBudgetExceeded(RDCError):
    pass


class InfeasibleLP(RDCError):
    """No mixture of grid atoms meets the constraints.

    ``provably_infeasible`` is set when ``C`` is below ``H(S | X)``, which no
    channel can beat; otherwise the failure may be an artefact of the grid.
    """

    def __init__(self, message: str, provably_infeasible: bool, grid_infeasible: bool = True):
        super().__init__(message)
        self.provably_infeasible = provably_infeasible
        self.grid_infeasible = grid_infeasible


@dataclass(frozen=True)
class Atom:
    recon_index: int
    posterior: np.ndarray
    entropy: float
    class_entropy: float
    distortion: float


@dataclass(frozen=True)
class AtomGrid:
    """All atoms with posteriors on the grid ``{i / resolution}``, stored column-wise.

    Atom ``a`` has letter ``recon_index[a]`` and posterior
    ``base_posteriors[a % per_letter]``. When the source law ``q`` is not a
    grid point it is appended as one extra posterior so that rate zero stays
    reachable.
    """

    resolution: int
    base_posteriors: np.ndarray  # (per_letter, n)
    recon_index: np.ndarray
    entropies: np.ndarray
    class_entropies: np.ndarray
    distortions: np.ndarray

    @property
    def per_letter(self) -> int:
        return self.base_posteriors.shape[0]

    @property
    def posteriors(self) -> np.ndarray:
        """Posterior of every atom, shape ``(len(self), n)``."""
        return np.tile(self.base_posteriors, (int(self.recon_index[-1]) + 1, 1))

    def __len__(self) -> int:
        return self.recon_index.shape[0]

    def atom(self, a: int) -> Atom:
        post = self.base_posteriors[a % self.per_letter]
        return Atom(int(self.recon_index[a]), post, float(self.entropies[a]),
                    float(self.class_entropies[a]), float(self.distortions[a]))

    @property
    def atoms(self) -> list[Atom]:
        return [self.atom(a) for a in range(len(self))]


def compositions(total: int, parts: int) -> np.ndarray:
    """Every nonnegative integer vector of length ``parts`` summing to ``total``, lexicographic."""
    rows = []
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        edges = (-1,) + bars + (total + parts - 1,)
        rows.append([edges[i + 1] - edges[i] - 1 for i in range(parts)])
    return np.array(rows, dtype=np.int64).reshape(-1, parts)


def grid_size(n: int, k: int, resolution: int) -> int:
    return k * int(comb(resolution + n - 1, n - 1, exact=True))


def build_grid(src: DiscreteSource, resolution: int,
               atom_budget: int = DEFAULT_ATOM_BUDGET, include_source: bool = True) -> AtomGrid:
    if resolution < 4:
        raise ValueError("resolution must be at least 4")
    n, k = src.n, src.k
    count = grid_size(n, k, resolution)
    if n * count > atom_budget:
        raise AtomBudgetExceeded(
            f"{count} atoms x {n} letters exceeds the budget of {atom_budget}")
    post = compositions(resolution, n) / resolution
    scaled = src.q * resolution
    on_grid = np.allclose(scaled, np.round(scaled), rtol=0, atol=1e-12)
    if include_source and not on_grid:
        post = np.vstack([post, src.q])
    h = entropy(post, axis=1)
    hc = entropy(post @ src.T.T, axis=1)
    dist = post @ src.distortion  # (per_letter, k)
    per = post.shape[0]
    return AtomGrid(
        resolution=resolution,
        base_posteriors=post,
        recon_index=np.repeat(np.arange(k), per),
        entropies=np.tile(h, k),
        class_entropies=np.tile(hc, k),
        distortions=dist.T.reshape(-1),
    )


@dataclass(frozen=True)
class SparseWeights:
    indices: np.ndarray
    values: np.ndarray
    size: int

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.size)
        out[self.indices] = self.values
        return out


class DCRSolution(NamedTuple):
    D: float
    weights: SparseWeights
    status: str = LPStatus.OPTIMAL.value
    class_loss: float = math.nan  # achieved H(S | Xhat)
    rate: float = math.nan  # achieved I(X; Xhat)


def _constraints(src: DiscreteSource, grid: AtomGrid, C: float, R: float):
    P = grid.posteriors.T  # (n, N)
    N = len(grid)
    A = np.zeros((src.n + 2, N + 2))
    A[:src.n, :N] = P
    # classification: sum w H(T p) + slack = C
    A[src.n, :N] = grid.class_entropies
    A[src.n, N] = 1.0
    # rate: sum w H(p) - surplus = H(q) - R
    A[src.n + 1, :N] = grid.entropies
    A[src.n + 1, N + 1] = -1.0
    b = np.concatenate([src.q, [C, src.source_entropy - R]])
    c = np.concatenate([grid.distortions, [0.0, 0.0]])
    return c, A, b


def solve_dcr(src: DiscreteSource, grid: AtomGrid, C: float, R: float) -> DCRSolution:
    """Minimum distortion over atom mixtures with ``H(S|Xhat) <= C`` and ``I(X;Xhat) <= R``."""
    if C < 0:
        raise ValueError(f"classification level must be nonnegative, got {C}")
    if R < 0:
        raise NegativeRate(f"rate must be nonnegative, got {R}")
    c, A, b = _constraints(src, grid, C, R)
    res = solve_standard_form(c, A, b)
    if res.status is LPStatus.INFEASIBLE:
        floor = src.label_equivocation
        provable = C < floor - LP_TOL
        why = (f"C={C} is below H(S|X)={floor}, which no decoder can beat" if provable
               else f"no mixture of grid atoms (g={grid.resolution}) meets C={C}, R={R}")
        raise InfeasibleLP(why, provably_infeasible=provable)
    if res.status is not LPStatus.OPTIMAL:
        raise RDCError(f"LP solver stopped with status {res.status.value}")
    w = res.x[:len(grid)]
    support = np.flatnonzero(w > 0.0)
    return DCRSolution(float(grid.distortions @ w),
                       SparseWeights(support, w[support], len(grid)), res.status.value,
                       float(grid.class_entropies @ w),
                       max(0.0, src.source_entropy - float(grid.entropies @ w)))


def try_solve(src: DiscreteSource, grid: AtomGrid, C: float, R: float) -> float:
    """``solve_dcr`` distortion, or ``inf`` when infeasible."""
    try:
        return solve_dcr(src, grid, C, R).D
    except InfeasibleLP:
        return math.inf


@dataclass
class ConvexityReport:
    trials: int
    max_convexity_violation: float = 0.0
    max_monotone_violation: float = 0.0
    convexity_failures: int = 0
    monotone_failures: int = 0
    tolerance: float = LP_TOL

    @property
    def max_violation(self) -> float:
        return max(self.max_convexity_violation, self.max_monotone_violation)


def _random_feasible(src, grid, rng, c_lo, c_hi, r_hi, attempts=50):
    for _ in range(attempts):
        C = float(rng.uniform(c_lo, c_hi))
        R = float(rng.uniform(0.0, r_hi))
        D = try_solve(src, grid, C, R)
        if math.isfinite(D):
            return C, R, D
    C, R = c_hi, r_hi
    return C, R, solve_dcr(src, grid, C, R).D


def check_convexity(src: DiscreteSource, grid: AtomGrid, trials: int, seed: int,
                    sweep_points: int = 8, tol: float = LP_TOL) -> ConvexityReport:
    """Random midpoint-convexity checks plus one C-sweep and one R-sweep per trial."""
    if trials < 10:
        raise ValueError("trials must be at least 10")
    rng = np.random.default_rng(seed)
    c_lo, c_hi = src.label_equivocation, src.label_entropy
    r_hi = src.source_entropy
    rep = ConvexityReport(trials=trials, tolerance=tol)
    for _ in range(trials):
        C1, R1, D1 = _random_feasible(src, grid, rng, c_lo, c_hi, r_hi)
        C2, R2, D2 = _random_feasible(src, grid, rng, c_lo, c_hi, r_hi)
        Dm = solve_dcr(src, grid, 0.5 * (C1 + C2), 0.5 * (R1 + R2)).D
        excess = Dm - 0.5 * (D1 + D2)
        rep.max_convexity_violation = max(rep.max_convexity_violation, excess)
        rep.convexity_failures += excess > tol

        rs = np.linspace(R1, r_hi, sweep_points)
        cs = np.linspace(C1, c_hi, sweep_points)
        for series in ([try_solve(src, grid, C1, float(r)) for r in rs],
                       [try_solve(src, grid, float(c), R1) for c in cs]):
            vals = np.array(series)
            vals = vals[np.isfinite(vals)]
            if vals.size > 1:
                rise = float(np.max(np.diff(vals)))
                rep.max_monotone_violation = max(rep.max_monotone_violation, rise)
                rep.monotone_failures += rise > tol
    return rep


def min_class_loss_at_rate(src: DiscreteSource, grid: AtomGrid, R: float) -> float:
    """Smallest ``H(S | Xhat)`` over atom mixtures with ``I(X; Xhat) <= R``."""
    if R < 0:
        raise NegativeRate(f"rate must be nonnegative, got {R}")
    _, A, b = _constraints(src, grid, 0.0, R)
    N = len(grid)
    # drop the classification row and its slack; minimise the class entropy instead
    keep = [i for i in range(A.shape[0]) if i != src.n]
    A = np.delete(A[keep], N, axis=1)
    b = b[keep]
    c = np.concatenate([grid.class_entropies, [0.0]])
    res = solve_standard_form(c, A, b)
    if res.status is not LPStatus.OPTIMAL:
        raise InfeasibleLP(f"no atom mixture reaches rate {R}", provably_infeasible=False)
    return float(res.objective)
