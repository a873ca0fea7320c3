"""Distortion-classification region reachable by decoders of one fixed discrete representation.

A representation is a channel ``p(z | x)``. Decoders map ``Z`` to a
reconstruction alphabet; for MSE sources that alphabet is the union of the
source's reconstruction values and the MMSE values ``E[X | Z = z]`` (equal
values merged), so the MMSE decoder itself is available.

Every decoder satisfies ``E(X - Xhat)^2 = E(X - Xtilde)^2 + E(Xtilde - Xhat)^2``
with ``Xtilde = E[X | Z]``, and the second term is at least the squared
2-Wasserstein distance between the laws of ``Xtilde`` and ``Xhat``. That gives
the outer bound computed by :func:`outer_bound_curve`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .discrete_dcr import AtomGrid, SparseWeights, build_grid, min_class_loss_at_rate, solve_dcr
from .model import DiscreteSource, InvalidDistribution, RDCError, entropy
from .simplex import LPStatus, solve_standard_form
from .transport import w2_discrete

MERGE_TOL = 1e-12
DECODER_LIMIT = 1_000_000
CHUNK = 65_536


class InfeasibleClassificationLevel(RDCError):
    pass


class DecoderSpaceTooLarge(RDCError):
    pass


class D1OutOfRange(RDCError):
    pass


def _merge_values(values: np.ndarray) -> np.ndarray:
    """Sorted distinct values, treating entries within ``MERGE_TOL`` as one."""
    v = np.sort(np.asarray(values, dtype=float))
    keep = np.concatenate([[True], np.diff(v) > MERGE_TOL * (1.0 + np.abs(v[1:]))])
    return v[keep]


def _lookup(alphabet: np.ndarray, values: np.ndarray) -> np.ndarray:
    idx = np.clip(np.searchsorted(alphabet, values - MERGE_TOL * (1.0 + np.abs(values))),
                  0, alphabet.size - 1)
    return idx


@dataclass(frozen=True)
class FixedRepresentation:
    src: DiscreteSource
    channel: np.ndarray  # (|Z|, n); channel[z, x] = p(z | x)
    joint_xz: np.ndarray = field(init=False, repr=False)
    p_z: np.ndarray = field(init=False, repr=False)
    mmse_values: np.ndarray = field(init=False)
    mmse_distortion: float = field(init=False)
    joint_sz: np.ndarray = field(init=False, repr=False)
    output_values: np.ndarray = field(init=False, repr=False)
    cost: np.ndarray = field(init=False, repr=False)  # cost[z, a] = E[d(X, a); Z = z]

    def __post_init__(self):
        W = np.array(self.channel, dtype=float)
        src = self.src
        if W.ndim != 2 or W.shape[1] != src.n or np.any(W < 0):
            raise InvalidDistribution(f"channel must be a nonnegative |Z| x {src.n} matrix")
        if np.any(np.abs(W.sum(axis=0) - 1.0) > 1e-12):
            raise InvalidDistribution("every column of the channel must sum to 1")
        W.setflags(write=False)
        object.__setattr__(self, "channel", W)
        joint = src.q[:, None] * W.T  # (n, |Z|)
        p_z = joint.sum(axis=0)
        with np.errstate(invalid="ignore", divide="ignore"):
            post = np.where(p_z > 0, joint / p_z, src.q[:, None])
        mmse = src.values @ post
        mmse_d = float(np.sum(joint * (src.values[:, None] - mmse[None, :]) ** 2))
        if src.kind == "mse":
            out = _merge_values(np.concatenate([src.reconstruction_values, mmse]))
            cost = joint.T @ (src.values[:, None] - out[None, :]) ** 2
        else:
            out = np.asarray(src.reconstruction_values, dtype=float)
            cost = joint.T @ src.distortion
        for name, val in (("joint_xz", joint), ("p_z", p_z), ("mmse_values", mmse),
                          ("mmse_distortion", mmse_d), ("joint_sz", src.T @ joint),
                          ("output_values", out), ("cost", cost)):
            object.__setattr__(self, name, val)

    @property
    def size(self) -> int:
        return self.channel.shape[0]

    def performance(self, decoder: np.ndarray) -> tuple[float, float]:
        """Exact ``(D, H(S | Xhat))`` of a stochastic decoder ``decoder[a, z] = p(a | z)``."""
        G = np.asarray(decoder, dtype=float)
        D = float(np.sum(G.T * self.cost))
        p_sa = self.joint_sz @ G.T
        C = float(entropy(p_sa.ravel()) - entropy(p_sa.sum(axis=0)))
        return D, max(C, 0.0)

    def output_law(self, decoder: np.ndarray) -> np.ndarray:
        return np.asarray(decoder, dtype=float) @ self.p_z

    def mmse_decoder(self) -> np.ndarray:
        G = np.zeros((self.output_values.size, self.size))
        G[_lookup(self.output_values, self.mmse_values), np.arange(self.size)] = 1.0
        return G


class OraclePoint(NamedTuple):
    D: float
    C: float


@dataclass(frozen=True)
class RegionEstimate:
    inner_points: list
    outer_curve: list
    extreme_a: tuple
    extreme_b: tuple


def _deterministic(rep: FixedRepresentation):
    a, nz = rep.output_values.size, rep.size
    total = a ** nz
    if total > DECODER_LIMIT:
        raise DecoderSpaceTooLarge(f"{a}^{nz} = {total} deterministic decoders exceeds {DECODER_LIMIT}")
    maps = np.array(list(itertools.product(range(a), repeat=nz)), dtype=np.int64).reshape(total, nz)
    D = rep.cost[np.arange(nz)[None, :], maps].sum(axis=1)
    C = np.empty(total)
    m = rep.joint_sz.shape[0]
    for lo in range(0, total, CHUNK):
        g = maps[lo:lo + CHUNK]
        P = np.zeros((g.shape[0], m, a))
        rows = np.arange(g.shape[0])[:, None]
        for z in range(nz):
            P[rows, np.arange(m)[None, :], g[:, z][:, None]] += rep.joint_sz[:, z][None, :]
        C[lo:lo + CHUNK] = entropy(P.reshape(g.shape[0], -1), axis=1) - entropy(P.sum(axis=1), axis=1)
    return maps, D, np.maximum(C, 0.0)


def _pareto(D: np.ndarray, C: np.ndarray) -> np.ndarray:
    order = np.lexsort((C, D))
    keep, best = [], math.inf
    for i in order:
        if C[i] < best - 1e-15:
            keep.append(i)
            best = C[i]
    return np.array(keep, dtype=np.int64)


def _as_matrix(g: np.ndarray, a: int) -> np.ndarray:
    G = np.zeros((a, g.size))
    G[g, np.arange(g.size)] = 1.0
    return G


def _decoder_family(rep: FixedRepresentation, stochastic_grid: int):
    """Deterministic decoders plus grid mixtures of consecutive Pareto decoders."""
    maps, D, C = _deterministic(rep)
    a = rep.output_values.size
    family = [(float(D[i]), float(C[i]), _as_matrix(maps[i], a)) for i in range(maps.shape[0])]
    front = _pareto(D, C)
    for i, j in zip(front, front[1:]):
        G1, G2 = _as_matrix(maps[i], a), _as_matrix(maps[j], a)
        for step in range(1, stochastic_grid):
            lam = step / stochastic_grid
            G = (1.0 - lam) * G1 + lam * G2
            d, c = rep.performance(G)
            family.append((d, c, G))
    return family


def decoder_oracle(rep: FixedRepresentation, stochastic_grid: int = 20,
                   pareto: bool = True) -> list[OraclePoint]:
    """Exact ``(D, C)`` of every deterministic decoder and of mixtures along the frontier.

    With ``pareto=False`` the deterministic points are returned unfiltered and
    without mixtures.
    """
    if stochastic_grid < 1:
        raise ValueError("stochastic_grid must be positive")
    if not pareto:
        _, D, C = _deterministic(rep)
        return [OraclePoint(float(d), float(c)) for d, c in zip(D, C)]
    fam = _decoder_family(rep, stochastic_grid)
    D = np.array([f[0] for f in fam])
    C = np.array([f[1] for f in fam])
    return [OraclePoint(float(D[i]), float(C[i])) for i in _pareto(D, C)]


def _w2_to_mmse(rep: FixedRepresentation, law: np.ndarray) -> float:
    return w2_discrete(rep.mmse_values, rep.p_z / rep.p_z.sum(),
                       rep.output_values, law / law.sum()).cost


def extreme_points(rep: FixedRepresentation):
    """Minimum-distortion corner ``a`` and minimum-classification corner ``b``.

    ``b`` takes the deterministic decoders of least ``H(S | Xhat)`` (which is
    concave in the decoder, so no stochastic decoder does better) and among
    them the one whose output law is closest to that of ``Xtilde`` in ``W2``.
    """
    a_D, a_C = rep.performance(rep.mmse_decoder())
    maps, D, C = _deterministic(rep)
    c_min = float(C.min())
    ties = np.flatnonzero(C <= c_min + 1e-12)
    out = rep.output_values.size
    w2 = [_w2_to_mmse(rep, rep.output_law(_as_matrix(maps[i], out))) for i in ties]
    best = int(np.argmin(w2))
    return (rep.mmse_distortion, a_C), (rep.mmse_distortion + float(w2[best]), c_min)


def _nearest_letter_entropies(rep: FixedRepresentation) -> np.ndarray:
    src = rep.src
    nearest = np.abs(src.values[None, :] - src.reconstruction_values[:, None]).argmin(axis=1)
    return entropy(src.T[:, nearest], axis=0)


def _outer_nearest_letter(rep: FixedRepresentation, C: float) -> float:
    """LP over couplings of ``Xtilde`` with a reconstruction law on ``reconstruction_values``."""
    recon = rep.src.reconstruction_values
    h = _nearest_letter_entropies(rep)
    if C < h.min() - 1e-12:
        raise InfeasibleClassificationLevel(f"C={C} is below the smallest letter entropy {h.min()}")
    nz, k = rep.size, recon.size
    cost = ((rep.mmse_values[:, None] - recon[None, :]) ** 2).ravel()
    A = np.zeros((nz + 1, nz * k + 1))
    for z in range(nz):
        A[z, z * k:(z + 1) * k] = 1.0
    A[nz, :nz * k] = np.tile(h, nz)
    A[nz, -1] = 1.0
    b = np.concatenate([rep.p_z, [C]])
    res = solve_standard_form(np.concatenate([cost, [0.0]]), A, b)
    if res.status is not LPStatus.OPTIMAL:
        raise InfeasibleClassificationLevel(f"no reconstruction law meets C={C}")
    return rep.mmse_distortion + res.objective


def outer_bound_curve(rep: FixedRepresentation, C_grid: Sequence[float],
                      method: str = "realizable", stochastic_grid: int = 20) -> list[tuple[float, float]]:
    """``mmse + min W2^2(p_Xtilde, p_Xhat)`` subject to ``H(S | Xhat) <= C``, per ``C``.

    ``method="realizable"`` minimises over the output laws of the decoders
    searched by :func:`decoder_oracle`, each with its exact classification
    loss, so every oracle point lies on or above the curve.
    ``method="nearest-letter"`` minimises over all laws on the
    reconstruction values and charges each letter the label entropy of the
    nearest source letter; that does not track ``H(S | Xhat)`` of any decoder
    and can cut above decoders that really exist.
    """
    cs = [float(c) for c in C_grid]
    if not cs:
        raise ValueError("C_grid must be non-empty")
    if any(b < a for a, b in zip(cs, cs[1:])):
        raise ValueError("C_grid must be ascending")
    if method == "nearest-letter":
        return [(_outer_nearest_letter(rep, c), c) for c in cs]
    if method != "realizable":
        raise ValueError(f"unknown method {method!r}")
    fam = _decoder_family(rep, stochastic_grid)
    C = np.array([f[1] for f in fam])
    W = np.array([_w2_to_mmse(rep, rep.output_law(f[2])) for f in fam])
    order = np.argsort(C, kind="stable")
    C, W = C[order], np.minimum.accumulate(W[order])
    out = []
    for c in cs:
        i = int(np.searchsorted(C, c + 1e-12, side="right")) - 1
        if i < 0:
            raise InfeasibleClassificationLevel(f"C={c} is below the least reachable {C[0]}")
        out.append((rep.mmse_distortion + float(W[i]), c))
    return out


def estimate_region(rep: FixedRepresentation, C_grid: Sequence[float] | None = None,
                    stochastic_grid: int = 20, num_outer: int = 25) -> RegionEstimate:
    inner = decoder_oracle(rep, stochastic_grid)
    a, b = extreme_points(rep)
    if C_grid is None:
        C_grid = np.linspace(b[1], rep.src.label_entropy, num_outer)
    outer = outer_bound_curve(rep, C_grid, stochastic_grid=stochastic_grid)
    return RegionEstimate(inner, outer, a, b)


def representation_from_weights(src: DiscreteSource, grid: AtomGrid,
                                weights: SparseWeights) -> FixedRepresentation:
    """Channel ``p(z | x)`` whose letters are the support atoms of an LP solution."""
    w = np.asarray(weights.values, dtype=float)
    post = grid.posteriors[weights.indices]  # (|Z|, n)
    joint = w[:, None] * post
    col = joint.sum(axis=0)
    channel = np.where(col > 0, joint / np.where(col > 0, col, 1.0), w[:, None] / w.sum())
    return FixedRepresentation(src, channel / channel.sum(axis=0))


def gap_lower_bounds(sigma2_x: float, sigma2_xhat3: float, D1: float) -> tuple[float, float]:
    """Right-hand sides of the distortion-gap and distortion-ratio bounds.

    With ``u = sqrt(sigma2_xhat3)`` and ``v = sqrt(sigma2_x - D1)`` the ratio
    numerator is ``(u - v)^2 + D1``; ``(u - v)^2`` is formed as
    ``(u^2 - v^2)^2 / (u + v)^2`` so nothing cancels, and the limits
    ``D1 = 0`` and ``D1 = sigma2_x`` come out exact. The ratio is ``nan`` at
    ``D1 = 0`` when its numerator also vanishes and ``inf`` when it does not.
    """
    if not 0.0 <= D1 <= sigma2_x:
        raise D1OutOfRange(f"D1={D1} must lie in [0, {sigma2_x}]")
    if sigma2_xhat3 < 0:
        raise ValueError("sigma2_xhat3 must be nonnegative")
    rest = sigma2_x - D1
    if rest == 0.0:
        spread = sigma2_xhat3
    else:
        diff = sigma2_xhat3 - rest
        spread = diff * diff / (sigma2_xhat3 + rest + 2.0 * math.sqrt(sigma2_xhat3 * rest))
    gap = spread - D1
    num = spread + D1
    if D1 == 0.0:
        return gap, (math.nan if num == 0.0 else math.inf)
    return gap, num / (2.0 * D1)


@dataclass(frozen=True)
class GapCheck:
    R: float
    D1: float
    C1: float
    D3: float
    C3: float
    sigma2_xhat3: float
    D_b: float
    gap_bound: float
    ratio_bound: float

    @property
    def gap_holds(self) -> bool:
        return self.D3 - self.D_b >= self.gap_bound - 1e-9

    @property
    def ratio_holds(self) -> bool:
        return self.D_b <= 0 or self.D3 / self.D_b >= self.ratio_bound - 1e-9


def quantitative_gap_check(src: DiscreteSource, R: float, resolution: int = 32,
                           stochastic_grid: int = 10, grid: AtomGrid | None = None) -> GapCheck:
    """Build ``(D1, C1)``, ``(D3, C3)`` and ``D^(b)`` at rate ``R`` and evaluate the gap bounds.

    ``D1`` is the slack-classification optimum at ``R``; its LP support is the
    representation whose corner ``b`` is measured. ``C3`` is the least class
    loss reachable at ``R`` and ``D3`` the distortion there.
    """
    if src.kind != "mse":
        raise ValueError("the gap bounds are stated for MSE sources")
    grid = grid if grid is not None else build_grid(src, resolution)
    c_slack = src.label_entropy + 1.0
    sol1 = solve_dcr(src, grid, c_slack, R)
    rep = representation_from_weights(src, grid, sol1.weights)
    C1 = float(sol1.weights.values @ grid.class_entropies[sol1.weights.indices])
    C3 = min_class_loss_at_rate(src, grid, R)
    sol3 = solve_dcr(src, grid, C3 + 1e-9, R)
    letters = src.reconstruction_values[grid.recon_index[sol3.weights.indices]]
    w3 = sol3.weights.values / sol3.weights.values.sum()
    var3 = float(w3 @ (letters - w3 @ letters) ** 2)
    sigma2_x = float(src.q @ (src.values - src.q @ src.values) ** 2)
    _, b = extreme_points(rep)
    D1 = min(max(sol1.D, 0.0), sigma2_x)
    gap, ratio = gap_lower_bounds(sigma2_x, var3, D1)
    return GapCheck(R, sol1.D, C1, sol3.D, C3, var3, b[0], gap, ratio)
