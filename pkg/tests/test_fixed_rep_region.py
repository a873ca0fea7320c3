import math
from decimal import Decimal, getcontext

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import decoder_performance_bruteforce, random_discrete
from rdc_lab.discrete_dcr import build_grid, solve_dcr
from rdc_lab.fixed_rep_region import (
    D1OutOfRange,
    DecoderSpaceTooLarge,
    FixedRepresentation,
    InfeasibleClassificationLevel,
    decoder_oracle,
    estimate_region,
    extreme_points,
    gap_lower_bounds,
    outer_bound_curve,
    quantitative_gap_check,
    representation_from_weights,
)
from rdc_lab.model import DiscreteSource, InvalidDistribution, entropy


def _instance(seed, nz=3):
    src = random_discrete(seed)
    rng = np.random.default_rng(seed + 1000)
    return FixedRepresentation(src, rng.dirichlet(np.ones(nz), size=src.n).T)


def _var(src):
    return float(src.q @ (src.values - src.q @ src.values) ** 2)


def test_identity_channel_corner_a():
    src = random_discrete(3)
    a, _ = extreme_points(FixedRepresentation(src, np.eye(3)))
    assert a[0] == pytest.approx(0.0, abs=1e-15)
    assert a[1] == pytest.approx(src.label_equivocation, abs=1e-12)


def test_constant_channel_corner_a():
    src = random_discrete(4)
    rep = FixedRepresentation(src, np.ones((1, 3)))
    np.testing.assert_allclose(rep.mmse_values, [src.q @ src.values], atol=1e-15)
    a, b = extreme_points(rep)
    assert a[0] == pytest.approx(_var(src), abs=1e-12)
    assert a[1] == pytest.approx(src.label_entropy, abs=1e-12)
    # nothing to learn from Z, so both corners coincide
    assert b == pytest.approx(a, abs=1e-12)


def test_constant_channel_constant_decoders():
    src = random_discrete(4)
    rep = FixedRepresentation(src, np.ones((1, 3)))
    assert len(decoder_oracle(rep, pareto=False)) == rep.output_values.size
    assert len(decoder_oracle(rep)) == 1


def test_identity_decoder_present():
    src = random_discrete(5)
    pts = decoder_oracle(FixedRepresentation(src, np.eye(3)))
    assert any(p.D <= 1e-15 and abs(p.C - src.label_equivocation) <= 1e-12 for p in pts)


def test_mmse_invariants():
    rep = _instance(6)
    post = rep.joint_xz / rep.p_z
    np.testing.assert_allclose(rep.mmse_values, rep.src.values @ post, atol=1e-14)
    direct = sum(rep.joint_xz[x, z] * (rep.src.values[x] - rep.mmse_values[z]) ** 2
                 for x in range(3) for z in range(3))
    assert rep.mmse_distortion == pytest.approx(direct, abs=1e-12)


def test_channel_validation():
    src = random_discrete(0)
    with pytest.raises(InvalidDistribution):
        FixedRepresentation(src, np.array([[0.5, 0.5, 0.5], [0.4, 0.5, 0.5]]))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 3))
def test_performance_matches_bruteforce_and_pythagoras(seed, nz):
    rep = _instance(seed, nz)
    rng = np.random.default_rng(seed)
    G = rng.dirichlet(np.ones(rep.output_values.size), size=nz).T
    D, C = rep.performance(G)
    src = rep.src
    bD, bC = decoder_performance_bruteforce(src.q, src.T, src.values, rep.channel, rep.output_values, G)
    assert D == pytest.approx(bD, abs=1e-12)
    assert C == pytest.approx(bC, abs=1e-12)
    # E(Xtilde - Xhat)^2 computed on its own
    cross = sum(rep.p_z[z] * G[j, z] * (rep.mmse_values[z] - rep.output_values[j]) ** 2
                for z in range(nz) for j in range(G.shape[0]))
    assert D == pytest.approx(rep.mmse_distortion + cross, abs=1e-10)


@pytest.mark.parametrize("seed", range(6))
def test_sandwich_and_corner_a(seed):
    rep = _instance(seed)
    inner = decoder_oracle(rep)
    cs = sorted({p.C for p in inner})
    outer = dict((c, d) for d, c in outer_bound_curve(rep, cs))
    for p in inner:
        assert p.D >= outer[p.C] - 1e-9
    a, b = extreme_points(rep)
    every = decoder_oracle(rep, pareto=False)
    assert a[0] == pytest.approx(min(p.D for p in every), abs=1e-12)
    assert b[1] == pytest.approx(min(p.C for p in every), abs=1e-12)
    assert outer[cs[-1]] == pytest.approx(rep.mmse_distortion, abs=1e-12)


def test_outer_curve_is_non_increasing():
    rep = _instance(8)
    _, b = extreme_points(rep)
    curve = outer_bound_curve(rep, np.linspace(b[1], rep.src.label_entropy, 30))
    assert np.all(np.diff([d for d, _ in curve]) <= 1e-12)


def test_nearest_letter_bound_cuts_real_decoders():
    # the nearest-letter convention is kept for comparison; it is not a valid bound
    worst = 0.0
    for seed in range(6):
        rep = _instance(seed)
        inner = decoder_oracle(rep)
        for p in inner:
            try:
                (d, _), = outer_bound_curve(rep, [p.C], method="nearest-letter")
            except InfeasibleClassificationLevel:
                continue
            worst = max(worst, d - p.D)
    assert worst > 1e-3


def test_identity_channel_below_floor_is_rejected():
    src = random_discrete(2)
    rep = FixedRepresentation(src, np.eye(3))
    with pytest.raises(InfeasibleClassificationLevel):
        outer_bound_curve(rep, [src.label_equivocation - 1e-3])
    with pytest.raises(ValueError):
        outer_bound_curve(rep, [0.5, 0.4])


def test_refining_mixtures_only_helps():
    rep = _instance(11)
    coarse = decoder_oracle(rep, stochastic_grid=20)
    fine = decoder_oracle(rep, stochastic_grid=40)
    # every coarse point is weakly dominated by some fine point
    for p in coarse:
        assert any(f.D <= p.D + 1e-12 and f.C <= p.C + 1e-12 for f in fine)
    # and the finer points never beat the coarse lower envelope by much
    cD = np.array([p.D for p in coarse])
    cC = np.array([p.C for p in coarse])
    for f in fine:
        below = cC <= f.C + 1e-12
        assert cD[below].min() - f.D <= 1e-3


def test_decoder_space_limit():
    src = DiscreteSource.mse(np.full(4, 0.25), np.eye(4), [0.0, 1.0, 2.0, 3.0])
    rng = np.random.default_rng(0)
    rep = FixedRepresentation(src, rng.dirichlet(np.ones(7), size=4).T)
    with pytest.raises(DecoderSpaceTooLarge):
        decoder_oracle(rep)


def test_estimate_region_from_lp_support():
    src = random_discrete(9)
    grid = build_grid(src, 10)
    sol = solve_dcr(src, grid, src.label_entropy, 0.4)
    rep = representation_from_weights(src, grid, sol.weights)
    # the extracted channel reproduces the LP's joint law of X and the atoms
    np.testing.assert_allclose(rep.p_z, sol.weights.values, atol=1e-12)
    region = estimate_region(rep, stochastic_grid=5)
    assert region.extreme_a[0] <= sol.D + 1e-9
    assert region.extreme_a[0] <= region.extreme_b[0] + 1e-12


def _gap_decimal(s2x, s2h, d1):
    getcontext().prec = 50
    s2x, s2h, d1 = Decimal(s2x), Decimal(s2h), Decimal(d1)
    num = s2x + s2h - 2 * (s2h * (s2x - d1)).sqrt()
    return num - 2 * d1, num / (2 * d1)


def test_gap_bound_limits():
    assert gap_lower_bounds(1.0, 1.0, 0.0)[0] == 0.0
    assert gap_lower_bounds(2.5, 2.5, 0.0)[0] == 0.0
    assert gap_lower_bounds(1.0, 1.0, 1.0) == (0.0, 1.0)
    assert gap_lower_bounds(3.0, 3.0, 3.0) == (0.0, 1.0)


def test_gap_bound_vacuous_example():
    gap, ratio = gap_lower_bounds(1.0, 0.64, 0.5)
    assert gap == pytest.approx(0.64 - 1.6 * math.sqrt(0.5), abs=1e-15)
    assert gap == pytest.approx(-0.4914, abs=1e-4)
    assert ratio == pytest.approx(0.5086, abs=1e-4)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 10.0), st.floats(0.0, 10.0), st.floats(0.001, 1.0))
def test_gap_bound_extended_precision(s2x, s2h, frac):
    d1 = frac * s2x
    gap, ratio = gap_lower_bounds(s2x, s2h, d1)
    g, r = _gap_decimal(s2x, s2h, d1)
    assert abs(gap - float(g)) <= 1e-14 * max(1.0, s2x + s2h)
    assert abs(ratio - float(r)) <= 1e-14 * max(1.0, abs(float(r)))


def test_gap_bound_errors():
    with pytest.raises(D1OutOfRange):
        gap_lower_bounds(1.0, 1.0, 1.5)
    with pytest.raises(D1OutOfRange):
        gap_lower_bounds(1.0, 1.0, -0.1)


@pytest.mark.parametrize("seed,R", [(0, 0.2), (1, 0.4), (2, 0.6), (3, 0.3)])
def test_gap_bounds_hold_on_constructed_instances(seed, R):
    chk = quantitative_gap_check(random_discrete(seed), R, resolution=16, stochastic_grid=5)
    assert chk.gap_holds and chk.ratio_holds
    assert chk.D1 <= chk.D3 + 1e-9
    assert chk.C3 <= chk.C1 + 1e-9


@pytest.mark.parametrize("seed", range(0, 25, 4))
def test_outer_curve_is_reached_by_decoders(seed):
    src = random_discrete(seed)
    rng = np.random.default_rng(seed + 1000)
    rep = FixedRepresentation(src, rng.dirichlet(np.ones(1 + seed % 3), size=src.n).T)
    inner = decoder_oracle(rep)
    _, b = extreme_points(rep)
    for d, c in outer_bound_curve(rep, np.linspace(b[1], src.label_entropy, 30)):
        best = min(p.D for p in inner if p.C <= c + 1e-12)
        assert best - d <= 1e-3
