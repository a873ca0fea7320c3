import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from rdc_lab.simplex import LPStatus, solve_standard_form


def _random_lp(seed, m, n):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(m, n))
    x0 = rng.uniform(0, 1, n)
    return rng.uniform(0, 1, n), A, A @ x0


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 5), st.integers(6, 20))
def test_matches_highs(seed, m, n):
    c, A, b = _random_lp(seed, m, n)
    ours = solve_standard_form(c, A, b)
    ref = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    assert ours.status is LPStatus.OPTIMAL
    assert ours.objective == pytest.approx(ref.fun, abs=1e-8)
    np.testing.assert_allclose(A @ ours.x, b, atol=1e-9)
    assert ours.x.min() >= 0


def test_redundant_rows_are_dropped():
    c, A, b = _random_lp(4, 3, 8)
    A2 = np.vstack([A, A[0] + 2 * A[1]])
    b2 = np.append(b, b[0] + 2 * b[1])
    assert solve_standard_form(c, A2, b2).objective == pytest.approx(
        solve_standard_form(c, A, b).objective, abs=1e-10)


def test_negative_right_hand_side():
    res = solve_standard_form([1.0, 2.0], [[-1.0, -1.0]], [-3.0])
    assert res.status is LPStatus.OPTIMAL
    np.testing.assert_allclose(res.x, [3.0, 0.0])


def test_infeasible_and_unbounded():
    res = solve_standard_form([1.0, 1.0], [[1.0, 1.0]], [-1.0])
    assert res.status is LPStatus.INFEASIBLE and res.infeasibility > 0
    res = solve_standard_form([-1.0, 0.0], [[1.0, -1.0]], [1.0])
    assert res.status is LPStatus.UNBOUNDED


def test_degenerate_ties_are_deterministic():
    # every vertex of the simplex is optimal; the answer must not depend on the run
    c = np.zeros(6)
    A = np.ones((1, 6))
    first = solve_standard_form(c, A, [1.0])
    again = solve_standard_form(c, A, [1.0])
    assert first.basis == again.basis
    np.testing.assert_array_equal(first.x, again.x)
