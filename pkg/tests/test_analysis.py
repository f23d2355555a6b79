import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kdvflat.analysis import (
    NotApplicableError,
    PolyFn,
    apply_P_poly,
    empirical_K,
    lower_equivalence_check,
    power_bound_check,
    graph_norm_constant,
    inequality_sweep,
    lp_norm,
    random_polys,
    sobolev_norm,
)


@st.composite
def polys(draw, max_degree=9):
    deg = draw(st.integers(0, max_degree))
    c = draw(st.lists(st.floats(-5, 5, allow_nan=False), min_size=deg + 1, max_size=deg + 1))
    return PolyFn(np.array(c))


def test_exact_norms_of_monomials():
    x = PolyFn([0.0, 1.0])
    assert lp_norm(x, 1) == pytest.approx(0.5, abs=1e-15)
    assert lp_norm(x, 2) == pytest.approx(1 / math.sqrt(3), abs=1e-15)
    assert lp_norm(x, "inf") == 1.0
    # sign change at x = -1/2: int |2x + 1| = 1/2
    assert lp_norm(PolyFn([1.0, 2.0]), 1) == pytest.approx(0.5, abs=1e-15)
    # interior maximum of -x(x + 1) at x = -1/2
    assert lp_norm(PolyFn([0.0, -1.0, -1.0]), np.inf) == pytest.approx(0.25, abs=1e-15)
    with pytest.raises(ValueError):
        lp_norm(x, 3)


def test_sobolev_norm_of_square():
    f = PolyFn([0.0, 0.0, 1.0])
    expect = 1 / math.sqrt(5) + 2 / math.sqrt(3) + 2
    assert sobolev_norm(f, 3, 2) == pytest.approx(expect, rel=1e-14)


def test_apply_P_poly():
    np.testing.assert_allclose(apply_P_poly(PolyFn([0, 0, 0, 1.0]), 2.0).coeffs, [6.0, 0.0, 6.0])
    assert apply_P_poly(PolyFn([0, 0, 1.0]), 0.0, 2).coeffs.tolist() == [0.0]


def test_graph_norm_closed_form():
    # f = x^2, a = 1, p = 2: C1 = ||f||_{3,2} / (||f|| + ||2x||)
    num = 1 / math.sqrt(5) + 2 / math.sqrt(3) + 2
    den = 1 / math.sqrt(5) + 2 / math.sqrt(3)
    assert graph_norm_constant([PolyFn([0, 0, 1.0])], 1.0, 2) == pytest.approx(num / den, rel=1e-13)
    with pytest.raises(ValueError):
        graph_norm_constant([], 1.0, 2)


def test_lower_equivalence_needs_positive_a():
    with pytest.raises(NotApplicableError):
        lower_equivalence_check(PolyFn([1.0]), 0.0, 1, 2)


def test_n_zero_is_equality():
    f = PolyFn([1.0, -2.0, 3.0])
    r = power_bound_check(f, 1.0, 0, 2)
    assert r.passed and r.margin == pytest.approx(0.0, abs=1e-15)


def test_empirical_K_positive():
    ps = random_polys(np.random.default_rng(1), 20)
    assert empirical_K(ps, 1.0, 1, 2) > 0
    with pytest.raises(ValueError):
        empirical_K(ps, 1.0, 0, 2)


def test_random_polys_reproducible():
    a = random_polys(np.random.default_rng(3), 3)
    b = random_polys(np.random.default_rng(3), 3)
    assert all(np.array_equal(p.coeffs, q.coeffs) for p, q in zip(a, b))
    assert all(p.degree == 9 for p in a)


@given(polys(), st.sampled_from([0.5, 1.0, 4.0]), st.integers(0, 3), st.sampled_from([1, 2, "inf"]))
def test_power_bound_property(f, a, n, p):
    assert power_bound_check(f, a, n, p).passed


@given(polys(), st.sampled_from([0.5, 1.0, 4.0]), st.integers(0, 3), st.sampled_from([1, 2, "inf"]))
def test_lower_equivalence_property(f, a, n, p):
    assert lower_equivalence_check(f, a, n, p).passed


@given(polys(max_degree=6))
def test_norm_ordering(f):
    # on an interval of length 1: ||f||_1 <= ||f||_2 <= ||f||_inf
    l1, l2, li = lp_norm(f, 1), lp_norm(f, 2), lp_norm(f, "inf")
    assert l1 <= l2 * (1 + 1e-12) + 1e-300
    assert l2 <= li * (1 + 1e-12) + 1e-300


def test_small_sweep():
    sw = inequality_sweep(50, seed=2)
    assert sw.passed and sw.checks == 50 * 3 * 4 * 3 * 2
    assert sw.min_margin_power >= 0.0 and sw.min_margin_lower > 0.0
