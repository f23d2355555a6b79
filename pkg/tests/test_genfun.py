import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kdvflat.errors import ConfigError, DomainError, ResolutionError
from kdvflat.genfun import (
    apply_P,
    build_table,
    check_envelope,
    eval_g,
    g_by_convolution,
    table_from_json,
    table_to_json,
)


def test_g0_closed_forms():
    # a = 0: g_0 = x^2/2; a > 0: g_0 = (1 - cos(sqrt(a) x))/a
    assert eval_g(build_table(0.0, 2), 0, -1.0) == pytest.approx(0.5, abs=1e-15)
    assert eval_g(build_table(1.0, 2), 0, -1.0) == pytest.approx(1 - math.cos(1.0), abs=1e-15)
    assert eval_g(build_table(4.0, 2), 0, -1.0) == pytest.approx((1 - math.cos(2.0)) / 4, abs=1e-15)


def test_a0_monomials():
    # for a = 0 the cascade gives g_i = (-1)^i x^(3i+2)/(3i+2)!
    t = build_table(0.0, 8)
    for i in range(9):
        expect = np.zeros(t.n_terms)
        expect[3 * i + 2] = (-1) ** i / math.factorial(3 * i + 2)
        np.testing.assert_allclose(t.row(i), expect, atol=1e-300, rtol=1e-14)


@pytest.mark.parametrize("a", [0.0, 1.0, 4.0])
def test_cauchy_data_and_shift(a):
    t = build_table(a, 10)
    for i in range(11):
        assert eval_g(t, i, 0.0) == 0.0
        assert eval_g(t, i, 0.0, 1) == 0.0
        assert eval_g(t, i, 0.0, 2) == (1.0 if i == 0 else 0.0)
    # P g_0 = 0 and P g_i = -g_{i-1}
    assert np.max(np.abs(apply_P(t.row(0), a))) < 1e-14
    for i in range(1, 11):
        np.testing.assert_allclose(apply_P(t.row(i), a), -t.row(i - 1), atol=1e-15)


@pytest.mark.parametrize("a", [0.0, 1.0, 4.0])
def test_generating_envelope(a):
    rep = check_envelope(build_table(a, 30), np.linspace(-1.0, 0.0, 201))
    assert rep.passed, rep.violations
    assert rep.max_ratio <= 1.0 + 1e-10


@pytest.mark.parametrize("a", [0.0, 1.0, 4.0])
def test_convolution_oracle(a):
    xs = np.linspace(-1.0, 0.0, 13)
    ref = g_by_convolution(a, 5, xs)
    t = build_table(a, 5)
    mine = np.array([eval_g(t, i, xs) for i in range(6)])
    assert np.max(np.abs(ref - mine)) <= 1e-9


def test_errors():
    with pytest.raises(ConfigError):
        build_table(-1.0, 3)
    with pytest.raises(ConfigError):
        build_table(0.0, 10, n_terms=20)
    with pytest.raises(ResolutionError):
        build_table(100.0, 3, n_terms=12)
    t = build_table(0.0, 3)
    with pytest.raises(DomainError):
        eval_g(t, 0, 0.5)
    with pytest.raises(IndexError):
        t.row(4)


def test_json_roundtrip(tmp_path):
    t = build_table(1.0, 6)
    path = tmp_path / "table.json"
    table_to_json(t, path)
    t2 = table_from_json(path)
    assert t2.a == t.a and t2.i_max == t.i_max
    np.testing.assert_array_equal(t2.coeffs, t.coeffs)


def test_mutation_breaks_envelope():
    t = build_table(0.0, 10)
    c = np.array(t.coeffs)
    c[3, 11] += 1e-3
    from kdvflat.verify import mutate_table

    bad = mutate_table(t, 3, 11, 1e-3)
    assert not check_envelope(bad, np.linspace(-1, 0, 201)).passed


@given(st.floats(0.0, 6.0), st.integers(0, 12), st.floats(-1.0, 0.0))
def test_envelope_property(a, i, x):
    t = build_table(a, 12)
    g = eval_g(t, i, x)
    assert abs(g) <= abs(x) ** (3 * i + 2) / math.factorial(3 * i + 2) * (1 + 1e-10) + 1e-300
