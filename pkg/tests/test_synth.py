import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kdvflat.errors import DepthError, DivergenceRiskError
from kdvflat.flatout import flat_output_polynomial, flat_output_reach
from kdvflat.genfun import build_table, eval_g
from kdvflat.synth import (
    ControlSignal,
    assemble_state,
    estimate_envelope,
    residual_check,
    synthesize_control,
    truncation_bound,
)


def test_constant_flat_output_gives_g0():
    # z = 1: y = g_0, u = g_0(-1)
    t = build_table(1.0, 4)
    z = flat_output_polynomial([1.0])
    u = synthesize_control(t, z, 4, np.linspace(0, 1, 5))
    np.testing.assert_allclose(u.values, 1.0 - math.cos(1.0), rtol=1e-14)
    xs = np.linspace(-1, 0, 7)
    traj = assemble_state(t, z, 4, xs, [0.0, 0.5])
    np.testing.assert_allclose(traj.y[1], eval_g(t, 0, xs), atol=1e-15)


def test_linear_flat_output_a0():
    # z = t, a = 0: y = t x^2/2 - x^5/120
    t = build_table(0.0, 4)
    z = flat_output_polynomial([0.0, 1.0])
    xs = np.linspace(-1, 0, 9)
    traj = assemble_state(t, z, 4, xs, [0.7])
    np.testing.assert_allclose(traj.y[0], 0.7 * xs**2 / 2 - xs**5 / 120, atol=1e-15)
    u = synthesize_control(t, z, 4, [0.7])
    assert u.values[0] == pytest.approx(0.35 + 1 / 120, abs=1e-15)


def test_null_control_is_zero_before_tau():
    from kdvflat.flatout import FlatOutput
    from kdvflat.jets import Jet

    z = FlatOutput("null_control", lambda t, d: Jet(t, np.ones(d + 1)), 1.0, 0.5)
    u = synthesize_control(build_table(0.0, 5), z, 5, np.linspace(0, 1, 11))
    assert np.all(u.values[u.times <= 0.5] == 0.0)
    assert np.all(u.values[u.times > 0.5] != 0.0)


def test_synthesis_depth_checks():
    t = build_table(0.0, 4)
    with pytest.raises(DepthError):
        synthesize_control(t, flat_output_polynomial([1.0]), 5, [0.0])
    z = flat_output_reach([1.0], 0.5, 1.0, depth=2)
    short = type(z)("reach", lambda s, d: z.jet(s, 1), 1.0, 0.5)
    with pytest.raises(DepthError):
        synthesize_control(t, short, 3, [0.8])


def test_tail_bound_flag():
    t = build_table(0.0, 6)
    z = flat_output_polynomial([1.0, 2.0])
    u = synthesize_control(t, z, 6, [0.0, 1.0])
    assert u.tail_bound == 0.0 and not u.meta["tail_bound_available"]
    u2 = synthesize_control(t, z, 6, [0.0, 1.0], envelope=(1.0, 1.0, 2.0))
    assert u2.tail_bound > 0 and u2.meta["tail_bound_available"]


def test_control_signal_validation_and_call():
    c = ControlSignal([0.0, 1.0], [0.0, 2.0], 3, 0.0)
    assert c(0.25) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        ControlSignal([0.0], [np.nan], 3, 0.0)
    with pytest.raises(ValueError):
        ControlSignal([0.0, 1.0], [0.0], 3, 0.0)


def test_truncation_bound_edge_cases():
    assert truncation_bound((0.0, 1.0, 2.0), 5, -1.0) == 0.0
    assert truncation_bound((1.0, 1.0, 2.0), 5, 0.0) == 0.0
    with pytest.raises(DivergenceRiskError):
        truncation_bound((1.0, 1.0, 3.5), 5, -1.0)
    with pytest.raises(DivergenceRiskError):
        truncation_bound((1.0, 0.5, 3.0), 5, -1.0)
    # s = 3 with R > 1 converges
    assert math.isfinite(truncation_bound((1.0, 2.0, 3.0), 5, -1.0))


def test_truncation_bound_dominates_direct_sum():
    M, R, s = 2.0, 0.3, 2.0
    direct = sum(
        math.exp(math.log(M) + s * math.lgamma(i + 1) - i * math.log(R) - math.lgamma(3 * i + 3))
        for i in range(9, 400)
    )
    b = truncation_bound((M, R, s), 8, -1.0)
    assert direct <= b <= direct * (1 + 1e-6)


@given(st.floats(0.1, 5.0), st.floats(1.0, 2.9), st.integers(1, 30))
def test_truncation_bound_decreases_in_N(R, s, N):
    env = (1.0, R, s)
    assert truncation_bound(env, N + 1, -1.0) <= truncation_bound(env, N, -1.0)


@given(st.floats(0.1, 5.0), st.floats(1.0, 2.9), st.floats(0.05, 1.0))
def test_truncation_bound_grows_with_x(R, s, x):
    env = (1.0, R, s)
    assert truncation_bound(env, 6, -x * 0.5) <= truncation_bound(env, 6, -x)


@pytest.mark.parametrize("a", [0.0, 1.0])
def test_residual_identity_is_exact(a):
    t = build_table(a, 12)
    z = flat_output_reach([2.0, -1.0, 0.5], 0.5, 1.0, depth=13)
    r = residual_check(t, z, 12, np.linspace(-1, 0, 21), np.linspace(0, 1, 9))
    assert r.relative <= 1e-12
    assert r.boundary_defect == 0.0


def test_envelope_dominates_samples():
    z = flat_output_reach([3.0, -3.0, 3.0], 0.5, 1.0, depth=13)
    (C, R, s), mags = estimate_envelope(z, np.linspace(0.5, 1.0, 41), 12)
    i = np.arange(13)
    env = C * np.exp(s * np.array([math.lgamma(k + 1) for k in i])) / R**i
    assert np.all(env >= mags * (1 - 1e-12))
    (C0, _, _), _ = estimate_envelope(flat_output_polynomial([0.0]), [0.0, 1.0], 10)
    assert C0 == 0.0
