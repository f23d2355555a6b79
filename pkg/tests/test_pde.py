import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kdvflat.errors import ConfigError, DepthError, RoughnessError
from kdvflat.flatout import flat_output_polynomial
from kdvflat.genfun import build_table
from kdvflat.pde import (
    Discretization,
    GalerkinSpace,
    as_profile,
    energy_report,
    psi,
    solve_controlled,
    solve_free,
    trace_jets,
)
from kdvflat.synth import assemble_state, synthesize_control

SIN = lambda x: np.sin(np.pi * np.asarray(x))


@pytest.fixture(scope="module")
def free_a1():
    return solve_free(SIN, 1.0, 1.0)


def test_discretization_validation():
    for bad in ({"n_x": 8}, {"scheme": "chebyshev"}, {"theta": 0.3}, {"stepper": "rk4"}, {"n_t": 0}):
        with pytest.raises(ConfigError):
            Discretization(**bad)
    d = Discretization().refined()
    assert (d.n_x, d.n_t) == (128, 2000)
    assert Discretization().refined(space=False).n_x == 64


def test_sampled_profile():
    xs = np.linspace(-1, 0, 41)
    f = as_profile((xs, np.sin(np.pi * xs)))
    assert abs(f(-0.5) + 1.0) < 1e-5
    with pytest.raises(ConfigError):
        as_profile((np.linspace(-0.5, 0, 5), np.zeros(5)))


def test_galerkin_reproduces_admissible_polynomial():
    # y = x^2 (x + 1) satisfies y(0) = y'(0) = 0, y(-1) = 0
    sp = GalerkinSpace(32, 0.0)
    f = lambda x: x**2 * (x + 1.0)
    c = sp.project(f)
    xs = np.linspace(-1, 0, 11)
    np.testing.assert_allclose(sp.evaluate(c, 0.0, xs), f(xs), atol=1e-13)
    np.testing.assert_allclose(sp.evaluate(c, 0.0, xs, 3), 6.0, atol=1e-11)
    assert sp.l2(c) == pytest.approx(np.sqrt(1 / 105), rel=1e-12)


@given(st.floats(-2.0, 2.0))
def test_galerkin_boundary_conditions(u):
    sp = GalerkinSpace(24, 1.0)
    c = np.random.default_rng(0).standard_normal(sp.size)
    assert sp.evaluate(c, u, -1.0) == pytest.approx(u, abs=1e-12)
    assert abs(sp.evaluate(c, u, 0.0)) < 1e-12
    assert abs(sp.evaluate(c, u, 0.0, 1)) < 1e-11


@pytest.mark.parametrize("a", [0.0, 1.0, 4.0])
def test_psi_is_an_eigenfunction(a):
    lam = -80.0 + 3.0j
    x = np.linspace(-1, 0, 7)
    assert abs(psi(lam, 0.0, a)) < 1e-12 and abs(psi(lam, 0.0, a, 1)) < 1e-12
    assert abs(psi(lam, 0.0, a, 2) - 1.0) < 1e-12
    Ppsi = psi(lam, x, a, 3) + a * psi(lam, x, a, 1)
    np.testing.assert_allclose(Ppsi, -lam * psi(lam, x, a), atol=1e-9 * abs(lam))


@pytest.mark.parametrize("a", [0.0, 1.0])
def test_free_solution_contracts(a):
    tr = solve_free(SIN, a, 1.0)
    er = energy_report(tr, a)
    assert er.max_step_growth <= 1e-8
    assert er.kato_constant_fit <= er.kato_bound
    assert np.all(np.diff(er.l2_norms) <= 1e-14)
    assert tr.provenance == "pde_solver"


def test_zero_data_stays_zero():
    tr = solve_controlled(np.zeros(1001), None, 1.0, 1.0)
    assert not np.any(tr.y)
    er = energy_report(tr, 1.0)
    assert er.kato_constant_fit == 0.0


def test_control_sample_count_checked():
    with pytest.raises(ConfigError):
        solve_controlled(np.zeros(17), None, 0.0, 1.0)


def test_fd_cross_check_converges(free_a1):
    errs = []
    for n in (64, 128, 256):
        fd = solve_free(SIN, 1.0, 1.0, Discretization(n_x=n, scheme="finite_difference"))
        errs.append(np.max(np.abs(fd.y - free_a1.y)))
    assert errs[-1] < 1e-4
    assert errs[0] / errs[1] > 3.0 and errs[1] / errs[2] > 3.0


def test_modal_agrees_with_galerkin(free_a1):
    ms = free_a1.spectral.modal()
    assert np.all(np.diff(ms.lams.real) < 0)
    xs = np.linspace(-1, 0, 11)
    assert np.max(np.abs(ms.value(xs, 0.2) - free_a1.spectral.evaluate(xs, 0.2))) < 1e-7
    for lam in ms.lams[:4]:
        assert abs(psi(lam, -1.0, 1.0)) < 1e-8 * np.max(np.abs(psi(lam, xs, 1.0)))


def test_trace_depth_zero_matches_direct_evaluation(free_a1):
    # the modal trace is exact in time; the solver value carries the
    # Crank-Nicolson error and converges to it under time refinement while
    # the trace is well above the undamped stiff-mode noise (t <= 0.15 here)
    fine = solve_free(SIN, 1.0, 1.0, Discretization(n_t=4000))
    for t in (0.08, 0.1, 0.15):
        w = trace_jets(free_a1, t, 0, 1.0).coeffs[0]
        coarse = abs(free_a1.spectral.evaluate(0.0, t, 2) - w)
        refined = abs(fine.spectral.evaluate(0.0, t, 2) - w)
        assert coarse <= 2e-2 * abs(w)
        assert refined <= coarse / 4


def test_trace_methods_agree(free_a1):
    m = trace_jets(free_a1, 0.1, 1, 1.0, method="modal").derivatives()
    s = trace_jets(free_a1, 0.1, 1, 1.0, method="spatial").derivatives()
    np.testing.assert_allclose(s, m, rtol=2e-2)
    with pytest.raises(DepthError):
        trace_jets(free_a1, 0.1, 2, 1.0, method="spatial")


def test_trace_guards(free_a1):
    with pytest.raises(DepthError):
        trace_jets(free_a1, 0.3, 7, 1.0)
    with pytest.raises(RoughnessError):
        trace_jets(free_a1, 0.01, 2, 1.0)
    with pytest.raises(ConfigError):
        trace_jets(free_a1, 0.3, 2, 0.0)
    fd = solve_free(SIN, 1.0, 1.0, Discretization(scheme="finite_difference"))
    with pytest.raises(ConfigError):
        trace_jets(fd, 0.3, 2, 1.0)


@pytest.mark.parametrize("a", [0.0, 1.0])
def test_manufactured_solution(a):
    # cubic flat output: the N = 3 series is an exact solution
    table = build_table(a, 3)
    z = flat_output_polynomial([1.0, 1.0, 0.5, 1.0 / 6.0])
    disc = Discretization()
    tg = np.linspace(0, 1, disc.n_t + 1)
    xs = np.linspace(-1, 0, 101)
    exact = assemble_state(table, z, 3, xs, tg)
    u = synthesize_control(table, z, 3, tg)
    tr = solve_controlled(u, (xs, exact.y[0]), a, 1.0, disc, xs)
    assert np.max(np.abs(tr.y - exact.y)) <= 1e-4
    # boundary conditions of the exact solution
    assert np.max(np.abs(exact.y[:, -1])) < 1e-15
    np.testing.assert_allclose(exact.y[:, 0], u.values, atol=1e-14)


@pytest.mark.parametrize("a", [0.0, 1.0])
def test_trace_growth_within_gevrey_three_halves(a):
    from kdvflat.flatout import gevrey_fit

    tr = solve_free(SIN, a, 1.0)
    mags = np.zeros(7)
    for t in np.linspace(0.05, 1.0, 40):
        mags = np.maximum(mags, np.abs(trace_jets(tr, t, 6, a).derivatives()))
    fit = gevrey_fit(mags, min_orders=7)
    assert fit.s <= 1.5 * 1.25
    assert np.all(fit.envelope(np.arange(7)) >= mags * (1 - 1e-12))
    # beyond t = eps the first mode dominates: successive ratios approach |lambda_1|
    lam1 = abs(tr.spectral.modal().lams[0])
    np.testing.assert_allclose(mags[1:4] / mags[:3], lam1, rtol=1e-4)
