"""Gevrey-class flat outputs z(t).

The flat output is the trace z(t) = y_xx(0, t). Two constructions are
provided: a reachability output glued from a bump and a polynomial with
prescribed jet at T, and a null-control output that switches off a free
trace with a Gevrey step function.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import gammaln

from .errors import ConfigError, DepthError, FitError, NotReachableError
from .genfun import apply_P
from .jets import Jet, jet_const, jet_exp, jet_pow_real, jet_var

# Inside this distance from 0 or 1 the step function is replaced by its plateau.
PLATEAU_BAND = 1e-12
# exp(-740) is below every derivative we ever form at moderate depth.
_EXP_CUTOFF = 740.0


@dataclass(frozen=True)
class StepParams:
    s: float
    M: float
    tau: float
    T: float

    def __post_init__(self):
        if self.s <= 1.0:
            raise ConfigError(f"Gevrey order s must exceed 1, got {self.s}")
        if self.M <= 0:
            raise ConfigError("shape constant M must be positive")
        if not 0 < self.tau < self.T:
            raise ConfigError(f"need 0 < tau < T, got tau={self.tau}, T={self.T}")

    @property
    def sigma(self) -> float:
        return 1.0 / (self.s - 1.0)


def _plateau(value: float, t0: float, depth: int) -> Jet:
    return jet_const(value, t0, depth)


def step_phi(params: StepParams, rho: float, depth: int) -> Jet:
    """Jet in rho of the Gevrey step: 1 for rho <= 0, 0 for rho >= 1."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if rho < PLATEAU_BAND:
        return _plateau(1.0, rho, depth)
    if rho > 1.0 - PLATEAU_BAND:
        return _plateau(0.0, rho, depth)
    M, sig = params.M, params.sigma
    h0 = M / (1.0 - rho) ** sig - M / rho**sig
    if h0 < -_EXP_CUTOFF:
        return _plateau(1.0, rho, depth)
    if h0 > _EXP_CUTOFF:
        return _plateau(0.0, rho, depth)
    r = jet_var(rho, depth)
    # phi = 1 / (1 + exp(h)), h = M (1-rho)^-sigma - M rho^-sigma
    h = M / jet_pow_real(1.0 - r, sig) - M / jet_pow_real(r, sig)
    if h0 <= 0.0:
        e = jet_exp(h)
        return 1.0 / (1.0 + e)
    e = jet_exp(-h)
    return e / (1.0 + e)


def _in_time(rho_jet: Jet, t: float, scale: float) -> Jet:
    # chain rule for rho = (t - tau) / (T - tau); keep t0 bit-identical to t
    return Jet(t, rho_jet.coeffs * scale ** np.arange(rho_jet.coeffs.size))


def step_phi_t(params: StepParams, t: float, depth: int) -> Jet:
    """Jet in t of phi_s((t - tau) / (T - tau))."""
    width = params.T - params.tau
    rho = (t - params.tau) / width
    return _in_time(step_phi(params, rho, depth), t, 1.0 / width)


def bump_g(tau: float, T: float, t: float, depth: int, M: float = 1.0) -> Jet:
    """Jet of g(t) = 1 - phi_2((t - tau)/(T - tau)): 0 on [0, tau], flat 1 at T."""
    if not tau < T:
        raise ConfigError(f"bump needs tau < T, got tau={tau}, T={T}")
    return 1.0 - step_phi_t(StepParams(2.0, M, tau, T), t, depth)


def extract_b(y1, a: float, N: int, tol: float = 1e-10) -> np.ndarray:
    """Flat-output jet b_n = (-1)^n d^2/dx^2 (P^n y1)(0), n = 0..N.

    y1 holds power-series coefficients about x = 0. The sign (-1)^n makes
    sum_n b_n g_n reproduce y1, because P^n g_i = (-1)^n g_{i-n}.
    """
    c = np.asarray(y1, dtype=float)
    n_check = max(N, c.size)
    b = np.zeros(N + 1)
    Pn = np.zeros(max(c.size, 3))
    Pn[: c.size] = c
    for n in range(n_check + 1):
        if abs(Pn[0]) > tol or abs(Pn[1]) > tol:
            raise NotReachableError(
                f"(P^{n} y1)(0) = {Pn[0]:.3e}, d/dx (P^{n} y1)(0) = {Pn[1]:.3e}: "
                "target violates the reachable-class conditions at x = 0"
            )
        if n <= N:
            b[n] = (-1) ** n * 2.0 * Pn[2]
        Pn = apply_P(Pn, a)
    return b


@dataclass
class FlatOutput:
    kind: str  # "reach" or "null_control"
    source: Callable[[float, int], Jet]
    T: float
    tau: float
    envelope: tuple | None = None  # (M_env, R_env, s_env)
    meta: dict = field(default_factory=dict)

    def jet(self, t: float, depth: int) -> Jet:
        return self.source(t, depth)


def _poly_jet(b: np.ndarray, T: float, t: float, depth: int) -> Jet:
    # f(t) = sum_i b_i (t - T)^i / i!, re-expanded about t
    dt = t - T
    c = np.zeros(depth + 1)
    for k in range(min(depth, b.size - 1) + 1):
        i = np.arange(k, b.size)
        c[k] = np.sum(b[i] * dt ** (i - k) / np.array([math.factorial(j - k) for j in i])) / math.factorial(k)
    return Jet(t, c)


def flat_output_reach(b, tau: float, T: float, depth: int, M: float = 1.0) -> FlatOutput:
    b = np.asarray(b, dtype=float)
    if depth < b.size:
        raise DepthError(f"jet depth {depth} cannot carry {b.size} prescribed derivatives")
    if not 0 < tau < T:
        raise ConfigError(f"need 0 < tau < T, got tau={tau}, T={T}")

    def source(t: float, d: int) -> Jet:
        return bump_g(tau, T, t, d, M) * _poly_jet(b, T, t, d)

    return FlatOutput("reach", source, T, tau, envelope=None, meta={"b": b, "M": M, "depth": depth})


def flat_output_polynomial(coeffs, T: float = 1.0) -> FlatOutput:
    """z(t) = sum_k coeffs[k] t^k. With N >= degree the truncated series is exact."""
    q = np.asarray(coeffs, dtype=float)

    def source(t: float, d: int) -> Jet:
        # Taylor coefficients about t: f^(k)(t) / k!
        return _poly_jet(np.array([math.factorial(k) * c for k, c in enumerate(q)]), 0.0, t, d)

    deg = int(np.max(np.flatnonzero(q))) if np.any(q) else 0
    return FlatOutput("reach", source, T, 0.0, envelope=None, meta={"degree": deg})


def flat_output_null(
    trace_jets: Callable[[float, int], Jet],
    params: StepParams,
    coverage: tuple[float, float] | None = None,
) -> FlatOutput:
    """z(t) = phi_s((t - tau)/(T - tau)) w(t) for a free trace w.

    trace_jets(t, d) may return a jet shorter than d; missing orders are
    taken as zero (their weight in the series is at most 1/(3i+2)!).
    """
    if coverage is not None:
        lo, hi = coverage
        if lo > params.tau or hi < params.T:
            raise ConfigError(
                f"trace jets cover [{lo}, {hi}] but the switch-off needs [{params.tau}, {params.T}]"
            )

    def source(t: float, d: int) -> Jet:
        phi = step_phi_t(params, t, d)
        if not np.any(phi.coeffs):
            return jet_const(0.0, t, d)
        w = trace_jets(t, d).pad(d)
        if t <= params.tau:
            return w
        return phi * w

    return FlatOutput(
        "null_control", source, params.T, params.tau, envelope=None,
        meta={"s": params.s, "M": params.M},
    )


@dataclass
class GevreyFit:
    s: float
    R: float
    C: float
    finite_support: bool = False
    orders: np.ndarray | None = None

    def envelope(self, i):
        i = np.asarray(i, dtype=float)
        return self.C * np.exp(self.s * gammaln(i + 1) - i * math.log(self.R))


def gevrey_fit(magnitudes, min_orders: int = 8) -> GevreyFit:
    """Fit log m_i ~ log C + s log(i!) - i log R by least squares.

    C is then raised so the envelope dominates every supplied magnitude.
    Trailing exact zeros are reported as finite support and excluded.
    """
    m = np.abs(np.asarray(magnitudes, dtype=float))
    if m.size < min_orders:
        raise FitError(f"need at least {min_orders} orders, got {m.size}")
    if not np.any(m > 0):
        raise FitError("all derivative magnitudes vanish")
    nz = np.flatnonzero(m > 0)
    finite_support = nz[-1] < m.size - 1
    i = nz.astype(float)
    if i.size < 3:
        return GevreyFit(0.0, 1.0, float(m.max()), True, nz)
    A = np.column_stack([np.ones_like(i), gammaln(i + 1), -i])
    coef, *_ = np.linalg.lstsq(A, np.log(m[nz]), rcond=None)
    logC, s, logR = coef
    logC = max(logC, float(np.max(np.log(m[nz]) - s * gammaln(i + 1) + i * logR)))
    return GevreyFit(float(s), float(math.exp(logR)), float(math.exp(logC)), bool(finite_support), nz)
