"""Numerical solver for y_t + y_xxx + a y_x = 0 on [-1, 0].

Boundary conditions: y(0, t) = y_x(0, t) = 0 and y(-1, t) = u(t).

Two spatial schemes share one theta-stepper:

* ``legendre_galerkin`` (default): polynomials of degree n_x in the basis
  L_k + a_k L_{k+1} + b_k L_{k+2} + c_k L_{k+3}, each satisfying the three
  homogeneous boundary conditions. The Dirichlet datum is lifted by u(t) x^2.
  Mass M and stiffness S are exact, and (S v, v) = v_x(-1)^2 / 2 >= 0, so
  every theta >= 1/2 step contracts the L2 norm.
* ``finite_difference``: second-order central differences on a uniform grid,
  kept as a cross-check.

For free solutions a modal (eigenfunction) expansion is also available; it
supplies the high-order time derivatives of the trace y_xx(0, t) that the
null-control construction needs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy import linalg as sla
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq, newton

from .errors import ConfigError, DepthError, NumericalError, RoughnessError, StabilityError
from .jets import Jet
from .synth import ControlSignal, Trajectory

__all__ = [
    "Discretization",
    "EnergyReport",
    "GalerkinSpace",
    "FiniteDifferenceSpace",
    "ModalSolution",
    "SpectralField",
    "solve_free",
    "solve_controlled",
    "trace_jets",
    "energy_report",
    "as_profile",
]

SCHEMES = ("legendre_galerkin", "finite_difference")
DEFAULT_TRACE_CAP = 6
# Crank-Nicolson leaves stiff-mode noise that P^n amplifies; only w and w' are usable.
SPATIAL_TRACE_CAP = 1


@dataclass(frozen=True)
class Discretization:
    n_x: int = 64
    scheme: str = "legendre_galerkin"
    n_t: int = 1000
    stepper: str = "theta"
    theta: float = 0.5
    n_start: int = 4  # backward-Euler steps before switching to theta
    n_out: int = 101  # output grid points in x

    def __post_init__(self):
        if self.n_x < 16:
            raise ConfigError(f"n_x must be >= 16, got {self.n_x}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.n_t < 1:
            raise ConfigError("n_t must be >= 1")
        if self.stepper != "theta":
            raise ConfigError(f"unknown stepper {self.stepper!r}")
        if not 0.5 <= self.theta <= 1.0:
            raise ConfigError(f"theta must lie in [1/2, 1], got {self.theta}")
        if self.n_start < 0:
            raise ConfigError("n_start must be >= 0")
        if self.n_out < 2:
            raise ConfigError("n_out must be >= 2")

    def refined(self, factor: int = 2, space: bool = True, time: bool = True) -> "Discretization":
        return Discretization(
            self.n_x * factor if space else self.n_x,
            self.scheme,
            self.n_t * factor if time else self.n_t,
            self.stepper,
            self.theta,
            self.n_start,
            self.n_out,
        )


def as_profile(y0) -> Callable[[np.ndarray], np.ndarray]:
    """Accept a callable, None (zero), or an (x, values) sample pair."""
    if y0 is None:
        return lambda x: np.zeros_like(np.asarray(x, dtype=float))
    if callable(y0):
        return y0
    xs, vals = y0
    xs = np.asarray(xs, dtype=float)
    vals = np.asarray(vals, dtype=float)
    if xs.min() > -1.0 or xs.max() < 0.0:
        raise ConfigError("sampled initial state must cover [-1, 0]")
    spline = CubicSpline(xs, vals)
    return lambda x: spline(np.asarray(x, dtype=float))


# --------------------------------------------------------------------------
# spatial schemes


def _legendre_derivative_matrix(n: int, m: int) -> np.ndarray:
    """Coefficient map of d^m/dx^m for x = (xi - 1)/2, xi in [-1, 1]."""
    D = np.zeros((n + 1, n + 1))
    for k in range(n + 1):
        e = np.zeros(n + 1)
        e[k] = 1.0
        d = npleg.legder(e, m) * 2.0**m
        D[: d.size, k] = d
    return D


class GalerkinSpace:
    """Exact Galerkin operators on polynomials of degree n on [-1, 0]."""

    scheme = "legendre_galerkin"

    def __init__(self, n: int, a: float):
        self.n, self.a = n, float(a)
        K = n - 2
        B = np.zeros((n + 1, K))
        for k in range(K):
            idx = [k + 1, k + 2, k + 3]
            # value at xi=-1, value at xi=1, slope at xi=1
            A = np.array([[(-1.0) ** j for j in idx], [1.0] * 3, [j * (j + 1) / 2 for j in idx]])
            rhs = -np.array([(-1.0) ** k, 1.0, k * (k + 1) / 2])
            B[k, k] = 1.0
            B[idx, k] = np.linalg.solve(A, rhs)
        self.B = B
        self.w = 1.0 / (2 * np.arange(n + 1) + 1)  # L2(-1, 0) norms of L_k(2x+1), squared
        self.D1 = _legendre_derivative_matrix(n, 1)
        DP = _legendre_derivative_matrix(n, 3) + self.a * self.D1
        W = np.diag(self.w)
        self.M = B.T @ W @ B
        self.S = B.T @ W @ DP @ B
        lift = np.zeros(n + 1)
        lift[:3] = npleg.poly2leg([0.25, -0.5, 0.25])  # x^2 = (xi - 1)^2 / 4
        self.lift = lift
        self.m_lift = B.T @ W @ lift
        self.s_lift = B.T @ W @ DP @ lift
        xq, wq = npleg.leggauss(2 * n + 16)
        self._xq, self._wq = (xq - 1.0) / 2.0, wq / 2.0
        self._Vq = npleg.legvander(xq, n)

    @property
    def size(self) -> int:
        return self.B.shape[1]

    def project(self, f: Callable, u0: float = 0.0) -> np.ndarray:
        """L2 projection of f - u0 x^2 onto the homogeneous space."""
        vals = np.asarray(f(self._xq), dtype=float) - u0 * self._xq**2
        rhs = self.B.T @ (self._Vq.T @ (self._wq * vals))
        return np.linalg.solve(self.M, rhs)

    def legendre(self, c: np.ndarray, u: float = 0.0) -> np.ndarray:
        return self.B @ c + u * self.lift

    def evaluate(self, c, u, x, d: int = 0):
        leg = self.legendre(c, u)
        if d:
            leg = npleg.legder(leg, d) * 2.0**d
        return npleg.legval(2.0 * np.asarray(x, dtype=float) + 1.0, leg)

    def l2(self, c, u=0.0) -> float:
        leg = self.legendre(c, u)
        return math.sqrt(float(np.dot(self.w, leg**2)))

    def dx_l2(self, c, u=0.0) -> float:
        leg = self.D1 @ self.legendre(c, u)
        return math.sqrt(float(np.dot(self.w, leg**2)))

    def operator(self) -> np.ndarray:
        return -np.linalg.solve(self.M, self.S)


class FiniteDifferenceSpace:
    """Central differences; unknowns are y at x_1..x_{n-1} of a uniform grid."""

    scheme = "finite_difference"

    def __init__(self, n: int, a: float):
        self.n, self.a = n, float(a)
        h = 1.0 / n
        self.h = h
        self.x = -1.0 + h * np.arange(n + 1)
        m = n - 1
        L = np.zeros((m, m))  # discrete y_xxx + a y_x acting on the unknowns
        f = np.zeros(m)  # coefficient of y_0 = u in the same rows

        def put(r, j, c):
            if j == n:
                return
            if j == n + 1:  # ghost from y_x(0) = 0
                j = n - 1
            if j == 0:
                f[r] += c
            else:
                L[r, j - 1] += c

        for j in range(1, n):
            r = j - 1
            if j >= 2:
                for off, c in zip((-2, -1, 1, 2), (-1.0, 2.0, -2.0, 1.0)):
                    put(r, j + off, c / (2 * h**3))
            else:
                for off, c in zip((-1, 0, 1, 2), (-1.0, 3.0, -3.0, 1.0)):
                    put(r, j + off, c / h**3)
            put(r, j - 1, -self.a / (2 * h))
            put(r, j + 1, self.a / (2 * h))
        self.M = np.eye(m)
        self.S = L
        self.m_lift = np.zeros(m)
        self.s_lift = f

    @property
    def size(self) -> int:
        return self.n - 1

    def project(self, f: Callable, u0: float = 0.0) -> np.ndarray:
        return np.asarray(f(self.x[1:-1]), dtype=float)

    def _full(self, c, u):
        return np.concatenate([[u], c, [0.0]])

    def evaluate(self, c, u, x, d: int = 0):
        if d:
            raise ConfigError("finite-difference fields support point values only")
        return np.interp(np.asarray(x, dtype=float), self.x, self._full(c, u))

    def l2(self, c, u=0.0) -> float:
        return math.sqrt(float(np.trapezoid(self._full(c, u) ** 2, self.x)))

    def dx_l2(self, c, u=0.0) -> float:
        y = self._full(c, u)
        return math.sqrt(float(np.sum(np.diff(y) ** 2) / self.h))

    def operator(self) -> np.ndarray:
        return -self.S


def make_space(disc: Discretization, a: float):
    if disc.scheme == "legendre_galerkin":
        return GalerkinSpace(disc.n_x, a)
    return FiniteDifferenceSpace(disc.n_x, a)


# --------------------------------------------------------------------------
# modal expansion of free solutions


def _cubic_roots(lam: complex, a: float) -> np.ndarray:
    return np.roots([1.0, 0.0, a, lam]).astype(complex)


def psi(lam: complex, x, a: float, d: int = 0):
    """d-th x-derivative of the solution of P psi = -lam psi with data (0, 0, 1) at 0.

    psi(x; lam) = sum_i lam^i g_i(x); its zeros at x = -1 are the eigenvalues.
    """
    mu = _cubic_roots(lam, a)
    q = 3 * mu**2 + a
    x = np.asarray(x, dtype=float)[..., None]
    return np.sum(mu**d * np.exp(mu * x) / q, axis=-1)


class ModalSolution:
    """y(x, t) = sum_k alpha_k exp(lam_k t) psi_k(x) for free evolution.

    The adjoint problem is the reflection x -> -1 - x of the direct one, so
    psi_k(-1 - x) are the adjoint eigenfunctions and the expansion
    coefficients follow from biorthogonality.
    """

    def __init__(self, y0: Callable, a: float, n_modes: int = 10, n_quad: int = 200, seed_n: int = 64):
        self.a = float(a)
        space = GalerkinSpace(seed_n, a)
        seeds = sla.eigvals(space.operator())
        seeds = seeds[np.argsort(-seeds.real)]
        lams: list[complex] = []
        # unresolved Galerkin modes are strongly oscillatory; only damped,
        # weakly oscillating seeds are refined
        seeds = seeds[np.abs(seeds.imag) <= 0.5 * np.abs(seeds.real)]
        for s0 in seeds:
            if len(lams) >= n_modes:
                break
            try:
                with np.errstate(all="ignore"):
                    r = self._refine(complex(s0))
            except (RuntimeError, ValueError, ArithmeticError, np.linalg.LinAlgError):
                continue
            if not np.isfinite(r) or abs(r - s0) > 0.05 * abs(s0):
                continue
            if any(abs(r - q) <= 1e-8 * abs(r) for q in lams):
                continue
            if abs(r.imag) <= 1e-10 * abs(r):
                r = complex(r.real, 0.0)
            lams.append(r)
        if len(lams) < n_modes:
            raise NumericalError(f"found only {len(lams)} of {n_modes} eigenvalues")
        self.lams = np.array(lams)
        xq, wq = npleg.leggauss(n_quad)
        xq, wq = (xq - 1.0) / 2.0, wq / 2.0
        y = np.asarray(y0(xq), dtype=float)
        self.alphas = np.empty(n_modes, dtype=complex)
        for k, lam in enumerate(self.lams):
            adj = psi(lam, -1.0 - xq, self.a)
            norm = np.sum(wq * psi(lam, xq, self.a) * adj)
            self.alphas[k] = np.sum(wq * y * adj) / norm

    def _refine(self, s0: complex) -> complex:
        if s0.imag == 0.0:
            f = lambda l: float(np.real(psi(l, -1.0, self.a)))
            return complex(brentq(f, 1.02 * s0.real, 0.98 * s0.real, xtol=1e-14 * abs(s0), rtol=1e-15))
        g = lambda l: complex(psi(l, -1.0, self.a))
        return complex(newton(g, s0, tol=1e-14 * abs(s0), maxiter=100))

    def value(self, x, t: float, d: int = 0):
        out = 0.0
        for al, lam in zip(self.alphas, self.lams):
            out = out + al * np.exp(lam * t) * psi(lam, x, self.a, d)
        return np.real(out)

    def trace_derivatives(self, t: float, depth: int) -> np.ndarray:
        """w^(n)(t) for w = y_xx(0, .); psi_k''(0) = 1 for every mode."""
        e = self.alphas * np.exp(self.lams * t)
        return np.array([np.real(np.sum(e * self.lams**n)) for n in range(depth + 1)])


# --------------------------------------------------------------------------
# time stepping


@dataclass
class SpectralField:
    """Solver state history: coefficients c_k(t_j) plus the boundary datum u(t_j)."""

    space: object
    coeffs: np.ndarray  # (n_t + 1, space.size)
    u: np.ndarray
    t_grid: np.ndarray
    y0: Callable | None = None
    free: bool = False
    _modal: ModalSolution | None = None

    def index(self, t: float) -> int:
        j = int(np.argmin(np.abs(self.t_grid - t)))
        if abs(self.t_grid[j] - t) > 1e-12 * max(1.0, abs(t)):
            raise ConfigError(f"t={t} is not a solver time level")
        return j

    def evaluate(self, x, t: float, d: int = 0):
        j = self.index(t)
        return self.space.evaluate(self.coeffs[j], self.u[j], x, d)

    def modal(self, n_modes: int = 10) -> ModalSolution:
        if not self.free or self.y0 is None:
            raise ConfigError("the modal expansion exists only for free solutions")
        if self._modal is None or self._modal.lams.size != n_modes:
            self._modal = ModalSolution(self.y0, self.space.a, n_modes=n_modes)
        return self._modal


def _march(space, disc: Discretization, T: float, c0: np.ndarray, u: np.ndarray, ref: float):
    dt = T / disc.n_t
    M, S, m, s = space.M, space.S, space.m_lift, space.s_lift
    coeffs = np.empty((disc.n_t + 1, c0.size))
    coeffs[0] = c0
    facs = {}

    def factor(theta):
        if theta not in facs:
            facs[theta] = (sla.lu_factor(M + dt * theta * S), M - dt * (1 - theta) * S)
        return facs[theta]

    c = c0
    limit = 10.0 * ref
    for j in range(disc.n_t):
        theta = 1.0 if j < disc.n_start else disc.theta
        lu, rhs_mat = factor(theta)
        rhs = rhs_mat @ c - m * (u[j + 1] - u[j]) - dt * s * (theta * u[j + 1] + (1 - theta) * u[j])
        c = sla.lu_solve(lu, rhs)
        coeffs[j + 1] = c
        nrm = space.l2(c, u[j + 1])
        if not math.isfinite(nrm) or (ref > 0 and nrm > limit):
            raise StabilityError(f"norm {nrm:.3e} exceeds 10x reference {ref:.3e} at step {j + 1}")
    return coeffs


def _assemble(space, disc, T, coeffs, u, x_grid, provenance, y0, free):
    t_grid = np.linspace(0.0, T, disc.n_t + 1)
    x_grid = np.linspace(-1.0, 0.0, disc.n_out) if x_grid is None else np.asarray(x_grid, dtype=float)
    y = np.array([space.evaluate(c, uj, x_grid) for c, uj in zip(coeffs, u)])
    l2 = np.array([space.l2(c, uj) for c, uj in zip(coeffs, u)])
    dx = np.array([space.dx_l2(c, uj) for c, uj in zip(coeffs, u)])
    field_ = SpectralField(space, coeffs, u, t_grid, y0, free)
    meta = {"l2_norms": l2, "dx_norms": dx, "h1_norms": np.sqrt(l2**2 + dx**2), "scheme": disc.scheme}
    return Trajectory(x_grid, t_grid, y, provenance, spectral=field_, meta=meta)


def solve_free(y0, a: float, T: float, disc: Discretization | None = None, x_grid=None) -> Trajectory:
    disc = disc or Discretization()
    if a < 0:
        raise ConfigError(f"drift coefficient must be >= 0, got {a}")
    if T <= 0:
        raise ConfigError("T must be positive")
    prof = as_profile(y0)
    space = make_space(disc, a)
    c0 = space.project(prof)
    u = np.zeros(disc.n_t + 1)
    ref = space.l2(c0)
    coeffs = _march(space, disc, T, c0, u, ref)
    return _assemble(space, disc, T, coeffs, u, x_grid, "pde_solver", prof, True)


def _control_samples(u, t_grid: np.ndarray) -> np.ndarray:
    if u is None:
        return np.zeros_like(t_grid)
    if isinstance(u, ControlSignal):
        if u.times.shape == t_grid.shape and np.allclose(u.times, t_grid, rtol=0, atol=1e-12):
            return u.values.copy()
        return np.interp(t_grid, u.times, u.values)
    if callable(u):
        return np.array([float(u(t)) for t in t_grid])
    vals = np.asarray(u, dtype=float)
    if vals.shape != t_grid.shape:
        raise ConfigError("control samples must match the solver time grid")
    return vals.copy()


def solve_controlled(u, y0, a: float, T: float, disc: Discretization | None = None, x_grid=None) -> Trajectory:
    """u: ControlSignal, callable t -> u(t), or samples on the solver grid."""
    disc = disc or Discretization()
    if a < 0:
        raise ConfigError(f"drift coefficient must be >= 0, got {a}")
    if T <= 0:
        raise ConfigError("T must be positive")
    prof = as_profile(y0)
    space = make_space(disc, a)
    t_grid = np.linspace(0.0, T, disc.n_t + 1)
    uv = _control_samples(u, t_grid)
    if not np.all(np.isfinite(uv)):
        raise ConfigError("control samples must be finite")
    c0 = space.project(prof, uv[0])
    ref = space.l2(c0, uv[0]) + float(np.max(np.abs(uv)))
    coeffs = _march(space, disc, T, c0, uv, ref)
    free = not np.any(uv)
    return _assemble(space, disc, T, coeffs, uv, x_grid, "pde_solver", prof, free)


# --------------------------------------------------------------------------
# traces and energy


def trace_jets(
    traj: Trajectory,
    t: float,
    depth: int,
    a: float,
    cap: int = DEFAULT_TRACE_CAP,
    eps: float | None = None,
    method: str = "auto",
    n_modes: int = 10,
) -> Jet:
    """Jet of w(t) = y_xx(0, t) to the given depth.

    w^(n) = (-1)^n (P^n y)_xx(0, t). With method "modal" (free solutions) the
    time derivatives are exact on the eigen-expansion. With "spatial" the
    operator P is applied to the Legendre representation at a solver time
    level, which costs 3 derivatives per order and is limited to depth 1.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if depth > cap:
        raise DepthError(f"trace depth {depth} exceeds the certified cap {cap}")
    T = float(traj.t_grid[-1])
    eps = 0.05 * T if eps is None else eps
    if t < eps:
        raise RoughnessError(f"t={t} below smoothing threshold eps={eps}")
    fld = traj.spectral
    if not isinstance(fld, SpectralField) or not isinstance(fld.space, GalerkinSpace):
        raise ConfigError("trace extraction needs a spectral (Galerkin) trajectory")
    if fld.space.a != float(a):
        raise ConfigError(f"trajectory was computed with a={fld.space.a}, not {a}")
    if method == "auto":
        method = "modal" if fld.free else "spatial"
    if method == "modal":
        d = fld.modal(n_modes).trace_derivatives(t, depth)
    elif method == "spatial":
        if depth > SPATIAL_TRACE_CAP:
            raise DepthError(f"spatial trace extraction is certified to depth {SPATIAL_TRACE_CAP}, got {depth}")
        j = fld.index(t)
        leg = fld.space.legendre(fld.coeffs[j], fld.u[j])
        D1 = fld.space.D1
        DP = D1 @ D1 @ D1 + fld.space.a * D1
        d = np.empty(depth + 1)
        for n in range(depth + 1):
            d[n] = (-1) ** n * npleg.legval(1.0, npleg.legder(leg, 2) * 4.0)
            leg = DP @ leg
    else:
        raise ConfigError(f"unknown trace method {method!r}")
    fact = np.array([math.factorial(k) for k in range(depth + 1)], dtype=float)
    return Jet(t, d / fact)


@dataclass
class EnergyReport:
    l2_norms: np.ndarray
    h1_norms: np.ndarray
    dissipation_integral: float
    kato_constant_fit: float  # dissipation / ||y0||^2
    kato_bound: float  # (aT + 1)/3
    smoothing_fit: float  # sup_{t >= eps} sqrt(t) ||y(t)||_H1 / ||y0||
    max_step_growth: float  # max_k ||y_{k+1}|| / ||y_k|| - 1
    meta: dict = field(default_factory=dict)

    @property
    def kato_margin(self) -> float:
        """Relative room below the Kato bound (>= 0 means the bound holds)."""
        return 1.0 - self.kato_constant_fit / self.kato_bound if self.kato_bound > 0 else 0.0


def energy_report(traj: Trajectory, a: float, eps: float | None = None) -> EnergyReport:
    t = traj.t_grid
    T = float(t[-1])
    l2 = np.asarray(traj.meta.get("l2_norms", traj.l2_norms()))
    if "dx_norms" in traj.meta:
        dx = np.asarray(traj.meta["dx_norms"])
    else:
        dx = np.sqrt(np.trapezoid(np.gradient(traj.y, traj.x_grid, axis=1) ** 2, traj.x_grid, axis=1))
    h1 = np.sqrt(l2**2 + dx**2)
    n0 = float(l2[0])
    bound = (a * T + 1.0) / 3.0
    if n0 == 0.0:
        z = np.zeros_like(l2)
        return EnergyReport(z, z.copy(), 0.0, 0.0, bound, 0.0, 0.0)
    # on each step the squared gradient norm is integrated by the trapezoid rule
    diss = float(np.trapezoid(dx**2, t))
    eps = 0.05 * T if eps is None else eps
    mask = t >= eps - 1e-14
    smooth = float(np.max(np.sqrt(t[mask]) * h1[mask]) / n0)
    growth = float(np.max(l2[1:] / np.where(l2[:-1] > 0, l2[:-1], 1.0) - 1.0)) if l2.size > 1 else 0.0
    return EnergyReport(l2, h1, diss, diss / n0**2, bound, smooth, growth)
