"""Airy function by Taylor summation and the line problem y_t + y_xxx = 0.

Ai solves Ai'' = x Ai, so its derivatives at 0 obey
Ai^(k+3)(0) = (k+1) Ai^(k)(0), seeded by Ai(0) and Ai'(0) (Ai''(0) = 0).
The fundamental solution on the line is E(x, t) = (3t)^(-1/3) Ai(x / (3t)^(1/3)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy.special import gammaln

from .errors import DomainError, NumericalError, ResolutionError
from .flatout import GevreyFit, gevrey_fit

__all__ = [
    "AiryTable",
    "airy_table",
    "airy_seeds",
    "airy_eval",
    "airy_ode_check",
    "airy_envelope",
    "fundamental_solution",
    "fundamental_dt",
    "fundamental_pde_defect",
    "fundamental_mass",
    "line_solution",
    "line_derivative_fit",
]


def airy_seeds() -> tuple[float, float]:
    """(Ai(0), Ai'(0)) from the Gamma function, checked by the reflection identity."""
    g13, g23 = math.gamma(1.0 / 3.0), math.gamma(2.0 / 3.0)
    if abs(g13 * g23 - 2.0 * math.pi / math.sqrt(3.0)) > 1e-14 * g13 * g23:
        raise NumericalError("Gamma(1/3) Gamma(2/3) fails the reflection identity")
    return 1.0 / (3.0 ** (2.0 / 3.0) * g23), -1.0 / (3.0 ** (1.0 / 3.0) * g13)


@dataclass(frozen=True, eq=False)
class AiryTable:
    n_max: int
    x_max: float
    derivs: np.ndarray  # derivs[n] = Ai^(n)(0)

    @property
    def d_max(self) -> int:
        return self.n_max // 6


@lru_cache(maxsize=8)
def airy_table(n_max: int = 120, x_max: float = 6.0) -> AiryTable:
    if n_max < 3:
        raise ValueError("n_max must be >= 3")
    d = np.zeros(n_max + 1)
    d[0], d[1] = airy_seeds()
    for k in range(n_max - 2):
        d[k + 3] = (k + 1) * d[k]
    d.flags.writeable = False
    return AiryTable(n_max, float(x_max), d)


def _taylor(table: AiryTable, d: int) -> np.ndarray:
    # power-series coefficients of Ai^(d) about 0
    n = np.arange(table.n_max - d + 1)
    v = table.derivs[d:]
    c = np.zeros(n.size)
    nz = v != 0.0
    c[nz] = np.sign(v[nz]) * np.exp(np.log(np.abs(v[nz])) - gammaln(n[nz] + 1))
    return c


def airy_eval(x, d: int = 0, table: AiryTable | None = None, strict: bool = True):
    """Ai^(d)(x) for |x| <= x_max by Taylor summation about 0.

    With strict=False a table too short for the window is summed anyway,
    which is how the truncation study measures the lost accuracy.
    """
    table = table or airy_table()
    if not 0 <= d <= table.d_max:
        raise DomainError(f"derivative order {d} outside 0..{table.d_max}")
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > table.x_max):
        raise DomainError(f"|x| exceeds the resolvable window {table.x_max}; Taylor summation would cancel")
    c = _taylor(table, d)
    # the dropped tail must be negligible at the window edge
    n = np.arange(c.size)
    last = np.abs(c[-3:]) * table.x_max ** n[-3:]
    if strict and np.max(last) > 1e-17 * max(1.0, float(np.max(np.abs(c) * table.x_max**n))):
        raise ResolutionError(f"n_max={table.n_max} too small for order {d} on |x| <= {table.x_max}")
    out = np.polynomial.polynomial.polyval(x, c)
    return float(out) if out.ndim == 0 else out


def airy_ode_check(xs, table: AiryTable | None = None, strict: bool = True) -> float:
    """max |Ai''(x) - x Ai(x)| over the samples."""
    xs = np.asarray(xs, dtype=float)
    lhs = airy_eval(xs, 2, table, strict)
    return float(np.max(np.abs(lhs - xs * airy_eval(xs, 0, table, strict))))


def airy_envelope(table: AiryTable, R: float) -> tuple[float, int]:
    """C = max_n |Ai^(n)(0)| R^n / (n!)^(1/3) and the order where it is attained."""
    if not 0 < R < 1:
        raise ValueError("R must lie in (0, 1)")
    n = np.arange(table.n_max + 1)
    with np.errstate(divide="ignore"):
        logr = np.log(np.abs(table.derivs)) + n * math.log(R) - gammaln(n + 1) / 3.0
    k = int(np.argmax(logr))
    return float(math.exp(logr[k])), k


def _scale(t: float) -> float:
    if t <= 0:
        raise DomainError("the fundamental solution needs t > 0")
    return (3.0 * t) ** (1.0 / 3.0)


def fundamental_solution(x, t: float, dx: int = 0, table: AiryTable | None = None):
    """d^dx/dx^dx of E(x, t) = (3t)^(-1/3) Ai(x / (3t)^(1/3))."""
    c = _scale(t)
    return airy_eval(np.asarray(x, dtype=float) / c, dx, table) / c ** (1 + dx)


def fundamental_dt(x, t: float, table: AiryTable | None = None):
    c = _scale(t)
    xi = np.asarray(x, dtype=float) / c
    return -(airy_eval(xi, 0, table) + xi * airy_eval(xi, 1, table)) / c**4


def fundamental_pde_defect(x, t: float, table: AiryTable | None = None) -> float:
    """max |E_t + E_xxx| at the samples, relative to (3t)^(-4/3)."""
    c = _scale(t)
    r = fundamental_dt(x, t, table) + fundamental_solution(x, t, 3, table)
    return float(np.max(np.abs(r)) * c**4)


def _tail(table, X: float, sign: int, levels: int = 3) -> float:
    """int of Ai beyond +-X by repeated integration by parts (Ai = Ai'' / x)."""
    # J_m = int Ai(xi) xi^-m; J_m = B_m + (m+1)(m+2) J_{m+3}
    x0 = sign * X
    total, coef = 0.0, 1.0
    a0, a1 = airy_eval(x0, 0, table), airy_eval(x0, 1, table)
    for level in range(levels):
        m = 3 * level
        b = a1 * x0 ** (-m - 1) + (m + 1) * a0 * x0 ** (-m - 2)
        total += coef * b
        coef *= (m + 1) * (m + 2)
    # boundary terms enter with + on the left tail and - on the right tail
    return total if sign < 0 else -total


def fundamental_mass(t: float, table: AiryTable | None = None, n_panels: int = 24, n_nodes: int = 24) -> float:
    """int_R E(x, t) dx: Gauss-Legendre on the window plus analytic tails."""
    table = table or airy_table()
    X = table.x_max
    c = _scale(t)
    xq, wq = npleg.leggauss(n_nodes)
    edges = np.linspace(-X, X, n_panels + 1)
    core = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        xi = 0.5 * (hi - lo) * xq + 0.5 * (hi + lo)
        core += 0.5 * (hi - lo) * float(np.dot(wq, fundamental_solution(c * xi, t, 0, table))) * c
    return core + _tail(table, X, -1) + _tail(table, X, +1)


def line_solution(
    y0: Callable,
    L: float,
    x,
    t: float,
    dx: int = 0,
    n_nodes: int = 64,
    n_panels: int = 1,
    table: AiryTable | None = None,
):
    """d^dx/dx^dx of (E(., t) * y0)(x) for y0 supported in [-L, L]."""
    table = table or airy_table()
    c = _scale(t)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.max(np.abs(x)) + L > table.x_max * c:
        raise DomainError(
            f"(x - s)/(3t)^(1/3) leaves the window {table.x_max}; use larger t or smaller |x|, L"
        )
    xq, wq = npleg.leggauss(n_nodes)
    edges = np.linspace(-L, L, n_panels + 1)
    out = np.zeros_like(x)
    for lo, hi in zip(edges[:-1], edges[1:]):
        s = 0.5 * (hi - lo) * xq + 0.5 * (hi + lo)
        w = 0.5 * (hi - lo) * wq * np.asarray(y0(s), dtype=float)
        K = fundamental_solution(x[:, None] - s[None, :], t, dx, table)
        out += K @ w
    return out if out.size > 1 else float(out[0])


def line_derivative_fit(
    y0: Callable,
    L: float,
    xs,
    t: float,
    p_max: int = 30,
    table: AiryTable | None = None,
    **kw,
) -> tuple[GevreyFit, np.ndarray]:
    """Gevrey fit of m_p = max_x |d^p y / dx^p (x, t)| over the points xs, p = 0..p_max.

    Taking the sup over a set of points follows the definition of the
    Gevrey seminorms and removes the oscillation of pointwise values.
    """
    table = table or airy_table(max(120, 6 * p_max))
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    mags = np.array(
        [np.max(np.abs(line_solution(y0, L, xs, t, dx=p, table=table, **kw))) for p in range(p_max + 1)]
    )
    return gevrey_fit(mags), mags
