"""Generating functions g_i on [-1, 0] for the operator P = d^3/dx^3 + a d/dx.

g_0 solves P g_0 = 0 with Cauchy data (0, 0, 1) at x = 0, and g_i solves
P g_i = -g_{i-1} with zero Cauchy data. Each g_i is entire; we store one
global Taylor series about x = 0 per index.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.polynomial import legendre as npleg
from numpy.polynomial import polynomial as nppoly
from scipy.interpolate import BarycentricInterpolator

from .errors import ConfigError, DomainError, ResolutionError

__all__ = [
    "GeneratingTable",
    "BoundReport",
    "build_table",
    "eval_g",
    "check_envelope",
    "apply_P",
    "g_by_convolution",
    "table_to_json",
    "table_from_json",
]

TAIL_TOL = 1e-18
_X_SLACK = 1e-14


@dataclass(frozen=True, eq=False)
class GeneratingTable:
    a: float
    i_max: int
    n_terms: int
    coeffs: np.ndarray  # shape (i_max + 1, n_terms), power-basis coefficients

    def row(self, i: int) -> np.ndarray:
        if not 0 <= i <= self.i_max:
            raise IndexError(f"generating function index {i} outside 0..{self.i_max}")
        return self.coeffs[i]

    def values_at_left(self) -> np.ndarray:
        """g_i(-1) for all i, the weights of the control series."""
        return np.array([eval_g(self, i, -1.0) for i in range(self.i_max + 1)])


def _recurrence(c_prev: np.ndarray | None, a: float, n_terms: int) -> np.ndarray:
    d = np.zeros(n_terms)
    if c_prev is None:
        d[2] = 0.5
        rhs = np.zeros(n_terms)
    else:
        rhs = -c_prev
    # (k+3)(k+2)(k+1) d_{k+3} + a (k+1) d_{k+1} = rhs_k
    for k in range(n_terms - 3):
        d[k + 3] = (rhs[k] - a * (k + 1) * d[k + 1]) / ((k + 1) * (k + 2) * (k + 3))
    return d


def build_table(a: float, i_max: int, n_terms: int | None = None) -> GeneratingTable:
    if a < 0:
        raise ConfigError(f"drift coefficient must be >= 0, got {a}")
    if i_max < 0:
        raise ConfigError("i_max must be >= 0")
    if n_terms is None:
        n_terms = 3 * i_max + 40
    if n_terms < 3 * i_max + 3:
        raise ConfigError(f"n_terms={n_terms} cannot hold g_{i_max} (needs >= {3 * i_max + 3})")
    rows = []
    prev = None
    for _ in range(i_max + 1):
        prev = _recurrence(prev, float(a), n_terms)
        rows.append(prev)
    coeffs = np.array(rows)
    # On [-1, 0] the series is dominated by its coefficients, so the tail
    # magnitude bounds the truncation error.
    tail = np.abs(coeffs[:, -3:]).sum(axis=1).max()
    if not np.isfinite(tail) or tail > TAIL_TOL:
        raise ResolutionError(
            f"n_terms={n_terms} leaves tail {tail:.3e} > {TAIL_TOL:g} for a={a}; increase n_terms"
        )
    coeffs.flags.writeable = False
    return GeneratingTable(float(a), int(i_max), int(n_terms), coeffs)


def _check_domain(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < -1.0 - _X_SLACK) or np.any(x > _X_SLACK):
        raise DomainError("generating functions are certified on [-1, 0] only")
    return x


def eval_g(table: GeneratingTable, i: int, x, d: int = 0):
    """d-th derivative of g_i at x (scalar or array)."""
    if d > table.n_terms - 1:
        raise ValueError(f"derivative order {d} exceeds stored series length")
    x = _check_domain(x)
    c = nppoly.polyder(table.row(i), d) if d else table.row(i)
    out = nppoly.polyval(x, c)
    return float(out) if out.ndim == 0 else out


@dataclass
class BoundReport:
    ratios: np.ndarray  # max over grid of |g_i| (3i+2)! / |x|^(3i+2), per i
    tol: float
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def max_ratio(self) -> float:
        return float(np.max(self.ratios))


def check_envelope(table: GeneratingTable, grid, tol: float = 1e-10) -> BoundReport:
    """Compare |g_i| with the envelope |x|^(3i+2)/(3i+2)! on grid points x != 0.

    g_i has a zero of order 3i+2 at the origin, so the ratio is evaluated as a
    shifted polynomial and never divides two tiny numbers.
    """
    grid = _check_domain(grid)
    x = grid[grid != 0.0]
    ratios = np.zeros(table.i_max + 1)
    violations = []
    for i in range(table.i_max + 1):
        m = 3 * i + 2
        c = table.row(i)[m:]
        nz = c != 0.0
        scaled = np.zeros_like(c)
        scaled[nz] = np.sign(c[nz]) * np.exp(np.log(np.abs(c[nz])) + math.lgamma(m + 1))
        r = float(np.max(np.abs(nppoly.polyval(x, scaled)))) if x.size else 0.0
        ratios[i] = r
        if r > 1.0 + tol:
            violations.append((i, r))
    return BoundReport(ratios, tol, violations)


def apply_P(coeffs, a: float, n: int = 1) -> np.ndarray:
    """Power-basis coefficients of P^n f; the output keeps the input length."""
    c = np.asarray(coeffs, dtype=float)
    size = c.size
    for _ in range(n):
        d3 = nppoly.polyder(c, 3) if c.size > 3 else np.zeros(1)
        d1 = nppoly.polyder(c, 1) if c.size > 1 else np.zeros(1)
        new = np.zeros(size)
        new[: d3.size] += d3
        new[: d1.size] += a * d1
        c = new
    return c


def _g0_closed(a: float, x):
    x = np.asarray(x, dtype=float)
    if a == 0:
        return 0.5 * x**2
    return (1.0 - np.cos(math.sqrt(a) * x)) / a


def g_by_convolution(a: float, i_max: int, x, n_nodes: int = 48) -> np.ndarray:
    """Independent evaluation of g_0..g_{i_max} at x.

    Starts from the closed form of g_0 and applies g_i(x) = -int_0^x
    g_0(x - xi) g_{i-1}(xi) dxi with Gauss-Legendre quadrature; each level is
    carried between steps by barycentric interpolation on Chebyshev points of
    [-1, 0]. Shares nothing with the Taylor recurrence.
    """
    x = np.asarray(x, dtype=float)
    k = np.arange(n_nodes)
    cheb = -0.5 + 0.5 * np.cos(np.pi * (k + 0.5) / n_nodes)
    qn, qw = npleg.leggauss(n_nodes)
    out = np.zeros((i_max + 1, x.size))
    out[0] = _g0_closed(a, x)
    prev = BarycentricInterpolator(cheb, _g0_closed(a, cheb))

    def level(pts, prev_interp):
        vals = np.empty(pts.size)
        for j, xv in enumerate(pts):
            # -int_0^x = int_x^0; map [-1, 1] onto [xv, 0]
            xi = 0.5 * xv * (1.0 - qn)
            wts = -0.5 * xv * qw
            integral = np.dot(wts, _g0_closed(a, xv - xi) * prev_interp(xi))
            vals[j] = integral
        return vals

    for i in range(1, i_max + 1):
        out[i] = level(x, prev)
        prev = BarycentricInterpolator(cheb, level(cheb, prev))
    return out


def table_to_json(table: GeneratingTable, path=None) -> dict:
    doc = {
        "a": table.a,
        "i_max": table.i_max,
        "n_terms": table.n_terms,
        "coeffs": table.coeffs.reshape(-1).tolist(),
    }
    if path is not None:
        Path(path).write_text(json.dumps(doc))
    return doc


def table_from_json(doc) -> GeneratingTable:
    if isinstance(doc, (str, Path)):
        doc = json.loads(Path(doc).read_text())
    c = np.asarray(doc["coeffs"], dtype=float).reshape(doc["i_max"] + 1, doc["n_terms"])
    c.flags.writeable = False
    return GeneratingTable(float(doc["a"]), int(doc["i_max"]), int(doc["n_terms"]), c)
