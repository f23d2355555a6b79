"""Norm inequalities for P = d^3/dx^3 + a d/dx, tested on polynomials over [-1, 0].

All derivatives are exact (coefficient arithmetic). L^p norms are also exact
up to root finding: p = 2 integrates f^2, p = 1 integrates |f| between the
real roots, and p = inf compares endpoints with critical points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as nppoly

from .errors import ConfigError

__all__ = [
    "PolyFn",
    "NotApplicableError",
    "InequalityResult",
    "sobolev_norm",
    "lp_norm",
    "apply_P_poly",
    "power_bound_check",
    "lower_equivalence_check",
    "graph_norm_constant",
    "empirical_K",
    "random_polys",
    "inequality_sweep",
]


class NotApplicableError(ConfigError):
    """The inequality's constant is undefined for these parameters."""


@dataclass(frozen=True, eq=False)
class PolyFn:
    coeffs: np.ndarray  # power basis, lowest degree first

    def __post_init__(self):
        c = np.trim_zeros(np.asarray(self.coeffs, dtype=float).reshape(-1), "b")
        if c.size == 0:
            c = np.zeros(1)
        if not np.all(np.isfinite(c)):
            raise ValueError("polynomial coefficients must be finite")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def deriv(self, m: int = 1) -> "PolyFn":
        c = self.coeffs
        for _ in range(m):
            c = _der(c)
        return PolyFn(c)

    def __call__(self, x):
        return nppoly.polyval(x, self.coeffs)


def _der(c: np.ndarray) -> np.ndarray:
    if c.size <= 1:
        return np.zeros(1)
    return c[1:] * np.arange(1, c.size)


def _p_key(p) -> str:
    if p in (1, "1"):
        return "1"
    if p in (2, "2"):
        return "2"
    if p in (np.inf, math.inf, "inf", "∞"):
        return "inf"
    raise ValueError(f"p must be 1, 2 or inf, got {p!r}")


def _interior_roots(c: np.ndarray) -> np.ndarray:
    # negligible leading terms would blow up the companion matrix
    keep = np.flatnonzero(np.abs(c) > 1e-15 * np.max(np.abs(c))) if np.any(c) else []
    c = c[: keep[-1] + 1] if len(keep) else c[:1]
    if c.size < 2 or not np.any(c[1:]):
        return np.zeros(0)
    r = nppoly.polyroots(c)
    r = r[np.abs(r.imag) <= 1e-9 * (1 + np.abs(r.real))].real
    return np.sort(r[(r > -1.0) & (r < 0.0)])


@lru_cache(maxsize=200_000)
def _lp_cached(coeff_bytes: bytes, p: str) -> float:
    c = np.frombuffer(coeff_bytes, dtype=float)
    if not np.any(c):
        return 0.0
    if p == "2":
        scale = float(np.max(np.abs(c)))  # keeps f^2 clear of underflow and overflow
        sq = nppoly.polyint(nppoly.polymul(c / scale, c / scale))
        return scale * math.sqrt(max(0.0, float(nppoly.polyval(0.0, sq) - nppoly.polyval(-1.0, sq))))
    if p == "1":
        F = nppoly.polyint(c)
        pts = np.concatenate([[-1.0], _interior_roots(c), [0.0]])
        vals = nppoly.polyval(pts, F)
        return float(np.sum(np.abs(np.diff(vals))))
    crit = _interior_roots(_der(c)) if c.size > 1 else np.zeros(0)
    pts = np.concatenate([[-1.0, 0.0], crit])
    return float(np.max(np.abs(nppoly.polyval(pts, c))))


def lp_norm(f: PolyFn, p) -> float:
    return _lp_cached(f.coeffs.tobytes(), _p_key(p))


def sobolev_norm(f: PolyFn, n: int, p) -> float:
    """sum_{i<=n} ||f^(i)||_{L^p(-1, 0)}."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return float(np.sum(_derivative_norms(f.coeffs.tobytes(), _p_key(p), n)))


@lru_cache(maxsize=50_000)
def _derivative_norms(coeff_bytes: bytes, p: str, n: int) -> tuple:
    c = np.frombuffer(coeff_bytes, dtype=float)
    out = []
    for _ in range(n + 1):
        out.append(_lp_cached(c.tobytes(), p) if np.any(c) else 0.0)
        c = _der(c)
    return tuple(out)


def apply_P_poly(f: PolyFn, a: float, n: int = 1) -> PolyFn:
    c = f.coeffs
    for _ in range(n):
        d1 = _der(c)
        d3 = _der(_der(d1))
        out = np.zeros(max(d3.size, d1.size))
        out[: d3.size] += d3
        out[: d1.size] += a * d1
        c = out
    return PolyFn(c)


@dataclass
class InequalityResult:
    passed: bool
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        """Relative slack (rhs - lhs) / rhs; negative means violation."""
        if self.rhs == 0.0:
            return 0.0 if self.lhs == 0.0 else -math.inf
        return (self.rhs - self.lhs) / self.rhs


_REL_TOL = 1e-12


def _result(lhs: float, rhs: float) -> InequalityResult:
    return InequalityResult(lhs <= rhs * (1.0 + _REL_TOL) + 1e-300, lhs, rhs)


def power_bound_check(f: PolyFn, a: float, n: int, p) -> InequalityResult:
    """||P^n f||_p <= (1 + a)^n ||f||_{3n,p}."""
    lhs = lp_norm(apply_P_poly(f, a, n), p)
    rhs = (1.0 + a) ** n * sobolev_norm(f, 3 * n, p)
    return _result(lhs, rhs)


def lower_equivalence_check(f: PolyFn, a: float, n: int, p) -> InequalityResult:
    """(1 + 1/a)^-1 (1 + a)^-n sum_{i<=n} ||P^i f||_p <= ||f||_{3n,p}, a > 0."""
    if a <= 0:
        raise NotApplicableError("the explicit constant involves 1/a and needs a > 0")
    s = sum(lp_norm(apply_P_poly(f, a, i), p) for i in range(n + 1))
    lhs = s / ((1.0 + 1.0 / a) * (1.0 + a) ** n)
    return _result(lhs, sobolev_norm(f, 3 * n, p))


def graph_norm_constant(samples, a: float, p) -> float:
    """Smallest C1 with ||f||_{3,p} <= C1 (||f||_p + ||P f||_p) over the samples."""
    samples = list(samples)
    if not samples:
        raise ValueError("need at least one sample")
    best = 0.0
    for f in samples:
        den = lp_norm(f, p) + lp_norm(apply_P_poly(f, a), p)
        if den == 0.0:
            continue
        best = max(best, sobolev_norm(f, 3, p) / den)
    return best


def empirical_K(samples, a: float, n: int, p) -> float:
    """Smallest K with ||f||_{3n,p} <= K^n sum_{i<=n} ||P^i f||_p over the samples."""
    if n < 1:
        raise ValueError("n must be >= 1")
    best = 0.0
    for f in samples:
        den = sum(lp_norm(apply_P_poly(f, a, i), p) for i in range(n + 1))
        if den == 0.0:
            continue
        best = max(best, (sobolev_norm(f, 3 * n, p) / den) ** (1.0 / n))
    return best


def random_polys(rng: np.random.Generator, count: int, degree: int = 9) -> list[PolyFn]:
    """Random polynomials with standard normal coefficients in the Legendre basis of [-1, 0]."""
    out = []
    for _ in range(count):
        leg = rng.standard_normal(degree + 1)
        # Legendre series in xi = 2x + 1, converted to the power basis in x
        c = np.polynomial.Legendre(leg, domain=[-1.0, 0.0]).convert(kind=np.polynomial.Polynomial).coef
        out.append(PolyFn(c))
    return out


@dataclass
class SweepSummary:
    n_polys: int
    checks: int
    failures: list
    min_margin_power: float
    min_margin_lower: float

    @property
    def passed(self) -> bool:
        return not self.failures


def inequality_sweep(
    n_polys: int = 1000,
    a_values=(0.5, 1.0, 4.0),
    n_max: int = 3,
    ps=(1, 2, "inf"),
    degree: int = 9,
    seed: int = 0,
) -> SweepSummary:
    rng = np.random.default_rng(seed)
    polys = random_polys(rng, n_polys, degree)
    failures = []
    m_pow = m_low = math.inf
    checks = 0
    for k, f in enumerate(polys):
        for a in a_values:
            for n in range(n_max + 1):
                for p in ps:
                    r_pow = power_bound_check(f, a, n, p)
                    r_low = lower_equivalence_check(f, a, n, p)
                    checks += 2
                    m_pow, m_low = min(m_pow, r_pow.margin), min(m_low, r_low.margin)
                    if not r_pow.passed:
                        failures.append(("power_bound", k, a, n, p, r_pow.lhs, r_pow.rhs))
                    if not r_low.passed:
                        failures.append(("lower_equivalence", k, a, n, p, r_low.lhs, r_low.rhs))
    _lp_cached.cache_clear()
    _derivative_norms.cache_clear()
    return SweepSummary(n_polys, checks, failures, m_pow, m_low)
