"""Truncated univariate Taylor series ("jets").

A jet of order N at t0 stores c_k = f^(k)(t0)/k! for k = 0..N. Storing the
scaled coefficients rather than the derivatives keeps Gevrey-class inputs,
whose derivatives grow like (k!)^s, inside double range at high order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, JetRangeError, SingularJetError

__all__ = [
    "Jet",
    "jet_var",
    "jet_const",
    "jet_arith",
    "jet_exp",
    "jet_log",
    "jet_pow_real",
    "jet_compose_affine",
]


def _factorials(n: int) -> np.ndarray:
    out = np.ones(n + 1)
    if n > 0:
        out[1:] = np.cumprod(np.arange(1, n + 1, dtype=float))
    return out


@dataclass(frozen=True, eq=False)
class Jet:
    t0: float
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float, copy=True).reshape(-1)
        if c.size == 0:
            raise ValueError("a jet needs at least one coefficient")
        if not np.all(np.isfinite(c)):
            raise JetRangeError("non-finite jet coefficient")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "t0", float(self.t0))

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    def derivative(self, k: int) -> float:
        if k > self.order:
            raise IndexError(f"derivative {k} beyond jet order {self.order}")
        return float(self.coeffs[k] * math.factorial(k))

    def derivatives(self) -> np.ndarray:
        """All derivatives f^(k)(t0), k = 0..order."""
        return self.coeffs * _factorials(self.order)

    def truncate(self, order: int) -> "Jet":
        return Jet(self.t0, self.coeffs[: order + 1])

    def pad(self, order: int) -> "Jet":
        """Extend with zero coefficients (drops nothing if already long enough)."""
        if order <= self.order:
            return self.truncate(order)
        c = np.zeros(order + 1)
        c[: self.coeffs.size] = self.coeffs
        return Jet(self.t0, c)

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return jet_const(float(other), self.t0, self.order)

    def __add__(self, other):
        return jet_arith(self, self._coerce(other), "add")

    __radd__ = __add__

    def __sub__(self, other):
        return jet_arith(self, self._coerce(other), "sub")

    def __rsub__(self, other):
        return jet_arith(self._coerce(other), self, "sub")

    def __mul__(self, other):
        if np.isscalar(other):
            return Jet(self.t0, self.coeffs * float(other))
        return jet_arith(self, self._coerce(other), "mul")

    __rmul__ = __mul__

    def __truediv__(self, other):
        return jet_arith(self, self._coerce(other), "div")

    def __rtruediv__(self, other):
        return jet_arith(self._coerce(other), self, "div")

    def __neg__(self):
        return Jet(self.t0, -self.coeffs)

    def __repr__(self):
        return f"Jet(t0={self.t0!r}, coeffs={self.coeffs.tolist()!r})"


def jet_var(t0: float, order: int) -> Jet:
    """Jet of the identity map t -> t."""
    if order < 0:
        raise ValueError("jet order must be >= 0")
    c = np.zeros(order + 1)
    c[0] = t0
    if order >= 1:
        c[1] = 1.0
    return Jet(t0, c)


def jet_const(value: float, t0: float, order: int) -> Jet:
    if order < 0:
        raise ValueError("jet order must be >= 0")
    c = np.zeros(order + 1)
    c[0] = value
    return Jet(t0, c)


def _check_compatible(a: Jet, b: Jet):
    if a.order != b.order:
        raise ValueError(f"jet orders differ: {a.order} vs {b.order}")
    if a.t0 != b.t0:
        raise ValueError(f"jets expanded at different points: {a.t0} vs {b.t0}")


def _cauchy(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)[: a.size]


def jet_arith(a: Jet, b: Jet, op: str) -> Jet:
    _check_compatible(a, b)
    if op == "add":
        return Jet(a.t0, a.coeffs + b.coeffs)
    if op == "sub":
        return Jet(a.t0, a.coeffs - b.coeffs)
    if op == "mul":
        return Jet(a.t0, _cauchy(a.coeffs, b.coeffs))
    if op == "div":
        bc = b.coeffs
        if bc[0] == 0.0:
            raise SingularJetError("division by a jet with vanishing constant term")
        q = np.zeros_like(a.coeffs)
        for k in range(q.size):
            q[k] = (a.coeffs[k] - np.dot(bc[1 : k + 1], q[k - 1 :: -1][:k])) / bc[0]
        return Jet(a.t0, q)
    raise ValueError(f"unknown jet operation {op!r}")


def jet_exp(a: Jet) -> Jet:
    ac = a.coeffs
    if ac[0] > 709.78:
        raise JetRangeError(f"exp overflow at constant term {ac[0]}")
    e = np.zeros_like(ac)
    e[0] = math.exp(ac[0])
    j = np.arange(1, ac.size, dtype=float)
    for k in range(1, ac.size):
        # e_k = (1/k) sum_{j=1..k} j a_j e_{k-j}
        e[k] = np.dot(j[:k] * ac[1 : k + 1], e[k - 1 :: -1][:k]) / k
    if not np.all(np.isfinite(e)):
        raise JetRangeError("exp jet overflowed")
    return Jet(a.t0, e)


def jet_log(a: Jet) -> Jet:
    ac = a.coeffs
    if ac[0] <= 0.0:
        raise DomainError("log of a jet needs a positive constant term")
    out = np.zeros_like(ac)
    out[0] = math.log(ac[0])
    j = np.arange(1, ac.size, dtype=float)
    for k in range(1, ac.size):
        # a_0 l_k = a_k - (1/k) sum_{j=1..k-1} j l_j a_{k-j}
        s = np.dot(j[: k - 1] * out[1:k], ac[k - 1 : 0 : -1]) / k if k > 1 else 0.0
        out[k] = (ac[k] - s) / ac[0]
    return Jet(a.t0, out)


def jet_pow_real(a: Jet, sigma: float) -> Jet:
    """Jet of f**sigma, computed as exp(sigma * log f)."""
    if a.coeffs[0] <= 0.0:
        raise DomainError("real power of a jet needs a positive constant term")
    return jet_exp(jet_log(a) * sigma)


def jet_compose_affine(a: Jet, alpha: float, beta: float) -> Jet:
    """Jet of t -> f(alpha*t + beta), expanded at the point mapped onto a.t0."""
    if alpha == 0.0:
        raise ValueError("degenerate affine reparameterization (alpha = 0)")
    t0 = (a.t0 - beta) / alpha
    scale = float(alpha) ** np.arange(a.coeffs.size)
    return Jet(t0, a.coeffs * scale)
