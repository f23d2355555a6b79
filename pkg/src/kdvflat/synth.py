"""Series assembly y_N(x, t) = sum_{i<=N} g_i(x) z^(i)(t) and the control u = y_N(-1, .)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import DepthError, DivergenceRiskError
from .flatout import FlatOutput, gevrey_fit
from .genfun import GeneratingTable, apply_P, eval_g
from numpy.polynomial import polynomial as nppoly

__all__ = [
    "ControlSignal",
    "Trajectory",
    "assemble_state",
    "synthesize_control",
    "truncation_bound",
    "residual_check",
    "ResidualReport",
    "estimate_envelope",
]


@dataclass
class ControlSignal:
    times: np.ndarray
    values: np.ndarray
    depth: int
    tail_bound: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape:
            raise ValueError("times and values must have the same shape")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("control samples must be finite")
        if self.tail_bound < 0:
            raise ValueError("tail bound must be nonnegative")

    def __call__(self, t):
        return np.interp(t, self.times, self.values)


@dataclass
class Trajectory:
    x_grid: np.ndarray
    t_grid: np.ndarray
    y: np.ndarray  # shape (len(t_grid), len(x_grid))
    provenance: str
    spectral: object = None
    meta: dict = field(default_factory=dict)

    def at(self, k: int) -> np.ndarray:
        return self.y[k]

    def l2_norms(self) -> np.ndarray:
        """Trapezoid L2(-1, 0) norms per time row (grid-based fallback)."""
        if "l2_norms" in self.meta:
            return np.asarray(self.meta["l2_norms"])
        return np.sqrt(np.trapezoid(self.y**2, self.x_grid, axis=1))


def _check_table(table: GeneratingTable, N: int):
    if N > table.i_max:
        raise DepthError(f"truncation order {N} exceeds table size i_max={table.i_max}")


def _zderivs(z: FlatOutput, t: float, depth: int) -> np.ndarray:
    jet = z.jet(t, depth)
    if jet.order < depth:
        raise DepthError(f"flat output supplied order {jet.order}, need {depth}")
    return jet.derivatives()[: depth + 1]


def assemble_state(table, z: FlatOutput, N: int, x_grid, t_grid) -> Trajectory:
    _check_table(table, N)
    x_grid = np.asarray(x_grid, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    G = np.array([eval_g(table, i, x_grid) for i in range(N + 1)])
    Z = np.array([_zderivs(z, t, N + 1)[: N + 1] for t in t_grid])
    return Trajectory(x_grid, t_grid, Z @ G, "series", meta={"N": N})


def synthesize_control(table, z: FlatOutput, N: int, t_grid, envelope=None) -> ControlSignal:
    """u(t) = sum_{i<=N} g_i(-1) z^(i)(t); identically 0 before tau for null control."""
    _check_table(table, N)
    t_grid = np.asarray(t_grid, dtype=float)
    gl = np.array([eval_g(table, i, -1.0) for i in range(N + 1)])
    u = np.zeros_like(t_grid)
    for k, t in enumerate(t_grid):
        # null control: the control is switched off exactly during the free phase
        if z.kind == "null_control" and t <= z.tau:
            continue
        u[k] = float(gl @ _zderivs(z, t, N + 1)[: N + 1])
    env = envelope if envelope is not None else z.envelope
    meta = {"kind": z.kind, "tail_bound_available": env is not None}
    tail = truncation_bound(env, N, -1.0) if env is not None else 0.0
    return ControlSignal(t_grid, u, N, tail, meta)


def truncation_bound(env, N: int, x: float) -> float:
    """Upper bound for sum_{i>N} M (i!)^s / R^i * |x|^(3i+2) / (3i+2)!."""
    M, R, s = env
    if M == 0 or x == 0:
        return 0.0
    if M < 0 or R <= 0:
        raise ValueError("envelope needs M >= 0 and R > 0")
    if s > 3 or (s == 3 and R <= 1):
        raise DivergenceRiskError(f"envelope (s={s}, R={R}) outside the convergent regime")
    lx = math.log(abs(x))

    def logterm(i):
        return math.log(M) + s * gammaln(i + 1) - i * math.log(R) + (3 * i + 2) * lx - gammaln(3 * i + 3)

    def ratio(i):
        return math.exp(logterm(i + 1) - logterm(i))

    def ratio_decreasing_from(i):
        # sign of d/di log ratio, a quadratic with leading coefficient s - 3
        q = lambda j: (s - 1) * (j + 4 / 3) * (j + 5 / 3) - (j + 1) * (j + 5 / 3) - (j + 1) * (j + 4 / 3)
        if s < 3:
            disc = (3 * (s - 1) - 4) ** 2 - 4 * (s - 3) * ((s - 1) * 20 / 9 - 3)
            vertex_ok = True
            if disc > 0:
                r2 = (-(3 * (s - 1) - 4) - math.sqrt(disc)) / (2 * (s - 3))
                vertex_ok = i >= r2
            return vertex_ok and q(i) <= 0
        return False

    r_limit = abs(x) ** 3 / (27.0 * R) if s == 3 else 0.0
    total = 0.0
    i = N + 1
    for _ in range(200000):
        t = math.exp(logterm(i))
        total += t
        r = ratio(i)
        if s == 3:
            rb = max(r, r_limit)
            if rb < 1 and t <= 1e-30 * total:
                return total + t * rb / (1 - rb)
        elif r < 0.5 and ratio_decreasing_from(i) and t <= 1e-30 * total:
            return total + t * r / (1 - r)
        i += 1
    raise DivergenceRiskError("truncation majorant did not settle")


@dataclass
class ResidualReport:
    max_defect: float
    scale: float
    boundary_defect: float

    @property
    def relative(self) -> float:
        return self.max_defect / self.scale if self.scale > 0 else 0.0


def residual_check(table, z: FlatOutput, N: int, x_samples, t_samples) -> ResidualReport:
    """Defect of d_t y_N + P y_N = g_N z^(N+1), evaluated termwise on the series.

    P g_i is computed by differentiating the stored coefficients, not by the
    shift identity, so the check exercises the table itself.
    """
    _check_table(table, N)
    x = np.asarray(x_samples, dtype=float)
    G = np.array([eval_g(table, i, x) for i in range(N + 1)])
    PG = np.array([nppoly.polyval(x, apply_P(table.row(i), table.a)) for i in range(N + 1)])
    G0 = np.array([eval_g(table, i, 0.0, d) for i in range(N + 1) for d in (0, 1)]).reshape(N + 1, 2)
    worst = scale = bdry = 0.0
    for t in np.asarray(t_samples, dtype=float):
        zd = _zderivs(z, t, N + 1)
        dt_y = zd[1 : N + 2] @ G
        P_y = zd[: N + 1] @ PG
        delta = dt_y + P_y - G[N] * zd[N + 1]
        worst = max(worst, float(np.max(np.abs(delta))))
        scale = max(scale, float(np.max(np.abs(zd[1 : N + 2]) @ np.abs(G) + np.abs(zd[: N + 1]) @ np.abs(PG))))
        bdry = max(bdry, float(np.max(np.abs(zd[: N + 1] @ G0))))
    return ResidualReport(worst, scale, bdry)


def estimate_envelope(z: FlatOutput, t_grid, depth: int, s_floor: float | None = None):
    """(M_env, R_env, s_env) fitted to sup_t |z^(i)(t)|, i <= depth.

    The fitted envelope dominates every sampled order; beyond `depth` it is an
    extrapolation. A lower bound on s (the Gevrey order the construction
    guarantees) can be imposed with s_floor.
    """
    mags = np.zeros(depth + 1)
    for t in t_grid:
        mags = np.maximum(mags, np.abs(_zderivs(z, t, depth)))
    if not np.any(mags > 0):
        return (0.0, 1.0, 1.0), mags
    fit = gevrey_fit(mags)
    s = fit.s if s_floor is None else max(fit.s, s_floor)
    i = np.flatnonzero(mags > 0)
    logR = math.log(fit.R)
    logC = float(np.max(np.log(mags[i]) - s * gammaln(i + 1) + i * logR))
    return (math.exp(logC), fit.R, s), mags
