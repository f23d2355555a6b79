"""End-to-end null-control and reachability runs, plus named targets and profiles."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as nppoly

from .errors import ConfigError
from .flatout import StepParams, extract_b, flat_output_null, flat_output_reach
from .genfun import build_table, eval_g
from .jets import Jet
from .pde import DEFAULT_TRACE_CAP, Discretization, solve_controlled, solve_free, trace_jets
from .synth import ControlSignal, Trajectory, estimate_envelope, residual_check, synthesize_control, truncation_bound

__all__ = [
    "named_target",
    "named_profile",
    "NullResult",
    "ReachResult",
    "run_null_control",
    "run_reach",
]


def named_target(spec, N: int = 6) -> np.ndarray:
    """Power-series coefficients of a target state y1 on [-1, 0].

    "x2", "x5", "fig1" (3 sum_{n<=N} x^(3n+2)/(3n+2)!), "poly(c0, c1, ...)", or
    an explicit coefficient list.
    """
    if isinstance(spec, (list, tuple, np.ndarray)):
        return np.asarray(spec, dtype=float)
    name = str(spec).strip().lower()
    if name == "zero":
        return np.zeros(3)
    m = re.fullmatch(r"x(\d+)", name)
    if m:
        c = np.zeros(int(m.group(1)) + 1)
        c[-1] = 1.0
        return c
    if name == "fig1":
        c = np.zeros(3 * N + 3)
        for n in range(N + 1):
            c[3 * n + 2] = 3.0 / math.factorial(3 * n + 2)
        return c
    m = re.fullmatch(r"poly\((.*)\)", name)
    if m:
        try:
            return np.array([float(v) for v in m.group(1).split(",")], dtype=float)
        except ValueError as exc:
            raise ConfigError(f"cannot parse polynomial target {spec!r}") from exc
    raise ConfigError(f"unknown target {spec!r}")


def named_profile(spec, seed: int = 0):
    """Initial states: "sin" (sin(pi x)), "zero", "bubble" (x^2 (x+1)), "random"."""
    if callable(spec):
        return spec
    name = str(spec).strip().lower()
    if name == "sin":
        return lambda x: np.sin(np.pi * np.asarray(x, dtype=float))
    if name == "zero":
        return lambda x: np.zeros_like(np.asarray(x, dtype=float))
    if name == "bubble":
        return lambda x: np.asarray(x, dtype=float) ** 2 * (np.asarray(x, dtype=float) + 1.0)
    if name == "random":
        rng = np.random.default_rng(seed)
        amp = rng.standard_normal(6) / (1.0 + np.arange(6)) ** 2
        return lambda x: np.sum(
            amp[:, None] * np.sin(np.pi * np.outer(np.arange(1, 7), np.asarray(x, dtype=float))), axis=0
        ).reshape(np.shape(x))
    raise ConfigError(f"unknown initial profile {spec!r}")


@dataclass
class NullResult:
    control: ControlSignal
    trajectory: Trajectory
    free: Trajectory
    final_ratio: float
    envelope: tuple | None
    residual: float
    free_phase_defect: float
    trace_depth: int
    meta: dict = field(default_factory=dict)


def run_null_control(
    y0,
    a: float,
    T: float = 1.0,
    tau: float = 0.5,
    s: float = 2.0,
    M: float = 1.0,
    N: int = 12,
    trace_depth: int = 6,
    disc: Discretization | None = None,
    n_modes: int = 10,
) -> NullResult:
    if not 1.5 <= s < 3.0:
        raise ConfigError(f"null control needs s in [3/2, 3), got {s}")
    if N < 1:
        raise ConfigError("N must be >= 1")
    disc = disc or Discretization()
    params = StepParams(s, M, tau, T)
    table = build_table(a, N)
    free = solve_free(y0, a, T, disc)
    l0 = float(free.meta["l2_norms"][0])
    eps = 0.05 * T
    if eps > tau:
        raise ConfigError(f"switch-off time tau={tau} precedes the smoothing threshold {eps}")

    def traces(t: float, d: int) -> Jet:
        return trace_jets(free, t, min(d, trace_depth), a, cap=DEFAULT_TRACE_CAP, n_modes=n_modes).pad(d)

    z = flat_output_null(traces, params, coverage=(eps, T))
    t_grid = free.t_grid
    env = None
    if l0 > 0:
        sample = np.linspace(tau, T, 41)
        env, _ = estimate_envelope(z, sample, N + 1)
    u = synthesize_control(table, z, N, t_grid, envelope=env)
    traj = solve_controlled(u, y0, a, T, disc)
    ratio = float(traj.meta["l2_norms"][-1] / l0) if l0 > 0 else 0.0
    # residual identity on the switch-off interval
    t_chk = np.linspace(tau, T, 9)
    res = residual_check(table, z, N, np.linspace(-1.0, 0.0, 21), t_chk)
    # during the free phase the series value at x=-1 must vanish with u
    gl = np.array([eval_g(table, i, -1.0) for i in range(N + 1)])
    fp = 0.0
    for t in np.linspace(eps, tau, 9):
        fp = max(fp, abs(float(gl @ z.jet(t, N + 1).derivatives()[: N + 1])))
    return NullResult(u, traj, free, ratio, env, res.relative, fp, trace_depth,
                      meta={"l0": l0, "residual_abs": res.max_defect})


@dataclass
class ReachResult:
    control: ControlSignal
    trajectory: Trajectory
    b: np.ndarray
    y1: np.ndarray
    final_error: float
    roundtrip_defect: float
    envelope: tuple | None
    residual: float
    meta: dict = field(default_factory=dict)


def run_reach(
    y1,
    a: float,
    T: float = 1.0,
    tau: float = 0.5,
    N: int | None = None,
    M: float = 1.0,
    disc: Discretization | None = None,
) -> ReachResult:
    """Steer 0 to the polynomial target y1 (power-series coefficients)."""
    y1 = np.trim_zeros(np.asarray(y1, dtype=float), "b")
    if y1.size == 0:
        y1 = np.zeros(1)
    disc = disc or Discretization()
    n_b = max(0, (y1.size - 3) // 3)  # P^n y1 vanishes once 3n exceeds its degree
    b = extract_b(y1, a, n_b)
    N = b.size + 4 if N is None else N
    if N < b.size - 1:
        raise ConfigError(f"N={N} cannot carry the {b.size} target coefficients")
    table = build_table(a, N)
    z = flat_output_reach(b, tau, T, depth=N + 1, M=M)
    env = None
    if np.any(b):
        env, _ = estimate_envelope(z, np.linspace(tau, T, 41), max(N + 1, 12))
    t_grid = np.linspace(0.0, T, disc.n_t + 1)
    u = synthesize_control(table, z, N, t_grid, envelope=env)
    x_out = np.linspace(-1.0, 0.0, disc.n_out)
    traj = solve_controlled(u, None, a, T, disc, x_grid=x_out)
    err = float(np.max(np.abs(traj.y[-1] - nppoly.polyval(x_out, y1))))
    # coefficient round trip: sum_i b_i g_i against y1
    width = max(table.n_terms, y1.size)
    recon = np.zeros(width)
    for i, bi in enumerate(b):
        recon[: table.n_terms] += bi * table.row(i)
    target = np.zeros(width)
    target[: y1.size] = y1
    rt = float(np.max(np.abs(recon - target)))
    res = residual_check(table, z, N, np.linspace(-1.0, 0.0, 21), np.linspace(0.0, T, 9))
    return ReachResult(u, traj, b, y1, err, rt, env, res.relative, meta={"N": N})
