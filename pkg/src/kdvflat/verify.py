"""Property suite behind the `verify` command: every item reports pass/fail and a margin."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import airy, analysis, genfun
from .flatout import StepParams, gevrey_fit, step_phi
from .genfun import GeneratingTable
from .pde import Discretization, energy_report, solve_free
from .pipelines import named_profile, named_target, run_reach
from .synth import residual_check
from .flatout import flat_output_reach, extract_b

__all__ = ["PropertyResult", "VerifyOptions", "run_verify", "mutate_table"]


@dataclass
class PropertyResult:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        d = asdict(self)
        for k in ("value", "threshold"):
            v = d[k]
            d[k] = None if v is None or not math.isfinite(v) else float(v)
        return d


@dataclass
class VerifyOptions:
    a_values: tuple = (0.0, 1.0, 4.0)
    i_max: int = 30
    n_polys: int = 300
    seed: int = 0
    disc: Discretization = field(default_factory=Discretization)
    mutation: dict | None = None  # {"a": .., "i": .., "k": .., "delta": ..}


def mutate_table(table: GeneratingTable, i: int, k: int, delta: float) -> GeneratingTable:
    """Copy of the table with coefficient k of g_i shifted by delta (fault injection)."""
    c = np.array(table.coeffs, copy=True)
    c[i, k] += delta
    c.flags.writeable = False
    return GeneratingTable(table.a, table.i_max, table.n_terms, c)


def _tables(opts: VerifyOptions) -> dict:
    out = {}
    for a in opts.a_values:
        t = genfun.build_table(a, opts.i_max)
        m = opts.mutation
        if m and float(m.get("a", a)) == a:
            t = mutate_table(t, int(m["i"]), int(m["k"]), float(m["delta"]))
        out[a] = t
    return out


def run_verify(opts: VerifyOptions | None = None) -> list[PropertyResult]:
    opts = opts or VerifyOptions()
    res: list[PropertyResult] = []
    tables = _tables(opts)
    grid = np.linspace(-1.0, 0.0, 201)

    # generating functions
    for a, t in tables.items():
        rep = genfun.check_envelope(t, grid)
        res.append(PropertyResult(f"generating_envelope[a={a:g}]", rep.passed, rep.max_ratio, 1.0 + rep.tol))
    xs = np.linspace(-1.0, 0.0, 11)
    for a, t in tables.items():
        ref = genfun.g_by_convolution(a, 5, xs)
        mine = np.array([genfun.eval_g(t, i, xs) for i in range(6)])
        d = float(np.max(np.abs(ref - mine)))
        res.append(PropertyResult(f"convolution_crosscheck[a={a:g}]", d <= 1e-9, d, 1e-9))

    # residual identity on a reach flat output (exact telescoping)
    for a, t in tables.items():
        b = extract_b(named_target("x5"), a, 1) if a == 0.0 else np.array([2.0, -1.0, 0.5])
        z = flat_output_reach(b, 0.5, 1.0, depth=13)
        r = residual_check(t, z, 12, np.linspace(-1.0, 0.0, 21), np.linspace(0.0, 1.0, 9))
        res.append(PropertyResult(f"residual_identity[a={a:g}]", r.relative <= 1e-10, r.relative, 1e-10))

    # end-to-end reach on the closed-form target
    rr = run_reach(named_target("x2"), 0.0, disc=opts.disc)
    res.append(PropertyResult("reach_x2_final_error", rr.final_error <= 1e-3, rr.final_error, 1e-3))
    res.append(PropertyResult("reach_x2_roundtrip", rr.roundtrip_defect <= 1e-10, rr.roundtrip_defect, 1e-10))

    # free evolution: contraction, Kato, smoothing
    y0 = named_profile("random", opts.seed)
    for a in (0.0, 1.0):
        tr = solve_free(y0, a, 1.0, opts.disc)
        er = energy_report(tr, a)
        res.append(PropertyResult(f"contraction[a={a:g}]", er.max_step_growth <= 1e-8, er.max_step_growth, 1e-8))
        res.append(PropertyResult(f"kato[a={a:g}]", er.kato_constant_fit <= er.kato_bound * 1.05,
                                  er.kato_constant_fit, er.kato_bound * 1.05))
        res.append(PropertyResult(f"smoothing_finite[a={a:g}]", math.isfinite(er.smoothing_fit), er.smoothing_fit, math.inf))

    # operator inequalities on polynomials
    sw = analysis.inequality_sweep(opts.n_polys, seed=opts.seed)
    res.append(PropertyResult("operator_inequalities", sw.passed, float(len(sw.failures)), 0.0,
                              {"checks": sw.checks, "min_margin_power": sw.min_margin_power,
                               "min_margin_lower": sw.min_margin_lower}))

    # Gevrey step
    mags = np.zeros(31)
    params = StepParams(2.0, 1.0, 0.5, 1.0)  # only rho enters step_phi
    for rho in np.linspace(0.001, 0.999, 499):
        mags = np.maximum(mags, np.abs(step_phi(params, rho, 30).derivatives()))
    fit = gevrey_fit(mags)
    res.append(PropertyResult("step_gevrey_order", 1.8 <= fit.s <= 2.2, fit.s, 2.2, {"R": fit.R}))

    # Airy
    tb = airy.airy_table()
    a0, a1 = airy.airy_seeds()
    d0 = abs(airy.airy_eval(0.0, 0, tb) - a0) + abs(airy.airy_eval(0.0, 1, tb) - a1)
    res.append(PropertyResult("airy_seeds", d0 <= 1e-12, d0, 1e-12))
    ode = airy.airy_ode_check(np.linspace(-4.0, 4.0, 401), tb)
    res.append(PropertyResult("airy_ode", ode <= 1e-10, ode, 1e-10))
    pde = max(airy.fundamental_pde_defect(np.linspace(-1.5, 1.5, 31), t, tb) for t in (0.1, 1.0 / 3.0, 1.0))
    res.append(PropertyResult("fundamental_solution_pde", pde <= 1e-8, pde, 1e-8))
    mass = abs(airy.fundamental_mass(1.0 / 3.0, tb) - 1.0)
    res.append(PropertyResult("fundamental_solution_mass", mass <= 1e-3, mass, 1e-3))
    C, k = airy.airy_envelope(tb, 0.5)
    res.append(PropertyResult("airy_envelope", math.isfinite(C) and k < tb.n_max, C, math.inf, {"argmax": k}))
    return res
