#!/usr/bin/env python3
"""Airy Taylor tables: truncation study, envelope fits, line-solution derivative growth."""
import argparse

import numpy as np
from scipy.special import airy as sp_airy

from kdvflat import airy
from kdvflat.flatout import gevrey_fit


def bump(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    m = np.abs(s) < 1
    out[m] = np.exp(-1.0 / (1.0 - s[m] ** 2))
    return out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n-max", type=int, nargs="+", default=[120, 60, 40, 30])
    p.add_argument("--times", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    args = p.parse_args(argv)
    xs = np.linspace(-4.0, 4.0, 401)
    ref = sp_airy(xs)[0]
    print(f"{'n_max':>6} {'ODE defect':>11} {'|Ai - ref|':>11}")
    for n in args.n_max:
        tb = airy.airy_table(n)
        ode = airy.airy_ode_check(xs, tb, strict=False)
        err = float(np.max(np.abs(airy.airy_eval(xs, 0, tb, strict=False) - ref)))
        print(f"{n:6d} {ode:11.2e} {err:11.2e}")
    fit = gevrey_fit(airy.airy_table().derivs)
    print(f"Taylor coefficients at 0: fitted order {fit.s:.3f} (envelope (n!)^(1/3))")
    for t in args.times:
        f, _ = airy.line_derivative_fit(bump, 1.0, np.linspace(-1, 1, 41), t)
        print(f"line solution at t={t:g}: derivative growth order {f.s:.3f}")


if __name__ == "__main__":
    main()
