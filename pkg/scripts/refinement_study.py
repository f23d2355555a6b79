#!/usr/bin/env python3
"""Convergence of the controlled solver against an exact series solution.

A cubic flat output makes the N = 3 series an exact solution, so the error
table isolates the discretization error. Also prints the finite-difference
cross-check against the Galerkin solver on a free problem.
"""
import argparse
import json
import math

import numpy as np

from kdvflat.flatout import flat_output_polynomial
from kdvflat.genfun import build_table
from kdvflat.pde import Discretization, solve_controlled, solve_free
from kdvflat.synth import assemble_state, synthesize_control


def manufactured(a, n_t_list, n_x):
    z = flat_output_polynomial([1.0, 1.0, 0.5, 1.0 / 6.0])
    table = build_table(a, 3)
    xs = np.linspace(-1.0, 0.0, 101)
    rows = []
    for nt in n_t_list:
        tg = np.linspace(0.0, 1.0, nt + 1)
        exact = assemble_state(table, z, 3, xs, tg)
        u = synthesize_control(table, z, 3, tg)
        tr = solve_controlled(u, (xs, exact.y[0]), a, 1.0, Discretization(n_x=n_x, n_t=nt), xs)
        rows.append((nt, float(np.max(np.abs(tr.y - exact.y)))))
    return rows


def fd_crosscheck(a, n_x_list):
    f = lambda x: np.sin(np.pi * x)
    ref = solve_free(f, a, 1.0)
    out = []
    for n in n_x_list:
        fd = solve_free(f, a, 1.0, Discretization(n_x=n, scheme="finite_difference"))
        out.append((n, float(np.max(np.abs(fd.y - ref.y)))))
    return out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--a", type=float, nargs="+", default=[0.0, 1.0])
    p.add_argument("--n-t", type=int, nargs="+", default=[100, 200, 400, 800, 1600])
    p.add_argument("--n-x", type=int, default=64)
    p.add_argument("--json", help="write the tables to this file")
    args = p.parse_args(argv)
    report = {}
    for a in args.a:
        rows = manufactured(a, args.n_t, args.n_x)
        print(f"manufactured solution, a={a:g}")
        print(f"{'n_t':>6} {'max error':>12} {'order':>7}")
        for k, (nt, e) in enumerate(rows):
            order = "" if k == 0 else f"{math.log(rows[k - 1][1] / e) / math.log(nt / rows[k - 1][0]):7.2f}"
            print(f"{nt:6d} {e:12.3e} {order}")
        fd = fd_crosscheck(a, [64, 128, 256])
        print("finite differences vs Galerkin: " + ", ".join(f"n_x={n}: {e:.2e}" for n, e in fd))
        report[str(a)] = {"manufactured": rows, "fd_crosscheck": fd}
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(report, fh, indent=2)


if __name__ == "__main__":
    main()
