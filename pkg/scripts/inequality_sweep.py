#!/usr/bin/env python3
"""Operator inequalities for P on random polynomials: failures, margins and fitted constants."""
import argparse

import numpy as np

from kdvflat.analysis import empirical_K, graph_norm_constant, inequality_sweep, random_polys


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n-polys", type=int, default=1000)
    p.add_argument("--degree", type=int, default=9)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    sw = inequality_sweep(args.n_polys, degree=args.degree, seed=args.seed)
    print(f"{sw.checks} checks on {sw.n_polys} polynomials, {len(sw.failures)} failures")
    print(f"smallest relative margins: {sw.min_margin_power:.3g} (||P^n f|| bound), {sw.min_margin_lower:.3g} (lower bound)")
    polys = random_polys(np.random.default_rng(args.seed), args.n_polys, args.degree)
    for a in (0.5, 1.0, 4.0):
        c1 = [graph_norm_constant(polys, a, q) for q in (1, 2, "inf")]
        ks = [empirical_K(polys, a, n, 2) for n in (1, 2, 3)]
        print(f"a={a:g}: fitted C1 (p=1,2,inf) " + ", ".join(f"{c:.3f}" for c in c1)
              + "; fitted K (p=2, n=1..3) " + ", ".join(f"{k:.3f}" for k in ks))


if __name__ == "__main__":
    main()
