#!/usr/bin/env python3
"""Steering 0 to polynomial targets; error against the target and the flat-output jet."""
import argparse

import numpy as np

from kdvflat.pde import Discretization
from kdvflat.pipelines import named_target, run_reach


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--targets", nargs="+", default=["x2", "x5", "fig1"])
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--target-N", type=int, default=6)
    p.add_argument("--n-t", type=int, nargs="+", default=[500, 1000, 2000])
    args = p.parse_args(argv)
    for name in args.targets:
        y1 = named_target(name, args.target_N)
        y1 = np.trim_zeros(y1, "b")
        print(f"target {name}: degree {y1.size - 1}, {np.count_nonzero(y1)} nonzero coefficients")
        for nt in args.n_t:
            r = run_reach(y1, args.a, disc=Discretization(n_t=nt))
            print(f"  n_t={nt:5d}: max error {r.final_error:.2e}, round trip {r.roundtrip_defect:.1e}, "
                  f"b = {np.array2string(r.b, precision=3)}")


if __name__ == "__main__":
    main()
