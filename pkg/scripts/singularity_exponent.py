"""Log-log slope of |C(x, y)| against |1 - z| as y approaches -x."""

import argparse

import numpy as np

from ptscarf import ckernel as ck
from ptscarf.scarf import ModelParams


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha-re", type=float, default=1.0)
    ap.add_argument("--alpha-im", type=float, default=0.5)
    ap.add_argument("--x", type=float, nargs="+", default=[-0.6, 0.3, 0.9])
    args = ap.parse_args()
    p = ModelParams(complex(args.alpha_re, args.alpha_im))
    offsets = np.logspace(-2, -6, 9)
    for x in args.x:
        slope, omz, mags = ck.singularity_slope(p, x, offsets=offsets)
        # the leading pole term alone, for comparison
        ys = -x - np.sign(np.cos(x)) * offsets
        pole = np.abs(ck.pole_coefficient(p) * np.cos(x) / (np.sin(x) + np.sin(ys)))
        print(f"x = {x:+.2f}: slope {slope:.4f}")
        for o, m, q in zip(omz, mags, pole):
            print(f"  |1-z| = {o:.3e}  |C| = {m:.6e}  pole term = {q:.6e}  ratio = {m / q:.6f}")


if __name__ == "__main__":
    main()
