"""Abel-regularised kernel along t = -1 + 2^-k and its Richardson extrapolant."""

import argparse

from ptscarf import ckernel as ck
from ptscarf.scarf import ModelParams


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha-re", type=float, default=1.0)
    ap.add_argument("--alpha-im", type=float, default=0.5)
    ap.add_argument("--x", type=float, default=0.3)
    ap.add_argument("--y", type=float, default=0.7)
    ap.add_argument("--k-max", type=int, default=12)
    args = ap.parse_args()
    p = ModelParams(complex(args.alpha_re, args.alpha_im))
    pt = ck.KernelPoint(args.x, args.y)
    closed = ck.kernel_closed(pt.x, pt.y, p)
    print(f"closed form: {closed:.15g}")
    for order in (1, 2, 3):
        sched = ck.AbelSchedule(k_values=tuple(range(4, args.k_max + 1)), extrapolation_order=order)
        est, trace = ck.kernel_abel(pt, p, sched, return_trace=True)
        print(f"order {order}: {est:.15g}  rel err {abs(est - closed) / abs(closed):.2e}  "
              f"change {trace['error']:.2e}")
    print("raw values:")
    for h, v in zip(trace["h"], trace["values"]):
        print(f"  1+t = {h:.3e}  C_t = {v:.15g}  rel dev {abs(v - closed) / abs(closed):.2e}")


if __name__ == "__main__":
    main()
