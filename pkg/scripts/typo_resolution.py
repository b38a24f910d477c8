"""Rank every closed-form candidate against the Abel oracle."""

import argparse

from ptscarf import ckernel as ck
from ptscarf.report import REFERENCE_POINT, resolution_points
from ptscarf.scarf import ModelParams


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=complex, nargs="+", default=[1 + 0.5j, 0.8 + 1.2j])
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--show", type=int, default=8, help="candidates to list per alpha")
    args = ap.parse_args()
    pts = resolution_points(args.seed)
    ref = ck.KernelPoint(*REFERENCE_POINT)
    for a in args.alpha:
        res = ck.resolve_closed_form(ModelParams(a), pts, ref)
        ranked = sorted(res["records"], key=lambda r: r["residual"])
        print(f"alpha = {a}: {len(res['survivors'])} survivor(s)")
        for r in ranked[:args.show]:
            print(f"  {r['residual']:.3e}  {r['form'].label}")


if __name__ == "__main__":
    main()
