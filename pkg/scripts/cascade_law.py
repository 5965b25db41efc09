"""Histogram and empirical CDF of X against the noncentral chi-square law.

    python3 scripts/cascade_law.py [--trials N] [--out results/cascade_law.csv]

Defaults: K=30, m_G=3, m_g=2.
"""
import argparse
import csv
from pathlib import Path

import numpy as np

from irsnoma.chanstats import CascadeLawCLT, clt_cdf_x, clt_pdf_x
from irsnoma.mcsim import McConfig, empirical_cascade_law
from irsnoma.model import SystemParams, derive


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--K", type=int, default=30)
    ap.add_argument("--mG", type=float, default=3.0)
    ap.add_argument("--mg", type=float, default=2.0)
    ap.add_argument("--trials", type=int, default=10**6)
    ap.add_argument("--seed", type=int, default=2021)
    ap.add_argument("--out", default="results/cascade_law.csv")
    args = ap.parse_args()

    c = derive(SystemParams(K=args.K, m_G=args.mG, m_g=args.mg))
    law = CascadeLawCLT(c.lam)
    emp = empirical_cascade_law(args.mG, args.mg, args.K, McConfig(trials=args.trials, seed=args.seed))
    mid = 0.5 * (emp.edges[1:] + emp.edges[:-1])

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "pdf_mc", "pdf_clt", "cdf_mc", "cdf_clt"])
        for x, d in zip(mid, emp.density):
            w.writerow([repr(float(x)), repr(float(d)), repr(float(clt_pdf_x(x, law))),
                        repr(float(emp.cdf_x(x))), repr(float(clt_cdf_x(x, law)))])
    ks = emp.ks_distance(lambda x: clt_cdf_x(x, law))
    print(f"lambda={c.lam:.4f}  mean X: mc={emp.mean_x.mean:.4f} +- {emp.mean_x.std_error:.4f}, "
          f"clt={1 + c.lam:.4f}  KS={ks:.4f}  -> {out}")


if __name__ == "__main__":
    main()
