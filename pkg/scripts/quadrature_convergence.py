"""Change in each quadrature-based ergodic rate when the order goes 100 -> 200 -> 400.

    python3 scripts/quadrature_convergence.py [--K 10]
"""
import argparse

import numpy as np

from irsnoma import downlink as dl
from irsnoma import uplink as ul
from irsnoma.model import SystemParams, derive
from irsnoma.specfun import make_chebyshev_gauss, make_gauss_laguerre


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--K", type=int, default=10)
    args = ap.parse_args()
    c = derive(SystemParams(K=args.K))
    funcs = {
        "dl_noma_far (CG)": lambda r, u: dl.er_dl_noma_far(r, c, make_chebyshev_gauss(u)),
        "oma_far (GL)": lambda r, u: dl.er_dl_oma(r, c, make_gauss_laguerre(min(u, 200)))[1],
        "ul_noma_near (GL)": lambda r, u: ul.er_ul_noma_near(r, c, make_gauss_laguerre(min(u, 200))),
        "ul_noma_far (GL)": lambda r, u: ul.er_ul_noma_far(r, c, make_gauss_laguerre(min(u, 200))),
    }
    print(f"{'rate':20s} {'snr_db':>6s} {'u=100':>14s} {'|200-100|':>10s} {'|400-200|':>10s}")
    for name, f in funcs.items():
        for db in np.arange(0, 81, 10):
            r = 10 ** (db / 10)
            v1, v2, v4 = f(r, 100), f(r, 200), f(r, 400)
            print(f"{name:20s} {db:6.0f} {v1:14.8g} {abs(v2 - v1):10.2e} {abs(v4 - v2):10.2e}")


if __name__ == "__main__":
    main()
