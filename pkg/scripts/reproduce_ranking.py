#!/usr/bin/env python3
"""Rank slack candidates on a case and compare the resistance-distance
score against the exact Newton-Raphson losses.

Prints one table per conductance mode so the linearity of exact losses in
the score (and the agreement of both argmins) can be read off directly.

Usage:
    python scripts/reproduce_ranking.py data/case57.m --gamma 0.1
"""

import argparse

import numpy as np

from slackopt import Homogeneous, Tabulated, load_case, validate_ranking


def table(case, mode, label):
    net, state, rows = validate_ranking(case, mode)
    print(f"\n{case.name} -- {label} (d0 = {state.d0:.6g} p.u.)")
    print(f"{'bus':>6} {'score':>12} {'o2':>12} {'o3':>12} "
          f"{'exact':>12} {'o3 err %':>9}")
    for r in rows:
        err = 100 * abs(r.predicted_loss_o3 - r.exact_loss) / r.exact_loss
        print(f"{net.bus_ids[r.bus]:>6} {r.score:>12.6f} "
              f"{r.predicted_loss_o2:>12.6f} {r.predicted_loss_o3:>12.6f} "
              f"{r.exact_loss:>12.6f} {err:>9.3f}")
    scores = np.array([r.score for r in rows])
    losses = np.array([r.exact_loss for r in rows])
    a = np.vstack([scores, np.ones_like(scores)]).T
    coef, *_ = np.linalg.lstsq(a, losses, rcond=None)
    resid = losses - a @ coef
    spread = losses.max() - losses.min()
    print(f"affine fit: loss = {coef[0]:.6g} * score + {coef[1]:.6g}, "
          f"rms residual / spread = {np.sqrt(np.mean(resid**2)) / spread:.4f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("case", help="MATPOWER case file")
    ap.add_argument("--gamma", type=float, default=0.1)
    ap.add_argument("--skip-tabulated", action="store_true")
    args = ap.parse_args()

    case = load_case(args.case)
    table(case, Homogeneous(args.gamma), f"homogeneous gamma = {args.gamma}")
    if not args.skip_tabulated:
        table(case, Tabulated(), "tabulated conductances")


if __name__ == "__main__":
    main()
