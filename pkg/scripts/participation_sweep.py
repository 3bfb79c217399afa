#!/usr/bin/env python3
"""Sweep the conductance ratio and print the optimal participation factors
at each point, showing where the single-slack regime gives way to shared
loss compensation.

Usage:
    python scripts/participation_sweep.py data/case118.m --gammas 0:0.6:0.05
"""

import argparse

import numpy as np

from slackopt import Homogeneous, load_case, prepare_network, sweep_gamma
from slackopt.cli import _parse_gammas


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("case", help="MATPOWER case file")
    ap.add_argument("--gammas", default="0:0.6:0.05",
                    help="comma list or start:stop:step range")
    ap.add_argument("--min-injection", type=float, default=0.0)
    args = ap.parse_args()

    case = load_case(args.case)
    gammas = _parse_gammas(args.gammas)
    rows = sweep_gamma(case, gammas=gammas, min_injection=args.min_injection)

    # candidate order is fixed across the sweep; header from the first row
    first = next(res for _, res, err in rows if err is None)
    net = prepare_network(case, Homogeneous(0.0))
    ids = [net.bus_ids[b] for b in first.buses]
    print(f"{case.name}: optimal participation factors")
    print("gamma   " + " ".join(f"{i:>7}" for i in ids) + "   nonzero")
    for gamma, res, err in rows:
        if err is not None:
            print(f"{gamma:<7.3g} failed: {err}")
            continue
        cells = " ".join(f"{f:>7.3f}" if f > 0 else f"{'.':>7}"
                         for f in res.factors)
        print(f"{gamma:<7.3g} {cells}   {np.count_nonzero(res.factors)}")


if __name__ == "__main__":
    main()
