"""Tabulate portfolio ratio and hedging demand over a grid of risk aversions.

Example::

    python scripts/run_gamma_sweep.py --atoms 0.1:0.5 0.5:0.5 --t 0 --y 0
    python scripts/run_gamma_sweep.py --gaussian 0.5 0.5
"""

import argparse

import numpy as np

from hara_learning import EvalPoint, MarketParams, Prior, gamma_sweep
from hara_learning.policy import increasing_from


def parse_atom(text):
    theta, weight = text.split(":")
    return float(theta), float(weight)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    prior = ap.add_mutually_exclusive_group(required=True)
    prior.add_argument("--atoms", nargs="+", type=parse_atom, help="theta:weight pairs")
    prior.add_argument("--gaussian", nargs=2, type=float, metavar=("M", "V"))
    ap.add_argument("--sigma", type=float, default=0.2)
    ap.add_argument("--T", type=float, default=1.0)
    ap.add_argument("--r", type=float, default=0.0)
    ap.add_argument("--eta", type=float, default=0.0)
    ap.add_argument("--t", type=float, default=0.0)
    ap.add_argument("--x", type=float, default=1.0)
    ap.add_argument("--y", type=float, default=0.0)
    ap.add_argument("--gammas", type=float, nargs=3, default=(-20.0, 0.95, 50), metavar=("LO", "HI", "N"))
    args = ap.parse_args()

    prior = Prior.discrete(args.atoms) if args.atoms else Prior.gaussian(*args.gaussian)
    mkt = MarketParams(args.sigma, args.T, args.r)
    lo, hi, n = args.gammas
    rows = gamma_sweep(prior, mkt, EvalPoint(args.t, args.x, args.y), args.eta, np.linspace(lo, hi, int(n)))

    print(f"{'gamma':>10} {'pi_hat':>14} {'pi_myopic':>14} {'ratio':>10} {'hedging':>14}")
    for r in rows:
        if r.error:
            print(f"{r.gamma:10.4f}  {r.error}")
        else:
            print(f"{r.gamma:10.4f} {r.pi_hat:14.6g} {r.pi_myopic:14.6g} {r.ratio:10.6f} {r.hedging:14.6g}")
    start = increasing_from(rows, "hedging")
    if start is not None:
        print(f"\nhedging demand nondecreasing in gamma from gamma = {start:.4f}")


if __name__ == "__main__":
    main()
