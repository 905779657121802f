"""Euler integration of the filter SDEs against the exact filter.

Reports the mean (over paths) of the largest deviation along each path for
the posterior mean and the posterior density, at successive step doublings,
together with the ratio of consecutive errors.
"""

import argparse

from hara_learning import Log, MarketParams, Prior, SimConfig, filter_sde_convergence


def parse_atom(text):
    theta, weight = text.split(":")
    return float(theta), float(weight)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--atoms", nargs="+", type=parse_atom, default=[(0.1, 0.5), (0.5, 0.5)])
    ap.add_argument("--levels", nargs="+", type=int, default=[125, 250, 500, 1000])
    ap.add_argument("--paths", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=11)
    args = ap.parse_args()

    cfg = SimConfig(
        prior=Prior.discrete(args.atoms),
        mkt=MarketParams(0.2, 1.0),
        utility=Log(),
        n_paths=args.paths,
        seed=args.seed,
    )
    results = filter_sde_convergence(cfg, tuple(args.levels))
    print(f"{'steps':>6} {'theta_hat err':>14} {'ratio':>7} {'density err':>12} {'ratio':>7}")
    prev = None
    for res in results:
        if prev is None:
            print(f"{res.n_steps:6d} {res.theta_hat_error:14.4e} {'':>7} {res.density_error:12.4e}")
        else:
            print(
                f"{res.n_steps:6d} {res.theta_hat_error:14.4e} {prev.theta_hat_error / res.theta_hat_error:7.3f}"
                f" {res.density_error:12.4e} {prev.density_error / res.density_error:7.3f}"
            )
        prev = res


if __name__ == "__main__":
    main()
