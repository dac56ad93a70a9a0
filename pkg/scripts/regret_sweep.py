#!/usr/bin/env python3
"""FKORS regret growth across horizons on the uniform-price market."""

import argparse

from spacing_auctions.harness import reference_opt, run_batch
from spacing_auctions.market import discretize_uniform
from spacing_auctions.rewards import sqrt_reward


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rho", type=float, default=0.2)
    ap.add_argument("--K", type=int, default=50)
    ap.add_argument("--T-list", default="2000,8000,32000")
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--workers", type=int, default=2)
    args = ap.parse_args()

    market = discretize_uniform(args.K)
    seeds = list(range(1, args.seeds + 1))
    print("T,opt_per_round,mean_utility,mean_regret,regret_per_sqrtT")
    for T in (int(t) for t in args.T_list.split(",")):
        doc = {
            "market": {"type": "uniform_grid", "K": args.K},
            "reward": {"type": "sqrt"},
            "rho": args.rho,
            "T": T,
            "seeds": seeds,
        }
        stats = run_batch(doc, "fkors", seeds, workers=args.workers)
        opt = reference_opt(market, sqrt_reward(), args.rho, T)
        mean_util = sum(s["utility_true"] for s in stats) / len(stats)
        mean_reg = T * opt - mean_util
        print(f"{T},{opt:.5f},{mean_util:.1f},{mean_reg:.1f},{mean_reg / T ** 0.5:.3f}")


if __name__ == "__main__":
    main()
