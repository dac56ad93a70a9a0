#!/usr/bin/env python3
"""Competitive ratio of fixed bidding on uniform prices with sqrt rewards.

Prints the closed-form curve on a budget grid and cross-checks one point
against simulation.
"""

import math

import numpy as np

from spacing_auctions.baselines import (
    fixed_bid_average_utility,
    fixed_bid_policy,
    static_run,
    warmup_ratio,
)
from spacing_auctions.market import discretize_uniform
from spacing_auctions.rewards import sqrt_reward
from spacing_auctions.rng import SplitMix64


def main() -> None:
    print("rho,ratio")
    for rho in np.linspace(0.005, 0.25, 50):
        print(f"{rho:.6f},{warmup_ratio(float(rho)):.6f}")

    rho = 0.1
    T = 200_000
    market = discretize_uniform(1000)
    policy = fixed_bid_policy(market, math.sqrt(2.0 * rho))
    sim = sum(
        static_run(market, sqrt_reward(), policy, rho, T, SplitMix64(s)).utility_true / T
        for s in range(5)
    ) / 5
    closed = fixed_bid_average_utility(rho)
    print(f"# rho={rho}: simulated {sim:.5f} vs closed form {closed:.5f}")


if __name__ == "__main__":
    main()
