#!/usr/bin/env python3
"""State-dependent vs state-independent bidding on the uniform-price market.

Solves the chain benchmark and the best static mixture for the capped-linear
reward min(gap, 2) at the budget where the gap between them peaks, then
cross-checks both against simulation.
"""

import math

from spacing_auctions.baselines import optimal_static, static_run
from spacing_auctions.benchmark import solve_benchmark
from spacing_auctions.fkors import FkorsConfig, default_params, run_fkors
from spacing_auctions.market import discretize_uniform
from spacing_auctions.rewards import cap_linear_reward
from spacing_auctions.rng import SplitMix64


def main() -> None:
    rho = math.sqrt(3.0) - 1.5
    market = discretize_uniform(1000)
    reward = cap_linear_reward(2)

    bench = solve_benchmark(market, reward, m=20, rho=rho)
    policy, static_value = optimal_static(market, reward, m=30, rho=rho)
    print(f"budget per round      rho = {rho:.6f}")
    print(f"chain benchmark       R   = {bench.opt_value:.6f}  (payment {bench.avg_payment:.6f})")
    print(f"best static mixture   R   = {static_value:.6f}")
    print(f"ratio                     = {bench.opt_value / static_value:.4f}")

    T = 32000
    seeds = range(1, 6)
    m, k = default_params(T, rho, 1.0)
    fk_mean = 0.0
    st_mean = 0.0
    for seed in seeds:
        cfg = FkorsConfig(rho=rho, T=T, m=m, k=k, seed=seed)
        fk_mean += run_fkors(market, reward, cfg).utility_true / T
        st_mean += static_run(market, reward, policy, rho, T, SplitMix64(seed)).utility_true / T
    fk_mean /= len(seeds)
    st_mean /= len(seeds)
    print(f"simulated at T={T} over {len(seeds)} seeds:")
    print(f"  fkors  utility/T = {fk_mean:.4f}")
    print(f"  static utility/T = {st_mean:.4f}")


if __name__ == "__main__":
    main()
