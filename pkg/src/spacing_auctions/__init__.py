"""Budgeted second-price auctions with a win-spacing objective.

Rewards are a concave function of the gap since the last conversion; the
package solves the infinite-horizon constrained-chain benchmark by linear
programming, runs the FKORS online learner against sampled markets, and
ships the static baselines and closed-form analytics used to sanity-check
both.
"""

from .baselines import (
    StaticPolicy,
    fixed_bid_policy,
    fixed_interval_run,
    geometric_reward_mean,
    optimal_static,
    polylog_half_neg,
    reverse_jensen_check,
    static_run,
    warmup_ratio,
)
from .benchmark import (
    BenchResult,
    CycleStats,
    PolicyVec,
    build_occupancy_lp,
    check_monotone,
    check_win_floor,
    cycle_stats,
    cycle_stats_wp,
    finite_horizon_dp,
    solve_benchmark,
    stationary,
)
from .estimation import empirical_market, empirical_wp, sup_error
from .fkors import FkorsConfig, default_params, regret, run_fkors
from .harness import (
    ExperimentConfig,
    load_config,
    reference_opt,
    run_experiment,
    validate_suite,
)
from .market import (
    MarketAtom,
    MarketDistribution,
    SKIP,
    bid_for,
    candidate_multipliers,
    discretize_uniform,
    mean_conversion,
    win_pay_mu,
)
from .records import RunRecord, trace_lines
from .rewards import (
    RewardFn,
    cap_linear_reward,
    eval_r,
    eval_r_capped,
    perturb_strictly_concave,
    power_reward,
    sqrt_reward,
    table_reward,
    validate_reward,
)
from .rng import SplitMix64
from .simplex import LinearProgram, LpSolution, solve_lp

__all__ = [name for name in dir() if not name.startswith("_")]
