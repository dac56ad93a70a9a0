"""Tests for the reward sequences."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spacing_auctions.rewards import (
    RewardFn,
    cap_linear_reward,
    eval_r,
    eval_r_capped,
    perturb_strictly_concave,
    power_reward,
    reward_from_config,
    sqrt_reward,
    table_reward,
    validate_reward,
)


def test_eval_sqrt():
    assert eval_r(sqrt_reward(), 4) == 2.0


def test_eval_cap_linear_beyond_cap():
    # min(7, 2) = 2
    assert eval_r(cap_linear_reward(2), 7) == 2.0


@pytest.mark.parametrize(
    "f",
    [sqrt_reward(), cap_linear_reward(3), power_reward(0.5), table_reward([0.0, 1.0, 1.5])],
)
def test_reward_at_zero_is_zero(f):
    assert eval_r(f, 0) == 0.0


def test_eval_r_negative_gap_rejected():
    with pytest.raises(ValueError):
        eval_r(sqrt_reward(), -1)


def test_table_out_of_range_is_error():
    with pytest.raises(ValueError):
        eval_r(table_reward([0.0, 1.0]), 2)


def test_eval_r_capped_examples():
    assert eval_r_capped(sqrt_reward(), 9, 4) == 2.0
    assert eval_r_capped(sqrt_reward(), 3, 4) == pytest.approx(math.sqrt(3))
    assert eval_r_capped(cap_linear_reward(2), 1, 5) == 1.0


@given(l=st.integers(0, 500), m=st.integers(1, 60))
def test_cap_saturates(l, m):
    f = sqrt_reward()
    if l >= m:
        assert eval_r_capped(f, l, m) == eval_r_capped(f, m, m)


def test_validate_sqrt_long_horizon():
    assert validate_reward(sqrt_reward(), 1000).ok


def test_validate_reports_first_violation():
    res = validate_reward(table_reward([0.0, 1.0, 3.0]), 2)
    assert not res.ok
    assert res.violation_index == 0


def test_validate_hand_checked_table():
    # increments 0.5, 0.4, 0.3
    assert validate_reward(table_reward([0.0, 0.5, 0.9, 1.2]), 3).ok


def test_validate_nonzero_origin():
    res = validate_reward(table_reward([0.5, 1.0, 1.4]), 2)
    assert not res.ok and res.violation_index == 0


@pytest.mark.parametrize(
    "f",
    [sqrt_reward(), cap_linear_reward(5), power_reward(0.7), power_reward(1.0)],
)
def test_builtin_kinds_validate_to_ten_thousand(f):
    assert validate_reward(f, 10_000).ok


def test_perturb_rejects_bad_eps():
    with pytest.raises(ValueError):
        perturb_strictly_concave(sqrt_reward(), 0.0, 10)
    with pytest.raises(ValueError):
        perturb_strictly_concave(sqrt_reward(), 1.0, 10)


def test_perturb_cap_linear_breaks_ties():
    g = perturb_strictly_concave(cap_linear_reward(2), 0.01, 4)
    inc = [eval_r(g, l + 1) - eval_r(g, l) for l in range(4)]
    assert inc[2] > inc[3] > 0.0


def test_perturb_table_increments_match_formula():
    g = perturb_strictly_concave(table_reward([0.0, 1.0, 2.0]), 0.1, 2)
    inc1 = eval_r(g, 1) - eval_r(g, 0)
    inc2 = eval_r(g, 2) - eval_r(g, 1)
    assert inc1 == pytest.approx((1.0 + 0.05) / 1.1)
    assert inc2 == pytest.approx((1.0 + 0.025) / 1.1)


@settings(max_examples=60, deadline=None)
@given(
    eps=st.floats(1e-3, 0.5),
    horizon=st.integers(2, 30),
    kind=st.sampled_from(["sqrt", "cap3", "pow", "lin"]),
)
def test_perturb_output_strictly_concave_and_valid(eps, horizon, kind):
    # eps * 2^-(horizon+1) stays far above float resolution in this range, so
    # strictness is representable
    base = {
        "sqrt": sqrt_reward(),
        "cap3": cap_linear_reward(3),
        "pow": power_reward(0.6),
        "lin": power_reward(1.0),
    }[kind]
    g = perturb_strictly_concave(base, eps, horizon)
    assert validate_reward(g, horizon).ok
    vals = [eval_r(g, l) for l in range(horizon + 1)]
    inc = [vals[l + 1] - vals[l] for l in range(horizon)]
    for l in range(horizon - 1):
        assert inc[l + 1] < inc[l] - 0.0  # strictly decreasing
    # the perturbation moves values by at most eps * max(1, r(horizon))
    bound = eps * max(1.0, eval_r(base, horizon))
    for l in range(horizon + 1):
        assert abs(vals[l] - eval_r(base, l)) <= bound + 1e-15


@settings(max_examples=40, deadline=None)
@given(eps=st.floats(1e-6, 0.5), horizon=st.integers(2, 200))
def test_perturb_output_valid_at_any_scale(eps, horizon):
    # strictness at 1e-15 resolution; weak concavity always
    g = perturb_strictly_concave(sqrt_reward(), eps, horizon)
    assert validate_reward(g, horizon).ok
    vals = [eval_r(g, l) for l in range(horizon + 1)]
    for l in range(horizon - 1):
        assert vals[l + 2] - vals[l + 1] < vals[l + 1] - vals[l] + 1e-15


def test_reward_from_config_round_trip():
    assert reward_from_config({"type": "sqrt"}).kind == "sqrt"
    assert reward_from_config({"type": "cap_linear", "cap": 2}).cap == 2
    assert reward_from_config({"type": "power", "alpha": 0.5}).alpha == 0.5
    t = reward_from_config({"type": "table", "values": [0, 0.5, 0.9]})
    assert t.values == (0.0, 0.5, 0.9)
    with pytest.raises(ValueError):
        reward_from_config({"type": "cubic"})


def test_reward_fn_constructor_validation():
    with pytest.raises(ValueError):
        RewardFn("cap_linear")
    with pytest.raises(ValueError):
        RewardFn("power", alpha=1.5)
    with pytest.raises(ValueError):
        RewardFn("table", values=())
