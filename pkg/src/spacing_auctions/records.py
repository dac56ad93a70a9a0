"""Run records shared by every simulator (online learner and baselines)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional


class RoundEntry(NamedTuple):
    t: int
    epoch: int
    state_fake: int
    state_true: int
    conv_rate: float
    bid: Optional[float]       # None = skipped
    price: float
    win: int
    conversion: int
    payment: float
    reward_true: float         # r(true gap) on conversion, else 0
    reward_acc: float          # r_m(planner state) on conversion, else 0


class EpochEntry(NamedTuple):
    index: int
    t_end: int
    length: int
    by_conversion: bool


class EpochDiagnostic(NamedTuple):
    epoch: int
    reward_avg: float          # R of the epoch's policy on the true market
    pay_avg: float             # C of the epoch's policy on the true market
    eps_r: float               # max(0, OPT_ref - R)
    eps_c: float               # max(0, C - rho)


TRACE_HEADER = "t,epoch,state_fake,state_true,conv_rate,bid,price,win,conversion,payment,reward_true"


@dataclass
class RunRecord:
    """Everything observable about one simulated run."""

    algorithm: str
    seed: int
    T: int
    rho: float
    utility_true: float = 0.0
    utility_accounted: float = 0.0
    spend: float = 0.0
    wins: int = 0
    conversions: int = 0
    rounds: Optional[list[RoundEntry]] = None
    epochs: list[EpochEntry] = field(default_factory=list)
    diagnostics: Optional[list[EpochDiagnostic]] = None
    config: dict = field(default_factory=dict)


def _fmt(x: float) -> str:
    """Shortest float text that round-trips; '.' decimal separator."""
    return repr(float(x))


def trace_lines(record: RunRecord) -> list[str]:
    """Per-round trace rows (header first); requires the run kept its rounds."""
    if record.rounds is None:
        raise ValueError("run was executed without trace collection")
    lines = [TRACE_HEADER]
    for e in record.rounds:
        bid = "" if e.bid is None else _fmt(e.bid)
        lines.append(
            f"{e.t},{e.epoch},{e.state_fake},{e.state_true},{_fmt(e.conv_rate)},{bid},"
            f"{_fmt(e.price)},{e.win},{e.conversion},{_fmt(e.payment)},{_fmt(e.reward_true)}"
        )
    return lines
