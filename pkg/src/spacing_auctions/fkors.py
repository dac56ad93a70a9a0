"""Follow the k-delayed Optimal Response Strategy (FKORS).

The learner splits the horizon into epochs of stochastic length.  Rounds
1..k are a skip-only warm-up that just records (price, conversion rate)
samples.  Each later epoch starts by solving the occupancy plan on every
sample seen so far (capped chain of m states, forced bid-1 in state m),
restarts its planner state at 1, and plays the resulting per-state mixtures
until a conversion ends the epoch or k rounds pass without one.  Bids are
placed only while the remaining budget is at least 1, which makes the budget
constraint hold surely, not just in expectation.

The planner state ("fake" gap) is reset at every epoch start even when the
previous epoch ended without a conversion, so the true gap is always at
least the fake gap and the realized reward r(true gap) dominates the
accounted reward r_m(fake gap) the plan was optimized for.

RNG consumption is fixed so a run is reproducible from its seed alone:
each round draws (1) the market atom, then (2) one mixture uniform whenever
the policy is consulted (that is, when the budget guard passes; also for
single-action mixtures), then (3) one conversion uniform if the auction was
won.  Nothing else consumes randomness.

Per-epoch plan reuse: consecutive epochs solve almost identical programs, so
the planner keeps a small cache of recently optimal bases and re-checks them
against the updated empirical curves (primal feasibility and reduced costs
within ``reuse_tolerance``), re-pivoting from scratch only when no cached
basis certifies.  Every epoch therefore plays a mixture that is optimal for
its own empirical program up to ``reuse_tolerance`` per round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .benchmark import (
    OccupancyProblem,
    basis_values,
    cycle_stats_wp,
    occupancy_problem,
    policy_from_occupancy,
    solve_benchmark,
    solve_occupancy_problem,
    verify_basis_values,
)
from .market import SKIP, MarketDistribution, bid_for
from .records import EpochDiagnostic, EpochEntry, RoundEntry, RunRecord
from .rewards import RewardFn, eval_r, eval_r_capped
from .rng import SplitMix64

_WIN_EPS = 1e-12


def default_params(T: int, rho: float, c_bar: float) -> tuple[int, int]:
    """Chain length and epoch cap: m = ceil(2 ln T / (c_bar rho)) and
    k = ceil(m + ln T / c_bar), natural logarithm."""
    if T < 2:
        raise ValueError("T must be >= 2")
    if not 0.0 < rho <= 1.0:
        raise ValueError(f"rho must lie in (0, 1], got {rho}")
    if not 0.0 < c_bar <= 1.0:
        raise ValueError(f"c_bar must lie in (0, 1], got {c_bar}")
    log_t = math.log(T)
    m = math.ceil(2.0 / (c_bar * rho) * log_t)
    k = math.ceil(m + log_t / c_bar)
    return m, k


@dataclass(frozen=True)
class FkorsConfig:
    rho: float
    T: int
    m: int
    k: int
    bid1_at_m: bool = True
    c_bar_mode: str = "known"          # "known" | "lower_bound"
    c_bar: Optional[float] = None      # the value the defaults were built from
    quantization_grid: int = 1000      # Q; 0 disables
    quantize_threshold: int = 2000     # distinct samples before quantizing
    reuse_tolerance: float = 1e-5      # 0 re-solves the plan every epoch
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.rho <= 1.0:
            raise ValueError(f"rho must lie in (0, 1], got {self.rho}")
        if self.T < 1:
            raise ValueError("T must be >= 1")
        if not 1 <= self.m <= self.T:
            raise ValueError(f"need 1 <= m <= T, got m={self.m}, T={self.T}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.quantization_grid < 0:
            raise ValueError("quantization grid must be >= 0")
        if self.c_bar_mode not in ("known", "lower_bound"):
            raise ValueError(f"unknown c_bar_mode {self.c_bar_mode!r}")
        if self.reuse_tolerance < 0.0:
            raise ValueError("reuse tolerance must be >= 0")

    @classmethod
    def from_defaults(
        cls, rho: float, T: int, c_bar: float, c_bar_mode: str = "known", **kw
    ) -> "FkorsConfig":
        m, k = default_params(T, rho, c_bar)
        return cls(rho=rho, T=T, m=m, k=k, c_bar_mode=c_bar_mode, c_bar=c_bar, **kw)


class _EmpiricalCurves:
    """Incrementally maintained empirical action curves.

    Distinct (p, c) pairs are kept sorted by the ratio c/p (inf for p = 0);
    candidate multipliers and searchsorted positions only change when a new
    pair appears, while the suffix sums behind W and P are three short vector
    operations per epoch.  Pairs are snapped to the 1/Q lattice once the
    distinct count passes the threshold.
    """

    def __init__(self, grid: int, threshold: int):
        self.grid = grid
        self.threshold = threshold
        self.quantizing = False
        self.counts: dict[tuple[float, float], int] = {}
        self.n = 0
        self.version = 0  # bumped whenever the candidate set changes
        self._stale = True
        self._cands: Optional[np.ndarray] = None

    def add(self, p: float, c: float) -> None:
        if self.quantizing:
            p = round(p * self.grid) / self.grid
            c = round(c * self.grid) / self.grid
        key = (p, c)
        if key in self.counts:
            self.counts[key] += 1
            if not self._stale:
                self._count_vec[self._slot[key]] += 1.0
        else:
            self.counts[key] = 1
            self._stale = True
            if (
                not self.quantizing
                and self.grid > 0
                and len(self.counts) > self.threshold
            ):
                self._requantize()
        self.n += 1

    def _requantize(self) -> None:
        self.quantizing = True
        old = self.counts
        self.counts = {}
        for (p, c), k in old.items():
            key = (round(p * self.grid) / self.grid, round(c * self.grid) / self.grid)
            self.counts[key] = self.counts.get(key, 0) + k
        self._stale = True

    def _rebuild(self) -> None:
        pairs = sorted(self.counts.keys())
        p = np.array([pc[0] for pc in pairs])
        c = np.array([pc[1] for pc in pairs])
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            ratio = np.where(p > 0.0, c / p, math.inf)
        order = np.argsort(ratio, kind="stable")
        self._pairs = [pairs[i] for i in order]
        self._p = p[order]
        self._c = c[order]
        self._ratio = ratio[order]
        ratios = np.unique(self._ratio[(self._p > 0.0) & (self._c > 0.0)])
        extra = []
        if np.any((self._p == 0.0) & (self._c > 0.0)) and np.any(self._p > 0.0):
            extra.append(2.0 * float(ratios[-1]) if ratios.size else 1.0)
        self._cands = np.unique(np.array([0.0, *ratios.tolist(), *extra, math.inf]))
        finite = self._cands[np.isfinite(self._cands)]
        self._positions = np.searchsorted(self._ratio, finite, side="left")
        self._slot = {pc: i for i, pc in enumerate(self._pairs)}
        self._count_vec = np.fromiter(
            (self.counts[pc] for pc in self._pairs), dtype=float, count=len(self._pairs)
        )
        self._stale = False
        self.version += 1

    def curves(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(candidates, W, P) of the current empirical distribution."""
        if self.n == 0:
            raise ValueError("no samples recorded yet")
        if self._stale:
            self._rebuild()
        probs = self._count_vec / self.n
        # clamp: cumulative rounding must not push the sums outside [0, 1]
        wc = np.clip(np.concatenate((np.cumsum((probs * self._c)[::-1])[::-1], [0.0])), 0.0, 1.0)
        wp = np.clip(np.concatenate((np.cumsum((probs * self._p)[::-1])[::-1], [0.0])), 0.0, 1.0)
        n_fin = self._positions.shape[0]
        w = np.zeros(self._cands.shape[0])
        p = np.zeros(self._cands.shape[0])
        w[:n_fin] = wc[self._positions]
        p[:n_fin] = wp[self._positions]
        return self._cands, w, p


class _EpochPlanner:
    """Per-epoch plan: verified reuse of recently optimal bases, else cold.

    The optimum tends to wander among a handful of neighbouring vertices as
    the empirical curves drift, so a tiny move-to-front cache of bases
    absorbs most re-solves; every plan served is certified optimal for the
    current epoch's program within the configured tolerance.  Cached bases
    are stored as (state, multiplier value) labels and re-resolved to column
    ids only when the candidate set changes.
    """

    _CACHE = 6

    def __init__(self, reward: RewardFn, cfg: FkorsConfig):
        self.reward = reward
        self.cfg = cfg
        self.cache: list[dict] = []  # {"labels", "ids", "version", decoded arrays}
        self.cold_solves = 0
        self.reuses = 0
        self.prob: Optional[OccupancyProblem] = None
        self.last: Optional[tuple] = None
        self._r_vec: Optional[np.ndarray] = None
        self._d_buf: Optional[np.ndarray] = None

    @staticmethod
    def _map_labels(labels: list, cands: np.ndarray, prob: OccupancyProblem) -> Optional[list[int]]:
        mus = [lab[2] for lab in labels if lab[0] == "s"]
        pos = np.searchsorted(cands, np.array(mus))
        if np.any(pos >= cands.shape[0]) or np.any(cands[np.minimum(pos, cands.shape[0] - 1)] != mus):
            return None
        it = iter(pos.tolist())
        ids = []
        for lab in labels:
            if lab[0] == "s":
                col = prob.col_of(lab[1], next(it))
                if col is None:
                    return None
                ids.append(col)
            else:
                ids.append(prob.slack_id)
        return ids

    @staticmethod
    def _decorate(entry: dict, prob: OccupancyProblem) -> None:
        """Cache the decoded structure of an entry's basis ids."""
        ids = np.asarray(entry["ids"], dtype=int)
        struct = ids != prob.slack_id
        states, actions = prob.decode(ids[struct])
        entry["ids_arr"] = ids
        entry["struct"] = struct
        entry["states"] = states
        entry["actions"] = actions
        entry["cb"] = np.zeros(ids.shape[0])
        entry["cb"][struct] = prob.r[states - 1] * prob.w[actions]

    def plan(
        self, curves: tuple[np.ndarray, np.ndarray, np.ndarray], version: int
    ) -> tuple[OccupancyProblem, np.ndarray, np.ndarray, np.ndarray, float, float]:
        """Plan for the coming epoch; returns (problem, states, actions,
        masses, objective, payment) with one entry per active basis column."""
        cands, w, p = curves
        if self._r_vec is None:
            self._r_vec = np.array(
                [eval_r_capped(self.reward, l, self.cfg.m) for l in range(1, self.cfg.m + 1)]
            )
        prob = occupancy_problem(
            (cands, w, p), self.reward, self.cfg.m, self.cfg.rho, self.cfg.bid1_at_m,
            r_vec=self._r_vec,
        )
        if self._d_buf is None or self._d_buf.shape[0] != prob.n_cols + 1:
            self._d_buf = np.empty(prob.n_cols + 1)
        x_b = None
        hit = -1
        entry = None
        if self.cfg.reuse_tolerance > 0.0:
            for idx, cand_entry in enumerate(self.cache):
                if cand_entry["version"] != version:
                    cand_entry["ids"] = self._map_labels(cand_entry["labels"], cands, prob)
                    cand_entry["version"] = version
                    if cand_entry["ids"] is not None:
                        self._decorate(cand_entry, prob)
                if cand_entry["ids"] is None:
                    continue
                # objective coefficients track the fresh W values
                cand_entry["cb"][cand_entry["struct"]] = (
                    prob.r[cand_entry["states"] - 1] * prob.w[cand_entry["actions"]]
                )
                x_b = verify_basis_values(
                    prob,
                    cand_entry["ids_arr"],
                    cand_entry["cb"],
                    primal_tol=1e-7,
                    dual_tol=self.cfg.reuse_tolerance,
                    d_buf=self._d_buf,
                )
                if x_b is not None:
                    hit = idx
                    entry = cand_entry
                    break
        if x_b is None:
            sol = solve_occupancy_problem(prob)
            self.cold_solves += 1
            ids = np.asarray(sol.basis)
            struct = ids != prob.slack_id
            states, actions = prob.decode(ids[struct])
            struct_labels = iter(
                ("s", int(s), float(cands[i]))
                for s, i in zip(states.tolist(), actions.tolist())
            )
            labels = [
                ("slack",) if col == prob.slack_id else next(struct_labels)
                for col in sol.basis
            ]
            entry = {"labels": labels, "ids": list(sol.basis), "version": version}
            self._decorate(entry, prob)
            self.cache.insert(0, entry)
            del self.cache[self._CACHE:]
            x_b = basis_values(prob, entry["ids_arr"])
        else:
            self.reuses += 1
            self.cache.insert(0, self.cache.pop(hit))
        struct = entry["struct"]
        masses = x_b[struct]
        states = entry["states"]
        actions = entry["actions"]
        objective = float(np.dot(prob.r[states - 1] * prob.w[actions], masses))
        payment = float(np.dot(prob.p[actions], masses))
        self.prob = prob
        self.last = (states, actions, masses, objective, payment)
        return prob, states, actions, masses, objective, payment


def _sampler_from_arrays(
    prob: OccupancyProblem,
    states: np.ndarray,
    actions: np.ndarray,
    masses: np.ndarray,
) -> list[tuple[list[float], list[float]]]:
    """Per-state (mus, cumulative weights) for fast action draws.

    Mirrors policy_from_occupancy: states without occupancy mass inherit the
    nearest reachable state's mixture, and state m is pinned to bid 1 when
    the plan forces it."""
    by_state: dict[int, list[tuple[float, float]]] = {}
    mus_all = prob.mus
    for s, a, v in zip(states.tolist(), actions.tolist(), masses.tolist()):
        if v > 1e-12:
            by_state.setdefault(s, []).append((float(mus_all[a]), v))
    built: list[Optional[tuple[list[float], list[float]]]] = []
    for s in range(1, prob.m + 1):
        entries = by_state.get(s)
        if not entries:
            built.append(None)
            continue
        entries.sort()
        total = sum(v for _, v in entries)
        mus = [mu for mu, _ in entries]
        cums = []
        acc = 0.0
        for _, v in entries:
            acc += v / total
            cums.append(acc)
        cums[-1] = 1.0
        built.append((mus, cums))
    if all(e is None for e in built):
        built = [([SKIP], [1.0])] * prob.m
    else:
        first = next(i for i, e in enumerate(built) if e is not None)
        for i in range(first):
            built[i] = built[first]
        for i in range(first + 1, prob.m):
            if built[i] is None:
                built[i] = built[i - 1]
    if prob.bid1_at_m:
        built[-1] = ([0.0], [1.0])
    return built


def run_fkors(
    market: MarketDistribution,
    reward: RewardFn,
    cfg: FkorsConfig,
    rng: Optional[SplitMix64] = None,
    trace: bool = False,
    diagnostics: bool = False,
    opt_ref: Optional[float] = None,
) -> RunRecord:
    """Simulate one full run; see the module docstring for the protocol."""
    if rng is None:
        rng = SplitMix64(cfg.seed)
    T, m, k, rho = cfg.T, cfg.m, cfg.k, cfg.rho
    budget = rho * T
    curves = _EmpiricalCurves(cfg.quantization_grid, cfg.quantize_threshold)
    planner = _EpochPlanner(reward, cfg)
    record = RunRecord(
        algorithm="fkors",
        seed=cfg.seed,
        T=T,
        rho=rho,
        config={
            "m": m,
            "k": k,
            "bid1_at_m": cfg.bid1_at_m,
            "c_bar_mode": cfg.c_bar_mode,
            "c_bar": cfg.c_bar,
            "quantization_grid": cfg.quantization_grid,
            "reuse_tolerance": cfg.reuse_tolerance,
        },
    )
    rounds: Optional[list[RoundEntry]] = [] if trace else None
    diags: Optional[list[EpochDiagnostic]] = [] if diagnostics else None
    if diagnostics and opt_ref is None:
        opt_ref = solve_benchmark(market, reward, m, rho, bid1_at_m=False).opt_value

    spend = 0.0
    utility_true = 0.0
    utility_acc = 0.0
    wins = 0
    conversions = 0
    last_conv = 0
    fake = 1
    epoch = 0
    epoch_start = 0          # rounds before this epoch
    sampler: list[tuple[list[float], list[float]]] = []
    eval_true = eval_r
    uniform = rng.uniform

    t = 0
    while t < T:
        if epoch >= 1 and t == epoch_start:
            prob, p_states, p_actions, p_masses, _, _ = planner.plan(
                curves.curves(), curves.version
            )
            sampler = _sampler_from_arrays(prob, p_states, p_actions, p_masses)
            fake = 1
            if diags is not None:
                q = {
                    (int(s), int(a)): float(v)
                    for s, a, v in zip(p_states, p_actions, p_masses)
                    if v > 1e-12
                }
                policy = policy_from_occupancy(prob, q)
                w_vec, p_vec = policy.action_curves(market)
                stats = cycle_stats_wp(w_vec, p_vec, reward, m)
                r_avg = 0.0 if stats.degenerate else stats.reward_avg
                c_avg = 0.0 if stats.degenerate else stats.pay_avg
                diags.append(
                    EpochDiagnostic(
                        epoch,
                        r_avg,
                        c_avg,
                        max(0.0, (opt_ref or 0.0) - r_avg),
                        max(0.0, c_avg - rho),
                    )
                )
        t += 1
        p, c = market.sample(rng)
        gap = t - last_conv
        bid: Optional[float] = None
        if epoch >= 1 and budget - spend >= 1.0:
            mus, cums = sampler[fake - 1]
            u = uniform()  # one mixture draw whenever the policy is consulted
            j = 0
            while cums[j] < u:
                j += 1
            bid = bid_for(mus[j], c)
        win = 0
        conv = 0
        pay = 0.0
        rew_true = 0.0
        rew_acc = 0.0
        if bid is not None and bid >= p - _WIN_EPS:
            win = 1
            pay = p
            spend += p
            wins += 1
            if uniform() < c:
                conv = 1
                conversions += 1
                rew_true = eval_true(reward, gap)
                rew_acc = eval_r_capped(reward, fake, m)
                utility_true += rew_true
                utility_acc += rew_acc
        curves.add(p, c)
        if rounds is not None:
            rounds.append(
                RoundEntry(t, epoch, fake, gap, c, bid, p, win, conv, pay, rew_true, rew_acc)
            )
        if epoch == 0:
            fake = min(m, fake + 1)
            if t >= min(k, T):
                record.epochs.append(EpochEntry(0, t, t, False))
                epoch = 1
                epoch_start = t
        elif conv:
            last_conv = t
            record.epochs.append(EpochEntry(epoch, t, t - epoch_start, True))
            epoch += 1
            epoch_start = t
            fake = 1
        else:
            fake = min(m, fake + 1)
            if t - epoch_start >= k:
                record.epochs.append(EpochEntry(epoch, t, k, False))
                epoch += 1
                epoch_start = t
    if spend > budget + 1e-9:
        raise AssertionError("budget guard failed to cap spending")
    record.utility_true = utility_true
    record.utility_accounted = utility_acc
    record.spend = spend
    record.wins = wins
    record.conversions = conversions
    record.rounds = rounds
    record.diagnostics = diags
    record.config["cold_solves"] = planner.cold_solves
    record.config["reused_plans"] = planner.reuses
    return record


def regret(record: RunRecord, opt_per_round: float) -> float:
    """T * opt_per_round minus the realized (true) utility."""
    return record.T * opt_per_round - record.utility_true
