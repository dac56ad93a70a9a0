"""Small dense linear-program solver.

Maximizes c.x subject to A_eq x = b_eq, A_ub x <= b_ub, x >= 0 with a
two-phase primal simplex using Bland's anti-cycling rule in both phases.
Rows are scaled to unit max-norm before solving and feasibility is declared
at a configurable tolerance on the scaled system.  Redundant equality rows
(a zero row after phase 1 whose artificial cannot be pivoted out) are
dropped, so over-determined but consistent systems solve cleanly.

Everything is deterministic: identical input yields the identical pivot
sequence, basis and solution.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

_MAX_PIVOTS = 200_000


@dataclass(frozen=True)
class LinearProgram:
    """max c.x  s.t.  a_eq x = b_eq, a_ub x <= b_ub, x >= 0."""

    c: np.ndarray
    a_eq: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    b_eq: np.ndarray = field(default_factory=lambda: np.zeros(0))
    a_ub: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    b_ub: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        n = c.shape[0]
        a_eq = np.asarray(self.a_eq, dtype=float).reshape(-1, n) if np.size(self.a_eq) else np.zeros((0, n))
        a_ub = np.asarray(self.a_ub, dtype=float).reshape(-1, n) if np.size(self.a_ub) else np.zeros((0, n))
        b_eq = np.atleast_1d(np.asarray(self.b_eq, dtype=float)) if np.size(self.b_eq) else np.zeros(0)
        b_ub = np.atleast_1d(np.asarray(self.b_ub, dtype=float)) if np.size(self.b_ub) else np.zeros(0)
        if a_eq.shape[0] != b_eq.shape[0]:
            raise ValueError("a_eq and b_eq row counts differ")
        if a_ub.shape[0] != b_ub.shape[0]:
            raise ValueError("a_ub and b_ub row counts differ")
        for arr, name in ((c, "c"), (a_eq, "a_eq"), (b_eq, "b_eq"), (a_ub, "a_ub"), (b_ub, "b_ub")):
            if arr.size and not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "a_eq", a_eq)
        object.__setattr__(self, "b_eq", b_eq)
        object.__setattr__(self, "a_ub", a_ub)
        object.__setattr__(self, "b_ub", b_ub)

    @property
    def n(self) -> int:
        return self.c.shape[0]


@dataclass(frozen=True)
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: Optional[np.ndarray]
    objective: Optional[float]
    # Final basis over standard-form columns (j < n structural, n + i the
    # slack of inequality row i); populated only when optimal.
    basis: Optional[tuple[int, ...]] = None


def _bland_entering(red: np.ndarray, tol: float) -> int:
    """Lowest-index column with reduced cost above tol; -1 if none."""
    idx = np.nonzero(red > tol)[0]
    return int(idx[0]) if idx.size else -1


def _bland_leaving(col: np.ndarray, rhs: np.ndarray, basis: list[int], tol: float) -> int:
    """Min-ratio row, ties broken by smallest basic variable index."""
    rows = np.nonzero(col > tol)[0]
    if rows.size == 0:
        return -1
    ratios = rhs[rows] / col[rows]
    best = np.min(ratios)
    tie = rows[ratios <= best + 1e-15]
    return int(min(tie, key=lambda r: basis[r]))


def _pivot(T: np.ndarray, r: int, j: int) -> None:
    T[r] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    if np.count_nonzero(col):
        T -= np.outer(col, T[r])
        T[:, j] = 0.0
        T[r, j] = 1.0


def _run_simplex(T: np.ndarray, basis: list[int], ncols: int, tol: float) -> str:
    """Pivot until no reduced cost exceeds tol. T's last row is the objective
    (maximization, reduced costs as-is), last column the rhs."""
    for _ in range(_MAX_PIVOTS):
        j = _bland_entering(T[-1, :ncols], tol)
        if j < 0:
            return "optimal"
        r = _bland_leaving(T[:-1, j], T[:-1, -1], basis, tol)
        if r < 0:
            return "unbounded"
        _pivot(T, r, j)
        basis[r] = j
    raise RuntimeError("simplex pivot limit exceeded")


def solve_lp(lp: LinearProgram, tol: float = 1e-9) -> LpSolution:
    """Two-phase primal simplex with Bland's rule; see module docstring."""
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    n = lp.n
    me, mi = lp.a_eq.shape[0], lp.a_ub.shape[0]
    m = me + mi

    A = np.vstack([lp.a_eq, lp.a_ub]) if m else np.zeros((0, n))
    b = np.concatenate([lp.b_eq, lp.b_ub]) if m else np.zeros(0)

    # Scale rows to unit max-norm, then flip signs so b >= 0.
    keep_rows: list[int] = []
    for i in range(m):
        norm = np.max(np.abs(A[i])) if n else 0.0
        if norm <= tol:
            if abs(b[i]) > tol:
                return LpSolution("infeasible", None, None)
            if i >= me:
                keep_rows.append(i)  # 0 <= b row: keep slack structure
            continue
        A[i] /= norm
        b[i] /= norm
        keep_rows.append(i)
    A = A[keep_rows]
    b = b[keep_rows]
    row_is_eq = np.array([i < me for i in keep_rows])
    ub_index = {i: k for k, i in enumerate(r for r in keep_rows if r >= me)}
    m = A.shape[0]
    n_ub = int(np.sum(~row_is_eq))

    sign = np.where(b < 0.0, -1.0, 1.0)
    A *= sign[:, None]
    b *= sign

    # Standard-form columns: structural | slacks | artificials.
    # A flipped <= row has slack coefficient -1, so it needs an artificial.
    slack = np.zeros((m, n_ub))
    k = 0
    slack_sign = np.zeros(m)
    for i in range(m):
        if not row_is_eq[i]:
            slack[i, k] = sign[i]
            slack_sign[i] = sign[i]
            k += 1
    need_art = [i for i in range(m) if row_is_eq[i] or slack_sign[i] < 0.0]
    art = np.zeros((m, len(need_art)))
    for k, i in enumerate(need_art):
        art[i, k] = 1.0

    ncols = n + n_ub + len(need_art)
    T = np.zeros((m + 1, ncols + 1))
    T[:m, :n] = A
    T[:m, n:n + n_ub] = slack
    T[:m, n + n_ub:ncols] = art
    T[:m, -1] = b

    basis: list[int] = []
    art_rows = set(need_art)
    k = 0
    for i in range(m):
        if i in art_rows:
            basis.append(n + n_ub + need_art.index(i))
        else:
            j = n + ub_index[keep_rows[i]]
            basis.append(j)
    art_cols = set(range(n + n_ub, ncols))

    # Phase 1: maximize -(sum of artificials).
    if need_art:
        phase1 = np.zeros(ncols + 1)
        phase1[n + n_ub:ncols] = -1.0
        T[-1] = phase1
        for i, bj in enumerate(basis):
            if bj in art_cols:
                T[-1] += T[i]
        # Artificials start basic and may only leave: entering candidates are
        # restricted to structural and slack columns.
        status = _run_simplex(T, basis, n + n_ub, tol)
        if status != "optimal":  # pragma: no cover - phase 1 cannot be unbounded
            raise RuntimeError("phase 1 failed")
        if T[-1, -1] > tol * 10.0 * max(1.0, len(need_art)):
            return LpSolution("infeasible", None, None)
        # Pivot remaining artificials out; rows that offer no pivot are
        # redundant and get dropped.
        drop: list[int] = []
        for i in range(m):
            if basis[i] in art_cols:
                nz = np.nonzero(np.abs(T[i, :n + n_ub]) > 1e-7)[0]
                if nz.size:
                    _pivot(T, i, int(nz[0]))
                    basis[i] = int(nz[0])
                else:
                    drop.append(i)
        if drop:
            keep = [i for i in range(m) if i not in set(drop)]
            T = np.vstack([T[keep], T[-1][None, :]])
            basis = [basis[i] for i in keep]
            m = len(keep)

    # Phase 2 objective: reduced costs of the original c.
    ncols_p2 = n + n_ub
    T2 = np.hstack([T[:, :ncols_p2], T[:, -1:]])
    obj = np.zeros(ncols_p2 + 1)
    obj[:n] = lp.c
    T2[-1] = obj
    for i, bj in enumerate(basis):
        if abs(T2[-1, bj]) > 0.0:
            T2[-1] -= T2[-1, bj] * T2[i]
    status = _run_simplex(T2, basis, ncols_p2, tol)
    if status == "unbounded":
        return LpSolution("unbounded", None, None)

    x_full = np.zeros(ncols_p2)
    for i, bj in enumerate(basis):
        x_full[bj] = T2[i, -1]
    x = np.maximum(x_full[:n], 0.0)
    # Map slack column back to the original inequality-row index.
    inv_ub = {v: k for k, v in ub_index.items()}
    final_basis = []
    for bj in basis:
        if bj < n:
            final_basis.append(bj)
        else:
            final_basis.append(n + inv_ub[bj - n] - me)
    return LpSolution("optimal", x, float(np.dot(lp.c, x)), tuple(sorted(final_basis)))
