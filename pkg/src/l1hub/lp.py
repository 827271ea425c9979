"""Bounded revised simplex and a small branch-and-bound driver.

Every row ``a.x (<=|>=|=) rhs`` gets a slack ``s`` with ``a.x + s = rhs``:
``<=`` rows give ``s >= 0``, ``>=`` rows ``s <= 0`` and ``=`` rows ``s = 0``.
The basis is factorized with SuperLU and updated in product form between
refactorizations.

Cold solves use the primal method with a composite phase 1 (minimize the sum
of bound violations). When rows are added or bounds are tightened after an
optimal solve, the old basis stays dual feasible and the dual method restores
primal feasibility in few pivots.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

LE, GE, EQ = "<=", ">=", "="

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
PIVOT_TOL = 1e-9
CHECK_TOL = 1e-7
REFACTOR_EVERY = 100
BLAND_AFTER = 1000
PERTURB = 1e-5


@dataclass(frozen=True, eq=False)
class Row:
    indices: np.ndarray
    values: np.ndarray
    sense: str
    rhs: float

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).ravel()
        val = np.asarray(self.values, dtype=float).ravel()
        if idx.shape != val.shape:
            raise ValueError("row indices and values differ in length")
        if self.sense not in (LE, GE, EQ):
            raise ValueError(f"unknown row sense {self.sense!r}")
        if not np.all(np.isfinite(val)) or not np.isfinite(self.rhs):
            raise ValueError("row coefficients and rhs must be finite")
        if len(np.unique(idx)) != len(idx):
            raise ValueError("duplicate variable in row")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)
        object.__setattr__(self, "rhs", float(self.rhs))

    @classmethod
    def from_map(cls, coeffs: Mapping[int, float], sense: str, rhs: float) -> "Row":
        keys = sorted(coeffs)
        return cls(np.array(keys, dtype=np.int64), np.array([coeffs[k] for k in keys], dtype=float), sense, rhs)

    def activity(self, x: np.ndarray) -> float:
        return float(self.values @ x[self.indices])


@dataclass(eq=False)
class LinearProgram:
    """Minimize ``objective . x`` subject to ``rows`` and ``lower <= x <= upper``."""

    objective: np.ndarray
    rows: list[Row] = field(default_factory=list)
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).ravel()
        n = self.objective.size
        self.lower = np.zeros(n) if self.lower is None else np.asarray(self.lower, dtype=float).ravel().copy()
        self.upper = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float).ravel().copy()
        self.rows = list(self.rows)
        self.validate()

    @property
    def num_vars(self) -> int:
        return self.objective.size

    def validate(self) -> None:
        n = self.num_vars
        if not np.all(np.isfinite(self.objective)):
            raise ValueError("objective coefficients must be finite")
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise ValueError("bounds must match the number of variables")
        if np.any(np.isnan(self.lower)) or np.any(np.isnan(self.upper)) or np.any(self.lower > self.upper):
            raise ValueError("bounds must satisfy lower <= upper")
        if np.any(self.lower == np.inf) or np.any(self.upper == -np.inf):
            raise ValueError("bounds exclude every value")
        for r in self.rows:
            if r.indices.size and (r.indices.min() < 0 or r.indices.max() >= n):
                raise ValueError("row refers to a variable out of range")

    def max_violation(self, x: np.ndarray) -> float:
        """Largest bound or row violation at ``x``, by direct substitution."""
        viol = max(0.0, float(np.max(self.lower - x, initial=0.0)), float(np.max(x - self.upper, initial=0.0)))
        for r in self.rows:
            a = r.activity(x)
            if r.sense == LE:
                viol = max(viol, a - r.rhs)
            elif r.sense == GE:
                viol = max(viol, r.rhs - a)
            else:
                viol = max(viol, abs(a - r.rhs))
        return viol


@dataclass(frozen=True, eq=False)
class LpSolution:
    status: str
    values: np.ndarray
    objective: float
    iterations: int = 0
    nodes: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


_SLACK_BOUNDS = {LE: (0.0, np.inf), GE: (-np.inf, 0.0), EQ: (0.0, 0.0)}


class SimplexSolver:
    """Re-solvable LP: rows may be appended and bounds changed between solves."""

    def __init__(self, lp: LinearProgram, max_iter: int | None = None):
        lp.validate()
        self.n = lp.num_vars
        self.cost = lp.objective.copy()
        self.lo = lp.lower.copy()
        self.up = lp.upper.copy()
        self.rows: list[Row] = []
        self.m = 0
        self.rhs = np.zeros(0)
        self._A = sparse.csr_matrix((0, self.n))
        self.basis = np.zeros(0, dtype=np.int64)
        self.is_basic = np.zeros(self.n, dtype=bool)
        self.x = np.array([self._resting_value(j) for j in range(self.n)], dtype=float)
        self.max_iter = max_iter
        self.iterations = 0
        self._lu = None
        self._etas: list[tuple[int, np.ndarray]] = []
        self._stale = True
        self._solved = False
        self._work_cost = self.cost
        self._rng = np.random.default_rng(20240917)
        self.add_rows(lp.rows)

    # -- model edits ---------------------------------------------------------

    def _resting_value(self, j: int) -> float:
        lo, up = self.lo[j], self.up[j]
        if np.isfinite(lo):
            return lo
        if np.isfinite(up):
            return up
        return 0.0

    def add_rows(self, rows: Iterable[Row]) -> None:
        rows = list(rows)
        if not rows:
            return
        for r in rows:
            if r.indices.size and (r.indices.min() < 0 or r.indices.max() >= self.n):
                raise ValueError("row refers to a variable out of range")
        data = np.concatenate([r.values for r in rows])
        cols = np.concatenate([r.indices for r in rows])
        ptr = np.concatenate([[0], np.cumsum([r.indices.size for r in rows])])
        block = sparse.csr_matrix((data, cols, ptr), shape=(len(rows), self.n))
        self._A = sparse.vstack([self._A, block], format="csr")
        m0 = self.m
        self.rows.extend(rows)
        self.m += len(rows)
        self.rhs = np.concatenate([self.rhs, [r.rhs for r in rows]])
        s_lo = np.array([_SLACK_BOUNDS[r.sense][0] for r in rows])
        s_up = np.array([_SLACK_BOUNDS[r.sense][1] for r in rows])
        self.lo = np.concatenate([self.lo, s_lo])
        self.up = np.concatenate([self.up, s_up])
        self.cost = np.concatenate([self.cost, np.zeros(len(rows))])
        new_slack = self.n + m0 + np.arange(len(rows))
        xs = block @ self.x[: self.n]
        self.x = np.concatenate([self.x, np.asarray(self.rhs[m0:] - xs)])
        self.basis = np.concatenate([self.basis, new_slack])
        self.is_basic = np.concatenate([self.is_basic, np.ones(len(rows), dtype=bool)])
        self._stale = True

    def set_bounds(self, j: int, lower: float, upper: float) -> None:
        if not 0 <= j < self.n:
            raise ValueError("variable index out of range")
        if not lower <= upper:
            raise ValueError("bounds must satisfy lower <= upper")
        if self.lo[j] == lower and self.up[j] == upper:
            return
        self.lo[j], self.up[j] = float(lower), float(upper)
        if not self.is_basic[j]:
            old = self.x[j]
            self.x[j] = min(max(old, self.lo[j]), self.up[j]) if np.isfinite(old) else self._resting_value(j)
            if self.x[j] != old and self._lu is not None and not self._stale:
                self._recompute_basics()

    def bounds(self, j: int) -> tuple[float, float]:
        return float(self.lo[j]), float(self.up[j])

    # -- linear algebra ------------------------------------------------------

    def _full_matrix(self):
        return sparse.hstack([self._A.tocsc(), sparse.identity(self.m, format="csc")], format="csc")

    def _refactor(self) -> None:
        if self._stale:
            self._Afull = self._full_matrix()
            self._AT = self._A.T.tocsr()
            self._stale = False
        B = self._Afull[:, self.basis]
        try:
            self._lu = splu(B.tocsc(), permc_spec="COLAMD")
        except RuntimeError:
            self._slack_basis()
            B = self._Afull[:, self.basis]
            self._lu = splu(B.tocsc(), permc_spec="COLAMD")
        self._etas = []
        self._d = None
        self._recompute_basics()

    def _slack_basis(self) -> None:
        self.basis = self.n + np.arange(self.m)
        self.is_basic[:] = False
        self.is_basic[self.basis] = True
        for j in range(self.n):
            lo, up = self.lo[j], self.up[j]
            v = self.x[j]
            if np.isfinite(lo) and (not np.isfinite(up) or abs(v - lo) <= abs(v - up)):
                self.x[j] = lo
            elif np.isfinite(up):
                self.x[j] = up
            else:
                self.x[j] = 0.0

    def _recompute_basics(self) -> None:
        xn = self.x.copy()
        xn[self.basis] = 0.0
        r = self.rhs - self._Afull @ xn
        self.x[self.basis] = self._ftran(r)

    def _ftran(self, v: np.ndarray) -> np.ndarray:
        z = self._lu.solve(v)
        for r, col in self._etas:
            zr = z[r] / col[r]
            z -= col * zr
            z[r] = zr
        return z

    def _btran(self, v: np.ndarray) -> np.ndarray:
        z = v.copy()
        for r, col in reversed(self._etas):
            z[r] = (z[r] - (col @ z - col[r] * z[r])) / col[r]
        return self._lu.solve(z, trans="T")

    def _column(self, j: int) -> np.ndarray:
        a = np.zeros(self.m)
        if j < self.n:
            A = self._Afull
            s, e = A.indptr[j], A.indptr[j + 1]
            a[A.indices[s:e]] = A.data[s:e]
        else:
            a[j - self.n] = 1.0
        return a

    def _row_times(self, y: np.ndarray) -> np.ndarray:
        """``y^T [A | I]`` as a vector over all variables."""
        return np.concatenate([self._AT @ y, y])

    def _pivot(self, r: int, q: int, col: np.ndarray, leave_value: float) -> None:
        leaving = self.basis[r]
        self.basis[r] = q
        self.is_basic[leaving] = False
        self.is_basic[q] = True
        self.x[leaving] = leave_value
        self._etas.append((r, col))
        if len(self._etas) >= REFACTOR_EVERY:
            self._refactor()

    # -- status helpers ------------------------------------------------------

    def _infeasibility(self) -> np.ndarray:
        xb = self.x[self.basis]
        return np.maximum(self.lo[self.basis] - xb, 0.0) + np.maximum(xb - self.up[self.basis], 0.0)

    def _eligible_primal(self, d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Entering candidates and their direction (+1 increase, -1 decrease)."""
        x, lo, up = self.x, self.lo, self.up
        nb = ~self.is_basic
        free_move = up > lo
        at_lo = nb & free_move & (x <= lo) & np.isfinite(lo)
        at_up = nb & free_move & (x >= up) & np.isfinite(up)
        free = nb & ~np.isfinite(lo) & ~np.isfinite(up)
        inc = (at_lo & (d < -OPT_TOL)) | (free & (d < -OPT_TOL))
        dec = (at_up & (d > OPT_TOL)) | (free & (d > OPT_TOL))
        return inc | dec, np.where(inc, 1.0, -1.0)

    def _dual_feasible(self, d: np.ndarray, fix: bool) -> bool:
        """Check nonbasic reduced-cost signs, flipping boxed variables when ``fix``."""
        x, lo, up = self.x, self.lo, self.up
        nb = ~self.is_basic & (up > lo)
        bad_lo = nb & (x <= lo) & (d < -OPT_TOL)
        bad_up = nb & (x >= up) & (d > OPT_TOL)
        free = nb & ~np.isfinite(lo) & ~np.isfinite(up) & (np.abs(d) > OPT_TOL)
        if fix:
            flip_up = bad_lo & np.isfinite(up)
            flip_lo = bad_up & np.isfinite(lo)
            if flip_up.any() or flip_lo.any():
                self.x[flip_up] = up[flip_up]
                self.x[flip_lo] = lo[flip_lo]
                self._recompute_basics()
            bad_lo &= ~flip_up
            bad_up &= ~flip_lo
        return not (bad_lo.any() or bad_up.any() or free.any())

    # -- main loop -----------------------------------------------------------

    def solve(self) -> LpSolution:
        if self.m == 0:
            return self._solve_unconstrained()
        self._refactor()
        limit = self.max_iter or max(100000, 50 * (self.n + self.m))
        start = self.iterations
        mode = "primal"
        if self._solved:
            y = self._btran(self.cost[self.basis])
            d = self.cost - self._row_times(y)
            if self._dual_feasible(d, fix=True):
                mode = "dual"
                self._perturb_costs()
        degenerate = 0
        for attempt in range(4):
            while True:
                if self.iterations - start > limit:
                    raise RuntimeError(f"simplex iteration limit ({limit}) reached")
                bland = degenerate >= BLAND_AFTER
                if mode == "dual":
                    step = self._dual_iteration(bland)
                    if step == "feasible":
                        mode = "primal"
                        self._work_cost = self.cost
                        continue
                else:
                    step = self._primal_iteration(bland)
                if step in ("optimal", "infeasible", "unbounded"):
                    break
                self.iterations += 1
                degenerate = degenerate + 1 if step == "degenerate" else 0
            self._solved = step == "optimal"
            if step != "optimal":
                return LpSolution(step, self.x[: self.n].copy(), np.nan, self.iterations - start)
            if self._post_check():
                values = self.x[: self.n].copy()
                return LpSolution("optimal", values, float(self.cost[: self.n] @ values), self.iterations - start)
            # Numerical drift: refactor and continue from the current basis.
            self._refactor()
            mode, degenerate = "primal", 0
        raise RuntimeError("simplex could not reach a solution satisfying the feasibility check")

    def _perturb_costs(self) -> None:
        # Small random cost shifts break the ties that make dual pivots
        # degenerate. Shifts push each nonbasic reduced cost further from
        # zero in its feasible direction, so dual feasibility is kept.
        scale = max(float(np.max(np.abs(self.cost), initial=0.0)), 1e-12) * PERTURB
        eps = scale * (1.0 + self._rng.random(self.cost.size))
        at_up = ~self.is_basic & (self.x >= self.up) & (self.up > self.lo)
        eps[at_up] *= -1.0
        eps[self.up <= self.lo] = 0.0
        self._work_cost = self.cost + eps

    def _post_check(self) -> bool:
        x = self.x[: self.n]
        if np.any(x < self.lo[: self.n] - CHECK_TOL) or np.any(x > self.up[: self.n] + CHECK_TOL):
            return False
        act = self._A @ x
        s_lo, s_up = self.lo[self.n:], self.up[self.n:]
        slack = self.rhs - act
        return not (np.any(slack < s_lo - CHECK_TOL) or np.any(slack > s_up + CHECK_TOL))

    def _solve_unconstrained(self) -> LpSolution:
        x = np.empty(self.n)
        for j in range(self.n):
            c, lo, up = self.cost[j], self.lo[j], self.up[j]
            if c > 0:
                x[j] = lo
            elif c < 0:
                x[j] = up
            else:
                x[j] = self._resting_value(j)
            if not np.isfinite(x[j]):
                return LpSolution("unbounded", np.nan_to_num(x), -np.inf)
        self.x = x
        self._solved = True
        return LpSolution("optimal", x.copy(), float(self.cost @ x))

    def _primal_iteration(self, bland: bool) -> str:
        infeas = self._infeasibility()
        phase1 = bool(np.any(infeas > FEAS_TOL))
        xb = self.x[self.basis]
        lob, upb = self.lo[self.basis], self.up[self.basis]
        if phase1:
            cb = np.where(xb < lob - FEAS_TOL, -1.0, np.where(xb > upb + FEAS_TOL, 1.0, 0.0))
            y = self._btran(cb)
            d = -self._row_times(y)
        else:
            y = self._btran(self.cost[self.basis])
            d = self.cost - self._row_times(y)
        d[self.basis] = 0.0
        elig, direction = self._eligible_primal(d)
        if not elig.any():
            return "infeasible" if phase1 else "optimal"
        cand = np.flatnonzero(elig)
        q = int(cand[0]) if bland else int(cand[np.argmax(np.abs(d[cand]))])
        dirq = direction[q]
        col = self._ftran(self._column(q))
        g = -dirq * col  # rate of change of each basic per unit step

        # Blocking bounds: feasible basics stop at the bound they head for;
        # infeasible basics stop where they become feasible.
        big = np.abs(g) > PIVOT_TOL
        dec = big & (g < 0)
        inc = big & (g > 0)
        target = np.full(self.m, np.nan)
        above = xb > upb + FEAS_TOL
        below = xb < lob - FEAS_TOL
        td = dec & above
        target[td] = upb[td]
        td = dec & ~above & ~below & np.isfinite(lob)
        target[td] = lob[td]
        ti = inc & below
        target[ti] = lob[ti]
        ti = inc & ~above & ~below & np.isfinite(upb)
        target[ti] = upb[ti]
        block = ~np.isnan(target)
        flip = self.up[q] - self.lo[q] if np.isfinite(self.up[q] - self.lo[q]) else np.inf

        if not block.any():
            if np.isfinite(flip):
                return self._flip(q, dirq, flip, col)
            if phase1:
                self._refactor()
                return "degenerate"
            return "unbounded"
        idx = np.flatnonzero(block)
        gi = np.abs(g[idx])
        exact = np.maximum((xb[idx] - target[idx]) * np.sign(-g[idx]), 0.0) / gi
        if bland:
            tmin = exact.min()
            ties = idx[exact <= tmin + 1e-12]
            r = int(ties[np.argmin(self.basis[ties])])
            theta = float(exact[np.searchsorted(idx, r)])
        else:
            relaxed = (np.maximum((xb[idx] - target[idx]) * np.sign(-g[idx]), 0.0) + FEAS_TOL) / gi
            tmax = relaxed.min()
            ok = exact <= tmax
            pick = np.flatnonzero(ok)[np.argmax(gi[ok])]
            r, theta = int(idx[pick]), float(exact[pick])
        if flip <= theta:
            return self._flip(q, dirq, flip, col)
        self.x[self.basis] = xb + g * theta
        self.x[q] += dirq * theta
        self._pivot(r, q, col, float(target[r]))
        return "degenerate" if theta <= 1e-12 else "step"

    def _flip(self, q: int, dirq: float, step: float, col: np.ndarray) -> str:
        self.x[self.basis] -= dirq * col * step
        self.x[q] = self.up[q] if dirq > 0 else self.lo[q]
        return "step"

    def _dual_iteration(self, bland: bool) -> str:
        xb = self.x[self.basis]
        lob, upb = self.lo[self.basis], self.up[self.basis]
        viol = np.maximum(lob - xb, 0.0) + np.maximum(xb - upb, 0.0)
        bad = viol > FEAS_TOL
        if not bad.any():
            return "feasible"
        if bland:
            rows = np.flatnonzero(bad)
            r = int(rows[np.argmin(self.basis[rows])])
        else:
            r = int(np.argmax(viol))
        increase = xb[r] < lob[r]
        bound = lob[r] if increase else upb[r]
        e = np.zeros(self.m)
        e[r] = 1.0
        rho = self._btran(e)
        alpha = self._row_times(rho)
        if self._d is None:
            y = self._btran(self._work_cost[self.basis])
            self._d = self._work_cost - self._row_times(y)
            self._d[self.basis] = 0.0
        d = self._d

        x, lo, up = self.x, self.lo, self.up
        nb = ~self.is_basic & (up > lo)
        s = 1.0 if increase else -1.0
        # x_r changes by -alpha_j * t_j; it must move in direction s.
        can_inc = nb & ((x <= lo) | ~np.isfinite(lo) & ~np.isfinite(up))
        can_dec = nb & ((x >= up) | ~np.isfinite(lo) & ~np.isfinite(up))
        elig = (can_inc & (s * alpha < -PIVOT_TOL)) | (can_dec & (s * alpha > PIVOT_TOL))
        if not elig.any():
            return "infeasible"
        cand = np.flatnonzero(elig)
        ratio = np.abs(d[cand]) / np.abs(alpha[cand])
        if bland:
            tmin = ratio.min()
            q = int(cand[ratio <= tmin + 1e-12][0])
        else:
            relaxed = (np.abs(d[cand]) + OPT_TOL) / np.abs(alpha[cand])
            ok = ratio <= relaxed.min()
            q = int(cand[ok][np.argmax(np.abs(alpha[cand[ok]]))])
        col = self._ftran(self._column(q))
        if abs(col[r]) <= PIVOT_TOL:
            self._refactor()
            return "degenerate"
        t = (xb[r] - bound) / col[r]
        self.x[self.basis] = xb - col * t
        self.x[q] += t
        theta_d = d[q] / alpha[q]
        # Reduced costs move along the pivot row; basics other than the
        # leaving one have a zero entry there.
        d -= theta_d * alpha
        d[q] = 0.0
        self._pivot(r, q, col, float(bound))
        return "degenerate" if abs(theta_d) <= 1e-12 else "step"


def solve_lp(lp: LinearProgram, max_iter: int | None = None) -> LpSolution:
    return SimplexSolver(lp, max_iter=max_iter).solve()


# ---------------------------------------------------------------------------
# Branch and bound
# ---------------------------------------------------------------------------

INT_TOL = 1e-6
PRUNE_TOL = 1e-9

NodeCallback = Callable[[np.ndarray, bool], Sequence[Row]]


@dataclass(order=True)
class _Node:
    bound: float
    seq: int
    fixings: dict = field(compare=False)


def branch_and_bound(
    root: LinearProgram,
    integer_vars: Sequence[int],
    node_callback: NodeCallback | None = None,
    incumbent: tuple[float, np.ndarray] | None = None,
    max_nodes: int = 100000,
) -> LpSolution:
    """Minimize ``root`` with ``integer_vars`` integral.

    ``node_callback(values, is_integral)`` may return rows (valid for the
    whole problem) to append at any node; the node LP is re-solved until it
    returns none. Branching picks the most fractional variable (lowest index
    on ties); the up child is explored first in a depth-first dive, and the
    best open bound is taken after each dive ends.
    """
    ints = np.asarray(sorted(set(int(i) for i in integer_vars)), dtype=np.int64)
    if ints.size and (ints.min() < 0 or ints.max() >= root.num_vars):
        raise ValueError("integer variable index out of range")
    solver = SimplexSolver(root)
    base = {int(j): (float(root.lower[j]), float(root.upper[j])) for j in ints}
    best_obj, best_x = (np.inf, None) if incumbent is None else (float(incumbent[0]), np.asarray(incumbent[1], float))
    iterations, nodes, seq = 0, 0, 0
    open_nodes: list[_Node] = []
    current: _Node | None = _Node(-np.inf, 0, {})

    while current is not None or open_nodes:
        if current is None:
            current = heapq.heappop(open_nodes)
        node, current = current, None
        if node.bound >= best_obj - PRUNE_TOL:
            continue
        nodes += 1
        if nodes > max_nodes:
            raise RuntimeError(f"branch and bound exceeded {max_nodes} nodes")
        for j, (lo, up) in base.items():
            lo, up = node.fixings.get(j, (lo, up))
            solver.set_bounds(j, lo, up)
        while True:
            sol = solver.solve()
            iterations += sol.iterations
            if not sol.optimal:
                break
            x = sol.values
            if sol.objective >= best_obj - PRUNE_TOL:
                break
            frac = np.abs(x[ints] - np.round(x[ints])) if ints.size else np.zeros(0)
            integral = not np.any(frac > INT_TOL)
            rows = list(node_callback(x, integral)) if node_callback else []
            if not rows:
                break
            solver.add_rows(rows)
        if sol.status == "unbounded":
            return LpSolution("unbounded", sol.values, -np.inf, iterations, nodes)
        if not sol.optimal or sol.objective >= best_obj - PRUNE_TOL:
            continue
        if integral:
            best_obj, best_x = sol.objective, x.copy()
            best_x[ints] = np.round(best_x[ints])
            continue
        k = int(ints[np.argmax(frac)])
        lo, up = node.fixings.get(k, base[k])
        down = dict(node.fixings)
        down[k] = (lo, float(np.floor(x[k])))
        upf = dict(node.fixings)
        upf[k] = (float(np.ceil(x[k])), up)
        seq += 1
        heapq.heappush(open_nodes, _Node(sol.objective, seq, down))
        seq += 1
        current = _Node(sol.objective, seq, upf)

    if best_x is None:
        return LpSolution("infeasible", np.zeros(root.num_vars), np.nan, iterations, nodes)
    return LpSolution("optimal", best_x, float(root.objective @ best_x), iterations, nodes)
