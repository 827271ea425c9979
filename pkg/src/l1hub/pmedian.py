"""Discrete p-median on candidate grids, solved by branch-and-Benders-cut.

The master problem is

    min  sum_j w_j eta_j
    s.t. sum_k v_k = n,  0 <= v_k <= 1,  eta_j >= D1_j,
         closed-form optimality cuts for each pair j,

where ``D1_j`` is the smallest distance of pair ``j``. A cut for pair ``j``
and rank ``r`` reads

    eta_j >= D_{r+1} - sum_{k: f_jk <= D_r} (D_{r+1} - f_jk) v_k

with ``D_1 < D_2 < ...`` the distinct distances of the pair. Pairs whose
distance rows coincide are merged (weights added) before the master is built.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .evaluator import MultiProviderScenario, chunk_rng, draw_samples
from .lp import EQ, GE, LinearProgram, Row, branch_and_bound, SimplexSolver, INT_TOL
from .solution import HubSolution
from .spatial import DemandPairSet, GridSpec, WeightGrid, build_demand_pairs, make_grid

CUT_TOL = 1e-6
INTEGRAL_CUT_TOL = 1e-9
PREFIX_TOL = 1e-9
BRUTE_FORCE_LIMIT = 10**6


@dataclass(frozen=True, eq=False)
class PMedianInstance:
    candidates: np.ndarray
    f: np.ndarray
    weights: np.ndarray
    n: int
    pairs: DemandPairSet | None = None

    def __post_init__(self):
        f = np.asarray(self.f, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if f.ndim != 2 or f.shape[0] != w.size or f.shape[1] != len(self.candidates):
            raise ValueError("distance matrix must be pairs x candidates")
        if np.any(f < 0) or np.any(~np.isfinite(f)):
            raise ValueError("distances must be finite and non-negative")
        if np.any(w < 0):
            raise ValueError("pair weights must be non-negative")
        if not 1 <= self.n <= f.shape[1]:
            raise ValueError(f"hub count n={self.n} must lie in [1, {f.shape[1]}]")
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "weights", w)

    @property
    def num_pairs(self) -> int:
        return self.f.shape[0]

    @property
    def num_candidates(self) -> int:
        return self.f.shape[1]

    def objective(self, open_set: Sequence[int]) -> float:
        """Weighted nearest-open-candidate distance."""
        cols = np.asarray(sorted(open_set), dtype=np.int64)
        if cols.size == 0:
            raise ValueError("open set is empty")
        return float(self.weights @ self.f[:, cols].min(1))

    def assignment(self, open_set: Sequence[int]) -> np.ndarray:
        """Nearest open candidate per pair, ties to the lowest index."""
        cols = np.asarray(sorted(open_set), dtype=np.int64)
        return cols[np.argmin(self.f[:, cols], axis=1)]

    def with_n(self, n: int) -> "PMedianInstance":
        return PMedianInstance(self.candidates, self.f, self.weights, n, self.pairs)

    def merged(self) -> "PMedianInstance":
        """Instance with identical distance rows combined into one pair."""
        rounded = np.round(self.f, 12)
        uniq, inv = np.unique(rounded, axis=0, return_inverse=True)
        w = np.bincount(inv.ravel(), weights=self.weights, minlength=len(uniq))
        return PMedianInstance(self.candidates, uniq, w, self.n)

    def dump_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["pair", "weight"] + [f"c{k}" for k in range(self.num_candidates)])
            for j, (w, row) in enumerate(zip(self.weights, self.f)):
                wr.writerow([j, repr(float(w))] + [repr(float(v)) for v in row])


def _distances(points_a: np.ndarray, cand: np.ndarray) -> np.ndarray:
    return np.abs(points_a[:, None, :] - cand[None, :, :]).sum(-1)


def build_instance(cust: WeightGrid, prov: WeightGrid, solution_grid: GridSpec, n: int,
                   reduce: bool = True) -> PMedianInstance:
    cand = make_grid(cust.region, solution_grid)
    if n > len(cand):
        raise ValueError(f"n={n} exceeds the {len(cand)} candidates")
    pairs = build_demand_pairs(cust, prov, reduce)
    f = _distances(pairs.customers, cand) + _distances(pairs.providers, cand)
    return PMedianInstance(cand, f, pairs.weights, n, pairs)


def build_multiprovider_instance(samples: int, scen: MultiProviderScenario, solution_grid: GridSpec,
                                 n: int, rng_seed: int) -> PMedianInstance:
    """Sampled instance where each pair has ``W`` providers and uses the nearest via each hub."""
    if samples < 1:
        raise ValueError("need at least one sample")
    cand = make_grid(scen.region, solution_grid)
    if n > len(cand):
        raise ValueError(f"n={n} exceeds the {len(cand)} candidates")
    cust, prov = draw_samples(scen, samples, chunk_rng(rng_seed, 0))
    f = _distances(cust, cand)
    leg = np.full(f.shape, np.inf)
    for w in range(scen.provider_count):
        np.minimum(leg, _distances(prov[:, w], cand), out=leg)
    return PMedianInstance(cand, f + leg, np.full(samples, 1.0 / samples), n)


# ---------------------------------------------------------------------------
# Distance profiles and cuts
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DistanceProfile:
    row: np.ndarray
    distinct: np.ndarray
    level_sets: tuple[np.ndarray, ...]
    pair_index: int = 0

    @property
    def levels(self) -> int:
        return self.distinct.size

    def prefix_set(self, r: int) -> np.ndarray:
        """Candidates with distance at most the ``r``-th distinct value (1-based)."""
        return np.flatnonzero(self.row <= self.distinct[r - 1])


def profile_of_row(row: Sequence[float], pair_index: int = 0) -> DistanceProfile:
    row = np.round(np.asarray(row, dtype=float), 12)
    distinct, inv = np.unique(row, return_inverse=True)
    levels = tuple(np.flatnonzero(inv == r) for r in range(distinct.size))
    return DistanceProfile(row, distinct, levels, pair_index)


def distance_profile(instance: PMedianInstance, j: int) -> DistanceProfile:
    if not 0 <= j < instance.num_pairs:
        raise ValueError("pair index out of range")
    return profile_of_row(instance.f[j], j)


def compute_rtilde(profile: DistanceProfile, v_bar: Sequence[float]) -> int:
    """Number of leading distance levels whose cumulative opening stays below one."""
    v = np.asarray(v_bar, dtype=float)
    if v.sum() < 1.0 - 1e-9:
        raise ValueError("open fractions must sum to at least one")
    prefix = np.cumsum([v[s].sum() for s in profile.level_sets])
    return int(np.count_nonzero(prefix < 1.0 - PREFIX_TOL))


@dataclass(frozen=True, eq=False)
class BendersCut:
    pair_index: int
    rank: int
    rhs_constant: float
    coefficients: dict[int, float] = field(default_factory=dict)

    def rhs(self, v: np.ndarray) -> float:
        return self.rhs_constant - sum(c * v[k] for k, c in self.coefficients.items())


def make_cut(profile: DistanceProfile, rank: int) -> BendersCut:
    if not 0 <= rank < profile.levels:
        raise ValueError(f"rank {rank} outside [0, {profile.levels})")
    if rank == 0:
        return BendersCut(profile.pair_index, 0, float(profile.distinct[0]))
    top = float(profile.distinct[rank])
    ks = profile.prefix_set(rank)
    return BendersCut(profile.pair_index, rank, top, {int(k): top - float(profile.row[k]) for k in ks})


def elloumi_objective(instance: PMedianInstance, open_set: Sequence[int]) -> np.ndarray:
    """Per-pair distance from the distance-level formulation with z read off the open set."""
    open_mask = np.zeros(instance.num_candidates, dtype=bool)
    open_mask[list(open_set)] = True
    out = np.empty(instance.num_pairs)
    for j in range(instance.num_pairs):
        prof = distance_profile(instance, j)
        d = prof.distinct
        z = np.array([not open_mask[prof.prefix_set(r)].any() for r in range(1, prof.levels)], dtype=float)
        out[j] = d[0] + float(np.diff(d) @ z) if z.size else d[0]
    return out


# ---------------------------------------------------------------------------
# Master problem
# ---------------------------------------------------------------------------


class BendersMaster:
    """Master LP over ``[v_0..v_{K-1}, eta_0..eta_{J-1}]`` with vectorized cut separation."""

    def __init__(self, instance: PMedianInstance, tol: float = CUT_TOL):
        self.inst = instance.merged()
        self.tol = tol
        f = self.inst.f
        J, K = f.shape
        self.J, self.K = J, K
        self.order = np.argsort(f, axis=1, kind="stable")
        self.fs = np.take_along_axis(f, self.order, axis=1)
        # A sorted position ends a distance level when the next value differs.
        self.level_end = np.ones_like(self.fs, dtype=bool)
        self.level_end[:, :-1] = self.fs[:, 1:] != self.fs[:, :-1]
        self.d1 = self.fs[:, 0]
        self.cuts = 0
        self.rounds = 0

    def linear_program(self) -> LinearProgram:
        K, J = self.K, self.J
        c = np.concatenate([np.zeros(K), self.inst.weights])
        lo = np.concatenate([np.zeros(K), self.d1])
        up = np.concatenate([np.ones(K), np.full(J, np.inf)])
        card = Row(np.arange(K), np.ones(K), EQ, float(self.inst.n))
        return LinearProgram(c, [card], lo, up)

    def rtilde_all(self, v: np.ndarray) -> np.ndarray:
        cum = np.cumsum(v[self.order], axis=1)
        below = (cum < 1.0 - PREFIX_TOL) & self.level_end
        return below.sum(1)

    def cut_rows(self, x: np.ndarray, integral: bool) -> list[Row]:
        """Violated cuts at the master point ``x`` (one per pair at most)."""
        K = self.K
        v, eta = np.clip(x[:K], 0.0, 1.0), x[K:]
        rt = self.rtilde_all(v)
        active = np.flatnonzero(rt > 0)
        if active.size == 0:
            return []
        # Distinct value of rank rt+1 sits at the first sorted position past rt level ends.
        ends_before = np.cumsum(self.level_end[active], axis=1) - self.level_end[active]
        pos = np.argmax(ends_before >= rt[active, None], axis=1)
        top = self.fs[active, pos]
        coef = np.maximum(top[:, None] - self.inst.f[active], 0.0)
        rhs = top - coef @ v
        tol = INTEGRAL_CUT_TOL if integral else self.tol
        hit = rhs > eta[active] + tol
        rows = []
        for j, t, cj in zip(active[hit], top[hit], coef[hit]):
            ks = np.flatnonzero(cj > 0)
            rows.append(Row(np.concatenate([ks, [K + j]]), np.concatenate([cj[ks], [1.0]]), GE, float(t)))
        self.cuts += len(rows)
        self.rounds += 1
        return rows

    def cuts_at(self, open_set: Sequence[int]) -> list[Row]:
        v = np.zeros(self.K)
        v[list(open_set)] = 1.0
        x = np.concatenate([v, np.full(self.J, -np.inf)])
        return self.cut_rows(x, True)

    def point(self, open_set: Sequence[int]) -> np.ndarray:
        v = np.zeros(self.K)
        v[list(open_set)] = 1.0
        eta = self.inst.f[:, sorted(open_set)].min(1)
        return np.concatenate([v, eta])


def greedy_open_set(instance: PMedianInstance) -> list[int]:
    """Add, one at a time, the candidate that reduces the objective the most."""
    inst = instance.merged()
    cur = np.full(inst.num_pairs, np.inf)
    chosen: list[int] = []
    for _ in range(inst.n):
        totals = inst.weights @ np.minimum(cur[:, None], inst.f)
        totals[chosen] = np.inf
        k = int(np.argmin(totals))
        chosen.append(k)
        cur = np.minimum(cur, inst.f[:, k])
    return sorted(chosen)


def nearest_candidates(instance: PMedianInstance, hubs: np.ndarray) -> list[int]:
    """Distinct candidates closest (in l1) to the given hubs."""
    out: list[int] = []
    for h in np.asarray(hubs, dtype=float).reshape(-1, 2):
        d = np.abs(instance.candidates - h).sum(1)
        d[out] = np.inf
        out.append(int(np.argmin(d)))
    return sorted(out)


def coarsen(weights: WeightGrid, divisions: int = 5) -> WeightGrid:
    """Move each point's mass to the nearest point of a coarser grid of the same mode."""
    spec = GridSpec(divisions, weights.grid.mode)
    coarse = make_grid(weights.region, spec)
    near = np.argmin(_distances(weights.points, coarse), axis=1)
    return WeightGrid(spec, weights.region, np.bincount(near, weights=weights.weights, minlength=len(coarse)))


def coarse_warm_start(cust: WeightGrid, prov: WeightGrid, solution_grid: GridSpec, n: int,
                      divisions: int = 5) -> list[int]:
    """Optimal open set of the coarsened demand problem on the same candidate grid."""
    small = build_instance(coarsen(cust, divisions), coarsen(prov, divisions), solution_grid, n)
    return list(solve_benders(small).open_set)


@dataclass(frozen=True)
class BendersResult:
    open_set: tuple[int, ...]
    objective: float
    rounds: int
    cuts: int
    nodes: int
    lp_iterations: int

    def to_solution(self, instance: PMedianInstance) -> HubSolution:
        return HubSolution(
            tuple(map(tuple, instance.candidates[list(self.open_set)])),
            self.objective,
            method="benders",
            open_candidates=self.open_set,
            iterations=self.rounds,
            cuts=self.cuts,
            nodes=self.nodes,
        )


def solve_benders(instance: PMedianInstance, warm: HubSolution | Sequence[int] | None = None,
                  tol: float = CUT_TOL) -> BendersResult:
    """Provably optimal open set by branch-and-Benders-cut.

    ``warm`` may be a solution (its hubs are snapped to candidates) or a list
    of candidate indices; without it a greedy set seeds the first cuts.
    """
    if instance.n > instance.num_candidates:
        raise ValueError("n exceeds the number of candidates")
    master = BendersMaster(instance, tol)
    if warm is None:
        seed = greedy_open_set(instance)
    elif isinstance(warm, HubSolution):
        seed = list(warm.open_candidates) if warm.open_candidates else nearest_candidates(instance, warm.as_array())
    else:
        seed = sorted(int(k) for k in warm)
    if len(seed) != instance.n or len(set(seed)) != len(seed):
        raise ValueError(f"warm start must name {instance.n} distinct candidates")

    lp = master.linear_program()
    lp.rows.extend(master.cuts_at(seed))
    incumbent = (float(master.inst.weights @ master.inst.f[:, seed].min(1)), master.point(seed))
    sol = branch_and_bound(lp, range(master.K), master.cut_rows, incumbent=incumbent)
    if not sol.optimal:
        raise RuntimeError(f"master problem ended with status {sol.status}")
    open_set = tuple(int(k) for k in np.flatnonzero(sol.values[: master.K] > 0.5))
    if len(open_set) != instance.n:
        raise RuntimeError("master solution does not open exactly n candidates")
    return BendersResult(open_set, instance.objective(open_set), master.rounds, master.cuts, sol.nodes,
                         sol.iterations)


def root_relaxation(instance: PMedianInstance, tol: float = CUT_TOL) -> tuple[np.ndarray, bool]:
    """Cut loop at the root; returns the LP open fractions and whether they are integral."""
    master = BendersMaster(instance, tol)
    lp = master.linear_program()
    lp.rows.extend(master.cuts_at(greedy_open_set(instance)))
    solver = SimplexSolver(lp)
    while True:
        sol = solver.solve()
        if not sol.optimal:
            raise RuntimeError(f"root LP ended with status {sol.status}")
        v = sol.values[: master.K]
        integral = bool(np.all(np.abs(v - np.round(v)) <= INT_TOL))
        rows = master.cut_rows(sol.values, integral)
        if not rows:
            return v, integral
        solver.add_rows(rows)


def brute_force_pmedian(instance: PMedianInstance) -> tuple[tuple[int, ...], float]:
    """Exhaustive search; the first lexicographic set attaining the minimum wins."""
    K, n = instance.num_candidates, instance.n
    if math.comb(K, n) > BRUTE_FORCE_LIMIT:
        raise ValueError(f"C({K},{n}) subsets exceed the brute-force budget of {BRUTE_FORCE_LIMIT}")
    inst = instance.merged()
    best_val, best_set = np.inf, None
    combos = itertools.combinations(range(K), n)
    chunk = max(1, 2_000_000 // max(1, inst.num_pairs * n))
    while True:
        block = np.array(list(itertools.islice(combos, chunk)), dtype=np.int64)
        if block.size == 0:
            break
        vals = inst.weights @ inst.f[:, block].min(2)
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_val, best_set = float(vals[i]), tuple(int(k) for k in block[i])
    return best_set, instance.objective(best_set)
