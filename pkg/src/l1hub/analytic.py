"""Exact solutions for small hub problems.

The 1D optimum is closed form. The 2D one-hub optimum is the centre of the
square. Two hubs in 2D are found by multi-start Nelder-Mead on the exact
polynomial of each orientation case; the feasible boxes are tiny (four
variables) so a handful of starts reliably finds the global optimum.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from .metric import (
    CaseTag,
    HubConfig1D,
    RectCase,
    _f2_rect_case1,
    _f2_rect_case2,
    _f2_square_canonical,
    f_1_2d,
)
from .solution import HubSolution

SQRT2 = np.sqrt(2.0)


def closed_form_1d(n: int) -> HubConfig1D:
    """Optimal positions of ``n`` hubs on the unit segment."""
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    n = int(n)
    i = np.arange(n)
    denom = (n - 1) * SQRT2 + 2.0
    left = (i * SQRT2 + 1.0) / denom
    # Build from both ends so p_i + p_{n-i+1} == 1 holds to the last bit.
    right = 1.0 - left[::-1]
    half = n // 2
    pos = np.concatenate([left[:half], [0.5] if n % 2 else [], right[half + n % 2:]])
    return HubConfig1D(tuple(pos))


def exact_one_hub_2d() -> HubSolution:
    return HubSolution(((0.5, 0.5),), f_1_2d((0.5, 0.5)), method="exact-1hub")


@dataclass(frozen=True)
class CaseResult:
    hubs: tuple[tuple[float, float], tuple[float, float]]
    value: float


@dataclass(frozen=True)
class ExactSolveReport:
    best: HubSolution
    starts_used: int
    per_case_best: dict[str, CaseResult] = field(default_factory=dict)
    converged_starts: int = 0


@dataclass(frozen=True)
class _Case:
    """A four-variable feasible set described by a sequential clip.

    Variables are ``(p11, d1, p12, d2)``; ``clip`` maps an unconstrained
    vector to a feasible one coordinate by coordinate.
    """

    name: str
    objective: Callable[[np.ndarray], float]
    clip: Callable[[np.ndarray], np.ndarray]
    to_hubs: Callable[[np.ndarray], np.ndarray]
    anchor: np.ndarray


def _square_case() -> _Case:
    def clip(z):
        p11 = np.clip(z[0], 0.0, 1.0)
        d1 = np.clip(z[1], 0.0, 1.0 - p11)
        p12 = np.clip(z[2], 0.0, 1.0)
        d2 = np.clip(z[3], 0.0, min(d1, 1.0 - p12))
        return np.array([p11, d1, p12, d2])

    def to_hubs(u):
        return np.array([u[0], u[2], u[0] + u[1], u[2] + u[3]])

    return _Case(
        CaseTag.NE_GE.value,
        lambda u: _f2_square_canonical(*to_hubs(u)),
        clip,
        to_hubs,
        np.array([0.32, 0.35, 0.37, 0.27]),
    )


def _rect_cases(a: float) -> list[_Case]:
    def to_hubs(u):
        return np.array([u[0], u[2], u[0] + u[1], u[2] + u[3]])

    # C1: d1 >= d2, so d1 is free first and d2 is capped by it.
    def clip1(z):
        p11 = np.clip(z[0], 0.0, 1.0)
        d1 = np.clip(z[1], 0.0, 1.0 - p11)
        p12 = np.clip(z[2], 0.0, a)
        d2 = np.clip(z[3], 0.0, min(d1, a - p12))
        return np.array([p11, d1, p12, d2])

    # C2: d1 <= d2, so d2 is free first and d1 is capped by it.
    def clip2(z):
        p11 = np.clip(z[0], 0.0, 1.0)
        p12 = np.clip(z[2], 0.0, a)
        d2 = np.clip(z[3], 0.0, a - p12)
        d1 = np.clip(z[1], 0.0, min(d2, 1.0 - p11))
        return np.array([p11, d1, p12, d2])

    mid = min(1.0, a)
    return [
        _Case(RectCase.C1.value, lambda u: _f2_rect_case1(*to_hubs(u), a), clip1, to_hubs,
              np.array([0.3, 0.4, 0.2 * a, 0.05 * mid])),
        _Case(RectCase.C2.value, lambda u: _f2_rect_case2(*to_hubs(u), a), clip2, to_hubs,
              np.array([0.45, 0.05 * mid, 0.3 * a, 0.4 * a])),
    ]


def _scale(case: _Case, unit: np.ndarray, a: float) -> np.ndarray:
    # Map a point of [0,1]^4 into the case box, then through the clip.
    return case.clip(np.array([unit[0], unit[1], unit[2] * a, unit[3] * a]))


def _minimize_case(case: _Case, a: float, starts: int, rng_seed: int) -> tuple[np.ndarray, float, int]:
    def penalized(z):
        u = case.clip(z)
        return case.objective(u) + float(np.sum((z - u) ** 2))

    sampler = qmc.LatinHypercube(d=4, seed=rng_seed)
    pts = [case.clip(case.anchor), _scale(case, np.full(4, 0.5), a)]
    if starts > 2:
        pts += [_scale(case, s, a) for s in sampler.random(starts - 2)]
    pts = pts[:starts]

    best_u, best_val, converged = None, np.inf, 0
    for z0 in pts:
        res = minimize(penalized, z0, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 20000, "maxfev": 40000})
        converged += bool(res.success)
        u = case.clip(res.x)
        val = case.objective(u)
        if val < best_val - 1e-15:
            best_u, best_val = u, val
    return case.to_hubs(best_u), float(best_val), converged


def exact_two_hub_2d(region_length_a: float = 1.0, starts: int = 64, rng_seed: int = 0) -> ExactSolveReport:
    """Best two-hub configuration on the ``1 x a`` rectangle.

    On the square the four orientation cases are images of one another, so
    only the canonical one is searched and its optimum is mirrored into the
    other three. Rectangles search both cases C1 and C2.
    """
    a = float(region_length_a)
    if a <= 0:
        raise ValueError("region length must be positive")
    if starts < 1:
        raise ValueError("need at least one start")
    seeds = np.random.SeedSequence(rng_seed).generate_state(2)

    per_case: dict[str, CaseResult] = {}
    converged = 0
    if a == 1.0:
        h, val, converged = _minimize_case(_square_case(), 1.0, starts, int(seeds[0]))
        p1, p2 = h[:2], h[2:]
        images = {
            CaseTag.NE_GE: (p1, p2),
            CaseTag.NE_LT: (p1[::-1], p2[::-1]),
            CaseTag.NW_GE: ((1 - p1[0], p1[1]), (1 - p2[0], p2[1])),
            CaseTag.NW_LT: ((1 - p1[1], p1[0]), (1 - p2[1], p2[0])),
        }
        for tag, (q1, q2) in images.items():
            per_case[tag.value] = CaseResult((tuple(map(float, q1)), tuple(map(float, q2))), val)
        used = starts
    else:
        used = 0
        for i, case in enumerate(_rect_cases(a)):
            h, val, conv = _minimize_case(case, a, starts, int(seeds[i]))
            per_case[case.name] = CaseResult(((float(h[0]), float(h[1])), (float(h[2]), float(h[3]))), val)
            converged += conv
            used += starts

    tag, res = min(per_case.items(), key=lambda kv: kv[1].value)
    best = HubSolution(res.hubs, res.value, method=f"exact-2hub[{tag}]")
    return ExactSolveReport(best=best, starts_used=used, per_case_best=per_case, converged_starts=converged)
