"""Manhattan-metric geometry and closed-form objectives for small hub problems.

Every objective here is the expected value of

    min_i ( |X - p_i|_1 + |Y - p_i|_1 )

for a customer X and a provider Y drawn independently and uniformly from the
region: the unit segment (1D), the unit square, or the ``1 x a`` rectangle.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

ArrayLike = Sequence[float] | np.ndarray


def as_point(p: ArrayLike, dim: int | None = None) -> np.ndarray:
    """Validate a 1D/2D point and return it as a float array."""
    arr = np.atleast_1d(np.asarray(p, dtype=float))
    if arr.ndim != 1 or arr.size not in (1, 2):
        raise ValueError(f"a point has 1 or 2 coordinates, got shape {arr.shape}")
    if dim is not None and arr.size != dim:
        raise ValueError(f"expected a {dim}D point, got {arr.size}D")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"point coordinates must be finite: {arr}")
    return arr


def l1_dist(p: ArrayLike, q: ArrayLike) -> float:
    a = as_point(p)
    b = as_point(q, a.size)
    return float(np.abs(a - b).sum())


def travel_dist(x: ArrayLike, y: ArrayLike, hub: ArrayLike) -> float:
    """Customer-to-hub plus provider-to-hub distance."""
    h = as_point(hub)
    return l1_dist(x, h) + l1_dist(y, h)


def winner_index(x: ArrayLike, y: ArrayLike, hubs: Sequence[ArrayLike]) -> int:
    """0-based index of the hub minimizing the trip; ties go to the lowest index."""
    if len(hubs) == 0:
        raise ValueError("need at least one hub")
    d = [travel_dist(x, y, h) for h in hubs]
    return int(np.argmin(d))


# ---------------------------------------------------------------------------
# One dimension
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HubConfig1D:
    positions: tuple[float, ...]

    def __post_init__(self):
        p = np.asarray(self.positions, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("need at least one hub position")
        if not np.all(np.isfinite(p)) or p.min() < 0.0 or p.max() > 1.0:
            raise ValueError(f"positions must lie in [0, 1]: {p}")
        if np.any(np.diff(p) <= 0.0):
            raise ValueError(f"positions must be strictly increasing: {p}")
        object.__setattr__(self, "positions", tuple(float(v) for v in p))

    @property
    def n(self) -> int:
        return len(self.positions)

    def as_array(self) -> np.ndarray:
        return np.array(self.positions)


def _config_1d(cfg: HubConfig1D | ArrayLike) -> np.ndarray:
    if not isinstance(cfg, HubConfig1D):
        cfg = HubConfig1D(tuple(np.atleast_1d(np.asarray(cfg, dtype=float))))
    return cfg.as_array()


def f1_1d(p1: float) -> float:
    return 2.0 * p1 * p1 - 2.0 * p1 + 1.0


def delta_f_1d(a: float, b: float) -> float:
    """Change in objective when a hub at ``b`` is added to the right of ``a``."""
    return (a**3 / 3.0 - b**3 / 3.0 + a * a * b - a * b * b
            - 2.0 * a * a + 2.0 * b * b + 2.0 * a - 2.0 * b)


def f_n_1d(cfg: HubConfig1D | ArrayLike) -> float:
    p = _config_1d(cfg)
    total = f1_1d(p[0])
    for a, b in zip(p[:-1], p[1:]):
        total += delta_f_1d(a, b)
    return float(total)


def grad_f_n_1d(cfg: HubConfig1D | ArrayLike) -> np.ndarray:
    p = _config_1d(cfg)
    g = np.zeros(p.size)
    g[0] = 4.0 * p[0] - 2.0
    for j in range(1, p.size):
        a, b = p[j - 1], p[j]
        g[j - 1] += a * a + 2.0 * a * b - b * b - 4.0 * a + 2.0
        g[j] += -b * b + a * a - 2.0 * a * b + 4.0 * b - 2.0
    return g


def hessian_f_n_1d(cfg: HubConfig1D | ArrayLike) -> np.ndarray:
    """Tridiagonal Hessian of :func:`f_n_1d`."""
    p = _config_1d(cfg)
    n = p.size
    h = np.zeros((n, n))
    h[0, 0] = 4.0
    for j in range(1, n):
        a, b = p[j - 1], p[j]
        h[j - 1, j - 1] += 2.0 * a + 2.0 * b - 4.0
        h[j, j] += 4.0 - 2.0 * a - 2.0 * b
        h[j - 1, j] = h[j, j - 1] = 2.0 * a - 2.0 * b
    return h


# ---------------------------------------------------------------------------
# Two dimensions, one and two hubs
# ---------------------------------------------------------------------------


class CaseTag(str, Enum):
    """Orientation of hub 2 relative to hub 1 and which offset dominates."""

    NE_GE = "NE-D1>=D2"
    NE_LT = "NE-D1<D2"
    NW_GE = "NW-D1>=D2"
    NW_LT = "NW-D1<D2"


@dataclass(frozen=True)
class TwoHubConfig2D:
    p1: tuple[float, float]
    p2: tuple[float, float]
    case_tag: CaseTag | None = None

    def __post_init__(self):
        p1 = tuple(float(v) for v in as_point(self.p1, 2))
        p2 = tuple(float(v) for v in as_point(self.p2, 2))
        object.__setattr__(self, "p1", p1)
        object.__setattr__(self, "p2", p2)
        tag = classify_two_hub(p1, p2)
        if self.case_tag is None:
            object.__setattr__(self, "case_tag", tag)
        elif CaseTag(self.case_tag) is not tag and not _on_case_boundary(p1, p2, CaseTag(self.case_tag)):
            raise ValueError(f"case tag {self.case_tag} inconsistent with hubs {p1}, {p2} ({tag})")

    def as_array(self) -> np.ndarray:
        return np.array([*self.p1, *self.p2])


def classify_two_hub(p1: ArrayLike, p2: ArrayLike) -> CaseTag:
    """Case tag for a hub pair, assuming ``p2`` lies above ``p1``.

    Pairs with ``p2`` below ``p1`` are classified after swapping labels.
    """
    a, b = np.asarray(p1, float), np.asarray(p2, float)
    if b[1] < a[1]:
        a, b = b, a
    d1, d2 = b[0] - a[0], b[1] - a[1]
    if d1 >= 0:
        return CaseTag.NE_GE if d1 >= d2 else CaseTag.NE_LT
    return CaseTag.NW_GE if -d1 >= d2 else CaseTag.NW_LT


def _on_case_boundary(p1, p2, tag: CaseTag) -> bool:
    a, b = np.asarray(p1, float), np.asarray(p2, float)
    if b[1] < a[1]:
        a, b = b, a
    d1, d2 = b[0] - a[0], b[1] - a[1]
    east = tag in (CaseTag.NE_GE, CaseTag.NE_LT)
    if (d1 >= 0) != east and abs(d1) > 1e-12:
        return False
    return abs(abs(d1) - d2) <= 1e-12 or abs(d1) <= 1e-12


def f_1_2d(p: ArrayLike) -> float:
    """Exact single-hub objective on the unit square."""
    x, y = as_point(p, 2)
    return float(2 * x * x + 2 * y * y - 2 * x - 2 * y + 2)


def _f2_square_canonical(p11, p12, p21, p22):
    # Valid when p21 >= p11, p22 >= p12 and p21 - p11 >= p22 - p12.
    return (
        2 - 2 * p22 - 2 * p21 - 2 / 3 * p12**3 * p11 * p22 + 1 / 3 * p11 * p12**4
        - 1 / 3 * p22**4 * p11 - p11**2 * p22 + 2 / 3 * p12**3 * p21 - p11**2 * p12**2
        + p11**2 * p22**2 + 1 / 3 * p12**4 * p22 - 1 / 3 * p21 * p22**4 - 1 / 3 * p12 * p22**4
        + p11**2 * p21 - p11 * p21**2 + 2 * p12 * p11 * p22
        + 2 / 3 * p22**3 * p11 * p12 - p21 * p22**2 + p21**2 * p22
        + 2 / 3 * p11 * p22**3 - p21**2 * p22**2 + 4 / 3 * p21 * p22**3 - p11 * p22**2
        + p12**2 * p21**2 + p12**2 * p22 - 1 / 3 * p21**3 + 2 * p22**2
        - 2 * p11 * p12**2 * p21 * p22
        + 2 / 3 * p22**3 * p12 + 2 / 3 * p22**3 * p12 * p21 - p21 * p12**2
        + 4 / 3 * p12**3 * p11 - 2 / 3 * p12**3 * p11 * p21 - 2 / 3 * p12**3 * p21 * p22
        - 2 * p12 * p21 * p22**2 - 4 * p11 * p12 * p22**2
        + 1 / 3 * p12**4 * p21 + 2 / 3 * p12**3 * p22 - p12 * p22**2 - 2 / 3 * p12**4
        - p21**2 * p12
        + 2 * p21**2 + 1 / 3 * p22**3 - 1 / 3 * p12**3 - p12**2 * p11 + p11**2 * p12
        + 2 * p11 * p12 * p21 * p22**2 - 2 / 3 * p22**4 + 1 / 5 * p22**5
        - 1 / 5 * p12**5 + 1 / 3 * p11**3 - 2 * p12 * p11 * p21 + 2 / 3 * p11 * p21 * p22**3
        - 2 * p11 * p21 * p22**2 + 2 * p11 * p21 * p22 + 2 * p12 * p21 * p22
        + 2 * p11 * p12**2 * p21 + 2 * p11 * p12**2 * p22
    )


def _f2_rect_case1(p11, p12, p21, p22, a):
    s = (
        2 / 3 * a * p11 * p12**3 + 4 / 3 * a * p11 * p22**3 + 2 / 3 * p11 * p12 * p22**3
        + 2 / 3 * p11 * p21 * p22**3 - 2 / 3 * p11 * p12**3 * p21 - 2 * p11 * p12 * p22**2
        + 2 * p11 * p12**2 * p22 + 2 / 3 * p12**3 * p11 - 1 / 3 * p11 * p22**4 + 1 / 3 * p11 * p12**4
        - 2 / 3 * p22**3 * p11 + 2 / 3 * p12**3 * p22 + p12**2 * p22**2 + 2 * a * p22**2
        - 2 / 3 * p12 * p22**3 + 1 / 3 * p21 * p12**4 + 1 / 3 * p12**4 * p22 - 1 / 3 * p21 * p22**4
        + 1 / 6 * a * p12**4 - 1 / 2 * a * p22**4 - 1 / 3 * p12 * p22**4 + 1 / 3 * a**2 * p11**3
        + 2 * a**2 * p21**2
        - 1 / 3 * a**2 * p21**3 - 2 * a**2 * p21 - 2 * a**2 * p22 - 1 / 3 * a**2 * p12**3
        + 1 / 3 * a**2 * p22**3
        - 5 / 6 * p12**4 + 1 / 5 * p22**5 - 1 / 5 * p12**5 - 1 / 6 * p22**4 + a**3 + a**2
        + 2 * p11 * p12 * p21 * p22**2 - 2 * a * p11 * p12 * p22**2 + 2 * a * p11 * p12**2 * p21
        - 2 * a * p11 * p21 * p22**2 - 2 * a * p12 * p21 * p22**2 - 2 * p11 * p12**2 * p21 * p22
        + 2 * a**2 * p11 * p12 * p22 + 2 * a**2 * p11 * p21 * p22 - 2 * a**2 * p11 * p12 * p21
        + 2 * a**2 * p12 * p21 * p22 - a * p12**2 * p22**2 - a * p11**2 * p12**2
        + a * p11**2 * p22**2
        + 2 / 3 * a * p12**3 * p21 + 4 / 3 * p21 * a * p22**3 + 2 / 3 * p21 * p12 * p22**3
        + 4 / 3 * p12 * a * p22**3
        - 2 / 3 * p21 * p22 * p12**3 - 2 / 3 * p12**3 * p11 * p22 - a**2 * p11 * p22**2
        - a**2 * p11 * p12**2 - a**2 * p11 * p21**2 - a * p21**2 * p22**2 - a**2 * p12**2 * p21
        + a**2 * p12**2 * p22 - a**2 * p12 * p22**2 - a**2 * p21 * p22**2
        + a**2 * p11**2 * p12 + a**2 * p11**2 * p21 - a**2 * p11**2 * p22
        + a * p12**2 * p21**2 - a**2 * p12 * p21**2 + a**2 * p21**2 * p22
    )
    return s / a**2


def _f2_rect_case2(p11, p12, p21, p22, a):
    s = (
        2 / 3 * p11**3 * p12 * a + 2 / 3 * p11 * p21**3 * p22 - 2 * p11 * p21**2 * p22
        + 2 / 3 * a * p11**3 * p21 + a * p11**2 * p21**2 - 2 / 3 * a * p11 * p21**3
        + 1 / 3 * p11**4 * p22
        - 1 / 3 * p11 * p21**4 - p11**2 * p21**2 + 4 / 3 * p11 * p21**3 - 5 / 6 * a * p11**4
        + 2 / 3 * p11**3 * p22 - p11**2 * p12**2 + 2 / 3 * p11**3 * p12 + 4 / 3 * p21**3 * p22
        + 2 * a**2 * p21**2
        - 1 / 3 * p21**4 * p22 + p21**2 * p12**2 - 1 / 6 * a * p21**4 + 1 / 3 * p11**4 * p21
        + 4 / 3 * p12 * p21**3
        - 1 / 3 * p21**4 * p12 + 1 / 3 * p11**4 * p12 - p21**2 * p22**2 - p11**2 * p22
        + p12**2 * p22
        - p12 * p22**2 + p11**2 * p22**2 - 2 * a**2 * p21 - 2 * a**2 * p22 + 2 * a * p22**2
        - p12**2 * p21 + p11**2 * p21 - p11 * p21**2 - p21**2 * p22 + p11 * p12**2
        - p21**2 * p12 - p11**2 * p12 + p21 * p22**2 - p11 * p22**2 + 1 / 6 * p11**4
        - 1 / 5 * p11**5 - 1 / 2 * p21**4 + 1 / 5 * p21**5 - 1 / 3 * p11**3 - 1 / 3 * p22**3
        + 1 / 3 * p21**3
        + 1 / 3 * p12**3 + a**3 + a**2 + 2 * a * p11**2 * p12 * p21 - 2 * a * p11 * p12 * p21**2
        + 2 * p11 * p12 * p21**2 * p22 - 2 * p11**2 * p12 * p21 * p22 - 2 / 3 * p21 * p22 * p11**3
        + 2 / 3 * p21**3 * p11 * p12 - 2 / 3 * a * p12 * p21**3 - 2 / 3 * p11**3 * p12 * p22
        + 2 / 3 * p12 * p21**3 * p22 + 2 * p11**2 * p12 * p22 - 2 * p12 * p21**2 * p22
        - 2 * p21**2 * p11 * p12 - 2 / 3 * p11**3 * p12 * p21 + 2 * p22 * p11 * p21
        + 2 * p12 * p21 * p22 + 2 * p12 * p11 * p21 - 2 * p11 * p22 * p12
    )
    return s / a**2


def canonicalize_square(p1: ArrayLike, p2: ArrayLike) -> np.ndarray:
    """Map a hub pair on the unit square to the NE, D1 >= D2 orientation.

    Uses only symmetries of the square (reflections, axis swap) and hub
    relabelling, all of which leave the uniform-square objective unchanged.
    Returns ``[p11, p12, p21, p22]``.
    """
    a = as_point(p1, 2).copy()
    b = as_point(p2, 2).copy()
    if b[0] < a[0]:
        a, b = b, a
    if b[1] < a[1]:
        a[1], b[1] = 1.0 - a[1], 1.0 - b[1]
    if b[0] - a[0] < b[1] - a[1]:
        a, b = a[::-1].copy(), b[::-1].copy()
    return np.array([a[0], a[1], b[0], b[1]])


def f_2_2d(cfg: TwoHubConfig2D | ArrayLike, p2: ArrayLike | None = None) -> float:
    """Exact two-hub objective on the unit square, any orientation.

    Accepts a :class:`TwoHubConfig2D`, a flat ``[p11, p12, p21, p22]`` vector,
    or two points.
    """
    if isinstance(cfg, TwoHubConfig2D):
        q1, q2 = cfg.p1, cfg.p2
    elif p2 is not None:
        q1, q2 = cfg, p2
    else:
        flat = np.asarray(cfg, dtype=float).ravel()
        if flat.size != 4:
            raise ValueError("expected four coordinates")
        q1, q2 = flat[:2], flat[2:]
    c = canonicalize_square(q1, q2)
    return float(_f2_square_canonical(*c))


class RectCase(str, Enum):
    C1 = "C1"  # D1 >= D2
    C2 = "C2"  # D1 < D2


def f_2_rect(cfg: TwoHubConfig2D | ArrayLike, a: float, case: RectCase | str) -> float:
    """Exact two-hub objective on the ``1 x a`` rectangle, NE orientation.

    ``case`` selects the polynomial; it must agree with the hub offsets
    (the shared boundary D1 == D2 is accepted by both).
    """
    if a <= 0:
        raise ValueError("rectangle length must be positive")
    case = RectCase(case)
    flat = cfg.as_array() if isinstance(cfg, TwoHubConfig2D) else np.asarray(cfg, float).ravel()
    if flat.size != 4:
        raise ValueError("expected four coordinates")
    p11, p12, p21, p22 = flat
    tol = 1e-12
    if p21 < p11 - tol or p22 < p12 - tol:
        raise ValueError("rectangle polynomials assume hub 2 north-east of hub 1")
    if min(p11, p21) < -tol or max(p11, p21) > 1 + tol or min(p12, p22) < -tol or max(p12, p22) > a + tol:
        raise ValueError("hubs must lie inside the rectangle")
    d1, d2 = p21 - p11, p22 - p12
    if case is RectCase.C1 and d1 < d2 - tol:
        raise ValueError(f"case C1 needs D1 >= D2, got D1={d1}, D2={d2}")
    if case is RectCase.C2 and d1 > d2 + tol:
        raise ValueError(f"case C2 needs D1 < D2, got D1={d1}, D2={d2}")
    poly = _f2_rect_case1 if case is RectCase.C1 else _f2_rect_case2
    return float(poly(p11, p12, p21, p22, a))
