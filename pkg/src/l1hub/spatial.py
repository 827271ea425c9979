"""Regions, grids, probability weight maps and demand pairs."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

WEIGHT_TOL = 1e-9


@dataclass(frozen=True)
class Region:
    """Axis-aligned rectangle ``[0, width] x [0, height]``."""

    width: float = 1.0
    height: float = 1.0

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError(f"region sides must be positive, got {self.width} x {self.height}")

    @property
    def area(self) -> float:
        return self.width * self.height

    def contains(self, pts: np.ndarray, tol: float = 0.0) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return ((pts[:, 0] >= -tol) & (pts[:, 0] <= self.width + tol)
                & (pts[:, 1] >= -tol) & (pts[:, 1] <= self.height + tol))


class GridMode(str, Enum):
    NODES = "nodes"
    CENTERS = "centers"


@dataclass(frozen=True)
class GridSpec:
    divisions: int
    mode: GridMode = GridMode.NODES

    def __post_init__(self):
        if int(self.divisions) != self.divisions or self.divisions < 1:
            raise ValueError(f"divisions must be a positive integer, got {self.divisions}")
        object.__setattr__(self, "divisions", int(self.divisions))
        object.__setattr__(self, "mode", GridMode(self.mode))

    @property
    def side(self) -> int:
        return self.divisions + 1 if self.mode is GridMode.NODES else self.divisions

    @property
    def count(self) -> int:
        return self.side**2


def _axis(spec: GridSpec, length: float) -> np.ndarray:
    d = spec.divisions
    if spec.mode is GridMode.NODES:
        return np.linspace(0.0, length, d + 1)
    return (np.arange(d) + 0.5) * (length / d)


def make_grid(region: Region, spec: GridSpec) -> np.ndarray:
    """Grid points as an ``(count, 2)`` array, x index major."""
    xs, ys = _axis(spec, region.width), _axis(spec, region.height)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    return np.column_stack([gx.ravel(), gy.ravel()])


def cell_boxes(region: Region, spec: GridSpec) -> np.ndarray:
    """Cell owned by each grid point, as ``(count, 4)`` rows ``x0, y0, x1, y1``.

    In nodes mode a node owns the box of half a spacing around it, clipped
    to the region; in centers mode it owns its cell.
    """
    pts = make_grid(region, spec)
    hx, hy = region.width / spec.divisions / 2, region.height / spec.divisions / 2
    boxes = np.column_stack([pts[:, 0] - hx, pts[:, 1] - hy, pts[:, 0] + hx, pts[:, 1] + hy])
    boxes[:, [0, 2]] = np.clip(boxes[:, [0, 2]], 0.0, region.width)
    boxes[:, [1, 3]] = np.clip(boxes[:, [1, 3]], 0.0, region.height)
    return boxes


@dataclass(frozen=True, eq=False)
class WeightGrid:
    grid: GridSpec
    region: Region
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        if w.size != self.grid.count:
            raise ValueError(f"expected {self.grid.count} weights, got {w.size}")
        if np.any(~np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and non-negative")
        if abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def points(self) -> np.ndarray:
        return make_grid(self.region, self.grid)

    def same_distribution(self, other: "WeightGrid") -> bool:
        return (self.grid == other.grid and self.region == other.region
                and np.array_equal(self.weights, other.weights))


def _normalized(grid: GridSpec, region: Region, raw: np.ndarray) -> WeightGrid:
    total = raw.sum()
    if not total > 0:
        raise ValueError("weight map has zero total mass")
    return WeightGrid(grid, region, raw / total)


def uniform_weights(spec: GridSpec, region: Region = Region()) -> WeightGrid:
    return WeightGrid(spec, region, np.full(spec.count, 1.0 / spec.count))


def continuous_uniform(region: Region = Region()) -> WeightGrid:
    """The uniform distribution on the whole region (one cell, sampled inside)."""
    return uniform_weights(GridSpec(1, GridMode.CENTERS), region)


def scott_bandwidth(incidents: np.ndarray) -> float:
    """Scott's rule for a 2D Gaussian kernel, using the mean coordinate std."""
    pts = np.atleast_2d(np.asarray(incidents, dtype=float))
    n = len(pts)
    sigma = float(np.mean(pts.std(axis=0, ddof=1))) if n > 1 else 0.0
    if not sigma > 0:
        raise ValueError("cannot pick a bandwidth for fewer than two distinct incidents; pass one")
    return sigma * n ** (-1.0 / 6.0)


def kde_weight_map(incidents: Sequence[Sequence[float]] | np.ndarray, bandwidth: float | None,
                   spec: GridSpec, region: Region, sublattice: int = 5) -> WeightGrid:
    """Gaussian kernel density averaged over each cell, then normalized.

    ``bandwidth=None`` uses Scott's rule.
    """
    pts = np.asarray(incidents, dtype=float)
    if pts.size == 0:
        raise ValueError("need at least one incident")
    pts = pts.reshape(-1, 2)
    if not np.all(region.contains(pts, tol=1e-12)):
        raise ValueError("all incidents must lie inside the region")
    h = scott_bandwidth(pts) if bandwidth is None else float(bandwidth)
    if not h > 0:
        raise ValueError("bandwidth must be positive")

    boxes = cell_boxes(region, spec)
    t = (np.arange(sublattice) + 0.5) / sublattice
    tx, ty = np.meshgrid(t, t, indexing="ij")
    tx, ty = tx.ravel(), ty.ravel()
    sx = boxes[:, [0]] + (boxes[:, [2]] - boxes[:, [0]]) * tx
    sy = boxes[:, [1]] + (boxes[:, [3]] - boxes[:, [1]]) * ty
    sub = np.column_stack([sx.ravel(), sy.ravel()])

    # Sort incidents so the summation order does not depend on input order.
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]
    dens = np.zeros(len(sub))
    for start in range(0, len(pts), 256):
        chunk = pts[start:start + 256]
        d2 = ((sub[:, None, :] - chunk[None, :, :]) ** 2).sum(-1)
        dens += np.exp(-0.5 * d2 / h**2).sum(1)
    cell_mean = dens.reshape(len(boxes), sublattice * sublattice).mean(1)
    return _normalized(spec, region, cell_mean)


@dataclass(frozen=True)
class Zone:
    rect: tuple[float, float, float, float]
    aadt: float

    def __post_init__(self):
        x0, y0, x1, y1 = (float(v) for v in self.rect)
        if not (x1 > x0 and y1 > y0):
            raise ValueError(f"zone rectangle must have positive area: {self.rect}")
        if not self.aadt > 0:
            raise ValueError("zone AADT must be positive")
        object.__setattr__(self, "rect", (x0, y0, x1, y1))

    @property
    def area(self) -> float:
        x0, y0, x1, y1 = self.rect
        return (x1 - x0) * (y1 - y0)


def _overlap(boxes: np.ndarray, rect: Sequence[float]) -> np.ndarray:
    wx = np.clip(np.minimum(boxes[:, 2], rect[2]) - np.maximum(boxes[:, 0], rect[0]), 0, None)
    wy = np.clip(np.minimum(boxes[:, 3], rect[3]) - np.maximum(boxes[:, 1], rect[1]), 0, None)
    return wx * wy


@dataclass(frozen=True)
class ZoneModel:
    zones: tuple[Zone, ...]

    def __post_init__(self):
        if not self.zones:
            raise ValueError("need at least one zone")
        object.__setattr__(self, "zones", tuple(self.zones))

    @property
    def probabilities(self) -> np.ndarray:
        a = np.array([z.aadt for z in self.zones])
        return a / a.sum()

    def check_tiles(self, region: Region, tol: float = 1e-9) -> None:
        rects = np.array([z.rect for z in self.zones])
        if rects[:, [0, 1]].min() < -tol or rects[:, 2].max() > region.width + tol or rects[:, 3].max() > region.height + tol:
            raise ValueError("zones extend outside the region")
        for i in range(len(rects)):
            if np.any(_overlap(rects[i + 1:], rects[i]) > tol * region.area):
                raise ValueError("zones overlap")
        if abs(sum(z.area for z in self.zones) - region.area) > tol * region.area:
            raise ValueError("zones do not cover the region")


def zone_weight_map(zones: ZoneModel, spec: GridSpec, region: Region) -> WeightGrid:
    """Zone probability spread uniformly over each zone's area."""
    zones.check_tiles(region)
    pts = make_grid(region, spec)
    rects = np.array([z.rect for z in zones.zones])
    inside = ((pts[:, None, 0] >= rects[None, :, 0]) & (pts[:, None, 0] <= rects[None, :, 2])
              & (pts[:, None, 1] >= rects[None, :, 1]) & (pts[:, None, 1] <= rects[None, :, 3]))
    orphan = ~inside.any(1)
    if orphan.any():
        raise ValueError(f"grid point {pts[np.argmax(orphan)]} lies in no zone")
    boxes = cell_boxes(region, spec)
    raw = np.zeros(len(pts))
    for z, p in zip(zones.zones, zones.probabilities):
        raw += p * _overlap(boxes, z.rect) / z.area
    return _normalized(spec, region, raw)


def adjust_scenario(aadt: Sequence[float], zone_index: int, pct: float) -> np.ndarray:
    """Scale one zone by ``1 + pct`` and take the change from the others pro rata.

    ``zone_index`` is 0-based. The total is preserved.
    """
    base = np.asarray(aadt, dtype=float)
    if base.ndim != 1 or base.size < 2 or np.any(base <= 0):
        raise ValueError("need at least two positive zone values")
    if not 0 <= zone_index < base.size:
        raise ValueError(f"zone index {zone_index} out of range")
    change = base[zone_index] * pct
    others = np.arange(base.size) != zone_index
    out = base.copy()
    out[zone_index] += change
    out[others] -= change * base[others] / base[others].sum()
    if np.any(out <= 0):
        raise ValueError("adjustment drives a zone to a non-positive value")
    return out


def scenario_table(aadt: Sequence[float], pct: float) -> list[np.ndarray]:
    """Each zone adjusted up then down by ``pct``, in zone order."""
    rows = []
    for z in range(len(aadt)):
        rows.append(adjust_scenario(aadt, z, pct))
        rows.append(adjust_scenario(aadt, z, -pct))
    return rows


def sample_points(w: WeightGrid, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draw ``size`` points: a cell by weight, then uniform within it (centers) or the node."""
    idx = rng.choice(w.grid.count, size=size, p=w.weights)
    pts = make_grid(w.region, w.grid)[idx]
    if w.grid.mode is GridMode.CENTERS:
        step = np.array([w.region.width, w.region.height]) / w.grid.divisions
        pts = pts + (rng.random((size, 2)) - 0.5) * step
    return pts


def sample_point(w: WeightGrid, rng: np.random.Generator) -> np.ndarray:
    return sample_points(w, rng, 1)[0]


class _Sampler:
    """Cached cumulative weights for repeated fast sampling from one grid."""

    def __init__(self, w: WeightGrid):
        self.w = w
        self.pts = make_grid(w.region, w.grid)
        self.cdf = np.cumsum(w.weights)
        self.cdf[-1] = 1.0
        self.centers = w.grid.mode is GridMode.CENTERS
        self.step = np.array([w.region.width, w.region.height]) / w.grid.divisions

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.w.grid.count == 1:
            pts = np.repeat(self.pts, size, axis=0)
        else:
            idx = np.searchsorted(self.cdf, rng.random(size), side="right")
            pts = self.pts[np.minimum(idx, len(self.pts) - 1)]
        if self.centers:
            pts = pts + (rng.random((size, 2)) - 0.5) * self.step
        return pts


@dataclass(frozen=True, eq=False)
class DemandPairSet:
    customers: np.ndarray
    providers: np.ndarray
    weights: np.ndarray
    reduced: bool = False

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(self.customers) != len(w) or len(self.providers) != len(w):
            raise ValueError("customers, providers and weights must have equal length")
        if abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise ValueError(f"pair weights must sum to 1, got {w.sum()!r}")

    def __len__(self) -> int:
        return len(self.weights)


def build_demand_pairs(cust: WeightGrid, prov: WeightGrid, reduce: bool = False) -> DemandPairSet:
    xc, xp = cust.points, prov.points
    if reduce:
        if not cust.same_distribution(prov):
            raise ValueError("pair reduction needs identical customer and provider distributions")
        i, j = np.triu_indices(len(xc))
        w = cust.weights[i] * cust.weights[j] * np.where(i == j, 1.0, 2.0)
        return DemandPairSet(xc[i], xc[j], w, reduced=True)
    i, j = np.meshgrid(np.arange(len(xc)), np.arange(len(xp)), indexing="ij")
    i, j = i.ravel(), j.ravel()
    return DemandPairSet(xc[i], xp[j], cust.weights[i] * prov.weights[j], reduced=False)


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------


def read_incidents_csv(path: str | Path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"x", "y"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: expected header x,y")
        rows = [(float(r["x"]), float(r["y"])) for r in reader]
    return np.array(rows, dtype=float).reshape(-1, 2)


def write_incidents_csv(pts: np.ndarray, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["x", "y"])
        wr.writerows(np.asarray(pts).tolist())


def write_weight_grid_csv(w: WeightGrid, path: str | Path) -> None:
    pts = w.points
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["i", "j", "x", "y", "weight"])
        for k, (p, wt) in enumerate(zip(pts, w.weights)):
            wr.writerow([k // w.grid.side, k % w.grid.side, repr(float(p[0])), repr(float(p[1])), repr(float(wt))])


def read_weight_grid_csv(path: str | Path, spec: GridSpec, region: Region) -> WeightGrid:
    """Load weights written by :func:`write_weight_grid_csv`; the layout must match ``spec``."""
    weights = np.full(spec.count, np.nan)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["i", "j", "x", "y", "weight"]:
            raise ValueError(f"{path}: expected header i,j,x,y,weight")
        for r in reader:
            i, j = int(r["i"]), int(r["j"])
            if not (0 <= i < spec.side and 0 <= j < spec.side):
                raise ValueError(f"{path}: cell ({i},{j}) outside a {spec.side}x{spec.side} grid")
            weights[i * spec.side + j] = float(r["weight"])
    if np.isnan(weights).any():
        raise ValueError(f"{path}: missing cells")
    return WeightGrid(spec, region, weights)


def read_zones_json(path: str | Path) -> ZoneModel:
    data = json.loads(Path(path).read_text())
    if not isinstance(data, list):
        raise ValueError(f"{path}: expected a list of zones")
    try:
        return ZoneModel(tuple(Zone(tuple(z["rect"]), float(z["aadt"])) for z in data))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path}: each zone needs 'rect' and 'aadt'") from exc
