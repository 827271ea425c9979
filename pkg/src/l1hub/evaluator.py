"""Objective estimation for arbitrary hub sets.

Monte Carlo draws are made in fixed-size chunks, each from its own
substream of the root seed, and reduced in chunk order. Results therefore
do not depend on the number of worker threads.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import TextIO

import numpy as np

from .spatial import (
    DemandPairSet,
    GridMode,
    GridSpec,
    WeightGrid,
    _Sampler,
    build_demand_pairs,
    continuous_uniform,
    make_grid,
)

CHUNK = 16384


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    samples: int

    def __post_init__(self):
        if self.samples < 1 or not self.stderr >= 0:
            raise ValueError("an estimate needs samples >= 1 and stderr >= 0")

    def to_dict(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "samples": self.samples}


@dataclass(frozen=True, eq=False)
class MultiProviderScenario:
    """A customer distribution and ``W`` i.i.d. providers."""

    provider_count: int = 1
    provider_dist: WeightGrid | None = None
    customer_dist: WeightGrid | None = None

    def __post_init__(self):
        if int(self.provider_count) != self.provider_count or self.provider_count < 1:
            raise ValueError("provider count must be a positive integer")
        if self.provider_dist is None:
            object.__setattr__(self, "provider_dist", continuous_uniform())
        if self.customer_dist is None:
            object.__setattr__(self, "customer_dist", continuous_uniform())
        if self.provider_dist.region != self.customer_dist.region:
            raise ValueError("customer and provider distributions must share a region")

    @property
    def region(self):
        return self.customer_dist.region


def _hub_array(hubs) -> np.ndarray:
    h = np.asarray(hubs, dtype=float)
    if h.size == 0:
        raise ValueError("need at least one hub")
    return h.reshape(-1, 2)


def g_values(customer, providers, hubs) -> np.ndarray:
    """Per hub, the shortest customer-hub-provider trip over all providers."""
    y = np.asarray(providers, dtype=float).reshape(-1, 2)
    if len(y) == 0:
        raise ValueError("need at least one provider")
    h = _hub_array(hubs)
    x = np.asarray(customer, dtype=float).reshape(2)
    dc = np.abs(x - h).sum(1)
    dp = np.abs(y[:, None, :] - h[None]).sum(-1).min(0)
    return dc + dp


def trip_lengths(hubs, customers: np.ndarray, providers: np.ndarray) -> np.ndarray:
    """Per-sample objective for customers ``(m, 2)`` and providers ``(m, W, 2)``."""
    h = _hub_array(hubs)
    dc = np.abs(customers[:, None, :] - h[None]).sum(-1)
    dp = np.abs(providers[:, :, None, :] - h[None, None]).sum(-1).min(1)
    return (dc + dp).min(1)


def draw_samples(scen: MultiProviderScenario, size: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    cust = _Sampler(scen.customer_dist).draw(rng, size)
    prov = _Sampler(scen.provider_dist).draw(rng, size * scen.provider_count)
    return cust, prov.reshape(size, scen.provider_count, 2)


def chunk_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _chunk_stats(hubs, scen, seed, index, size):
    cust, prov = draw_samples(scen, size, chunk_rng(seed, index))
    vals = trip_lengths(hubs, cust, prov)
    mean = vals.mean()
    return size, mean, float(((vals - mean) ** 2).sum())


def _combine(parts) -> tuple[int, float, float]:
    # Pairwise-update of count, mean and sum of squared deviations, in order.
    n, mean, m2 = 0, 0.0, 0.0
    for nb, mb, m2b in parts:
        tot = n + nb
        delta = mb - mean
        mean += delta * nb / tot
        m2 += m2b + delta * delta * n * nb / tot
        n = tot
    return n, mean, m2


def mc_objective(hubs, scen: MultiProviderScenario, samples: int, rng_seed: int, workers: int = 1) -> Estimate:
    """Monte Carlo estimate of the expected shortest trip."""
    h = _hub_array(hubs)
    if samples < 2:
        raise ValueError("need at least two samples")
    sizes = [CHUNK] * (samples // CHUNK) + ([samples % CHUNK] if samples % CHUNK else [])
    jobs = [(h, scen, rng_seed, i, s) for i, s in enumerate(sizes)]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(lambda a: _chunk_stats(*a), jobs))
    else:
        parts = [_chunk_stats(*a) for a in jobs]
    n, mean, m2 = _combine(parts)
    return Estimate(float(mean), float(np.sqrt(m2 / (n - 1) / n)), n)


def pair_objective(hubs, pairs: DemandPairSet) -> float:
    """Weighted mean over demand pairs of the shortest trip."""
    h = _hub_array(hubs)
    total = 0.0
    for s in range(0, len(pairs), CHUNK):
        x, y = pairs.customers[s:s + CHUNK], pairs.providers[s:s + CHUNK]
        d = (np.abs(x[:, None] - h[None]).sum(-1) + np.abs(y[:, None] - h[None]).sum(-1)).min(1)
        total += float(d @ pairs.weights[s:s + CHUNK])
    return total


def quadrature_objective(hubs, cust: WeightGrid, prov: WeightGrid, reduce: bool | None = None) -> float:
    """Exact expectation when customers and providers sit on grid atoms.

    ``reduce=None`` reduces to unordered pairs whenever the two grids match.
    """
    if reduce is None:
        reduce = cust.same_distribution(prov)
    return pair_objective(hubs, build_demand_pairs(cust, prov, reduce))


@dataclass(frozen=True, eq=False)
class ContourField:
    grid: GridSpec
    points: np.ndarray
    values: np.ndarray

    def write_csv(self, dest: str | Path | TextIO) -> None:
        """Write to a path or an open text stream."""
        if isinstance(dest, (str, Path)):
            with open(dest, "w", newline="") as fh:
                self.write_csv(fh)
            return
        side = self.grid.side
        wr = csv.writer(dest, lineterminator="\n")
        wr.writerow(["i", "j", "x", "y", "mean_distance"])
        for k, (p, v) in enumerate(zip(self.points, self.values)):
            wr.writerow([k // side, k % side, repr(float(p[0])), repr(float(p[1])), repr(float(v))])


def contour_map(hubs, scen: MultiProviderScenario, resolution: GridSpec, samples_per_cell: int, rng_seed: int) -> ContourField:
    """Mean shortest trip for a customer fixed at each cell center.

    The same provider draws are reused for every cell, so differences
    between neighbouring cells carry no sampling noise.
    """
    if samples_per_cell < 1:
        raise ValueError("need at least one sample per cell")
    h = _hub_array(hubs)
    spec = GridSpec(resolution.divisions, GridMode.CENTERS) if resolution.mode is not GridMode.CENTERS else resolution
    pts = make_grid(scen.region, spec)
    rng = chunk_rng(rng_seed, 0)
    prov = _Sampler(scen.provider_dist).draw(rng, samples_per_cell * scen.provider_count)
    prov = prov.reshape(samples_per_cell, scen.provider_count, 2)
    leg = np.abs(prov[:, :, None, :] - h[None, None]).sum(-1).min(1)  # (samples, hubs)
    dc = np.abs(pts[:, None, :] - h[None]).sum(-1)  # (cells, hubs)
    vals = np.empty(len(pts))
    for s in range(0, len(pts), 256):
        vals[s:s + 256] = (dc[s:s + 256, None, :] + leg[None]).min(-1).mean(1)
    return ContourField(spec, pts, vals)

