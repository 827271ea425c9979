"""SPSA refinement of hub locations with Monte Carlo objective estimates."""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .evaluator import Estimate, MultiProviderScenario, draw_samples, mc_objective, trip_lengths
from .solution import HubSolution


class Classification(str, Enum):
    CONVERGED = "Converged"
    ITER_LIMIT = "IterLimit"
    WORSE_THAN_INIT = "WorseThanInit"
    OUT_OF_REGION = "OutOfRegion"


@dataclass(frozen=True)
class SpsaConfig:
    step: float = 0.02
    max_iter: int = 500
    eval_samples: int = 10_000
    alpha: float = 0.602
    gamma: float = 0.101
    stability: float | None = None  # defaults to 0.1 * max_iter
    perturbation: float | None = None  # calibrated from objective noise when None
    trials: int = 20
    rng_seed: int = 0
    verify_samples: int = 10_000_000
    stop_tol: float = 1e-3
    stop_window: int = 10
    calibration_draws: int = 10
    noise_draws: int = 20
    clamp: bool = False

    def __post_init__(self):
        if not 0 < self.gamma < self.alpha <= 1:
            raise ValueError("need 0 < gamma < alpha <= 1")
        if not self.step > 0:
            raise ValueError("step must be positive")
        if self.max_iter < 1 or self.trials < 1 or self.eval_samples < 2:
            raise ValueError("max_iter, trials and eval_samples must be positive")

    @property
    def A(self) -> float:
        return 0.1 * self.max_iter if self.stability is None else float(self.stability)


def gain_a(a: float, k: int, cfg: SpsaConfig) -> float:
    return a / (cfg.A + k + 1) ** cfg.alpha


def gain_c(c: float, k: int, cfg: SpsaConfig) -> float:
    return c / (k + 1) ** cfg.gamma


def _estimate(theta: np.ndarray, cust: np.ndarray, prov: np.ndarray) -> float:
    return float(trip_lengths(theta.reshape(-1, 2), cust, prov).mean())


def spsa_gradient(theta: np.ndarray, c_k: float, scen: MultiProviderScenario, eval_samples: int,
                  rng: np.random.Generator, objective=None) -> tuple[np.ndarray, np.ndarray]:
    """Two-evaluation gradient estimate and the perturbation used.

    Both evaluations share one Monte Carlo sample set. ``objective``, if
    given, replaces the Monte Carlo estimate (a callable of ``theta`` only).
    """
    if not c_k > 0:
        raise ValueError("perturbation size must be positive")
    theta = np.asarray(theta, dtype=float).ravel()
    delta = rng.choice(np.array([-1.0, 1.0]), size=theta.size)
    if objective is None:
        cust, prov = draw_samples(scen, eval_samples, rng)
        y_plus = _estimate(theta + c_k * delta, cust, prov)
        y_minus = _estimate(theta - c_k * delta, cust, prov)
    else:
        y_plus, y_minus = objective(theta + c_k * delta), objective(theta - c_k * delta)
    return (y_plus - y_minus) / (2.0 * c_k) / delta, delta


@dataclass(frozen=True, eq=False)
class SpsaRunResult:
    final_iterate: np.ndarray
    final_estimate: Estimate
    initial_estimate: Estimate
    iterations_used: int
    classification: Classification
    trajectory: np.ndarray
    gain_a: float = 0.0
    gain_c: float = 0.0
    final_verification: Estimate | None = None

    @property
    def converged(self) -> bool:
        return self.classification is Classification.CONVERGED

    def to_dict(self) -> dict:
        return {
            "classification": self.classification.value,
            "iterations": self.iterations_used,
            "final_hubs": self.final_iterate.tolist(),
            "initial_estimate": self.initial_estimate.to_dict(),
            "final_estimate": self.final_estimate.to_dict(),
            "final_verification": None if self.final_verification is None else self.final_verification.to_dict(),
        }


def _inside(theta: np.ndarray, scen: MultiProviderScenario) -> bool:
    h = theta.reshape(-1, 2)
    r = scen.region
    return bool(np.all((h[:, 0] >= 0) & (h[:, 0] <= r.width) & (h[:, 1] >= 0) & (h[:, 1] <= r.height)))


def _clip(theta: np.ndarray, scen: MultiProviderScenario) -> np.ndarray:
    h = theta.reshape(-1, 2).copy()
    h[:, 0] = np.clip(h[:, 0], 0, scen.region.width)
    h[:, 1] = np.clip(h[:, 1], 0, scen.region.height)
    return h.ravel()


def spsa_refine(init: HubSolution | np.ndarray, cfg: SpsaConfig, scen: MultiProviderScenario,
                rng_seed: int | None = None, objective=None) -> SpsaRunResult:
    """One SPSA run from ``init``; ``objective`` optionally replaces Monte Carlo (for testing)."""
    theta0 = (init.as_array() if isinstance(init, HubSolution) else np.asarray(init, dtype=float)).ravel()
    if theta0.size < 2 or theta0.size % 2:
        raise ValueError("initial hubs must be 2D points")
    seed = cfg.rng_seed if rng_seed is None else rng_seed
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))
    est_seed = int(np.random.SeedSequence(seed, spawn_key=(1,)).generate_state(1)[0])

    def estimate(theta) -> Estimate:
        if objective is not None:
            return Estimate(float(objective(theta)), 0.0, cfg.eval_samples)
        return mc_objective(theta.reshape(-1, 2), scen, cfg.eval_samples, est_seed)

    # Perturbation size: spread of the objective estimate at the start.
    if cfg.perturbation is not None:
        c = float(cfg.perturbation)
    elif objective is not None:
        c = 1e-3
    else:
        reps = [_estimate(theta0, *draw_samples(scen, cfg.eval_samples, rng)) for _ in range(cfg.noise_draws)]
        c = max(float(np.std(reps, ddof=1)), 1e-3)

    # Step size: first expected move about cfg.step per coordinate. The
    # gradient is sampled one step away from the start, so a start sitting
    # near a stationary point does not inflate the gain past the curvature.
    grads = []
    for _ in range(cfg.calibration_draws):
        probe = theta0 + cfg.step * rng.choice(np.array([-1.0, 1.0]), size=theta0.size)
        grads.append(spsa_gradient(probe, c, scen, cfg.eval_samples, rng, objective)[0])
    grads = np.array(grads)
    mag = float(np.median(np.abs(grads).mean(0)))
    a = cfg.step * (cfg.A + 1) ** cfg.alpha / max(mag, 1e-12)

    theta = theta0.copy()
    traj = [theta.copy()]
    quiet = 0
    used = cfg.max_iter
    for k in range(cfg.max_iter):
        g, _ = spsa_gradient(theta, gain_c(c, k, cfg), scen, cfg.eval_samples, rng, objective)
        new = theta - gain_a(a, k, cfg) * g
        if cfg.clamp:
            new = _clip(new, scen)
        change = float(np.max(np.abs(new - theta)))
        theta = new
        traj.append(theta.copy())
        quiet = quiet + 1 if change < cfg.stop_tol else 0
        if quiet >= cfg.stop_window:
            used = k + 1
            break

    initial, final = estimate(theta0), estimate(theta)
    if not _inside(theta, scen):
        cls = Classification.OUT_OF_REGION
    elif final.mean > initial.mean:
        cls = Classification.WORSE_THAN_INIT
    elif used >= cfg.max_iter:
        cls = Classification.ITER_LIMIT
    else:
        cls = Classification.CONVERGED
    return SpsaRunResult(theta.reshape(-1, 2), final, initial, used, cls, np.array(traj), a, c)


@dataclass(frozen=True, eq=False)
class SpsaReport:
    runs: list[SpsaRunResult]
    unconverged: dict[str, int]
    converged_mean: float | None
    best: HubSolution | None
    verification_seed: int = 0

    @property
    def converged_count(self) -> int:
        return sum(r.converged for r in self.runs)

    def to_dict(self) -> dict:
        return {
            "trials": [r.to_dict() for r in self.runs],
            "summary": {
                "converged": self.converged_count,
                "converged_mean": self.converged_mean,
                "best": None if self.best is None else self.best.to_dict(),
                "unconverged": self.unconverged,
            },
        }


def random_starts(n: int, trials: int, scen: MultiProviderScenario, rng_seed: int) -> list[np.ndarray]:
    """Hub sets drawn uniformly over the region, one per trial."""
    if n < 1 or trials < 1:
        raise ValueError("need n >= 1 and trials >= 1")
    rng = np.random.default_rng(np.random.SeedSequence(rng_seed, spawn_key=(3,)))
    r = scen.region
    return [rng.uniform((0.0, 0.0), (r.width, r.height), size=(n, 2)) for _ in range(trials)]


def run_trials(init, cfg: SpsaConfig, scen: MultiProviderScenario,
               workers: int = 1, objective=None) -> SpsaReport:
    """Independent refinements; converged ones are re-scored at ``cfg.verify_samples``.

    ``init`` is one start shared by all trials or a list with one start per
    trial. Every converged result is verified with the same sample seed, so
    their comparison is free of between-trial sampling noise.
    """
    if isinstance(init, (list, tuple)):
        if len(init) != cfg.trials:
            raise ValueError("need one start per trial")
        starts = list(init)
    else:
        starts = [init] * cfg.trials
    seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(cfg.rng_seed).spawn(cfg.trials)]
    verify_seed = int(np.random.SeedSequence(cfg.rng_seed, spawn_key=(2**31,)).generate_state(1)[0])

    def one(job):
        start, seed = job
        res = spsa_refine(start, cfg, scen, seed, objective)
        if res.converged and objective is None:
            ver = mc_objective(res.final_iterate, scen, cfg.verify_samples, verify_seed)
            res = replace(res, final_verification=ver)
        return res

    if workers > 1 and cfg.trials > 1:
        with ThreadPoolExecutor(workers) as ex:
            runs = list(ex.map(one, zip(starts, seeds)))
    else:
        runs = [one(j) for j in zip(starts, seeds)]

    counts = Counter(r.classification.value for r in runs if not r.converged)
    conv = [r for r in runs if r.converged]
    if conv:
        scores = [r.final_verification.mean if r.final_verification else r.final_estimate.mean for r in conv]
        i = int(np.argmin(scores))
        best = HubSolution(tuple(map(tuple, conv[i].final_iterate)), scores[i], method="spsa",
                           iterations=conv[i].iterations_used)
        mean = float(np.mean(scores))
    else:
        best, mean = None, None
    unconverged = {c.value: counts.get(c.value, 0) for c in Classification if c is not Classification.CONVERGED}
    return SpsaReport(runs, unconverged, mean, best, verify_seed)
