"""Command-line entry point.

Exit codes: 0 on success, 2 for usage, parse or input errors, 3 when a
numerical step that must succeed does not.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any

import numpy as np

from .analytic import closed_form_1d, exact_one_hub_2d, exact_two_hub_2d
from .evaluator import MultiProviderScenario, contour_map, mc_objective
from .metric import f_n_1d
from .pmedian import build_instance, build_multiprovider_instance, coarse_warm_start, solve_benders
from .solution import HubSolution, load_solution, save_solution
from .spatial import (
    GridMode,
    GridSpec,
    Region,
    WeightGrid,
    adjust_scenario,
    continuous_uniform,
    kde_weight_map,
    read_incidents_csv,
    read_weight_grid_csv,
    read_zones_json,
    scenario_table,
    uniform_weights,
    write_weight_grid_csv,
    zone_weight_map,
)
from .spsa import SpsaConfig, run_trials

EXIT_USAGE = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


class NumericalFailure(Exception):
    pass


def _emit(obj: Any, out: str | None = None) -> None:
    text = json.dumps(obj, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    print(text)


def _need_seed(seed: int | None, what: str) -> int:
    if seed is None:
        raise UsageError(f"{what} uses random numbers; pass an explicit seed")
    return int(seed)


# ---------------------------------------------------------------------------
# Run configuration
# ---------------------------------------------------------------------------


def _grid(d: dict | None, default_div: int, default_mode: str) -> GridSpec:
    d = d or {}
    return GridSpec(int(d.get("divisions", default_div)), GridMode(d.get("mode", default_mode)))


class RunConfig:
    """Parsed ``solve`` configuration; relative paths resolve against the file's folder."""

    KEYS = {"region", "demand_grid", "solution_grid", "n", "providers", "customers", "provider_weights",
            "benders", "spsa", "seed", "output", "report"}

    def __init__(self, data: dict, base: Path = Path(".")):
        if not isinstance(data, dict):
            raise UsageError("configuration must be a JSON object")
        unknown = set(data) - self.KEYS
        if unknown:
            raise UsageError(f"unknown configuration keys: {sorted(unknown)}")
        self.base = base
        r = data.get("region", {})
        self.region = Region(float(r.get("width", 1.0)), float(r.get("height", 1.0)))
        self.demand_grid = _grid(data.get("demand_grid"), 10, "nodes")
        self.solution_grid = _grid(data.get("solution_grid"), 20, "nodes")
        if "n" not in data:
            raise UsageError("configuration needs 'n'")
        self.n = int(data["n"])
        if self.n < 1:
            raise UsageError("n must be at least 1")
        self.providers = int(data.get("providers", 1))
        self.customers = data.get("customers", {"source": "uniform"})
        self.provider_weights = data.get("provider_weights", self.customers)
        self.benders = data.get("benders", {})
        self.spsa = data.get("spsa", {})
        self.seed = data.get("seed")
        self.output = data.get("output")
        self.report = data.get("report")

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        p = Path(path)
        if not p.is_file():
            raise UsageError(f"configuration file not found: {p}")
        try:
            data = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"{p}: invalid JSON ({exc})") from exc
        return cls(data, p.parent)

    def _path(self, name: str) -> Path:
        p = Path(name)
        return p if p.is_absolute() else self.base / p

    def _weights(self, src: dict) -> WeightGrid | None:
        """Discrete weights on the demand grid, or None for the uniform source."""
        kind = src.get("source", "uniform")
        if kind == "uniform":
            return None
        if kind == "kde":
            pts = read_incidents_csv(self._path(src["incidents"]))
            return kde_weight_map(pts, src.get("bandwidth"), self.demand_grid, self.region)
        if kind == "zones":
            zones = read_zones_json(self._path(src["file"]))
            zones.check_tiles(self.region)
            return zone_weight_map(zones, self.demand_grid, self.region)
        if kind == "grid":
            return read_weight_grid_csv(self._path(src["file"]), self.demand_grid, self.region)
        raise UsageError(f"unknown weight source {kind!r}")

    def distributions(self) -> tuple[WeightGrid, WeightGrid, MultiProviderScenario]:
        """Demand-grid weights for the discrete stage and the scenario for sampling."""
        cust, prov = self._weights(self.customers), self._weights(self.provider_weights)
        scen = MultiProviderScenario(
            self.providers,
            provider_dist=prov if prov is not None else continuous_uniform(self.region),
            customer_dist=cust if cust is not None else continuous_uniform(self.region),
        )
        cust = cust if cust is not None else uniform_weights(self.demand_grid, self.region)
        prov = prov if prov is not None else uniform_weights(self.demand_grid, self.region)
        return cust, prov, scen

    def spsa_config(self, seed: int, **overrides) -> SpsaConfig:
        opts = dict(self.spsa)
        opts.update({k: v for k, v in overrides.items() if v is not None})
        opts["rng_seed"] = seed
        try:
            return SpsaConfig(**opts)
        except TypeError as exc:
            raise UsageError(f"bad spsa settings: {exc}") from exc


def _scenario_from(args) -> MultiProviderScenario:
    if args.config:
        _, _, scen = RunConfig.load(args.config).distributions()
        if args.W is not None:
            scen = MultiProviderScenario(args.W, scen.provider_dist, scen.customer_dist)
        return scen
    return MultiProviderScenario(args.W or 1)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_solve1d(args) -> int:
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    cfg = closed_form_1d(args.n)
    value = f_n_1d(cfg)
    if args.json:
        _emit(HubSolution(tuple((p,) for p in cfg.positions), value, method="closed-form-1d").to_dict())
    else:
        print("positions", " ".join(f"{p:.6f}" for p in cfg.positions))
        print(f"value {value:.6f}")
    return 0


def cmd_exact2d(args) -> int:
    if args.hubs == 1:
        if args.a != 1.0:
            raise UsageError("the one-hub solve is for the unit square only")
        sol = exact_one_hub_2d()
    else:
        seed = _need_seed(args.seed, "exact2d --hubs 2")
        sol = exact_two_hub_2d(args.a, starts=args.starts, rng_seed=seed).best
    if args.out:
        save_solution(sol, args.out)
    print(json.dumps(sol.to_dict(), indent=2))
    return 0


def _refine(init: HubSolution, cfg: SpsaConfig, scen: MultiProviderScenario, threads: int, report: str | None):
    rep = run_trials(init, cfg, scen, workers=threads)
    if report:
        Path(report).write_text(json.dumps(rep.to_dict(), indent=2) + "\n")
    if rep.best is None:
        raise NumericalFailure(f"no SPSA trial converged: {rep.unconverged}")
    print(f"spsa: {rep.converged_count}/{len(rep.runs)} converged", file=sys.stderr)
    return rep.best


def cmd_solve(args) -> int:
    rc = RunConfig.load(args.config)
    cust, prov, scen = rc.distributions()
    seed = args.seed if args.seed is not None else rc.seed
    warm_kind = rc.benders.get("warm", "coarse")
    if warm_kind not in ("coarse", "greedy"):
        raise UsageError(f"benders.warm must be 'coarse' or 'greedy', got {warm_kind!r}")
    warm = None
    if rc.providers > 1:
        seed = _need_seed(seed, "a multi-provider solve")
        samples = int(rc.benders.get("samples", 3000))
        inst = build_multiprovider_instance(samples, scen, rc.solution_grid, rc.n, seed)
    else:
        inst = build_instance(cust, prov, rc.solution_grid, rc.n, reduce=cust.same_distribution(prov))
        if warm_kind == "coarse" and cust.grid.divisions > 5:
            warm = coarse_warm_start(cust, prov, rc.solution_grid, rc.n)
    res = solve_benders(inst, warm=warm, tol=float(rc.benders.get("tol", 1e-6)))
    sol = res.to_solution(inst)
    print(f"benders: objective {sol.objective:.10f}, {res.nodes} nodes, {res.cuts} cuts", file=sys.stderr)
    if args.refine:
        seed = _need_seed(seed, "--refine")
        cfg = rc.spsa_config(seed, eval_samples=args.samples, trials=args.trials, step=args.step)
        sol = _refine(sol, cfg, scen, args.threads, args.report or rc.report)
    out = args.out or rc.output
    if out:
        save_solution(sol, out)
    print(json.dumps(sol.to_dict(), indent=2))
    return 0


def cmd_refine(args) -> int:
    init = _load(args.solution)
    scen = _scenario_from(args)
    seed = _need_seed(args.seed, "refine")
    opts = {"step": args.step, "eval_samples": args.samples, "trials": args.trials, "rng_seed": seed}
    if args.verify_samples is not None:
        opts["verify_samples"] = args.verify_samples
    sol = _refine(init, SpsaConfig(**opts), scen, args.threads, args.report)
    if args.out:
        save_solution(sol, args.out)
    print(json.dumps(sol.to_dict(), indent=2))
    return 0


def _load(path: str) -> HubSolution:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"solution file not found: {p}")
    try:
        return load_solution(p)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{p}: invalid JSON ({exc})") from exc


def cmd_evaluate(args) -> int:
    sol = _load(args.solution)
    seed = _need_seed(args.seed, "evaluate")
    est = mc_objective(sol.as_array(), _scenario_from(args), args.samples, seed, workers=args.threads)
    _emit(est.to_dict(), args.out)
    return 0


def cmd_contour(args) -> int:
    sol = _load(args.solution)
    seed = _need_seed(args.seed, "contour")
    field = contour_map(sol.as_array(), _scenario_from(args), GridSpec(args.resolution, GridMode.CENTERS),
                        args.samples_per_cell, seed)
    field.write_csv(args.out if args.out else sys.stdout)
    return 0


def cmd_kde(args) -> int:
    p = Path(args.incidents)
    if not p.is_file():
        raise UsageError(f"incident file not found: {p}")
    region = Region(args.width, args.height)
    w = kde_weight_map(read_incidents_csv(p), args.bandwidth, GridSpec(args.divisions, GridMode(args.mode)), region)
    write_weight_grid_csv(w, args.out)
    print(f"wrote {w.grid.count} cells to {args.out}", file=sys.stderr)
    return 0


def _ints(values) -> str:
    return ",".join(str(int(v)) for v in np.rint(values))


def cmd_scenario(args) -> int:
    try:
        aadt = [float(v) for v in args.aadt.split(",")]
    except ValueError as exc:
        raise UsageError(f"--aadt must be comma-separated numbers ({exc})") from exc
    if args.zone is not None:
        if not 1 <= args.zone <= len(aadt):
            raise UsageError(f"--zone must be between 1 and {len(aadt)}")
        print(_ints(adjust_scenario(aadt, args.zone - 1, args.pct)))
    else:
        for k, row in enumerate(scenario_table(aadt, args.pct)):
            print(f"zone {k // 2 + 1} {'+' if k % 2 == 0 else '-'}: {_ints(row)}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="l1hub", description="Hub location under the Manhattan metric.")
    ap.add_argument("--threads", type=_positive_int, default=1, help="worker cap; results do not depend on it")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve1d", help="closed-form hubs on the unit segment")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_solve1d)

    p = sub.add_parser("exact2d", help="exact one- or two-hub solve on a 1 x a rectangle")
    p.add_argument("--hubs", type=int, choices=(1, 2), required=True)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--starts", type=_positive_int, default=64)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_exact2d)

    p = sub.add_parser("solve", help="discretize and solve by Benders, optionally refine by SPSA")
    p.add_argument("config")
    p.add_argument("--refine", action="store_true")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=_positive_int, help="SPSA samples per evaluation")
    p.add_argument("--trials", type=_positive_int)
    p.add_argument("--step", type=float)
    p.add_argument("--out")
    p.add_argument("--report")
    p.set_defaults(func=cmd_solve)

    def scenario_flags(q):
        q.add_argument("--config", help="take region and distributions from a solve configuration")
        q.add_argument("--W", type=_positive_int, help="providers per demand")

    p = sub.add_parser("refine", help="SPSA trials from a solution file")
    p.add_argument("--solution", required=True)
    scenario_flags(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--step", type=float, default=0.02)
    p.add_argument("--samples", type=_positive_int, default=10_000)
    p.add_argument("--trials", type=_positive_int, default=20)
    p.add_argument("--verify-samples", type=_positive_int)
    p.add_argument("--out")
    p.add_argument("--report")
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("evaluate", help="Monte Carlo objective of a solution")
    p.add_argument("--solution", required=True)
    scenario_flags(p)
    p.add_argument("--samples", type=_positive_int, default=1_000_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("contour", help="mean trip length for a customer fixed at each cell")
    p.add_argument("--solution", required=True)
    scenario_flags(p)
    p.add_argument("--resolution", type=_positive_int, default=40)
    p.add_argument("--samples-per-cell", type=_positive_int, default=1000)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_contour)

    p = sub.add_parser("kde", help="weight grid from incident points")
    p.add_argument("--incidents", required=True)
    p.add_argument("--divisions", type=_positive_int, default=20)
    p.add_argument("--mode", choices=[m.value for m in GridMode], default="centers")
    p.add_argument("--width", type=float, default=1.0)
    p.add_argument("--height", type=float, default=1.0)
    p.add_argument("--bandwidth", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_kde)

    p = sub.add_parser("scenario", help="traffic scenarios with one zone scaled")
    p.add_argument("--aadt", required=True, help="comma-separated zone values")
    p.add_argument("--zone", type=int, help="1-based zone; omit for the full table")
    p.add_argument("--pct", type=float, default=0.10)
    p.set_defaults(func=cmd_scenario)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalFailure, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
