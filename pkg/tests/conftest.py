import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_criteria: dict[int, dict] = {}
# Wall-clock seconds spent building each shared fixture.
FIXTURE_SECONDS: dict[str, float] = {}


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("acceptance")
    if mark is None or call.when not in ("setup", "call"):
        return
    number, title = mark.args
    entry = _criteria.setdefault(number, {"title": title, "ok": True, "tests": []})
    if call.when == "setup" and call.excinfo is None:
        return
    failed = call.excinfo is not None
    if call.when == "call" or failed:
        entry["tests"].append(item.name)
        entry["ok"] = entry["ok"] and not failed


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        e = _criteria[number]
        status = "PASS" if e["ok"] and e["tests"] else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} {status}  {e['title']}")


@pytest.fixture(scope="session")
def square_instance():
    """d=10 uniform demand nodes, d=20 solution nodes, n=2."""
    from l1hub.pmedian import build_instance
    from l1hub.spatial import GridMode, GridSpec, Region, uniform_weights

    t = time.perf_counter()
    w = uniform_weights(GridSpec(10, GridMode.NODES), Region())
    inst = build_instance(w, w, GridSpec(20, GridMode.NODES), 2)
    FIXTURE_SECONDS["square_instance"] = time.perf_counter() - t
    return inst


@pytest.fixture(scope="session")
def square_benders(square_instance):
    from l1hub.pmedian import solve_benders

    t = time.perf_counter()
    res = solve_benders(square_instance)
    FIXTURE_SECONDS["square_benders"] = time.perf_counter() - t
    return res


@pytest.fixture(scope="session")
def spsa_benders_1e5(square_instance, square_benders):
    """Twenty SPSA trials from the discrete two-hub optimum at 1e5 samples per iteration."""
    from l1hub.evaluator import MultiProviderScenario
    from l1hub.spsa import SpsaConfig, run_trials

    t = time.perf_counter()
    cfg = SpsaConfig(step=0.02, eval_samples=100_000, trials=20, rng_seed=5)
    rep = run_trials(square_benders.to_solution(square_instance), cfg, MultiProviderScenario())
    FIXTURE_SECONDS["spsa_benders_1e5"] = time.perf_counter() - t
    return rep
