import io

import numpy as np
import pytest

from l1hub.evaluator import (
    Estimate,
    MultiProviderScenario,
    contour_map,
    g_values,
    mc_objective,
    quadrature_objective,
    trip_lengths,
)
from l1hub.metric import f_2_2d, travel_dist
from l1hub.spatial import GridMode, GridSpec, Region, WeightGrid, build_demand_pairs, uniform_weights
from l1hub.evaluator import pair_objective

OPT = [(0.3237, 0.3650), (0.6763, 0.6350)]


def test_estimate_validation():
    with pytest.raises(ValueError):
        Estimate(1.0, -1.0, 10)
    with pytest.raises(ValueError):
        Estimate(1.0, 0.0, 0)
    assert Estimate(1.0, 0.1, 5).to_dict() == {"mean": 1.0, "stderr": 0.1, "samples": 5}


def test_scenario_validation():
    with pytest.raises(ValueError):
        MultiProviderScenario(0)
    a = uniform_weights(GridSpec(2, GridMode.CENTERS), Region(1, 1))
    b = uniform_weights(GridSpec(2, GridMode.CENTERS), Region(2, 1))
    with pytest.raises(ValueError):
        MultiProviderScenario(1, a, b)


def test_mc_center_hub():
    est = mc_objective([(0.5, 0.5)], MultiProviderScenario(), 10**6, 1)
    assert abs(est.mean - 1.0) <= 3 * est.stderr
    assert est.samples == 10**6


def test_mc_two_hub_optimum():
    est = mc_objective(OPT, MultiProviderScenario(), 10**6, 2)
    assert abs(est.mean - f_2_2d(*OPT)) <= 3 * est.stderr
    assert abs(est.mean - 0.8746) <= 3 * est.stderr + 1e-4


def test_mc_more_providers_is_shorter():
    one = mc_objective([(0.5, 0.5)], MultiProviderScenario(1), 200_000, 3)
    five = mc_objective([(0.5, 0.5)], MultiProviderScenario(5), 200_000, 3)
    assert five.mean < one.mean - 3 * np.hypot(one.stderr, five.stderr)


def test_mc_errors():
    with pytest.raises(ValueError):
        mc_objective([], MultiProviderScenario(), 100, 0)
    with pytest.raises(ValueError):
        mc_objective([(0.5, 0.5)], MultiProviderScenario(), 1, 0)


def test_mc_deterministic_and_thread_invariant():
    scen = MultiProviderScenario(3)
    a = mc_objective(OPT, scen, 100_000, 11)
    b = mc_objective(OPT, scen, 100_000, 11, workers=4)
    assert a == b
    assert mc_objective(OPT, scen, 100_000, 12) != a


def test_mc_monotone_in_hubs_and_providers():
    rng = np.random.default_rng(4)
    hubs = rng.random((6, 2))
    prev = None
    for n in range(1, 7):
        est = mc_objective(hubs[:n], MultiProviderScenario(2), 100_000, 5)
        if prev is not None:
            assert est.mean <= prev.mean + 3 * np.hypot(est.stderr, prev.stderr)
        prev = est
    prev = None
    for w in (1, 2, 4, 8):
        est = mc_objective(hubs[:3], MultiProviderScenario(w), 100_000, 6)
        if prev is not None:
            assert est.mean <= prev.mean + 3 * np.hypot(est.stderr, prev.stderr)
        prev = est


def test_g_values_examples():
    hubs = [(0.2, 0.4), (0.9, 0.1)]
    c, p = (0.3, 0.3), [(0.7, 0.8)]
    assert g_values(c, p, hubs) == pytest.approx([travel_dist(c, p[0], h) for h in hubs])
    assert g_values((0, 0), [(0, 0), (1, 1)], [(0, 0)]).tolist() == [0.0]
    assert g_values((0.5, 0.5), [(0, 0), (1, 1)], [(0.5, 0.5)]).tolist() == [1.0]
    with pytest.raises(ValueError):
        g_values((0, 0), [], [(0, 0)])


def test_minimum_exchange():
    rng = np.random.default_rng(8)
    hubs = rng.random((4, 2))
    cust = rng.random((50, 2))
    prov = rng.random((50, 3, 2))
    direct = trip_lengths(hubs, cust, prov)
    for j in range(50):
        g = g_values(cust[j], prov[j], hubs)
        brute = min(travel_dist(cust[j], y, h) for y in prov[j] for h in hubs)
        assert g.min() == pytest.approx(brute) == pytest.approx(direct[j])


def test_quadrature_single_atoms():
    c = WeightGrid(GridSpec(1, GridMode.CENTERS), Region(), np.array([1.0]))
    p = WeightGrid(GridSpec(1, GridMode.NODES), Region(), np.array([0, 0, 1.0, 0]))  # node (1, 0)
    for h in [(0.1, 0.9), (0.5, 0.5)]:
        assert quadrature_objective([h], c, p) == pytest.approx(travel_dist((0.5, 0.5), (1.0, 0.0), h))


def test_quadrature_fine_grid_center():
    # 41 nodes per axis: E|X - 1/2| over the nodes is 21/82, so the
    # quadrature gives 4 * 21/82 = 42/41 instead of the continuous 1.
    w = uniform_weights(GridSpec(40, GridMode.NODES))
    val = quadrature_objective([(0.5, 0.5)], w, w)
    assert val == pytest.approx(42 / 41, abs=1e-12)
    # Cell-center quadrature at the same resolution is exact for one central hub.
    c = uniform_weights(GridSpec(40, GridMode.CENTERS))
    assert quadrature_objective([(0.5, 0.5)], c, c) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.xfail(strict=True, reason="40-division node quadrature of the centre hub is 42/41, "
                                      "outside the 0.01 band around 1; see the decisions ledger")
def test_quadrature_nodes_within_band():
    w = uniform_weights(GridSpec(40, GridMode.NODES))
    assert abs(quadrature_objective([(0.5, 0.5)], w, w) - 1.0) <= 0.01


def test_quadrature_matches_mc():
    w = uniform_weights(GridSpec(20, GridMode.NODES))
    rng = np.random.default_rng(10)
    # Sampling the node distribution reproduces the quadrature in expectation.
    scen = MultiProviderScenario(1, w, w)
    for t in range(10):
        hubs = rng.random((int(rng.integers(1, 4)), 2))
        q = quadrature_objective(hubs, w, w)
        est = mc_objective(hubs, scen, 200_000, 100 + t)
        assert abs(q - est.mean) <= 4 * est.stderr


def test_quadrature_reduction_consistency():
    rng = np.random.default_rng(2)
    raw = rng.random(49)
    w = WeightGrid(GridSpec(6, GridMode.NODES), Region(), raw / raw.sum())
    hubs = rng.random((3, 2))
    full = pair_objective(hubs, build_demand_pairs(w, w, False))
    assert quadrature_objective(hubs, w, w) == pytest.approx(full, abs=1e-12)
    assert quadrature_objective(hubs, w, w, reduce=False) == pytest.approx(full, abs=1e-12)
    with pytest.raises(ValueError):
        quadrature_objective([], w, w)


def test_contour_center_hub():
    spec = GridSpec(9, GridMode.CENTERS)
    field = contour_map([(0.5, 0.5)], MultiProviderScenario(), spec, 1000, 3)
    vals = field.values.reshape(9, 9)
    assert np.argmin(field.values) == 40
    # Non-decreasing along each axis-aligned ray from the hub cell.
    for ray in (vals[4, 4:], vals[4, 4::-1], vals[4:, 4], vals[4::-1, 4]):
        assert np.all(np.diff(ray) >= -1e-12)


def test_contour_many_providers():
    spec = GridSpec(5, GridMode.CENTERS)
    vals = []
    for w in (1, 10, 200):
        f = contour_map([(0.5, 0.5)], MultiProviderScenario(w), spec, 400, 4)
        vals.append(f.values[12])
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < 0.05


def test_contour_csv(tmp_path):
    f = contour_map([(0.2, 0.2)], MultiProviderScenario(), GridSpec(4, GridMode.CENTERS), 10, 1)
    buf = io.StringIO()
    f.write_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "i,j,x,y,mean_distance" and len(lines) == 17
    f.write_csv(tmp_path / "c.csv")
    assert (tmp_path / "c.csv").read_text() == buf.getvalue()
    with pytest.raises(ValueError):
        contour_map([(0.2, 0.2)], MultiProviderScenario(), GridSpec(4, GridMode.CENTERS), 0, 1)
