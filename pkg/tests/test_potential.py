import math

import numpy as np
import pytest
from scipy import stats

from heiscarleson import group as G
from heiscarleson.domains import GaugeBall
from heiscarleson.errors import PoleError, PreconditionError, ReliabilityWarning
from heiscarleson.potential import (Grid, SpherePartition, WalkConfig, assemble_sublaplacian, bmo_basepoint_invariance,
                                    bmo_norm, calibrate_cQ, fundamental_solution, green_function,
                                    harmonic_extension_mc, harmonic_measure, load_dump, log_distance_datum,
                                    simulate_exits, solve_dirichlet)
from heiscarleson.potential.bmo import default_ladder, smooth_upper_indicator
from heiscarleson.potential.grid import INTERIOR

BALL = GaugeBall()
# E[exit time] from the centre = int_B G(x, 0) dx = c_Q * (2 V_1 - V_1) = pi^2 / (2 * 8 pi)
EXIT_TIME = math.pi / 16


@pytest.fixture(scope="module")
def grid16():
    return Grid(BALL, 1.0 / 16)


def test_stencil_examples(grid16):
    op = assemble_sublaplacian(grid16)
    P = grid16.nodes()
    x = P[:, 0].reshape(grid16.shape)
    r2 = (P[:, 0] ** 2 + P[:, 1] ** 2).reshape(grid16.shape)
    assert np.max(np.abs(op.apply(x))) < 1e-9
    assert np.allclose(op.apply(r2), 4.0, atol=1e-9)


def test_solver_reproduces_constants_and_x(grid16):
    u = solve_dirichlet(grid16, lambda p: np.full(p.shape[:-1], 2.5))
    assert np.max(np.abs(u.interior_values() - 2.5)) < 1e-10
    u = solve_dirichlet(grid16, lambda p: p[..., 0], mode="ambient")
    assert np.max(np.abs(u.interior_values() - grid16.interior_nodes[:, 0])) < 1e-8


def test_projected_boundary_data_is_first_order():
    errs = []
    for h in (1.0 / 16, 1.0 / 32):
        g = Grid(BALL, h)
        u = solve_dirichlet(g, lambda p: p[..., 0])
        errs.append(np.max(np.abs(u.interior_values() - g.interior_nodes[:, 0])))
    assert 1.5 < errs[0] / errs[1] < 3.0


def test_maximum_principle(grid16):
    f = lambda p: np.cos(3 * p[..., 0]) * np.sin(2 * p[..., 2]) + p[..., 1] ** 2
    u = solve_dirichlet(grid16, f)
    fixed = u.values[grid16.boundary_mask]
    inner = u.interior_values()
    assert inner.max() <= fixed.max() + 1e-9 and inner.min() >= fixed.min() - 1e-9


def test_cq_calibration_converges():
    a, b = calibrate_cQ(1.0 / 32), calibrate_cQ(1.0 / 64)
    assert abs(a - b) / b < 0.01
    assert b == pytest.approx(1 / (8 * math.pi), rel=0.01)


def test_fundamental_solution_pole():
    with pytest.raises(PoleError):
        fundamental_solution(np.zeros(3), np.zeros(3))


def test_green_function_sign_and_boundary(grid16):
    g = green_function(grid16, np.zeros(3))
    vals = g.nodal()[grid16.kind == INTERIOR]
    vals = vals[np.isfinite(vals)]
    assert vals.min() >= -1e-6 * g.c_q
    w = BALL.sample_boundary(np.random.default_rng(0), 50, delta=0.1)
    near = G.radial_curve_at(w, 1 - 1e-3)
    assert np.max(np.abs(g.evaluate(near))) < 0.05 * g.c_q
    with pytest.raises(PreconditionError):
        green_function(grid16, [0.0, 0.0, 0.99])


def test_dump_round_trip(tmp_path, grid16):
    u = solve_dirichlet(grid16, lambda p: p[..., 0] + p[..., 2])
    path = tmp_path / "u.bin"
    u.dump(path)
    vals, h, bbox = load_dump(path)
    assert h == grid16.h
    assert np.array_equal(bbox, grid16.bbox)
    assert np.array_equal(np.isnan(vals), np.isnan(u.values))
    assert np.array_equal(vals[~np.isnan(vals)], u.values[~np.isnan(u.values)])


def test_mean_exit_time_from_centre():
    r = simulate_exits(np.zeros(3), BALL, WalkConfig(seed=1), n=4096)
    se = r.times.std(ddof=1) / math.sqrt(r.n)
    assert abs(r.times.mean() - EXIT_TIME) < 3 * se + 0.01 * EXIT_TIME


def test_mean_exit_time_stable_under_dt_refinement():
    a = simulate_exits(np.zeros(3), BALL, WalkConfig(seed=2), n=2048).times.mean()
    b = simulate_exits(np.zeros(3), BALL, WalkConfig(seed=2, dt=2.5e-5), n=2048).times.mean()
    assert abs(a - b) / a < 0.05


def test_exit_angles_rotation_invariant():
    ex = simulate_exits(np.zeros(3), BALL, WalkConfig(seed=3), n=4096).absorbed_exits
    theta = np.arctan2(ex[:, 1], ex[:, 0])
    counts, _ = np.histogram(theta, bins=16, range=(-np.pi, np.pi))
    assert stats.chisquare(counts).pvalue > 0.01


def test_walk_determinism_across_workers():
    p = np.array([0.2, -0.1, 0.3])
    a = simulate_exits(p, BALL, WalkConfig(seed=5, block=128), n=300)
    b = simulate_exits(p, BALL, WalkConfig(seed=5, block=128, workers=2), n=300)
    c = simulate_exits(p, BALL, WalkConfig(seed=5, block=128), n=300)
    assert np.array_equal(a.exits, b.exits) and np.array_equal(a.exits, c.exits)
    assert np.array_equal(a.steps, b.steps)
    d = simulate_exits(p, BALL, WalkConfig(seed=6, block=128), n=300)
    assert not np.array_equal(a.exits, d.exits)


def test_walk_in_band_absorbs_immediately():
    cfg = WalkConfig(seed=0)
    p = G.radial_curve_at(np.array([1.0, 0, 0]), 1 - 0.2 * cfg.band)
    r = simulate_exits(p, BALL, cfg, n=4)
    assert np.all(r.steps == 0)
    assert np.all(G.dist(r.exits, p) < cfg.band)


def test_censoring_is_flagged():
    cfg = WalkConfig(seed=0, max_steps=5)
    with pytest.warns(ReliabilityWarning):
        v = harmonic_extension_mc(np.zeros(3), lambda p: p[..., 0], BALL, 64, cfg)
    assert v.censored > 0


def test_harmonic_extension_examples():
    cfg = WalkConfig(seed=4)
    c = harmonic_extension_mc(np.zeros(3), lambda p: np.full(p.shape[:-1], 3.0), BALL, 500, cfg)
    assert c.mean == 3.0 and c.se == 0.0
    x = harmonic_extension_mc(np.zeros(3), lambda p: p[..., 0], BALL, 4000, cfg, stream=1)
    assert abs(x.mean) < 3 * x.se


def test_harmonic_measure_total_mass():
    est = harmonic_measure(np.zeros(3), BALL, SpherePartition(BALL), 1000, WalkConfig(seed=8))
    assert est.estimate.sum() == pytest.approx(1.0)


def test_bmo_examples():
    cfg = WalkConfig(seed=9)
    exits = simulate_exits(np.zeros(3), BALL, cfg, n=4000).absorbed_exits
    ladder = default_ladder(BALL, np.random.default_rng(0), n_points=6)
    const = bmo_norm(lambda p: np.full(p.shape[:-1], 1.0), BALL, np.zeros(3), ladder, exits=exits)
    assert const.value == 0
    logd = bmo_norm(log_distance_datum(), BALL, np.zeros(3), ladder, exits=exits)
    assert 0 < logd.value < np.inf
    rep = bmo_basepoint_invariance(smooth_upper_indicator(), np.zeros(3), np.array([0.3, 0, 0]), BALL, ladder,
                                   cfg, n_walks=4000)
    assert rep.passed and rep.summary["bmo_z"] > 0
