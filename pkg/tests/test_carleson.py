import numpy as np
import pytest

from heiscarleson import group as G
from heiscarleson.carleson import (MeasureRep, carleson_constant, dyadic_atoms, energy_identity_check, fatou_check,
                                   mobius_integral, nontangential_max, square_function, thm11_check, thm14_check)
from heiscarleson.carleson.checks import green_pairs
from heiscarleson.carleson.cones import AffineX, ConeSampler, Constant, square_integral
from heiscarleson.conformal import sample_admissible_config
from heiscarleson.domains import ConeSpec, GaugeBall
from heiscarleson.potential import Grid, WalkConfig, solve_dirichlet

BALL = GaugeBall()
VERTEX = np.array([1.0, 0, 0])


def test_carleson_constant_examples():
    rep = carleson_constant(MeasureRep.zero(), BALL)
    assert rep.sup_ratio == 0 and rep.flatness() == 1.0
    # a single atom seen only by the smallest balls around it
    p = G.radial_curve_at(VERTEX, 1 - 2.0 ** -6)
    rep = carleson_constant(MeasureRep.atomic([p], [1.0]), BALL, points=[VERTEX], radii=[0.25, 2.0 ** -5])
    assert rep.level_sup[0] == pytest.approx(1 / 0.25 ** 3)
    assert rep.level_sup[1] == pytest.approx(2.0 ** 15)


def test_carleson_lebesgue_is_flat_and_atoms_blow_up():
    leb = carleson_constant(MeasureRep.lebesgue(4000), BALL, radii=[0.25, 0.125, 0.0625], n_points=3)
    assert leb.flatness() < 2.0
    at = carleson_constant(dyadic_atoms(), BALL, points=[VERTEX], radii=2.0 ** -np.arange(2, 8))
    assert at.running_sup[-1] / at.running_sup[0] > 8


def test_measure_scaling():
    mu = dyadic_atoms()
    a = carleson_constant(mu, BALL, points=[VERTEX]).sup_ratio
    b = carleson_constant(mu.scaled(3.0), BALL, points=[VERTEX]).sup_ratio
    assert b == pytest.approx(3 * a)


def test_square_function_matches_uniform_ball_oracle():
    """Cone integral of |grad_H x|^2 d^{-2} against plain uniform sampling of the whole ball."""
    spec = ConeSpec(VERTEX, 1.0)
    val, se, _ = square_integral(AffineX(), spec, BALL, ConeSampler(n_per_shell=32768, min_distance=1 / 32))
    rng = np.random.default_rng(5)
    y = G.sample_unit_ball(rng, 2_000_000)
    d = BALL.fast_distance(y)
    ok = (G.dist(y, VERTEX) < 2 * d) & (d >= 1 / 32)
    oracle = G.unit_ball_volume(1) * np.mean(np.where(ok, d ** -2.0, 0.0))
    assert val == pytest.approx(oracle, rel=0.02)


def test_cone_functionals_monotone_in_aperture():
    s = ConeSampler(n_per_shell=512, min_distance=1 / 32)
    prev_s = prev_n = 0.0
    for alpha in (0.25, 0.5, 1.0):
        spec = ConeSpec(VERTEX, alpha)
        S = square_function(AffineX(), spec, BALL, s).value
        N = nontangential_max(AffineX(), spec, BALL, s).value
        assert S >= prev_s and N >= prev_n
        prev_s, prev_n = S, N


def test_nontangential_max_of_constant():
    spec = ConeSpec(VERTEX, 1.0)
    assert nontangential_max(Constant(-2.5), spec, BALL, ConeSampler(n_per_shell=64)).value == 2.5
    assert square_function(Constant(-2.5), spec, BALL, ConeSampler(n_per_shell=64)).value == 0


def test_mobius_integral_additive_and_homogeneous():
    cfg = sample_admissible_config(np.random.default_rng(2))
    mu1 = dyadic_atoms(k_range=range(3, 6))
    mu2 = dyadic_atoms(G.dilate(1 / G.gauge_norm([0.3, 0.8, 0.1]), np.array([0.3, 0.8, 0.1])), range(4, 7))
    both = MeasureRep.atomic(np.vstack([mu1.atoms, mu2.atoms]), np.concatenate([mu1.masses, mu2.masses]))
    a, b, ab = (mobius_integral(m, cfg).value for m in (mu1, mu2, both))
    assert ab == pytest.approx(a + b, rel=1e-12)
    assert mobius_integral(mu1.scaled(4.0), cfg).value == pytest.approx(4 * a, rel=1e-12)
    assert mobius_integral(MeasureRep.zero(), cfg).value == 0


def test_mobius_integral_lebesgue_is_finite():
    cfg = sample_admissible_config(np.random.default_rng(4))
    v = mobius_integral(MeasureRep.lebesgue(2000), cfg, np.random.default_rng(0))
    assert np.isfinite(v.value) and v.value > 0 and v.se < v.value


@pytest.fixture(scope="module")
def energy_exits():
    from heiscarleson.potential import simulate_exits
    return simulate_exits(np.zeros(3), BALL, WalkConfig(seed=11), n=2000).absorbed_exits


def test_energy_identity_zero_and_quadratic_scaling(energy_exits):
    grid = Grid(BALL, 1 / 16)
    cfg = WalkConfig(seed=11)
    z = np.zeros(3)
    rep0 = energy_identity_check(lambda p: np.zeros(p.shape[:-1]), z, grid, 0, cfg, exits=energy_exits)
    assert rep0.summary["lhs"] == 0 and rep0.summary["rhs"] == 0 and rep0.passed
    f = lambda p: p[..., 0]
    r1 = energy_identity_check(f, z, grid, 0, cfg, exits=energy_exits)
    r3 = energy_identity_check(lambda p: 3 * f(p), z, grid, 0, cfg, exits=energy_exits)
    assert r3.summary["lhs"] == pytest.approx(9 * r1.summary["lhs"], rel=1e-6)
    assert r3.summary["rhs"] == pytest.approx(9 * r1.summary["rhs"], rel=1e-12)


def test_thm14_shift_invariance_and_quadratic_scaling():
    f = lambda p: np.sin(2 * p[..., 0]) + p[..., 2]
    kw = dict(ball=BALL, x0=VERTEX, radii=[0.25, 0.125], full_form=False)
    a = thm14_check(f, **kw)
    b = thm14_check(lambda p: 2 * f(p), **kw)
    assert a.summary["shift_error"] <= 1e-6
    for ra, rb in zip(a.records, b.records):
        assert rb["ratio_simplified"] == pytest.approx(4 * ra["ratio_simplified"], rel=1e-6)


def test_thm11_levels_above_the_data_are_empty():
    rep = thm11_check(BALL, levels=[3], fractions=(1.5,), n_window=64)
    for rec in rep.records:
        assert rec["mu_lebesgue"] == 0 and rec["mu_atoms"] == 0
        assert rec["ratio_lebesgue_euclidean_H2"] is None


def test_fatou_examples():
    grid = Grid(BALL, 1 / 16)
    w = BALL.sample_boundary(np.random.default_rng(0), 10, delta=0.2)
    u = solve_dirichlet(grid, lambda p: np.full(p.shape[:-1], 1.5))
    rep = fatou_check(u, BALL, w, grid.h)
    assert rep.passed and rep.summary["osc_max"] < 1e-10
    u = solve_dirichlet(grid, lambda p: p[..., 0], mode="ambient")
    rep = fatou_check(u, BALL, w, grid.h)
    # u = x exactly, so the tail oscillation is that of x along the curve
    s = np.linspace(rep.summary["s_star"], 1.0, 401)
    for r, om in zip(rep.records, w):
        x = np.array([G.radial_curve_at(om, si)[0] for si in s])
        assert r["osc_at_s_star"] == pytest.approx(x.max() - x.min(), abs=1e-6)
        assert r["limit"] == pytest.approx(om[0], abs=1e-6)


def test_green_pairs_respect_the_exclusions():
    poles, pairs = green_pairs(BALL, np.random.default_rng(0), 6, 20, 0.125)
    assert len(poles) == 6
    for y, d in poles:
        assert d >= 0.125
    for i, z, dd in pairs:
        y, d = poles[i]
        assert 0 < dd <= d / 2
        assert G.dist(z, y) == pytest.approx(dd)
