import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heiscarleson import group as G
from heiscarleson.conformal import (ImageBoundary, TMapParams, comparability_ratio, config_at, fd_jacobian,
                                    isotropy_ratio, koranyi_inversion, sample_admissible_config, t_map,
                                    t_map_jacobian, t_map_norm, t_map_pair_distance)
from heiscarleson.domains import GaugeBall
from heiscarleson.errors import PoleError, PreconditionError

coord = st.floats(-2, 2, allow_nan=False)
point = st.tuples(coord, coord, coord).map(np.array)


def test_inversion_examples():
    assert np.allclose(koranyi_inversion([1, 0, 0]), [-1, 0, 0])
    iy = koranyi_inversion([0, 0, 4])
    assert np.allclose(iy, [0, 0, -0.25])
    assert G.gauge_norm(iy) == pytest.approx(0.5)
    with pytest.raises(PoleError):
        koranyi_inversion(np.zeros(3))


@settings(max_examples=200, deadline=None)
@given(point)
def test_inversion_involution_and_norm(y):
    if G.gauge_norm(y) < 1e-2:
        return
    assert np.allclose(koranyi_inversion(koranyi_inversion(y)), y, atol=1e-9 * max(1, np.abs(y).max()))
    assert G.gauge_norm(koranyi_inversion(y)) * G.gauge_norm(y) == pytest.approx(1, rel=1e-12)


def test_t_map_examples():
    prm = TMapParams(np.zeros(3), np.array([2.0, 0, 0]), 1.0)
    assert G.gauge_norm(t_map(prm, [1, 0, 0])) == pytest.approx(0.5)
    assert np.allclose(t_map(prm, prm.x), 0, atol=1e-15)
    assert t_map_norm(prm, prm.x) == 0
    assert t_map_pair_distance(prm, [0.3, 0.1, 0], [0.3, 0.1, 0]) == 0
    assert t_map_jacobian(prm, np.zeros(3)) == pytest.approx(1 / 256)
    assert fd_jacobian(prm, np.zeros(3)) == pytest.approx(1 / 256, rel=1e-8)
    with pytest.raises(PoleError):
        t_map(prm, prm.a)


@settings(max_examples=150, deadline=None)
@given(point, point, point, point, st.floats(0.1, 3))
def test_t_map_closed_forms_match_composition(x, a, y, y2, rho):
    if G.dist(x, a) < 0.1 or G.dist(y, a) < 0.1 or G.dist(y2, a) < 0.1:
        return
    prm = TMapParams(x, a, rho)
    T, T2 = t_map(prm, y), t_map(prm, y2)
    assert G.gauge_norm(T) == pytest.approx(t_map_norm(prm, y), rel=1e-9)
    assert G.dist(T, T2) == pytest.approx(t_map_pair_distance(prm, y, y2), rel=1e-9, abs=1e-12)


def test_isotropy_proxy():
    rng = np.random.default_rng(1)
    for _ in range(5):
        prm = TMapParams(rng.normal(size=3), np.array([2.0, 1.0, 0.5]), 0.7)
        y = rng.normal(size=(4, 3))
        y = y[G.dist(y, prm.a) > 0.3]
        assert np.all(np.abs(isotropy_ratio(prm, y) - 1) < 1e-3)


def test_admissible_sampler_meets_its_constants():
    rng = np.random.default_rng(3)
    for _ in range(20):
        cfg = sample_admissible_config(rng)
        assert cfg.check()


def test_config_at_rejects_the_pole_direction():
    with pytest.raises(PreconditionError):
        config_at([0.01, 0.0, 0.9])


def test_comparability_precondition():
    ball = GaugeBall()
    cfg = config_at([0.9, 0.0, 0.0])
    with pytest.raises(PreconditionError):
        comparability_ratio(cfg.params, [[0.95, 0, 0]], ball, np.array([1.0, 0, 0]), 1e-4)


def test_image_boundary_rejects_interior_pole():
    with pytest.raises(PreconditionError):
        ImageBoundary(TMapParams(np.zeros(3), np.array([0.5, 0, 0]), 1.0))


def test_image_distance_is_a_true_surface_distance():
    """Refined distances never exceed the nearest point of a dense mapped cloud."""
    from heiscarleson.surfaces import BallSurface
    rng = np.random.default_rng(0)
    cfg = sample_admissible_config(rng)
    im = ImageBoundary(cfg.params)
    y = G.sample_unit_ball(rng, 40)
    d = im.distance(y)
    u = rng.uniform(-np.pi / 2, np.pi / 2, 200_000)
    v = rng.uniform(0, 2 * np.pi, 200_000)
    S = t_map(cfg.params, BallSurface.unit_point(u, v))
    brute = np.array([G.dist(S, p).min() for p in t_map(cfg.params, y)])
    assert np.all(d <= brute * (1 + 1e-9))
