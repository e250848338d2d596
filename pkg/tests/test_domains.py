import numpy as np
import pytest

from heiscarleson import group as G
from heiscarleson.domains import (ConeSpec, GaugeBall, SlitBox, characteristic_set, cone_contains, corkscrew_point,
                                  nta_probe, surface_integral)
from heiscarleson.errors import CharacteristicError, UnsupportedError

# Euclidean area of the unit gauge sphere: graph t = +-sqrt(1 - r^4) over the
# unit disc, integrated with scipy.integrate.quad (error ~2e-8)
SPHERE_AREA = 14.15680215092252


def test_distance_examples():
    ball = GaugeBall()
    assert ball.boundary_distance(np.zeros(3)) == pytest.approx(1.0, abs=1e-9)
    w = ball.sample_boundary(np.random.default_rng(0), 20, delta=0.1)
    assert np.all(ball.boundary_distance(w) < 1e-6)


def test_contains():
    ball = GaugeBall()
    assert ball.contains(np.zeros(3))
    assert not ball.contains([0.0, 0.0, 1.5])


def test_corkscrew_examples():
    ball = GaugeBall()
    c = corkscrew_point(ball, [1.0, 0, 0], 0.1)
    assert np.allclose(c.point, [0.9, 0, 0])
    assert c.achieved_distance_to_vertex == pytest.approx(0.1)
    for k in range(3, 8):
        r = 2.0 ** -k
        c = corkscrew_point(ball, [1.0, 0, 0], r)
        assert 1 / c.M_effective <= c.achieved_distance_to_vertex / r <= 1 + 1e-12
    with pytest.raises(CharacteristicError):
        corkscrew_point(ball, [0, 0, 1.0], 0.1)


def test_cone_contains():
    ball = GaugeBall()
    c = corkscrew_point(ball, [1.0, 0, 0], 2.0 ** -5)
    spec = ConeSpec(np.array([1.0, 0, 0]), alpha=c.M_effective - 1 + 1e-6)
    assert cone_contains(spec, ball, c.point[None, :])[0]
    assert not cone_contains(spec, ball, np.array([[1.0, 0, 0]]))[0]


def test_characteristic_set():
    assert np.allclose(characteristic_set(GaugeBall()), [[0, 0, 1], [0, 0, -1]])
    assert np.allclose(characteristic_set(GaugeBall(radius=2.0)), [[0, 0, 4], [0, 0, -4]])
    g = np.array([0.3, -0.2, 0.1])
    assert np.allclose(characteristic_set(GaugeBall(g)), G.mul(g, characteristic_set(GaugeBall())))
    with pytest.raises(UnsupportedError):
        characteristic_set(SlitBox())


def test_surface_area_oracle():
    assert surface_integral(GaugeBall(), "euclidean_H2") == pytest.approx(SPHERE_AREA, rel=5e-3)
    assert surface_integral(GaugeBall(), "euclidean_H2", lambda p: np.zeros(p.shape[:-1])) == 0


def test_surface_scaling():
    """The horizontal-perimeter proxy is homogeneous of degree 3; Euclidean area sits between R^2 and R^3."""
    p1 = surface_integral(GaugeBall(), "metric_regular_proxy")
    p2 = surface_integral(GaugeBall(radius=2.0), "metric_regular_proxy")
    assert p2 / p1 == pytest.approx(8.0, rel=1e-6)
    e = surface_integral(GaugeBall(radius=2.0), "euclidean_H2") / surface_integral(GaugeBall(), "euclidean_H2")
    assert 4.0 < e < 8.0


def test_nta_probe_ball_passes():
    rep = nta_probe(GaugeBall(), 4.0, 0.25, 16, np.random.default_rng(0))
    assert rep.passed


def test_nta_probe_slit_box_fails_on_the_slab_side():
    d = SlitBox()
    rep = nta_probe(d, 4.0, 0.25, 1, np.random.default_rng(1), boundary_points=[[0.0, d.y0, 0.0]])
    assert rep.records[0]["interior_pass"]
    assert not rep.records[0]["exterior_pass"]


def test_nta_probe_empty():
    rep = nta_probe(GaugeBall(), 4.0, 0.25, 0, np.random.default_rng(0))
    assert rep.passed and rep.records == []
