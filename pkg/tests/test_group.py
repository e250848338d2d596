import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from heiscarleson import group as G
from heiscarleson.errors import CharacteristicError, DimensionError, DomainValueError

coord = st.floats(-3, 3, allow_nan=False)
point = st.tuples(coord, coord, coord).map(np.array)


def test_product_example():
    assert np.allclose(G.mul([1, 0, 0], [0, 1, 0]), [1, 1, -2])


def test_identity_and_inverse():
    p = np.array([1.0, 2.0, 3.0])
    assert np.allclose(G.mul(np.zeros(3), p), p)
    assert np.allclose(G.inverse(p), [-1, -2, -3])
    assert np.allclose(G.mul(p, G.inverse(p)), 0)
    assert np.allclose(G.inverse(G.inverse(p)), p)


def test_mismatched_dimension():
    with pytest.raises(DimensionError):
        G.mul([1, 0, 0], [1, 0, 0, 0, 0])


def test_dilation_examples():
    assert np.allclose(G.dilate(2, [1, 0, 1]), [2, 0, 4])
    with pytest.raises(DomainValueError):
        G.dilate(0.0, [1, 0, 0])


def test_norm_and_distance_examples():
    assert G.gauge_norm([0, 0, 4]) == pytest.approx(2.0)
    assert G.gauge_norm([1, 0, 0]) == pytest.approx(1.0)
    assert G.gauge_norm(np.zeros(3)) == 0
    assert G.dist(np.zeros(3), [0, 0, 4]) == pytest.approx(2.0)


def test_frame_examples():
    assert np.allclose(G.frame(np.zeros(3)), [[1, 0, 0], [0, 1, 0]])
    assert np.allclose(G.frame([1, 2, 0]), [[1, 0, 4], [0, 1, -2]])


def test_horizontal_gradient_examples():
    v = G.horizontal_gradient(lambda p: p[..., 2], np.array([1.0, 2.0, 0.0]))
    assert np.allclose([v.a[0], v.b[0]], [4, -2], atol=1e-6)
    v = G.horizontal_gradient(lambda p: p[..., 0], np.array([0.3, -0.2, 0.5]))
    assert np.allclose([v.a[0], v.b[0]], [1, 0], atol=1e-8)
    v = G.horizontal_gradient(lambda p: np.full(p.shape[:-1], 2.0), np.array([0.3, -0.2, 0.5]))
    assert v.norm == 0


def test_sub_laplacian_examples():
    p = np.array([0.4, -0.3, 0.2])
    assert abs(G.sub_laplacian_apply(lambda q: q[..., 0], p)) < 1e-6
    assert G.sub_laplacian_apply(lambda q: q[..., 0] ** 2 + q[..., 1] ** 2, p, h=1e-3) == pytest.approx(4, abs=1e-5)
    f = lambda q: G.gauge_norm(q) ** -2.0
    r1, r2 = (abs(float(G.sub_laplacian_apply(f, p, h=h))) for h in (4e-3, 2e-3))
    assert r1 / r2 == pytest.approx(4, rel=0.05)


def _sympy_sublaplacian(expr, x, y, t):
    X = lambda g: sp.diff(g, x) + 2 * y * sp.diff(g, t)
    Y = lambda g: sp.diff(g, y) - 2 * x * sp.diff(g, t)
    return sp.simplify(X(X(expr)) + Y(Y(expr)))


def test_sympy_harmonic_oracle():
    x, y, t = sp.symbols("x y t", real=True)
    N4 = (x ** 2 + y ** 2) ** 2 + t ** 2
    assert _sympy_sublaplacian(N4 ** sp.Rational(-1, 2), x, y, t) == 0
    for f in (x, t, x ** 2 - y ** 2):
        assert _sympy_sublaplacian(f, x, y, t) == 0
    assert _sympy_sublaplacian(x ** 2 + y ** 2, x, y, t) == 4
    # the expanded form used by sub_laplacian_apply
    f = sp.sin(x) * sp.exp(y * t)
    expanded = (sp.diff(f, x, 2) + sp.diff(f, y, 2) + 4 * y * sp.diff(f, x, t) - 4 * x * sp.diff(f, y, t)
                + 4 * (x ** 2 + y ** 2) * sp.diff(f, t, 2))
    assert sp.simplify(expanded - _sympy_sublaplacian(f, x, y, t)) == 0


@settings(max_examples=200, deadline=None)
@given(point, point, point)
def test_associativity(p, q, r):
    assert np.allclose(G.mul(G.mul(p, q), r), G.mul(p, G.mul(q, r)), atol=1e-9)


@settings(max_examples=200, deadline=None)
@given(point, point, point)
def test_left_invariance_and_triangle(g, p, q):
    assert G.dist(G.mul(g, p), G.mul(g, q)) == pytest.approx(G.dist(p, q), rel=1e-9, abs=1e-12)
    r = G.mul(p, q)
    assert G.dist(p, r) <= G.dist(p, q) + G.dist(q, r) + 1e-9


@settings(max_examples=200, deadline=None)
@given(point, st.floats(0.05, 20))
def test_dilation_homogeneity(p, rho):
    assert G.gauge_norm(G.dilate(rho, p)) == pytest.approx(rho * G.gauge_norm(p), rel=1e-12, abs=1e-300)
    assert np.allclose(G.dilate(1.0, p), p)


def test_radial_curve_examples():
    assert np.allclose(G.radial_curve_at([1, 0, 0], 0.5), [0.5, 0, 0])
    w = G.dilate(1 / G.gauge_norm([0.3, 0.4, 0.5]), [0.3, 0.4, 0.5])
    assert np.allclose(G.radial_curve_at(w, 1.0), w)
    with pytest.raises(CharacteristicError):
        G.radial_curve_at([0, 0, 1], 0.5)
    with pytest.raises(DomainValueError):
        G.RadialCurveParams(np.array([1.0, 0, 0]), 1.5)


def test_boundary_projection_examples():
    assert np.allclose(G.boundary_projection([0.5, 0, 0]), [1, 0, 0])
    w = G.dilate(1 / G.gauge_norm([0.3, -0.4, 0.2]), [0.3, -0.4, 0.2])
    assert np.allclose(G.boundary_projection(w), w)
    with pytest.raises(CharacteristicError):
        G.boundary_projection([0, 0, 0.5])


@settings(max_examples=200, deadline=None)
@given(point, st.floats(0.05, 1.0))
def test_radial_curve_norm_and_round_trip(p, s):
    if np.hypot(p[0], p[1]) < 0.05 * max(1.0, G.gauge_norm(p)):
        return
    w = G.dilate(1 / G.gauge_norm(p), p)
    c = G.radial_curve_at(w, s)
    assert G.gauge_norm(c) == pytest.approx(s, abs=1e-12)
    assert np.allclose(G.boundary_projection(c), w, atol=1e-9)


def test_unit_ball_volume_mc():
    rng = np.random.default_rng(0)
    c = rng.uniform(-1, 1, (400_000, 3))
    frac = np.mean(G.gauge_norm(c) < 1)
    assert 8 * frac == pytest.approx(np.pi ** 2 / 2, rel=0.01)
    assert G.unit_ball_volume(1) == pytest.approx(np.pi ** 2 / 2)
