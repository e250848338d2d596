"""Arithmetic and differential structure of the Heisenberg group.

Points of H^n are stored as flat float arrays ``(x1, y1, ..., xn, yn, t)``
of length ``2n + 1``.  Every function accepts either an :class:`HPoint`
or an ``ndarray`` whose last axis holds the coordinates, so batches of
points are processed without Python loops.  Results are plain arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import CharacteristicError, DimensionError, DomainValueError, OutOfDomainError

S_MIN = 1e-8
Z_MIN = 1e-10


def _arr(p) -> np.ndarray:
    a = np.asarray(p, dtype=float)
    if a.ndim == 0 or a.shape[-1] % 2 != 1 or a.shape[-1] < 3:
        raise DimensionError(f"coordinate axis of length {a.shape[-1] if a.ndim else 0} is not 2n+1 with n >= 1")
    return a


def group_index(p) -> int:
    """Return n for a point (or batch) of H^n."""
    return (_arr(p).shape[-1] - 1) // 2


def _pair(p, q):
    a, b = _arr(p), _arr(q)
    if a.shape[-1] != b.shape[-1]:
        raise DimensionError(f"points of H^{(a.shape[-1] - 1) // 2} and H^{(b.shape[-1] - 1) // 2} are not composable")
    return a, b


def split(p):
    """Split coordinates into ``(x, y, t)`` with x, y of shape (..., n)."""
    a = _arr(p)
    return a[..., 0:-1:2], a[..., 1:-1:2], a[..., -1]


def join(x, y, t) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    shape = np.broadcast_shapes(x.shape[:-1], y.shape[:-1], t.shape)
    n = x.shape[-1]
    out = np.empty(shape + (2 * n + 1,))
    out[..., 0:-1:2] = x
    out[..., 1:-1:2] = y
    out[..., -1] = t
    return out


def z_abs2(p) -> np.ndarray:
    """|z|^2 = sum of x_i^2 + y_i^2."""
    x, y, _ = split(p)
    return np.sum(x * x + y * y, axis=-1)


@dataclass(frozen=True)
class HPoint:
    """A single point of H^n.

    Supports ``p * q`` for the group product and ``~p`` for the inverse.
    """

    coords: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = _arr(self.coords).copy()
        if c.ndim != 1:
            raise DimensionError("HPoint holds a single point; use arrays for batches")
        if not np.all(np.isfinite(c)):
            raise DomainValueError("HPoint coordinates must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @classmethod
    def identity(cls, n: int = 1) -> "HPoint":
        return cls(np.zeros(2 * n + 1))

    @property
    def n(self) -> int:
        return (self.coords.size - 1) // 2

    @property
    def t(self) -> float:
        return float(self.coords[-1])

    @property
    def z(self) -> np.ndarray:
        """Complex horizontal coordinates z_i = x_i + i y_i."""
        return self.coords[0:-1:2] + 1j * self.coords[1:-1:2]

    def __array__(self, dtype=None, copy=None):
        return np.array(self.coords, dtype=dtype)

    def __mul__(self, other: "HPoint") -> "HPoint":
        return HPoint(mul(self, other))

    def __invert__(self) -> "HPoint":
        return HPoint(inverse(self))

    def norm(self) -> float:
        return float(gauge_norm(self))

    def __repr__(self):
        return f"HPoint({', '.join(f'{c:.6g}' for c in self.coords)})"


PointLike = Union[HPoint, np.ndarray, list, tuple]


def mul(p: PointLike, q: PointLike) -> np.ndarray:
    """Group product p·q (broadcasts over leading axes)."""
    a, b = _pair(p, q)
    xa, ya, ta = split(a)
    xb, yb, tb = split(b)
    omega = 2.0 * np.sum(ya * xb - xa * yb, axis=-1)
    return join(xa + xb, ya + yb, ta + tb + omega)


def inverse(p: PointLike) -> np.ndarray:
    return -_arr(p)


def dilate(rho: float, p: PointLike) -> np.ndarray:
    """Heisenberg dilation (z, t) -> (rho z, rho^2 t)."""
    rho = float(rho)
    if not rho > 0:
        raise DomainValueError(f"dilation factor must be positive, got {rho}")
    a = _arr(p).copy()
    a[..., :-1] *= rho
    a[..., -1] *= rho * rho
    return a


def gauge_norm(p: PointLike) -> np.ndarray:
    """Koranyi gauge (|z|^4 + t^2)^(1/4)."""
    a = _arr(p)
    r2 = z_abs2(a)
    return np.sqrt(np.sqrt(r2 * r2 + a[..., -1] ** 2))


def dist(p: PointLike, q: PointLike) -> np.ndarray:
    """Koranyi distance d(p, q) = ||q^{-1} p||."""
    a, b = _pair(p, q)
    return gauge_norm(mul(-b, a))


def frame(p: PointLike) -> np.ndarray:
    """Euclidean components of X_1, Y_1, ..., X_n, Y_n at p.

    Returns an array of shape (..., 2n, 2n+1); row 2i is X_{i+1} and row
    2i+1 is Y_{i+1}.
    """
    a = _arr(p)
    d = a.shape[-1]
    n = (d - 1) // 2
    out = np.zeros(a.shape[:-1] + (2 * n, d))
    for i in range(n):
        out[..., 2 * i, 2 * i] = 1.0
        out[..., 2 * i, -1] = 2.0 * a[..., 2 * i + 1]
        out[..., 2 * i + 1, 2 * i + 1] = 1.0
        out[..., 2 * i + 1, -1] = -2.0 * a[..., 2 * i]
    return out


@dataclass(frozen=True)
class HVector:
    """Horizontal vector sum_i a_i X_i + b_i Y_i at ``base``."""

    a: np.ndarray
    b: np.ndarray
    base: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if a.shape != b.shape or a.shape[-1] != group_index(self.base):
            raise DimensionError("coefficient count does not match the base point")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def norm(self) -> np.ndarray:
        """|v|_H, the length in the orthonormal frame {X_i, Y_i}."""
        return np.sqrt(np.sum(self.a ** 2 + self.b ** 2, axis=-1))

    def euclidean(self) -> np.ndarray:
        """Euclidean components of the vector at its base point."""
        fr = frame(self.base)
        coef = np.empty(self.a.shape[:-1] + (2 * self.a.shape[-1],))
        coef[..., 0::2] = self.a
        coef[..., 1::2] = self.b
        return np.einsum("...k,...kj->...j", coef, fr)


def default_step(p) -> np.ndarray:
    return 1e-4 * np.maximum(1.0, gauge_norm(p))


def _evaluate(f: Callable, pts: np.ndarray) -> np.ndarray:
    vals = np.asarray(f(pts), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise OutOfDomainError("function is not finite at some stencil points")
    return vals


def horizontal_gradient(f: Callable, p: PointLike, h=None) -> HVector:
    """Central-difference horizontal gradient (X_i f, Y_i f) at p.

    Integral curves of X_i and Y_i are straight lines in these coordinates,
    so ``f(p + s X_i(p))`` is exactly f along the flow.  ``f`` may be any
    callable on coordinate arrays, including a ScalarField.
    """
    a = _arr(p)
    h = default_step(a) if h is None else np.asarray(h, dtype=float)
    if np.any(h <= 0):
        raise DomainValueError("step h must be positive")
    fr = frame(a)
    n = (a.shape[-1] - 1) // 2
    hh = np.asarray(h)[..., None]
    coef = np.empty(a.shape[:-1] + (2 * n,))
    for k in range(2 * n):
        e = fr[..., k, :] * hh
        coef[..., k] = (_evaluate(f, a + e) - _evaluate(f, a - e)) / (2.0 * np.asarray(h))
    return HVector(coef[..., 0::2], coef[..., 1::2], a)


def sub_laplacian_apply(f: Callable, p: PointLike, h=None) -> np.ndarray:
    """Delta_H f(p) from the expanded Euclidean form by central differences.

    sum_i [f_{x_i x_i} + f_{y_i y_i} + 4 y_i f_{x_i t} - 4 x_i f_{y_i t}] + 4 |z|^2 f_tt
    """
    a = _arr(p)
    h = default_step(a) if h is None else np.asarray(h, dtype=float)
    hh = np.asarray(h)[..., None]
    d = a.shape[-1]
    n = (d - 1) // 2
    eye = np.eye(d)
    f0 = _evaluate(f, a)

    def shifted(*idx_sign):
        q = a.copy()
        for j, sgn in idx_sign:
            q = q + sgn * hh * eye[j]
        return _evaluate(f, q)

    h2 = np.asarray(h) ** 2
    tt = d - 1
    total = 4.0 * z_abs2(a) * (shifted((tt, 1)) - 2 * f0 + shifted((tt, -1))) / h2
    for i in range(n):
        for j, c_idx in ((2 * i, 2 * i + 1), (2 * i + 1, 2 * i)):
            total = total + (shifted((j, 1)) - 2 * f0 + shifted((j, -1))) / h2
            cross = (shifted((j, 1), (tt, 1)) - shifted((j, 1), (tt, -1))
                     - shifted((j, -1), (tt, 1)) + shifted((j, -1), (tt, -1))) / (4 * h2)
            # x_i pairs with +4 y_i, y_i pairs with -4 x_i
            coef = 4.0 * a[..., c_idx] if j % 2 == 0 else -4.0 * a[..., c_idx]
            total = total + coef * cross
    return total


@dataclass(frozen=True)
class RadialCurveParams:
    omega: np.ndarray
    s: float
    allow_exterior: bool = False

    def __post_init__(self):
        w = _arr(self.omega)
        if abs(float(gauge_norm(w)) - 1.0) > 1e-12:
            raise DomainValueError("omega must lie on the unit gauge sphere")
        if np.sqrt(z_abs2(w)) <= Z_MIN:
            raise CharacteristicError("omega lies on the t-axis")
        if not (self.s > 0 and (self.s <= 1 or self.allow_exterior)):
            raise DomainValueError(f"s = {self.s} outside (0, 1]")
        object.__setattr__(self, "omega", w)


def _rotate(x, y, phase):
    c, s = np.cos(phase)[..., None], np.sin(phase)[..., None]
    return x * c - y * s, x * s + y * c


def radial_curve_at(omega: PointLike, s) -> np.ndarray:
    """gamma(s, omega) = (s z e^{-i (t/|z|^2) log s}, s^2 t), vectorized.

    Values s > 1 continue the curve past the sphere (used to place points
    outside the unit ball along a horizontal direction).
    """
    w = _arr(omega)
    s = np.maximum(np.asarray(s, dtype=float), S_MIN)
    x, y, t = split(w)
    r2 = z_abs2(w)
    if np.any(np.sqrt(r2) <= Z_MIN):
        raise CharacteristicError("radial curve undefined for |z| = 0")
    phase = -(t / r2) * np.log(s)
    xr, yr = _rotate(x, y, phase)
    return join(s[..., None] * xr, s[..., None] * yr, s * s * t)


def radial_curve(params: RadialCurveParams) -> np.ndarray:
    return radial_curve_at(params.omega, params.s)


def boundary_projection(x: PointLike) -> np.ndarray:
    """The point omega_x of the unit sphere with gamma(||x||, omega_x) = x."""
    a = _arr(x)
    s = gauge_norm(a)
    if np.any(s <= 0):
        raise DomainValueError("boundary projection undefined at the identity")
    r = np.sqrt(z_abs2(a))
    if np.any(r < Z_MIN):
        raise CharacteristicError("boundary projection undefined on the t-axis")
    xx, yy, tt = split(a)
    t_w = tt / s ** 2
    zw2 = (r / s) ** 2
    phase = (t_w / zw2) * np.log(s)
    xr, yr = _rotate(xx / s[..., None], yy / s[..., None], phase)
    return join(xr, yr, t_w)


def unit_ball_volume(n: int = 1) -> float:
    """Lebesgue volume of the unit gauge ball in H^n."""
    from math import factorial, pi
    from scipy.special import beta

    return pi ** n / factorial(n) * float(beta(0.5, n / 2 + 1))


def sample_unit_ball(rng: np.random.Generator, size: int, n: int = 1) -> np.ndarray:
    """Uniform samples in the unit gauge ball by rejection from the cube."""
    d = 2 * n + 1
    out = np.empty((0, d))
    while out.shape[0] < size:
        need = size - out.shape[0]
        cand = rng.uniform(-1.0, 1.0, size=(int(need * 1.8) + 16, d))
        out = np.concatenate([out, cand[gauge_norm(cand) < 1.0]])
    return out[:size]


def sample_ball(rng, center, radius, size) -> np.ndarray:
    """Uniform samples in the Koranyi ball B(center, radius); Haar = Lebesgue."""
    c = _arr(center)
    u = sample_unit_ball(rng, size, group_index(c))
    return mul(c, dilate(radius, u))
