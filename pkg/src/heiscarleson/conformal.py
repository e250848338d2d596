"""Koranyi inversion and the Mobius-type maps T_{x,a,rho}.

T(y) = delta_rho( I(a^{-1} x)^{-1} . I(a^{-1} y) ) sends x to the origin and
the pole a to infinity.  Its metric identities are available in closed
form; the image of the unit ball is not a ball, so distances to the image
boundary are computed against the mapped boundary cloud.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property
from typing import Optional

import numpy as np

from . import group as G
from .domains import GaugeBall
from .errors import DomainValueError, PoleError, PreconditionError, SamplingError, UnsupportedError
from .surfaces import nearest_on_surface

JACOBIAN_EXPONENT = 8  # rho^4 / d(a, y)^8 on H^1


def _check_n(a, higher_n):
    if G.group_index(a) != 1 and not higher_n:
        raise UnsupportedError("H^n with n >= 2 requires higher_n=True")


def koranyi_inversion(y, higher_n: bool = False) -> np.ndarray:
    """I(y) = -(z (|z|^2 + i t), t) / ||y||^4."""
    a = G._arr(y)
    _check_n(a, higher_n)
    x, yy, t = G.split(a)
    r2 = G.z_abs2(a)
    n4 = r2 * r2 + t * t
    if np.any(n4 == 0):
        raise PoleError("inversion is undefined at the identity")
    A, B = r2[..., None], t[..., None]
    inv = -1.0 / n4
    return G.join(inv[..., None] * (x * A - yy * B), inv[..., None] * (x * B + yy * A), inv * t)


@dataclass(frozen=True)
class TMapParams:
    """Zero x, pole a and dilation rho of T_{x,a,rho}."""

    x: np.ndarray
    a: np.ndarray
    rho: float
    higher_n: bool = False

    def __post_init__(self):
        x = G._arr(self.x).copy()
        a = G._arr(self.a).copy()
        if x.shape != a.shape or x.ndim != 1:
            raise DomainValueError("x and a must be single points of the same H^n")
        _check_n(x, self.higher_n)
        if not self.rho > 0:
            raise DomainValueError("rho must be positive")
        if float(G.dist(x, a)) == 0.0:
            raise PoleError("the zero x and the pole a must differ")
        x.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "rho", float(self.rho))

    @cached_property
    def _shift(self):
        return -koranyi_inversion(G.mul(-self.a, self.x), self.higher_n)


def t_map(params: TMapParams, y) -> np.ndarray:
    y = G._arr(y)
    w = G.mul(-params.a, y)
    if np.any(G.gauge_norm(w) == 0):
        raise PoleError("T is singular at its pole a")
    return G.dilate(params.rho, G.mul(params._shift, koranyi_inversion(w, params.higher_n)))


def _dist_to_pole(params, y):
    d = G.dist(params.a, y)
    if np.any(d == 0):
        raise PoleError("evaluation at the pole a")
    return d


def t_map_norm(params: TMapParams, y) -> np.ndarray:
    """Closed form of ||T(y)||."""
    return params.rho * G.dist(params.x, y) / (_dist_to_pole(params, y) * G.dist(params.a, params.x))


def t_map_pair_distance(params: TMapParams, y, y2) -> np.ndarray:
    """Closed form of d(T(y), T(y'))."""
    return params.rho * G.dist(y, y2) / (_dist_to_pole(params, y) * _dist_to_pole(params, y2))


def t_map_jacobian(params: TMapParams, y) -> np.ndarray:
    """Closed-form Jacobian rho^4 / d(a, y)^8 (H^1 only)."""
    if G.group_index(params.x) != 1:
        raise UnsupportedError("the Jacobian formula is only available on H^1")
    return params.rho ** 4 / _dist_to_pole(params, y) ** JACOBIAN_EXPONENT


def fd_jacobian(params: TMapParams, y, h: float = 1e-4, order: int = 4) -> np.ndarray:
    """Central-difference determinant of the Euclidean coordinate map y -> T(y).

    The t-direction scale near the pole is d(a, y)^2, so the fourth-order
    stencil is the default.
    """
    y = G._arr(y)
    d = y.shape[-1]
    cols = []
    for k in range(d):
        e = np.zeros(d)
        e[k] = h
        if order == 2:
            cols.append((t_map(params, y + e) - t_map(params, y - e)) / (2 * h))
        elif order == 4:
            cols.append((8 * (t_map(params, y + e) - t_map(params, y - e))
                         - (t_map(params, y + 2 * e) - t_map(params, y - 2 * e))) / (12 * h))
        else:
            raise DomainValueError("order must be 2 or 4")
    return np.linalg.det(np.stack(cols, axis=-1))


def isotropy_ratio(params: TMapParams, y, h: float = 1e-5, n_dirs: int = 8) -> np.ndarray:
    """max/min over horizontal directions e of d(T(y . delta_h e), T(y)) / h."""
    y = G._arr(y)
    ty = t_map(params, y)
    vals = []
    for th in np.linspace(0, np.pi, n_dirs, endpoint=False):
        e = np.zeros(y.shape[-1])
        e[0], e[1] = h * np.cos(th), h * np.sin(th)
        vals.append(G.dist(t_map(params, G.mul(y, e)), ty) / h)
    vals = np.stack(vals, axis=-1)
    return vals.max(axis=-1) / vals.min(axis=-1)


class ImageBoundary:
    """The image T(dB) represented by the mapped boundary cloud of the unit ball."""

    def __init__(self, params: TMapParams, ball: Optional[GaugeBall] = None):
        self.params = params
        self.ball = GaugeBall() if ball is None else ball
        if not self.ball.is_unit:
            raise UnsupportedError("image boundaries are computed for the unit ball")
        if self.ball.contains(params.a) or float(self.ball.boundary_distance(params.a)) == 0:
            raise PreconditionError("the pole must lie outside the closed ball")
        self.cloud = self.ball.unit_cloud
        self.mapped = t_map(params, self.cloud.points)

    def _transform(self, q):
        return t_map(self.params, q)

    def distance(self, y, refine: bool = True) -> np.ndarray:
        """d(T(y), dT(B)) for source points y."""
        y = np.asarray(y, dtype=float)
        P = t_map(self.params, y.reshape(-1, 3))
        d = nearest_on_surface(P, self.ball.unit_surface, self.cloud, cloud_points=self.mapped,
                               transform=self._transform, refine=refine)[0]
        return d.reshape(y.shape[:-1])

    def sandwich(self, n: int = 1000):
        """Empirical (m, M) = (min, max) of ||T(omega)|| over n boundary samples.

        m also takes the refined d(0, dT(B)) = d(T(x), dT(B)), since for
        strongly localized maps the minimizer sits in a patch near omega_x
        too small for the cloud.
        """
        idx = np.linspace(0, len(self.cloud) - 1, n).astype(int)
        norms = G.gauge_norm(self.mapped[idx])
        m = min(float(norms.min()), float(self.distance(self.params.x[None, :])[0]))
        return m, float(norms.max())


@dataclass(frozen=True)
class AdmissibleConfig:
    """A T-map configuration on the unit ball with its explicit constants.

    rho = c_rho min{d(x, dB), d(a, dB)} and c_min d(a, x) <= rho <= c_max d(a, x).
    """

    params: TMapParams
    ball: GaugeBall
    c_min: float
    c_max: float
    c_rho: float
    omega: np.ndarray
    d_x: float
    d_a: float
    d_ax: float
    tries: int = 1

    def check(self) -> bool:
        p = self.params
        return bool(self.ball.contains(p.x) and not self.ball.contains(p.a) and self.d_a > 0
                    and p.rho <= self.c_rho * min(self.d_x, self.d_a) * (1 + 1e-12)
                    and self.c_min * self.d_ax <= p.rho <= self.c_max * self.d_ax)

    def summary(self) -> dict:
        return {"x": self.params.x, "a": self.params.a, "rho": self.params.rho, "d_x": self.d_x,
                "d_a": self.d_a, "d_ax": self.d_ax, "rho_over_dax": self.params.rho / self.d_ax}


C_RHO, C_MIN, C_MAX = 0.5, 1.0 / 16, 2.0


def config_at(x, ball: Optional[GaugeBall] = None, c_rho: float = C_RHO, c_min: float = C_MIN,
              c_max: float = C_MAX, delta: float = 0.1, beyond: Optional[float] = None) -> AdmissibleConfig:
    """Build the configuration with zero x and pole a = gamma(1 + sigma, omega_x).

    sigma defaults to d(x, dB), placing a about as far outside as x is inside.
    Raises PreconditionError when the constants cannot be met.
    """
    ball = GaugeBall() if ball is None else ball
    x = np.asarray(x, dtype=float)
    if not ball.contains(x):
        raise PreconditionError("x must lie inside the ball")
    omega = G.boundary_projection(x)
    if np.hypot(omega[0], omega[1]) < delta:
        raise PreconditionError("radial direction of x is too close to the characteristic set")
    d_x = float(ball.boundary_distance(x))
    sigma = d_x if beyond is None else beyond
    a = G.radial_curve_at(omega, 1.0 + sigma)
    d_a = float(ball.boundary_distance(a))
    d_ax = float(G.dist(a, x))
    rho = c_rho * min(d_x, d_a)
    if not (c_min * d_ax <= rho <= c_max * d_ax):
        raise PreconditionError(f"rho/d(a,x) = {rho / d_ax:.3g} outside [{c_min}, {c_max}]")
    return AdmissibleConfig(TMapParams(x, a, rho), ball, c_min, c_max, c_rho, omega, d_x, d_a, d_ax)


def sample_admissible_config(rng, ball: Optional[GaugeBall] = None, c_rho: float = C_RHO,
                             c_min: float = C_MIN, c_max: float = C_MAX, delta: float = 0.1,
                             inner_radius: float = 0.9, max_tries: int = 1000) -> AdmissibleConfig:
    """Rejection sampler: x uniform in B(0, inner_radius), a built by ``config_at``."""
    ball = GaugeBall() if ball is None else ball
    for tries in range(1, max_tries + 1):
        x = G.dilate(inner_radius, G.sample_unit_ball(rng, 1)[0])
        if np.hypot(x[0], x[1]) < 1e-6:
            continue
        try:
            cfg = config_at(x, ball, c_rho, c_min, c_max, delta)
        except PreconditionError:
            continue
        return replace(cfg, tries=tries)
    raise SamplingError(f"no admissible configuration after {max_tries} draws")


def comparability_ratio(params: TMapParams, y, ball: GaugeBall, omega, r: float,
                        c_near: float = 4.0, c_far: float = 1.25,
                        image: Optional[ImageBoundary] = None) -> np.ndarray:
    """[d(T(y), dT(B)) / d(y, dB)] / [rho / d(y, a)^2] for y in B(omega, r) inside B.

    Hypotheses: d(a, omega) <= c_near r and d(a, B) >= c_far r with c_far > 1.
    """
    if c_far <= 1:
        raise PreconditionError("c_far must exceed 1")
    omega = np.asarray(omega, dtype=float)
    if float(G.dist(params.a, omega)) > c_near * r:
        raise PreconditionError("d(a, omega) exceeds c_near * r")
    if float(ball.boundary_distance(params.a)) < c_far * r:
        raise PreconditionError("d(a, B) is below c_far * r")
    y = np.asarray(y, dtype=float)
    if np.any(G.dist(y, omega) >= r) or np.any(~ball.contains(y)):
        raise PreconditionError("y must lie in B(omega, r) inside the ball")
    image = ImageBoundary(params, ball) if image is None else image
    dyb = ball.boundary_distance(y)
    return (image.distance(y) / dyb) / (params.rho / G.dist(y, params.a) ** 2)
