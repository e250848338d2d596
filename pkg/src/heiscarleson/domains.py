"""Domains in H^1: the gauge ball (primary) and axis-aligned boxes.

Every domain exposes membership, Koranyi distance to the boundary, a
projection onto the boundary, a parametrized boundary surface and a
bounding box.  The gauge ball additionally provides a tabulated fast
distance, surface measures, corkscrew points and its characteristic set.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import group as G
from .errors import CharacteristicError, PoleWarning, PreconditionError, UnsupportedError
from .report import CheckReport
from .surfaces import BallSurface, Rect, RectSurface, d4_rows, nearest_on_surface

N_CLOUD = 10_000


class Domain:
    """Common interface; subclasses implement ``contains``, ``project``, ``surface``."""

    name = "domain"
    n_cloud = N_CLOUD

    def contains(self, p) -> np.ndarray:
        raise NotImplementedError

    def project(self, p) -> np.ndarray:
        raise NotImplementedError

    def bounding_box(self) -> np.ndarray:
        raise NotImplementedError

    @cached_property
    def surface(self):
        raise NotImplementedError

    @cached_property
    def cloud(self):
        return self.surface.cloud(self.n_cloud)

    def boundary_distance(self, p, refine: bool = True) -> np.ndarray:
        """Koranyi distance to the boundary: cloud minimum refined by Nelder-Mead."""
        P = np.asarray(p, dtype=float)
        flat = P.reshape(-1, P.shape[-1])
        d = nearest_on_surface(flat, self.surface, self.cloud, refine=refine)[0]
        return d.reshape(P.shape[:-1])

    def step_distance(self, p) -> np.ndarray:
        """A cheap estimate of the boundary distance used for step control."""
        return self.boundary_distance(p)

    def distance_lower_bound(self, p) -> np.ndarray:
        """A cheap lower bound of the boundary distance (walk step control)."""
        return self.step_distance(p)

    def sample_boundary(self, rng, n: int) -> np.ndarray:
        raise NotImplementedError

    def export_cloud_csv(self, path) -> None:
        pts = self.cloud.points
        header = ",".join(["x", "y", "t"])
        np.savetxt(path, pts, delimiter=",", header=header, comments="")


# ----------------------------------------------------------------------------
# gauge ball


def _cache_dir() -> Path:
    root = os.environ.get("HEISCARLESON_CACHE")
    return Path(root) if root else Path.home() / ".cache" / "heiscarleson"


TABLE_XI = (0.0, 1.6)
TABLE_TAU = (0.0, 2.2)
TABLE_STEP = 1.0 / 200
POLE_RHO = (1e-3, 0.3)
POLE_N = (121, 401)
POLE_SWITCH = 0.25
TABLE_VERSION = 3


def _signed_exact_unit(P):
    surf = BallSurface()
    d = nearest_on_surface(P, surf, surf.cloud(4000))[0]
    return np.where(G.gauge_norm(P) < 1, d, -d)


def _pole_coords(xi, tau):
    """Koranyi polar coordinates (rho, psi) of (xi, 0, tau) about the north pole."""
    rho = np.sqrt(np.sqrt(xi ** 4 + (tau - 1.0) ** 2))
    return rho, np.arctan2(tau - 1.0, xi * xi)


def _build_tables():
    xi = np.arange(TABLE_XI[0], TABLE_XI[1] + 1e-12, TABLE_STEP)
    tau = np.arange(TABLE_TAU[0], TABLE_TAU[1] + 1e-12, TABLE_STEP)
    X, T = np.meshgrid(xi, tau, indexing="ij")
    main = _signed_exact_unit(np.stack([X.ravel(), np.zeros(X.size), T.ravel()], -1)).reshape(X.shape)
    rho = np.linspace(*POLE_RHO, POLE_N[0])
    psi = np.linspace(-np.pi / 2, np.pi / 2, POLE_N[1])
    Rg, Pg = np.meshgrid(rho, psi, indexing="ij")
    # invert rho^4 = xi^4 + (tau-1)^2, psi = atan2(tau-1, xi^2)
    xi_p = Rg * np.sqrt(np.clip(np.cos(Pg), 0, None))
    tau_p = 1.0 + Rg ** 2 * np.sin(Pg)
    pole = _signed_exact_unit(np.stack([xi_p.ravel(), np.zeros(xi_p.size), tau_p.ravel()], -1))
    pole = pole.reshape(Rg.shape) / Rg
    return {"xi": xi, "tau": tau, "sdf": main, "rho": rho, "psi": psi, "pole": pole}


class _BallTable:
    """Signed distance to the unit sphere of H^1 as a function of (|z|, |t|).

    Rotations z -> e^{i theta} z and (z, t) -> (conj z, -t) are isometries
    fixing the ball, so the distance depends on (|z|, |t|) only.  Near the
    pole the distance behaves like the square root of the height, so there
    it is tabulated as d / rho in Koranyi polar coordinates (rho, psi),
    where it is smooth.
    """

    def __init__(self, data):
        from scipy.interpolate import RectBivariateSpline

        self.main = RectBivariateSpline(data["xi"], data["tau"], data["sdf"], kx=3, ky=3, s=0)
        self.pole = RectBivariateSpline(data["rho"], data["psi"], data["pole"], kx=3, ky=3, s=0)

    def covers(self, xi, tau):
        return (xi <= TABLE_XI[1]) & (tau <= TABLE_TAU[1])

    def __call__(self, xi, tau):
        out = self.main.ev(xi, tau)
        rho, psi = _pole_coords(xi, tau)
        near = rho < POLE_SWITCH
        if np.any(near):
            r = np.maximum(rho[near], POLE_RHO[0])
            out[near] = rho[near] * self.pole.ev(r, psi[near])
        return out


@lru_cache(maxsize=1)
def unit_ball_table() -> _BallTable:
    """Tabulated signed distance of the unit ball, cached on disk after the first build."""
    path = _cache_dir() / f"unit_ball_sdf_v{TABLE_VERSION}.npz"
    data = None
    if path.exists():
        try:
            with np.load(path) as z:
                data = {k: z[k] for k in z.files}
        except (OSError, ValueError):
            data = None
    if data is None:
        data = _build_tables()
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_name(f"{path.stem}.{os.getpid()}.tmp.npz")
            np.savez(tmp, **data)
            os.replace(tmp, path)
        except OSError:
            pass
    return _BallTable(data)


def _unit_area_normal(u, v):
    """Euclidean normal q_u x q_v (outward, unnormalized) of the unit sphere."""
    cu = np.clip(np.cos(u), 0.0, None)
    bc = cu ** 1.5
    return np.stack([bc * np.cos(v), bc * np.sin(v), 0.5 * np.sin(u)], axis=-1)


@dataclass(frozen=True, eq=False)
class GaugeBall(Domain):
    """Koranyi ball B(center, radius) in H^1."""

    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    radius: float = 1.0
    n_cloud: int = N_CLOUD
    name = "gauge_ball"

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).copy()
        if c.shape != (3,):
            raise UnsupportedError("domains are implemented on H^1 only")
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    # coordinates normalized to the unit ball at the origin
    def to_unit(self, p) -> np.ndarray:
        if self.is_unit:
            return np.asarray(p, dtype=float)
        return G.dilate(1.0 / self.radius, G.mul(-self.center, np.asarray(p, dtype=float)))

    def from_unit(self, q) -> np.ndarray:
        if self.is_unit:
            return np.asarray(q, dtype=float)
        return G.mul(self.center, G.dilate(self.radius, q))

    @cached_property
    def is_unit(self) -> bool:
        return self.radius == 1.0 and not np.any(self.center)

    def contains(self, p) -> np.ndarray:
        return G.gauge_norm(self.to_unit(p)) < 1.0

    def project(self, p) -> np.ndarray:
        """Boundary point along the dilation ray through p (gauge-radial projection)."""
        q = self.to_unit(p)
        r = G.gauge_norm(q)
        safe = r > 0
        q = np.where(safe[..., None], q, np.array([1.0, 0.0, 0.0]))
        r = np.where(safe, r, 1.0)
        x, y, t = q[..., 0] / r, q[..., 1] / r, q[..., 2] / r ** 2
        return self.from_unit(np.stack([x, y, t], axis=-1))

    def bounding_box(self) -> np.ndarray:
        R = self.radius
        xc, yc, tc = self.center
        zc = np.hypot(xc, yc)
        dt = R * R + 2 * R * zc
        return np.array([[xc - R, xc + R], [yc - R, yc + R], [tc - dt, tc + dt]])

    @cached_property
    def surface(self):
        return BallSurface(None if self.is_unit else self.from_unit)

    @cached_property
    def unit_surface(self):
        return BallSurface()

    @cached_property
    def unit_cloud(self):
        return self.unit_surface.cloud(self.n_cloud)

    def boundary_distance(self, p, refine: bool = True) -> np.ndarray:
        """Exact (to optimizer tolerance) distance, clamped below by |R - ||c^{-1}p|||."""
        q = self.to_unit(p)
        flat = q.reshape(-1, 3)
        d = nearest_on_surface(flat, self.unit_surface, self.unit_cloud, refine=refine)[0]
        d = np.maximum(d, np.abs(1.0 - G.gauge_norm(flat)))
        return (self.radius * d).reshape(q.shape[:-1])

    def signed_distance_fast(self, p) -> np.ndarray:
        """Tabulated signed distance (positive inside)."""
        q = self.to_unit(p)
        xi = np.sqrt(q[..., 0] ** 2 + q[..., 1] ** 2)
        tau = np.abs(q[..., 2])
        nrm = G.gauge_norm(q)
        out = np.empty(xi.shape)
        table = unit_ball_table()
        inside_table = table.covers(xi, tau)
        if np.any(inside_table):
            out[inside_table] = table(xi[inside_table], tau[inside_table])
        if np.any(~inside_table):
            out[~inside_table] = -self.boundary_distance(self.from_unit(q[~inside_table])) / self.radius
        lower = 1.0 - nrm
        # the gauge bound |1 - ||q||| is exact along radial directions and always valid
        out = np.where(nrm < 1, np.maximum(out, lower), np.minimum(out, lower))
        return self.radius * out

    def fast_distance(self, p) -> np.ndarray:
        return np.abs(self.signed_distance_fast(p))

    def step_distance(self, p) -> np.ndarray:
        return self.fast_distance(p)

    def distance_lower_bound(self, p) -> np.ndarray:
        """R |1 - ||q|||, from the triangle inequality for the gauge."""
        return self.radius * np.abs(1.0 - G.gauge_norm(self.to_unit(p)))

    def boundary_params(self, p):
        """(phi, theta) of a boundary point in the unit-sphere parametrization."""
        q = self.to_unit(p)
        r2 = q[..., 0] ** 2 + q[..., 1] ** 2
        return np.arctan2(q[..., 2], r2), np.mod(np.arctan2(q[..., 1], q[..., 0]), 2 * np.pi)

    def boundary_point(self, phi, theta) -> np.ndarray:
        return self.from_unit(BallSurface.unit_point(np.asarray(phi, float), np.asarray(theta, float)))

    def sample_boundary(self, rng, n: int, delta: float = 0.0, kind: str = "euclidean_H2") -> np.ndarray:
        """Boundary samples distributed by the chosen surface measure, optionally with |z| >= delta."""
        out = []
        got = 0
        dens_max = self._density_bound(kind)
        while got < n:
            m = 2 * (n - got) + 64
            u = rng.uniform(-np.pi / 2, np.pi / 2, m)
            v = rng.uniform(0, 2 * np.pi, m)
            w = self.density(kind, u, v)
            keep = rng.uniform(0, dens_max, m) < w
            if delta > 0:
                keep &= np.sqrt(np.clip(np.cos(u), 0, None)) >= delta
            pts = self.boundary_point(u[keep], v[keep])
            out.append(pts)
            got += pts.shape[0]
        return np.concatenate(out)[:n]

    def _density_bound(self, kind):
        u = np.linspace(-np.pi / 2, np.pi / 2, 721)
        v = np.linspace(0, 2 * np.pi, 73)
        U, V = np.meshgrid(u, v)
        return 1.2 * float(np.max(self.density(kind, U.ravel(), V.ravel())))

    def density(self, kind: str, u, v) -> np.ndarray:
        """Density of the surface measure w.r.t. dphi dtheta at parameters (u, v)."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        R = self.radius
        xc, yc, _ = self.center
        # linear part of q -> c . delta_R(q)
        J = np.array([[R, 0.0, 0.0], [0.0, R, 0.0], [2 * yc * R, -2 * xc * R, R * R]])
        cof = np.linalg.det(J) * np.linalg.inv(J).T
        N = _unit_area_normal(u, v) @ cof.T
        if kind == "euclidean_H2":
            return np.linalg.norm(N, axis=-1)
        if kind == "metric_regular_proxy":
            q = self.boundary_point(u, v)
            nx = N[..., 0] + 2 * q[..., 1] * N[..., 2]
            ny = N[..., 1] - 2 * q[..., 0] * N[..., 2]
            return np.hypot(nx, ny)
        raise ValueError(f"unknown surface measure kind {kind!r}")


def characteristic_set(ball) -> np.ndarray:
    """The two characteristic points (poles) of a gauge ball."""
    if not isinstance(ball, GaugeBall):
        raise UnsupportedError("characteristic set is available for gauge balls only")
    R2 = ball.radius ** 2
    return G.mul(ball.center, np.array([[0.0, 0.0, R2], [0.0, 0.0, -R2]]))


# ----------------------------------------------------------------------------
# surface measures


SURFACE_KINDS = {"euclidean_H2": 2, "metric_regular_proxy": 3}


@dataclass(frozen=True)
class SurfaceMeasure:
    """Surface measure on a gauge ball.

    ``euclidean_H2`` is the Euclidean area; ``metric_regular_proxy`` is the
    horizontal perimeter (area weighted by the length of the horizontal
    part of the unit normal), which is left-invariant and scales like r^3
    under dilations.
    """

    kind: str = "euclidean_H2"
    normalization: float = 1.0

    def __post_init__(self):
        if self.kind not in SURFACE_KINDS:
            raise ValueError(f"unknown surface measure kind {self.kind!r}")

    @property
    def s(self) -> int:
        return SURFACE_KINDS[self.kind]

    def __call__(self, ball, f=None, patch=None, **kw) -> float:
        return self.normalization * surface_integral(ball, self.kind, f, patch=patch, **kw)


def surface_integral(ball: GaugeBall, kind: str, f: Optional[Callable] = None, patch=None,
                     n_phi: int = 192, n_theta: int = 256) -> float:
    """Integral of f over the sphere (or the surface ball ``patch = (x0, r)``).

    f maps boundary coordinate arrays (..., 3) to values; ``None`` means 1.
    """
    if kind not in SURFACE_KINDS:
        raise ValueError(f"unknown surface measure kind {kind!r}")
    if patch is None:
        g, w = np.polynomial.legendre.leggauss(n_phi)
        u = g * np.pi / 2
        wu = w * np.pi / 2
        v = (np.arange(n_theta) + 0.5) * 2 * np.pi / n_theta
        U, V = np.meshgrid(u, v, indexing="ij")
        dens = ball.density(kind, U, V)
        vals = 1.0 if f is None else np.asarray(f(ball.boundary_point(U, V)), dtype=float)
        return float(np.sum(vals * dens * wu[:, None]) * 2 * np.pi / n_theta)
    x0, r = patch
    (ulo, uhi), (vlo, vhi), touches_pole = _patch_window(ball, np.asarray(x0, float), float(r))
    if touches_pole and kind == "euclidean_H2":
        warnings.warn("surface patch straddles a characteristic point", PoleWarning, stacklevel=2)
    nu, nv = 2 * n_phi, 2 * n_theta
    u = ulo + (np.arange(nu) + 0.5) * (uhi - ulo) / nu
    v = vlo + (np.arange(nv) + 0.5) * (vhi - vlo) / nv
    U, V = np.meshgrid(u, v, indexing="ij")
    pts = ball.boundary_point(U, V)
    inside = G.dist(pts, x0) < r
    if not np.any(inside):
        return 0.0
    dens = ball.density(kind, U[inside], V[inside])
    vals = 1.0 if f is None else np.asarray(f(pts[inside]), dtype=float)
    return float(np.sum(vals * dens) * (uhi - ulo) / nu * (vhi - vlo) / nv)


def _patch_window(ball, x0, r):
    """Parameter rectangle containing the surface ball Delta(x0, r)."""
    u0, v0 = ball.boundary_params(x0)
    u0, v0 = float(u0), float(v0)
    du = dv = max(2.0 * r / ball.radius, 1e-6)
    edge = np.linspace(0, 1, 401)
    for _ in range(60):
        ulo, uhi = max(u0 - du, -np.pi / 2), min(u0 + du, np.pi / 2)
        full_v = dv >= np.pi
        vlo, vhi = (0.0, 2 * np.pi) if full_v else (v0 - dv, v0 + dv)
        border = []
        if ulo > -np.pi / 2:
            border.append(np.stack([np.full_like(edge, ulo), vlo + edge * (vhi - vlo)], -1))
        if uhi < np.pi / 2:
            border.append(np.stack([np.full_like(edge, uhi), vlo + edge * (vhi - vlo)], -1))
        if not full_v:
            border.append(np.stack([ulo + edge * (uhi - ulo), np.full_like(edge, vlo)], -1))
            border.append(np.stack([ulo + edge * (uhi - ulo), np.full_like(edge, vhi)], -1))
        if not border:
            break
        B = np.concatenate(border)
        if np.all(G.dist(ball.boundary_point(B[:, 0], B[:, 1]), x0) >= r):
            break
        du *= 2
        dv *= 2
    touches = ulo <= -np.pi / 2 + 1e-12 or uhi >= np.pi / 2 - 1e-12
    return (ulo, uhi), (vlo, vhi), touches


# ----------------------------------------------------------------------------
# boxes


def _box_rects(lo, hi):
    rects = []
    for ax in range(3):
        o = [k for k in range(3) if k != ax]
        for val in (lo[ax], hi[ax]):
            rects.append(Rect(ax, float(val), (lo[o[0]], hi[o[0]]), (lo[o[1]], hi[o[1]])))
    return rects


def _rect_lower_bounds(p, rects):
    """Lower bound of the Koranyi distance from p to each rectangle."""
    x, y, t = p[..., 0], p[..., 1], p[..., 2]
    out = []
    for r in rects:
        if r.axis == 0:
            ey = np.clip(y, *r.a) - y
            out.append(np.hypot(x - r.value, ey))
        elif r.axis == 1:
            ex = np.clip(x, *r.a) - x
            out.append(np.hypot(ex, y - r.value))
        else:
            ex = np.clip(x, *r.a) - x
            ey = np.clip(y, *r.b) - y
            zr = np.hypot(x, y)
            rho = np.sqrt(zr * zr + np.abs(t - r.value)) - zr
            out.append(np.maximum(np.hypot(ex, ey), rho))
    return np.min(np.stack(out, axis=-1), axis=-1)


@dataclass(frozen=True, eq=False)
class Box(Domain):
    """Axis-aligned box in H^1 coordinates."""

    lo: tuple = (-1.0, -1.0, -1.0)
    hi: tuple = (1.0, 1.0, 1.0)
    n_cloud: int = N_CLOUD
    name = "box"

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(a) for a in self.lo))
        object.__setattr__(self, "hi", tuple(float(a) for a in self.hi))
        if any(a >= b for a, b in zip(self.lo, self.hi)):
            raise ValueError("box must have lo < hi on every axis")

    @property
    def rects(self):
        return _box_rects(self.lo, self.hi)

    @cached_property
    def surface(self):
        return RectSurface(self.rects)

    def contains(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return np.all((p > np.array(self.lo)) & (p < np.array(self.hi)), axis=-1)

    def bounding_box(self) -> np.ndarray:
        return np.array([self.lo, self.hi]).T

    def _project_box(self, p):
        lo, hi = np.array(self.lo), np.array(self.hi)
        q = np.clip(p, lo, hi)
        inside = np.all((p > lo) & (p < hi), axis=-1)
        if np.any(inside):
            pi = p[inside]
            gaps = np.concatenate([pi - lo, hi - pi], axis=-1)
            k = np.argmin(gaps, axis=-1)
            qi = pi.copy()
            ax = k % 3
            rows = np.arange(pi.shape[0])
            qi[rows, ax] = np.where(k < 3, lo[ax], hi[ax])
            q[inside] = qi
        return q

    def project(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return self._project_box(p.reshape(-1, 3)).reshape(p.shape)

    def step_distance(self, p) -> np.ndarray:
        return _rect_lower_bounds(np.asarray(p, dtype=float), self.rects)

    def boundary_distance(self, p, refine: bool = True) -> np.ndarray:
        P = np.asarray(p, dtype=float)
        d = super().boundary_distance(P, refine=refine)
        return np.maximum(d, self.step_distance(P))

    def sample_boundary(self, rng, n: int) -> np.ndarray:
        return self.surface.sample(rng, n)


@dataclass(frozen=True, eq=False)
class SlitBox(Box):
    """Box minus the thin closed slab {|x| <= width/2, y >= y0}."""

    width: float = 0.02
    y0: float = 0.0
    name = "slit_box"

    @property
    def rects(self):
        (x0, y0_, t0), (x1, y1, t1) = self.lo, self.hi
        w, s = self.width / 2, self.y0
        return [
            Rect(0, x0, (y0_, y1), (t0, t1)), Rect(0, x1, (y0_, y1), (t0, t1)),
            Rect(1, y0_, (x0, x1), (t0, t1)),
            Rect(1, y1, (x0, -w), (t0, t1)), Rect(1, y1, (w, x1), (t0, t1)),
            Rect(2, t0, (x0, x1), (y0_, s)), Rect(2, t0, (x0, -w), (s, y1)), Rect(2, t0, (w, x1), (s, y1)),
            Rect(2, t1, (x0, x1), (y0_, s)), Rect(2, t1, (x0, -w), (s, y1)), Rect(2, t1, (w, x1), (s, y1)),
            Rect(0, -w, (s, y1), (t0, t1)), Rect(0, w, (s, y1), (t0, t1)),
            Rect(1, s, (-w, w), (t0, t1)),
        ]

    def in_slab(self, p):
        p = np.asarray(p, dtype=float)
        return (np.abs(p[..., 0]) <= self.width / 2) & (p[..., 1] >= self.y0)

    def contains(self, p) -> np.ndarray:
        return super().contains(p) & ~self.in_slab(p)

    def project(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        flat = p.reshape(-1, 3)
        q = self._project_box(flat)
        slab = self.in_slab(flat) & Box.contains(self, flat)
        if np.any(slab):
            ps = flat[slab].copy()
            w = self.width / 2
            gx = w - np.abs(ps[:, 0])
            gy = ps[:, 1] - self.y0
            use_x = gx <= gy
            ps[use_x, 0] = np.where(ps[use_x, 0] >= 0, w, -w)
            ps[~use_x, 1] = self.y0
            q[slab] = ps
        return q.reshape(p.shape)


# ----------------------------------------------------------------------------
# corkscrews, cones, probes


@dataclass(frozen=True)
class CorkscrewResult:
    point: np.ndarray
    r: float
    achieved_distance_to_vertex: float
    achieved_distance_to_boundary: float
    M_effective: float


def _effective_M(r, dv, db):
    return max(r / dv, r / db) * (1 + 1e-9)


def corkscrew_point(ball: GaugeBall, x0, r: float, delta: float = 0.1, r0: float = 0.25) -> CorkscrewResult:
    """Interior corkscrew point gamma(s, x0) with 1 - s = r |z(x0)| (in unit-ball scale)."""
    if not 0 < r < r0 * ball.radius:
        raise PreconditionError(f"scale r = {r} outside (0, r0)")
    w = ball.to_unit(x0)
    zabs = float(np.hypot(w[0], w[1]))
    if zabs < delta:
        raise CharacteristicError(f"|z(x0)| = {zabs:.3g} below delta = {delta}")
    s = 1.0 - (r / ball.radius) * zabs
    pt = ball.from_unit(G.radial_curve_at(w, s))
    dv = float(G.dist(pt, np.asarray(x0, float)))
    db = float(ball.boundary_distance(pt))
    return CorkscrewResult(pt, float(r), dv, db, _effective_M(r, dv, db))


@dataclass(frozen=True)
class ConeSpec:
    """Cone {y : d(y, vertex) < (1 + alpha) d(y, boundary)}, optionally truncated at height h."""

    vertex: np.ndarray
    alpha: float = 1.0
    truncation: Optional[float] = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("aperture alpha must be positive")
        if self.truncation is not None and not self.truncation > 0:
            raise ValueError("truncation height must be positive")
        object.__setattr__(self, "vertex", np.asarray(self.vertex, dtype=float))

    def validate(self, domain, tol: float = 1e-9):
        if float(domain.boundary_distance(self.vertex)) > tol:
            raise PreconditionError("cone vertex is not on the boundary")


def _distance(domain, y):
    return domain.fast_distance(y) if hasattr(domain, "fast_distance") else domain.boundary_distance(y)


def cone_contains(spec: ConeSpec, domain, y, boundary_distance=None) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    d = _distance(domain, y) if boundary_distance is None else np.asarray(boundary_distance)
    dv = G.dist(y, spec.vertex)
    ok = domain.contains(y) & (dv < (1 + spec.alpha) * d)
    if spec.truncation is not None:
        ok &= dv < spec.truncation
    return ok


def nta_probe(domain, M_hypothesis: float, r0: float, n_samples: int, rng,
              delta: float = 0.1, n_candidates: int = 96, boundary_points=None) -> CheckReport:
    """Empirical interior/exterior corkscrew probe.

    For each sampled boundary point x0 and scale r <= r0, the effective
    constant is the smallest max(r/d(A, x0), r/d(A, boundary)) over
    candidate points A in B(x0, r) on the corresponding side.  Harnack
    chains are not examined.
    """
    records = []
    if n_samples == 0:
        return CheckReport("nta_probe", True, None, [], {"worst_M_interior": 0.0, "worst_M_exterior": 0.0},
                           {"M_hypothesis": M_hypothesis})
    if boundary_points is None:
        if isinstance(domain, GaugeBall):
            X0 = domain.sample_boundary(rng, n_samples, delta=delta)
        else:
            X0 = domain.sample_boundary(rng, n_samples)
    else:
        X0 = np.asarray(boundary_points, dtype=float)[:n_samples]
    scales = r0 * 2.0 ** (-rng.uniform(0, 4, X0.shape[0]))
    worst_int = worst_ext = 0.0
    for x0, r in zip(X0, scales):
        cand = G.sample_ball(rng, x0, r, n_candidates)
        if isinstance(domain, GaugeBall):
            w = domain.to_unit(x0)
            zabs = np.hypot(w[0], w[1])
            extra = [domain.from_unit(G.radial_curve_at(w, s)) for s in
                     (1 - 0.999 * (r / domain.radius) * zabs, 1 + 0.999 * (r / domain.radius) * zabs)]
            cand = np.concatenate([cand, np.array(extra)])
        inside = domain.contains(cand)
        dvert = G.dist(cand, x0)
        dbdry = domain.boundary_distance(cand)
        ok = (dvert <= r) & (dbdry > 0) & (dvert > 0)
        ratio = np.maximum(r / np.where(ok, dvert, np.inf), r / np.where(ok, dbdry, np.inf))
        ratio = np.where(ok, ratio, np.inf)
        m_int = float(np.min(np.where(inside, ratio, np.inf)))
        m_ext = float(np.min(np.where(~inside, ratio, np.inf)))
        worst_int, worst_ext = max(worst_int, m_int), max(worst_ext, m_ext)
        records.append({"x0": x0, "r": float(r), "M_interior": m_int, "M_exterior": m_ext,
                        "interior_pass": m_int <= M_hypothesis, "exterior_pass": m_ext <= M_hypothesis})
    passed = worst_int <= M_hypothesis and worst_ext <= M_hypothesis
    return CheckReport("nta_probe", passed, None, records,
                       {"worst_M_interior": worst_int, "worst_M_exterior": worst_ext,
                        "interior_pass_fraction": float(np.mean([r["interior_pass"] for r in records])),
                        "exterior_pass_fraction": float(np.mean([r["exterior_pass"] for r in records]))},
                       {"M_hypothesis": M_hypothesis, "r0": r0})
