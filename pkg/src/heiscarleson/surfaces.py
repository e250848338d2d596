"""Parametrized boundary surfaces and nearest-point search in the Koranyi metric.

A surface is a union of patches, each parametrized over a rectangle in
``(u, v)``.  Distance from a query point to the surface is found by a
coarse minimum over a point cloud followed by a vectorized Nelder-Mead
search on the patch parameters, started from the best cloud points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .group import split

GOLDEN = (1 + 5 ** 0.5) / 2


def d4_pairwise(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Fourth power of d(P_i, Q_j) for P (N, d), Q (M, d) -> (N, M)."""
    xp, yp, tp = split(P)
    xq, yq, tq = split(Q)
    dz2 = np.zeros((P.shape[0], Q.shape[0]))
    om = np.zeros_like(dz2)
    for i in range(xp.shape[-1]):
        dx = xp[:, None, i] - xq[None, :, i]
        dy = yp[:, None, i] - yq[None, :, i]
        dz2 += dx * dx + dy * dy
        om += xq[None, :, i] * yp[:, None, i] - yq[None, :, i] * xp[:, None, i]
    dt = tp[:, None] - tq[None, :] + 2.0 * om
    return dz2 * dz2 + dt * dt


def d4_rows(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Fourth power of d(P_i, Q_i) row by row."""
    xp, yp, tp = split(P)
    xq, yq, tq = split(Q)
    dz2 = np.sum((xp - xq) ** 2 + (yp - yq) ** 2, axis=-1)
    dt = tp - tq + 2.0 * np.sum(xq * yp - yq * xp, axis=-1)
    return dz2 * dz2 + dt * dt


@dataclass(frozen=True)
class SurfaceCloud:
    pid: np.ndarray
    u: np.ndarray
    v: np.ndarray
    points: np.ndarray

    def __len__(self):
        return self.pid.size


class PatchSurface:
    """Interface: ``point``, ``clip``, ``steps`` and ``cloud``."""

    n_patches: int = 1

    def point(self, pid, u, v) -> np.ndarray:
        raise NotImplementedError

    def clip(self, pid, u, v):
        raise NotImplementedError

    def steps(self, pid, n_cloud: int):
        raise NotImplementedError

    def cloud(self, n: int) -> SurfaceCloud:
        raise NotImplementedError


def nearest_on_surface(
    P: np.ndarray,
    surface: PatchSurface,
    cloud: SurfaceCloud,
    cloud_points: Optional[np.ndarray] = None,
    transform: Optional[Callable] = None,
    refine: bool = True,
    starts: int = 2,
    chunk_bytes: int = 2 ** 24,
    tol: float = 1e-10,
    max_iter: int = 400,
):
    """Minimize d(P_i, transform(q)) over the surface.

    ``cloud_points`` are the (possibly transformed) cloud coordinates; by
    default the raw cloud.  The best ``starts`` cloud points seed a
    Nelder-Mead search on the patch parameters.  Returns
    ``(distance, pid, u, v)``.
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    Q = cloud.points if cloud_points is None else cloud_points
    N, M = P.shape[0], Q.shape[0]
    k = max(1, min(starts, M))
    arg = np.empty((N, k), dtype=np.intp)
    best = np.empty((N, k))
    rows = max(1, chunk_bytes // (8 * 6 * max(M, 1)))
    for s in range(0, N, rows):
        d4 = d4_pairwise(P[s:s + rows], Q)
        if k == 1:
            j = np.argmin(d4, axis=1)[:, None]
        else:
            j = np.argpartition(d4, k - 1, axis=1)[:, :k]
        arg[s:s + rows] = j
        best[s:s + rows] = np.take_along_axis(d4, j, axis=1)
    result = None
    for j in range(k):
        pid = cloud.pid[arg[:, j]].copy()
        u = cloud.u[arg[:, j]].copy()
        v = cloud.v[arg[:, j]].copy()
        f = best[:, j].copy()
        if refine and N:
            f, u, v = _nelder_mead(P, surface, pid, u, v, f, len(cloud), transform, tol, max_iter)
        if result is None:
            result = [f, pid, u, v]
        else:
            better = f < result[0]
            for slot, new in zip(result, (f, pid, u, v)):
                slot[better] = new[better]
    f, pid, u, v = result
    return np.sqrt(np.sqrt(f)), pid, u, v


def _nelder_mead(P, surface, pid, u, v, f0, n_cloud, transform, tol, max_iter):
    """Vectorized Nelder-Mead in the (u, v) parameters, one simplex per query."""
    su, sv = surface.steps(pid, n_cloud)

    def obj(rows, x):
        uu, vv = surface.clip(pid[rows], x[:, 0], x[:, 1])
        q = surface.point(pid[rows], uu, vv)
        if transform is not None:
            q = transform(q)
        return d4_rows(P[rows], q)

    N = P.shape[0]
    x0 = np.stack([u, v], axis=-1)
    simp = np.stack([x0, x0 + np.stack([su, 0 * sv], -1), x0 + np.stack([0 * su, sv], -1)], axis=1)
    rows = np.arange(N)
    fv = np.stack([f0, obj(rows, simp[:, 1]), obj(rows, simp[:, 2])], axis=1)
    active = rows
    for _ in range(max_iter):
        if active.size == 0:
            break
        S, F = simp[active], fv[active]
        o = np.argsort(F, axis=1)
        S = np.take_along_axis(S, o[..., None], axis=1)
        F = np.take_along_axis(F, o, axis=1)
        c = 0.5 * (S[:, 0] + S[:, 1])
        xr = 2 * c - S[:, 2]
        fr = obj(active, xr)
        a = fr < F[:, 0]
        b = ~a & (fr < F[:, 1])
        rest = ~a & ~b
        new, fnew = S[:, 2].copy(), F[:, 2].copy()
        if np.any(a):
            xe = 3 * c[a] - 2 * S[a, 2]
            fe = obj(active[a], xe)
            e = fe < fr[a]
            new[a] = np.where(e[:, None], xe, xr[a])
            fnew[a] = np.where(e, fe, fr[a])
        new[b], fnew[b] = xr[b], fr[b]
        if np.any(rest):
            outside = rest & (fr < F[:, 2])
            xc = np.where(outside[:, None], c + 0.5 * (xr - c), c + 0.5 * (S[:, 2] - c))
            xc = xc[rest]
            fc = obj(active[rest], xc)
            lim = np.where(outside[rest], fr[rest], F[rest, 2])
            acc = fc < lim
            idx = np.flatnonzero(rest)
            new[idx[acc]], fnew[idx[acc]] = xc[acc], fc[acc]
            sh = idx[~acc]
            if sh.size:
                for kk in (1, 2):
                    S[sh, kk] = S[sh, 0] + 0.5 * (S[sh, kk] - S[sh, 0])
                    F[sh, kk] = obj(active[sh], S[sh, kk])
                new[sh], fnew[sh] = S[sh, 2], F[sh, 2]
        S[:, 2], F[:, 2] = new, fnew
        simp[active], fv[active] = S, F
        size = np.max(np.abs(S[:, 1:] - S[:, :1]), axis=(1, 2))
        active = active[size > tol]
    jbest = np.argmin(fv, axis=1)
    xb = simp[rows, jbest]
    ub, vb = surface.clip(pid, xb[:, 0], xb[:, 1])
    return fv[rows, jbest], ub, vb


class BallSurface(PatchSurface):
    """Sphere {|z|^4 + t^2 = 1} in H^1.

    Measures use (phi, theta) with |z|^2 = cos(phi), t = sin(phi).  The
    optimizer uses a chart (u, v) that stays smooth through the poles:
    phi = (pi/2) sin(pi u / 2) and a signed radius, so u is 4-periodic and
    crossing u = 1 passes over the north pole to the opposite meridian.
    ``place`` sends unit-sphere points to the actual ball.
    """

    n_patches = 1

    def __init__(self, place: Optional[Callable] = None):
        self.place = place

    @staticmethod
    def unit_point(phi, theta):
        c = np.sqrt(np.clip(np.cos(phi), 0.0, None))
        return np.stack([c * np.cos(theta), c * np.sin(theta), np.sin(phi)], axis=-1)

    @staticmethod
    def chart_point(u, v):
        w = 0.5 * np.pi * np.asarray(u, dtype=float)
        phi = 0.5 * np.pi * np.sin(w)
        r = np.sqrt(np.clip(np.cos(phi), 0.0, None)) * np.where(np.cos(w) < 0, -1.0, 1.0)
        return np.stack([r * np.cos(v), r * np.sin(v), np.sin(phi)], axis=-1)

    @staticmethod
    def phi_to_u(phi):
        return np.arcsin(np.clip(2 * np.asarray(phi) / np.pi, -1, 1)) * 2 / np.pi

    def point(self, pid, u, v):
        q = self.chart_point(u, v)
        return q if self.place is None else self.place(q)

    def clip(self, pid, u, v):
        return u, v

    def steps(self, pid, n_cloud):
        h = np.sqrt(4 * np.pi / max(n_cloud, 1))
        return np.full(np.shape(pid), 0.5 * h), np.full(np.shape(pid), h)

    def cloud(self, n: int) -> SurfaceCloud:
        i = np.arange(n) + 0.5
        phi = np.arcsin(2 * i / n - 1)
        v = np.mod(2 * np.pi * i / GOLDEN, 2 * np.pi)
        u = self.phi_to_u(phi)
        return SurfaceCloud(np.zeros(n, dtype=np.intp), u, v, self.point(None, u, v))


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle: coordinate ``axis`` fixed at ``value``.

    ``a`` and ``b`` are the ranges of the two remaining coordinates in
    increasing axis order.
    """

    axis: int
    value: float
    a: tuple
    b: tuple

    @property
    def area(self):
        return (self.a[1] - self.a[0]) * (self.b[1] - self.b[0])


class RectSurface(PatchSurface):
    def __init__(self, rects):
        self.rects = list(rects)
        self.n_patches = len(self.rects)
        self._lo = np.array([[r.a[0], r.b[0]] for r in self.rects])
        self._hi = np.array([[r.a[1], r.b[1]] for r in self.rects])
        self._axis = np.array([r.axis for r in self.rects])
        self._val = np.array([r.value for r in self.rects])

    def point(self, pid, u, v):
        pid = np.asarray(pid)
        out = np.empty(pid.shape + (3,))
        axis = self._axis[pid]
        for ax in range(3):
            m = axis == ax
            others = [k for k in range(3) if k != ax]
            out[m, ax] = self._val[pid[m]]
            out[m, others[0]] = np.asarray(u)[m]
            out[m, others[1]] = np.asarray(v)[m]
        return out

    def clip(self, pid, u, v):
        return (np.clip(u, self._lo[pid, 0], self._hi[pid, 0]),
                np.clip(v, self._lo[pid, 1], self._hi[pid, 1]))

    def _spacing(self, n_cloud):
        total = sum(r.area for r in self.rects)
        return np.sqrt(total / max(n_cloud, 1))

    def steps(self, pid, n_cloud):
        h = self._spacing(n_cloud)
        return np.full(np.shape(pid), h), np.full(np.shape(pid), h)

    def cloud(self, n: int) -> SurfaceCloud:
        h = self._spacing(n)
        pids, us, vs = [], [], []
        for k, r in enumerate(self.rects):
            na = max(2, int(np.ceil((r.a[1] - r.a[0]) / h)) + 1)
            nb = max(2, int(np.ceil((r.b[1] - r.b[0]) / h)) + 1)
            uu, vv = np.meshgrid(np.linspace(*r.a, na), np.linspace(*r.b, nb), indexing="ij")
            pids.append(np.full(uu.size, k))
            us.append(uu.ravel())
            vs.append(vv.ravel())
        pid = np.concatenate(pids)
        u = np.concatenate(us)
        v = np.concatenate(vs)
        return SurfaceCloud(pid, u, v, self.point(pid, u, v))

    def sample(self, rng, n):
        areas = np.array([r.area for r in self.rects])
        pid = rng.choice(len(self.rects), size=n, p=areas / areas.sum())
        u = rng.uniform(self._lo[pid, 0], self._hi[pid, 0])
        v = rng.uniform(self._lo[pid, 1], self._hi[pid, 1])
        return self.point(pid, u, v)
