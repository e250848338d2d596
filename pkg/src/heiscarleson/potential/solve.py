"""Discrete sub-Laplacian, Dirichlet solves, the fundamental solution and Green functions.

The 15-point stencil uses centred second differences and 4-point centred
cross differences.  Each off-diagonal coefficient depends only on (x, y),
which is constant along the stencil edge it weighs, so the assembled
matrix is exactly symmetric; its negative is positive definite and is
solved by conjugate gradients with an algebraic multigrid preconditioner.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
import pyamg
import scipy.sparse as sp

from .. import group as G
from ..domains import Domain, GaugeBall
from ..errors import AssemblyError, PoleError, PreconditionError, SolverError, UnsupportedError
from .grid import BOUNDARY, INTERIOR, Grid, ScalarField

Q1 = 4  # homogeneous dimension of H^1


def stencil(x, y, h):
    """Offsets and coefficients of the discrete operator at nodes with coordinates (x, y).

    Returns a list of (offset, coefficient array); the diagonal is minus
    the sum of the off-diagonal terms.
    """
    a33 = 4.0 * (x * x + y * y)
    ih2 = 1.0 / (h * h)
    one = np.full_like(np.asarray(x, dtype=float), ih2)
    cx = y * ih2  # 4y * d_x d_t, cross stencil weight 1/(4h^2)
    cy = -x * ih2
    return [
        ((1, 0, 0), one), ((-1, 0, 0), one), ((0, 1, 0), one), ((0, -1, 0), one),
        ((0, 0, 1), a33 * ih2), ((0, 0, -1), a33 * ih2),
        ((1, 0, 1), cx), ((-1, 0, -1), cx), ((1, 0, -1), -cx), ((-1, 0, 1), -cx),
        ((0, 1, 1), cy), ((0, -1, -1), cy), ((0, 1, -1), -cy), ((0, -1, 1), -cy),
    ]


@dataclass
class SubLaplacian:
    """Delta_h u = A u_I + B u_F on the interior nodes (I) given boundary-adjacent values (F)."""

    grid: Grid
    A: sp.csr_matrix
    B: sp.csr_matrix
    fixed_mask: np.ndarray

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Discrete operator at interior nodes for a full nodal array."""
        uI = values[self.grid.kind == INTERIOR]
        uF = values[self.fixed_mask]
        return self.A @ uI + self.B @ uF

    def _hierarchy(self):
        ml = getattr(self, "_ml", None)
        if ml is None:
            ml = pyamg.smoothed_aggregation_solver(-self.A, symmetry="symmetric", max_coarse=500)
            self._ml = ml
        return ml


def assemble_sublaplacian(grid: Grid) -> SubLaplacian:
    """Assemble the 15-point stencil on ``grid`` (cached on the grid)."""
    cached = getattr(grid, "_operator", None)
    if cached is not None:
        return cached
    kind = grid.kind
    ii = np.argwhere(kind == INTERIOR)
    fixed_mask = kind == BOUNDARY
    fixed_index = -np.ones(grid.shape, dtype=np.int64)
    fixed_index[fixed_mask] = np.arange(int(fixed_mask.sum()))
    x = grid.axes[0][ii[:, 0]]
    y = grid.axes[1][ii[:, 1]]
    row = np.arange(ii.shape[0])
    diag = np.zeros(ii.shape[0])
    axis_interior = np.zeros(ii.shape[0], dtype=np.int64)
    rA, cA, vA, rB, cB, vB = [], [], [], [], [], []
    for k, (off, coef) in enumerate(stencil(x, y, grid.h)):
        nb = ii + np.array(off)
        nk = kind[nb[:, 0], nb[:, 1], nb[:, 2]]
        if np.any(nk > BOUNDARY):
            bad = ii[nk > BOUNDARY]
            raise AssemblyError("stencil reaches exterior nodes", grid.nodes_at(bad))
        diag -= coef
        m_i = nk == INTERIOR
        if k < 6:
            axis_interior += m_i
        rA.append(row[m_i])
        cA.append(grid.interior_index[nb[m_i, 0], nb[m_i, 1], nb[m_i, 2]])
        vA.append(coef[m_i])
        m_f = ~m_i
        rB.append(row[m_f])
        cB.append(fixed_index[nb[m_f, 0], nb[m_f, 1], nb[m_f, 2]])
        vB.append(coef[m_f])
    isolated = axis_interior == 0
    if np.any(isolated) and grid.n_interior > 1:
        raise AssemblyError("grid too coarse: interior nodes without interior neighbours",
                            grid.nodes_at(ii[isolated]))
    rA.append(row)
    cA.append(row)
    vA.append(diag)
    n, nf = grid.n_interior, int(fixed_mask.sum())
    A = sp.csr_matrix((np.concatenate(vA), (np.concatenate(rA), np.concatenate(cA))), shape=(n, n))
    B = sp.csr_matrix((np.concatenate(vB), (np.concatenate(rB), np.concatenate(cB))), shape=(n, nf))
    op = SubLaplacian(grid, A, B, fixed_mask)
    grid._operator = op
    return op


def boundary_values(grid: Grid, f: Callable, mode: str = "project",
                    outer: Optional[Callable] = None) -> np.ndarray:
    """Values at the boundary-adjacent nodes.

    mode "project": f at the projection of each node onto the boundary;
    mode "ambient": f at the node itself.  Nodes inside the domain on a
    patch grid's outer layer take ``outer(node)``.
    """
    pts = grid.nodes(grid.boundary_mask)
    inside = grid.patch_edge[grid.boundary_mask]
    vals = np.empty(pts.shape[0])
    if mode == "project":
        out = ~inside
        if np.any(out):
            vals[out] = f(grid.domain.project(pts[out]))
    elif mode == "ambient":
        vals[:] = f(pts)
    else:
        raise ValueError(f"unknown boundary mode {mode!r}")
    if np.any(inside):
        if outer is None:
            if mode != "ambient":
                raise PreconditionError("patch grid needs outer data for nodes on its box edge")
        else:
            vals[inside] = outer(pts[inside])
    return vals


def solve_dirichlet(grid: Grid, f: Callable, mode: str = "project", outer: Optional[Callable] = None,
                    tol: float = 1e-12, maxiter: int = 400) -> ScalarField:
    """Discrete harmonic extension of boundary data ``f`` (vectorized callable on (m, 3) points)."""
    op = assemble_sublaplacian(grid)
    uF = boundary_values(grid, f, mode, outer)
    if not np.all(np.isfinite(uF)):
        raise PreconditionError("boundary data is not finite on the boundary-adjacent nodes")
    values = np.full(grid.shape, np.nan)
    values[op.fixed_mask] = uF
    rhs = op.B @ uF
    scale = float(np.max(np.abs(uF))) if uF.size else 0.0
    info = {"iterations": 0, "residuals": [], "f_inf": scale}
    if not np.any(rhs):
        uI = np.zeros(grid.n_interior)
    else:
        ml = op._hierarchy()
        res: list = []
        uI = ml.solve(rhs, tol=tol, accel="cg", maxiter=maxiter, residuals=res)
        rel = np.linalg.norm(rhs - (-op.A) @ uI) / np.linalg.norm(rhs)
        info.update(iterations=len(res) - 1, residuals=[float(r) for r in res], relative_residual=float(rel))
        if not np.isfinite(rel) or rel > max(100 * tol, 1e-9):
            raise SolverError(f"solver stalled at relative residual {rel:.3g}", res)
    values[grid.kind == INTERIOR] = uI
    r = op.apply(values)
    info["residual_inf_scaled"] = float(np.max(np.abs(r)) * grid.h ** 2) if r.size else 0.0
    return ScalarField(grid, values, info)


def fundamental_solution(p, q, c_q: Optional[float] = None, n: int = 1) -> np.ndarray:
    """Gamma(p, q) = c_Q d(p, q)^{2 - Q}; default c_Q from the calibration at h = 1/128."""
    if n != 1:
        raise UnsupportedError("the calibrated constant is available on H^1")
    d = G.dist(p, q)
    if np.any(d == 0):
        raise PoleError("fundamental solution evaluated at its pole")
    c = calibrate_cQ(1.0 / 128) if c_q is None else c_q
    return c * d ** (2 - (2 * n + 2))


@lru_cache(maxsize=32)
def _flux(h: float, half: float) -> float:
    m = int(round(half / h))
    k = np.arange(-m - 1, m + 2)
    X, Y, T = np.meshgrid(k * h, k * h, k * h, indexing="ij")
    n4 = (X * X + Y * Y) ** 2 + T * T
    with np.errstate(divide="ignore"):
        v = 1.0 / np.sqrt(n4)
    inK = np.zeros(X.shape, dtype=bool)
    inK[1:-1, 1:-1, 1:-1] = True
    core = (slice(1, -1),) * 3
    xc, yc = X[core], Y[core]
    total = 0.0
    for off, coef in stencil(xc, yc, h):
        nb = tuple(slice(1 + o, X.shape[0] - 1 + o) for o in off)
        cross = ~inK[nb]
        if np.any(cross):
            total += float(np.sum(coef[cross] * (v[nb][cross] - v[core][cross])))
    return total * h ** 3


def calibrate_cQ(grid_or_h, half: float = 0.5) -> float:
    """c_Q = -1 / (discrete flux of ||p||^{-2} out of the box [-half, half]^3).

    Summing the operator over the box telescopes to the stencil edges that
    cross its faces, so the pole itself never enters.
    """
    h = grid_or_h.h if isinstance(grid_or_h, Grid) else float(grid_or_h)
    return -1.0 / _flux(float(h), float(half))


class GreenField:
    """G(., y) = c_Q d(., y)^{-2} - h_y with h_y the discrete harmonic part."""

    def __init__(self, correction: ScalarField, pole, c_q: float):
        self.correction = correction
        self.grid = correction.grid
        self.pole = np.asarray(pole, dtype=float)
        self.c_q = c_q

    def gamma(self, pts) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return self.c_q / G.dist(pts, self.pole) ** 2

    def evaluate(self, pts) -> np.ndarray:
        return self.gamma(pts) - self.correction.evaluate(pts)

    def __call__(self, pts) -> np.ndarray:
        return self.gamma(pts) - self.correction(pts)

    def nodal(self) -> np.ndarray:
        """Full nodal array of G (inf at a pole node, NaN on exterior nodes)."""
        pts = self.grid.nodes()
        return self.gamma(pts).reshape(self.grid.shape) - self.correction.values


def green_function(grid: Grid, pole, c_q: Optional[float] = None, tol: float = 1e-12,
                   local: bool = False) -> GreenField:
    """Green function with pole y via the fundamental-solution splitting.

    On a patch grid, ``local=True`` makes it vanish on the box edge as well,
    i.e. the Green function of (domain cap box).
    """
    pole = np.asarray(pole, dtype=float)
    dom = grid.domain
    if not dom.contains(pole):
        raise PreconditionError("the pole must lie inside the domain")
    if float(dom.boundary_distance(pole)) < 4 * grid.h:
        raise PreconditionError("pole closer than 4h to the boundary")
    c = calibrate_cQ(grid) if c_q is None else c_q
    gam = lambda p: c / G.dist(p, pole) ** 2
    field = solve_dirichlet(grid, gam, tol=tol, outer=gam if local else None)
    return GreenField(field, pole, c)


def patch_box(domain, x0, r: float, margin: float = 2.0, pad_h: float = 0.0) -> np.ndarray:
    """Coordinate box containing B(x0, margin r), clipped to the domain's bounding box."""
    x0 = np.asarray(x0, dtype=float)
    R = margin * r
    zc = float(np.hypot(x0[0], x0[1]))
    half_t = R * R + 2 * R * zc
    box = np.array([[x0[0] - R, x0[0] + R], [x0[1] - R, x0[1] + R], [x0[2] - half_t, x0[2] + half_t]])
    bb = domain.bounding_box() + np.array([-1.0, 1.0]) * pad_h
    return np.stack([np.maximum(box[:, 0], bb[:, 0]), np.minimum(box[:, 1], bb[:, 1])], axis=-1)


def nested_solve(parent: ScalarField, f: Callable, boxes, hs, tol: float = 1e-12) -> list:
    """Solve on a chain of nested patch grids.

    Each patch takes Dirichlet data from ``f`` outside the domain and from
    the previous (coarser) field on its box edge inside the domain.
    """
    out = []
    for box, h in zip(boxes, hs):
        grid = Grid(parent.grid.domain, h, bbox=box)
        prev = parent

        def outer(p, prev=prev):
            v = prev.evaluate(p)
            if np.any(np.isnan(v)):
                raise PreconditionError("patch box is not covered by its parent field")
            return v

        field = solve_dirichlet(grid, f, outer=outer, tol=tol)
        out.append(field)
        parent = field
    return out


def green_weighted_energy(u: ScalarField, green: GreenField, eps: Optional[float] = None, mask=None):
    """Grid quadrature of |grad_H u|^2 G(., y) with the pole split off.

    Nodes within eps (default 4h) of the pole are replaced by the closed
    form |grad_H u(y)|^2 (2 c_Q V_1 eps^2 - h_y(y) V_1 eps^4).  Returns
    (value, pole_part).
    """
    grid = u.grid
    h = grid.h
    eps = 4 * h if eps is None else eps
    inter = grid.kind == INTERIOR
    if mask is not None:
        inter = inter & mask
    pts = grid.nodes(inter)
    gx, gy = u.nodal_gradient
    g2 = (gx ** 2 + gy ** 2)[inter]
    d = G.dist(pts, green.pole)
    far = d >= eps
    with np.errstate(divide="ignore"):
        gam = green.c_q / d[far] ** 2
    Gv = gam - green.correction.values[inter][far]
    body = float(np.sum(g2[far] * Gv)) * h ** 3
    pole = 0.0
    if np.any(~far):
        px, py = u.horizontal_gradient(green.pole[None, :])
        hy = float(green.correction.evaluate(green.pole[None, :])[0])
        V1 = G.unit_ball_volume(1)
        pole = float(px[0] ** 2 + py[0] ** 2) * (2 * green.c_q * V1 * eps ** 2 - hy * V1 * eps ** 4)
    return body + pole, pole


@dataclass
class BlowupLevel:
    """u_r(p) = u(x0 . delta_r p) solved on D_r = delta_{1/r}(x0^{-1} . domain) near the origin."""

    r: float
    x0: np.ndarray
    domain: Domain
    field: ScalarField

    def to_original(self, p) -> np.ndarray:
        return G.mul(self.x0, G.dilate(self.r, p))

    def from_original(self, x) -> np.ndarray:
        return G.dilate(1.0 / self.r, G.mul(G.inverse(self.x0), x))


def blowup_domain(ball: GaugeBall, x0, r: float) -> GaugeBall:
    c = G.dilate(1.0 / r, G.mul(G.inverse(np.asarray(x0, float)), ball.center))
    return GaugeBall(center=c, radius=ball.radius / r, n_cloud=ball.n_cloud)


def blowup_chain(parent: ScalarField, f: Callable, x0, radii, h: float = 1.0 / 16, margin: float = 2.0,
                 tol: float = 1e-12) -> list:
    """Harmonic extension near a boundary point x0 at each scale r, in blown-up coordinates.

    Left translations and dilations preserve the sub-Laplacian, so u_r is
    harmonic on the gauge ball D_r with data f(x0 . delta_r p).  Every level
    is solved on the box around B(0, margin) with spacing h and takes its
    box-edge data from the previous (larger r) level.  Radii must decrease
    by at most a factor of margin per level.
    """
    ball = parent.grid.domain
    if not isinstance(ball, GaugeBall):
        raise UnsupportedError("blow-up patches need a gauge ball")
    x0 = np.asarray(x0, dtype=float)
    out = []
    prev = None
    for r in radii:
        r = float(r)
        D = blowup_domain(ball, x0, r)
        box = patch_box(D, np.zeros(3), 1.0, margin, pad_h=2 * h)
        grid = Grid(D, h, bbox=box)
        fr = lambda p, r=r: f(G.mul(x0, G.dilate(r, p)))
        if prev is None:
            src = lambda p, r=r: parent.evaluate(G.mul(x0, G.dilate(r, p)))
        else:
            src = lambda p, r=r, prev=prev: prev.field.evaluate(G.dilate(r / prev.r, p))

        def outer(p, src=src):
            v = src(p)
            if np.any(np.isnan(v)):
                raise PreconditionError("blow-up patch is not covered by the previous level")
            return v

        level = BlowupLevel(r, x0, D, solve_dirichlet(grid, fr, outer=outer, tol=tol))
        out.append(level)
        prev = level
    return out
