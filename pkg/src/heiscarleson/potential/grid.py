"""Uniform grids on H^1 domains and grid-sampled scalar fields.

Nodes lie on the lattice h Z^3 intersected with a bounding box.  A node is
*interior* if it lies in the domain and off the outermost layer of the
box; the 27-neighbourhood ring around the interior forms the
*boundary-adjacent* nodes that carry Dirichlet data; everything else is
*exterior* and holds NaN.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy import ndimage

from ..errors import OutOfDomainError

INTERIOR, BOUNDARY, EXTERIOR = 0, 1, 2
MAGIC = b"HSCF0001"


class Grid:
    """Lattice nodes of spacing ``h`` covering ``bbox`` (3 x 2 array).

    If ``bbox`` does not cover the domain, domain nodes on the box's outer
    layer become boundary-adjacent and take their values from the
    ``outer`` callable supplied to the solver (for nested local patches).
    """

    def __init__(self, domain, h: float, bbox=None, pad: int = 2):
        if not h > 0:
            raise ValueError("grid spacing must be positive")
        self.domain = domain
        self.h = float(h)
        box = np.asarray(domain.bounding_box() if bbox is None else bbox, dtype=float)
        if bbox is None:
            box = box + np.array([-1.0, 1.0]) * pad * self.h
        lo = np.floor(box[:, 0] / self.h - 1e-9).astype(int)
        hi = np.ceil(box[:, 1] / self.h + 1e-9).astype(int)
        self.index_lo = lo
        self.shape = tuple(int(v) for v in hi - lo + 1)
        self.axes = [self.h * np.arange(l, l + n) for l, n in zip(lo, self.shape)]
        self.full_cover = bbox is None

        X, Y, T = np.meshgrid(*self.axes, indexing="ij")
        pts = np.stack([X, Y, T], axis=-1)
        inside = np.asarray(domain.contains(pts.reshape(-1, 3))).reshape(self.shape)
        edge = np.zeros(self.shape, dtype=bool)
        edge[[0, -1], :, :] = True
        edge[:, [0, -1], :] = True
        edge[:, :, [0, -1]] = True
        interior = inside & ~edge
        ring = ndimage.binary_dilation(interior, structure=np.ones((3, 3, 3), dtype=bool)) & ~interior
        kind = np.full(self.shape, EXTERIOR, dtype=np.int8)
        kind[interior] = INTERIOR
        kind[ring] = BOUNDARY
        self.kind = kind
        self.inside = inside
        self.n_interior = int(interior.sum())
        self.interior_index = -np.ones(self.shape, dtype=np.int64)
        self.interior_index[interior] = np.arange(self.n_interior)
        self.boundary_mask = ring
        # fixed nodes that lie inside the domain sit on the box edge (patch grids)
        self.patch_edge = ring & inside

    @property
    def bbox(self) -> np.ndarray:
        return np.array([[a[0], a[-1]] for a in self.axes])

    def nodes(self, mask=None) -> np.ndarray:
        """Coordinates of the nodes selected by ``mask`` (default: all), shape (m, 3)."""
        if mask is None:
            mask = np.ones(self.shape, dtype=bool)
        ii = np.nonzero(mask)
        return np.stack([self.axes[k][ii[k]] for k in range(3)], axis=-1)

    def nodes_at(self, idx) -> np.ndarray:
        """Coordinates of integer node indices, shape (m, 3)."""
        idx = np.asarray(idx)
        return np.stack([self.axes[k][idx[:, k]] for k in range(3)], axis=-1)

    @cached_property
    def interior_nodes(self) -> np.ndarray:
        return self.nodes(self.kind == INTERIOR)

    def covers(self, pts) -> np.ndarray:
        """True where pts lie strictly inside the node box."""
        pts = np.asarray(pts, dtype=float)
        b = self.bbox
        return np.all((pts >= b[:, 0]) & (pts <= b[:, 1]), axis=-1)

    def describe(self) -> dict:
        return {"h": self.h, "shape": list(self.shape), "n_interior": self.n_interior,
                "n_boundary": int(self.boundary_mask.sum()), "bbox": self.bbox.tolist()}


def _trilinear(grid: Grid, values: np.ndarray, pts: np.ndarray) -> np.ndarray:
    pts = np.asarray(pts, dtype=float)
    shp = pts.shape[:-1]
    P = pts.reshape(-1, 3)
    out = np.full(P.shape[0], np.nan)
    s = (P / grid.h) - grid.index_lo
    i0 = np.floor(s).astype(np.int64)
    ok = np.all((i0 >= 0) & (i0 < np.array(grid.shape) - 1), axis=1)
    # points exactly on the last node plane
    on_top = np.all((i0 >= 0) & (i0 <= np.array(grid.shape) - 1), axis=1) & ~ok
    if np.any(on_top):
        i0[on_top] = np.minimum(i0[on_top], np.array(grid.shape) - 2)
        ok |= on_top
    if not np.any(ok):
        return out.reshape(shp)
    i0 = i0[ok]
    w = s[ok] - i0
    acc = np.zeros(i0.shape[0])
    for dx in (0, 1):
        wx = w[:, 0] if dx else 1 - w[:, 0]
        for dy in (0, 1):
            wy = w[:, 1] if dy else 1 - w[:, 1]
            for dt in (0, 1):
                wt = w[:, 2] if dt else 1 - w[:, 2]
                acc = acc + wx * wy * wt * values[i0[:, 0] + dx, i0[:, 1] + dy, i0[:, 2] + dt]
    out[ok] = acc
    return out.reshape(shp)


@dataclass
class ScalarField:
    """Values on the interior and boundary-adjacent nodes of a grid (NaN elsewhere)."""

    grid: Grid
    values: np.ndarray
    info: dict = field(default_factory=dict)

    def evaluate(self, pts) -> np.ndarray:
        """Trilinear interpolation; NaN where the cell touches unknown nodes."""
        return _trilinear(self.grid, self.values, pts)

    def __call__(self, pts) -> np.ndarray:
        v = self.evaluate(pts)
        if np.any(np.isnan(v)):
            raise OutOfDomainError("field evaluated outside its resolved region")
        return v

    @cached_property
    def nodal_gradient(self):
        """Nodal (X u, Y u) by central differences, one-sided where a neighbour is unknown."""
        u = self.values
        h = self.grid.h
        d = []
        for ax in range(3):
            fwd = (np.roll(u, -1, axis=ax) - u) / h
            bwd = (u - np.roll(u, 1, axis=ax)) / h
            sl_lo = [slice(None)] * 3
            sl_hi = [slice(None)] * 3
            sl_lo[ax] = 0
            sl_hi[ax] = -1
            fwd[tuple(sl_hi)] = np.nan
            bwd[tuple(sl_lo)] = np.nan
            cen = 0.5 * (fwd + bwd)
            cen = np.where(np.isnan(fwd), bwd, np.where(np.isnan(bwd), fwd, cen))
            d.append(cen)
        X, Y, _ = np.meshgrid(*self.grid.axes, indexing="ij")
        return d[0] + 2 * Y * d[2], d[1] - 2 * X * d[2]

    def horizontal_gradient(self, pts):
        """Interpolated (X u, Y u) at arbitrary points."""
        gx, gy = self.nodal_gradient
        return _trilinear(self.grid, gx, pts), _trilinear(self.grid, gy, pts)

    def interior_values(self) -> np.ndarray:
        return self.values[self.grid.kind == INTERIOR]

    # exports
    def to_csv_slice(self, path, axis: int = 2, value: float = 0.0) -> None:
        """Write the node plane closest to coordinate ``value`` along ``axis``."""
        k = int(np.argmin(np.abs(self.grid.axes[axis] - value)))
        sl = [slice(None)] * 3
        sl[axis] = k
        plane = self.values[tuple(sl)]
        others = [a for a in range(3) if a != axis]
        A, B = np.meshgrid(self.grid.axes[others[0]], self.grid.axes[others[1]], indexing="ij")
        names = ["x", "y", "t"]
        data = np.stack([A.ravel(), B.ravel(), plane.ravel()], axis=-1)
        header = f"{names[others[0]]},{names[others[1]]},value"
        np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17g")

    def dump(self, path) -> None:
        """Binary dump: magic, dims (3 x int64), h, bbox (6 x float64), then row-major float64 values.

        All numbers little-endian.
        """
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<3q", *self.grid.shape))
            fh.write(struct.pack("<d", self.grid.h))
            fh.write(struct.pack("<6d", *self.grid.bbox.ravel()))
            fh.write(np.ascontiguousarray(self.values, dtype="<f8").tobytes())


def load_dump(path):
    """Read a binary dump; returns (values, h, bbox)."""
    with open(path, "rb") as fh:
        if fh.read(8) != MAGIC:
            raise ValueError("not a field dump")
        dims = struct.unpack("<3q", fh.read(24))
        (h,) = struct.unpack("<d", fh.read(8))
        bbox = np.array(struct.unpack("<6d", fh.read(48))).reshape(3, 2)
        vals = np.frombuffer(fh.read(), dtype="<f8").reshape(dims)
    return vals.copy(), h, bbox
