"""Boundary estimates for harmonic measure and positive harmonic functions on the gauge ball."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .. import group as G
from ..domains import corkscrew_point
from ..report import CheckReport
from .grid import Grid
from .solve import green_function
from .walks import SpherePartition, WalkConfig, harmonic_measure


def dahlberg_check(ball, x, x0, radii: Sequence[float], grid: Grid, n_walks: int,
                   cfg: WalkConfig) -> CheckReport:
    """omega^x(Delta(x0, r)) / [r^{Q-2} G(x, A_r(x0))] across a ladder of radii.

    G(x, A) is read from the single solve with pole x, using G(x, A) = G(A, x).
    """
    x = np.asarray(x, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    est = harmonic_measure(x, ball, SpherePartition(ball), n_walks, cfg,
                           doubling_ladder=[(x0, r) for r in radii])
    green = green_function(grid, x)
    records = []
    for r in radii:
        A = corkscrew_point(ball, x0, r).point
        w = est.ball_mass(x0, r)
        g = float(green.evaluate(A))
        ratio = w.mean / (r ** 2 * g) if g > 0 else float("nan")
        records.append({"r": float(r), "omega": w.mean, "omega_se": w.se, "green_at_corkscrew": g,
                        "ratio": ratio})
    ratios = np.array([rec["ratio"] for rec in records])
    ok = np.all(np.isfinite(ratios) & (ratios > 0))
    C = float(max(ratios.max(), 1.0 / ratios.min())) if ok else float("inf")
    dbl = [d["ratio"] for d in est.doubling]
    return CheckReport("dahlberg", bool(ok), cfg.seed, records,
                       {"C": C, "ratio_spread": float(ratios.max() / ratios.min()) if ok else float("inf"),
                        "doubling_max": float(max(dbl)) if dbl else float("nan"), "n_walks": n_walks,
                        "censored": est.n_censored}, {})


def local_comparison_check(ball, x0, r: float, M: float, grid: Grid, poles, n_samples: int,
                           rng) -> CheckReport:
    """(u/v)(x) / (u/v)(A_r(x0)) for u, v Green functions with poles away from x0.

    Both vanish on the whole boundary.  Samples x lie in B(x0, r / 2M)
    inside the ball and at least 2h from the boundary so that the grid
    resolves them.
    """
    x0 = np.asarray(x0, dtype=float)
    u = green_function(grid, poles[0])
    v = green_function(grid, poles[1])
    A = corkscrew_point(ball, x0, r).point
    ref = float(u.evaluate(A) / v.evaluate(A))
    pts = G.sample_ball(rng, x0, r / (2 * M), 8 * n_samples)
    keep = ball.contains(pts)
    pts = pts[keep]
    keep = ball.fast_distance(pts) >= 2 * grid.h
    pts = pts[keep][:n_samples]
    records = []
    if pts.shape[0]:
        q = (u.evaluate(pts) / v.evaluate(pts)) / ref
        records = [{"x": p, "ratio": float(val)} for p, val in zip(pts, q)]
        C = float(np.nanmax(q))
    else:
        C = float("nan")
    passed = bool(pts.shape[0] > 0 and np.isfinite(C))
    return CheckReport("local_comparison", passed, None, records,
                       {"C": C, "n_samples": int(pts.shape[0]), "reference_ratio": ref}, {"M": M})
