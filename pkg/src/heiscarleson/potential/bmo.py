"""Boundary BMO against an estimated harmonic measure, plus shipped test data."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .. import group as G
from ..report import CheckReport
from .walks import WalkConfig, simulate_exits

MIN_HITS = 20


def log_distance_datum(omega0=(1.0, 0.0, 0.0), eps: float = 1e-3) -> Callable:
    """f(w) = log(d(w, omega0)) mollified at scale eps: 0.5 log(d^2 + eps^2)."""
    w0 = np.asarray(omega0, dtype=float)

    def f(p):
        d = G.dist(np.asarray(p, dtype=float), w0)
        return 0.5 * np.log(d * d + eps * eps)

    return f


def smooth_upper_indicator(eps: float = 0.05) -> Callable:
    """Mollified indicator of the upper half-sphere {t > 0}."""

    def f(p):
        return 0.5 * (1.0 + np.tanh(np.asarray(p, dtype=float)[..., 2] / eps))

    return f


def default_ladder(ball, rng, n_points: int = 12, radii: Sequence[float] = (0.5, 0.25, 0.125),
                   delta: float = 0.1):
    """Surface balls (x, r) with centres sampled away from the poles."""
    X = ball.sample_boundary(rng, n_points, delta=delta)
    return [(x, float(r)) for x in X for r in radii]


@dataclass
class BMOResult:
    value: float
    records: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    n_exits: int = 0


def bmo_norm(f: Callable, domain, z, ladder, cfg: Optional[WalkConfig] = None, n_walks: int = 20000,
             exits: Optional[np.ndarray] = None, stream: int = 0) -> BMOResult:
    """sup over the ladder of the omega^z-mean oscillation of f on Delta(x, r).

    Surface balls with fewer than MIN_HITS exits are skipped and noted.
    """
    if exits is None:
        cfg = WalkConfig() if cfg is None else cfg
        exits = simulate_exits(np.asarray(z, float), domain, cfg, n=n_walks, stream=stream).absorbed_exits
    vals = f(exits)
    best = 0.0
    records, notes = [], []
    for x, r in ladder:
        hit = G.dist(exits, np.asarray(x, float)) < r
        k = int(hit.sum())
        if k < MIN_HITS:
            notes.append(f"skipped Delta(x={np.round(x, 4).tolist()}, r={r:g}): {k} hits")
            continue
        v = vals[hit]
        osc = float(np.mean(np.abs(v - v.mean())))
        records.append({"x": x, "r": r, "hits": k, "omega": k / exits.shape[0], "oscillation": osc})
        best = max(best, osc)
    return BMOResult(best, records, notes, int(exits.shape[0]))


def bmo_basepoint_invariance(f: Callable, z, z0, domain, ladder, cfg: Optional[WalkConfig] = None,
                             n_walks: int = 20000, max_ratio: float = 10.0) -> CheckReport:
    """Compare BMO norms against omega^z and omega^{z0}; passes when both are finite and comparable."""
    cfg = WalkConfig() if cfg is None else cfg
    a = bmo_norm(f, domain, z, ladder, cfg, n_walks, stream=0)
    b = bmo_norm(f, domain, z0, ladder, cfg, n_walks, stream=1)
    finite = np.isfinite(a.value) and np.isfinite(b.value)
    if a.value == 0 and b.value == 0:
        ratio = 1.0
    else:
        ratio = b.value / a.value if a.value > 0 else float("inf")
    passed = bool(finite and 1.0 / max_ratio <= ratio <= max_ratio)
    recs = [{"base": "z", **r} for r in a.records] + [{"base": "z0", **r} for r in b.records]
    return CheckReport("bmo_basepoint_invariance", passed, cfg.seed, recs,
                       {"bmo_z": a.value, "bmo_z0": b.value, "ratio": ratio, "n_exits": a.n_exits},
                       {"max_ratio": max_ratio}, a.notes + b.notes)
