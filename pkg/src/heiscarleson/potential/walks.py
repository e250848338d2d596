"""Horizontal diffusion Monte Carlo: exit points, harmonic measure, harmonic extension.

The walk is dx = sqrt(2) dW, dy = sqrt(2) dW', dt = 2 (y dx - x dy), whose
generator is the sub-Laplacian.  Walks run in fixed blocks; each block
draws from its own generator seeded by (seed, stream, block), and every
step draws normals for the whole block, so a walk's path depends only on
its index and never on scheduling or the number of workers.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .. import group as G
from ..errors import PreconditionError, ReliabilityWarning

CENSOR_WARN = 0.01


@dataclass(frozen=True)
class WalkConfig:
    """Walk parameters.

    With ``adaptive`` the step is dt_k = clip((kappa d)^2 / 2, dt_min, dt)
    for the current boundary distance d, so increments shrink near the
    boundary; otherwise every step uses ``dt``.  The absorption band
    defaults to three diffusion steps at the smallest time step.
    """

    dt: float = 1e-4
    max_steps: int = 200_000
    seed: int = 0
    band: Optional[float] = None
    workers: int = 1
    adaptive: bool = True
    dt_min: float = 1e-7
    kappa: float = 0.25
    block: int = 8192

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.adaptive and not 0 < self.dt_min <= self.dt:
            raise ValueError("need 0 < dt_min <= dt")
        if self.band is None:
            object.__setattr__(self, "band", 3.0 * self.step_scale)
        if self.band < self.step_scale:
            raise ValueError("absorption band is narrower than the diffusion step scale")
        if self.max_steps < 1 or self.block < 1 or self.workers < 1:
            raise ValueError("max_steps, block and workers must be positive")

    @property
    def step_scale(self) -> float:
        """sqrt(2 dt) at the smallest step the walk can take."""
        return math.sqrt(2.0 * (self.dt_min if self.adaptive else self.dt))


@dataclass
class WalkResult:
    start: np.ndarray
    exits: np.ndarray
    steps: np.ndarray
    times: np.ndarray
    censored: np.ndarray

    @property
    def n(self) -> int:
        return int(self.exits.shape[0])

    @property
    def censored_fraction(self) -> float:
        return float(np.mean(self.censored)) if self.n else 0.0

    @property
    def absorbed_exits(self) -> np.ndarray:
        return self.exits[~self.censored]


def _block_rng(seed: int, stream: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, block)))


def _distances(domain, p, inside, far):
    """Step-control distances: the cheap lower bound, refined only where it is below ``far``."""
    d = np.zeros(p.shape[0])
    if inside.any():
        lb = domain.distance_lower_bound(p[inside])
        near = lb < far
        if near.any():
            lb[near] = domain.step_distance(p[inside][near])
        d[inside] = lb
    return d


def _run_block(domain, starts: np.ndarray, cfg: WalkConfig, stream: int, block: int):
    rng = _block_rng(cfg.seed, stream, block)
    m = starts.shape[0]
    pos = starts.astype(float).copy()
    steps = np.zeros(m, dtype=np.int64)
    times = np.zeros(m)
    active = np.ones(m, dtype=bool)
    # beyond this distance the step is dt and the walk cannot be absorbed
    far = max(cfg.band, math.sqrt(2.0 * cfg.dt) / cfg.kappa) if cfg.adaptive else cfg.band
    inside = domain.contains(pos)
    d = _distances(domain, pos, inside, far)
    active &= inside & (d >= cfg.band)
    for _ in range(cfg.max_steps):
        if not active.any():
            break
        xi = rng.standard_normal((m, 2))
        a = np.nonzero(active)[0]
        if cfg.adaptive:
            dt = np.clip(0.5 * (cfg.kappa * d[a]) ** 2, cfg.dt_min, cfg.dt)
        else:
            dt = np.full(a.size, cfg.dt)
        s = np.sqrt(2.0 * dt)
        dx, dy = s * xi[a, 0], s * xi[a, 1]
        p = pos[a]
        p[:, 2] += 2.0 * (p[:, 1] * dx - p[:, 0] * dy)
        p[:, 0] += dx
        p[:, 1] += dy
        pos[a] = p
        times[a] += dt
        steps[a] += 1
        ins = domain.contains(p)
        da = _distances(domain, p, ins, far)
        d[a] = da
        active[a] = ins & (da >= cfg.band)
    censored = active.copy()
    done = ~censored
    exits = pos.copy()
    if done.any():
        exits[done] = domain.project(pos[done])
    return exits, steps, times, censored


def simulate_exits(points, domain, cfg: WalkConfig, n: Optional[int] = None, stream: int = 0) -> WalkResult:
    """Run walks from ``points`` (shape (N, 3)) or ``n`` walks from a single point."""
    P = np.asarray(points, dtype=float)
    if P.ndim == 1:
        if n is None:
            n = 1
        P = np.broadcast_to(P, (n, P.shape[0])).copy()
    if not np.all(domain.contains(P)):
        raise PreconditionError("walks must start inside the domain")
    N = P.shape[0]
    nb = (N + cfg.block - 1) // cfg.block
    chunks = [P[b * cfg.block:(b + 1) * cfg.block] for b in range(nb)]
    if cfg.workers > 1 and nb > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
            futs = [ex.submit(_run_block, domain, c, cfg, stream, b) for b, c in enumerate(chunks)]
            parts = [f.result() for f in futs]
    else:
        parts = [_run_block(domain, c, cfg, stream, b) for b, c in enumerate(chunks)]
    if not parts:
        e = np.zeros((0, 3))
        return WalkResult(P, e, np.zeros(0, int), np.zeros(0), np.zeros(0, bool))
    exits, steps, times, cens = (np.concatenate(x) for x in zip(*parts))
    return WalkResult(P, exits, steps, times, cens)


def simulate_exit(p, domain, cfg: WalkConfig, index: int = 0, stream: int = 0):
    """Exit point, step count and censoring flag of walk ``index`` started at p."""
    res = simulate_exits(p, domain, cfg, n=index + 1, stream=stream)
    return res.exits[index], int(res.steps[index]), bool(res.censored[index])


def _warn_censoring(frac: float):
    if frac > CENSOR_WARN:
        warnings.warn(f"{100 * frac:.2f}% of walks were censored", ReliabilityWarning, stacklevel=3)


@dataclass
class MCValue:
    """Monte Carlo mean with its standard error."""

    mean: float
    se: float
    n: int
    censored: int = 0

    def as_dict(self, prefix: str = "") -> dict:
        return {f"{prefix}mean": self.mean, f"{prefix}se": self.se, f"{prefix}n": self.n,
                f"{prefix}censored": self.censored}


def mc_mean(values) -> MCValue:
    v = np.asarray(values, dtype=float)
    n = v.size
    if n == 0:
        return MCValue(float("nan"), float("nan"), 0)
    mean = math.fsum(v) / n
    var = math.fsum((v - mean) ** 2) / max(n - 1, 1)
    return MCValue(mean, math.sqrt(var / n), n)


def harmonic_extension_mc(p, f: Callable, domain, n_walks: int, cfg: WalkConfig, stream: int = 0,
                          walks: Optional[WalkResult] = None) -> MCValue:
    """Estimate u(p) = E f(exit point); censored walks are excluded and counted."""
    res = simulate_exits(p, domain, cfg, n=n_walks, stream=stream) if walks is None else walks
    _warn_censoring(res.censored_fraction)
    out = mc_mean(f(res.absorbed_exits))
    out.censored = int(res.censored.sum())
    return out


class SpherePartition:
    """Cells of the gauge sphere: equal bins in sin(phi) times equal bins in theta."""

    def __init__(self, ball, n_phi: int = 8, n_theta: int = 16):
        self.ball = ball
        self.n_phi = n_phi
        self.n_theta = n_theta

    @property
    def n_cells(self) -> int:
        return self.n_phi * self.n_theta

    def cell_of(self, pts) -> np.ndarray:
        phi, theta = self.ball.boundary_params(pts)
        i = np.clip(((np.sin(phi) + 1) / 2 * self.n_phi).astype(int), 0, self.n_phi - 1)
        j = np.clip((theta / (2 * np.pi) * self.n_theta).astype(int), 0, self.n_theta - 1)
        return i * self.n_theta + j


@dataclass
class HarmonicMeasureEstimate:
    partition: object
    counts: np.ndarray
    n_walks: int
    n_censored: int
    estimate: np.ndarray
    se: np.ndarray
    exits: np.ndarray = field(repr=False)
    doubling: list = field(default_factory=list)

    def ball_mass(self, x0, r: float) -> MCValue:
        """omega(Delta(x0, r)) as the fraction of exits within distance r of x0."""
        hit = G.dist(self.exits, np.asarray(x0, float)) < r
        return mc_mean(hit.astype(float))


def harmonic_measure(p, domain, partition, n_walks: int, cfg: WalkConfig, stream: int = 0,
                     doubling_ladder=(), walks: Optional[WalkResult] = None) -> HarmonicMeasureEstimate:
    """Per-cell exit frequencies with binomial standard errors.

    ``doubling_ladder`` lists (x0, r) whose ratio omega(Delta(x0, 2r)) / omega(Delta(x0, r)) is reported.
    """
    res = simulate_exits(p, domain, cfg, n=n_walks, stream=stream) if walks is None else walks
    _warn_censoring(res.censored_fraction)
    ex = res.absorbed_exits
    m = ex.shape[0]
    counts = np.bincount(partition.cell_of(ex), minlength=partition.n_cells) if m else np.zeros(partition.n_cells, int)
    est = counts / max(m, 1)
    se = np.sqrt(est * (1 - est) / max(m, 1))
    out = HarmonicMeasureEstimate(partition, counts, res.n, int(res.censored.sum()), est, se, ex)
    for x0, r in doubling_ladder:
        small, big = out.ball_mass(x0, r).mean, out.ball_mass(x0, 2 * r).mean
        out.doubling.append({"x0": np.asarray(x0, float), "r": float(r), "omega_r": small, "omega_2r": big,
                             "ratio": big / small if small > 0 else float("inf")})
    return out
