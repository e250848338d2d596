"""Cone functionals: the nontangential maximal function and the square function.

Cone samples come in dyadic shells {y : d(y, boundary) in [2^{-k-1}, 2^{-k})}.
Shell k is drawn uniformly from the gauge ball B(vertex, (1 + alpha_max) 2^{-k}),
which contains the shell's part of every cone with aperture <= alpha_max, so
one sample tree serves all apertures and estimates are monotone in alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .. import group as G
from ..domains import ConeSpec, _distance
from ..errors import GeometryError, ResolutionError

Q1 = 4
CHUNK = 256


def _ball_points(rng, center, radius: float, n: int) -> np.ndarray:
    """n uniform points of B(center, radius); the first m points do not depend on n."""
    out = []
    got = 0
    while got < n:
        c = rng.uniform(-1.0, 1.0, (CHUNK, 3))
        c = c[G.gauge_norm(c) < 1.0]
        out.append(c)
        got += c.shape[0]
    u = np.concatenate(out)[:n]
    return G.mul(np.asarray(center, float), G.dilate(radius, u))


@dataclass
class ConeSample:
    """Accepted cone points of one shell with the shell volume element."""

    k: int
    points: np.ndarray
    distances: np.ndarray
    weight: float  # ball volume / number drawn
    n_drawn: int


@dataclass(frozen=True)
class ConeSampler:
    """Stratified cone sampler.

    ``min_distance`` stops the shells (use 2h for grid fields); shells
    above the largest boundary distance in the domain are empty.  Shells
    with k < ``coarse_k`` hold most of the square-function mass and get
    4^(coarse_k - k) times more draws.
    """

    n_per_shell: int = 1024
    min_distance: float = 1e-3
    alpha_max: float = 1.0
    seed: int = 0
    coarse_k: int = 2

    def draws(self, k: int) -> int:
        return self.n_per_shell * 4 ** max(0, self.coarse_k - k)

    def shells(self, domain):
        bb = domain.bounding_box()
        top = float(np.max(bb[:, 1] - bb[:, 0]))
        k0 = int(math.floor(-math.log2(top)))
        k1 = int(math.ceil(-math.log2(self.min_distance)))
        return range(k0, k1)

    def sample(self, spec: ConeSpec, domain, stream: int = 0) -> list:
        if spec.alpha > self.alpha_max:
            raise GeometryError("cone aperture exceeds the sampler's alpha_max")
        vertex = spec.vertex
        out = []
        for k in self.shells(domain):
            rng = np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(stream, k + 64)))
            hi = 2.0 ** (-k)
            lo = max(hi / 2, self.min_distance)
            if lo >= hi:
                continue
            R = (1 + self.alpha_max) * hi
            nd = self.draws(k)
            y = _ball_points(rng, vertex, R, nd)
            weight = G.unit_ball_volume(1) * R ** 4 / nd
            inside = domain.contains(y)
            d = np.zeros(y.shape[0])
            if inside.any():
                d[inside] = _distance(domain, y[inside])
            dv = G.dist(y, vertex)
            ok = inside & (d >= lo) & (d < hi) & (dv < (1 + spec.alpha) * d)
            if spec.truncation is not None:
                ok &= dv < spec.truncation
            out.append(ConeSample(k, y[ok], d[ok], weight, nd))
        return out


@dataclass
class ConeFunctionalResult:
    vertex: np.ndarray
    alpha: float
    truncation: Optional[float]
    value: float
    se: float
    n_points: int

    def as_dict(self) -> dict:
        return {"vertex": self.vertex, "alpha": self.alpha, "truncation": self.truncation,
                "value": self.value, "se": self.se, "n_points": self.n_points}


def _evaluate(u, pts):
    if hasattr(u, "evaluate"):
        v = u.evaluate(pts)
    else:
        v = np.asarray(u(pts), dtype=float)
    if np.any(~np.isfinite(v)):
        raise ResolutionError("cone sample reaches an unresolved region of the field")
    return v


def nontangential_max(u, spec: ConeSpec, domain, sampler: Optional[ConeSampler] = None,
                      stream: int = 0) -> ConeFunctionalResult:
    """N_alpha u(vertex) estimated as the max of |u| over the cone sample."""
    sampler = ConeSampler() if sampler is None else sampler
    shells = sampler.sample(spec, domain, stream)
    pts = [s.points for s in shells if s.points.shape[0]]
    if not pts:
        raise GeometryError("empty cone sample")
    P = np.concatenate(pts)
    v = np.abs(_evaluate(u, P))
    return ConeFunctionalResult(spec.vertex, spec.alpha, spec.truncation, float(v.max()), float("nan"), P.shape[0])


def _gradient_sq(u, pts):
    gx, gy = u.horizontal_gradient(pts)
    g = np.asarray(gx) ** 2 + np.asarray(gy) ** 2
    if np.any(~np.isfinite(g)):
        raise ResolutionError("cone sample reaches an unresolved region of the field")
    return g


def square_integral(u, spec: ConeSpec, domain, sampler: Optional[ConeSampler] = None, stream: int = 0,
                    shells=None):
    """(value, se, n) of the integral of |grad_H u|^2 d(y)^{2-Q} over the cone."""
    sampler = ConeSampler() if sampler is None else sampler
    shells = sampler.sample(spec, domain, stream) if shells is None else shells
    total, var, n = 0.0, 0.0, 0
    for s in shells:
        if not s.points.shape[0]:
            continue
        g = _gradient_sq(u, s.points) * s.distances ** (2 - Q1)
        vals = np.zeros(s.n_drawn)
        vals[: g.size] = g
        total += s.weight * math.fsum(g)
        var += (s.weight ** 2) * s.n_drawn * np.var(vals, ddof=1) if s.n_drawn > 1 else 0.0
        n += g.size
    return total, math.sqrt(var), n


def square_function(u, spec: ConeSpec, domain, sampler: Optional[ConeSampler] = None,
                    stream: int = 0) -> ConeFunctionalResult:
    """S_alpha u(vertex) = sqrt of the cone integral of |grad_H u|^2 d^{2-Q}."""
    total, se, n = square_integral(u, spec, domain, sampler, stream)
    val = math.sqrt(total)
    return ConeFunctionalResult(spec.vertex, spec.alpha, spec.truncation, val,
                                se / (2 * val) if val > 0 else 0.0, n)


class AffineX:
    """u(p) = x with grad_H u = (1, 0); an exact harmonic test function."""

    def evaluate(self, pts):
        return np.asarray(pts, float)[..., 0]

    def horizontal_gradient(self, pts):
        s = np.shape(pts)[:-1]
        return np.ones(s), np.zeros(s)


class Constant:
    def __init__(self, c: float):
        self.c = c

    def evaluate(self, pts):
        return np.full(np.shape(pts)[:-1], float(self.c))

    def horizontal_gradient(self, pts):
        s = np.shape(pts)[:-1]
        return np.zeros(s), np.zeros(s)
