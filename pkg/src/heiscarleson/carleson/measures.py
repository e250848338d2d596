"""Measures on domains and the Carleson-constant estimator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .. import group as G
from ..errors import BudgetError, PreconditionError
from ..report import CheckReport


@dataclass(frozen=True, eq=False)
class MeasureRep:
    """Either a density f >= 0 (integrated by MC with ``budget`` samples per ball) or weighted atoms."""

    kind: str
    density: Optional[Callable] = None
    budget: int = 4000
    atoms: Optional[np.ndarray] = None
    masses: Optional[np.ndarray] = None
    name: str = ""

    def __post_init__(self):
        if self.kind == "density":
            if self.density is None or self.budget < 1:
                raise ValueError("density measures need a callable and a positive budget")
        elif self.kind == "atoms":
            pts = np.zeros((0, 3)) if self.atoms is None else np.asarray(self.atoms, float).reshape(-1, 3)
            m = np.zeros(0) if self.masses is None else np.asarray(self.masses, float).ravel()
            if pts.shape[0] != m.size:
                raise ValueError("one mass per atom")
            if np.any(m <= 0):
                raise ValueError("atom masses must be positive")
            object.__setattr__(self, "atoms", pts)
            object.__setattr__(self, "masses", m)
        else:
            raise ValueError(f"unknown measure kind {self.kind!r}")

    @classmethod
    def lebesgue(cls, budget: int = 4000, scale: float = 1.0):
        return cls("density", density=lambda y: np.full(np.shape(y)[:-1], scale), budget=budget,
                   name="lebesgue")

    @classmethod
    def atomic(cls, points, masses, name: str = "atoms"):
        return cls("atoms", atoms=points, masses=masses, name=name)

    @classmethod
    def zero(cls):
        return cls("atoms", name="zero")

    def check_support(self, domain):
        if self.kind == "atoms" and self.atoms.shape[0] and not np.all(domain.contains(self.atoms)):
            raise PreconditionError("atoms must lie inside the domain")

    def scaled(self, c: float) -> "MeasureRep":
        if self.kind == "atoms":
            return MeasureRep.atomic(self.atoms, self.masses * c, self.name)
        f = self.density
        return MeasureRep("density", density=lambda y: c * f(y), budget=self.budget, name=self.name)

    def ball_mass(self, domain, x0, r: float, rng) -> tuple:
        """(mu(B(x0, r) cap Omega), standard error)."""
        x0 = np.asarray(x0, dtype=float)
        if self.kind == "atoms":
            if not self.atoms.shape[0]:
                return 0.0, 0.0
            hit = G.dist(self.atoms, x0) < r
            return math.fsum(self.masses[hit]), 0.0
        y = G.sample_ball(rng, x0, r, self.budget)
        w = np.where(domain.contains(y), self.density(y), 0.0)
        vol = G.unit_ball_volume(1) * r ** 4
        mean = math.fsum(w) / w.size
        se = float(np.std(w, ddof=1) / math.sqrt(w.size)) if w.size > 1 else 0.0
        return vol * mean, vol * se


def dyadic_atoms(omega=(1.0, 0.0, 0.0), k_range: Sequence[int] = range(3, 11)) -> MeasureRep:
    """Atoms at gamma(1 - 2^{-k}, omega) with masses 2^{-2k}: not a Carleson measure for s = 3."""
    omega = np.asarray(omega, dtype=float)
    ks = np.asarray(list(k_range))
    pts = np.stack([G.radial_curve_at(omega, 1.0 - 2.0 ** (-k)) for k in ks])
    return MeasureRep.atomic(pts, 2.0 ** (-2.0 * ks), name="dyadic_atoms")


@dataclass
class CarlesonReport:
    """Ladder of mu(B(x0, r) cap Omega) / r^{alpha s}.

    ``level_sup`` is the sup over ladder points at each radius (largest
    radius first) and ``running_sup`` its running maximum over all radii
    at least as large, i.e. the estimated constant resolved down to r.
    """

    records: list
    radii: np.ndarray
    level_sup: np.ndarray
    running_sup: np.ndarray
    sup_ratio: float
    alpha: float
    s: float
    seed: Optional[int] = None
    notes: list = field(default_factory=list)

    def log2_increments(self, which: str = "running") -> np.ndarray:
        v = self.running_sup if which == "running" else self.level_sup
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.diff(np.log2(v)) / -np.diff(np.log2(self.radii))

    def flatness(self) -> float:
        """max / median of the running-sup ladder."""
        v = self.running_sup
        med = float(np.median(v))
        return float(v.max() / med) if med > 0 else (1.0 if v.max() == 0 else float("inf"))

    def to_check(self, name: str = "carleson_constant", passed: bool = True) -> CheckReport:
        return CheckReport(name, passed, self.seed, self.records,
                           {"sup_ratio": self.sup_ratio, "flatness": self.flatness(), "alpha": self.alpha,
                            "s": self.s}, {}, self.notes)


def carleson_constant(mu: MeasureRep, domain, alpha: float = 1.0, s: float = 3.0, points=None,
                      radii: Sequence[float] = tuple(2.0 ** -np.arange(2, 7)), rng=None, seed: int = 0,
                      rel_tol: float = 0.05, delta: float = 0.1, n_points: int = 8) -> CarlesonReport:
    """Estimate gamma(mu) = sup mu(B(x0, r) cap Omega) / r^{alpha s} over a ladder.

    ``points`` defaults to boundary samples with |z| >= delta.  Density
    measures raise BudgetError when a ball's relative standard error
    exceeds ``rel_tol``.
    """
    rng = np.random.default_rng(seed) if rng is None else rng
    mu.check_support(domain)
    radii = np.sort(np.asarray(radii, dtype=float))[::-1]
    bb = domain.bounding_box()
    diam = float(np.max(bb[:, 1] - bb[:, 0]))
    if np.any(radii <= 0) or radii[0] > diam:
        raise PreconditionError("ladder radii must lie in (0, diam]")
    if points is None:
        points = domain.sample_boundary(rng, n_points, delta=delta)
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    notes = []
    if radii[0] / radii[-1] < 4:
        notes.append("ladder spans fewer than two dyadic levels")
    records = []
    level = np.zeros(radii.size)
    for i, r in enumerate(radii):
        for j, x0 in enumerate(points):
            m, se = mu.ball_mass(domain, x0, r, rng)
            if mu.kind == "density" and m > 0 and se / m > rel_tol:
                raise BudgetError(f"relative error {se / m:.3f} exceeds {rel_tol} at r = {r:g}")
            ratio = m / r ** (alpha * s)
            records.append({"point": j, "x0": x0, "r": float(r), "mass": m, "mass_se": se, "ratio": ratio})
            level[i] = max(level[i], ratio)
    running = np.maximum.accumulate(level)
    return CarlesonReport(records, radii, level, running, float(running[-1]), alpha, s, seed, notes)
