"""The fourteen acceptance criteria as runnable checks.

Each ``criterion_k`` returns a CheckReport named ``C<k>``; ``run_all``
times them against their wall-clock limits.  Timings never enter the
reports, so reports stay byte-identical across machines and worker counts.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import suites
from .carleson.checks import (energy_identity_check, fatou_check, green_lower_bound_check, thm11_check,
                              thm12_check, thm13_check, thm14_check)
from .carleson.measures import MeasureRep, carleson_constant, dyadic_atoms
from .domains import GaugeBall
from .potential.bmo import log_distance_datum
from .potential.grid import Grid
from .potential.solve import solve_dirichlet
from .potential.walks import WalkConfig
from .report import CheckReport

# wall-clock limits in seconds
LIMITS = {1: 5, 2: 10, 3: 5, 4: 30, 5: 120, 6: 600, 7: 600, 8: 120, 9: 600, 10: 900, 11: 1200, 12: 900,
          13: 300, 14: None}


def _named(rep: CheckReport, k: int) -> CheckReport:
    rep.summary = {"criterion": rep.check, **rep.summary}
    rep.check = f"C{k}"
    return rep


def criterion_1(seed: int = 0, workers: int = 1) -> CheckReport:
    return _named(suites.identity_suite(np.random.default_rng(seed)), 1)


def criterion_2(seed: int = 0, workers: int = 1) -> CheckReport:
    return _named(suites.jacobian_suite(np.random.default_rng(seed)), 2)


def criterion_3(seed: int = 0, workers: int = 1) -> CheckReport:
    return _named(suites.curves_suite(np.random.default_rng(seed)), 3)


def criterion_4(seed: int = 0, workers: int = 1) -> CheckReport:
    return _named(suites.discretization_suite(), 4)


def criterion_5(seed: int = 0, workers: int = 1) -> CheckReport:
    return _named(suites.crossval_check(cfg=WalkConfig(seed=seed, workers=workers)), 5)


def criterion_6(seed: int = 0, workers: int = 1, h: float = 1.0 / 64, n_walks: int = 100_000) -> CheckReport:
    ball = GaugeBall()
    rep = energy_identity_check(lambda p: np.asarray(p)[..., 0], np.zeros(3), Grid(ball, h), n_walks,
                                WalkConfig(seed=seed, workers=workers))
    return _named(rep, 6)


def criterion_7(seed: int = 0, workers: int = 1) -> CheckReport:
    # 8 poles x 25 partners = 200 pairs
    rep = green_lower_bound_check(GaugeBall(), [1.0 / 32, 1.0 / (32 * math.sqrt(2))], n_poles=8,
                                  pairs_per_pole=25, seed=seed)
    return _named(rep, 7)


def carleson_discrimination(seed: int = 0, flat_tol: float = 2.0, slope=(0.7, 1.3)) -> CheckReport:
    """Flat Lebesgue ladder against the dyadic atoms' per-level slope.

    The slope is the least-squares log2 slope of the per-level sup of
    mu(B) / r^3 on the ladder r = 2^-2 .. 2^-8 through the atoms' limit point.
    """
    ball = GaugeBall()
    leb = carleson_constant(MeasureRep.lebesgue(), ball, seed=seed)
    w = np.array([1.0, 0.0, 0.0])
    pts = np.vstack([w, ball.sample_boundary(np.random.default_rng(seed), 4, delta=0.1)])
    radii = 2.0 ** -np.arange(2, 9)
    atom = carleson_constant(dyadic_atoms(w), ball, points=pts, radii=radii, seed=seed)
    x = -np.log2(atom.radii)
    fit = float(np.polyfit(x, np.log2(atom.level_sup), 1)[0])
    inc = atom.log2_increments("level")
    flat = leb.flatness()
    passed = flat <= flat_tol and slope[0] <= fit <= slope[1] and inc.size >= 5
    records = ([{"measure": "lebesgue", **r} for r in leb.records]
               + [{"measure": "atoms", **r} for r in atom.records])
    summary = {"lebesgue_flatness": flat, "lebesgue_level_sup": leb.level_sup, "atomic_slope": fit,
               "atomic_increments": inc, "atomic_level_sup": atom.level_sup, "n_levels": int(inc.size)}
    return CheckReport("carleson_discrimination", bool(passed), seed, records, summary,
                       {"flatness": flat_tol, "slope": list(slope)}, leb.notes + atom.notes)


def criterion_8(seed: int = 0, workers: int = 1) -> CheckReport:
    return _named(carleson_discrimination(seed), 8)


def criterion_9(seed: int = 0, workers: int = 1) -> CheckReport:
    return _named(thm12_check(n_configs=100, seed=seed, workers=workers), 9)


def criterion_10(seed: int = 0, workers: int = 1) -> CheckReport:
    cfg = WalkConfig(seed=seed, workers=workers)
    rep = thm14_check(log_distance_datum(), GaugeBall(), (1.0, 0.0, 0.0), [2.0 ** -k for k in range(2, 6)], cfg=cfg)
    return _named(rep, 10)


def criterion_11(seed: int = 0, workers: int = 1) -> CheckReport:
    cfg = WalkConfig(seed=seed, workers=workers)
    return _named(thm13_check(GaugeBall(), cfg=cfg, seed=seed), 11)


def criterion_12(seed: int = 0, workers: int = 1) -> CheckReport:
    return _named(thm11_check(GaugeBall()), 12)


def fatou_datum(p) -> np.ndarray:
    """x^2 + t: continuous boundary data whose extension is not a polynomial."""
    p = np.asarray(p, float)
    return p[..., 0] ** 2 + p[..., 2]


def criterion_13(seed: int = 0, workers: int = 1, h: float = 1.0 / 32, n_omega: int = 50) -> CheckReport:
    ball = GaugeBall()
    u = solve_dirichlet(Grid(ball, h), fatou_datum)
    omegas = ball.sample_boundary(np.random.default_rng(seed), n_omega, delta=0.1)
    return _named(fatou_check(u, ball, omegas, h, seed=seed), 13)


def determinism_check(seed: int = 0, workers=(1, 2), first: Optional[CheckReport] = None) -> CheckReport:
    """thm12 at two worker counts; passes when the JSON-lines reports are byte-identical.

    ``first`` may supply the run at workers[0].
    """
    reps = [thm12_check(n_configs=100, seed=seed, workers=workers[0]) if first is None else first]
    reps += [thm12_check(n_configs=100, seed=seed, workers=w) for w in workers[1:]]
    texts = [r.to_jsonl() for r in reps]
    same = all(t == texts[0] for t in texts)
    return CheckReport("determinism", same, seed, [],
                       {"workers": list(workers), "bytes": len(texts[0]), "identical": same}, {})


def criterion_14(seed: int = 0, workers: int = 1, first: Optional[CheckReport] = None) -> CheckReport:
    other = 2 if workers == 1 else 1
    return _named(determinism_check(seed, (workers, other), first=first), 14)


CRITERIA: dict = {k: globals()[f"criterion_{k}"] for k in range(1, 15)}


@dataclass
class Outcome:
    k: int
    report: CheckReport
    seconds: float

    @property
    def within_time(self) -> bool:
        lim = LIMITS[self.k]
        return lim is None or self.seconds <= lim

    @property
    def passed(self) -> bool:
        return bool(self.report.passed) and self.within_time

    def line(self) -> str:
        lim = LIMITS[self.k]
        t = f"{self.seconds:.1f}s" + (f" / {lim}s" if lim else "")
        flag = "" if self.within_time else " (over time)"
        return f"{self.report.line()} [{t}{flag}]"


def run_criterion(k: int, seed: int = 0, workers: int = 1, **kw) -> Outcome:
    t0 = time.perf_counter()
    rep = CRITERIA[k](seed=seed, workers=workers, **kw)
    return Outcome(k, rep, time.perf_counter() - t0)


def run_all(seed: int = 0, workers: int = 1, only=None, echo: Optional[Callable] = print) -> list:
    """Run the selected criteria in order; C14 reuses C9's thm12 report as its first run."""
    out = []
    c9 = None
    for k in (range(1, 15) if only is None else only):
        kw = {"first": c9} if k == 14 else {}
        res = run_criterion(k, seed, workers, **kw)
        if k == 9:
            c9 = _unnamed(res.report, "thm12")
        out.append(res)
        if echo is not None:
            echo(res.line())
    return out


def _unnamed(rep: CheckReport, name: str) -> CheckReport:
    """Undo _named so the report compares byte-for-byte with a fresh run."""
    summary = {k: v for k, v in rep.summary.items() if k != "criterion"}
    return CheckReport(name, rep.passed, rep.seed, rep.records, summary, rep.tolerance, rep.notes)
