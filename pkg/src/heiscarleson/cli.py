"""Command-line runner for the identity suites and the theorem checks.

Settings resolve as defaults < config file < flags.  Each command writes
JSON lines (one record per configuration, summary last) to ``--out`` or
stdout and an optional CSV of its records.  Exit codes: 0 all checks pass,
1 some check fails, 2 configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import acceptance, suites
from .errors import HeisenbergError

STOCHASTIC = {"identities", "conformal", "domain-probe", "walk", "measure", "carleson", "thm12", "thm13", "thm14",
              "energy", "green-bound", "fatou", "all"}
COMMANDS = ["identities", "conformal", "domain-probe", "solve", "walk", "measure", "carleson", "thm11", "thm12",
            "thm13", "thm14", "energy", "green-bound", "fatou", "all"]


class ConfigError(ValueError):
    pass


def _floats(text: str) -> tuple:
    try:
        return tuple(float(eval_number(v)) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text: str) -> tuple:
    vals = _floats(text)
    if any(v != int(v) for v in vals):
        raise ConfigError(f"expected integers, got {text!r}")
    return tuple(int(v) for v in vals)


def eval_number(text: str) -> float:
    """A float, or a simple fraction like 1/64."""
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


@dataclass
class RunConfig:
    """Resolved settings of one command; None means the command's own default."""

    command: str = ""
    seed: Optional[int] = None
    workers: int = 1
    grid_h: Optional[float] = None
    walks: Optional[int] = None
    samples: Optional[int] = None
    configs: Optional[int] = None
    measure: str = "atoms"
    domain: str = "ball"
    center: tuple = (0.0, 0.0, 0.0)
    radius: float = 1.0
    radii: Optional[tuple] = None
    fractions: Optional[tuple] = None
    levels: Optional[tuple] = None
    tail: Optional[float] = None
    eps: Optional[float] = None
    tol: Optional[float] = None
    criteria: Optional[tuple] = None
    out: Optional[str] = None
    csv: Optional[str] = None

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.command in STOCHASTIC and self.seed is None:
            raise ConfigError(f"{self.command} is stochastic and needs --seed")
        if self.seed is not None and self.seed < 0:
            raise ConfigError("seed must be non-negative")
        for name in ("workers", "grid_h", "walks", "samples", "configs", "radius", "tail", "eps", "tol"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("radii", "fractions"):
            v = getattr(self, name)
            if v is not None and (not v or any(not x > 0 for x in v)):
                raise ConfigError(f"{name} must be positive numbers")
        if self.measure not in ("lebesgue", "atoms"):
            raise ConfigError("measure must be lebesgue or atoms")
        if self.domain not in ("ball", "box", "slit-box"):
            raise ConfigError("domain must be ball, box or slit-box")
        if len(self.center) != 3:
            raise ConfigError("center needs three coordinates")
        if self.criteria is not None and any(not 1 <= k <= 14 for k in self.criteria):
            raise ConfigError("criteria are numbered 1..14")
        return self


PARSERS = {"seed": int, "workers": int, "grid_h": eval_number, "walks": int, "samples": int, "configs": int,
           "measure": str, "domain": str, "center": _floats, "radius": eval_number, "radii": _floats,
           "fractions": _floats, "levels": _ints, "tail": eval_number, "eps": eval_number, "tol": eval_number,
           "criteria": _ints, "out": str, "csv": str}


def read_config(path: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment; keys match the long flags."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        k = k.replace("-", "_")
        if k not in PARSERS:
            raise ConfigError(f"{path}:{n}: unknown key {k!r}")
        try:
            out[k] = PARSERS[k](v)
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"{path}:{n}: bad value for {k}: {exc}") from exc
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="heiscarleson", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)

    def arg(name, parse, help_):
        p.add_argument(f"--{name}", dest=name.replace("-", "_"), type=parse, default=None, help=help_)

    arg("seed", int, "master seed (required for stochastic commands)")
    arg("workers", int, "worker processes")
    arg("grid-h", eval_number, "grid spacing, e.g. 1/64")
    arg("walks", int, "random walks per estimate")
    arg("samples", int, "sample count for identity suites and probes")
    arg("configs", int, "admissible configurations for thm12")
    arg("measure", str, "thm12/measure: lebesgue or atoms")
    arg("domain", str, "ball, box or slit-box")
    arg("center", _floats, "ball center x,y,t")
    arg("radius", eval_number, "ball radius")
    arg("radii", _floats, "radius ladder, comma separated")
    arg("fractions", _floats, "thm11 lambda ladder as fractions of the bump height")
    arg("levels", _ints, "thm11 dyadic levels")
    arg("tail", eval_number, "fatou: s* = 1 - tail h")
    arg("eps", eval_number, "fatou oscillation threshold")
    arg("tol", eval_number, "override the command's main tolerance")
    arg("criteria", _ints, "all: subset of criteria to run")
    arg("out", str, "JSON-lines output path (default stdout)")
    arg("csv", str, "CSV output path for the records")
    arg("config", str, "config file of key = value lines")
    return p


def resolve(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    values = {}
    if ns.config:
        values.update(read_config(ns.config))
    for f in dataclasses.fields(RunConfig):
        v = getattr(ns, f.name, None)
        if v is not None:
            values[f.name] = v
    values["command"] = ns.command
    return RunConfig(**values).validate()


# ----------------------------------------------------------------------------
# commands


def _domain(rc: RunConfig):
    from .domains import Box, GaugeBall, SlitBox
    if rc.domain == "ball":
        return GaugeBall(np.array(rc.center), rc.radius)
    return Box() if rc.domain == "box" else SlitBox()


def _unit_ball(rc: RunConfig):
    from .domains import GaugeBall
    ball = _domain(rc)
    if not isinstance(ball, GaugeBall) or ball.radius != 1.0 or np.any(ball.center != 0):
        raise ConfigError(f"{rc.command} runs on the unit gauge ball only")
    return ball


def _walk_cfg(rc: RunConfig):
    from .potential.walks import WalkConfig
    return WalkConfig(seed=rc.seed or 0, workers=rc.workers)


def _pick(v, default):
    return default if v is None else v


def cmd_identities(rc):
    rng = np.random.default_rng(rc.seed)
    n = _pick(rc.samples, 10_000)
    return [suites.identity_suite(rng, n, tol=_pick(rc.tol, 1e-9)), suites.curves_suite(rng, n)]


def cmd_conformal(rc):
    return [suites.jacobian_suite(np.random.default_rng(rc.seed), _pick(rc.samples, 1000), tol=_pick(rc.tol, 1e-5))]


def cmd_domain_probe(rc):
    from .domains import nta_probe
    rng = np.random.default_rng(rc.seed)
    r0 = (rc.radii or (0.25,))[0]
    return [nta_probe(_domain(rc), _pick(rc.tol, 4.0), r0, _pick(rc.samples, 64), rng)]


def cmd_solve(rc):
    h = _pick(rc.grid_h, 1.0 / 32)
    return [suites.discretization_suite((h, h / 2))]


def cmd_walk(rc):
    return [suites.crossval_check(_pick(rc.grid_h, 1.0 / 48), _pick(rc.walks, 10_000), _walk_cfg(rc),
                                  n_se=_pick(rc.tol, 3.0))]


def cmd_measure(rc):
    from .carleson.measures import MeasureRep, carleson_constant, dyadic_atoms
    dom = _domain(rc)
    mu = MeasureRep.lebesgue(_pick(rc.samples, 4000)) if rc.measure == "lebesgue" else dyadic_atoms()
    kw = {} if rc.radii is None else {"radii": rc.radii}
    rep = carleson_constant(mu, dom, seed=rc.seed, **kw)
    return [rep.to_check(f"carleson_constant_{rc.measure}")]


def cmd_carleson(rc):
    return [acceptance.carleson_discrimination(rc.seed, flat_tol=_pick(rc.tol, 2.0))]


def cmd_thm11(rc):
    from .carleson.checks import thm11_check
    kw = {}
    if rc.levels is not None:
        kw["levels"] = rc.levels
    if rc.fractions is not None:
        kw["fractions"] = rc.fractions
    if rc.grid_h is not None:
        kw["h0"] = rc.grid_h
    return [thm11_check(_unit_ball(rc), **kw)]


def cmd_thm12(rc):
    from .carleson.checks import thm12_check
    _unit_ball(rc)
    return [thm12_check(n_configs=_pick(rc.configs, 100), seed=rc.seed, budget=_pick(rc.samples, 2000),
                        workers=rc.workers, factor=_pick(rc.tol, 10.0), measure=rc.measure)]


def cmd_thm13(rc):
    from .carleson.checks import thm13_check
    h = _pick(rc.grid_h, 1.0 / 32)
    kw = {"n_walks": rc.walks} if rc.walks else {}
    if rc.samples:
        kw["n_vertices"] = rc.samples
    return [thm13_check(_unit_ball(rc), hs=(h, h / math.sqrt(2)), cfg=_walk_cfg(rc), seed=rc.seed,
                        stability=_pick(rc.tol, 2.0), **kw)]


def cmd_thm14(rc):
    from .carleson.checks import thm14_check
    from .potential.bmo import log_distance_datum
    radii = rc.radii or tuple(2.0 ** -k for k in range(2, 6))
    kw = {"n_walks": rc.walks} if rc.walks else {}
    return [thm14_check(log_distance_datum(), _unit_ball(rc), (1.0, 0.0, 0.0), radii, h0=_pick(rc.grid_h, 1 / 32),
                        cfg=_walk_cfg(rc), spread_tol=_pick(rc.tol, 4.0), **kw)]


def cmd_energy(rc):
    from .carleson.checks import energy_identity_check
    from .potential.grid import Grid
    ball = _unit_ball(rc)
    return [energy_identity_check(lambda p: np.asarray(p)[..., 0], np.zeros(3), Grid(ball, _pick(rc.grid_h, 1 / 64)),
                                  _pick(rc.walks, 100_000), _walk_cfg(rc), tol=_pick(rc.tol, 0.10))]


def cmd_green_bound(rc):
    from .carleson.checks import green_lower_bound_check
    h = _pick(rc.grid_h, 1.0 / 32)
    return [green_lower_bound_check(_unit_ball(rc), [h, h / math.sqrt(2)], seed=rc.seed,
                                    stability=_pick(rc.tol, 0.30))]


def cmd_fatou(rc):
    from .carleson.checks import fatou_check
    from .potential.grid import Grid
    from .potential.solve import solve_dirichlet
    ball = _unit_ball(rc)
    h = _pick(rc.grid_h, 1.0 / 32)
    u = solve_dirichlet(Grid(ball, h), acceptance.fatou_datum)
    omegas = ball.sample_boundary(np.random.default_rng(rc.seed), _pick(rc.samples, 50), delta=0.1)
    return [fatou_check(u, ball, omegas, h, eps=_pick(rc.eps, 1e-2), tail=_pick(rc.tail, 4.0), seed=rc.seed)]


def cmd_all(rc):
    """Acceptance suite; the pass/fail matrix (with timings) goes to stderr."""
    outs = acceptance.run_all(rc.seed, rc.workers, only=rc.criteria, echo=lambda s: print(s, file=sys.stderr))
    print("\ncriterion  result  seconds", file=sys.stderr)
    for o in outs:
        print(f"C{o.k:<9d} {'PASS' if o.passed else 'FAIL':6s}  {o.seconds:8.1f}", file=sys.stderr)
    return [o.report for o in outs]


HANDLERS = {c: globals()["cmd_" + c.replace("-", "_")] for c in COMMANDS}


def emit(reports, rc: RunConfig):
    text = "".join(r.to_jsonl() for r in reports)
    if rc.out:
        with open(rc.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if rc.csv:
        with open(rc.csv, "w") as fh:
            fh.write("".join(r.to_csv() for r in reports))


def run(argv=None) -> int:
    try:
        rc = resolve(sys.argv[1:] if argv is None else argv)
    except ConfigError as exc:
        print(f"heiscarleson: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        reports = HANDLERS[rc.command](rc)
    except (ConfigError, HeisenbergError, ValueError) as exc:
        print(f"heiscarleson: error: {exc}", file=sys.stderr)
        return 2
    for r in reports:
        if r.seed is None:
            r.seed = rc.seed
    emit(reports, rc)
    return 0 if all(r.passed for r in reports) else 1


def main() -> None:
    sys.exit(run())
