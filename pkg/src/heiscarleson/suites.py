"""Identity and discretization suites for the group, the T-maps and the solvers.

Each suite returns a CheckReport whose summary holds the worst observed
violation for every identity it tests.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np

from . import group as G
from .conformal import TMapParams, fd_jacobian, koranyi_inversion, t_map, t_map_jacobian, t_map_norm, \
    t_map_pair_distance
from .domains import GaugeBall
from .potential.grid import Grid
from .potential.solve import assemble_sublaplacian, solve_dirichlet
from .potential.walks import WalkConfig, harmonic_extension_mc
from .report import CheckReport


def _vec_rel(a, b, scale) -> np.ndarray:
    """Max-norm difference over 1 + scale, per row."""
    return np.max(np.abs(a - b), axis=-1) / (1.0 + scale)


def _scal_rel(a, b) -> np.ndarray:
    a, b = np.asarray(a, float), np.asarray(b, float)
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-300)


def _dil(rho, p) -> np.ndarray:
    """Row-wise dilation by an array of factors."""
    rho = np.asarray(rho, float)
    return p * np.stack([rho, rho, rho * rho], axis=-1)


def _mag(*ps) -> np.ndarray:
    return np.max(np.stack([np.max(np.abs(p), axis=-1) for p in ps]), axis=0)


# ----------------------------------------------------------------------------
# exact identities


def identity_suite(rng, n: int = 10_000, tol: float = 1e-9, min_pole: float = 0.1) -> CheckReport:
    """Group, metric and dilation identities plus the inversion and T-map closed forms.

    Points are gaussian with unit scale; vector identities are measured by
    |a - b|_inf / (1 + largest input coordinate), scalar ones relatively.
    T-map samples keep d(a, y) >= min_pole.
    """
    p, q, r, g = (rng.normal(size=(n, 3)) for _ in range(4))
    rho = np.exp(rng.uniform(-2, 2, n))
    v = {}
    pq = G.mul(p, q)
    v["associativity"] = _vec_rel(G.mul(pq, r), G.mul(p, G.mul(q, r)), _mag(p, q, r, pq) ** 2)
    v["identity"] = np.maximum(_vec_rel(G.mul(p, np.zeros(3)), p, _mag(p)),
                               _vec_rel(G.mul(np.zeros(3), p), p, _mag(p)))
    v["inverse"] = np.maximum(_vec_rel(G.mul(p, G.inverse(p)), 0.0, _mag(p) ** 2),
                              _vec_rel(G.mul(G.inverse(p), p), 0.0, _mag(p) ** 2))
    dpq, dqp, dpr, dqr = G.dist(p, q), G.dist(q, p), G.dist(p, r), G.dist(q, r)
    v["distance_zero"] = G.dist(p, p) / (1.0 + G.gauge_norm(p))
    v["symmetry"] = _scal_rel(dpq, dqp)
    v["triangle"] = np.maximum(dpr - dpq - dqr, 0.0) / dpr
    v["positivity"] = (dpq <= 0).astype(float)
    v["left_invariance"] = _scal_rel(G.dist(G.mul(g, p), G.mul(g, q)), dpq)
    v["dilation_norm"] = _scal_rel(G.gauge_norm(_dil(rho, p)), rho * G.gauge_norm(p))
    dp, dq = _dil(rho, p), _dil(rho, q)
    v["dilation_homomorphism"] = _vec_rel(_dil(rho, pq), G.mul(dp, dq), _mag(dp, dq, pq) ** 2)
    ip = koranyi_inversion(p)
    v["inversion_involution"] = _vec_rel(koranyi_inversion(ip), p, _mag(p))
    v["inversion_norm"] = np.abs(G.gauge_norm(ip) * G.gauge_norm(p) - 1.0)

    # T-maps: n_maps parameter sets with n // n_maps point pairs each, kept off the pole
    n_maps = 100
    per = max(1, n // n_maps)
    tn, tp, tz = [], [], []
    for i in range(n_maps):
        x = rng.normal(size=3)
        a = rng.normal(size=3)
        while float(G.dist(x, a)) < min_pole:
            x = rng.normal(size=3)
        prm = TMapParams(x, a, float(rho[i]))
        ys, ys2 = (G.mul(a, _dil(np.exp(rng.uniform(np.log(min_pole), 1.0, per)), _unit_sphere(rng, per)))
                   for _ in range(2))
        T, T2 = t_map(prm, ys), t_map(prm, ys2)
        tn.append(_scal_rel(G.gauge_norm(T), t_map_norm(prm, ys)))
        tp.append(_scal_rel(G.dist(T, T2), t_map_pair_distance(prm, ys, ys2)))
        tz.append(float(G.gauge_norm(t_map(prm, x))))
    v["t_map_norm"] = np.concatenate(tn)
    v["t_map_pair_distance"] = np.concatenate(tp)
    v["t_map_zero"] = np.array(tz)
    summary = {k: float(np.max(val)) for k, val in v.items()}
    worst = max(summary.values())
    summary = {"max_violation": worst, **summary, "n": n}
    return CheckReport("identities", worst <= tol, None, [], summary, {"max_relative_violation": tol})


def _unit_sphere(rng, m: int) -> np.ndarray:
    p = rng.normal(size=(m, 3))
    return _dil((1.0 / G.gauge_norm(p)), p)


def jacobian_suite(rng, n: int = 1000, tol: float = 1e-5, min_pole: float = 0.1, h_rel: float = 5e-3) -> CheckReport:
    """Fourth-order finite-difference determinant of T against rho^4 / d(a, y)^8.

    Near the pole T varies on the Euclidean scale d(a, y)^2 / (1 + |z(a)|)
    (the left translation by a shears the t-direction), so the difference
    step is h_rel times that scale.
    """
    worst, records = 0.0, []
    for i in range(n):
        x, a = rng.normal(size=3), rng.normal(size=3)
        while float(G.dist(x, a)) < min_pole:
            x = rng.normal(size=3)
        rho = float(np.exp(rng.uniform(-1, 1)))
        prm = TMapParams(x, a, rho)
        d = float(np.exp(rng.uniform(np.log(min_pole), 1.0)))
        y = G.mul(a, G.dilate(d, _unit_sphere(rng, 1)[0]))
        h = h_rel * d * d / (1.0 + float(np.hypot(a[0], a[1])))
        fd = float(fd_jacobian(prm, y, h=h))
        exact = float(t_map_jacobian(prm, y))
        rel = abs(fd - exact) / exact
        worst = max(worst, rel)
        records.append({"d_ay": d, "rho": rho, "fd": fd, "exact": exact, "relative_error": rel})
    return CheckReport("t_map_jacobian", worst <= tol, None, records, {"max_relative_error": worst, "n": n},
                       {"relative": tol})


# ----------------------------------------------------------------------------
# radial curves


def _sphere_noncharacteristic(rng, m: int, delta: float) -> np.ndarray:
    out = []
    got = 0
    while got < m:
        w = _unit_sphere(rng, 2 * m)
        w = w[np.sqrt(G.z_abs2(w)) >= delta]
        out.append(w)
        got += w.shape[0]
    return np.concatenate(out)[:m]


def horizontality_residual(omega, s, k: float) -> np.ndarray:
    """|t' - 2(y x' - x y')| along gamma(., omega) by central differences of step k."""
    c = G.radial_curve_at(omega, s)
    d = (G.radial_curve_at(omega, s + k) - G.radial_curve_at(omega, s - k)) / (2 * k)
    x, y = c[..., 0], c[..., 1]
    dx, dy, dt = d[..., 0], d[..., 1], d[..., 2]
    return np.abs(dt - 2.0 * (y * dx - x * dy))


def curves_suite(rng, n: int = 10_000, delta: float = 0.2, steps=(1e-2, 5e-3),
                 norm_tol: float = 1e-12, ratio_band=(3.5, 4.5), projection_tol: float = 1e-9) -> CheckReport:
    """Gauge norm along gamma, second-order horizontality residual and the projection round trip."""
    w = _sphere_noncharacteristic(rng, n, delta)
    s = rng.uniform(0.05, 1.0, n)
    c = G.radial_curve_at(w, s)
    norm_err = float(np.max(np.abs(G.gauge_norm(c) - s)))
    sh = np.clip(s, 0.25, 0.95)  # keep the difference stencil inside (0, 1]
    r1 = horizontality_residual(w, sh, steps[0])
    r2 = horizontality_residual(w, sh, steps[1])
    ratio = r1 / r2
    x = _dil(s, w)
    wx = G.boundary_projection(x)
    back = G.radial_curve_at(wx, G.gauge_norm(x))
    rt_curve = float(np.max(np.abs(G.boundary_projection(c) - w)))
    rt_point = float(np.max(np.abs(back - x)))
    sphere = float(np.max(np.abs(G.gauge_norm(wx) - 1.0)))
    lo, hi = ratio_band
    passed = (norm_err <= norm_tol and lo <= ratio.min() and ratio.max() <= hi
              and max(rt_curve, rt_point, sphere) <= projection_tol)
    summary = {"norm_error": norm_err, "richardson_min": float(ratio.min()), "richardson_max": float(ratio.max()),
               "residual_max_coarse": float(r1.max()), "projection_roundtrip": rt_curve,
               "curve_roundtrip": rt_point, "projection_off_sphere": sphere, "n": n}
    return CheckReport("radial_curves", bool(passed), None, [], summary,
                       {"norm": norm_tol, "richardson": list(ratio_band), "projection": projection_tol})


# ----------------------------------------------------------------------------
# discretization and solver cross-validation


def inverse_square_norm(p) -> np.ndarray:
    """||p||^{-2}, a Delta_H-harmonic function off the identity."""
    with np.errstate(divide="ignore"):
        return 1.0 / G.gauge_norm(p) ** 2


def discretization_suite(hs: Sequence[float] = (1.0 / 32, 1.0 / 64), shell=(0.5, 0.9),
                         band=(3.5, 4.5)) -> CheckReport:
    """Stencil residual on ||p||^{-2} over interior nodes in a gauge shell, for each h.

    The ratio of consecutive residual maxima estimates 2^order.
    """
    ball = GaugeBall()
    records = []
    for h in hs:
        g = Grid(ball, h)
        op = assemble_sublaplacian(g)
        vals = inverse_square_norm(g.nodes()).reshape(g.shape)
        res = op.apply(vals)
        nn = G.gauge_norm(g.interior_nodes)
        m = (nn > shell[0]) & (nn < shell[1])
        records.append({"h": h, "residual_max": float(np.abs(res[m]).max()), "n_nodes": int(m.sum())})
    ratios = [a["residual_max"] / b["residual_max"] for a, b in zip(records, records[1:])]
    passed = bool(ratios) and all(band[0] <= q <= band[1] for q in ratios)
    return CheckReport("discretization", passed, None, records,
                       {"ratios": ratios, "ratio": ratios[-1] if ratios else float("nan")}, {"ratio": list(band)})


def crossval_datum(p) -> np.ndarray:
    """x^2 + y t: smooth boundary data with a non-trivial harmonic extension."""
    p = np.asarray(p, float)
    return p[..., 0] ** 2 + p[..., 1] * p[..., 2]


def default_probes() -> np.ndarray:
    return np.array([[0.0, 0.0, 0.0], [0.4, 0.1, 0.2], [-0.3, 0.45, -0.3], [0.1, -0.6, 0.3], [0.55, 0.3, -0.1]])


def crossval_check(h: float = 1.0 / 48, n_walks: int = 10_000, cfg: Optional[WalkConfig] = None,
                   f: Callable = crossval_datum, probes=None, n_se: float = 3.0) -> CheckReport:
    """solve_dirichlet against harmonic_extension_mc at a few interior probes."""
    cfg = WalkConfig() if cfg is None else cfg
    ball = GaugeBall()
    probes = default_probes() if probes is None else np.asarray(probes, float)
    u = solve_dirichlet(Grid(ball, h), f)
    grid_vals = u.evaluate(probes)
    records, worst = [], 0.0
    for i, p in enumerate(probes):
        mc = harmonic_extension_mc(p, f, ball, n_walks, cfg, stream=i)
        z = abs(float(grid_vals[i]) - mc.mean) / mc.se
        worst = max(worst, z)
        records.append({"probe": p, "grid": float(grid_vals[i]), **mc.as_dict("mc_"), "z_score": z})
    return CheckReport("crossval", worst <= n_se, cfg.seed, records,
                       {"max_z": worst, "n_walks": n_walks, "grid_h": h}, {"standard_errors": n_se})
