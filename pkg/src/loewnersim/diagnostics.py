"""Numerical checks of the convergence hypotheses and of the estimates they rest on.

Every ``check_*`` function returns a :class:`CheckReport` whose ``slack`` is
the smallest margin by which the checked inequality held (negative when it
failed).  :func:`convergence_study` measures sup-norm distances between
simulations at successive coupled resolutions.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np
from scipy.spatial.distance import pdist

from . import driver as drv
from . import odesolver, slitmap, zipper
from .driver import SampledDriver
from .zipper import Curve

OSC_TOL = 1e-9


@dataclass
class CheckReport:
    name: str
    passed: bool
    slack: float
    info: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def supnorm_distance(a: Curve, b: Curve, grid=None) -> float:
    """``max |a(t) - b(t)|`` over the common sample times.

    Without ``grid`` the two curves must be sampled at identical times;
    with ``grid`` each curve must contain every grid time among its samples.
    """
    if grid is None:
        if a.times.shape != b.times.shape or not np.array_equal(a.times, b.times):
            raise ValueError("curves are sampled on different grids")
        return float(np.max(np.abs(a.points - b.points))) if len(a) else 0.0
    grid = np.asarray(grid, dtype=float)

    def pick(c):
        idx = np.searchsorted(c.times, grid)
        idx = np.clip(idx, 0, c.times.size - 1)
        lo = np.clip(idx - 1, 0, c.times.size - 1)
        near = np.where(np.abs(c.times[lo] - grid) < np.abs(c.times[idx] - grid), lo, idx)
        if np.any(np.abs(c.times[near] - grid) > 1e-12):
            raise ValueError("grid time missing from curve samples")
        return c.points[near]

    return float(np.max(np.abs(pick(a) - pick(b)))) if grid.size else 0.0


def fit_rate(levels, dists) -> tuple[float, float]:
    """Least-squares ``log d = const - rho log n``; returns ``(rho, rms residual)``."""
    levels = np.asarray(levels, dtype=float)
    dists = np.asarray(dists, dtype=float)
    if np.any(dists <= 0) or levels.size < 2:
        return float("nan"), float("nan")
    x, y = np.log(levels), np.log(dists)
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    return float(-slope), float(np.sqrt(np.mean(resid ** 2)))


def rate_exponent(beta: float) -> float:
    """Sup-norm rate ``(1 - sqrt((1 + beta)/2)) / 2`` predicted for derivative exponent ``beta``."""
    return 0.5 * (1.0 - math.sqrt((1.0 + beta) / 2.0))


@dataclass
class BetaFit:
    beta: float
    c0: float
    y0: float
    y: np.ndarray
    max_derivative: np.ndarray


def estimate_beta(d: SampledDriver, t_grid, y_grid, method: str = "ode") -> BetaFit:
    """Fit ``max_t |fhat_t'(iy)| <= c0 y^-beta`` on a log-spaced ``y_grid``.

    ``beta`` is the least-squares slope of ``log max_t |fhat'|`` against
    ``-log y`` clamped to ``[0, 1)``; ``c0`` is the smallest constant making
    the bound hold at every sample.  ``method="ode"`` integrates the
    variational equation, ``method="chain"`` differentiates the zipper
    composition and needs grid times in ``t_grid``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    y_grid = np.asarray(y_grid, dtype=float)
    if y_grid.size < 2 or np.any(y_grid <= 0):
        raise ValueError("y_grid needs at least two positive values")
    if t_grid.size == 0:
        raise ValueError("empty t_grid")
    M = np.zeros(y_grid.size)
    if method == "ode":
        for t in t_grid:
            vals = [odesolver.fhat_prime(d, float(t), float(y)) for y in y_grid]
            M = np.maximum(M, vals)
    elif method == "chain":
        chain = zipper.build(d.with_mode(drv.SQRT))
        ks = np.rint(t_grid * d.n).astype(int)
        if np.any(np.abs(ks / d.n - t_grid) > 1e-12):
            raise ValueError("chain method needs grid times")
        for k in ks:
            M = np.maximum(M, np.abs(zipper.fhat_derivative(chain, int(k), 1j * y_grid)))
    else:
        raise ValueError(f"unknown method {method!r}")
    if not np.all(np.isfinite(M)) or np.any(M <= 0):
        raise ValueError("degenerate derivative data")
    slope, _ = np.polyfit(-np.log(y_grid), np.log(M), 1)
    beta = float(min(max(slope, 0.0), np.nextafter(1.0, 0.0)))
    c0 = float(np.max(M * y_grid ** beta))
    return BetaFit(beta, c0, float(np.max(y_grid)), y_grid, M)


def _driver_range(values: np.ndarray, times: np.ndarray, d: SampledDriver, stepwise: bool):
    # Running max - min of lambda^n over [0, t] for each sample time.
    n = d.n
    run_max = np.maximum.accumulate(values)
    run_min = np.minimum.accumulate(values)
    k = np.minimum(np.floor(times * n + 1e-9).astype(int), n)
    hi, lo = run_max[k], run_min[k]
    if not stepwise:
        lam_t = d(times)
        hi, lo = np.maximum(hi, lam_t), np.minimum(lo, lam_t)
    return hi - lo


def check_oscillation(curve: Curve, d: SampledDriver, tol: float = OSC_TOL) -> CheckReport:
    """``|Re z - lambda(0)| <= sup|lambda(r) - lambda(s)|`` and ``Im z <= 2 sqrt(t)``."""
    t, z = curve.times, curve.points
    spread = _driver_range(d.values, t, d, stepwise=curve.polyline)
    re_slack = spread - np.abs(z.real - d.values[0])
    im_slack = 2.0 * np.sqrt(t) - z.imag
    slack = np.minimum(re_slack, im_slack)
    bad = np.flatnonzero(slack < -tol)
    viol = [(float(t[i]), [float(z[i].real), float(z[i].imag)]) for i in bad[:10]]
    return CheckReport("oscillation", bad.size == 0, float(slack.min()),
                       {"samples": int(t.size), "re_slack": float(re_slack.min()),
                        "im_slack": float(im_slack.min())}, viol)


def random_slit_params(trials: int, seed: int, alpha_range=(0.02, 0.98), dt_range=(1e-4, 1.0)):
    """Arrays ``(alpha, a, b)`` for random valid tilted slits."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), 0x6D])))
    alpha = rng.uniform(*alpha_range, size=trials)
    dt = np.exp(rng.uniform(np.log(dt_range[0]), np.log(dt_range[1]), size=trials))
    a = 2.0 * np.sqrt(dt * (1.0 - alpha) / alpha)
    b = 2.0 * np.sqrt(dt * alpha / (1.0 - alpha))
    return alpha, a, b


def check_G_monotone(trials: int = 10_000, seed: int = 0, alpha=None, a=None, b=None,
                     y_grid=None) -> CheckReport:
    """``y -> Im G(iy)`` strictly increasing on a log grid for random slit maps."""
    if y_grid is None:
        y_grid = np.logspace(-6, 3, 100)
    if alpha is None:
        alpha, a, b = random_slit_params(trials, seed)
    alpha, a, b = (np.atleast_1d(np.asarray(x, dtype=float))[:, None] for x in (alpha, a, b))
    worst = np.inf
    failed = []
    chunk = 2000
    for start in range(0, alpha.shape[0], chunk):
        sl = slice(start, start + chunk)
        im = slitmap.tilted_map(alpha[sl], a[sl], b[sl], 1j * y_grid[None, :]).imag
        inc = np.diff(im, axis=1) / np.maximum(np.abs(im[:, 1:]), 1e-300)
        worst = min(worst, float(inc.min()))
        rows = np.flatnonzero(np.any(inc <= 0, axis=1))
        for r in rows[:10 - len(failed)]:
            i = start + r
            failed.append({"alpha": float(alpha[i, 0]), "a": float(a[i, 0]), "b": float(b[i, 0])})
        if rows.size and len(failed) >= 10:
            break
    return CheckReport("G_monotone", not failed, worst,
                       {"trials": int(alpha.shape[0]), "y_points": int(len(y_grid))}, failed)


def _sup_diff(W1: SampledDriver, W2: SampledDriver, T: float) -> float:
    p1, p2 = odesolver.as_path(W1), odesolver.as_path(W2)
    # Square-root pieces are monotone, so the difference of two of them on
    # a common grid peaks at grid points; T itself covers a truncated piece.
    t = np.union1d(np.union1d(p1.t0, p2.t0), [T])
    t = t[t <= T]
    return float(max(abs(p1.value(s) - p2.value(s)) for s in t))


def check_jrw(W1: SampledDriver, W2: SampledDriver, u: complex, T: float,
              rel_tol: float = 1e-6) -> CheckReport:
    """Perturbation bound between the inverse maps of two drivers at time ``T``.

    ``|f1(u) - f2(u)| <= eps exp(1/2 sqrt(log(I|f1'|/y) log(I|f2'|/y)) + log log(I/y))``
    with ``I = sqrt(4T + y^2)`` and ``eps`` the sup distance of the drivers.
    """
    u = complex(u)
    if u.imag <= 0:
        raise ValueError("u must lie in the upper half plane")
    if W1.n != W2.n:
        raise ValueError("drivers must share a grid")
    y = u.imag
    r1 = odesolver.solve_upward(odesolver.reversed_driver(W1, T), u, T, derivative=True)
    r2 = odesolver.solve_upward(odesolver.reversed_driver(W2, T), u, T, derivative=True)
    lhs = abs(r1.value - r2.value)
    eps = _sup_diff(W1, W2, T)
    I = math.sqrt(4.0 * T + y * y)
    l1 = math.log(I * abs(r1.derivative) / y)
    l2 = math.log(I * abs(r2.derivative) / y)
    # Both logs are >= 0 in exact arithmetic; clamp roundoff below zero.
    rhs = eps * math.exp(0.5 * math.sqrt(max(l1 * l2, 0.0)) + math.log(math.log(I / y)))
    ok = lhs <= rhs * (1.0 + rel_tol)
    return CheckReport("jrw", ok, rhs - lhs,
                       {"lhs": lhs, "rhs": rhs, "eps": eps, "T": T, "u": u,
                        "f1": r1.value, "f2": r2.value})


def check_hcap_diam(d: SampledDriver, t: float, m: int = 8, limit: float = 10.0) -> CheckReport:
    """Ratio ``hcap / (diam * height)`` of the simulated curve up to time ``t``.

    Capacity is measured in the time units of the Loewner equation, so the
    hull at time ``t`` has ``hcap = t``.
    """
    if not 0 < t <= 1:
        raise ValueError("t must lie in (0, 1]")
    chain = zipper.build(d.with_mode(drv.SQRT))
    count = max(2, int(math.ceil(t * d.n * m)) + 1)
    times = np.linspace(0.0, t, count)
    pts = zipper.curve_points(chain, times)
    pts[0] = d.values[0]
    xy = np.column_stack([pts.real, pts.imag])
    diam = float(pdist(xy).max())
    height = float(pts.imag.max())
    ratio = t / (diam * height)
    return CheckReport("hcap_diam", 0 < ratio <= limit, limit - ratio,
                       {"ratio": ratio, "diam": diam, "height": height, "t": t})


def check_capacity(chain, ks=None, Y: float = 1e3, rel_tol: float = 1e-3) -> CheckReport:
    """Capacity of the first ``k`` steps recovered from the expansion at ``iY``."""
    if ks is None:
        ks = sorted({max(1, chain.n // 8), chain.n // 4, chain.n // 2, chain.n} - {0})
    errs = {}
    for k in ks:
        est = zipper.capacity_estimate(chain, int(k), Y)
        errs[int(k)] = abs(est - k / chain.n) / (k / chain.n)
    worst = max(errs.values())
    return CheckReport("capacity", worst <= rel_tol, rel_tol - worst, {"rel_err": errs, "Y": Y})


def check_oracle(d: SampledDriver, ks=None, ys=(0.1, 0.3, 1.0), rel_tol: float = 1e-6) -> CheckReport:
    """Zipper ``fhat`` against the upward-ODE solution of the reversed driver."""
    chain = zipper.build(d)
    if ks is None:
        ks = sorted({max(1, d.n // 8), d.n // 4, d.n // 2, d.n} - {0})
    worst = 0.0
    rows = []
    for k in ks:
        for y in ys:
            zz = complex(zipper.fhat(chain, int(k), 1j * y))
            oo = odesolver.fhat_oracle(d, k / d.n, 1j * y).value
            err = abs(zz - oo) / abs(oo)
            worst = max(worst, err)
            rows.append({"k": int(k), "y": float(y), "rel_err": err})
    bad = [r for r in rows if r["rel_err"] > rel_tol]
    return CheckReport("oracle", not bad, rel_tol - worst, {"points": rows}, bad)


def check_simple(curve: Curve) -> CheckReport:
    """No two non-adjacent segments of the sampled polyline meet."""
    hits = zipper.self_intersections(curve.points, limit=10)
    return CheckReport("simple", not hits, 0.0 if not hits else -1.0,
                       {"segments": int(len(curve) - 1)}, hits)


@dataclass
class ConvergenceReport:
    """Sup-norm distances ``d_n = |gamma^n - gamma^2n|`` for one family over several seeds."""

    descriptor: dict
    levels: list
    seeds: list
    d_n: np.ndarray  # shape (seeds, levels - 1)
    rho_fit: np.ndarray
    residual: np.ndarray
    beta_est: np.ndarray
    c0_est: np.ndarray
    y0: float
    rho_target: np.ndarray
    m: int
    tolerances: dict
    wall_times: np.ndarray

    def decreasing(self) -> np.ndarray:
        return np.all(np.diff(self.d_n, axis=1) < 0, axis=1)

    def fraction_decreasing(self) -> float:
        return float(np.mean(self.decreasing()))

    def fraction_rho_positive(self) -> float:
        return float(np.mean(np.nan_to_num(self.rho_fit, nan=-1.0) > 0))

    def to_dict(self) -> dict:
        out = {
            "schema": "loewnersim.convergence/1",
            "descriptor": self.descriptor,
            "levels": list(map(int, self.levels)),
            "m": self.m,
            "y0": self.y0,
            "tolerances": self.tolerances,
            "summary": {"fraction_decreasing": self.fraction_decreasing(),
                        "fraction_rho_positive": self.fraction_rho_positive()},
            "runs": [],
        }
        for i, s in enumerate(self.seeds):
            out["runs"].append({
                "seed": s,
                "d_n": self.d_n[i],
                "rho_fit": self.rho_fit[i],
                "residual": self.residual[i],
                "beta_est": self.beta_est[i],
                "c0_est": self.c0_est[i],
                "rho_target": self.rho_target[i],
                "wall_time": self.wall_times[i],
            })
        return _jsonable(out)


def coupled_drivers(family: str, n0: int, doublings: int, seed: int = 0,
                    kappa: float | None = None, c: float | None = None) -> list[SampledDriver]:
    """Drivers at ``n0, 2 n0, ...``; each coarse one is an exact restriction of the next."""
    levels = [n0 * 2 ** j for j in range(doublings + 1)]
    if family == "bm":
        out = [drv.sample_bm(kappa, n0, seed)]
        for j in range(doublings):
            out.append(drv.refine_bridge(out[-1], seed=j + 1))
        return out
    if family == "sqrt":
        return [drv.sqrt_driver(c, n) for n in levels]
    if family == "zero":
        return [drv.zero_driver(n) for n in levels]
    raise ValueError(f"no coupled refinement for driver family {family!r}")


def _study_one(args):
    family, seed, n0, doublings, m, kappa, c, beta_points = args
    start = time.perf_counter()
    drivers = coupled_drivers(family, n0, doublings, seed, kappa=kappa, c=c)
    levels = [d.n for d in drivers]
    grid = np.arange(n0 * m + 1) / (n0 * m)
    curves = []
    for d in drivers:
        cv = zipper.simulate(zipper.build(d), m)
        curves.append(cv)
    dists = [supnorm_distance(curves[j], curves[j + 1], grid) for j in range(len(curves) - 1)]
    rho, res = fit_rate(levels[:-1], dists)
    beta = c0 = float("nan")
    fine = drivers[-1]
    y0 = 0.5
    if beta_points:
        ks = np.unique(np.linspace(0, fine.n, beta_points).round().astype(int))
        y_grid = np.logspace(math.log10(1.0 / math.sqrt(fine.n)), math.log10(y0), 8)
        fit = estimate_beta(fine, ks / fine.n, y_grid, method="chain")
        beta, c0 = fit.beta, fit.c0
    return {"seed": seed, "levels": levels, "d_n": dists, "rho": rho, "res": res,
            "beta": beta, "c0": c0, "y0": y0, "wall": time.perf_counter() - start}


def convergence_study(family: str = "bm", seeds=(0,), n0: int = 16, doublings: int = 3,
                      m: int = 2, kappa: float | None = None, c: float | None = None,
                      beta_points: int = 17, workers: int | None = None) -> ConvergenceReport:
    """Coupled sup-norm distances between successive resolutions.

    Brownian drivers are refined by Brownian-bridge midpoints, deterministic
    families are resampled exactly.  Distances are taken on the coarsest
    level's sample times.  ``beta_points`` grid times of the finest driver
    feed the derivative-growth fit (0 disables it).
    """
    if n0 < 16 or doublings < 2:
        raise ValueError("need n0 >= 16 and doublings >= 2")
    if family == "bm" and kappa is None:
        raise ValueError("Brownian family needs kappa")
    if family == "sqrt" and c is None:
        raise ValueError("sqrt family needs c")
    seeds = [int(s) for s in np.atleast_1d(seeds)]
    jobs = [(family, s, n0, doublings, m, kappa, c, beta_points) for s in seeds]
    if workers and workers > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_study_one, jobs))
    else:
        results = [_study_one(j) for j in jobs]
    results.sort(key=lambda r: r["seed"])
    beta = np.array([r["beta"] for r in results])
    target = np.array([rate_exponent(b) if math.isfinite(b) else float("nan") for b in beta])
    desc: dict[str, Any] = {"family": family}
    if kappa is not None:
        desc["kappa"] = float(kappa)
    if c is not None:
        desc["c"] = float(c)
    desc["rng"] = drv.RNG_NAME
    return ConvergenceReport(
        descriptor=desc,
        levels=results[0]["levels"],
        seeds=[r["seed"] for r in results],
        d_n=np.array([r["d_n"] for r in results]),
        rho_fit=np.array([r["rho"] for r in results]),
        residual=np.array([r["res"] for r in results]),
        beta_est=beta,
        c0_est=np.array([r["c0"] for r in results]),
        y0=results[0]["y0"],
        rho_target=target,
        m=m,
        tolerances={"grid": "coarsest level samples", "fit": "ordinary least squares"},
        wall_times=np.array([r["wall"] for r in results]),
    )
