"""Reference solutions of the Loewner equations by direct integration.

Downward:  d/dt g_t(z) =  2 / (g_t(z) - lambda(t)),  g_0(z) = z
Upward:    d/dt h_t(z) = -2 / (h_t(z) - xi(t)),      h_0(z) = z

If ``xi(t) = lambda(T - t)`` then ``h_T = g_T^{-1}``.  None of this module
touches the slit-map code, so it serves as an independent oracle for the
zipper.

The driver is integrated one grid segment at a time.  On a square-root piece
``lambda = v0 + C sqrt(t - t0)`` the substitution ``t = t0 + u^2`` makes the
driver linear in ``u`` and the right-hand side smooth, so an explicit
Dormand-Prince 5(4) pair reaches tight tolerances in a handful of steps.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .driver import SQRT, SampledDriver

CONST, SQRT_LEFT, SQRT_RIGHT = 0, 1, 2


class SolverFailure(RuntimeError):
    """The integrator could not continue (step size underflow, non-finite state)."""


@dataclass(frozen=True)
class OdeResult:
    value: complex
    blown_up: bool = False
    T_z: float | None = None
    steps_taken: int = 0
    error_estimate: float = 0.0
    derivative: complex | None = None


@dataclass(frozen=True)
class HullRaster:
    """Swallowed-pixel mask; row 0 is the top row (largest imaginary part)."""

    bounds: tuple
    resolution: float
    mask: np.ndarray
    t: float

    def centers(self):
        xmin, xmax, ymin, ymax = self.bounds
        h, w = self.mask.shape
        xs = xmin + (np.arange(w) + 0.5) / self.resolution
        ys = ymax - (np.arange(h) + 0.5) / self.resolution
        return xs, ys


class DrivingPath:
    """Piecewise driver: constant or square-root pieces on ``[t0, t1]``.

    ``SQRT_LEFT`` pieces are ``v0 + (v1 - v0) sqrt((t - t0)/(t1 - t0))``,
    ``SQRT_RIGHT`` pieces are ``v1 + (v0 - v1) sqrt((t1 - t)/(t1 - t0))``
    (the time reversal of a left piece), ``CONST`` pieces equal ``v0``.
    """

    def __init__(self, t0, t1, v0, v1, kind):
        self.t0 = np.asarray(t0, dtype=float)
        self.t1 = np.asarray(t1, dtype=float)
        self.v0 = np.asarray(v0, dtype=float)
        self.v1 = np.asarray(v1, dtype=float)
        self.kind = np.asarray(kind, dtype=int)

    @classmethod
    def from_driver(cls, d: SampledDriver) -> "DrivingPath":
        n = d.n
        t = np.arange(n + 1) / n
        v = d.values
        kind = SQRT_LEFT if d.mode == SQRT else CONST
        v1 = v[1:] if d.mode == SQRT else v[:-1]
        return cls(t[:-1], t[1:], v[:-1], v1, np.full(n, kind))

    @property
    def end(self) -> float:
        return float(self.t1[-1])

    def __len__(self):
        return self.t0.size

    def value(self, t: float) -> float:
        i = int(np.clip(np.searchsorted(self.t1, t, side="left"), 0, len(self) - 1))
        return _seg_value(self.t0[i], self.t1[i], self.v0[i], self.v1[i], self.kind[i], t)

    def restrict(self, T: float) -> "DrivingPath":
        """The path on ``[0, T]``."""
        if not 0 < T <= self.end * (1 + 1e-12):
            raise ValueError("restriction time out of range")
        keep = self.t0 < T
        t0, t1 = self.t0[keep], self.t1[keep].copy()
        v0, v1, kind = self.v0[keep], self.v1[keep].copy(), self.kind[keep]
        if t1[-1] > T:
            if kind[-1] == SQRT_RIGHT:
                raise NotImplementedError("cannot truncate a reversed square-root piece")
            v1[-1] = _seg_value(t0[-1], t1[-1], v0[-1], v1[-1], kind[-1], T)
            t1[-1] = T
        return DrivingPath(t0, t1, v0, v1, kind)

    def reversed(self, T: float) -> "DrivingPath":
        """``xi(s) = lambda(T - s)`` on ``[0, T]``."""
        p = self.restrict(T)
        t0 = (T - p.t1)[::-1]
        t1 = (T - p.t0)[::-1]
        t0[0] = 0.0
        flip = {CONST: CONST, SQRT_LEFT: SQRT_RIGHT, SQRT_RIGHT: SQRT_LEFT}
        kind = np.array([flip[k] for k in p.kind[::-1]])
        v0 = np.where(kind == CONST, p.v0[::-1], p.v1[::-1])
        v1 = np.where(kind == CONST, p.v0[::-1], p.v0[::-1])
        return DrivingPath(t0, t1, v0, v1, kind)


def _seg_value(t0, t1, v0, v1, kind, t):
    if kind == CONST:
        return float(v0)
    L = t1 - t0
    if kind == SQRT_LEFT:
        return float(v0 + (v1 - v0) * math.sqrt(min(max((t - t0) / L, 0.0), 1.0)))
    return float(v1 + (v0 - v1) * math.sqrt(min(max((t1 - t) / L, 0.0), 1.0)))


def as_path(d) -> DrivingPath:
    return d if isinstance(d, DrivingPath) else DrivingPath.from_driver(d)


def reversed_driver(d, T: float) -> DrivingPath:
    """Upward driver ``xi(s) = lambda^n(T - s)`` for the inverse map at time ``T``."""
    return as_path(d).reversed(T)


# Dormand-Prince 5(4) tableau.
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = _A[6]
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


class _Singular(Exception):
    pass


def _segment(t0, t1, v0, v1, kind, ta, tb):
    """Integration variable, its range and the maps x -> (t, lambda, dt/dx)."""
    L = t1 - t0
    if kind == CONST:
        return ta, tb, (lambda x: (x, v0, 1.0))
    if kind == SQRT_LEFT:
        C = (v1 - v0) / math.sqrt(L)
        return (math.sqrt(max(ta - t0, 0.0)), math.sqrt(max(tb - t0, 0.0)),
                lambda u: (t0 + u * u, v0 + C * u, 2.0 * u))
    C = (v0 - v1) / math.sqrt(L)
    return (math.sqrt(max(t1 - ta, 0.0)), math.sqrt(max(t1 - tb, 0.0)),
            lambda u: (t1 - u * u, v1 + C * u, -2.0 * u))


def _integrate(path, z0, T, sign, deriv, eps_blow, rtol, atol):
    """Integrate ``dw/dt = sign * 2/(w - drv(t))`` over ``[0, T]`` along ``path``."""
    w = complex(z0)
    dw = 1.0 + 0.0j
    steps = 0
    errmax = 0.0
    guard = eps_blow is not None
    h_hint = None

    def rhs(x, w, dw, tmap):
        t, lam, jac = tmap(x)
        diff = w - lam
        if guard and abs(diff) < eps_blow:
            raise _Singular
        if diff == 0:
            raise _Singular
        f = sign * 2.0 / diff
        return f * jac, (-f / diff) * dw * jac

    for i in range(len(path)):
        t0, t1 = float(path.t0[i]), float(path.t1[i])
        if t0 >= T:
            break
        tb = min(t1, T)
        xa, xb, tmap = _segment(t0, t1, float(path.v0[i]), float(path.v1[i]),
                                int(path.kind[i]), t0, tb)
        span = xb - xa
        if span == 0:
            continue
        direction = 1.0 if span > 0 else -1.0
        h_min = 1e-15 * max(abs(xa), abs(xb), 1e-300) + 1e-300
        h = abs(span) if h_hint is None else min(abs(span), h_hint)
        x = xa
        while (xb - x) * direction > 0:
            h = min(h, abs(xb - x))
            last = h >= abs(xb - x)
            hs = h * direction
            try:
                k1 = rhs(x, w, dw, tmap)
                ks = [k1]
                for s in range(1, 7):
                    a = _A[s]
                    ws = w + hs * sum(a[j] * ks[j][0] for j in range(s))
                    dws = dw + hs * sum(a[j] * ks[j][1] for j in range(s)) if deriv else dw
                    if sign > 0 and ws.imag <= 0 and z0.imag > 0:
                        raise _Singular
                    ks.append(rhs(x + _C[s] * hs, ws, dws, tmap))
                w_new = w + hs * sum(_B[j] * ks[j][0] for j in range(6))
                err_w = abs(hs * sum(_E[j] * ks[j][0] for j in range(7)))
                err = err_w / (atol + rtol * max(abs(w), abs(w_new)))
                if deriv:
                    dw_new = dw + hs * sum(_B[j] * ks[j][1] for j in range(6))
                    err_d = abs(hs * sum(_E[j] * ks[j][1] for j in range(7)))
                    err = max(err, err_d / (atol + rtol * max(abs(dw), abs(dw_new))))
                else:
                    dw_new = dw
                if not (math.isfinite(w_new.real) and math.isfinite(w_new.imag)):
                    raise _Singular
                if sign > 0 and z0.imag > 0 and w_new.imag <= 0:
                    raise _Singular
            except (_Singular, ZeroDivisionError, OverflowError):
                # Step reached the singularity: bisect.
                h *= 0.5
                if h < h_min:
                    if guard:
                        t_now = tmap(x)[0]
                        return OdeResult(w, True, t_now, steps, errmax, dw if deriv else None)
                    raise SolverFailure(f"step size underflow at t={tmap(x)[0]:.17g}") from None
                continue
            if err <= 1.0:
                x = xb if last else x + hs
                w, dw = w_new, dw_new
                steps += 1
                errmax = max(errmax, err * rtol)
                t_now, lam, jac = tmap(x)
                if guard:
                    dist = abs(w - lam)
                    if dist < eps_blow:
                        return OdeResult(w, True, t_now, steps, errmax, dw if deriv else None)
                    if dist < 10.0 * eps_blow:
                        # Near the singularity |w - lambda| ~ 2 sqrt(T_z - t); halve the
                        # remaining distance at most.
                        cap = 0.5 * dist * dist / 4.0 / max(abs(jac), 1e-300)
                        h = min(h, cap)
                fac = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
                h *= fac
            else:
                h *= max(0.2, 0.9 * err ** -0.2)
            if h < h_min:
                if guard:
                    return OdeResult(w, True, tmap(x)[0], steps, errmax, dw if deriv else None)
                raise SolverFailure(f"step size underflow at t={tmap(x)[0]:.17g}")
        h_hint = h
    return OdeResult(w, False, None, steps, errmax, dw if deriv else None)


def solve_downward(d, z0: complex, t: float, eps_blow: float = 1e-6,
                   rtol: float = 1e-10, atol: float = 1e-12) -> OdeResult:
    """``g_t(z0)`` for the interpolated driver ``d``, or the blow-up time ``T_z``.

    Blow-up is declared once ``|g - lambda| < eps_blow``; ``T_z`` is the time
    at which that happens, biased early by ``O(eps_blow^2)``.
    """
    z0 = complex(z0)
    if z0.imag <= 0:
        raise ValueError("downward flow needs Im z0 > 0")
    path = as_path(d)
    if not 0 <= t <= path.end * (1 + 1e-12):
        raise ValueError("t must lie in [0, 1]")
    if t == 0:
        return OdeResult(z0)
    return _integrate(path, z0, t, +1.0, False, eps_blow, rtol, atol)


def solve_upward(xi, z: complex, T: float, derivative: bool = False,
                 rtol: float = 1e-10, atol: float = 1e-12) -> OdeResult:
    """``h_T(z)`` for the upward equation driven by ``xi`` (driver or path).

    With ``derivative=True`` the variational equation
    ``d/dt h' = 2 h' / (h - xi)^2`` is integrated alongside and ``h_T'(z)``
    is returned in ``OdeResult.derivative``.
    """
    z = complex(z)
    if z.imag < 0:
        raise ValueError("point lies in the lower half plane")
    path = as_path(xi)
    if not 0 <= T <= path.end * (1 + 1e-12):
        raise ValueError("T out of range")
    if T == 0:
        return OdeResult(z, derivative=1.0 + 0j if derivative else None)
    res = _integrate(path, z, T, -1.0, derivative, None, rtol, atol)
    if res.value.imag < z.imag - 1e-12 * (1 + abs(z)):
        raise SolverFailure("upward flow decreased the imaginary part")
    return res


def inverse_check(d, z: complex, T: float) -> tuple[complex, complex]:
    """``(w, z')`` with ``w = h_T(z)`` from the reversed driver and ``z' = g_T(w)``."""
    if T == 0:
        return complex(z), complex(z)
    w = solve_upward(reversed_driver(d, T), z, T).value
    back = solve_downward(d, w, T)
    if back.blown_up:
        raise SolverFailure("downward flow blew up on the inverse image")
    return w, back.value


def _lam(d, t):
    return as_path(d).value(t) if t > 0 else float(as_path(d).v0[0])


def fhat_oracle(d, t: float, z: complex, derivative: bool = False) -> OdeResult:
    """``fhat_t(z) = g_t^{-1}(z + lambda(t))`` through the upward flow of the reversed driver."""
    if t == 0:
        return OdeResult(complex(z) + _lam(d, 0.0), derivative=1.0 + 0j if derivative else None)
    return solve_upward(reversed_driver(d, t), complex(z) + _lam(d, t), t, derivative)


def fhat_prime(d, t: float, y: float) -> float:
    """``|fhat_t'(iy)|``."""
    if not y > 0:
        raise ValueError("y must be positive")
    return abs(fhat_oracle(d, t, 1j * y, derivative=True).derivative)


def _raster_rows(args):
    d, t, xs, ys, eps_blow = args
    out = np.zeros((len(ys), len(xs)), dtype=bool)
    for i, y in enumerate(ys):
        for j, x in enumerate(xs):
            out[i, j] = solve_downward(d, complex(x, y), t, eps_blow=eps_blow).blown_up
    return out


def hull_raster(d, t: float, bounds, resolution: float, eps_blow: float = 1e-6,
                workers: int | None = None) -> HullRaster:
    """Mark pixels whose centres are swallowed by time ``t`` (``T_z <= t``).

    ``bounds = (xmin, xmax, ymin, ymax)`` with ``ymin >= 0``; ``resolution``
    is pixels per unit length.

    Hulls of curves have no interior, so a pixel centre is only caught when
    its trajectory passes within ``eps_blow`` of the driver.  The default
    marks (numerically) exact hull points; an ``eps_blow`` comparable to the
    pixel size marks a neighbourhood of the curve instead.
    """
    xmin, xmax, ymin, ymax = map(float, bounds)
    if not (xmax > xmin and ymax > ymin and ymin >= 0 and resolution > 0):
        raise ValueError("invalid raster bounds or resolution")
    width = max(1, int(round((xmax - xmin) * resolution)))
    height = max(1, int(round((ymax - ymin) * resolution)))
    raster = HullRaster((xmin, xmax, ymin, ymax), float(resolution),
                        np.zeros((height, width), dtype=bool), float(t))
    if t == 0:
        return raster
    xs, ys = raster.centers()
    if workers and workers > 1:
        chunks = [c for c in np.array_split(ys, workers) if c.size]
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_raster_rows, [(d, t, xs, c, eps_blow) for c in chunks]))
        mask = np.vstack(parts)
    else:
        mask = _raster_rows((d, t, xs, ys, eps_blow))
    return HullRaster(raster.bounds, raster.resolution, mask, float(t))
