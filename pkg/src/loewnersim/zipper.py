"""Composition of slit maps into the simulated curve.

For the square-root interpolated driver the step maps are

    G_k = (fhat_{t_k})^{-1} o fhat_{t_{k+1}},   fhat_t(z) = f_t(z + lambda(t)),

so ``fhat_{t_k} = G_0 o G_1 o ... o G_{k-1}``: ``G_{k-1}`` is applied first.
A curve point inside step ``k`` is the tip of the partial slit (same angle,
capacity ``s = t - t_k``) pushed through ``fhat_{t_k}``.

In vertical mode the driver is a step function and the maps are
``V_j(w) = lambda_j + sqrt((w - lambda_j)^2 - 4/n)`` in absolute coordinates;
only the grid tips are meaningful and the curve is a polyline through them.

Evaluation recomposes all maps for every point (O(n) per point).  Points are
processed together, step by step, which is exactly the per-point computation
done in bulk.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from . import slitmap
from .driver import SQRT, STEP, SampledDriver

TILTED = "tilted"
VERTICAL = "vertical"


@dataclass(frozen=True, eq=False)
class ZipperChain:
    driver: SampledDriver
    mode: str
    alpha: np.ndarray = field(repr=False)
    a: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    shifts: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.driver.n

    @property
    def dt(self) -> float:
        return self.driver.dt

    @property
    def steps(self) -> list:
        """Per-step :class:`SlitParams` (tilted) or shifts (vertical)."""
        if self.mode == VERTICAL:
            return list(self.shifts)
        dl = np.diff(self.driver.values)
        return [slitmap.SlitParams(float(al), float(a), float(b), self.dt, float(x))
                for al, a, b, x in zip(self.alpha, self.a, self.b, dl)]

    def tips(self) -> np.ndarray:
        """Tip of each step's slit in its own coordinates."""
        if self.mode == VERTICAL:
            return self.shifts + 2j * math.sqrt(self.dt)
        r = self.a ** (1.0 - self.alpha) * self.b ** self.alpha
        return r * np.exp(1j * math.pi * self.alpha)


@dataclass(frozen=True, eq=False)
class Curve:
    """Samples of a curve under the capacity parametrisation."""

    times: np.ndarray
    points: np.ndarray
    polyline: bool = False
    meta: Mapping[str, Any] = field(default_factory=dict)

    def __len__(self):
        return self.times.size


def build(d: SampledDriver, mode: str | None = None) -> ZipperChain:
    """Per-step maps for driver ``d``.

    ``mode`` defaults to ``tilted`` for square-root drivers and ``vertical``
    for step drivers.
    """
    if mode is None:
        mode = VERTICAL if d.mode == STEP else TILTED
    if mode not in (TILTED, VERTICAL):
        raise ValueError(f"unknown chain mode {mode!r}")
    n = d.n
    dt = 1.0 / n
    if mode == TILTED:
        d = d if d.mode == SQRT else d.with_mode(SQRT)
        c = np.diff(d.values) / math.sqrt(dt)
        alpha, beta = slitmap._angle_pair(c)
        a = 2.0 * math.sqrt(dt) * np.sqrt(beta / alpha)
        b = 2.0 * math.sqrt(dt) * np.sqrt(alpha / beta)
        shifts = np.empty(0)
    else:
        d = d if d.mode == STEP else d.with_mode(STEP)
        alpha = a = b = np.empty(0)
        shifts = d.values[:-1].copy()
    for arr in (alpha, a, b, shifts):
        arr.setflags(write=False)
    return ZipperChain(d, mode, alpha, a, b, shifts)


def _compose(chain: ZipperChain, w: np.ndarray, k: np.ndarray) -> np.ndarray:
    # Apply maps k-1, ..., 0 to each w; points are reordered so that the ones
    # still needing map j form a contiguous suffix.
    order = np.argsort(k, kind="stable")
    w = w[order].astype(complex)
    ks = k[order]
    if w.size:
        kmax = int(ks[-1])
        for j in range(kmax - 1, -1, -1):
            start = int(np.searchsorted(ks, j + 1, side="left"))
            if start == w.size:
                continue
            seg = w[start:]
            if chain.mode == TILTED:
                w[start:] = slitmap.tilted_map(chain.alpha[j], chain.a[j], chain.b[j], seg)
            else:
                w[start:] = slitmap.vertical_map(chain.dt, chain.shifts[j], seg)
    out = np.empty_like(w)
    out[order] = w
    return out


def _check_k(chain, k):
    k = np.asarray(k)
    if not np.issubdtype(k.dtype, np.integer):
        raise TypeError("step index must be an integer")
    if np.any((k < 0) | (k > chain.n)):
        raise ValueError("step index out of range 0..n")
    return k


def fhat(chain: ZipperChain, k, z):
    """``fhat_{t_k}(z) = f_{t_k}(z + lambda(t_k))`` by composing the first ``k`` maps.

    ``k`` and ``z`` broadcast.  ``Im z`` must be nonnegative.
    """
    k = _check_k(chain, k)
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag < 0):
        raise ValueError("point lies in the lower half plane")
    k, z = np.broadcast_arrays(k, z)
    shape = z.shape
    k = k.ravel().astype(int)
    z = z.ravel()
    if chain.mode == TILTED:
        out = _compose(chain, z, k) + chain.driver.values[0]
    else:
        out = _compose(chain, z + chain.driver.values[k], k)
    out = out.reshape(shape)
    return out[()] if out.ndim == 0 else out


def fhat_derivative(chain: ZipperChain, k: int, z):
    """``fhat_{t_k}'(z)`` by the chain rule through the composed maps (tilted only)."""
    if chain.mode != TILTED:
        raise ValueError("derivative is provided for tilted chains only")
    k = int(_check_k(chain, k))
    w = np.atleast_1d(np.asarray(z, dtype=complex)).copy()
    der = np.ones_like(w)
    for j in range(k - 1, -1, -1):
        gw = slitmap.tilted_map(chain.alpha[j], chain.a[j], chain.b[j], w)
        der *= slitmap.tilted_map_derivative(chain.alpha[j], chain.a[j], chain.b[j], w, gw)
        w = gw
    return der[0] if np.ndim(z) == 0 else der


def _inner_points(chain: ZipperChain, t: np.ndarray):
    n = chain.n
    k = np.minimum(np.floor(t * n).astype(int), n - 1)
    s = np.clip(t - k / n, 0.0, None)
    # The partial slit over capacity s has the full step's angle and a tip
    # scaled by sqrt(s / dt).
    inner = chain.tips()[k] * np.sqrt(np.minimum(s * n, 1.0))
    return k, inner


def _curve_points_serial(chain, t):
    k, inner = _inner_points(chain, t)
    return _compose(chain, inner, k) + chain.driver.values[0]


def curve_points(chain: ZipperChain, t, workers: int | None = None) -> np.ndarray:
    """``gamma^n(t)`` for an array of times in ``[0, 1]`` (tilted chains).

    With ``workers > 1`` the times are split into chunks evaluated
    concurrently; every point is computed independently, so the result is
    identical to the serial evaluation.
    """
    if chain.mode != TILTED:
        raise ValueError("interior curve points exist only for tilted chains")
    t = np.asarray(t, dtype=float)
    if np.any((t < 0) | (t > 1)):
        raise ValueError("t must lie in [0, 1]")
    flat = t.ravel()
    if workers and workers > 1 and flat.size > workers:
        chunks = np.array_split(flat, workers)
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda c: _curve_points_serial(chain, c), chunks))
        out = np.concatenate(parts)
    else:
        out = _curve_points_serial(chain, flat)
    out = out.reshape(t.shape)
    return out[()] if out.ndim == 0 else out


def curve_point(chain: ZipperChain, t: float) -> complex:
    return complex(curve_points(chain, float(t)))


def grid_tips(chain: ZipperChain) -> np.ndarray:
    """``gamma^n(t_k)`` for ``k = 0..n``."""
    n = chain.n
    k = np.arange(1, n + 1)
    # Left limit at t_k: the tip of slit k-1 pushed through the earlier maps.
    pts = _compose(chain, chain.tips()[k - 1], k - 1)
    if chain.mode == TILTED:
        pts = pts + chain.driver.values[0]
    return np.concatenate(([complex(chain.driver.values[0])], pts))


def simulate(chain: ZipperChain, m: int = 1, workers: int | None = None) -> Curve:
    """Sample the curve with ``m`` points per step (tilted) or at grid times (vertical)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    n = chain.n
    meta = {"n": n, "mode": chain.mode, "driver": dict(chain.driver.provenance)}
    if chain.mode == VERTICAL:
        times = np.arange(n + 1) / n
        return Curve(times, grid_tips(chain), polyline=True, meta=meta)
    times = np.arange(n * m + 1) / (n * m)
    pts = curve_points(chain, times, workers=workers)
    pts[0] = chain.driver.values[0]
    meta["m"] = m
    return Curve(times, pts, polyline=False, meta=meta)


def capacity_estimate(chain: ZipperChain, k: int, Y: float = 1e3) -> float:
    """Half-plane capacity time of the first ``k`` steps from the expansion at ``iY``.

    ``fhat_{t_k}(z) = z + lambda(t_k) - 2 t_k / z + c_2/z^2 + ...`` with real
    coefficients, so the real part of ``(fhat(iY) - iY - lambda(t_k)) iY``
    is ``-2 t_k`` up to ``O(Y^-2)``.
    """
    z = 1j * Y
    w = complex(fhat(chain, k, z))
    lam = chain.driver.values[k]
    return -((w - z - lam) * z).real / 2.0


def self_intersections(points: np.ndarray, limit: int | None = None) -> list[tuple[int, int]]:
    """Pairs of non-adjacent polyline segments that intersect or touch.

    Segments are swept in order of their left x-coordinate so each one is
    only tested against segments whose x-range overlaps it.
    """
    p = np.asarray(points, dtype=complex)
    x0 = np.minimum(p[:-1].real, p[1:].real)
    x1 = np.maximum(p[:-1].real, p[1:].real)
    y0 = np.minimum(p[:-1].imag, p[1:].imag)
    y1 = np.maximum(p[:-1].imag, p[1:].imag)
    order = np.argsort(x0, kind="stable")
    sx0 = x0[order]
    hits = []

    def orient(a, b, c):
        return np.sign((b.real - a.real) * (c.imag - a.imag) - (b.imag - a.imag) * (c.real - a.real))

    for pos, i in enumerate(order):
        stop = int(np.searchsorted(sx0, x1[i], side="right"))
        cand = order[pos + 1:stop]
        cand = cand[np.abs(cand - i) > 1]
        cand = cand[(y0[cand] <= y1[i]) & (y1[cand] >= y0[i])]
        if cand.size == 0:
            continue
        a, b = p[i], p[i + 1]
        c, d = p[cand], p[cand + 1]
        o1, o2 = orient(a, b, c), orient(a, b, d)
        o3, o4 = orient(c, d, a), orient(c, d, b)
        cross = (o1 * o2 <= 0) & (o3 * o4 <= 0)
        # Collinear but disjoint segments pass the sign test; require overlap.
        coll = (o1 == 0) & (o2 == 0)
        if np.any(coll):
            cross &= ~coll | ((x0[cand] <= x1[i]) & (y0[cand] <= y1[i]))
        for j in cand[cross]:
            hits.append((int(min(i, j)), int(max(i, j))))
            if limit is not None and len(hits) >= limit:
                return sorted(hits)
    return sorted(hits)
