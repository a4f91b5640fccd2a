"""Driving functions sampled on the uniform capacity grid ``t_k = k/n``.

A :class:`SampledDriver` stores ``n + 1`` grid values and an interpolation
mode.  ``"sqrt-interp"`` joins consecutive values by a scaled and translated
square root, ``"vertical-step"`` holds each value constant over its step.
Everything else in the package (slit maps, the zipper, the ODE oracle) reads
the driver through this type.

Random generators use numpy's PCG64 seeded through ``SeedSequence`` so every
path is a pure function of its parameters and seed.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Mapping

import numpy as np

SQRT = "sqrt-interp"
STEP = "vertical-step"
MODES = (SQRT, STEP)

RNG_NAME = "PCG64"


def _rng(*entropy: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(entropy))))


@dataclass(frozen=True, eq=True)
class SampledDriver:
    """Grid values ``lambda(k/n)``, ``k = 0..n``, plus interpolation mode.

    ``provenance`` records how the values were produced; it is excluded from
    equality so a driver read back from disk compares equal to the original.
    """

    values: np.ndarray
    mode: str = SQRT
    provenance: Mapping[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise ValueError("driver needs at least two grid values (n >= 1)")
        if not np.all(np.isfinite(v)):
            raise ValueError("driver values must be finite")
        if self.mode not in MODES:
            raise ValueError(f"unknown interpolation mode {self.mode!r}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "provenance", MappingProxyType(dict(self.provenance)))

    def __eq__(self, other):
        if not isinstance(other, SampledDriver):
            return NotImplemented
        return self.mode == other.mode and np.array_equal(self.values, other.values)

    __hash__ = None

    def __reduce__(self):
        # mappingproxy does not pickle; process pools need drivers to.
        return (SampledDriver, (np.array(self.values), self.mode, dict(self.provenance)))

    @property
    def n(self) -> int:
        return self.values.size - 1

    @property
    def dt(self) -> float:
        return 1.0 / self.n

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n + 1) / self.n

    def with_mode(self, mode: str) -> "SampledDriver":
        return SampledDriver(self.values, mode, self.provenance)

    def __call__(self, t):
        """Interpolated driver ``lambda^n(t)`` on ``[0, 1]``.

        The step mode is right-continuous: ``lambda^n(t) = lambda(t_k)`` on
        ``[t_k, t_{k+1})``.
        """
        t = np.asarray(t, dtype=float)
        if np.any((t < 0) | (t > 1)):
            raise ValueError("t must lie in [0, 1]")
        n = self.n
        k = np.minimum(np.floor(t * n).astype(int), n - 1)
        s = t - k / n
        v0 = self.values[k]
        if self.mode == STEP:
            out = np.where(t >= 1.0, self.values[n], v0)
        else:
            dv = self.values[k + 1] - v0
            out = v0 + dv * np.sqrt(np.clip(s * n, 0.0, 1.0))
        return out[()] if out.ndim == 0 else out


def sample_bm(kappa: float, n: int, seed: int) -> SampledDriver:
    """``sqrt(kappa) * B`` sampled at ``k/n`` with ``B_0 = 0``."""
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = _rng(int(seed))
    incr = rng.standard_normal(n) * math.sqrt(kappa / n)
    values = np.concatenate(([0.0], np.cumsum(incr)))
    prov = {"kind": "bm", "kappa": float(kappa), "seed": int(seed), "rng": RNG_NAME,
            "refinements": ()}
    return SampledDriver(values, SQRT, prov)


def refine_bridge(d: SampledDriver, seed: int) -> SampledDriver:
    """Double the resolution of a Brownian driver, keeping its grid values.

    Each new midpoint is the average of its neighbours plus an independent
    Gaussian with the Brownian-bridge variance ``kappa * (1/n) / 4``.
    """
    prov = dict(d.provenance)
    if prov.get("kind") != "bm":
        raise ValueError("refine_bridge needs a driver produced by sample_bm")
    kappa = prov["kappa"]
    n = d.n
    # Mix the base seed in so different paths never share refinement noise.
    rng = _rng(int(prov["seed"]), n, int(seed))
    v = d.values
    mid = 0.5 * (v[:-1] + v[1:]) + rng.standard_normal(n) * math.sqrt(kappa / n / 4.0)
    out = np.empty(2 * n + 1)
    out[0::2] = v
    out[1::2] = mid
    prov["refinements"] = tuple(prov.get("refinements", ())) + (int(seed),)
    return SampledDriver(out, d.mode, prov)


def sample_rw(kappa: float, n: int, seed: int) -> SampledDriver:
    """Scaled simple random walk ``sqrt(kappa) * S_k / sqrt(n)``."""
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = _rng(int(seed))
    steps = rng.integers(0, 2, size=n) * 2 - 1
    walk = np.concatenate(([0], np.cumsum(steps)))
    values = math.sqrt(kappa) * walk / math.sqrt(n)
    prov = {"kind": "rw", "kappa": float(kappa), "seed": int(seed), "rng": RNG_NAME}
    return SampledDriver(values, SQRT, prov)


def sqrt_driver(c: float, n: int) -> SampledDriver:
    """Grid samples of ``c * sqrt(t)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    values = c * np.sqrt(np.arange(n + 1) / n)
    return SampledDriver(values, SQRT, {"kind": "sqrt", "c": float(c)})


def zero_driver(n: int) -> SampledDriver:
    if n < 1:
        raise ValueError("n must be >= 1")
    return SampledDriver(np.zeros(n + 1), SQRT, {"kind": "zero"})


def perturb(d: SampledDriver, eps_max: float, seed: int = 0) -> SampledDriver:
    """Move each grid value after the base point by at most ``eps_max``.

    Uniform perturbations in ``[-eps_max, eps_max]``; the base point
    ``values[0]`` is kept so the curve still starts where it did.
    """
    if not eps_max >= 0:
        raise ValueError("eps_max must be nonnegative")
    if eps_max == 0:
        return d
    rng = _rng(int(seed), 0x9E37)
    noise = rng.uniform(-eps_max, eps_max, size=d.n)
    values = d.values.copy()
    values[1:] += noise
    # Rounding in the addition can overshoot the bound by an ulp.
    values[1:] = np.clip(values[1:], d.values[1:] - eps_max, d.values[1:] + eps_max)
    prov = dict(d.provenance)
    prov["perturbation"] = {"eps_max": float(eps_max), "seed": int(seed)}
    return SampledDriver(values, d.mode, prov)


def save_driver(d: SampledDriver, path) -> None:
    """Write ``n`` on the first line, then one value per line (17 digits)."""
    lines = [str(d.n)] + ["%.17g" % v for v in d.values]
    tmp = f"{os.fspath(path)}.tmp{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)


def load_driver(path, mode: str = SQRT) -> SampledDriver:
    """Read a driver file written by :func:`save_driver`.

    Blank lines and lines starting with ``#`` are ignored.
    """
    with open(path) as fh:
        tokens = [ln.strip() for ln in fh]
    tokens = [t for t in tokens if t and not t.startswith("#")]
    if not tokens:
        raise ValueError(f"{path}: empty driver file")
    try:
        n = int(tokens[0])
    except ValueError:
        raise ValueError(f"{path}: first line must be the step count n") from None
    if n < 1:
        raise ValueError(f"{path}: n must be >= 1")
    if len(tokens) != n + 2:
        raise ValueError(f"{path}: expected {n + 1} values, found {len(tokens) - 1}")
    try:
        values = np.array([float(t) for t in tokens[1:]])
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{path}: non-finite driver value")
    return SampledDriver(values, mode, {"kind": "file", "path": os.fspath(path)})


def osc(d: SampledDriver, delta: float) -> float:
    """Grid oscillation ``sup |lambda(t) - lambda(s)|`` over ``|t - s| <= delta``.

    Only grid pairs are inspected, which approximates the continuum supremum
    from below.
    """
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    lag = int(math.floor(delta * d.n + 1e-9))
    if lag == 0:
        return 0.0
    windows = np.lib.stride_tricks.sliding_window_view(d.values, lag + 1)
    return float(np.max(np.ptp(windows, axis=1)))


def kappa_to_a(kappa: float) -> float:
    """Root ``a <= 1/2`` of ``kappa = 4 (1 - 2a)^2 / (a (1 - a))``."""
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    return 0.5 - 0.5 * math.sqrt(kappa / (16.0 + kappa))


def a_to_kappa(a: float) -> float:
    return 4.0 * (1.0 - 2.0 * a) ** 2 / (a * (1.0 - a))
