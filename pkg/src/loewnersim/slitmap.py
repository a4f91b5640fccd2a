"""Elementary slit maps of the upper half plane.

The tilted map ``G(z) = (z + a)^(1 - alpha) (z - b)^alpha`` sends H onto H
minus a straight slit from 0 at angle ``alpha * pi``; with
``alpha * a = (1 - alpha) * b`` it is hydrodynamically normalised up to the
shift ``G(z) - z -> (1 - alpha) a - alpha b``.  The vertical map
``shift + sqrt((z - shift)^2 - 4 dt)`` is the ``alpha = 1/2`` special case.

Powers are always taken factor by factor with arguments forced into
``[0, pi]``; the product form ``((z + a)^(1-alpha) ...)`` of a single complex
power would cross the branch cut for points on the real axis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SlitParams:
    """One step of the tilted-slit chain.

    ``alpha`` sets the slit angle, ``a``/``b`` are the preimages of the slit
    base to the left and right of 0, ``dt`` the capacity time consumed and
    ``dlambda`` the driver increment over the step.
    """

    alpha: float
    a: float
    b: float
    dt: float
    dlambda: float


def _angle_pair(c):
    """``(alpha, 1 - alpha)`` for ``alpha = 1/2 - c / (2 sqrt(16 + c^2))``.

    The smaller of the two is computed as ``8 / (s (s + |c|))`` with
    ``s = sqrt(16 + c^2)``, which avoids cancellation for large ``|c|``.
    """
    c = np.asarray(c, dtype=float)
    s = np.sqrt(16.0 + c * c)
    small = 8.0 / (s * (s + np.abs(c)))
    big = 0.5 + 0.5 * np.abs(c) / s
    alpha = np.where(c >= 0, small, big)
    beta = np.where(c >= 0, big, small)
    if alpha.ndim == 0:
        return float(alpha), float(beta)
    return alpha, beta


def params_from_step(dlambda: float, dt: float) -> SlitParams:
    """Slit parameters for a square-root driver piece of size ``dlambda`` over ``dt``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    c = dlambda / math.sqrt(dt)
    alpha, beta = _angle_pair(c)
    root = math.sqrt(dt)
    a = 2.0 * root * math.sqrt(beta / alpha)
    b = 2.0 * root * math.sqrt(alpha / beta)
    return SlitParams(alpha, a, b, dt, dlambda)


def _upper_arg(w):
    # Argument in [0, pi]; points just below the axis from roundoff count as on it.
    return np.arctan2(np.where(w.imag > 0, w.imag, 0.0), w.real)


def tilted_map(alpha, a, b, z):
    """Vectorised ``(z + a)^(1 - alpha) (z - b)^alpha`` on the closed upper half plane.

    ``alpha``, ``a`` and ``b`` broadcast against ``z``.  No validation; see
    :func:`eval_tilted` for the checked scalar version.
    """
    z = np.asarray(z, dtype=complex)
    zp = z + a
    zm = z - b
    with np.errstate(divide="ignore"):
        logmod = (1.0 - alpha) * np.log(np.abs(zp)) + alpha * np.log(np.abs(zm))
    phase = (1.0 - alpha) * _upper_arg(zp) + alpha * _upper_arg(zm)
    mod = np.exp(logmod)
    return mod * np.cos(phase) + 1j * (mod * np.sin(phase))


def tilted_map_derivative(alpha, a, b, z, gz=None):
    """``G'(z) = G(z) * ((1 - alpha)/(z + a) + alpha/(z - b))``."""
    z = np.asarray(z, dtype=complex)
    if gz is None:
        gz = tilted_map(alpha, a, b, z)
    return gz * ((1.0 - alpha) / (z + a) + alpha / (z - b))


def _check_upper(z):
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag < 0):
        raise ValueError("point lies in the lower half plane")
    return z


def eval_tilted(p: SlitParams, z):
    """Apply the tilted slit map of ``p`` to ``z`` (scalar or array, ``Im z >= 0``)."""
    z = _check_upper(z)
    out = tilted_map(p.alpha, p.a, p.b, z)
    return out[()] if out.ndim == 0 else out


def tip(p: SlitParams) -> complex:
    """Image of 0, the tip of the slit: ``a^(1-alpha) b^alpha e^(i alpha pi)``."""
    r = p.a ** (1.0 - p.alpha) * p.b ** p.alpha
    return r * complex(math.cos(p.alpha * math.pi), math.sin(p.alpha * math.pi))


def vertical_map(dt, shift, z):
    """Vectorised ``shift + sqrt((z - shift)^2 - 4 dt)`` with values in the upper half plane."""
    z = np.asarray(z, dtype=complex)
    h = 2.0 * np.sqrt(dt)
    return shift + tilted_map(0.5, h, h, z - shift)


def eval_vertical(dt: float, z, shift: float = 0.0):
    """Map H onto H minus the vertical slit ``(shift, shift + 2i sqrt(dt)]``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    z = _check_upper(z)
    out = vertical_map(dt, shift, z)
    return out[()] if out.ndim == 0 else out
