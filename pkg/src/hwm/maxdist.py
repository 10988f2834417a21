"""Running maximum of Brownian motion with drift.

For ``x(t) = mu t + v W(t)`` started at zero, the law of ``M = max x(t)`` on
``[0, T]`` follows from the density of paths killed at an absorbing barrier
``h``, built by the method of images: the free Gaussian kernel minus a
weighted copy reflected through the barrier.

Products ``exp(2 mu h / v^2) * erfc(z)`` are evaluated through the scaled
``erfcx`` whenever ``z > 0``; the combined exponent collapses to a Gaussian
one and cannot overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, erfcx

from .types import MaxDistParams

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class BarrierSolution:
    """Image-charge constants for an absorbing wall at ``barrier``."""

    image_coefficient: float
    image_shift: float
    barrier: float

    @classmethod
    def for_barrier(cls, h: float, p: MaxDistParams) -> "BarrierSolution":
        return cls(
            image_coefficient=math.exp(2.0 * p.mu * h / p.v**2),
            image_shift=2.0 * h,
            barrier=h,
        )


def free_density(x, t: float, p: MaxDistParams):
    """Gaussian transition density with mean ``mu t`` and variance ``v^2 t``."""
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    s = p.v * math.sqrt(t)
    z = (np.asarray(x, dtype=float) - p.mu * t) / s
    return np.exp(-0.5 * z * z) / (_SQRT2PI * s)


def barrier_density(x, h: float, t: float, p: MaxDistParams):
    """Density at ``x`` of paths that stayed below ``h`` up to time ``t``.

    ``P0(x, t) - exp(2 mu h / v^2) P0(x - 2h, t)``, which vanishes on the wall.
    """
    if not h > 0:
        raise ValueError(f"barrier must be positive, got h={h}")
    x = np.asarray(x, dtype=float)
    if np.any(x > h):
        raise ValueError("barrier_density is defined for x <= h only")
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    # The image term equals P0(x, t) * exp(2 h (x - h) / (v^2 t)); written this
    # way the density is exactly zero on the wall and free of cancellation.
    ratio = 2.0 * h * (x - h) / (p.v * p.v * t)
    return -free_density(x, t, p) * np.expm1(ratio)


def _image_erfc(h, p: MaxDistParams):
    """``exp(2 mu h / v^2) * erfc((h + mu T) / (v sqrt(2T)))`` without overflow."""
    h = np.asarray(h, dtype=float)
    T = p.horizon
    denom = p.sigma * _SQRT2
    z = (h + p.mu * T) / denom
    a = 2.0 * p.mu / p.v**2
    out = np.empty_like(z)
    pos = z > 0
    gauss = (h - p.mu * T) / denom
    out[pos] = np.exp(-gauss[pos] ** 2) * erfcx(z[pos])
    out[~pos] = np.exp(a * h[~pos]) * erfc(z[~pos])
    return out


def max_cdf(h, p: MaxDistParams):
    """Probability that the running maximum on ``[0, T]`` does not exceed ``h``.

    Zero for ``h <= 0``; the path starts at the origin.
    """
    h_arr = np.atleast_1d(np.asarray(h, dtype=float))
    hp = np.maximum(h_arr, 0.0)
    a = (hp - p.mu * p.horizon) / (p.sigma * _SQRT2)
    # 1 + erf(a) == erfc(-a), without cancellation for negative a
    cdf = 0.5 * erfc(-a) - 0.5 * _image_erfc(hp, p)
    cdf = np.where(h_arr > 0, np.clip(cdf, 0.0, 1.0), 0.0)
    return cdf if np.ndim(h) else float(cdf[0])


def max_pdf(h, p: MaxDistParams):
    """Density of the running maximum; zero for ``h < 0``.

    ``2 P0(h, T) - (mu / v^2) exp(2 mu h / v^2) erfc((h + mu T) / (v sqrt(2T)))``,
    the exact derivative of :func:`max_cdf`.
    """
    h_arr = np.atleast_1d(np.asarray(h, dtype=float))
    hp = np.maximum(h_arr, 0.0)
    s = p.sigma
    gauss = 2.0 * np.exp(-0.5 * ((hp - p.mu * p.horizon) / s) ** 2) / (_SQRT2PI * s)
    pdf = gauss - (p.mu / p.v**2) * _image_erfc(hp, p)
    pdf = np.where(h_arr >= 0, np.maximum(pdf, 0.0), 0.0)
    return pdf if np.ndim(h) else float(pdf[0])
