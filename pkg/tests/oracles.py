"""Independent reference computations used by several test modules."""

import math

import numpy as np
from scipy.integrate import quad

from hwm.maxdist import barrier_density


def fokker_planck_residual(x, h, t, p, dx=1e-5, dt=1e-6):
    """Relative residual of dP/dt = v^2/2 P_xx - mu P_x by central differences."""
    P = lambda xx, tt: float(barrier_density(xx, h, tt, p))
    p_t = (P(x, t + dt) - P(x, t - dt)) / (2 * dt)
    p_x = (P(x + dx, t) - P(x - dx, t)) / (2 * dx)
    p_xx = (P(x + dx, t) - 2 * P(x, t) + P(x - dx, t)) / dx**2
    diffusion = 0.5 * p.v**2 * p_xx
    drift = p.mu * p_x
    scale = max(abs(p_t), abs(diffusion), abs(drift), 1e-300)
    return abs(p_t - diffusion + drift) / scale


def survival_mass(h, t, p):
    """Integral of the absorbed density below the barrier."""
    s = p.v * math.sqrt(t)
    lo = min(p.mu * t, -2 * h + p.mu * t) - 40 * s
    val, _ = quad(lambda x: float(barrier_density(x, h, t, p)), lo, h,
                  epsabs=1e-13, epsrel=1e-12, limit=200, points=[p.mu * t] if lo < p.mu * t < h else None)
    return val


def half_normal_exp_moment(sigma):
    """E[exp(sigma |Z|)] - 1 by quadrature against the half-normal density."""
    f = lambda z: 2.0 * (math.exp(sigma * z - 0.5 * z * z) - math.exp(-0.5 * z * z)) / math.sqrt(2 * math.pi)
    return quad(f, 0.0, np.inf, epsabs=1e-14, epsrel=1e-13)[0]
