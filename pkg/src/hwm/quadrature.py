"""Contract values by direct integration against the running-maximum density.

This path shares nothing with the closed form except the density itself and
is the reference the closed form is checked against. It has no singularity
at ``r - y - gamma = 0``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad
from scipy.special import ndtri

from .maxdist import max_pdf
from .types import (
    ContractState,
    ContractTerms,
    MarketParams,
    MaxDistParams,
    Method,
    PriceResult,
    validate,
)

log = logging.getLogger(__name__)


class NonConvergence(ArithmeticError):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-11
    abs_tol: float = 1e-13
    max_subdivisions: int = 500
    upper_cutoff: Optional[float] = None  # derived from the tail bound if None

    def __post_init__(self):
        if self.rel_tol < 1e-12:
            raise ValueError(f"rel_tol must be >= 1e-12, got {self.rel_tol}")
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


def tail_cutoff(S: float, lower: float, p: MaxDistParams, target: float) -> float:
    """Upper limit beyond which ``S e^h pdf(h)`` carries less than ``target`` mass.

    For ``h > |mu| T`` the density is bounded by
    ``C exp(-(h - mu T)^2 / (2 v^2 T))`` with ``C = 2 / (v sqrt(2 pi T)) + 2 |mu| / v^2``;
    multiplying by ``S e^h`` and integrating gives a Gaussian tail in closed form.
    """
    s = p.sigma
    T = p.horizon
    C = 2.0 / (s * math.sqrt(2.0 * math.pi)) + 2.0 * abs(p.mu) / p.v**2
    scale = S * C * s * math.sqrt(2.0 * math.pi)
    # log of scale * exp(mu T + s^2/2); ratio = P(Z > z) that keeps the mass below target
    log_ratio = math.log(target) - math.log(scale) - (p.mu * T + 0.5 * s * s)
    z = -ndtri(math.exp(log_ratio)) if log_ratio > -700 else 38.0
    z = max(z, 0.0)
    upper = p.mu * T + s * s + z * s
    return max(upper, abs(p.mu) * T, lower) + s


def expected_excess(S: float, X: float, p: MaxDistParams, q: Optional[QuadratureSpec] = None) -> float:
    """``E[(S exp(M) - X)^+]`` for the running maximum ``M`` of the log-return.

    Integrates ``(S e^h - X) pdf(h)`` over ``[max(0, ln(X/S)), upper]``.

    Raises
    ------
    NonConvergence
        If the subdivision limit is reached before the requested tolerance.
    """
    if S <= 0 or X <= 0:
        raise ValueError("spot and strike must be positive")
    q = q or QuadratureSpec()
    lower = max(0.0, math.log(X / S))
    upper = q.upper_cutoff
    if upper is None:
        upper = tail_cutoff(S, lower, p, q.abs_tol / 10.0)
    if upper <= lower:
        return 0.0

    def integrand(h):
        return (S * math.exp(h) - X) * max_pdf(h, p)

    value, err, info, *rest = quad(
        integrand,
        lower,
        upper,
        epsabs=q.abs_tol,
        epsrel=q.rel_tol,
        limit=q.max_subdivisions,
        full_output=1,
    )
    ier = rest[0] if rest and isinstance(rest[0], str) else None
    if info["last"] >= q.max_subdivisions and err > max(q.abs_tol, q.rel_tol * abs(value)):
        raise NonConvergence(
            f"subdivision limit {q.max_subdivisions} reached with error estimate {err:.3g}"
        )
    if ier is not None:
        log.debug("quad: %s (estimate %.3g +/- %.2g)", ier.strip().splitlines()[0], value, err)
    return max(value, 0.0)


def oracle_price(
    state: ContractState,
    market: MarketParams,
    terms: ContractTerms,
    q: Optional[QuadratureSpec] = None,
    *,
    discrete: bool = False,
    correction=None,
) -> PriceResult:
    """Contract value ``notional * exp((gamma - r) T) * (X + E[(S e^M - X)^+])``.

    With ``discrete=True`` the excess is evaluated at the shifted strike
    ``X e^eps`` and scaled by ``e^-eps``; the floor term stays unshifted.
    """
    from .analytic import DEFAULT_CORRECTION, _correction_constant, correction_epsilon

    validate(market, terms, state)
    gamma, T = terms.gamma, terms.maturity
    p = MaxDistParams.from_market(market, gamma, T)
    S = state.spot / state.issue_spot
    X = state.effective_strike(gamma) / state.issue_spot
    eps = 0.0
    if discrete:
        constant = _correction_constant(DEFAULT_CORRECTION if correction is None else correction)
        eps = correction_epsilon(market.v, terms.delta_t, constant).epsilon
    excess = expected_excess(S, X * math.exp(eps), p, q)
    value = math.exp((gamma - market.r) * T) * (X + math.exp(-eps) * excess)
    return PriceResult(
        value=terms.notional * value,
        method=Method.QUADRATURE,
        epsilon_used=eps,
    )
