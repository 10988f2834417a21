"""Closed-form valuation of high-water-mark contracts.

Under continuous monitoring the contract pays
``exp(gamma T) * max(X, max_t S(t) exp(-gamma t))`` at ``T``. Its value is
the guaranteed floor ``X exp((gamma - r) T)`` plus the discounted expected
excess of the tilted running maximum over ``X``, which has a closed form
built around a Black-Scholes call with yield ``y + gamma``.

With observations only every ``dt = T / N`` years the running maximum is
biased low. The discrete value is approximated by shifting the strike to
``X exp(eps)`` and scaling the excess by ``exp(-eps)``, with
``eps = c * v * sqrt(dt)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import erfc, erfcx, ndtr

from .types import (
    ContractState,
    ContractTerms,
    MarketParams,
    MaxDistParams,
    Method,
    PriceResult,
    validate,
)

#: Expected maximum of a standard Brownian motion over a unit interval.
SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
#: -zeta(1/2) / sqrt(2 pi), the Broadie-Glasserman-Kou shift for discretely
#: monitored extremes.
BGK_BETA = 0.5825971579390106

CORRECTIONS = {"expected-max": SQRT_2_OVER_PI, "bgk": BGK_BETA}
#: Constant used by the discrete pricers unless told otherwise. With
#: sqrt(2/pi) the shift is too large and the price lands about 0.012 (roughly
#: 44 standard errors of a 5e5-path run) below simulation at N=40.
DEFAULT_CORRECTION = "bgk"

#: Below this |r - y - gamma| the closed form is not evaluated.
SINGULAR_TOL = 1e-4


class SingularParameterization(ArithmeticError):
    """The closed form divides by ``2 (r - y - gamma)``, which is too close to zero."""


@dataclass(frozen=True)
class CorrectionParams:
    epsilon: float
    delta_t: float


def correction_epsilon(v: float, delta_t: float, constant: float = SQRT_2_OVER_PI) -> CorrectionParams:
    """Log-shift applied to the strike for a finite observation interval.

    With the default constant this is ``v * sqrt(2 delta_t / pi)``.
    """
    if delta_t < 0:
        raise ValueError(f"delta_t must be nonnegative, got {delta_t}")
    if not v > 0:
        raise ValueError(f"v must be positive, got {v}")
    if constant == SQRT_2_OVER_PI:
        eps = v * math.sqrt(2.0 * delta_t / math.pi)
    else:
        eps = constant * v * math.sqrt(delta_t)
    return CorrectionParams(epsilon=eps, delta_t=delta_t)


def _correction_constant(correction) -> float:
    if isinstance(correction, str):
        try:
            return CORRECTIONS[correction]
        except KeyError:
            raise ValueError(
                f"unknown correction {correction!r}; expected one of {sorted(CORRECTIONS)}"
            ) from None
    return float(correction)


def bs_call(S: float, X: float, v: float, r: float, y: float, t: float) -> float:
    """Black-Scholes price of a European call on an asset paying yield ``y``."""
    if S <= 0 or X <= 0:
        raise ValueError("spot and strike must be positive")
    if t < 0 or v < 0:
        raise ValueError("time and volatility must be nonnegative")
    if t == 0:
        return max(S - X, 0.0)
    if v == 0:
        return math.exp(-r * t) * max(S * math.exp((r - y) * t) - X, 0.0)
    s = v * math.sqrt(t)
    d1 = (math.log(S / X) + (r - y + 0.5 * v * v) * t) / s
    d2 = d1 - s
    return S * math.exp(-y * t) * ndtr(d1) - X * math.exp(-r * t) * ndtr(d2)


def _scaled_image(k: float, p: MaxDistParams) -> float:
    """``(X/S)^(1 + 2 mu / v^2) * erfc((mu T + k) / (v sqrt(2T)))`` with ``k = ln(X/S)``."""
    denom = p.sigma * math.sqrt(2.0)
    z = (p.mu * p.horizon + k) / denom
    b = 1.0 + 2.0 * p.mu / p.v**2
    if z > 0:
        g = (k - p.mu * p.horizon) / denom
        return math.exp(k - g * g) * erfcx(z)
    return math.exp(b * k) * erfc(z)


def hwm_value(S: float, X: float, market: MarketParams, gamma: float, T: float) -> float:
    """Continuous-monitoring value in price units, for ``X >= S``.

    ``exp(gamma T) * [X exp(-rT) + 2 Call(S, X, v, r, y + gamma, T)
    + exp(-rT) * (X Phi(d2) - S / (v^2 + 2 mu) * (2 mu Phi(d1) exp((mu + v^2/2) T)
    + v^2 / 2 * (X/S)^(1 + 2 mu / v^2) * erfc((mu T + ln(X/S)) / (v sqrt(2T)))))]``
    with ``mu = r - y - gamma - v^2/2`` the drift of the tilted log-price.
    """
    r, y, v = market.r, market.y, market.v
    drift = r - y - gamma
    if abs(drift) <= SINGULAR_TOL:
        raise SingularParameterization(
            f"|r - y - gamma| = {abs(drift):.3g} <= {SINGULAR_TOL:g}; use the quadrature oracle"
        )
    p = MaxDistParams.from_market(market, gamma, T)
    mu, s = p.mu, p.sigma
    k = math.log(X / S)
    d1 = ((mu + v * v) * T - k) / s
    d2 = (mu * T - k) / s
    bracket = X * ndtr(d2) - S / (v * v + 2.0 * mu) * (
        2.0 * mu * ndtr(d1) * math.exp(drift * T) + 0.5 * v * v * _scaled_image(k, p)
    )
    call = bs_call(S, X, v, r, y + gamma, T)
    disc = math.exp(-r * T)
    return math.exp(gamma * T) * (X * disc + 2.0 * call + disc * bracket)


def _normalized(state: ContractState, gamma: float) -> tuple[float, float]:
    s0 = state.issue_spot
    return state.spot / s0, state.effective_strike(gamma) / s0


def _fallback(state, market, terms, discrete, constant):
    from .quadrature import oracle_price

    result = oracle_price(state, market, terms, discrete=discrete, correction=constant)
    drift = market.r - market.y - terms.gamma
    return PriceResult(
        value=result.value,
        method=Method.QUADRATURE,
        epsilon_used=result.epsilon_used,
        warning=(
            f"|r - y - gamma| = {abs(drift):.3g} is within {SINGULAR_TOL:g} of the "
            "closed-form singularity; value computed by quadrature"
        ),
    )


def continuous_price(
    state: ContractState,
    market: MarketParams,
    terms: ContractTerms,
    *,
    fallback: bool = True,
) -> PriceResult:
    """Value under continuous monitoring of the high-water mark.

    Near ``r - y - gamma = 0`` the closed form is replaced by the quadrature
    oracle and the result is tagged ``quadrature``; with ``fallback=False``
    :class:`SingularParameterization` is raised instead.
    """
    validate(market, terms, state)
    if fallback and abs(market.r - market.y - terms.gamma) <= SINGULAR_TOL:
        return _fallback(state, market, terms, False, None)
    S, X = _normalized(state, terms.gamma)
    value = hwm_value(S, X, market, terms.gamma, terms.maturity)
    return PriceResult(
        value=terms.notional * value,
        method=Method.ANALYTIC_CONTINUOUS,
        epsilon_used=0.0,
    )


def discrete_price(
    state: ContractState,
    market: MarketParams,
    terms: ContractTerms,
    *,
    correction=DEFAULT_CORRECTION,
    fallback: bool = True,
) -> PriceResult:
    """Value with the high-water mark observed ``terms.n_observations`` times.

    ``correction`` selects the shift constant: ``"bgk"`` (0.5826),
    ``"expected-max"`` (sqrt(2/pi)) or a number. The floor term is never shifted.
    """
    validate(market, terms, state)
    constant = _correction_constant(correction)
    if fallback and abs(market.r - market.y - terms.gamma) <= SINGULAR_TOL:
        return _fallback(state, market, terms, True, constant)
    gamma, T = terms.gamma, terms.maturity
    eps = correction_epsilon(market.v, terms.delta_t, constant).epsilon
    S, X = _normalized(state, gamma)
    Xs = X * math.exp(eps)
    floor = math.exp((gamma - market.r) * T)
    excess = hwm_value(S, Xs, market, gamma, T) - Xs * floor
    value = X * floor + math.exp(-eps) * max(excess, 0.0)
    return PriceResult(
        value=terms.notional * value,
        method=Method.ANALYTIC_DISCRETE,
        epsilon_used=eps,
    )


def initial_price(
    market: MarketParams,
    terms: ContractTerms,
    *,
    correction=DEFAULT_CORRECTION,
) -> PriceResult:
    """Value at the issue date, per unit of notional times ``terms.notional``."""
    return discrete_price(ContractState.at_issue(), market, terms, correction=correction)
