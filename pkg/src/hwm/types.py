"""Domain types shared by the pricers.

All types are frozen dataclasses. Construction does not validate, so that
:func:`validate` can report every violated invariant at once instead of
stopping at the first one.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional


class Compounding(str, enum.Enum):
    """How the guarantee accrues between two observation dates."""

    CONTINUOUS = "continuous"
    SIMPLE = "simple"

    def growth(self, gamma: float, dt: float) -> float:
        if self is Compounding.CONTINUOUS:
            return math.exp(gamma * dt)
        return 1 + gamma * dt

    def log_growth(self, gamma: float, dt: float) -> float:
        # gamma * dt exactly, so a grid twice as fine gives bit-identical weights
        if self is Compounding.CONTINUOUS:
            return gamma * dt
        return math.log1p(gamma * dt)


class Method(str, enum.Enum):
    ANALYTIC_CONTINUOUS = "analytic-continuous"
    ANALYTIC_DISCRETE = "analytic-discrete"
    QUADRATURE = "quadrature"
    MONTE_CARLO = "monte-carlo"


@dataclass(frozen=True)
class MarketParams:
    """Flat Black-Scholes market. Rates are continuously compounded, per year."""

    r: float
    v: float
    y: float = 0.0


@dataclass(frozen=True)
class ContractTerms:
    """Guarantee rate, maturity and observation schedule of a contract.

    The observation interval is always derived as ``maturity / n_observations``.
    """

    gamma: float
    maturity: float
    n_observations: int = 12
    notional: float = 1.0
    compounding: Compounding = Compounding.CONTINUOUS

    @property
    def delta_t(self) -> float:
        return self.maturity / self.n_observations


@dataclass(frozen=True)
class ContractState:
    """Where a contract stands at the valuation date.

    Parameters
    ----------
    spot : float
        Current fund value S.
    high_water : float
        Highest observed fund value S_H since issue.
    accrual_time : float
        Time t_h elapsed since the observation giving the highest guaranteed
        payoff; the guarantee has been accruing on it since then.
    issue_spot : float
        Fund value at issue, the normalization base of all ratios.
    """

    spot: float = 1.0
    high_water: float = 1.0
    accrual_time: float = 0.0
    issue_spot: float = 1.0

    @classmethod
    def at_issue(cls, spot: float = 1.0) -> "ContractState":
        return cls(spot=spot, high_water=spot, accrual_time=0.0, issue_spot=spot)

    def strike(self, gamma: float) -> float:
        """Accrued guarantee ``S_H * exp(gamma * t_h)``."""
        return self.high_water * math.exp(gamma * self.accrual_time)

    def effective_strike(self, gamma: float) -> float:
        # A spot above the accrued guarantee becomes the new high-water base.
        return max(self.strike(gamma), self.spot)


@dataclass(frozen=True)
class MaxDistParams:
    """Log-return drift and volatility of the process whose maximum is studied."""

    mu: float
    v: float
    horizon: float

    def __post_init__(self):
        if not self.v > 0:
            raise ValueError(f"volatility must be positive, got v={self.v}")
        if not self.horizon > 0:
            raise ValueError(f"horizon must be positive, got T={self.horizon}")

    @classmethod
    def from_market(cls, market: MarketParams, gamma: float, horizon: float) -> "MaxDistParams":
        """Parameters of the tilted log-price ``ln(S(t) exp(-gamma t) / S(0))``.

        Tilting by the guarantee rate is the same as raising the dividend
        yield from ``y`` to ``y + gamma``.
        """
        mu = market.r - market.y - gamma - 0.5 * market.v * market.v
        return cls(mu=mu, v=market.v, horizon=horizon)

    @property
    def sigma(self) -> float:
        """Standard deviation of the log-return at the horizon."""
        return self.v * math.sqrt(self.horizon)


@dataclass(frozen=True)
class PriceResult:
    value: float
    method: Method
    std_error: Optional[float] = None
    epsilon_used: Optional[float] = None
    warning: Optional[str] = None

    def __post_init__(self):
        if (self.std_error is not None) != (self.method is Method.MONTE_CARLO):
            raise ValueError("std_error is reported for monte-carlo results only")
        if not (math.isfinite(self.value) and self.value >= 0):
            raise ValueError(f"price must be finite and nonnegative, got {self.value}")

    def to_dict(self) -> dict:
        out = {"method": self.method.value, "value": self.value}
        if self.std_error is not None:
            out["std_error"] = self.std_error
        out["epsilon"] = self.epsilon_used
        if self.warning is not None:
            out["warning"] = self.warning
        return out


class FieldError(NamedTuple):
    field: str
    message: str

    def __str__(self):
        return f"{self.field}: {self.message}"


class ValidationError(ValueError):
    """Raised with the full list of violated invariants."""

    def __init__(self, errors: list[FieldError]):
        self.errors = list(errors)
        super().__init__("; ".join(str(e) for e in self.errors))


class Bundle(NamedTuple):
    market: MarketParams
    terms: ContractTerms
    state: ContractState


def _finite(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def market_errors(market: MarketParams) -> list[FieldError]:
    errors = []
    for name in ("r", "y"):
        value = getattr(market, name)
        if not _finite(value):
            errors.append(FieldError(name, f"must be finite, got {value}"))
        elif abs(value) > 1:
            errors.append(FieldError(name, f"must satisfy |{name}| <= 1, got {value}"))
    if not _finite(market.v) or market.v <= 0:
        errors.append(FieldError("v", "volatility must be positive"))
    elif market.v > 5:
        errors.append(FieldError("v", f"volatility must be <= 5, got {market.v}"))
    return errors


def terms_errors(terms: ContractTerms) -> list[FieldError]:
    errors = []
    if not _finite(terms.gamma):
        errors.append(FieldError("gamma", f"must be finite, got {terms.gamma}"))
    if not _finite(terms.maturity) or terms.maturity <= 0:
        errors.append(FieldError("maturity", "maturity must be positive"))
    n = terms.n_observations
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        errors.append(FieldError("n_observations", f"must be an integer >= 1, got {n!r}"))
    if not _finite(terms.notional) or terms.notional <= 0:
        errors.append(FieldError("notional", "notional must be positive"))
    if not isinstance(terms.compounding, Compounding):
        errors.append(FieldError("compounding", f"unknown compounding {terms.compounding!r}"))
    return errors


def state_errors(state: ContractState) -> list[FieldError]:
    errors = []
    if not _finite(state.spot) or state.spot <= 0:
        errors.append(FieldError("spot", "spot must be positive"))
    if not _finite(state.issue_spot) or state.issue_spot <= 0:
        errors.append(FieldError("issue_spot", "issue spot must be positive"))
    elif not _finite(state.high_water) or state.high_water < state.issue_spot:
        errors.append(FieldError("high_water", "high-water mark below issue spot"))
    if not _finite(state.accrual_time) or state.accrual_time < 0:
        errors.append(FieldError("accrual_time", "accrual time must be nonnegative"))
    return errors


def validate(
    market: MarketParams,
    terms: ContractTerms,
    state: Optional[ContractState] = None,
) -> Bundle:
    """Check every invariant of the inputs and return them as a bundle.

    Raises
    ------
    ValidationError
        Listing all violations, not only the first one.
    """
    if state is None:
        state = ContractState()
    errors = market_errors(market) + terms_errors(terms) + state_errors(state)
    if errors:
        raise ValidationError(errors)
    return Bundle(market, terms, state)
