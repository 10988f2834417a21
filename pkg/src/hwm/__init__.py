"""Pricing of variable annuities with a high-water-mark guarantee."""

from .analytic import (
    BGK_BETA,
    SQRT_2_OVER_PI,
    CorrectionParams,
    SingularParameterization,
    bs_call,
    continuous_price,
    correction_epsilon,
    discrete_price,
    initial_price,
)
from .maxdist import BarrierSolution, barrier_density, free_density, max_cdf, max_pdf
from .montecarlo import (
    BudgetExceeded,
    McEstimate,
    SimulationSpec,
    mc_price,
    mc_running_max_sample,
    payoff_recursion,
    simulate_log_returns,
)
from .quadrature import NonConvergence, QuadratureSpec, expected_excess, oracle_price
from .types import (
    Compounding,
    ContractState,
    ContractTerms,
    MarketParams,
    MaxDistParams,
    Method,
    PriceResult,
    ValidationError,
    validate,
)

__version__ = "0.1.0"
