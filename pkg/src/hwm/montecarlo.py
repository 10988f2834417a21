"""Monte-Carlo valuation of the discretely observed payoff.

Paths are generated in fixed-size blocks. Block ``b`` draws its normals from
a Philox generator seeded by ``SeedSequence(seed, spawn_key=(b,))``, so every
path is a pure function of ``(seed, path index)`` and results do not depend
on how blocks are scheduled across threads. Payoffs are written into one
array and reduced in path order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .types import (
    Compounding,
    ContractState,
    ContractTerms,
    MarketParams,
    MaxDistParams,
    Method,
    PriceResult,
    validate,
)

BLOCK_PATHS = 256
DEFAULT_BUDGET = 2**33


class BudgetExceeded(ValueError):
    pass


def draw_budget() -> int:
    """Maximum number of normal draws per run; ``HWM_BUDGET`` overrides the default."""
    raw = os.environ.get("HWM_BUDGET")
    return int(float(raw)) if raw else DEFAULT_BUDGET


@dataclass(frozen=True)
class SimulationSpec:
    n_paths: int = 100_000
    seed: int = 0
    substeps: int = 1
    antithetic: bool = False
    n_threads: Optional[int] = None

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if self.substeps < 1:
            raise ValueError("substeps must be >= 1")
        if self.antithetic and self.n_paths % 2:
            raise ValueError("antithetic sampling needs an even number of paths")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_error: float
    n_paths: int

    def to_result(self) -> PriceResult:
        return PriceResult(value=self.value, method=Method.MONTE_CARLO, std_error=self.std_error)


def block_generator(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def _blocks(n: int):
    for b, start in enumerate(range(0, n, BLOCK_PATHS)):
        yield b, start, min(start + BLOCK_PATHS, n)


def _run_blocks(n: int, work: Callable[[int, int, int], None], n_threads: Optional[int]):
    threads = n_threads or os.cpu_count() or 1
    blocks = list(_blocks(n))
    if threads == 1 or len(blocks) == 1:
        for b in blocks:
            work(*b)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for _ in pool.map(lambda b: work(*b), blocks):
            pass


def simulate_log_returns(
    n_steps: int,
    dt: float,
    market: MarketParams,
    normals: np.ndarray,
    gamma: float = 0.0,
    gamma_shift: bool = False,
) -> np.ndarray:
    """Exact log-price increments accumulated along each row of ``normals``.

    ``x_{n+1} = x_n + mu dt + v sqrt(dt) Z_n`` with ``mu = r - y - v^2/2``, or
    ``r - y - gamma - v^2/2`` for the tilted process when ``gamma_shift``.
    Returns ``x(t_1), ..., x(t_n)``; ``x(t_0) = 0`` is implicit.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    normals = np.asarray(normals, dtype=float)
    if normals.shape[-1] != n_steps:
        raise ValueError(f"expected {n_steps} normals per path, got {normals.shape[-1]}")
    mu = market.r - market.y - 0.5 * market.v**2 - (gamma if gamma_shift else 0.0)
    steps = mu * dt + market.v * math.sqrt(dt) * normals
    return np.cumsum(steps, axis=-1)


def payoff_recursion(
    observed: Sequence[float],
    gamma: float,
    dt: float,
    compounding: Compounding = Compounding.CONTINUOUS,
    initial_hw: float = 1.0,
    initial_v: float = 1.0,
    check: bool = False,
) -> float:
    """Terminal value of the contract along one observed path.

    ``Hw_n = max(S_n / S_0, Hw_{n-1})`` and ``V_n = max(Hw_n, g V_{n-1})`` with
    ``g`` the one-period guarantee growth. With ``check=True`` the result is
    asserted equal to ``max(g^N V_0, max_n Hw_n g^(N-n))``.
    """
    observed = list(observed)
    if not observed:
        raise ValueError("need at least one observation")
    g = Compounding(compounding).growth(gamma, dt)
    hw, value = initial_hw, initial_v
    marks = []
    for ratio in observed:
        hw = max(ratio, hw)
        value = max(hw, g * value)
        marks.append(hw)
    if check:
        N = len(observed)
        closed = max([initial_v * g**N] + [m * g ** (N - n) for n, m in enumerate(marks, 1)])
        assert math.isclose(value, closed, rel_tol=1e-12), (value, closed)
    return value


def path_payoffs(
    log_paths: np.ndarray,
    log_growth: float,
    stride: int = 1,
    log_spot: float = 0.0,
    initial_hw: float = 1.0,
    initial_v: float = 1.0,
) -> np.ndarray:
    """Vectorized payoff over rows of a fine-grid log path.

    Observations are every ``stride``-th column; the coarse grid is a subset of
    the fine one, so refining it can only raise the payoff.
    """
    obs = log_paths[:, stride - 1 :: stride] + log_spot
    N = obs.shape[1]
    weights = log_growth * np.arange(N - 1, -1, -1, dtype=float)
    best = np.max(obs + weights, axis=1)
    floor = max(math.log(initial_v) + N * log_growth, math.log(initial_hw) + (N - 1) * log_growth)
    return np.exp(np.maximum(best, floor))


def _check_budget(n_paths: int, n_steps: int):
    budget = draw_budget()
    if n_paths * n_steps > budget:
        raise BudgetExceeded(
            f"{n_paths} paths x {n_steps} steps = {n_paths * n_steps} draws exceeds the budget of {budget}"
        )


def _normals(seed: int, block: int, rows: int, n_steps: int, antithetic: bool) -> np.ndarray:
    rng = block_generator(seed, block)
    if not antithetic:
        return rng.standard_normal((rows, n_steps))
    half = rng.standard_normal((rows // 2, n_steps))
    return np.concatenate([half, -half])


def mc_price(
    state: ContractState,
    market: MarketParams,
    terms: ContractTerms,
    spec: SimulationSpec,
) -> McEstimate:
    """Discounted mean payoff ``notional * exp(-rT) * E[V(T)]`` with its standard error.

    Simulates the untilted fund on ``N * substeps`` steps and applies the
    payoff recursion on every ``substeps``-th point.
    """
    validate(market, terms, state)
    N, sub = terms.n_observations, spec.substeps
    n_steps = N * sub
    _check_budget(spec.n_paths, n_steps)
    dt = terms.maturity / n_steps
    log_growth = terms.compounding.log_growth(terms.gamma, terms.delta_t)
    s0 = state.issue_spot
    log_spot = math.log(state.spot / s0)
    initial_v = state.effective_strike(terms.gamma) / s0
    initial_hw = max(state.high_water, state.spot) / s0
    anti = spec.antithetic
    # antithetic runs keep one pair average per mirrored pair
    samples = np.empty(spec.n_paths // 2 if anti else spec.n_paths)

    def work(block, lo, hi):
        rows = hi - lo
        z = _normals(spec.seed, block, rows, n_steps, anti)
        x = simulate_log_returns(n_steps, dt, market, z)
        pay = path_payoffs(x, log_growth, sub, log_spot, initial_hw, initial_v)
        if anti:
            half = rows // 2
            samples[lo // 2 : hi // 2] = 0.5 * (pay[:half] + pay[half:])
        else:
            samples[lo:hi] = pay

    _run_blocks(spec.n_paths, work, spec.n_threads)
    disc = terms.notional * math.exp(-market.r * terms.maturity)
    mean = float(np.mean(samples))
    std_error = float(np.std(samples, ddof=1) / math.sqrt(samples.size)) if samples.size > 1 else 0.0
    return McEstimate(value=disc * mean, std_error=disc * std_error, n_paths=spec.n_paths)


def simulate_fine_paths(
    market: MarketParams,
    maturity: float,
    n_steps: int,
    n_paths: int,
    seed: int,
    n_threads: Optional[int] = None,
) -> np.ndarray:
    """Log-price paths of shape ``(n_paths, n_steps)`` for common-random-number studies."""
    _check_budget(n_paths, n_steps)
    out = np.empty((n_paths, n_steps))
    dt = maturity / n_steps

    def work(block, lo, hi):
        z = _normals(seed, block, hi - lo, n_steps, False)
        out[lo:hi] = simulate_log_returns(n_steps, dt, market, z)

    _run_blocks(n_paths, work, n_threads)
    return out


def mc_running_max_sample(spec: SimulationSpec, p: MaxDistParams, n_steps: int) -> np.ndarray:
    """Per-path maximum of the discretized log-path, including the start at zero."""
    _check_budget(spec.n_paths, n_steps)
    dt = p.horizon / n_steps
    out = np.empty(spec.n_paths)
    # a market whose risk-neutral log drift is exactly p.mu
    market = MarketParams(r=p.mu + 0.5 * p.v**2, v=p.v, y=0.0)

    def work(block, lo, hi):
        z = _normals(spec.seed, block, hi - lo, n_steps, False)
        x = simulate_log_returns(n_steps, dt, market, z)
        out[lo:hi] = np.maximum(x.max(axis=1), 0.0)

    _run_blocks(spec.n_paths, work, spec.n_threads)
    return out
