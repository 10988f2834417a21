import math

import numpy as np
import pytest

from hwm.analytic import continuous_price
from hwm.maxdist import max_pdf
from hwm.quadrature import NonConvergence, QuadratureSpec, expected_excess, oracle_price, tail_cutoff
from hwm.types import ContractState, ContractTerms, MarketParams, MaxDistParams, Method

from oracles import half_normal_exp_moment

REF = MaxDistParams(mu=-0.035, v=0.1, horizon=10.0)


def test_half_normal_identity():
    # E[exp(|sigma Z|)] = 2 exp(sigma^2 / 2) Phi(sigma), checked by direct quadrature
    from scipy.special import ndtr

    for sigma in (0.1, 0.5, 1.3):
        assert half_normal_exp_moment(sigma) == pytest.approx(2 * math.exp(sigma**2 / 2) * ndtr(sigma) - 1, rel=1e-12)


def test_driftless_at_the_money():
    p = MaxDistParams(mu=0.0, v=0.1, horizon=1.0)
    expected = 0.0850674711437309044  # 2 e^0.005 Phi(0.1) - 1
    assert half_normal_exp_moment(0.1) == pytest.approx(expected, rel=1e-12)
    assert expected_excess(1.0, 1.0, p) == pytest.approx(expected, rel=1e-10)


def test_deep_out_of_the_money():
    assert expected_excess(1.0, math.exp(10.0), REF) < 1e-12


def test_lower_limit_clamped_at_zero():
    # strike below spot: the running max is never below the start
    below = expected_excess(1.0, 0.8, REF)
    mean_max = expected_excess(1.0, 1.0, REF) + 1.0
    assert below == pytest.approx(mean_max - 0.8, rel=1e-10)


def test_cutoff_bounds_tail_mass():
    from scipy.integrate import quad

    target = 1e-14
    upper = tail_cutoff(1.0, 0.0, REF, target)
    tail, _ = quad(lambda h: math.exp(h) * max_pdf(h, REF), upper, upper + 10, epsabs=1e-30)
    assert tail < target


def test_fixed_cutoff_is_honored():
    full = expected_excess(1.0, 1.0, REF)
    short = expected_excess(1.0, 1.0, REF, QuadratureSpec(upper_cutoff=0.2))
    assert short < full


def test_tolerance_honesty(ref_market, ref_terms, issue_state):
    prev = None
    for rel in (1e-6, 5e-7, 1e-8, 5e-9):
        value = oracle_price(issue_state, ref_market, ref_terms, QuadratureSpec(rel_tol=rel, abs_tol=1e-15)).value
        if prev is not None:
            assert abs(value - prev[1]) < prev[0] * abs(value)
        prev = (rel, value)


def test_subdivision_limit_raises():
    p = MaxDistParams(mu=0.0, v=0.01, horizon=1.0)
    with pytest.raises(NonConvergence):
        expected_excess(1.0, 1.0, p, QuadratureSpec(rel_tol=1e-12, abs_tol=1e-300, max_subdivisions=1, upper_cutoff=50.0))


def test_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(rel_tol=1e-14)


def test_matches_continuous_closed_form(ref_market, ref_terms, issue_state):
    o = oracle_price(issue_state, ref_market, ref_terms)
    assert o.method is Method.QUADRATURE
    assert o.epsilon_used == 0.0
    assert o.value == pytest.approx(continuous_price(issue_state, ref_market, ref_terms).value, rel=1e-6)


def test_regular_at_closed_form_singularity(issue_state):
    value = oracle_price(issue_state, MarketParams(r=0.05, v=0.1), ContractTerms(gamma=0.05, maturity=10.0)).value
    assert math.isfinite(value) and value > 1.0


def test_zero_rates_value_at_least_one(issue_state):
    res = oracle_price(issue_state, MarketParams(r=0.0, v=0.2), ContractTerms(gamma=0.0, maturity=5.0))
    assert res.value == pytest.approx(1.0 + expected_excess(1.0, 1.0, MaxDistParams(-0.02, 0.2, 5.0)), rel=1e-14)
    assert res.value >= 1.0


def test_continuous_across_singularity(issue_state):
    market = MarketParams(r=0.05, v=0.1)
    vals = [oracle_price(issue_state, market, ContractTerms(gamma=0.05 + d, maturity=10.0)).value for d in (-1e-3, 0.0, 1e-3)]
    midpoint = 0.5 * (vals[0] + vals[2])
    assert abs(vals[1] - midpoint) / vals[1] < 1e-4


def test_discrete_floor_unshifted(ref_market, issue_state):
    terms = ContractTerms(gamma=0.08, maturity=10.0, n_observations=4)
    d = oracle_price(issue_state, ref_market, terms, discrete=True)
    eps = d.epsilon_used
    excess = expected_excess(1.0, math.exp(eps), REF)
    assert d.value == pytest.approx(math.exp(0.3) * (1.0 + math.exp(-eps) * excess), rel=1e-14)
