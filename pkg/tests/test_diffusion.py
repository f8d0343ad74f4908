import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from synthbond import (ConsistencyError, DegeneracyError, DiffusionMarket, PowerClaim,
                       WellPosednessError, bond_exponents, market_price_of_risk,
                       power_claim_residual, riskless_rate, solve_power_exponent,
                       two_asset_bond_closed_form)

REF = dict(mu=0.10, sigma=0.30, mu_v=0.05, sigma_v=0.10)


def reference():
    return DiffusionMarket.two_asset(**REF)


def three_asset():
    return DiffusionMarket([0.08, 0.09, 0.07], [[0.20, 0.10], [0.10, 0.30], [0.15, 0.15]])


# oracle values worked out by hand

def test_two_asset_rate_oracle():
    # (0.05 * 0.30 - 0.10 * 0.10) / (0.30 - 0.10)
    assert riskless_rate(reference()) == pytest.approx(0.025, abs=1e-15)


def test_two_asset_market_price_of_risk_is_quarter():
    assert market_price_of_risk(reference())[0] == pytest.approx(0.25, abs=1e-14)
    assert market_price_of_risk(reference(), 0.025)[0] == pytest.approx(0.25, abs=1e-14)


def test_equal_drifts_give_that_drift():
    m = DiffusionMarket.two_asset(0.07, 0.3, 0.07, 0.1)
    assert riskless_rate(m) == pytest.approx(0.07, abs=1e-15)


def test_three_asset_oracle():
    m = three_asset()
    assert riskless_rate(m) == pytest.approx(-0.05, abs=1e-12)
    np.testing.assert_allclose(market_price_of_risk(m), [0.5, 0.3], atol=1e-12)
    np.testing.assert_allclose(market_price_of_risk(m, -0.05), [0.5, 0.3], atol=1e-12)


def test_inconsistent_rate_rejected():
    with pytest.raises(ConsistencyError):
        market_price_of_risk(three_asset(), 0.01)


def test_singular_market_names_matrix():
    with pytest.raises(WellPosednessError) as info:
        DiffusionMarket.two_asset(0.1, 0.2, 0.05, 0.2)
    assert info.value.matrix_name == "Phi"


def test_validation():
    with pytest.raises(ValueError):
        DiffusionMarket([0.1], [[]])
    with pytest.raises(ValueError):
        DiffusionMarket([0.1, 0.2], [[0.1, 0.2], [0.3, 0.4]])
    with pytest.raises(ValueError):
        DiffusionMarket([0.1, 0.2], [0.3, 0.1], [1.0, 0.0])


def test_market_arrays_are_read_only():
    m = reference()
    with pytest.raises(ValueError):
        m.drifts[0] = 1.0


def test_bond_exponents_oracle():
    b = bond_exponents(reference())
    np.testing.assert_allclose(b.exponents, [-0.3125, 0.9375], atol=1e-14)
    assert b.rate == pytest.approx(0.025)
    assert b.base_value == pytest.approx(1.0)


def test_closed_form_matches_linear_solve():
    nu, nu_v = two_asset_bond_closed_form(reference())
    assert nu == pytest.approx(0.9375, abs=1e-14)
    assert nu_v == pytest.approx(0.3125, abs=1e-14)


def test_closed_form_zero_rate_falls_back():
    # mu_V sigma = mu sigma_V makes the rate vanish
    m = DiffusionMarket.two_asset(0.06, 0.3, 0.02, 0.1)
    assert abs(riskless_rate(m)) < 1e-15
    nu, nu_v = two_asset_bond_closed_form(m)
    chi = bond_exponents(m).exponents
    assert nu == pytest.approx(chi[1]) and nu_v == pytest.approx(-chi[0])


def test_near_riskless_second_asset_is_the_bond():
    m = DiffusionMarket.two_asset(0.10, 0.30, 0.03, 1e-9)
    chi = bond_exponents(m).exponents
    np.testing.assert_allclose(chi, [0.0, 1.0], atol=1e-7)


def test_power_claim_residual_oracles():
    m = reference()
    assert power_claim_residual(m, PowerClaim([1.0, 0.0])) == pytest.approx(0.0, abs=1e-16)
    assert power_claim_residual(m, PowerClaim([0.0, 1.0])) == pytest.approx(0.0, abs=1e-16)
    assert power_claim_residual(m, [-5 / 9, 0.0]) == pytest.approx(0.0, abs=1e-15)


def test_power_claim_is_callable():
    assert PowerClaim([2.0, -1.0])(3.0, 4.0) == pytest.approx(9.0 / 4.0)


def test_solve_power_exponent_oracles():
    m = reference()
    np.testing.assert_allclose(solve_power_exponent(m, [None, 0.0]), [-5 / 9, 1.0], atol=1e-12)
    np.testing.assert_allclose(solve_power_exponent(m, [1.0, None]), [-10.0, 0.0], atol=1e-12)


def test_solve_power_exponent_trivial_market():
    m = DiffusionMarket([0.0, 0.0], [[1.0], [0.0]])
    np.testing.assert_allclose(solve_power_exponent(m, [None, 0.0]), [0.0, 1.0], atol=1e-15)


def test_solve_power_exponent_no_real_root():
    # with b = 20 the quadratic in a has discriminant 0.62^2 - 4 * 0.045 * 3.5 < 0
    assert solve_power_exponent(reference(), [None, 20.0]) == ()


def test_solve_power_exponent_degenerate():
    m = DiffusionMarket([0.1, 0.05], [[0.0], [0.2]])
    with pytest.raises(DegeneracyError):
        solve_power_exponent(m, [None, 0.0])
    with pytest.raises(ValueError):
        solve_power_exponent(m, [None, None])


# properties

vol = st.floats(0.05, 0.6)
drift = st.floats(-0.1, 0.3)


@st.composite
def markets(draw, n=None):
    n = n or draw(st.integers(2, 5))
    mu = [draw(drift) for _ in range(n)]
    sig = [[draw(st.floats(-0.6, 0.6)) for _ in range(n - 1)] for _ in range(n)]
    phi = np.column_stack([np.ones(n), -np.array(sig).reshape(n, n - 1)])
    assume(np.linalg.cond(phi) < 1e6)
    a = np.vstack([np.array(mu) - 0.5 * np.sum(np.array(sig).reshape(n, n - 1) ** 2, axis=1),
                   np.array(sig).reshape(n, n - 1).T])
    assume(np.linalg.cond(a) < 1e6)
    return DiffusionMarket(mu, sig)


@settings(max_examples=60, deadline=None)
@given(markets(), st.randoms(use_true_random=False))
def test_rate_is_permutation_invariant(m, rnd):
    order = list(range(m.n_assets))
    rnd.shuffle(order)
    assert riskless_rate(m.permuted(order)) == pytest.approx(riskless_rate(m), abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(markets())
def test_bond_invariants(m):
    b = bond_exponents(m)
    scale = max(1.0, float(np.max(np.abs(b.exponents))))
    assert np.max(np.abs(m.vols.T @ b.exponents)) < 1e-12 * scale
    assert abs(m.log_drifts() @ b.exponents - b.rate) < 1e-12 * scale


@settings(max_examples=60, deadline=None)
@given(markets(), st.integers(0, 4))
def test_market_price_of_risk_solves_system(m, _):
    rate = riskless_rate(m)
    theta = market_price_of_risk(m, rate)
    np.testing.assert_allclose(m.vols @ theta, m.drifts - rate, atol=1e-9)


@settings(max_examples=80, deadline=None)
@given(drift, vol, drift, vol)
def test_two_asset_closed_form_agrees(mu, s, mu_v, s_v):
    assume(abs(s - s_v) > 0.05)
    m = DiffusionMarket.two_asset(mu, s, mu_v, s_v)
    assert riskless_rate(m) == pytest.approx((mu_v * s - mu * s_v) / (s - s_v), abs=1e-12)
    rate = riskless_rate(m)
    assume(abs(rate) > 1e-3 and abs(1 + 0.5 * s * s_v / rate) > 1e-3)
    nu, nu_v = two_asset_bond_closed_form(m)
    chi = bond_exponents(m).exponents
    scale = max(1.0, abs(nu), abs(nu_v))
    assert abs(chi[1] - nu) < 1e-9 * scale and abs(chi[0] + nu_v) < 1e-9 * scale


@settings(max_examples=80, deadline=None)
@given(markets(), st.data())
def test_roots_make_residual_vanish(m, data):
    n = m.n_assets
    u = data.draw(st.integers(0, n - 1))
    fixed = [data.draw(st.floats(-2, 2)) for _ in range(n)]
    fixed[u] = None
    assume(np.sum(m.vols[u] ** 2) > 1e-3)
    for r in solve_power_exponent(m, fixed):
        a = [r if v is None else v for v in fixed]
        assert abs(power_claim_residual(m, a)) < 1e-10 * max(1.0, abs(r)) ** 2
