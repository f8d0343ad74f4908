import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from synthbond import (DegeneracyError, FbmSpec, FractionalMarket, TimeGrid, WellPosednessError,
                       arbitrage_portfolio_value, bond_path_check, dividend_replication_exponents,
                       fractional_beta, fractional_bond_exponents_multi,
                       fractional_bond_exponents_two_asset, fractional_rate,
                       perpetual_admissibility, pde_residual, sample_fbm, sample_rosenblatt,
                       simulate_fractional_market)


def test_two_asset_oracle():
    e_s, e_v, rate = fractional_bond_exponents_two_asset(0.10, 0.30, 0.05, 0.10)
    assert rate == pytest.approx(0.025, abs=1e-15)
    assert e_s == pytest.approx(-0.5, abs=1e-14) and e_v == pytest.approx(1.5, abs=1e-14)
    ok, defect = perpetual_admissibility([e_s, e_v])
    assert ok and abs(defect) < 1e-14


def test_two_asset_degeneracies():
    with pytest.raises(DegeneracyError):
        fractional_rate(0.1, 0.2, 0.05, 0.2)
    with pytest.raises(DegeneracyError):
        fractional_bond_exponents_two_asset(0.10, 0.30, 0.05, 0.15)


def test_market_validation():
    with pytest.raises(ValueError):
        FractionalMarket(0.5, [0.1, 0.05], [0.3, 0.1])
    with pytest.raises(ValueError):
        FractionalMarket(0.7, [0.1], [[]])
    with pytest.raises(ValueError):
        FractionalMarket(0.7, [0.1, 0.05, 0.02], [0.3, 0.1])
    with pytest.raises(WellPosednessError) as info:
        FractionalMarket(0.7, [0.1, 0.05], [0.2, 0.2])
    assert info.value.matrix_name == "Psi"
    with pytest.raises(WellPosednessError) as info:
        FractionalMarket(0.7, [0.1, 0.05], [0.2, 0.1])
    assert info.value.matrix_name == "Xi"


def test_multi_asset_bond_equations():
    market = FractionalMarket(0.7, [0.10, 0.05, 0.08], [[0.30, 0.05], [0.10, 0.20], [0.15, 0.12]])
    bond = fractional_bond_exponents_multi(market)
    assert bond.exponents.sum() == pytest.approx(1.0, abs=1e-14)
    np.testing.assert_allclose(market.vols.T @ bond.exponents, 0.0, atol=1e-15)
    assert bond.rate == pytest.approx(float(market.drifts @ bond.exponents))
    assert bond.log_value(2.0) == pytest.approx(4.0 * bond.rate)


@pytest.mark.parametrize("driver", ["fbm", "rosenblatt"])
def test_bond_is_deterministic_in_driver_sum(driver):
    market = FractionalMarket(0.7, [0.10, 0.05, 0.08], [[0.30, 0.05], [0.10, 0.20], [0.15, 0.12]],
                              [2.0, 3.0, 0.5])
    grid = TimeGrid(1.0, 16)
    if driver == "fbm":
        drivers = sample_fbm(FbmSpec(0.7), grid, 1, 200, n_drivers=2)
        paths = simulate_fractional_market(market, drivers)
    else:
        a = sample_rosenblatt(0.7, grid, 1, 50, m=1024)
        b = sample_rosenblatt(0.7, grid, 2, 50, m=1024)
        stacked = np.concatenate([a.values, b.values], axis=2)
        from synthbond import PathSet
        drivers = PathSet(stacked, grid, 1, "rosenblatt", ("X1", "X2"), ("driver", "driver"))
        paths = simulate_fractional_market(market, drivers)
    bond = fractional_bond_exponents_multi(market)
    assert bond_path_check(paths, bond.exponents, bond.rate, "quadratic") < 1e-10


def test_market_driver_count_mismatch():
    market = FractionalMarket.two_asset(0.7, 0.10, 0.30, 0.05, 0.10)
    drivers = sample_fbm(FbmSpec(0.7), TimeGrid(1.0, 4), 1, 3, n_drivers=2)
    with pytest.raises(ValueError):
        simulate_fractional_market(market, drivers)


def test_arbitrage_value():
    assert float(arbitrage_portfolio_value(0.025, 1.0, 1.0)) == pytest.approx(
        math.exp(0.025) * (math.e - 1) ** 2, abs=1e-12)
    assert float(arbitrage_portfolio_value(0.025, 0.0, 3.0)) == 0.0
    assert float(arbitrage_portfolio_value(0.025, 1e-10, 1.0)) > 0.0


@settings(max_examples=100, deadline=None)
@given(st.just(0.0) | st.floats(1e-100, 5) | st.floats(-5, -1e-100), st.floats(0, 10),
       st.floats(0, 0.2))
def test_arbitrage_value_non_negative(x, t, rate):
    v = float(arbitrage_portfolio_value(rate, x, t))
    assert v >= 0.0
    assert (v > 0.0) == (x != 0.0)


def test_perpetual_claims_satisfy_pricing_equation_iff_admissible():
    point = (1.3, 0.8)
    for a, b in [(0.3, 0.7), (0.3, 0.6), (-0.5, 1.5), (1.0, 1.0)]:
        res = pde_residual("fractional", lambda x, y: x**a * y**b, point)
        ok, defect = perpetual_admissibility([a, b])
        g = point[0] ** a * point[1] ** b
        assert res == pytest.approx(defect * g, abs=1e-9)
        assert ok == (abs(res) < 1e-9)


def test_dividend_oracle():
    rep = dividend_replication_exponents(0.025, 0.10, 0.30, 0.005, 0.5)
    assert rep.alpha == pytest.approx(0.025 / 0.07, abs=1e-12)
    assert rep.beta == pytest.approx(0.05 / 0.07, abs=1e-12)
    assert rep.relative_yield == pytest.approx(0.2)
    assert rep.initial_value(4.0) == pytest.approx(4.0**rep.alpha)


def test_dividend_degeneracies():
    with pytest.raises(DegeneracyError):
        dividend_replication_exponents(0.0, 0.1, 0.3, 0.0, 0.5)
    with pytest.raises(DegeneracyError):
        # 0.5 * 0.5 + 0.5 - 0.75 = 0, exact in binary
        dividend_replication_exponents(0.5, 0.75, 0.5, 0.0, 0.5)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.005, 0.1), st.floats(0.01, 0.3), st.floats(0.05, 0.6), st.floats(0, 0.05),
       st.floats(-2, 2))
def test_dividend_identity(rate, mu, sigma, dy, info):
    assume(abs(info * sigma + (1 - dy / rate) * rate - mu) > 1e-3)
    r = dividend_replication_exponents(rate, mu, sigma, dy, info)
    assert abs((1 - r.relative_yield) * r.alpha + r.beta - 1.0) < 1e-12


def test_beta_corners():
    market = FractionalMarket(0.7, [0.10, 0.05, 0.08], [[0.30, 0.05], [0.10, 0.20], [0.15, 0.12]])
    bond = fractional_bond_exponents_multi(market)
    w = np.array([0.2, 0.5, 0.3])
    beta, lhs, rhs = fractional_beta(w, w, market.drifts, market.vols, bond.rate)
    assert beta == 1.0 and lhs == rhs
    beta, lhs, rhs = fractional_beta(bond.exponents, w, market.drifts, market.vols, bond.rate)
    assert abs(beta) < 1e-14 and abs(lhs) < 1e-15


def test_beta_validation():
    with pytest.raises(ValueError):
        fractional_beta([1.0], [0.5, 0.5], [0.1, 0.2], [0.3, 0.1], 0.0)
    with pytest.raises(DegeneracyError):
        # equal weights have zero exposure to sigma (0.5, -0.5)
        fractional_beta([1.0, 0.0], [0.5, 0.5], [0.1, 0.2], [0.5, -0.5], 0.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(-0.1, 0.3), st.floats(0.05, 0.6), st.floats(-0.1, 0.3), st.floats(0.05, 0.6),
       st.floats(-2, 2), st.floats(-2, 2))
def test_beta_relation_holds_with_one_driver(mu, s, mu_v, s_v, wp, wm):
    assume(abs(s - s_v) > 0.05 and abs(mu * s_v - mu_v * s) > 1e-3)
    load_m = wm * s + (1 - wm) * s_v
    assume(abs(load_m) > 1e-2)
    rate = fractional_rate(mu, s, mu_v, s_v)
    beta, lhs, rhs = fractional_beta([wp, 1 - wp], [wm, 1 - wm], [mu, mu_v], [s, s_v], rate)
    assert lhs == pytest.approx(rhs, abs=1e-10)
