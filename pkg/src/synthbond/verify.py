"""Verification suites: identity checks and Monte Carlo checks with explicit tolerances.

Every check yields one :class:`Check` row.  Monte Carlo checks report a
z-score ``|estimate - target| / standard_error`` against a tolerance of 3
(unless noted); identity checks report an absolute deviation.  Each check
draws from its own seed, derived from the suite seed and a fixed tag, so the
suites can be run separately or together with identical results.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np
from scipy import stats

from . import diffusion as dc
from . import extended as ex
from . import fractional as fr
from .fbm import FbmSpec, fbm_increment_autocov, sample_fbm, sample_rosenblatt, simulate_fractional_market
from .pathset import TimeGrid
from .pde import bond_path_check, pde_residual
from .pricing import KsrfParams, ksrf_hedge_weights, ksrf_price, ksrf_risk_neutral_prob, mc_price
from .simulate import simulate_diffusion_paths, simulate_jump_paths, simulate_stochvol_paths

SUITES = ("diffusion", "jump", "stochvol", "fractional", "rosenblatt", "pricing")
COLUMNS = ("check_name", "model", "n_paths", "steps", "statistic", "tolerance", "pass")
DEFAULT_PATHS = 100_000
PATHWISE_PATHS = 1_000
ROSENBLATT_PATHS = 10_000

REFERENCE_TWO_ASSET = dict(mu=0.10, sigma=0.30, mu_v=0.05, sigma_v=0.10)
REFERENCE_THREE_ASSET = dict(drifts=[0.08, 0.09, 0.07],
                             vols=[[0.20, 0.10], [0.10, 0.30], [0.15, 0.15]])
REFERENCE_JUMP = dict(drifts=(0.10, 0.08, 0.04), sigma1=0.3, sigma2=0.2, jump=0.1, intensity=1.0)
HURST = 0.7


@dataclass(frozen=True)
class Check:
    check_name: str
    model: str
    n_paths: int
    steps: int
    statistic: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.statistic) and self.statistic <= self.tolerance)

    def row(self) -> dict:
        d = asdict(self)
        d["statistic"] = float(d["statistic"])
        d["tolerance"] = float(d["tolerance"])
        d["pass"] = self.passed
        return d


def sub_seed(seed: int, tag: int) -> int:
    """64-bit seed for check ``tag`` of a run seeded with ``seed``."""
    ss = np.random.SeedSequence([int(seed) % 2**64, tag])
    return int(ss.generate_state(1, np.uint64)[0])


def z_score(estimate: float, target: float, se: float) -> float:
    if se == 0.0:
        return 0.0 if estimate == target else math.inf
    return abs(estimate - target) / se


def mean_and_se(values: np.ndarray) -> tuple[float, float]:
    v = np.asarray(values, dtype=float)
    return math.fsum(v) / v.size, float(np.std(v, ddof=1)) / math.sqrt(v.size)


def reference_two_asset(s0: float = 1.0, v0: float = 1.0) -> dc.DiffusionMarket:
    r = REFERENCE_TWO_ASSET
    return dc.DiffusionMarket.two_asset(r["mu"], r["sigma"], r["mu_v"], r["sigma_v"], s0, v0)


def reference_jump() -> ex.JumpMarketBasic:
    return ex.JumpMarketBasic(**REFERENCE_JUMP)


def reference_fractional() -> fr.FractionalMarket:
    r = REFERENCE_TWO_ASSET
    return fr.FractionalMarket.two_asset(HURST, r["mu"], r["sigma"], r["mu_v"], r["sigma_v"])


# ---------------------------------------------------------------- diffusion

def diffusion_suite(seed: int, n_paths: int) -> list[Check]:
    m = reference_two_asset()
    out = []
    rate = dc.riskless_rate(m)
    theta = dc.market_price_of_risk(m)[0]
    out.append(Check("two_asset_rate", "diffusion", 0, 0, abs(rate - 0.025), 1e-12))
    out.append(Check("two_asset_market_price_of_risk", "diffusion", 0, 0, abs(theta - 0.25), 1e-12))
    bond = dc.bond_exponents(m)
    out.append(Check("two_asset_bond_exponents", "diffusion", 0, 0,
                     float(np.max(np.abs(bond.exponents - [-0.3125, 0.9375]))), 1e-12))

    m3 = dc.DiffusionMarket(**REFERENCE_THREE_ASSET)
    out.append(Check("three_asset_rate", "diffusion", 0, 0, abs(dc.riskless_rate(m3) + 0.05), 1e-12))
    out.append(Check("three_asset_market_price_of_risk", "diffusion", 0, 0,
                     float(np.max(np.abs(dc.market_price_of_risk(m3) - [0.5, 0.3]))), 1e-12))
    b3 = dc.bond_exponents(m3)
    out.append(Check("three_asset_bond_annihilation", "diffusion", 0, 0,
                     float(np.max(np.abs(m3.vols.T @ b3.exponents))), 1e-12))

    roots = dc.solve_power_exponent(m, [None, 0.0])
    out.append(Check("power_claim_roots", "diffusion", 0, 0,
                     float(np.max(np.abs(np.array(roots) - [-5 / 9, 1.0]))), 1e-10))
    coef = dict(rate=rate, sigma=0.30, sigma_v=0.10)
    worst = max(abs(pde_residual("two_asset", lambda x, y, a=a: x**a, (100.0, 100.0), coef))
                for a in roots)
    out.append(Check("power_claim_root_residual", "diffusion", 0, 0, worst, 1e-6))

    claim = lambda x, y: x**1.7  # noqa: E731
    classical = pde_residual("classical", lambda t, x: x**1.7, (0.5, 100.0), dict(rate=0.03, sigma=0.3))
    limit = pde_residual("two_asset", claim, (100.0, 100.0), dict(rate=0.03, sigma=0.3, sigma_v=0.0))
    out.append(Check("classical_limit", "diffusion", 0, 0, abs(classical - limit), 1e-8))

    grid = TimeGrid(1.0, 256)
    paths = simulate_diffusion_paths(m, grid, sub_seed(seed, 1), PATHWISE_PATHS)
    out.append(Check("bond_path_deterministic", "diffusion", PATHWISE_PATHS, 256,
                     bond_path_check(paths, bond.exponents, rate), 1e-10))

    q_paths = simulate_diffusion_paths(reference_two_asset(100.0, 100.0), TimeGrid(1.0, 1),
                                       sub_seed(seed, 2), n_paths, measure="Q")
    est, se = mc_price(q_paths, lambda s, v: s, rate)
    out.append(Check("q_martingale_z", "diffusion", n_paths, 1, z_score(est, 100.0, se), 3.0))
    return out


# --------------------------------------------------------------------- jump

def jump_suite(seed: int, n_paths: int) -> list[Check]:
    m = reference_jump()
    out = []
    rate = ex.riskless_rate_jump(m)
    general = ex.riskless_rate_jump_general(*m.coefficient_pattern(), m.intensity)
    out.append(Check("jump_rate", "jump", 0, 0, abs(rate - 0.04), 1e-12))
    out.append(Check("jump_rate_general_form", "jump", 0, 0, abs(general - rate), 1e-12))
    bond = ex.bond_exponents_jump(m)
    grid = TimeGrid(1.0, 256)
    paths = simulate_jump_paths(m, grid, sub_seed(seed, 10), PATHWISE_PATHS)
    out.append(Check("jump_bond_path", "jump", PATHWISE_PATHS, 256,
                     bond_path_check(paths, bond.exponents, rate), 1e-10))
    n_jumps = paths.series("N")[:, -1]
    est, se = mean_and_se(n_jumps)
    out.append(Check("jump_count_z", "jump", PATHWISE_PATHS, 256,
                     z_score(est, m.intensity * grid.horizon, se), 3.0))
    coef = dict(rate=rate, sigma1=m.sigma1, sigma2=m.sigma2, mu3=m.drifts[2], jump=m.jump)
    worst = max(abs(pde_residual("jump", f, (1.0, 1.2, 0.9), coef))
                for f in (lambda a, b, c: a, lambda a, b, c: b, lambda a, b, c: c))
    out.append(Check("jump_linear_claim_residual", "jump", 0, 0, worst, 1e-8))
    return out


# ----------------------------------------------------------------- stochvol

def stochvol_suite(seed: int, n_paths: int) -> list[Check]:
    out = []
    r = ex.riskless_rate_stochvol(0.10, 0.06, 0.3, 0.2)
    out.append(Check("stochvol_rate", "stochvol", 0, 0, abs(r + 0.02), 1e-12))
    swapped = ex.riskless_rate_stochvol(0.06, 0.10, 0.2, 0.3)
    out.append(Check("stochvol_rate_swap_symmetry", "stochvol", 0, 0, abs(swapped - r), 1e-15))

    frozen = ex.StochVolMarket(0.10, 0.06, 0.0, 0.0, 0.0, 0.0, 0.3, -0.2, 0.1)
    grid = TimeGrid(1.0, 64)
    n = min(n_paths, 20_000)
    paths = simulate_stochvol_paths(frozen, grid, sub_seed(seed, 20), n)
    v0 = np.asarray(frozen.v0)
    drift = float(np.max(np.abs(paths.values[:, :, 2:4] / v0 - 1.0)))
    out.append(Check("stochvol_frozen_states_rel", "stochvol", n, 64, drift, 1e-14))
    g1 = float(frozen.link(frozen.v0[0]))
    est, se = mean_and_se(np.log(paths.series("S1")[:, -1]))
    out.append(Check("stochvol_frozen_log_mean_z", "stochvol", n, 64,
                     z_score(est, 0.10 - 0.5 * g1**2, se), 3.0))

    indep = ex.StochVolMarket(0.10, 0.06, 0.01, 0.02, 0.3, 0.4, 0.0, 0.0, 0.0)
    p2 = simulate_stochvol_paths(indep, grid, sub_seed(seed, 21), n)
    db = np.diff(p2.series("B"), axis=1).ravel()
    dv = np.diff(np.log(p2.series("v1")), axis=1).ravel()
    corr = float(np.corrcoef(db, dv)[0, 1])
    out.append(Check("stochvol_uncorrelated_drivers_z", "stochvol", n, 64,
                     abs(corr) * math.sqrt(db.size), 3.0))

    coef = dict(rate=r, beta1=0.3, beta2=0.4, rho1=0.2, rho2=-0.1, rho=0.3)
    worst = max(abs(pde_residual("stochvol", lambda a, b, c, d: a, (1.0, 1.1, 0.04, 0.09), coef, mode=md))
                for md in ("printed", "squared"))
    out.append(Check("stochvol_linear_claim_residual", "stochvol", 0, 0, worst, 1e-8))
    return out


# --------------------------------------------------------------- fractional

def fbm_law_checks(seed: int, n_paths: int, hurst: float = HURST) -> list[Check]:
    """Unit variance at ``t = 1``, lag-1 increment autocovariance and self-similarity."""
    grid = TimeGrid(16.0, 16)
    x = sample_fbm(FbmSpec(hurst), grid, seed, n_paths).series("X")
    out = []
    b1 = x[:, 1]
    var = math.fsum(b1 * b1) / n_paths
    _, se_var = mean_and_se(b1 * b1)
    out.append(Check("fbm_unit_variance_z", "fbm", n_paths, 16, z_score(var, 1.0, se_var), 3.0))

    inc = np.diff(x, axis=1)
    prod = np.mean(inc[:, :-1] * inc[:, 1:], axis=1)
    est, se = mean_and_se(prod)
    out.append(Check("fbm_lag1_autocov_z", "fbm", n_paths, 16,
                     z_score(est, fbm_increment_autocov(hurst, 1), se), 3.0))

    a, b = x[:, 8] ** 2, x[:, 4] ** 2
    ratio = math.fsum(a) / math.fsum(b)
    se_ratio = float(np.std(a - ratio * b, ddof=1)) / math.sqrt(n_paths) / float(np.mean(b))
    out.append(Check("fbm_self_similarity_z", "fbm", n_paths, 16,
                     z_score(ratio, 2.0 ** (2 * hurst), se_ratio), 3.0))
    return out


def drift_moment_checks(seed: int, n_paths: int, hurst: float = HURST) -> list[Check]:
    grid = TimeGrid(1.0, 4)
    x = sample_fbm(FbmSpec(hurst), grid, seed, n_paths).series("X")
    out = []
    for t in (0.25, 0.5, 1.0):
        v = x[:, grid.index_of(t)] ** 2
        est, se = mean_and_se(v)
        out.append(Check(f"fbm_squared_mean_t{t:g}_z", "fbm", n_paths, 4,
                         z_score(est, t ** (2 * hurst), se), 3.0))
    return out


def arbitrage_checks(seed: int, n_paths: int = PATHWISE_PATHS, rate: float = 0.025,
                     hurst: float = HURST, steps: int = 256) -> list[Check]:
    grid = TimeGrid(1.0, steps)
    x = sample_fbm(FbmSpec(hurst), grid, seed, n_paths).series("X")
    value = fr.arbitrage_portfolio_value(rate, x, grid.times[None, :])
    out = [
        Check("arbitrage_initial_value", "fbm", n_paths, steps, float(np.max(np.abs(value[:, 0]))), 0.0),
        Check("arbitrage_nonnegative", "fbm", n_paths, steps, float(max(0.0, -np.min(value))), 0.0),
        Check("arbitrage_positive_off_zero", "fbm", n_paths, steps,
              float(np.sum((value <= 0.0) & (x != 0.0))), 0.0),
    ]
    spot = float(fr.arbitrage_portfolio_value(rate, 1.0, 1.0))
    out.append(Check("arbitrage_spot_value", "fbm", 0, 0,
                     abs(spot - math.exp(rate) * (math.e - 1.0) ** 2), 1e-10))
    return out


def fractional_suite(seed: int, n_paths: int) -> list[Check]:
    out = []
    r = REFERENCE_TWO_ASSET
    e_s, e_v, rate = fr.fractional_bond_exponents_two_asset(r["mu"], r["sigma"], r["mu_v"], r["sigma_v"])
    out.append(Check("fractional_two_asset_exponents", "fractional", 0, 0,
                     max(abs(e_s + 0.5), abs(e_v - 1.5), abs(rate - 0.025)), 1e-12))
    market = reference_fractional()
    bond = fr.fractional_bond_exponents_multi(market)
    out.append(Check("fractional_multi_matches_two_asset", "fractional", 0, 0,
                     max(abs(bond.exponents[0] - e_s), abs(bond.exponents[1] - e_v),
                         abs(bond.rate - rate)), 1e-12))
    grid = TimeGrid(1.0, 256)
    drivers = sample_fbm(FbmSpec(HURST), grid, sub_seed(seed, 30), PATHWISE_PATHS)
    paths = simulate_fractional_market(market, drivers)
    out.append(Check("fractional_bond_path", "fractional", PATHWISE_PATHS, 256,
                     bond_path_check(paths, bond.exponents, bond.rate, "quadratic"), 1e-10))

    out += arbitrage_checks(sub_seed(seed, 31))
    out += drift_moment_checks(sub_seed(seed, 32), n_paths)
    out += fbm_law_checks(sub_seed(seed, 33), 2 * n_paths)

    beta, lhs, rhs = fr.fractional_beta([0.3, 0.7], [0.3, 0.7], market.drifts, market.vols, bond.rate)
    out.append(Check("beta_same_portfolio", "fractional", 0, 0, max(abs(beta - 1.0), abs(lhs - rhs)), 0.0))
    beta, lhs, _ = fr.fractional_beta(bond.exponents, [0.3, 0.7], market.drifts, market.vols, bond.rate)
    out.append(Check("beta_bond_portfolio", "fractional", 0, 0, max(abs(beta), abs(lhs)), 1e-15))

    rep = fr.dividend_replication_exponents(0.025, 0.10, 0.30, 0.005, 0.5)
    out.append(Check("dividend_replication", "fractional", 0, 0,
                     max(abs(rep.alpha - 0.357142857142857), abs(rep.beta - 0.714285714285714)), 1e-9))
    out.append(Check("dividend_replication_identity", "fractional", 0, 0,
                     abs((1 - rep.relative_yield) * rep.alpha + rep.beta - 1.0), 1e-12))

    good = abs(pde_residual("fractional", lambda x, y: x**0.3 * y**0.7, (2.0, 3.0)))
    out.append(Check("fractional_admissible_residual", "fractional", 0, 0, good, 1e-10))
    bad_claim = lambda x, y: x**0.3 * y**0.6  # noqa: E731
    bad = pde_residual("fractional", bad_claim, (2.0, 3.0))
    out.append(Check("fractional_inadmissible_residual", "fractional", 0, 0,
                     abs(bad + 0.1 * bad_claim(2.0, 3.0)), 1e-10))
    return out


# --------------------------------------------------------------- rosenblatt

def rosenblatt_checks(seed: int, n_paths: int = ROSENBLATT_PATHS, hurst: float = HURST,
                      m: int = 4096) -> list[Check]:
    grid = TimeGrid(1.0, 4)
    z1 = sample_rosenblatt(hurst, grid, seed, n_paths, m=m).series("X")[:, -1]
    est, se = mean_and_se(z1)
    var = float(np.var(z1, ddof=1))
    boot = stats.bootstrap((z1,), stats.skew, n_resamples=1000, method="percentile",
                           random_state=np.random.default_rng(sub_seed(seed, 1)))
    lo, hi = boot.confidence_interval
    excl = 0.0 if (lo > 0.0 or hi < 0.0) else 1.0
    return [
        Check("rosenblatt_variance_rel_err", "rosenblatt", n_paths, m, abs(var - 1.0), 0.05),
        Check("rosenblatt_mean_z", "rosenblatt", n_paths, m, z_score(est, 0.0, se), 3.0),
        Check("rosenblatt_skew_ci_covers_zero", "rosenblatt", n_paths, m, excl, 0.0),
    ]


def rosenblatt_suite(seed: int, n_paths: int) -> list[Check]:
    return rosenblatt_checks(sub_seed(seed, 40), min(n_paths, ROSENBLATT_PATHS))


# ------------------------------------------------------------------ pricing

def pricing_suite(seed: int, n_paths: int) -> list[Check]:
    out = []
    r = REFERENCE_TWO_ASSET
    out.append(Check("risk_neutral_probability", "pricing", 0, 0,
                     abs(ksrf_risk_neutral_prob(0.5, 0.25, 0.01) - 0.4875), 1e-15))
    ds, dv = ksrf_hedge_weights(2.0, 1.0, 110.0, 90.0, 104.0, 96.0)
    out.append(Check("hedge_weights_example", "pricing", 0, 0,
                     max(abs(ds - 88 / 1200), abs(dv + 70 / 1200)), 1e-15))

    market = reference_two_asset(100.0, 100.0)
    rate = dc.riskless_rate(market)
    params = KsrfParams.for_horizon(1.0, 512, r["mu"], r["sigma"], r["mu_v"], r["sigma_v"],
                                    s0=100.0, v0=100.0)
    call = lambda s, v: np.maximum(s - 100.0, 0.0)  # noqa: E731
    tree = ksrf_price(params, call, rate)
    out.append(Check("tree_hedge_completeness", "pricing", 0, 512, tree.max_hedge_residual, 1e-12))
    unit = ksrf_price(params, lambda s, v: 1.0, rate)
    out.append(Check("tree_unit_payoff", "pricing", 0, 512, abs(unit.price - math.exp(-rate)), 1e-12))

    paths = simulate_diffusion_paths(market, TimeGrid(1.0, 1), sub_seed(seed, 50), n_paths, measure="Q")
    mc, se = mc_price(paths, call, rate)
    out.append(Check("tree_vs_monte_carlo_call_z", "pricing", n_paths, 512, z_score(tree.price, mc, se), 3.0))
    disc, se1 = mc_price(paths, lambda s, v: 1.0, rate)
    out.append(Check("monte_carlo_unit_payoff", "pricing", n_paths, 1,
                     abs(disc - math.exp(-rate)) + se1, 0.0))
    _, se_f = mc_price(paths, lambda s, v: s - 100.0, rate)
    put, _ = mc_price(paths, lambda s, v: np.maximum(100.0 - s, 0.0), rate)
    out.append(Check("put_call_parity_z", "pricing", n_paths, 1,
                     z_score(mc - put, 100.0 - 100.0 * math.exp(-rate), se_f), 3.0))
    return out


_SUITES: dict[str, Callable[[int, int], list[Check]]] = {
    "diffusion": diffusion_suite,
    "jump": jump_suite,
    "stochvol": stochvol_suite,
    "fractional": fractional_suite,
    "rosenblatt": rosenblatt_suite,
    "pricing": pricing_suite,
}


def run_suite(name: str, seed: int, n_paths: int = DEFAULT_PATHS) -> list[Check]:
    """Run one suite, or every suite in a fixed order for ``name="all"``."""
    if n_paths < 2:
        raise ValueError("verification needs at least 2 paths")
    names = SUITES if name == "all" else (name,)
    out: list[Check] = []
    for n in names:
        if n not in _SUITES:
            raise ValueError(f"unknown suite {n!r}; choose from {SUITES + ('all',)}")
        out += _SUITES[n](seed, n_paths)
    return out
