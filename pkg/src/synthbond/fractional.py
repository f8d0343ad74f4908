"""Fractional markets: stochastic-drift bonds, perpetual claims and the beta relation.

Assets are deterministic functions of the driver levels::

    S_j(t) = S_j(0) * exp(mu_j * (sum_m X_m(t))**2 + sum_k sigma_jk * X_k(t))

with ``X_k`` independent fractional (or Rosenblatt) drivers.  Every routine
here is pure algebra on the coefficients, so driver paths of either kind are
accepted interchangeably.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .diffusion import COND_LIMIT, solve_checked
from .errors import DegeneracyError, WellPosednessError

ADMISSIBLE_TOL = 1e-12


@dataclass(frozen=True)
class FractionalMarket:
    """``N`` fractional assets on ``N - 1`` independent drivers with Hurst index ``hurst``.

    Parameters
    ----------
    hurst : float
        Strictly inside (1/2, 1).
    drifts : array_like, shape (N,)
        Coefficients of the squared driver sum in each log-price.
    vols : array_like, shape (N, N-1)
        Loadings on the individual drivers; a flat pair is accepted for ``N = 2``.
    initial_prices : array_like, shape (N,), optional
    """

    hurst: float
    drifts: np.ndarray
    vols: np.ndarray
    initial_prices: Optional[np.ndarray] = None

    def __post_init__(self):
        if not 0.5 < self.hurst < 1.0:
            raise ValueError(f"Hurst index must lie strictly inside (1/2, 1), got {self.hurst}")
        mu = np.array(self.drifts, dtype=float).reshape(-1)
        n = mu.size
        if n < 2:
            raise ValueError("need at least 2 assets")
        sig = np.array(self.vols, dtype=float)
        if sig.ndim == 1 and n == 2 and sig.size == 2:
            sig = sig.reshape(2, 1)
        if sig.shape != (n, n - 1):
            raise ValueError(f"vols must have shape ({n}, {n - 1}), got {sig.shape}")
        s0 = np.ones(n) if self.initial_prices is None else np.array(self.initial_prices, dtype=float)
        if s0.shape != (n,) or not np.all(s0 > 0):
            raise ValueError(f"initial_prices must be {n} positive numbers")
        for arr in (mu, sig, s0):
            arr.flags.writeable = False
        object.__setattr__(self, "drifts", mu)
        object.__setattr__(self, "vols", sig)
        object.__setattr__(self, "initial_prices", s0)
        _require_regular(self.drift_vol_matrix(), "Xi")
        _require_regular(self.unit_vol_matrix(), "Psi")

    @classmethod
    def two_asset(cls, hurst, mu, sigma, mu_v, sigma_v, s0=1.0, v0=1.0) -> "FractionalMarket":
        return cls(hurst, [mu, mu_v], [[sigma], [sigma_v]], [s0, v0])

    @property
    def n_assets(self) -> int:
        return self.drifts.size

    def drift_vol_matrix(self) -> np.ndarray:
        """Drift row stacked on the transposed volatility matrix."""
        return np.vstack([self.drifts, self.vols.T])

    def unit_vol_matrix(self) -> np.ndarray:
        """Row of ones stacked on the transposed volatility matrix."""
        return np.vstack([np.ones(self.n_assets), self.vols.T])


def _require_regular(a: np.ndarray, name: str) -> None:
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise WellPosednessError(name, f"condition number {cond:.3e}")


@dataclass(frozen=True)
class FractionalBond:
    """Weights ``b`` with ``sum(b) = 1`` and ``sigma.T @ b = 0``; log-value ``rate * (sum X)^2``."""

    exponents: np.ndarray
    rate: float

    def log_value(self, driver_sum) -> np.ndarray:
        x = np.asarray(driver_sum, dtype=float)
        return self.rate * x * x


def fractional_rate(mu: float, sigma: float, mu_v: float, sigma_v: float) -> float:
    """Two-asset fractional rate ``(mu_v sigma - mu sigma_v) / (sigma - sigma_v)``."""
    if sigma == sigma_v:
        raise DegeneracyError("sigma equals sigma_V")
    return (mu_v * sigma - mu * sigma_v) / (sigma - sigma_v)


def fractional_bond_exponents_two_asset(mu: float, sigma: float, mu_v: float,
                                        sigma_v: float) -> tuple[float, float, float]:
    """Exponents ``(e_S, e_V)`` on ``S/S0`` and ``V/V0`` plus the rate.

    ``(S/S0)**e_S * (V/V0)**e_V == exp(R X**2)`` for every driver level ``X``.
    """
    denom = mu * sigma_v - mu_v * sigma
    if denom == 0.0:
        raise DegeneracyError("mu sigma_V equals mu_V sigma; no stochastic-drift bond exists")
    rate = fractional_rate(mu, sigma, mu_v, sigma_v)
    return sigma_v * rate / denom, -sigma * rate / denom, rate


def fractional_bond_exponents_multi(market: FractionalMarket) -> FractionalBond:
    """Solve ``sum(b) = 1``, ``sigma.T @ b = 0``; the rate is ``mu @ b``."""
    rhs = np.zeros(market.n_assets)
    rhs[0] = 1.0
    b = solve_checked(market.unit_vol_matrix(), rhs, "Psi")
    b.flags.writeable = False
    return FractionalBond(b, float(market.drifts @ b))


def arbitrage_portfolio_value(rate: float, driver, times) -> np.ndarray:
    """Value ``e^{rate t} (e^{X_t} - 1)^2`` of the strategy that is long the
    risky asset and short a classical bank account.

    Non-negative everywhere and zero exactly where the driver is zero.
    """
    x = np.asarray(driver, dtype=float)
    t = np.asarray(times, dtype=float)
    return np.exp(rate * t) * np.expm1(x) ** 2


def perpetual_admissibility(exponents) -> tuple[bool, float]:
    """Whether the power claim ``prod S_j**a_j`` is tradable, and the defect ``sum(a) - 1``."""
    defect = float(np.sum(np.asarray(exponents, dtype=float))) - 1.0
    return abs(defect) <= ADMISSIBLE_TOL, defect


@dataclass(frozen=True)
class DividendReplication:
    alpha: float
    beta: float
    relative_yield: float

    def initial_value(self, s0: float) -> float:
        return s0**self.alpha


def dividend_replication_exponents(rate: float, mu: float, sigma: float, dividend: float,
                                   info_ratio: float) -> DividendReplication:
    """Stock and bond exponents replicating a claim with a prescribed information ratio.

    The claim ``S**alpha * B**beta`` satisfies ``(1 - d) alpha + beta = 1`` with
    ``d = dividend / rate``; its initial value is ``S0**alpha``.

    Raises
    ------
    DegeneracyError
        If ``rate`` is zero (relative yield undefined) or the common
        denominator ``info_ratio*sigma + (1 - d)*rate - mu`` vanishes.
    """
    if rate == 0.0:
        raise DegeneracyError("relative dividend yield is undefined at zero rate")
    d = dividend / rate
    denom = info_ratio * sigma + (1.0 - d) * rate - mu
    if denom == 0.0:
        raise DegeneracyError("replication denominator vanishes")
    return DividendReplication(rate / denom, (info_ratio * sigma - mu) / denom, d)


def fractional_beta(weights_p, weights_m, mu, sigma, rate_h: float) -> tuple[float, float, float]:
    """Beta of portfolio ``P`` against market portfolio ``M`` and both sides of the excess-drift relation.

    ``beta = (wP' C wM) / (wM' C wM)`` with ``C = sigma @ sigma.T``.  Returns
    ``(beta, wP @ mu - rate_h, beta * (wM @ mu - rate_h))``.
    """
    wp = np.asarray(weights_p, dtype=float)
    wm = np.asarray(weights_m, dtype=float)
    mu = np.asarray(mu, dtype=float)
    sig = np.asarray(sigma, dtype=float)
    if sig.ndim == 1:
        sig = sig.reshape(-1, 1)
    if not (wp.shape == wm.shape == mu.shape == (sig.shape[0],)):
        raise ValueError("weights, drifts and vol rows must have matching length")
    load_p = sig.T @ wp
    load_m = sig.T @ wm
    denom = float(load_m @ load_m)
    if denom == 0.0:
        raise DegeneracyError("market portfolio has no volatility exposure")
    beta = float(load_p @ load_m) / denom
    lhs = float(wp @ mu) - rate_h
    rhs = beta * (float(wm @ mu) - rate_h)
    return beta, lhs, rhs
