"""Implied riskless rate, market price of risk and synthetic bond for
markets made of correlated geometric Brownian motions.

The market holds ``N >= 2`` assets driven by ``N - 1`` independent Brownian
motions::

    dS_j / S_j = mu_j dt + sum_k sigma_jk dB_k

No bank account is traded.  The rate ``R`` at which the market itself
discounts is the unique solution of ``R + sigma @ theta = mu``, and the asset
whose log-price grows at exactly ``R`` is a power product of the traded
assets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConsistencyError, DegeneracyError, WellPosednessError

COND_LIMIT = 1e12
ZERO_RATE = 1e-14


def solve_checked(a: np.ndarray, b: np.ndarray, name: str) -> np.ndarray:
    """Solve ``a x = b`` by LU with partial pivoting, refusing ill-posed systems.

    Raises
    ------
    WellPosednessError
        If the 2-norm condition number of ``a`` exceeds ``COND_LIMIT``.
    """
    a = np.asarray(a, dtype=float)
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise WellPosednessError(name, f"condition number {cond:.3e}")
    return np.linalg.solve(a, np.asarray(b, dtype=float))


@dataclass(frozen=True)
class DiffusionMarket:
    """N risky assets with constant drifts and an ``N x (N-1)`` volatility matrix.

    Parameters
    ----------
    drifts : array_like, shape (N,)
        Instantaneous mean returns per year.
    vols : array_like, shape (N, N-1)
        Loadings on the independent Brownian drivers, per sqrt(year).  For
        ``N = 2`` a flat pair ``(sigma, sigma_V)`` is accepted.
    initial_prices : array_like, shape (N,), optional
        Strictly positive; defaults to ones.
    """

    drifts: np.ndarray
    vols: np.ndarray
    initial_prices: Optional[np.ndarray] = None

    def __post_init__(self):
        mu = np.array(self.drifts, dtype=float).reshape(-1)
        n = mu.size
        if n < 2:
            raise ValueError(f"need at least 2 assets, got {n}")
        sig = np.array(self.vols, dtype=float)
        if sig.ndim == 1 and n == 2 and sig.size == 2:
            sig = sig.reshape(2, 1)
        if sig.shape != (n, n - 1):
            raise ValueError(f"vols must have shape ({n}, {n - 1}), got {sig.shape}")
        if self.initial_prices is None:
            s0 = np.ones(n)
        else:
            s0 = np.array(self.initial_prices, dtype=float).reshape(-1)
        if s0.shape != (n,):
            raise ValueError(f"initial_prices must have length {n}")
        if not np.all(s0 > 0):
            raise ValueError("initial prices must be strictly positive")
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(sig))):
            raise ValueError("drifts and vols must be finite")
        for arr in (mu, sig, s0):
            arr.flags.writeable = False
        object.__setattr__(self, "drifts", mu)
        object.__setattr__(self, "vols", sig)
        object.__setattr__(self, "initial_prices", s0)
        phi = self.phi_matrix()
        cond = np.linalg.cond(phi)
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise WellPosednessError("Phi", f"condition number {cond:.3e}")

    @classmethod
    def two_asset(cls, mu, sigma, mu_v, sigma_v, s0=1.0, v0=1.0) -> "DiffusionMarket":
        """Two perfectly correlated GBMs sharing one Brownian motion."""
        return cls([mu, mu_v], [[sigma], [sigma_v]], [s0, v0])

    @property
    def n_assets(self) -> int:
        return self.drifts.size

    def phi_matrix(self) -> np.ndarray:
        """Leading column of ones followed by the negated volatility columns."""
        return np.column_stack([np.ones(self.n_assets), -self.vols])

    def total_variance(self) -> np.ndarray:
        """Squared row norms ``sum_k sigma_jk**2`` (the per-asset variance rate)."""
        return np.sum(self.vols**2, axis=1)

    def log_drifts(self) -> np.ndarray:
        return self.drifts - 0.5 * self.total_variance()

    def permuted(self, order: Sequence[int]) -> "DiffusionMarket":
        order = list(order)
        return DiffusionMarket(self.drifts[order], self.vols[order], self.initial_prices[order])


@dataclass(frozen=True)
class SyntheticBond:
    """Power product ``prod_j S_j ** exponents[j]`` growing deterministically at ``rate``."""

    exponents: np.ndarray
    rate: float
    base_value: float

    def value(self, prices: np.ndarray) -> np.ndarray:
        """Bond price for an array of asset prices with the asset axis last."""
        return np.exp(np.log(prices) @ self.exponents)


@dataclass(frozen=True)
class PowerClaim:
    """Perpetual claim paying ``prod_j S_j ** exponents[j]`` whenever sold."""

    exponents: np.ndarray

    def __post_init__(self):
        a = np.array(self.exponents, dtype=float).reshape(-1)
        if not np.all(np.isfinite(a)):
            raise ValueError("claim exponents must be finite")
        object.__setattr__(self, "exponents", a)

    def __call__(self, *prices):
        out = 1.0
        for x, a in zip(prices, self.exponents):
            out = out * np.power(x, a)
        return out


def _rate_and_theta(market: DiffusionMarket) -> np.ndarray:
    a = np.column_stack([np.ones(market.n_assets), market.vols])
    return solve_checked(a, market.drifts, "Phi")


def riskless_rate(market: DiffusionMarket) -> float:
    """Rate ``R`` solving ``R * 1 + sigma @ theta = mu`` for the whole market.

    For two assets this is ``(mu_V sigma - mu sigma_V) / (sigma - sigma_V)``.
    Negative rates are returned as-is.
    """
    return float(_rate_and_theta(market)[0])


def market_price_of_risk(market: DiffusionMarket, rate: Optional[float] = None,
                         *, rtol: float = 1e-9) -> np.ndarray:
    """Per-driver market price of risk ``theta`` with ``sigma @ theta = mu - R``.

    ``rate`` defaults to the market's own rate.  A rate the market does not
    generate leaves the overdetermined system without solution and raises
    :class:`ConsistencyError`.
    """
    if rate is None:
        return _rate_and_theta(market)[1:]
    rhs = market.drifts - rate
    theta, *_ = np.linalg.lstsq(market.vols, rhs, rcond=None)
    resid = np.max(np.abs(market.vols @ theta - rhs))
    scale = max(1.0, float(np.max(np.abs(market.drifts))))
    if resid > rtol * scale:
        raise ConsistencyError(
            f"rate {rate!r} is not generated by the market (residual {resid:.3e})")
    return theta


def bond_exponents(market: DiffusionMarket) -> SyntheticBond:
    """Exponents ``chi`` making ``prod S_j**chi_j`` grow at the riskless rate.

    Solves the drift row ``sum_j chi_j (mu_j - |sigma_j|^2 / 2) = R`` together
    with one annihilation row ``sum_j chi_j sigma_jk = 0`` per driver.
    """
    rate = riskless_rate(market)
    a = np.vstack([market.log_drifts(), market.vols.T])
    rhs = np.zeros(market.n_assets)
    rhs[0] = rate
    chi = solve_checked(a, rhs, "bond system")
    chi.flags.writeable = False
    b0 = float(np.exp(np.log(market.initial_prices) @ chi))
    return SyntheticBond(chi, rate, b0)


def two_asset_bond_closed_form(market: DiffusionMarket) -> tuple[float, float]:
    """Exponents ``(nu, nu_V)`` with bond ``V**nu / S**nu_V`` for a two-asset market.

    Near ``R = 0`` the closed form divides by zero, so the linear system is
    solved instead and its exponents are mapped back.
    """
    if market.n_assets != 2:
        raise ValueError("closed form exists for two assets only")
    sigma, sigma_v = market.vols[:, 0]
    rate = riskless_rate(market)
    if abs(rate) < ZERO_RATE:
        chi = bond_exponents(market).exponents
        return float(chi[1]), float(-chi[0])
    denom = (sigma - sigma_v) * (1.0 + 0.5 * sigma * sigma_v / rate)
    if denom == 0.0:
        raise DegeneracyError("sigma - sigma_V or 1 + sigma sigma_V / (2R) vanishes")
    return sigma / denom, sigma_v / denom


def _cross_cov(market: DiffusionMarket) -> np.ndarray:
    return market.vols @ market.vols.T


def power_claim_residual(market: DiffusionMarket, claim, rate: Optional[float] = None) -> float:
    """Drift defect of a power claim; zero exactly when the claim is tradable.

    ``R sum(a) - R + 1/2 sum a_j (a_j - 1) |sigma_j|^2 + sum_{i<j} a_i a_j sigma_i . sigma_j``
    """
    a = claim.exponents if isinstance(claim, PowerClaim) else np.asarray(claim, dtype=float)
    if a.shape != (market.n_assets,):
        raise ValueError(f"claim needs {market.n_assets} exponents")
    if rate is None:
        rate = riskless_rate(market)
    cov = _cross_cov(market)
    diag = 0.5 * np.sum(a * (a - 1.0) * np.diag(cov))
    cross = 0.5 * (a @ cov @ a - np.sum(a * a * np.diag(cov)))
    return float(rate * np.sum(a) - rate + diag + cross)


def solve_power_exponent(market: DiffusionMarket, fixed: Sequence[Optional[float]],
                         rate: Optional[float] = None) -> tuple[float, ...]:
    """Real roots for the single unknown (``None``) entry of a power claim.

    The tradability residual is quadratic in that entry.  Returns the roots in
    ascending order, or an empty tuple when the discriminant is negative.

    Raises
    ------
    DegeneracyError
        If the unknown asset carries no volatility (the quadratic degenerates).
    """
    unknown = [i for i, v in enumerate(fixed) if v is None]
    if len(unknown) != 1 or len(fixed) != market.n_assets:
        raise ValueError("exactly one exponent must be None")
    u = unknown[0]
    if rate is None:
        rate = riskless_rate(market)
    a = np.array([0.0 if v is None else float(v) for v in fixed])
    cov = _cross_cov(market)
    qa = 0.5 * cov[u, u]
    if qa <= 0.0:
        raise DegeneracyError(f"asset {u} has zero variance; residual is not quadratic")
    others = np.arange(market.n_assets) != u
    qb = rate - 0.5 * cov[u, u] + float(a[others] @ cov[u, others])
    qc = power_claim_residual(market, a, rate)  # value with the unknown set to 0
    disc = qb * qb - 4.0 * qa * qc
    if disc < 0.0:
        return ()
    sq = math.sqrt(disc)
    # stable pairing avoids cancellation in -b + sqrt(disc)
    q = -0.5 * (qb + math.copysign(sq, qb)) if qb != 0.0 else -0.5 * sq
    if q == 0.0:
        roots = [0.0, 0.0] if qc == 0.0 else [-sq / (2 * qa), sq / (2 * qa)]
    else:
        roots = [q / qa, qc / q]
    roots.sort()
    if disc == 0.0:
        return (roots[0],)
    return tuple(roots)
