"""Rate and bond constructions for jump-diffusion and stochastic-volatility markets."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegeneracyError, WellPosednessError

_DET_TOL = 1e-14


@dataclass(frozen=True)
class JumpMarketBasic:
    """Three basic instruments sharing one Brownian motion and one Poisson clock.

    Asset 1 diffuses and jumps, asset 2 only diffuses, asset 3 only jumps; every
    jump multiplies assets 1 and 3 by ``1 + jump``.
    """

    drifts: tuple[float, float, float]
    sigma1: float
    sigma2: float
    jump: float
    intensity: float
    initial_prices: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "drifts", tuple(float(m) for m in self.drifts))
        object.__setattr__(self, "initial_prices", tuple(float(s) for s in self.initial_prices))
        if len(self.drifts) != 3 or len(self.initial_prices) != 3:
            raise ValueError("jump market has exactly three assets")
        if self.sigma1 == 0.0:
            raise ValueError("sigma1 must be nonzero")
        if not self.jump > -1.0:
            raise ValueError(f"jump size must exceed -1, got {self.jump}")
        if self.intensity < 0.0:
            raise ValueError("intensity must be non-negative")
        if min(self.initial_prices) <= 0.0:
            raise ValueError("initial prices must be strictly positive")

    def coefficient_pattern(self):
        """Per-asset ``(mu, sigma, gamma)`` triples in the general three-asset form."""
        sig = (self.sigma1, self.sigma2, 0.0)
        gam = (self.jump, 0.0, self.jump)
        return self.drifts, sig, gam


def riskless_rate_jump_general(mu: Sequence[float], sigma: Sequence[float],
                               gamma: Sequence[float], intensity: float) -> float:
    """Instantaneous rate as a ratio of 3x3 determinants.

    Columns are ``(mu | 1)``, ``-sigma`` and ``-intensity * gamma``.  The
    intensity cancels for constant inputs but is kept so time-varying
    coefficients can be evaluated pointwise.
    """
    sig = -np.asarray(sigma, dtype=float)
    lam_g = -float(intensity) * np.asarray(gamma, dtype=float)
    den = np.linalg.det(np.column_stack([np.ones(3), sig, lam_g]))
    num = np.linalg.det(np.column_stack([np.asarray(mu, dtype=float), sig, lam_g]))
    scale = max(1.0, float(np.max(np.abs(sig))), float(np.max(np.abs(lam_g)))) ** 2
    if abs(den) <= _DET_TOL * scale:
        raise WellPosednessError("jump rate denominator", f"determinant {den:.3e}")
    return float(num / den)


def riskless_rate_jump(market: JumpMarketBasic) -> float:
    """Closed-form rate of the three basic instruments."""
    m1, m2, m3 = market.drifts
    s1, s2 = market.sigma1, market.sigma2
    return (m2 * s1 - s2 * m1 + m3 * s2) / s1


@dataclass(frozen=True)
class JumpBond:
    exponents: tuple[float, float, float]
    normalizer: float
    rate: float


def bond_exponents_jump(market: JumpMarketBasic, *, printed_denominator: bool = False) -> JumpBond:
    """Exponents ``(s2, -s1, -s2) * k`` making the normalized power product ``e^{Rt}``.

    The Brownian and jump exposures cancel for any ``k``; ``k`` is then fixed so
    the log-drift equals ``R``, i.e. ``k = R / D`` with
    ``D = m1 s2 - m2 s1 - m3 s2 - s2 s1^2 / 2 + s1 s2^2 / 2``.

    ``printed_denominator=True`` swaps the ``m2 s1`` term for ``m3 s1``, a
    variant kept only for comparison; its bond does not grow at ``R``.
    """
    m1, m2, m3 = market.drifts
    s1, s2 = market.sigma1, market.sigma2
    rate = riskless_rate_jump(market)
    middle = m3 * s1 if printed_denominator else m2 * s1
    denom = m1 * s2 - middle - m3 * s2 - s2 * s1**2 / 2 + s1 * s2**2 / 2
    if denom == 0.0:
        if rate == 0.0:
            return JumpBond((0.0, 0.0, 0.0), 0.0, 0.0)
        raise WellPosednessError("jump bond normalizer", "denominator vanishes")
    k = rate / denom
    return JumpBond((s2 * k, -s1 * k, -s2 * k), k, rate)


@dataclass(frozen=True)
class Link:
    """Strictly increasing map from a volatility state to an instantaneous volatility."""

    kind: str = "power"
    exponent: float = 0.5

    def __post_init__(self):
        if self.kind not in ("power", "log"):
            raise ValueError(f"unknown link {self.kind!r}")
        if self.kind == "power" and not 0.0 < self.exponent < 1.0:
            raise ValueError("power link exponent must lie in (0, 1)")

    def __call__(self, v):
        if self.kind == "log":
            return np.log(v)
        return np.power(v, self.exponent)


@dataclass(frozen=True)
class StochVolMarket:
    """Two stocks whose volatilities are ``g(v_j)`` with geometric volatility states ``v_j``."""

    mu1: float
    mu2: float
    alpha1: float
    alpha2: float
    beta1: float
    beta2: float
    rho1: float
    rho2: float
    rho: float
    link: Link = Link()
    s0: tuple[float, float] = (1.0, 1.0)
    v0: tuple[float, float] = (0.04, 0.09)

    def __post_init__(self):
        for name in ("rho1", "rho2", "rho"):
            if abs(getattr(self, name)) > 1.0:
                raise ValueError(f"|{name}| must not exceed 1")
        if min(self.s0) <= 0.0 or min(self.v0) <= 0.0:
            raise ValueError("initial prices and volatility states must be positive")
        eig = np.linalg.eigvalsh(self.correlation())
        if eig[0] < -1e-12:
            raise ValueError(f"correlation matrix is not positive semidefinite (min eigenvalue {eig[0]:.3e})")

    def correlation(self) -> np.ndarray:
        """Correlation of ``(B, B1, B2)``: stock driver, then the two volatility drivers."""
        return np.array([[1.0, self.rho1, self.rho2],
                         [self.rho1, 1.0, self.rho],
                         [self.rho2, self.rho, 1.0]])


def riskless_rate_stochvol(mu1: float, mu2: float, gv1: float, gv2: float) -> float:
    """Pointwise rate from the current instantaneous volatilities ``g(v1)``, ``g(v2)``."""
    if gv1 == gv2:
        raise DegeneracyError("both stocks carry identical instantaneous risk")
    return (mu2 * gv1 - mu1 * gv2) / (gv1 - gv2)


def stochvol_rate_at(market: StochVolMarket, v1, v2):
    """Rate implied by ``market`` at volatility states ``(v1, v2)``; broadcasts."""
    g1, g2 = market.link(v1), market.link(v2)
    if np.any(g1 == g2):
        raise DegeneracyError("both stocks carry identical instantaneous risk")
    return (market.mu2 * g1 - market.mu1 * g2) / (g1 - g2)
