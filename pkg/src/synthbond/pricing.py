"""Binomial-tree and Monte Carlo pricing of claims on two perfectly correlated assets."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import norm

from .errors import DegeneracyError, NumericalError, ProvenanceError, StepSizeError
from .pathset import PathSet

HEDGE_RTOL = 1e-12


@dataclass(frozen=True)
class KsrfParams:
    """Two-asset binomial model with branch probability ``p`` and step ``dt``.

    Both assets move up together with probability ``p``; an up move multiplies
    a price by ``1 + m dt + sqrt((1-p)/p) s sqrt(dt)`` and a down move by
    ``1 + m dt - sqrt(p/(1-p)) s sqrt(dt)``.
    """

    p: float
    dt: float
    mu: float
    sigma: float
    mu_v: float
    sigma_v: float
    n: int
    s0: float = 1.0
    v0: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"p must lie in (0, 1), got {self.p}")
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be a positive integer")
        object.__setattr__(self, "n", int(self.n))
        if self.sigma == self.sigma_v:
            raise DegeneracyError("sigma equals sigma_V; branch moves are proportional")
        if self.s0 <= 0.0 or self.v0 <= 0.0:
            raise ValueError("initial prices must be positive")
        for name, (u, d) in (("S", self.factors(self.mu, self.sigma)),
                             ("V", self.factors(self.mu_v, self.sigma_v))):
            if u <= 0.0 or d <= 0.0:
                raise StepSizeError(f"{name} branch factors ({u:.6g}, {d:.6g}) are not positive; "
                                    "reduce dt")

    @classmethod
    def for_horizon(cls, horizon: float, n: int, mu, sigma, mu_v, sigma_v, *, p=0.5, s0=1.0, v0=1.0):
        return cls(p, horizon / n, mu, sigma, mu_v, sigma_v, n, s0, v0)

    @property
    def horizon(self) -> float:
        return self.n * self.dt

    def factors(self, m: float, s: float) -> tuple[float, float]:
        root = math.sqrt(self.dt)
        up = 1.0 + m * self.dt + math.sqrt((1.0 - self.p) / self.p) * s * root
        dn = 1.0 + m * self.dt - math.sqrt(self.p / (1.0 - self.p)) * s * root
        return up, dn

    def market_price_of_risk(self) -> float:
        return (self.mu - self.mu_v) / (self.sigma - self.sigma_v)


def ksrf_hedge_weights(y_up, y_dn, s_up, s_dn, v_up, v_dn):
    """Holdings in ``S`` and ``V`` replicating the claim on both branches; broadcasts."""
    den = s_up * v_dn - s_dn * v_up
    if np.any(den == 0):
        raise DegeneracyError("branch moves of S and V are proportional")
    return (y_up * v_dn - y_dn * v_up) / den, (y_dn * s_up - y_up * s_dn) / den


def ksrf_risk_neutral_prob(p: float, theta: float, dt: float) -> float:
    """``p - theta sqrt(p (1 - p)) sqrt(dt)``; raises StepSizeError outside (0, 1)."""
    q = p - theta * math.sqrt(p * (1.0 - p)) * math.sqrt(dt)
    if not 0.0 < q < 1.0:
        raise StepSizeError(f"risk-neutral probability {q:.6g} outside (0, 1); reduce dt")
    return q


def _check_hedge(y_up, y_dn, s_up, s_dn, v_up, v_dn) -> float:
    ds, dv = ksrf_hedge_weights(y_up, y_dn, s_up, s_dn, v_up, v_dn)
    res_up = np.abs(y_up - ds * s_up - dv * v_up)
    res_dn = np.abs(y_dn - ds * s_dn - dv * v_dn)
    scale = np.maximum.reduce([np.abs(y_up), np.abs(y_dn), np.abs(ds * s_up), np.abs(dv * v_up),
                               np.abs(ds * s_dn), np.abs(dv * v_dn), np.ones_like(y_up)])
    return float(np.max(np.maximum(res_up, res_dn) / scale))


@dataclass(frozen=True)
class TreeResult:
    price: float
    q: float
    max_hedge_residual: float


def ksrf_price(params: KsrfParams, payoff: Callable, rate: float, method: str = "lattice",
               *, discount: str = "exp") -> TreeResult:
    """Backward induction ``Y = disc * (q Y_up + (1 - q) Y_dn)`` from ``payoff(S_T, V_T)``.

    ``method="lattice"`` collapses nodes by up-count (both assets share the
    shock); ``method="tree"`` walks every path of the binary tree and is limited
    to ``n <= 20``.  ``discount`` is ``"exp"`` (``e^{-rate dt}`` per step) or
    ``"simple"`` (``1 / (1 + rate dt)``).  Hedge weights are recomputed at every
    node and the worst relative branch residual is reported.
    """
    theta = params.market_price_of_risk()
    q = ksrf_risk_neutral_prob(params.p, theta, params.dt)
    if discount == "exp":
        disc = math.exp(-rate * params.dt)
    elif discount == "simple":
        disc = 1.0 / (1.0 + rate * params.dt)
    else:
        raise ValueError("discount must be 'exp' or 'simple'")
    su, sd = params.factors(params.mu, params.sigma)
    vu, vd = params.factors(params.mu_v, params.sigma_v)
    n = params.n

    if method == "lattice":
        def states(k):
            ups = np.arange(k + 1)[::-1]
            return (params.s0 * su**ups * sd ** (k - ups), params.v0 * vu**ups * vd ** (k - ups))
        pairs = lambda a: (a[:-1], a[1:])  # noqa: E731  (up child, down child)
    elif method == "tree":
        if n > 20:
            raise ValueError("path-indexed tree is limited to n <= 20")

        def states(k):
            idx = np.arange(2**k)
            ups = np.zeros(2**k, dtype=np.int64)
            for b in range(k):
                ups += (idx >> b) & 1
            return (params.s0 * su**ups * sd ** (k - ups), params.v0 * vu**ups * vd ** (k - ups))
        pairs = lambda a: (a[1::2], a[0::2])  # noqa: E731
    else:
        raise ValueError("method must be 'lattice' or 'tree'")

    s, v = states(n)
    y = np.broadcast_to(np.asarray(payoff(s, v), dtype=float), s.shape).copy()
    if not np.all(np.isfinite(y)):
        raise NumericalError("payoff is not finite at every terminal node")
    worst = 0.0
    for k in range(n, 0, -1):
        y_up, y_dn = pairs(y)
        s_up, s_dn = pairs(s)
        v_up, v_dn = pairs(v)
        worst = max(worst, _check_hedge(y_up, y_dn, s_up, s_dn, v_up, v_dn))
        y = disc * (q * y_up + (1.0 - q) * y_dn)
        s, v = states(k - 1)
    if worst > HEDGE_RTOL:
        raise NumericalError(f"hedge residual {worst:.3e} exceeds {HEDGE_RTOL}")
    return TreeResult(float(y[0]), q, worst)


def mc_price(pathset: PathSet, payoff: Callable, rate: float) -> tuple[float, float]:
    """Discounted sample mean of ``payoff(*terminal_prices)`` and its standard error.

    The sum is accumulated with ``math.fsum`` so the estimate does not depend
    on summation order.
    """
    if pathset.measure != "Q":
        raise ProvenanceError(f"paths were simulated under {pathset.measure!r}; pricing needs 'Q'")
    terminal = pathset.prices()[:, -1, :]
    vals = np.broadcast_to(np.asarray(payoff(*terminal.T), dtype=float), (pathset.n_paths,))
    if not np.all(np.isfinite(vals)):
        raise NumericalError("payoff is not finite on every path")
    n = vals.size
    disc = math.exp(-rate * pathset.grid.horizon)
    mean = math.fsum(vals) / n
    if n > 1:
        var = math.fsum((vals - mean) ** 2) / (n - 1)
    else:
        var = 0.0
    return disc * mean, disc * math.sqrt(var / n)


def black_scholes_call(s0: float, strike: float, rate: float, sigma: float, horizon: float) -> float:
    """Closed-form European call on a lognormal asset drifting at ``rate``."""
    sd = sigma * math.sqrt(horizon)
    d1 = (math.log(s0 / strike) + (rate + 0.5 * sigma**2) * horizon) / sd
    return s0 * norm.cdf(d1) - strike * math.exp(-rate * horizon) * norm.cdf(d1 - sd)
