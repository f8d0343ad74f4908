"""Seeded path simulation for the diffusion, jump-diffusion and stochastic-volatility markets."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .diffusion import DiffusionMarket, riskless_rate
from .extended import JumpMarketBasic, StochVolMarket
from .pathset import PathSet, TimeGrid, per_path_draws


def simulate_diffusion_paths(market: DiffusionMarket, grid: TimeGrid, seed: int, n_paths: int,
                             *, measure: str = "P") -> PathSet:
    """Exact log-Euler simulation of the correlated GBM market.

    Each step draws one standard normal per Brownian driver, shared by all
    assets.  Under ``measure="Q"`` every asset drifts at the market's riskless
    rate.  Output series: ``S1..SN`` (prices) then ``B1..B{N-1}`` (driver levels).
    """
    n, d = grid.steps, market.n_assets - 1
    z = per_path_draws(seed, n_paths, lambda g: g.standard_normal((n, d)))
    w = np.zeros((n_paths, n + 1, d))
    np.cumsum(z * np.sqrt(grid.dt), axis=1, out=w[:, 1:, :])
    if measure == "Q":
        drifts = np.full(market.n_assets, riskless_rate(market))
    elif measure == "P":
        drifts = market.drifts
    else:
        raise ValueError("measure must be 'P' or 'Q'")
    log_drift = drifts - 0.5 * market.total_variance()
    t = grid.times
    log_s = (np.log(market.initial_prices)[None, None, :]
             + t[None, :, None] * log_drift[None, None, :]
             + w @ market.vols.T)
    s = np.exp(log_s)
    s[:, 0, :] = market.initial_prices
    labels = tuple(f"S{j + 1}" for j in range(market.n_assets)) + tuple(f"B{k + 1}" for k in range(d))
    roles = ("price",) * market.n_assets + ("driver",) * d
    return PathSet(np.concatenate([s, w], axis=2), grid, seed, "diffusion", labels, roles, measure)


def _forced_counts(grid: TimeGrid, jump_times: Sequence[float]) -> np.ndarray:
    counts = np.zeros(grid.steps, dtype=np.int64)
    for tau in jump_times:
        if not 0.0 < tau <= grid.horizon:
            raise ValueError(f"jump time {tau} outside (0, horizon]")
        k = int(np.ceil(tau / grid.dt - 1e-12))
        counts[max(k, 1) - 1] += 1
    return counts


def simulate_jump_paths(market: JumpMarketBasic, grid: TimeGrid, seed: int, n_paths: int,
                        *, jump_times: Optional[Sequence[float]] = None) -> PathSet:
    """Three-asset jump-diffusion with Poisson arrivals and multiplicative jumps.

    Between jumps the log-prices move with the exact GBM scheme; each arrival
    multiplies assets 1 and 3 by ``1 + jump``.  ``jump_times`` replaces the
    Poisson draws with the same fixed arrival times on every path (for tests).

    Output series: ``S1, S2, S3`` (prices), ``B`` (Brownian level), ``N`` (jump count).
    """
    n, dt = grid.steps, grid.dt
    lam_dt = market.intensity * dt

    def draw(g: np.random.Generator) -> np.ndarray:
        z = g.standard_normal(n)
        k = g.poisson(lam_dt, n).astype(float)
        return np.stack([z, k], axis=-1)

    raw = per_path_draws(seed, n_paths, draw)
    if jump_times is not None:
        raw[:, :, 1] = _forced_counts(grid, jump_times)[None, :]
    w = np.zeros((n_paths, n + 1))
    counts = np.zeros((n_paths, n + 1))
    np.cumsum(raw[:, :, 0] * np.sqrt(dt), axis=1, out=w[:, 1:])
    np.cumsum(raw[:, :, 1], axis=1, out=counts[:, 1:])

    t = grid.times[None, :]
    m1, m2, m3 = market.drifts
    s1, s2 = market.sigma1, market.sigma2
    log_jump = np.log1p(market.jump)
    log_s = np.stack([
        (m1 - 0.5 * s1**2) * t + s1 * w + counts * log_jump,
        (m2 - 0.5 * s2**2) * t + s2 * w,
        m3 * t + counts * log_jump,
    ], axis=-1)
    s = np.asarray(market.initial_prices)[None, None, :] * np.exp(log_s)
    values = np.concatenate([s, w[..., None], counts[..., None]], axis=2)
    return PathSet(values, grid, seed, "jump", ("S1", "S2", "S3", "B", "N"),
                   ("price", "price", "price", "driver", "driver"))


def correlation_factor(corr: np.ndarray) -> np.ndarray:
    """Lower factor ``L`` with ``L @ L.T == corr`` for a positive semidefinite matrix."""
    try:
        return np.linalg.cholesky(corr)
    except np.linalg.LinAlgError:
        vals, vecs = np.linalg.eigh(corr)
        if vals[0] < -1e-12:
            raise ValueError("correlation matrix is not positive semidefinite") from None
        return vecs * np.sqrt(np.clip(vals, 0.0, None))


def simulate_stochvol_paths(market: StochVolMarket, grid: TimeGrid, seed: int, n_paths: int) -> PathSet:
    """Euler scheme on log-prices and log-volatility states.

    The stocks share the driver ``B``; state ``v_j`` follows a GBM driven by
    ``B_j``; ``(B, B1, B2)`` carry the market's correlation matrix.  Output
    series: ``S1, S2`` (prices), ``v1, v2`` (volatility states), ``B`` (driver).
    """
    n, dt = grid.steps, grid.dt
    factor = correlation_factor(market.correlation())
    z = per_path_draws(seed, n_paths, lambda g: g.standard_normal((n, 3)))
    dw = (z @ factor.T) * np.sqrt(dt)

    out = np.empty((n_paths, n + 1, 5))
    log_s = np.log(np.broadcast_to(np.asarray(market.s0, dtype=float), (n_paths, 2))).copy()
    log_v = np.log(np.broadcast_to(np.asarray(market.v0, dtype=float), (n_paths, 2))).copy()
    mu = np.array([market.mu1, market.mu2])
    alpha = np.array([market.alpha1, market.alpha2])
    beta = np.array([market.beta1, market.beta2])
    b = np.zeros(n_paths)
    out[:, 0, :2] = market.s0
    out[:, 0, 2:4] = market.v0
    out[:, 0, 4] = 0.0
    for k in range(n):
        gv = market.link(np.exp(log_v))
        log_s += (mu - 0.5 * gv**2) * dt + gv * dw[:, k, 0:1]
        log_v += (alpha - 0.5 * beta**2) * dt + beta * dw[:, k, 1:3]
        b += dw[:, k, 0]
        out[:, k + 1, :2] = np.exp(log_s)
        out[:, k + 1, 2:4] = np.exp(log_v)
        out[:, k + 1, 4] = b
    return PathSet(out, grid, seed, "stochvol", ("S1", "S2", "v1", "v2", "B"),
                   ("price", "price", "vol", "vol", "driver"))
