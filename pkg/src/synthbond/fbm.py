"""Fractional Brownian motion, Rosenblatt motion and geometric fractional assets.

FBM is sampled exactly on the grid by Cholesky factorization of its
covariance ``(t^{2H} + s^{2H} - |t - s|^{2H}) / 2``.  Rosenblatt motion is
approximated by normalized partial sums of ``eta_j**2 - 1`` where ``eta`` is a
stationary Gaussian sequence with autocovariance ``(1 + n^2)^{(H-1)/2}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import lapack, toeplitz

from .errors import NumericalError
from .pathset import PathSet, TimeGrid, per_path_draws

MAX_EXACT_POINTS = 4096
MAX_INNER_POINTS = 8192
_ROSENBLATT_CHUNK = 1024


@dataclass(frozen=True)
class FbmSpec:
    hurst: float
    scale: float = 1.0

    def __post_init__(self):
        if not 0.5 < self.hurst < 1.0:
            raise ValueError(f"Hurst index must lie strictly inside (1/2, 1), got {self.hurst}")
        if not self.scale > 0.0:
            raise ValueError("scale must be positive")


def fbm_covariance(hurst: float, times: np.ndarray) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    h2 = 2.0 * hurst
    tt, ss = np.meshgrid(t, t, indexing="ij")
    return 0.5 * (tt**h2 + ss**h2 - np.abs(tt - ss) ** h2)


def cholesky_lower(cov: np.ndarray, what: str) -> np.ndarray:
    """Lower Cholesky factor; reports the first non-positive leading minor on failure."""
    c, info = lapack.dpotrf(np.asarray(cov, dtype=float), lower=1, clean=1)
    if info > 0:
        raise NumericalError(f"{what} covariance is not positive definite: "
                             f"leading minor {info} failed")
    if info < 0:
        raise NumericalError(f"dpotrf rejected argument {-info}")
    return c


@lru_cache(maxsize=16)
def _fbm_factor(hurst: float, horizon: float, steps: int) -> np.ndarray:
    times = TimeGrid(horizon, steps).times[1:]
    factor = cholesky_lower(fbm_covariance(hurst, times), "FBM")
    factor.flags.writeable = False
    return factor


def sample_fbm(spec: FbmSpec, grid: TimeGrid, seed: int, n_paths: int, n_drivers: int = 1) -> PathSet:
    """Exact draws of ``n_drivers`` independent FBMs on ``grid`` (all zero at ``t = 0``).

    Series are labelled ``X`` for a single driver, ``X1..Xd`` otherwise.
    """
    if grid.steps > MAX_EXACT_POINTS:
        raise ValueError(f"exact sampling supports at most {MAX_EXACT_POINTS} grid points")
    factor = _fbm_factor(spec.hurst, grid.horizon, grid.steps)
    z = per_path_draws(seed, n_paths, lambda g: g.standard_normal((grid.steps, n_drivers)))
    values = np.zeros((n_paths, grid.steps + 1, n_drivers))
    values[:, 1:, :] = spec.scale * (factor @ z)
    labels = ("X",) if n_drivers == 1 else tuple(f"X{m + 1}" for m in range(n_drivers))
    return PathSet(values, grid, seed, "fbm", labels, ("driver",) * n_drivers)


def fbm_increment_autocov(hurst: float, lag: int) -> float:
    """Autocovariance of unit-spaced FBM increments at ``lag >= 1``.

    ``((n+1)^{2H} - 2 n^{2H} + (n-1)^{2H}) / 2``, evaluated through ``expm1``
    so large lags keep full relative precision.
    """
    if lag < 1:
        raise ValueError("lag must be >= 1")
    h2 = 2.0 * hurst
    if lag == 1:
        return 0.5 * (2.0**h2 - 2.0)
    inv = 1.0 / lag
    up = math.expm1(h2 * math.log1p(inv))
    down = math.expm1(h2 * math.log1p(-inv))
    return 0.5 * lag**h2 * (up + down)


def rosenblatt_autocov(hurst: float, lags: np.ndarray) -> np.ndarray:
    """Autocovariance ``(1 + n^2)^{(H-1)/2}`` of the underlying Gaussian sequence."""
    n = np.asarray(lags, dtype=float)
    return (1.0 + n * n) ** ((hurst - 1.0) / 2.0)


def rosenblatt_scale(hurst: float, m: int) -> float:
    """Scale making ``Var(Z_1) = 1`` for the resolution-``m`` partial sum.

    ``Var(sum_{j<=m} (eta_j^2 - 1)) = 2 sum_{i,j} rho(i-j)^2`` is evaluated exactly.
    """
    k = np.arange(1, m, dtype=float)
    rho2 = rosenblatt_autocov(hurst, k) ** 2
    var = 2.0 * (m + 2.0 * math.fsum((m - k) * rho2))
    return m**hurst / math.sqrt(var)


@lru_cache(maxsize=4)
def _toeplitz_factor(hurst: float, size: int) -> np.ndarray:
    factor = cholesky_lower(toeplitz(rosenblatt_autocov(hurst, np.arange(size))), "Rosenblatt")
    factor.flags.writeable = False
    return factor


def sample_rosenblatt(hurst: float, grid: TimeGrid, seed: int, n_paths: int, m: int = 4096,
                      scale: float | None = None) -> PathSet:
    """Approximate Rosenblatt motion ``Z_t = (scale / m^H) sum_{j <= floor(m t)} (eta_j^2 - 1)``.

    ``m`` is the inner resolution, independent of the output grid.  The
    default ``scale`` normalizes ``Var(Z_1)`` to one.  Series label: ``X``.
    """
    if not 0.5 < hurst < 1.0:
        raise ValueError(f"Hurst index must lie strictly inside (1/2, 1), got {hurst}")
    if m < 1024:
        raise ValueError("inner resolution m must be at least 1024")
    idx = np.floor(m * grid.times + 1e-9).astype(int)
    size = int(idx[-1])
    if size > MAX_INNER_POINTS:
        raise ValueError(f"m * horizon = {size} exceeds {MAX_INNER_POINTS} inner points")
    if size < 1:
        raise ValueError("grid horizon shorter than one inner step")
    if scale is None:
        scale = rosenblatt_scale(hurst, m)
    factor = _toeplitz_factor(hurst, size)
    coef = scale / m**hurst
    values = np.zeros((n_paths, grid.steps + 1, 1))
    cols = idx[1:] - 1
    for lo in range(0, n_paths, _ROSENBLATT_CHUNK):
        cnt = min(_ROSENBLATT_CHUNK, n_paths - lo)
        z = per_path_draws(seed, cnt, lambda g: g.standard_normal(size), start=lo)
        eta = z @ factor.T
        partial = np.cumsum(eta * eta - 1.0, axis=1)
        values[lo:lo + cnt, 1:, 0] = coef * partial[:, cols]
    return PathSet(values, grid, seed, "rosenblatt", ("X",), ("driver",))


def _driver_levels(drivers: PathSet) -> np.ndarray:
    return drivers.drivers()


def simulate_fractional_asset(mu: float, sigma: float, drivers: PathSet, s0: float = 1.0) -> PathSet:
    """``S_t = s0 * exp(mu X_t^2 + sigma X_t)`` applied pointwise to a driver path set.

    Output series: ``S`` (price) and ``Xsum`` (the driver).
    """
    x = _driver_levels(drivers).sum(axis=2)
    s = s0 * np.exp(mu * x * x + sigma * x)
    values = np.stack([s, x], axis=-1)
    return PathSet(values, drivers.grid, drivers.seed, drivers.model, ("S", "Xsum"),
                   ("price", "driver"))


def simulate_fractional_market(market, drivers: PathSet) -> PathSet:
    """Prices ``S_j = S0_j exp(mu_j (sum_m X_m)^2 + sum_k sigma_jk X_k)`` on shared drivers.

    ``market`` needs ``drifts``, ``vols`` (``N x (N-1)``) and ``initial_prices``.
    Output series: ``S1..SN``, the individual drivers, and their sum ``Xsum``.
    """
    x = _driver_levels(drivers)
    vols = np.asarray(market.vols)
    if x.shape[2] != vols.shape[1]:
        raise ValueError(f"market needs {vols.shape[1]} drivers, path set has {x.shape[2]}")
    xsum = x.sum(axis=2)
    log_s = (np.log(market.initial_prices)[None, None, :]
             + (xsum * xsum)[..., None] * np.asarray(market.drifts)[None, None, :]
             + x @ vols.T)
    s = np.exp(log_s)
    s[:, 0, :] = market.initial_prices
    n = vols.shape[0]
    d = vols.shape[1]
    labels = (tuple(f"S{j + 1}" for j in range(n)) + tuple(f"X{k + 1}" for k in range(d))
              + ("Xsum",))
    roles = ("price",) * n + ("driver",) * (d + 1)
    values = np.concatenate([s, x, xsum[..., None]], axis=2)
    return PathSet(values, drivers.grid, drivers.seed, drivers.model, labels, roles)
