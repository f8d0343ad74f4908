"""Finite-difference residuals of the pricing equations and pathwise bond checks.

Each model names a linear operator acting on a claim ``g``; a claim that is
tradable in that market makes the operator vanish.  Derivatives use central
differences with a step of ``h * |x_i|`` per coordinate: a fourth-order
stencil for first derivatives, the three-point stencil for second
derivatives, and the four-point stencil for mixed derivatives.

Models and their coefficients
-----------------------------
``two_asset``   point ``(x, y)``; ``rate``, ``sigma``, ``sigma_v``.
``classical``   point ``(t, x)``; ``rate``, ``sigma``; the claim is ``g(t, x)``.
``n_asset``     point ``(x_1..x_N)``; ``rate``, ``vols`` (N x N-1).
                ``mode="printed"`` drops the ``x_i x_j`` factors of the cross terms.
``jump``        point ``(x1, x2, x3)``; ``rate``, ``sigma1``, ``sigma2``, ``mu3``, ``jump``.
``stochvol``    point ``(x1, x2, y1, y2)``; ``rate``, ``beta1``, ``beta2``, ``rho1``,
                ``rho2``, ``rho`` and optional ``link``.  ``mode="printed"`` uses
                ``beta_j`` on the pure volatility-state second derivatives,
                ``mode="squared"`` uses ``beta_j**2``.
``fractional``  point ``(x_1..x_N)``; no coefficients: ``sum x_j g_j - g``.
``dividend``    point ``(x, y)``; ``rate``, ``dividend``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .errors import NumericalError
from .extended import Link
from .pathset import PathSet

DEFAULT_H = 1e-4


class _Stencil:
    def __init__(self, claim: Callable, point: Sequence[float], h: float):
        self.g = claim
        self.x = np.asarray(point, dtype=float)
        if not np.all(np.isfinite(self.x)):
            raise NumericalError("evaluation point is not finite")
        self.steps = h * np.where(self.x != 0.0, np.abs(self.x), 1.0)
        self.f0 = self._eval(self.x)

    def _eval(self, x: np.ndarray) -> float:
        v = float(self.g(*x))
        if not np.isfinite(v):
            raise NumericalError(f"claim is not finite at {x.tolist()}")
        return v

    def _shift(self, *moves: tuple[int, float]) -> float:
        x = self.x.copy()
        for i, k in moves:
            x[i] += k * self.steps[i]
        return self._eval(x)

    def d1(self, i: int) -> float:
        f = self._shift
        return (-f((i, 2)) + 8 * f((i, 1)) - 8 * f((i, -1)) + f((i, -2))) / (12 * self.steps[i])

    def d2(self, i: int) -> float:
        return (self._shift((i, 1)) - 2 * self.f0 + self._shift((i, -1))) / self.steps[i] ** 2

    def dx(self, i: int, j: int) -> float:
        f = self._shift
        num = f((i, 1), (j, 1)) - f((i, 1), (j, -1)) - f((i, -1), (j, 1)) + f((i, -1), (j, -1))
        return num / (4 * self.steps[i] * self.steps[j])


def _two_asset(s: _Stencil, c, mode):
    x, y = s.x
    r, sg, sv = c["rate"], c["sigma"], c["sigma_v"]
    return (r * x * s.d1(0) + r * y * s.d1(1) - r * s.f0
            + 0.5 * sg**2 * x**2 * s.d2(0) + 0.5 * sv**2 * y**2 * s.d2(1)
            + sg * sv * x * y * s.dx(0, 1))


def _classical(s: _Stencil, c, mode):
    _, x = s.x
    r, sg = c["rate"], c["sigma"]
    return s.d1(0) + r * x * s.d1(1) - r * s.f0 + 0.5 * sg**2 * x**2 * s.d2(1)


def _n_asset(s: _Stencil, c, mode):
    x = s.x
    r = c["rate"]
    vols = np.asarray(c["vols"], dtype=float)
    n = x.size
    if vols.shape[0] != n:
        raise ValueError("vols must have one row per coordinate")
    cov = vols @ vols.T
    out = -r * s.f0
    for j in range(n):
        out += r * x[j] * s.d1(j) + 0.5 * cov[j, j] * x[j] ** 2 * s.d2(j)
    for i in range(n):
        for j in range(i + 1, n):
            weight = 1.0 if mode == "printed" else x[i] * x[j]
            out += cov[i, j] * weight * s.dx(i, j)
    return out


def _jump(s: _Stencil, c, mode):
    x1, x2, x3 = s.x
    r, s1, s2 = c["rate"], c["sigma1"], c["sigma2"]
    jump_part = (0.5 * s.d2(0) * x1**2 + 0.5 * s.d2(2) * x3**2 + s.dx(0, 2) * x1 * x3)
    return (r * (x1 * s.d1(0) + x2 * s.d1(1) + x3 * s.d1(2)) - r * s.f0
            + 0.5 * s.d2(0) * (s1 * x1) ** 2 + 0.5 * s.d2(1) * (s2 * x2) ** 2
            + s.dx(0, 1) * s1 * s2 * x1 * x2
            + (r - c["mu3"]) * c["jump"] * jump_part)


def _stochvol(s: _Stencil, c, mode):
    x1, x2, y1, y2 = s.x
    r = c["rate"]
    link = c.get("link") or Link()
    g1, g2 = float(link(y1)), float(link(y2))
    b1, b2 = c["beta1"], c["beta2"]
    p1, p2, p = c["rho1"], c["rho2"], c["rho"]
    e1, e2 = (b1**2, b2**2) if mode == "squared" else (b1, b2)
    return (r * (x1 * s.d1(0) + x2 * s.d1(1) + y1 * s.d1(2) + y2 * s.d1(3)) - r * s.f0
            + 0.5 * s.d2(0) * g1**2 * x1**2 + 0.5 * s.d2(1) * g2**2 * x2**2
            + 0.5 * s.d2(2) * e1 * y1**2 + 0.5 * s.d2(3) * e2 * y2**2
            + s.dx(0, 1) * x1 * x2 * g1 * g2
            + s.dx(0, 2) * x1 * y1 * p1 * g1 * b1 + s.dx(0, 3) * x1 * y2 * p2 * g1 * b2
            + s.dx(1, 2) * x2 * y1 * p1 * g2 * b1 + s.dx(1, 3) * x2 * y2 * p2 * g2 * b2
            + s.dx(2, 3) * y1 * y2 * p * b1 * b2)


def _fractional(s: _Stencil, c, mode):
    return sum(s.x[j] * s.d1(j) for j in range(s.x.size)) - s.f0


def _dividend(s: _Stencil, c, mode):
    x, y = s.x
    r = c["rate"]
    return (r - c["dividend"]) * x * s.d1(0) + r * y * s.d1(1) - r * s.f0


_MODELS = {
    "two_asset": (_two_asset, 2, ("restored",)),
    "classical": (_classical, 2, ("restored",)),
    "n_asset": (_n_asset, None, ("restored", "printed")),
    "jump": (_jump, 3, ("printed",)),
    "stochvol": (_stochvol, 4, ("printed", "squared")),
    "fractional": (_fractional, None, ("restored",)),
    "dividend": (_dividend, 2, ("restored",)),
}

MODELS = tuple(_MODELS)


def pde_residual(model: str, claim: Callable, point: Sequence[float],
                 coefficients: Optional[Mapping] = None, h: float = DEFAULT_H,
                 mode: Optional[str] = None) -> float:
    """Left-hand side of the named pricing equation applied to ``claim`` at ``point``.

    Raises
    ------
    NumericalError
        If the claim or a difference quotient is not finite.
    """
    try:
        fn, dim, modes = _MODELS[model]
    except KeyError:
        raise ValueError(f"unknown model {model!r}; choose from {MODELS}") from None
    mode = mode or modes[0]
    if mode not in modes:
        raise ValueError(f"model {model!r} supports modes {modes}")
    if dim is not None and len(point) != dim:
        raise ValueError(f"model {model!r} expects a {dim}-dimensional point")
    if not h > 0.0:
        raise ValueError("h must be positive")
    stencil = _Stencil(claim, point, h)
    if model != "classical" and not np.all(stencil.x > 0):
        raise ValueError("point must lie strictly inside the positive orthant")
    value = float(fn(stencil, dict(coefficients or {}), mode))
    if not np.isfinite(value):
        raise NumericalError("residual is not finite")
    return value


@dataclass(frozen=True)
class ResidualEstimate:
    value: float
    value_half: float
    claim_value: float

    @property
    def noise_floor(self) -> float:
        """Disagreement between steps ``h`` and ``h/2``."""
        return abs(self.value - self.value_half)


def pde_residual_estimate(model: str, claim: Callable, point: Sequence[float],
                          coefficients: Optional[Mapping] = None, h: float = DEFAULT_H,
                          mode: Optional[str] = None) -> ResidualEstimate:
    """Residual at ``h`` and ``h/2`` with the claim value, for judging how small is small."""
    a = pde_residual(model, claim, point, coefficients, h, mode)
    b = pde_residual(model, claim, point, coefficients, h / 2, mode)
    return ResidualEstimate(a, b, float(claim(*point)))


def bond_path_check(pathset: PathSet, exponents: Sequence[float], rate: float,
                    mode: str = "exponential", driver: str = "Xsum") -> float:
    """Largest deviation of ``sum_j chi_j log(S_j(t) / S_j(0))`` from its target.

    The target is ``rate * t`` for ``mode="exponential"`` and
    ``rate * driver(t)**2`` for ``mode="quadratic"``.
    """
    prices = pathset.prices()
    chi = np.asarray(exponents, dtype=float)
    if chi.shape != (prices.shape[2],):
        raise ValueError(f"{prices.shape[2]} price series but {chi.size} exponents")
    log_ratio = np.log(prices) - np.log(prices[:, :1, :])
    combo = log_ratio @ chi
    if mode == "exponential":
        target = rate * pathset.grid.times[None, :]
    elif mode == "quadratic":
        x = pathset.series(driver)
        target = rate * x * x
    else:
        raise ValueError("mode must be 'exponential' or 'quadratic'")
    return float(np.max(np.abs(combo - target)))
