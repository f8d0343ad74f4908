"""TOML market files with ``[market]``, ``[grid]`` and ``[claim]`` sections.

``[market].kind`` selects the model: ``diffusion``, ``jump``, ``stochvol`` or
``fractional``.  Volatility matrices are given row-major, either nested or flat.
Errors name the file, the offending ``section.field`` and its line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from .diffusion import DiffusionMarket
from .errors import ConfigError
from .extended import JumpMarketBasic, Link, StochVolMarket
from .fractional import FractionalMarket
from .pathset import TimeGrid

KINDS = ("diffusion", "jump", "stochvol", "fractional")
CLAIM_TYPES = ("call", "put", "unit", "asset", "power")


@dataclass(frozen=True)
class Claim:
    type: str = "call"
    strike: float = 1.0
    asset: int = 1
    exponents: tuple[float, ...] = ()
    p: float = 0.5
    tree_steps: int = 512

    def payoff(self):
        """Callable of the terminal asset prices (one array per asset)."""
        k, j = self.strike, self.asset - 1
        if self.type == "call":
            return lambda *s: np.maximum(s[j] - k, 0.0)
        if self.type == "put":
            return lambda *s: np.maximum(k - s[j], 0.0)
        if self.type == "unit":
            return lambda *s: np.ones_like(s[0])
        if self.type == "asset":
            return lambda *s: s[j]
        a = self.exponents

        def power(*s):
            out = np.ones_like(s[0])
            for x, e in zip(s, a):
                out = out * np.power(x, e)
            return out
        return power


@dataclass(frozen=True)
class MarketFile:
    path: Path
    kind: str
    market: Any
    grid: Optional[TimeGrid]
    claim: Optional[Claim]
    raw: dict = field(repr=False, default_factory=dict)


class _Doc:
    def __init__(self, path: Path, text: str, data: dict):
        self.path, self.lines, self.data = path, text.splitlines(), data

    def line_of(self, section: str, key: Optional[str] = None) -> Optional[int]:
        current = None
        for no, line in enumerate(self.lines, 1):
            stripped = line.strip()
            m = re.match(r"^\[([^\[\]]+)\]", stripped)
            if m:
                current = m.group(1).strip()
                if key is None and current == section:
                    return no
                continue
            if current == section and key and re.match(rf"^{re.escape(key)}\s*=", stripped):
                return no
        return None

    def fail(self, section: str, key: Optional[str], msg: str) -> ConfigError:
        where = f"{section}.{key}" if key else f"[{section}]"
        line = self.line_of(section, key)
        loc = f"{self.path}:{line}" if line else f"{self.path}"
        return ConfigError(f"{loc}: {where}: {msg}")

    def section(self, name: str, required: bool = True) -> Optional[dict]:
        sec = self.data.get(name)
        if sec is None:
            if required:
                raise ConfigError(f"{self.path}: missing section [{name}]")
            return None
        if not isinstance(sec, dict):
            raise self.fail(name, None, "must be a table")
        return sec

    def number(self, section: str, key: str, default=None, *, integer=False):
        sec = self.data.get(section, {})
        if key not in sec:
            if default is None:
                raise self.fail(section, key, "required field is missing")
            return default
        v = sec[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise self.fail(section, key, f"expected a number, got {type(v).__name__}")
        if integer:
            if int(v) != v:
                raise self.fail(section, key, f"expected an integer, got {v}")
            return int(v)
        return float(v)

    def vector(self, section: str, key: str, length: Optional[int] = None, default=None):
        sec = self.data.get(section, {})
        if key not in sec:
            if default is None:
                raise self.fail(section, key, "required field is missing")
            return default
        v = sec[key]
        if not isinstance(v, list) or not all(
                isinstance(e, (int, float)) and not isinstance(e, bool) for e in v):
            raise self.fail(section, key, "expected an array of numbers")
        if length is not None and len(v) != length:
            raise self.fail(section, key, f"expected {length} entries, got {len(v)}")
        return [float(e) for e in v]

    def matrix(self, section: str, key: str, rows: int, cols: int) -> np.ndarray:
        sec = self.data.get(section, {})
        if key not in sec:
            raise self.fail(section, key, "required field is missing")
        v = sec[key]
        try:
            arr = np.array(v, dtype=float)
        except (TypeError, ValueError):
            raise self.fail(section, key, "expected numbers") from None
        if arr.size != rows * cols:
            raise self.fail(section, key, f"expected {rows}x{cols} = {rows * cols} entries, "
                                          f"got {arr.size}")
        return arr.reshape(rows, cols)

    def string(self, section: str, key: str, choices, default=None) -> str:
        sec = self.data.get(section, {})
        v = sec.get(key, default)
        if v is None:
            raise self.fail(section, key, "required field is missing")
        if v not in choices:
            raise self.fail(section, key, f"expected one of {list(choices)}, got {v!r}")
        return v


def _build_market(doc: _Doc, kind: str):
    if kind == "diffusion":
        mu = doc.vector("market", "drifts")
        n = len(mu)
        if n < 2:
            raise doc.fail("market", "drifts", "need at least 2 assets")
        vols = doc.matrix("market", "vols", n, n - 1)
        s0 = doc.vector("market", "initial_prices", n, default=[1.0] * n)
        return DiffusionMarket(mu, vols, s0)
    if kind == "fractional":
        mu = doc.vector("market", "drifts")
        n = len(mu)
        if n < 2:
            raise doc.fail("market", "drifts", "need at least 2 assets")
        vols = doc.matrix("market", "vols", n, n - 1)
        s0 = doc.vector("market", "initial_prices", n, default=[1.0] * n)
        return FractionalMarket(doc.number("market", "hurst"), mu, vols, s0)
    if kind == "jump":
        return JumpMarketBasic(
            tuple(doc.vector("market", "drifts", 3)),
            doc.number("market", "sigma1"), doc.number("market", "sigma2"),
            doc.number("market", "jump"), doc.number("market", "intensity"),
            tuple(doc.vector("market", "initial_prices", 3, default=[1.0] * 3)))
    link = Link(doc.string("market", "link", ("power", "log"), default="power"),
                doc.number("market", "link_exponent", 0.5))
    names = ("mu1", "mu2", "alpha1", "alpha2", "beta1", "beta2", "rho1", "rho2", "rho")
    vals = {k: doc.number("market", k) for k in names}
    return StochVolMarket(**vals, link=link,
                          s0=tuple(doc.vector("market", "initial_prices", 2, default=[1.0, 1.0])),
                          v0=tuple(doc.vector("market", "initial_vol_states", 2,
                                              default=[0.04, 0.09])))


def load_market_file(path: str | Path) -> MarketFile:
    """Parse and validate a market file.

    Raises
    ------
    ConfigError
        On missing files, TOML syntax errors or invalid fields; the message
        carries the file, line and field.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read market file ({exc.strerror})") from None
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    doc = _Doc(path, text, data)
    doc.section("market")
    kind = doc.string("market", "kind", KINDS, default="diffusion")
    try:
        market = _build_market(doc, kind)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{path}:{doc.line_of('market') or ''}: [market]: {exc}") from None

    grid = None
    if doc.section("grid", required=False) is not None:
        try:
            grid = TimeGrid(doc.number("grid", "horizon", 1.0),
                            doc.number("grid", "steps", 256, integer=True))
        except ValueError as exc:
            raise doc.fail("grid", None, str(exc)) from None

    claim = None
    if doc.section("claim", required=False) is not None:
        ctype = doc.string("claim", "type", CLAIM_TYPES, default="call")
        exps = ()
        if ctype == "power":
            exps = tuple(doc.vector("claim", "exponents"))
        asset = doc.number("claim", "asset", 1, integer=True)
        if asset < 1:
            raise doc.fail("claim", "asset", "asset index is 1-based")
        claim = Claim(ctype, doc.number("claim", "strike", 1.0), asset, exps,
                      doc.number("claim", "p", 0.5),
                      doc.number("claim", "tree_steps", 512, integer=True))
    return MarketFile(path, kind, market, grid, claim, data)
