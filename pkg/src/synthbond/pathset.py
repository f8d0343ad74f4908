"""Time grids, simulated path containers, per-path random substreams and export.

Every simulator draws the randomness of path ``p`` from its own generator,
``path_rng(seed, p)``, which is numpy's ``PCG64`` seeded with
``SeedSequence(seed, spawn_key=(p,))``.  A single path can therefore be
replayed without simulating the others, and results do not depend on how
paths are split across worker threads.
"""

from __future__ import annotations

import csv
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

MAGIC = b"SBPS"
FORMAT_VERSION = 1
# magic, version, reserved, n_paths, n_nodes, n_series, horizon
_HEADER = struct.Struct("<4sHHQQQd")

ROLES = ("price", "vol", "driver")


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``0 = t_0 < ... < t_n = horizon``."""

    horizon: float
    steps: int

    def __post_init__(self):
        if not self.horizon > 0.0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError(f"steps must be a positive integer, got {self.steps}")
        object.__setattr__(self, "steps", int(self.steps))
        object.__setattr__(self, "horizon", float(self.horizon))

    @property
    def dt(self) -> float:
        return self.horizon / self.steps

    @property
    def times(self) -> np.ndarray:
        t = np.arange(self.steps + 1) * self.dt
        t[-1] = self.horizon
        return t

    def index_of(self, t: float) -> int:
        """Node index of time ``t``, which must lie on the grid."""
        k = int(round(t / self.dt))
        if not 0 <= k <= self.steps or abs(k * self.dt - t) > 1e-9 * max(1.0, self.horizon):
            raise ValueError(f"time {t} is not a grid node")
        return k


def path_rng(seed: int, path: int) -> np.random.Generator:
    """Independent generator for path ``path`` of a run seeded with ``seed``."""
    ss = np.random.SeedSequence(int(seed) % 2**64, spawn_key=(int(path),))
    return np.random.Generator(np.random.PCG64(ss))


def thread_count() -> int:
    """Worker threads allowed by ``SYNTHBOND_THREADS`` (unset or 0 means all cores)."""
    raw = os.environ.get("SYNTHBOND_THREADS", "0").strip() or "0"
    n = int(raw)
    if n < 0:
        raise ValueError("SYNTHBOND_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def per_path_draws(seed: int, n_paths: int, draw: Callable[[np.random.Generator], np.ndarray],
                   start: int = 0) -> np.ndarray:
    """Stack ``draw(path_rng(seed, p))`` for paths ``start .. start+n_paths-1``."""
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    first = np.asarray(draw(path_rng(seed, start)))
    out = np.empty((n_paths,) + first.shape, dtype=first.dtype)
    out[0] = first
    workers = min(thread_count(), max(1, n_paths // 1024))

    def fill(lo: int, hi: int) -> None:
        for p in range(lo, hi):
            out[p] = draw(path_rng(seed, start + p))

    if workers == 1 or n_paths < 2:
        fill(1, n_paths)
    else:
        bounds = np.linspace(1, n_paths, workers + 1).astype(int)
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(fill, bounds[:-1], bounds[1:]))
    return out


@dataclass(frozen=True)
class PathSet:
    """Simulated trajectories of shape ``(n_paths, steps + 1, n_series)``.

    ``labels`` names each series and ``roles`` says whether it is a price, a
    volatility state or a driver level.  ``measure`` records whether paths were
    drawn under the physical (``"P"``) or the martingale (``"Q"``) measure.
    """

    values: np.ndarray
    grid: TimeGrid
    seed: int
    model: str
    labels: tuple[str, ...]
    roles: tuple[str, ...]
    measure: str = "P"

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 3:
            raise ValueError("values must be 3-dimensional (paths, nodes, series)")
        if vals.shape[1] != self.grid.steps + 1:
            raise ValueError(f"expected {self.grid.steps + 1} nodes, got {vals.shape[1]}")
        labels, roles = tuple(self.labels), tuple(self.roles)
        if len(labels) != vals.shape[2] or len(roles) != vals.shape[2]:
            raise ValueError("one label and one role per series required")
        bad = [r for r in roles if r not in ROLES]
        if bad:
            raise ValueError(f"unknown series roles {bad}")
        if self.measure not in ("P", "Q"):
            raise ValueError("measure must be 'P' or 'Q'")
        for j, role in enumerate(roles):
            if role == "price" and not np.all(vals[:, :, j] > 0):
                raise ValueError(f"price series {labels[j]!r} is not strictly positive")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "roles", roles)

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]

    def series(self, label: str) -> np.ndarray:
        """``(n_paths, steps + 1)`` view of one series."""
        return self.values[:, :, self.labels.index(label)]

    def indices(self, role: str) -> list[int]:
        return [j for j, r in enumerate(self.roles) if r == role]

    def prices(self) -> np.ndarray:
        return self.values[:, :, self.indices("price")]

    def drivers(self) -> np.ndarray:
        return self.values[:, :, self.indices("driver")]

    def terminal(self) -> np.ndarray:
        return self.values[:, -1, :]

    def to_csv(self, path: str | Path) -> None:
        """One row per ``(path, time)``: ``path_id, t, <series...>``."""
        times = self.grid.times
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["path_id", "t", *self.labels])
            for p in range(self.n_paths):
                for k, t in enumerate(times):
                    w.writerow([p, format_float(t), *(format_float(v) for v in self.values[p, k])])

    def to_binary(self, path: str | Path) -> None:
        """Header ``SBPS``, version, dims and horizon, then little-endian float64 values."""
        n_paths, n_nodes, n_series = self.values.shape
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, 0, n_paths, n_nodes, n_series,
                                  self.grid.horizon))
            fh.write(np.ascontiguousarray(self.values, dtype="<f8").tobytes())


def read_binary(path: str | Path) -> tuple[np.ndarray, float]:
    """Load values and horizon written by :meth:`PathSet.to_binary`."""
    raw = Path(path).read_bytes()
    magic, version, _, n_paths, n_nodes, n_series, horizon = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported format version {version}")
    body = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if body.size != n_paths * n_nodes * n_series:
        raise ValueError("truncated path dump")
    return body.reshape(n_paths, n_nodes, n_series).astype(float), horizon


def format_float(x: float) -> str:
    """17 significant digits, enough to round-trip any float64."""
    return format(float(x), ".17g")


def stack_series(columns: Sequence[np.ndarray]) -> np.ndarray:
    return np.stack(columns, axis=-1)
