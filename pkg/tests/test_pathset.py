import csv

import numpy as np
import pytest

from synthbond import DiffusionMarket, PathSet, TimeGrid, path_rng, read_binary, simulate_diffusion_paths
from synthbond.pathset import per_path_draws, thread_count


def small_pathset():
    m = DiffusionMarket.two_asset(0.10, 0.30, 0.05, 0.10, 100.0, 50.0)
    return simulate_diffusion_paths(m, TimeGrid(1.0, 4), 7, 3)


def test_grid():
    g = TimeGrid(2.0, 8)
    assert g.dt == 0.25
    assert g.times[0] == 0.0 and g.times[-1] == 2.0 and len(g.times) == 9
    assert g.index_of(0.5) == 2
    with pytest.raises(ValueError):
        g.index_of(0.3)
    for bad in [(0.0, 4), (1.0, 0), (1.0, 2.5)]:
        with pytest.raises(ValueError):
            TimeGrid(*bad)


def test_grid_last_node_is_exact():
    g = TimeGrid(0.3, 7)
    assert g.times[-1] == 0.3


def test_path_rng_is_reproducible_and_distinct():
    a = path_rng(5, 3).standard_normal(4)
    assert np.array_equal(a, path_rng(5, 3).standard_normal(4))
    assert not np.array_equal(a, path_rng(5, 4).standard_normal(4))
    assert not np.array_equal(a, path_rng(6, 3).standard_normal(4))


def test_negative_seed_wraps():
    assert np.array_equal(path_rng(-1, 0).random(3), path_rng(2**64 - 1, 0).random(3))


def test_single_path_replay():
    full = per_path_draws(11, 50, lambda g: g.standard_normal(3))
    assert np.array_equal(full[37], path_rng(11, 37).standard_normal(3))
    tail = per_path_draws(11, 10, lambda g: g.standard_normal(3), start=40)
    assert np.array_equal(full[40:], tail)


@pytest.mark.parametrize("threads", ["1", "2", "4"])
def test_results_independent_of_thread_count(monkeypatch, threads):
    ref = per_path_draws(3, 5000, lambda g: g.standard_normal(2))
    monkeypatch.setenv("SYNTHBOND_THREADS", threads)
    assert thread_count() == int(threads)
    assert np.array_equal(per_path_draws(3, 5000, lambda g: g.standard_normal(2)), ref)


def test_thread_env_validation(monkeypatch):
    monkeypatch.setenv("SYNTHBOND_THREADS", "-2")
    with pytest.raises(ValueError):
        thread_count()
    monkeypatch.setenv("SYNTHBOND_THREADS", "0")
    assert thread_count() >= 1


def test_per_path_draws_rejects_empty():
    with pytest.raises(ValueError):
        per_path_draws(0, 0, lambda g: g.random())


def test_pathset_accessors():
    ps = small_pathset()
    assert ps.n_paths == 3
    assert ps.labels == ("S1", "S2", "B1")
    assert ps.prices().shape == (3, 5, 2) and ps.drivers().shape == (3, 5, 1)
    assert np.all(ps.series("S1")[:, 0] == 100.0)
    assert ps.terminal().shape == (3, 3)
    with pytest.raises(ValueError):
        ps.values[0, 0, 0] = 1.0


def test_pathset_validation():
    g = TimeGrid(1.0, 2)
    ok = np.ones((2, 3, 1))
    with pytest.raises(ValueError):
        PathSet(np.ones((2, 3)), g, 0, "x", ("S",), ("price",))
    with pytest.raises(ValueError):
        PathSet(np.ones((2, 4, 1)), g, 0, "x", ("S",), ("price",))
    with pytest.raises(ValueError):
        PathSet(ok, g, 0, "x", ("S", "T"), ("price",))
    with pytest.raises(ValueError):
        PathSet(ok, g, 0, "x", ("S",), ("bond",))
    with pytest.raises(ValueError):
        PathSet(ok, g, 0, "x", ("S",), ("price",), measure="R")
    with pytest.raises(ValueError):
        PathSet(-ok, g, 0, "x", ("S",), ("price",))
    PathSet(-ok, g, 0, "x", ("W",), ("driver",))


def test_csv_round_trip(tmp_path):
    ps = small_pathset()
    ps.to_csv(tmp_path / "p.csv")
    with open(tmp_path / "p.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["path_id", "t", "S1", "S2", "B1"]
    assert len(rows) == 1 + 3 * 5
    back = np.array([[float(x) for x in r[2:]] for r in rows[1:]]).reshape(3, 5, 3)
    assert np.array_equal(back, ps.values)
    assert (tmp_path / "p.csv").read_bytes().count(b"\r") == 0


def test_binary_round_trip(tmp_path):
    ps = small_pathset()
    ps.to_binary(tmp_path / "p.bin")
    values, horizon = read_binary(tmp_path / "p.bin")
    assert np.array_equal(values, ps.values) and horizon == 1.0
    assert (tmp_path / "p.bin").read_bytes()[:4] == b"SBPS"


def test_binary_rejects_corruption(tmp_path):
    ps = small_pathset()
    ps.to_binary(tmp_path / "p.bin")
    raw = (tmp_path / "p.bin").read_bytes()
    (tmp_path / "bad.bin").write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(ValueError, match="magic"):
        read_binary(tmp_path / "bad.bin")
    (tmp_path / "short.bin").write_bytes(raw[:-8])
    with pytest.raises(ValueError, match="truncated"):
        read_binary(tmp_path / "short.bin")
