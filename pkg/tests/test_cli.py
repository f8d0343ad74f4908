import csv
import io
import subprocess
import sys
from pathlib import Path

import pytest

from synthbond.cli import run
from synthbond.pathset import read_binary

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def table(text):
    return {r["quantity"]: r["value"] for r in csv.DictReader(io.StringIO(text))}


def test_rate(capsys):
    assert run(["rate", "--market", str(CONFIGS / "two_asset.toml")]) == 0
    out = table(capsys.readouterr().out)
    assert float(out["rate"]) == pytest.approx(0.025)
    assert float(out["market_price_of_risk_1"]) == pytest.approx(0.25)


@pytest.mark.parametrize("name, key", [("jump", "rate"), ("stochvol", "rate_at_initial_states"),
                                       ("fractional", "fractional_rate"),
                                       ("three_asset", "rate")])
def test_rate_all_kinds(capsys, name, key):
    assert run(["rate", "--market", str(CONFIGS / f"{name}.toml")]) == 0
    assert key in table(capsys.readouterr().out)


def test_bond_json_output(tmp_path, capsys):
    assert run(["bond", "--market", str(CONFIGS / "fractional.toml"), "--output-dir",
                str(tmp_path), "--format", "json"]) == 0
    out = table(capsys.readouterr().out)
    assert float(out["exponent_1"]) == pytest.approx(-0.5)
    assert float(out["exponent_2"]) == pytest.approx(1.5)
    assert (tmp_path / "bond.json").exists()


def test_stochvol_bond_is_a_computation_error(capsys):
    assert run(["bond", "--market", str(CONFIGS / "stochvol.toml")]) == 1
    assert "no synthetic bond" in capsys.readouterr().err


def test_simulate_writes_csv_and_binary(tmp_path, capsys):
    args = ["simulate", "--market", str(CONFIGS / "two_asset.toml"), "--n-paths", "5",
            "--steps", "8", "--seed", "7", "--binary", "--output-dir", str(tmp_path)]
    assert run(args) == 0
    first = (tmp_path / "paths.csv").read_bytes()
    values, horizon = read_binary(tmp_path / "paths.sbps")
    assert values.shape == (5, 9, 3) and horizon == 1.0
    assert run(args) == 0
    assert (tmp_path / "paths.csv").read_bytes() == first
    assert "mean_terminal_S1" in capsys.readouterr().out


def test_simulate_rosenblatt_prints_note(tmp_path, capsys):
    assert run(["simulate", "--market", str(CONFIGS / "fractional.toml"), "--driver",
                "rosenblatt", "--n-paths", "3", "--steps", "4", "--output-dir",
                str(tmp_path)]) == 0
    assert "Rosenblatt" in capsys.readouterr().err


def test_price(capsys):
    assert run(["price", "--market", str(CONFIGS / "two_asset.toml"), "--n-paths", "20000"]) == 0
    out = table(capsys.readouterr().out)
    tree, mc, se = (float(out[k]) for k in ("tree_price", "mc_price", "mc_standard_error"))
    assert abs(tree - mc) < 4 * se
    assert float(out["risk_neutral_probability"]) == pytest.approx(0.5 - 0.25 * 0.5 / 512**0.5)


def test_price_needs_claim(capsys):
    assert run(["price", "--market", str(CONFIGS / "three_asset.toml")]) == 1


def test_verify_reduced(tmp_path, capsys):
    assert run(["verify", "--suite", "diffusion", "--n-paths", "2000", "--seed", "5",
                "--output-dir", str(tmp_path)]) == 0
    rows = list(csv.DictReader(io.StringIO((tmp_path / "verify.csv").read_text())))
    assert list(rows[0]) == ["check_name", "model", "n_paths", "steps", "statistic", "tolerance",
                             "pass"]
    assert all(r["pass"] == "true" for r in rows)


def test_frac_arb(capsys):
    assert run(["frac-arb", "--n-paths", "50", "--steps", "16"]) == 0
    out = table(capsys.readouterr().out)
    assert float(out["min_value"]) >= 0.0 and float(out["initial_value_max"]) == 0.0


def test_beta(capsys):
    assert run(["beta", "--market", str(CONFIGS / "fractional.toml"), "--portfolio", "0.4,0.6",
                "--market-portfolio", "0.4,0.6"]) == 0
    out = table(capsys.readouterr().out)
    assert float(out["beta"]) == 1.0
    assert run(["beta", "--market", str(CONFIGS / "fractional.toml"), "--portfolio", "1",
                "--market-portfolio", "0.4,0.6"]) == 1


def test_usage_errors(capsys):
    assert run([]) == 2
    assert run(["rate"]) == 2
    assert run(["simulate", "--market", "x.toml", "--n-paths", "0"]) == 2
    assert run(["verify", "--suite", "nope"]) == 2
    assert run(["verify", "--seed", "-1"]) == 2
    assert "error" in capsys.readouterr().err


def test_config_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text('[market]\ndrifts = [0.1, 0.05]\nvols = "x"\n')
    assert run(["rate", "--market", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "bad.toml:3" in err and "market.vols" in err
    assert run(["rate", "--market", str(tmp_path / "missing.toml")]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "synthbond.cli", "rate", "--market",
                           str(CONFIGS / "two_asset.toml")], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("quantity,value\n")
