"""Command-line front end.

Exit status: 0 on success, 1 when a computation or verification fails, 2 on
usage or configuration errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import diffusion as dc
from . import extended as ex
from . import fractional as fr
from .config import MarketFile, load_market_file
from .errors import ConfigError, SynthBondError
from .fbm import FbmSpec, sample_fbm, sample_rosenblatt, simulate_fractional_market
from .pathset import TimeGrid, format_float
from .pricing import KsrfParams, ksrf_price, mc_price
from .report import key_values, rows_to_csv, write_rows
from .simulate import simulate_diffusion_paths, simulate_jump_paths, simulate_stochvol_paths
from .verify import COLUMNS, DEFAULT_PATHS, SUITES, run_suite

DEFAULT_SEED = 0xC0FFEE
ROSENBLATT_NOTE = ("note: Rosenblatt driver uses autocovariance (1 + n^2)^((H-1)/2); "
                   "the exponent sign is a deliberate correction so the sequence is a valid "
                   "long-memory correlation")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated numbers") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="synthbond", description="Implied riskless rates and synthetic bonds "
                                              "for markets of risky assets.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, market=True, paths=False):
        if market:
            sp.add_argument("--market", required=True, type=Path, help="TOML market file")
        sp.add_argument("--output-dir", type=Path, help="write reports here")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        if paths:
            sp.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
            sp.add_argument("--n-paths", type=_positive_int)
            sp.add_argument("--steps", type=_positive_int)
            sp.add_argument("--horizon", type=_positive_float)

    common(sub.add_parser("rate", help="implied riskless rate and market price of risk"))
    common(sub.add_parser("bond", help="synthetic bond exponents"))
    sp = sub.add_parser("simulate", help="simulate price paths")
    common(sp, paths=True)
    sp.add_argument("--binary", action="store_true", help="also write paths.sbps")
    sp.add_argument("--driver", choices=("fbm", "rosenblatt"), default="fbm",
                    help="driver for fractional markets")
    sp = sub.add_parser("price", help="binomial-tree and Monte Carlo price of the [claim]")
    common(sp, paths=True)
    sp = sub.add_parser("verify", help="run verification suites")
    common(sp, market=False, paths=True)
    sp.add_argument("--suite", choices=SUITES + ("all",), default="all")
    sp = sub.add_parser("frac-arb", help="bank-account arbitrage in a fractional market")
    common(sp, market=False, paths=True)
    sp.add_argument("--hurst", type=float, default=0.7)
    sp.add_argument("--rate", type=float, default=0.025)
    sp.add_argument("--driver", choices=("fbm", "rosenblatt"), default="fbm")
    sp = sub.add_parser("beta", help="beta of a portfolio against a market portfolio")
    common(sp)
    sp.add_argument("--portfolio", type=_floats, required=True, help="weights, comma-separated")
    sp.add_argument("--market-portfolio", type=_floats, required=True)
    return p


def _emit(args, name: str, rows: list[dict], columns=None) -> None:
    sys.stdout.write(rows_to_csv(rows, columns))
    if args.output_dir is not None:
        args.output_dir.mkdir(parents=True, exist_ok=True)
        write_rows(rows, args.output_dir / name, args.format, columns)


def _vec(prefix: str, values) -> list[tuple[str, float]]:
    return [(f"{prefix}_{j + 1}", float(v)) for j, v in enumerate(np.ravel(values))]


def _grid(args, mf: Optional[MarketFile], horizon=1.0, steps=256) -> TimeGrid:
    g = mf.grid if mf is not None and mf.grid is not None else TimeGrid(horizon, steps)
    return TimeGrid(args.horizon or g.horizon, args.steps or g.steps)


def cmd_rate(args) -> int:
    mf = load_market_file(args.market)
    m = mf.market
    if mf.kind == "diffusion":
        rate = dc.riskless_rate(m)
        pairs = [("rate", rate)] + _vec("market_price_of_risk", dc.market_price_of_risk(m))
        pairs += _vec("bond_exponent", dc.bond_exponents(m).exponents)
    elif mf.kind == "jump":
        rate = ex.riskless_rate_jump(m)
        pairs = [("rate", rate),
                 ("rate_determinant_form", ex.riskless_rate_jump_general(*m.coefficient_pattern(),
                                                                         m.intensity))]
    elif mf.kind == "stochvol":
        pairs = [("rate_at_initial_states", float(ex.stochvol_rate_at(m, *m.v0)))]
    else:
        bond = fr.fractional_bond_exponents_multi(m)
        pairs = [("fractional_rate", bond.rate)] + _vec("bond_exponent", bond.exponents)
    _emit(args, "rate", key_values(pairs))
    return 0


def cmd_bond(args) -> int:
    mf = load_market_file(args.market)
    m = mf.market
    if mf.kind == "diffusion":
        b = dc.bond_exponents(m)
        pairs = [("rate", b.rate), ("base_value", b.base_value)] + _vec("exponent", b.exponents)
        pairs.append(("max_vol_exposure", float(np.max(np.abs(m.vols.T @ b.exponents)))))
    elif mf.kind == "jump":
        b = ex.bond_exponents_jump(m)
        pairs = [("rate", b.rate), ("normalizer", b.normalizer)] + _vec("exponent", b.exponents)
    elif mf.kind == "fractional":
        b = fr.fractional_bond_exponents_multi(m)
        ok, defect = fr.perpetual_admissibility(b.exponents)
        pairs = [("fractional_rate", b.rate), ("admissibility_defect", defect)]
        pairs += _vec("exponent", b.exponents)
    else:
        raise SynthBondError("stochastic-volatility markets have no synthetic bond construction")
    _emit(args, "bond", key_values(pairs))
    return 0


def _fractional_drivers(args, grid, n_paths, hurst, n_drivers=1):
    if args.driver == "rosenblatt":
        if n_drivers != 1:
            raise SynthBondError("Rosenblatt drivers are supported for two-asset markets only")
        print(ROSENBLATT_NOTE, file=sys.stderr)
        return sample_rosenblatt(hurst, grid, args.seed, n_paths)
    return sample_fbm(FbmSpec(hurst), grid, args.seed, n_paths, n_drivers)


def cmd_simulate(args) -> int:
    mf = load_market_file(args.market)
    grid = _grid(args, mf)
    n = args.n_paths or 1000
    if mf.kind == "diffusion":
        paths = simulate_diffusion_paths(mf.market, grid, args.seed, n)
    elif mf.kind == "jump":
        paths = simulate_jump_paths(mf.market, grid, args.seed, n)
    elif mf.kind == "stochvol":
        paths = simulate_stochvol_paths(mf.market, grid, args.seed, n)
    else:
        drivers = _fractional_drivers(args, grid, n, mf.market.hurst, mf.market.n_assets - 1)
        paths = simulate_fractional_market(mf.market, drivers)
    out = args.output_dir or Path(".")
    out.mkdir(parents=True, exist_ok=True)
    paths.to_csv(out / "paths.csv")
    if args.binary:
        paths.to_binary(out / "paths.sbps")
    pairs = [("n_paths", paths.n_paths), ("steps", grid.steps), ("horizon", grid.horizon),
             ("seed", args.seed)]
    for j in paths.indices("price"):
        pairs.append((f"mean_terminal_{paths.labels[j]}", float(np.mean(paths.values[:, -1, j]))))
    _emit(args, "simulate", key_values(pairs))
    return 0


def cmd_price(args) -> int:
    mf = load_market_file(args.market)
    if mf.kind != "diffusion" or mf.market.n_assets != 2:
        raise SynthBondError("pricing supports two-asset diffusion markets")
    if mf.claim is None:
        raise ConfigError(f"{args.market}: missing section [claim]")
    m, claim = mf.market, mf.claim
    grid = _grid(args, mf, steps=1)
    rate = dc.riskless_rate(m)
    (sig, sig_v) = m.vols[:, 0]
    params = KsrfParams.for_horizon(grid.horizon, claim.tree_steps, m.drifts[0], sig, m.drifts[1],
                                    sig_v, p=claim.p, s0=m.initial_prices[0], v0=m.initial_prices[1])
    payoff = claim.payoff()
    tree = ksrf_price(params, payoff, rate)
    paths = simulate_diffusion_paths(m, grid, args.seed, args.n_paths or DEFAULT_PATHS, measure="Q")
    mc, se = mc_price(paths, payoff, rate)
    pairs = [("rate", rate), ("risk_neutral_probability", tree.q), ("tree_price", tree.price),
             ("tree_max_hedge_residual", tree.max_hedge_residual), ("mc_price", mc),
             ("mc_standard_error", se), ("n_paths", paths.n_paths)]
    _emit(args, "price", key_values(pairs))
    return 0


def cmd_verify(args) -> int:
    if args.suite in ("rosenblatt", "all"):
        print(ROSENBLATT_NOTE, file=sys.stderr)
    checks = run_suite(args.suite, args.seed, args.n_paths or DEFAULT_PATHS)
    rows = [c.row() for c in checks]
    _emit(args, "verify", rows, COLUMNS)
    failed = [c.check_name for c in checks if not c.passed]
    if failed:
        print(f"{len(failed)} check(s) failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def cmd_frac_arb(args) -> int:
    grid = TimeGrid(args.horizon or 1.0, args.steps or 256)
    n = args.n_paths or 1000
    x = _fractional_drivers(args, grid, n, args.hurst).series("X")
    value = fr.arbitrage_portfolio_value(args.rate, x, grid.times[None, :])
    pairs = [("n_paths", n), ("steps", grid.steps), ("hurst", args.hurst), ("rate", args.rate),
             ("initial_value_max", float(np.max(np.abs(value[:, 0])))),
             ("min_value", float(np.min(value))),
             ("positive_terminal_share", float(np.mean(value[:, -1] > 0.0))),
             ("mean_terminal_value", float(np.mean(value[:, -1])))]
    _emit(args, "frac_arb", key_values(pairs))
    return 0 if np.min(value) >= 0.0 and np.all(value[:, 0] == 0.0) else 1


def cmd_beta(args) -> int:
    mf = load_market_file(args.market)
    if mf.kind != "fractional":
        raise SynthBondError("beta needs a fractional market file")
    m = mf.market
    bond = fr.fractional_bond_exponents_multi(m)
    beta, lhs, rhs = fr.fractional_beta(args.portfolio, args.market_portfolio, m.drifts, m.vols,
                                        bond.rate)
    pairs = [("fractional_rate", bond.rate), ("beta", beta), ("excess_drift", lhs),
             ("beta_times_market_excess", rhs), ("relation_gap", lhs - rhs)]
    _emit(args, "beta", key_values(pairs))
    return 0


_COMMANDS = {"rate": cmd_rate, "bond": cmd_bond, "simulate": cmd_simulate, "price": cmd_price,
             "verify": cmd_verify, "frac-arb": cmd_frac_arb, "beta": cmd_beta}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv`` and dispatch; returns the process exit status."""
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (SynthBondError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
