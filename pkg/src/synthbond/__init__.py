"""Implied riskless rates, synthetic bonds and their numerical verification
for markets made only of risky assets."""

from .diffusion import (DiffusionMarket, PowerClaim, SyntheticBond, bond_exponents,
                        market_price_of_risk, power_claim_residual, riskless_rate,
                        solve_power_exponent, two_asset_bond_closed_form)
from .errors import (ConfigError, ConsistencyError, DegeneracyError, NumericalError,
                     ProvenanceError, StepSizeError, SynthBondError, WellPosednessError)
from .extended import (JumpMarketBasic, Link, StochVolMarket, bond_exponents_jump,
                       riskless_rate_jump, riskless_rate_jump_general, riskless_rate_stochvol,
                       stochvol_rate_at)
from .fbm import (FbmSpec, fbm_increment_autocov, sample_fbm, sample_rosenblatt,
                  simulate_fractional_asset, simulate_fractional_market)
from .fractional import (FractionalBond, FractionalMarket, arbitrage_portfolio_value,
                         dividend_replication_exponents, fractional_beta,
                         fractional_bond_exponents_multi, fractional_bond_exponents_two_asset,
                         fractional_rate, perpetual_admissibility)
from .pathset import PathSet, TimeGrid, path_rng, read_binary
from .pde import bond_path_check, pde_residual, pde_residual_estimate
from .pricing import (KsrfParams, black_scholes_call, ksrf_hedge_weights, ksrf_price,
                      ksrf_risk_neutral_prob, mc_price)
from .simulate import simulate_diffusion_paths, simulate_jump_paths, simulate_stochvol_paths

__version__ = "0.1.0"
