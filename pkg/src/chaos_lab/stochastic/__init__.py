"""Monte Carlo engines for the classical processes dual to size growth."""
from .chain_mc import mc_chain_master
from .dr import (DRParams0d, DRParamsChain, dr_chain_mean_field, front_position,
                 logistic_solution, mc_dot_dr, mc_dr_chain, single_scramblon)
from .ensemble import BLOCK, EnsembleStats, run_ensemble
from .rng import resolve_workers, trajectory_rng
from .sde import euler_maruyama

__all__ = [
    "DRParams0d", "DRParamsChain", "EnsembleStats", "BLOCK", "run_ensemble",
    "trajectory_rng", "resolve_workers", "mc_dot_dr", "mc_dr_chain", "single_scramblon",
    "logistic_solution", "dr_chain_mean_field", "front_position", "mc_chain_master",
    "euler_maruyama",
]
