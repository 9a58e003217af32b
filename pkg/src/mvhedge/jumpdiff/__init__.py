from .backend import HAVE_COMPILED, available_backends, get_kernel
from .model import (JumpDiffusionParams, PathBatch, PureInvestmentEstimate,
                    SimulationError, bsde_residual, closed_form_opportunity,
                    mc_pure_investment, simulate_paths)

__all__ = [
    "HAVE_COMPILED", "available_backends", "get_kernel",
    "JumpDiffusionParams", "PathBatch", "PureInvestmentEstimate",
    "SimulationError", "bsde_residual", "closed_form_opportunity",
    "mc_pure_investment", "simulate_paths",
]
