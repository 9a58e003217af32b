"""Mean-variance hedging on finite scenario trees.

Backward recursions for the quadratic value coefficients, feedback
hedging strategies, martingale-measure densities, exact brute-force
oracles, and a seeded jump-diffusion Monte Carlo companion.
"""

from .coefficients import (AdjustmentControls, CoefficientTriple,
                           coefficient_system,
                           deterministic_tradeoff_solution,
                           opportunity_process, psi_and_g)
from .hedging import (hedging_error, optimal_strategy, value_at,
                      verify_optimality)
from .measures import (DensityProcess, arai_example_check, conditional_price,
                       dual_value_check, equivalence_check,
                       minimal_martingale_density, vomm_density)
from .tree import (AdaptedProcess, ArbitrageError, Node, PredictableControl,
                   ScenarioTree, TreeStructureError, cond_exp,
                   doob_decomposition, lambda_and_tradeoff,
                   no_arbitrage_check, stochastic_exponential, validate_tree)

__version__ = "0.1.0"

__all__ = [
    "AdaptedProcess", "AdjustmentControls", "ArbitrageError",
    "CoefficientTriple", "DensityProcess", "Node", "PredictableControl",
    "ScenarioTree", "TreeStructureError", "arai_example_check",
    "coefficient_system", "cond_exp", "conditional_price",
    "deterministic_tradeoff_solution", "doob_decomposition",
    "dual_value_check", "equivalence_check", "hedging_error",
    "lambda_and_tradeoff", "minimal_martingale_density",
    "no_arbitrage_check", "opportunity_process", "optimal_strategy",
    "psi_and_g", "stochastic_exponential", "validate_tree", "value_at",
    "verify_optimality", "vomm_density",
]
