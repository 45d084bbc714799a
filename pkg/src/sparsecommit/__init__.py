"""Optimal k-sparse commitments in two-player games.

``BACKEND`` names the simplex kernel picked at import: ``"compiled"`` when the
Cython extension is built, ``"python"`` otherwise (or when forced through the
``SPARSECOMMIT_BACKEND`` environment variable).
"""

from ._backend import DEFAULT as BACKEND
from .game import (CommitmentResult, EquilibriumProfile, Game, MixedStrategy, best_response, expected_utility,
                   nash_zero_sum, sse_unconstrained)
from .generators import (BiasedMpParams, CounterexampleParams, gen_biased_matching_pennies, gen_counterexample,
                         gen_random_general_sum_correlated, gen_random_general_sum_opposite, gen_random_zero_sum)
from .lp import LpModel, LpOutcome, LpStatus, lp_solve
from .mip import MilpModel, MipConfig, MipOutcome, MipStatus, mip_solve
from .oracle import (MilpRepresentableSpace, OracleConfig, OracleTrace, build_large_n_milp, combined_solve,
                     double_oracle_solve, single_oracle_solve)
from .paths import PathGame, PathGameSpec, constraint_sets_from_paths, gen_path_game, path_best_response
from .sparse import (ConstraintSetSpec, solve_k_sparse_brute_force, solve_k_sparse_zero_sum, solve_k_uniform,
                     solve_stackelberg_multiple, solve_stackelberg_single, solve_structured,
                     solve_support_restricted)

__all__ = [
    "BACKEND", "BiasedMpParams", "CommitmentResult", "ConstraintSetSpec", "CounterexampleParams",
    "EquilibriumProfile", "Game", "LpModel", "LpOutcome", "LpStatus", "MilpModel", "MilpRepresentableSpace",
    "MipConfig", "MipOutcome", "MipStatus", "MixedStrategy", "OracleConfig", "OracleTrace", "PathGame",
    "PathGameSpec", "best_response", "build_large_n_milp", "combined_solve", "constraint_sets_from_paths",
    "double_oracle_solve", "expected_utility", "gen_biased_matching_pennies", "gen_counterexample",
    "gen_path_game", "gen_random_general_sum_correlated", "gen_random_general_sum_opposite",
    "gen_random_zero_sum", "lp_solve", "mip_solve", "nash_zero_sum", "path_best_response",
    "single_oracle_solve", "solve_k_sparse_brute_force", "solve_k_sparse_zero_sum", "solve_k_uniform",
    "solve_stackelberg_multiple", "solve_stackelberg_single", "solve_structured", "solve_support_restricted",
    "sse_unconstrained",
]
