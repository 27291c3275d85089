"""Solvers for multi-player zero-sum (Markov) games with networked
separable interactions: structural validation, LP and iterative
equilibrium oracles, value-iteration and fictitious-play dynamics, and
equilibrium-gap metrics."""

from .games import (ConstantDynamics, DenseDynamics, Discounted,
                    EnsembleDynamics, Finite, InteractionGraph, JointMixture,
                    MarkovJointPolicy, NetworkedMarkovGame, PolymatrixGame,
                    ProductPolicy, ValidationReport, auxiliary_game,
                    expected_payoffs, uniform_profile, validate_nmg,
                    validate_polymatrix)
from .decomposition import (DecomposedQTable, DecompositionReport,
                            canonical_q, check_additive,
                            check_reward_structure,
                            check_transition_structure, repair_nonnegative)
from .polymatrix import (AverageResult, GapReport, LPSolution, OracleConfig,
                         fp_matrix, marginalize, matrix_ne_gap,
                         matrix_qre_gap, mwu_diminishing, mwu_fixed, ne_lp,
                         no_regret_avg, omd, omwu, qre_reference,
                         smooth_fp_matrix, solve_matrix_game)
from .markov import (FPResult, MarkovGapReport, StepSchedule,
                     ValueIterationResult, fp_markov, marginalize_markov,
                     markov_cce_gap, markov_ne_gap, star_value_iteration,
                     truncate_horizon, val_operators, value_iteration_ne)

__version__ = "0.1.0"
