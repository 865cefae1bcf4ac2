"""Exact weight calculus, block-model samplers and good-model counting."""

from .errors import (AxiomViolation, BudgetExceeded, EmptyFiber, FgelError,
                     FrequencyMismatch, Inconsistent, InfeasibleRepair,
                     MarginalNotDenominatorN, NonIntegerResult, NotNormalized,
                     RejectBudgetExceeded, ShapeMismatch)
from .weights import (Alphabet, DenominatorNWeight, Weight, as_denominator_n,
                      atomic_alphabet, ball_alphabet, diagonal_weight,
                      F_of_weight, product_alphabet, product_weight, project_a,
                      project_b, project_b_counts, project_radii,
                      project_radius, project_root, pushforward_weight,
                      to_fraction, validate_weight, weight_distance,
                      weight_from_counts)
from .markov import (MarkovMeasure, Observable, ball_weight,
                     conditional_entropy_level0, entropy_of_observable,
                     f_markov, F_observable, F_rel, f_rel_bracket, F_truncated,
                     subtree_marginal)
from .realize import (BallLabeling, Homomorphism, Labeling, ball_refine,
                      check_ball_consistency, hom_from_lists, identity_hom,
                      labeling_from_symbols, marginal_rounding_bound,
                      realize_weight, round_denominator_n, round_with_marginal)
from .sampler import (SBMSpec, SoficResult, enumerate_fiber, is_sofic, rng_for,
                      sbm_sample, sbm_sample_k0, sbm_sample_many, uniform_hom)
from .census import (CountReport, dstar_empirical, dstar_via_ball_pairs,
                     dstar_via_materialized, empirical_weight,
                     enumerate_good_models, expected_planted_count_exact,
                     growth_rate_experiment, joining_search, plant_good_pair,
                     z_n, z_n_bruteforce, zbounds_check)
from .words import BallIndex, ball_index, ball_size, parse_word, word_str

__version__ = "0.1.0"
