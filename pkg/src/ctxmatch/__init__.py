"""Contextual Gaussian graph matching.

Samplers for correlated Gaussian graph pairs with node features, the
alignment energy and its exact posterior, matching estimators, and the
Monte Carlo machinery for phase-diagram sweeps and concentration checks.
"""

__version__ = "0.1.0"

from .combinatorics import count_derangements, orbit_size
from .energy import (ENUMERATION_CAP, TOL, HamiltonianBreakdown, LogPartition,
                     Tolerances, coefficients, delta_swap, hamiltonian,
                     log_partition, posterior, posterior_ball_mass)
from .errors import (CoefficientSingularityError, CtxMatchError,
                     DimensionError, EnumerationCapError, ParameterError)
from .estimators import (AnnealConfig, LocalSearchConfig, MatchResult,
                         bayes_ball_estimator, feature_map, local_search_map,
                         map_exhaustive, transposition_energies,
                         transposition_failure_count)
from .model import (Instance, ModelParams, instance_from_json,
                    instance_to_json, relabel_to_identity, sample_instance)
from .perm import (Permutation, overlap, random_permutation,
                   random_with_unfixed, unfixed_edges, unfixed_points)
from .sweep import (SweepCell, SweepConfig, conjecture_annotation,
                    run_phase_sweep, sweep_to_csv, theory_classify)
from .verify import (VerifierReport, budget_rule, partition_trend,
                     verify_gaussian_tails, verify_hstar_concentration,
                     verify_laplace_bound)
