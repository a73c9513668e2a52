"""Convex phase retrieval without lifting: anchored maximization, its l1
dual, spectral anchors, closed-form recovery bounds, and geometric oracles."""

from .linalg import (COMPLEX, REAL, Field, Signal, align, angle_between, inner,
                     norm, phase)
from .ensembles import (GAUSSIAN, UNIT_SPHERE, MeasurementEnsemble, NonnegUniform,
                        ProblemInstance, RelativeBounded, SymmetricUniform,
                        apply_noise, gen_instance, instance_from_dict,
                        instance_to_dict, make_approx_at_angle, read_instance,
                        sample_unit_sphere, write_instance)
from .initializers import (RANDOM, SPECTRAL, TRUNCATED_SPECTRAL, InitializerConfig,
                           SpectralResult, make_anchor, random_init, reserve_prefix,
                           spectral_init)
from .solvers import (DualSolution, RecoveryResult, SolverConfig, gerchberg_saxton,
                      operator_norm, recover_phases_from_dual, rre,
                      signal_from_dual, signal_from_phases, solve_basis_pursuit,
                      solve_phasemax)
from .theory import (AppendixBTrace, NoiseErrorBound, TheoryBound,
                     binomial_tail_exact, expected_abs_cos, halfsphere_cover_prob,
                     halfsphere_cover_prob_exact, hoeffding_tail,
                     neighbor_cover_bound, noise_error_bound, nonuniform_bound,
                     phasemax_success_bound, random_init_alpha_floor,
                     random_init_measurement_threshold, regions_count,
                     small_caps_cover_bound, sphere_surface)
from .oracles import (ConeFeasibilityReport, LpResult, caps_cover_sphere,
                      coverage_mc, regions_brute_force, solve_lp, uniqueness_check)
from .experiments import (AT_ANGLE, SweepConfig, SweepRow, SweepTable, TrialRecord,
                          alpha_of_beta, default_m_grid, run_sweep, run_trial,
                          selftest, wilson_interval)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
