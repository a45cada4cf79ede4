"""Spectral enclosures, Hardy inequalities and stability tests for discrete Robin Laplacians on the half-line."""
from ._backend import BACKEND
from .enclosure import (EnclosureCurve, OptimalityWitness, PolarGrid, RealBoundaryProbe, boundary_point_on_ray,
                        construct_optimality_witness, enclosure_indicator, simple_enclosure_member,
                        real_boundary_near_misses, trace_boundaries, trace_boundary)
from .errors import (ConfigError, ContourTooClose, ConvergenceFailure, DivergentTail, DomainError,
                     EmptyCurve, NotOnBoundary, NumericalError, ParamError, PoleError, RealTarget,
                     RobinSpectraError, SizeError, SuperharmonicityViolation)
from .hardy import (GeneratorSequence, HardyWeight, WeightKind, certificate_bound, generated_weight,
                    generated_weights, identity_residual, identity_terms, neumann_criticality_demo,
                    optimality_certificate, q_max, tail_rayleigh_minimum, weight)
from .lattice import (CouplingClass, Decay, Potential, RobinCoupling, SpectralPoint, TridiagonalMatrix,
                      build_truncation, difference_backward, difference_forward, duality_transform,
                      inverse_joukowski, joukowski)
from .resolvent import (EigenSolution, GreenKernelEvaluator, eigenvector, g_a, g_m_max, g_m_theta,
                        gamma_a, green_entry, green_evaluator, kernel_global_max, sup_attaining_site)
from .spectra import (EigenReport, bs_norm, characteristic_polynomial, count_outside_band,
                      critical_operator_spectrum, eigenvalues_dense, orthopoly_eval, orthopoly_zeros,
                      rank_one_eigenvalues_exact, stable_under_doubling, verify_in_truncation)
from .stability import (Evidence, KPrimeKernel, Level, NormBracket, StabilityVerdict, best_hardy_ratio,
                        form_subordination_min_eig, hardy_pointwise_condition, hardy_ratio,
                        kprime_hs_norm_sq, kprime_op_norm, verdict, weighted_l1_sum)

__version__ = "0.1.0"
