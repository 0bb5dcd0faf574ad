"""Nonsmooth bi-objective dispatch via smoothing and barrier sweeps."""

from .barrier import (BarrierConfig, InfeasibleError, ScalarProblem,
                      SolverResult, SolverStatus, finite_difference_check,
                      interior_point_seed, solve_barrier)
from .dispatch import (DispatchProblem, GeneratorCoefficients,
                       ProblemFormatError, ReducedProblem,
                       builtin_instance_path, cost_exact, cost_smoothed,
                       emission, load_problem, reduce_equality)
from .front import (AKKTCertificate, EpsilonSchedule, FrontReport, ParetoPoint,
                    akkt_certificate, build_front, build_schedule,
                    dominance_filter, emission_bounds, solve_subproblem)
from .oracle import (FrontDistance, GridSpec, default_grid, front_distance,
                     grid_front, grid_min_cost)
from .smoothing import (KernelKind, ProbeReport, SmoothingKernel, SmoothParam,
                        gradient_consistency_probe, phi_plus, phi_plus_grad,
                        smooth_max, smooth_min, theta_abs, theta_abs_grad,
                        theta_abs_vector)

__version__ = "0.1.0"

__all__ = [
    "AKKTCertificate", "BarrierConfig", "DispatchProblem", "EpsilonSchedule",
    "FrontDistance", "FrontReport", "GeneratorCoefficients", "GridSpec",
    "InfeasibleError", "KernelKind", "ParetoPoint", "ProbeReport",
    "ProblemFormatError", "ReducedProblem", "ScalarProblem", "SmoothParam",
    "SmoothingKernel", "SolverResult", "SolverStatus", "akkt_certificate",
    "build_front", "build_schedule", "builtin_instance_path", "cost_exact",
    "cost_smoothed", "default_grid", "dominance_filter", "emission",
    "emission_bounds", "finite_difference_check", "front_distance",
    "gradient_consistency_probe", "grid_front", "grid_min_cost",
    "interior_point_seed", "load_problem", "phi_plus", "phi_plus_grad",
    "reduce_equality", "smooth_max", "smooth_min", "solve_barrier",
    "solve_subproblem", "theta_abs", "theta_abs_grad", "theta_abs_vector",
]
