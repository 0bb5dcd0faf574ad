"""Pareto front construction by the epsilon-constraint sweep.

The emission range [E_min, E_max] is split into ``n`` caps. For each cap,
the smoothed cost is minimized subject to ``E(p) <= eps`` by the barrier
solver, with continuation ``mu <- alpha*mu`` warm-started down to the
floor, and multi-start over equispaced seeds guarding against the
multimodal valve-point landscape. Each solved point carries a stationarity
certificate with normalized objective weights.

The certificates are necessary-condition diagnostics: the valve-point cost
is nonconvex, so they do not establish global weak efficiency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .barrier import (BarrierConfig, InfeasibleError, ScalarProblem,
                      SolverStatus, interior_point_seed, solve_barrier)
from .dispatch import DispatchProblem, ReducedProblem, reduce_equality
from .smoothing import SmoothParam

_MULTIPLIER_DROP_TOL = 1e-7
_WARM_T0 = 1e-5


@dataclass(frozen=True)
class EpsilonSchedule:
    """Strictly increasing caps ``e_min + l*tau`` for ``l = 1..n_points``."""

    e_min: float
    e_max: float
    n_points: int
    tau: float
    values: tuple[float, ...]


def build_schedule(bounds: tuple[float, float], n_points: int) -> EpsilonSchedule:
    """Split ``bounds`` into ``n_points`` caps, shifted one step above
    ``e_min`` so every subproblem has a strictly feasible interior."""
    e_min, e_max = float(bounds[0]), float(bounds[1])
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    span = e_max - e_min
    if span <= 1e-9 * max(1.0, abs(e_max)):
        return EpsilonSchedule(e_min, e_max, 1, 0.0, (e_max,))
    tau = span / n_points
    values = tuple(e_min + l * tau for l in range(1, n_points + 1))
    return EpsilonSchedule(e_min, e_max, n_points, tau, values)


@dataclass(frozen=True)
class AKKTCertificate:
    """Stationarity evidence at one solved point.

    ``objective_weights`` are the normalized bi-objective multipliers
    (nonnegative, summing to one); ``constraint_multipliers`` cover the box
    and elimination inequalities after the same normalization, with
    negligible entries dropped to zero.
    """

    objective_weights: tuple[float, float]
    constraint_multipliers: tuple[float, ...]
    stationarity_norm: float
    complementarity_max: float
    mu_at_issue: float


@dataclass
class ParetoPoint:
    p: tuple[float, ...]
    cost_exact: float
    cost_smoothed: float
    emission: float
    epsilon: float
    mu_final: float
    akkt: AKKTCertificate
    solver_status: SolverStatus
    nondominated: bool = False


@dataclass
class FrontReport:
    points: list
    schedule: EpsilonSchedule
    mu_schedule: tuple[float, ...]
    problem_digest: str
    nondominated_indices: tuple[int, ...] = ()
    monotonicity_violations: tuple[int, ...] = ()
    infeasible_epsilons: tuple[float, ...] = ()
    # sum of beta_j * g_j at the final iterate, recorded per point
    complementarity_sums: tuple[float, ...] = ()


def _as_reduced(problem) -> ReducedProblem:
    if isinstance(problem, ReducedProblem):
        return problem
    return reduce_equality(problem)


def _hessian_step(reduced: ReducedProblem, mu: float) -> float:
    # stay well inside curvature features of width ~ sin(mu)/|dv/dp| so the
    # difference quotient tracks the local second derivative near the
    # smoothed valve kinks, without drowning in roundoff
    scale = max(abs(b) for lo_hi in reduced.box for b in lo_hi)
    return max(1e-9, min(1e-7 * (1.0 + scale), 0.02 * math.sin(min(mu, 1.5))))


def emission_bounds(problem) -> tuple[float, float]:
    """Extreme emissions over the reduced feasible set.

    The minimum comes from a barrier solve of the (convex) emission; the
    maximum from enumerating box corners plus a barrier solve on the
    negated emission.
    """
    reduced = _as_reduced(problem)
    cons = reduced.constraint_evaluators()
    emis = reduced.emission_evaluator()
    sp = ScalarProblem(objective=emis, inequalities=cons,
                       dimension=reduced.dimension, bounds=reduced.box)
    seed = interior_point_seed(sp)
    low = solve_barrier(sp, seed, BarrierConfig())
    e_min = low.objective_value

    def neg(y):
        v, g = emis(y)
        return -v, -g

    sp_neg = replace(sp, objective=neg)
    high = solve_barrier(sp_neg, seed, BarrierConfig())
    e_max = -high.objective_value
    for corner in _feasible_corners(reduced, cons):
        e_max = max(e_max, emis(corner)[0])
    if e_max < e_min:
        e_min, e_max = e_max, e_min
    return e_min, e_max


def _feasible_corners(reduced: ReducedProblem, cons):
    if reduced.dimension > 12:
        return
    for mask in range(2 ** reduced.dimension):
        corner = np.array([reduced.box[i][1 - ((mask >> i) & 1)]
                           for i in range(reduced.dimension)])
        if all(con(corner)[0] <= 1e-9 for con in cons):
            yield corner


def _seed_points(reduced: ReducedProblem, sp: ScalarProblem, count: int):
    """Equispaced seeds along the reduced box (strictly feasible ones only),
    plus the max-margin interior point."""
    seeds = []
    lo = np.array([b[0] for b in reduced.box])
    hi = np.array([b[1] for b in reduced.box])
    for i in range(count):
        cand = lo + (i + 0.5) / count * (hi - lo)
        if all(con(cand)[0] < -1e-12 for con in sp.inequalities):
            seeds.append(cand)
    center = interior_point_seed(sp)  # raises InfeasibleError if none exists
    if all(float(np.max(np.abs(center - s))) > 1e-9 for s in seeds):
        seeds.append(center)
    return seeds


def solve_subproblem(problem, epsilon: float, mu_schedule: SmoothParam,
                     seeds: int = 8, kkt_tol: float = 1e-8) -> ParetoPoint:
    """Minimize the smoothed cost under ``E(p) <= epsilon``.

    The first smoothing stage is multi-started over ``seeds`` equispaced
    points (best kept); each further stage shrinks ``mu`` by ``alpha`` and
    warm-starts from the previous solution, until ``mu`` drops below the
    floor. Raises :class:`~smoothdispatch.barrier.InfeasibleError` when the
    cap admits no strictly interior point.
    """
    reduced = _as_reduced(problem)
    cons = reduced.constraint_evaluators(epsilon)
    stages = list(mu_schedule.stages())
    x = None
    result = None
    for k, mu in enumerate(stages):
        sp = ScalarProblem(objective=reduced.smoothed_objective(mu),
                           inequalities=cons, dimension=reduced.dimension,
                           bounds=reduced.box)
        cfg = BarrierConfig(kkt_tol=kkt_tol, hessian_step=_hessian_step(reduced, mu))
        if k == 0:
            # rank the seeds with a truncated weight schedule (enough to
            # identify the basin), then polish only the winner
            screen = replace(cfg, weight_floor=1e-5)
            best = None
            for seed in _seed_points(reduced, sp, seeds):
                res = solve_barrier(sp, seed, screen)
                if best is None or res.objective_value < best.objective_value:
                    best = res
            result = solve_barrier(sp, best.x_star, replace(cfg, t0=_WARM_T0))
        else:
            result = solve_barrier(sp, x, replace(cfg, t0=_WARM_T0))
        x = result.x_star
    mu_final = stages[-1]
    return _make_point(reduced, x, mu_final, epsilon, result)


def _make_point(reduced: ReducedProblem, y, mu_final, epsilon, result) -> ParetoPoint:
    p = reduced.lift(y)
    cost_sm, _ = reduced.cost_smoothed(y, mu_final)
    emis, _ = reduced.emission(y)
    cert = akkt_certificate(reduced, y, mu_final, epsilon, result.multipliers)
    return ParetoPoint(p=tuple(float(v) for v in p),
                       cost_exact=float(reduced.cost_exact(y)),
                       cost_smoothed=float(cost_sm), emission=float(emis),
                       epsilon=float(epsilon), mu_final=float(mu_final),
                       akkt=cert, solver_status=result.status)


def akkt_certificate(reduced: ReducedProblem, y, mu: float, epsilon: float,
                     scalar_multipliers) -> AKKTCertificate:
    """Map the cap multiplier into normalized bi-objective weights and
    measure the stationarity and complementarity residuals.

    With cap multiplier ``beta_E``, the weights are ``(1, beta_E)/(1+beta_E)``
    and every remaining multiplier is divided by ``1 + beta_E``; multipliers
    below 1e-7 are dropped to zero.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    mults = np.asarray(scalar_multipliers, dtype=float)
    beta_cap = float(mults[-1])
    if beta_cap <= _MULTIPLIER_DROP_TOL:
        beta_cap = 0.0
    scale = 1.0 + beta_cap
    # the complement form keeps the float sum of the weights at exactly 1.0
    lam_cost = 1.0 / scale
    weights = (lam_cost, 1.0 - lam_cost)
    box_mults = mults[:-1] / scale
    box_mults[box_mults <= _MULTIPLIER_DROP_TOL] = 0.0

    _, grad_cost = reduced.cost_smoothed(y, mu)
    _, grad_emis = reduced.emission(y)
    residual = weights[0] * grad_cost + weights[1] * grad_emis
    comp = 0.0
    cons = reduced.constraint_evaluators()
    for j, con in enumerate(cons):
        gv, gg = con(y)
        residual = residual + box_mults[j] * gg
        comp = max(comp, abs(box_mults[j] * gv))
    return AKKTCertificate(objective_weights=weights,
                           constraint_multipliers=tuple(box_mults),
                           stationarity_norm=float(np.linalg.norm(residual)),
                           complementarity_max=float(comp),
                           mu_at_issue=float(mu))


def dominance_filter(points) -> list[int]:
    """Indices of the strictly nondominated points (equal pairs all kept).

    A point is dropped iff some other point is <= in both coordinates and
    < in at least one.
    """
    pts = [(float(c), float(e)) for c, e in points]
    kept = []
    for i, (ci, ei) in enumerate(pts):
        dominated = any(
            cj <= ci and ej <= ei and (cj < ci or ej < ei)
            for j, (cj, ej) in enumerate(pts) if j != i)
        if not dominated:
            kept.append(i)
    return kept


def build_front(problem, n_points: int, mu_schedule: SmoothParam,
                seeds: int = 8, kkt_tol: float = 1e-8) -> FrontReport:
    """Full sweep: emission bounds, cap schedule, one subproblem per cap,
    dominance flags. Deterministic for a fixed configuration."""
    reduced = _as_reduced(problem)
    bounds = emission_bounds(reduced)
    schedule = build_schedule(bounds, n_points)
    points = []
    infeasible = []
    comp_sums = []
    for eps in schedule.values:
        try:
            point = solve_subproblem(reduced, eps, mu_schedule,
                                     seeds=seeds, kkt_tol=kkt_tol)
        except InfeasibleError:
            infeasible.append(eps)
            continue
        points.append(point)
        comp_sums.append(_assumption_sum(reduced, point, eps))
    kept = dominance_filter([(pt.cost_exact, pt.emission) for pt in points])
    for i in kept:
        points[i].nondominated = True
    violations = []
    for i in range(1, len(points)):
        if points[i].cost_smoothed > points[i - 1].cost_smoothed + 1e-6:
            violations.append(i)
    return FrontReport(points=points, schedule=schedule,
                       mu_schedule=tuple(mu_schedule.stages()),
                       problem_digest=reduced.problem.digest(),
                       nondominated_indices=tuple(kept),
                       monotonicity_violations=tuple(violations),
                       infeasible_epsilons=tuple(infeasible),
                       complementarity_sums=tuple(comp_sums))


def _assumption_sum(reduced: ReducedProblem, point: ParetoPoint, eps: float) -> float:
    """Monitored (not enforced) sum of multiplier-weighted constraint values."""
    y = np.array([point.p[i] for i in reduced.free_indices])
    total = 0.0
    for j, con in enumerate(reduced.constraint_evaluators()):
        total += point.akkt.constraint_multipliers[j] * con(y)[0]
    return float(total)
