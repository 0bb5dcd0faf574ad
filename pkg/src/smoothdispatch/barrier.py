"""Log-barrier interior-point solver for small smooth NLPs.

Minimizes ``f(x)`` subject to ``g_j(x) <= 0`` by damped Newton steps on
``f(x) - w * sum(log(-g_j(x)))`` over a geometrically shrinking weight
schedule. All iterates stay strictly feasible (fraction-to-boundary rule).

Multipliers: the barrier formula ``w / (-g_j)`` is kept for reference, but
the reported multipliers and KKT residual come from a nonnegative
least-squares fit over the near-active constraints. Near an active
constraint the barrier formula's residual is quantization-limited in
float64 (its curvature ``beta^2 |grad g|^2 / w`` times one ulp of ``x``
far exceeds any useful tolerance), while the fitted residual is smooth.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import nnls

FRACTION_TO_BOUNDARY = 0.995
_STAGE_ITER_CAP = 40
_MAX_BACKTRACKS = 45


class InfeasibleError(ValueError):
    """The feasible region has no strict interior (or none was found)."""


class SolverStatus(enum.Enum):
    CONVERGED = "converged"
    ITERATION_LIMIT = "iteration_limit"
    INFEASIBLE = "infeasible"


Evaluator = Callable[[np.ndarray], tuple[float, np.ndarray]]


@dataclass(frozen=True)
class ScalarProblem:
    """A scalar objective with inequality constraints ``g_j(x) <= 0``.

    Every evaluator maps a point to ``(value, gradient)``. ``bounds`` is an
    optional per-coordinate box used only for seeding heuristics.
    """

    objective: Evaluator
    inequalities: tuple[Evaluator, ...]
    dimension: int
    bounds: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "inequalities", tuple(self.inequalities))
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if self.bounds is not None and len(self.bounds) != self.dimension:
            raise ValueError("bounds length must match dimension")


@dataclass(frozen=True)
class BarrierConfig:
    t0: float = 1.0
    shrink: float = 0.2
    weight_floor: float = 1e-9
    kkt_tol: float = 1e-8
    max_newton: int = 200
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    hessian_step: float | None = None
    active_tol: float = 1e-5
    keep_trace: bool = False

    def __post_init__(self):
        if self.t0 <= 0.0 or self.weight_floor <= 0.0 or self.kkt_tol <= 0.0:
            raise ValueError("t0, weight_floor and kkt_tol must be positive")
        if not 0.0 < self.shrink < 1.0:
            raise ValueError("shrink must lie in (0, 1)")
        if not 0.0 < self.armijo_c < 1.0:
            raise ValueError("armijo_c must lie in (0, 1)")
        if not 0.0 < self.backtrack < 1.0:
            raise ValueError("backtrack must lie in (0, 1)")
        if self.max_newton < 1:
            raise ValueError("max_newton must be >= 1")


@dataclass
class SolverResult:
    x_star: np.ndarray
    objective_value: float
    multipliers: np.ndarray
    kkt_residual: float
    newton_iterations: int
    status: SolverStatus
    barrier_multipliers: np.ndarray = field(default_factory=lambda: np.zeros(0))
    final_weight: float = 0.0
    trace: list = field(default_factory=list)


def _constraint_values(problem: ScalarProblem, x: np.ndarray) -> np.ndarray:
    return np.array([con(x)[0] for con in problem.inequalities])


def _barrier_eval(problem: ScalarProblem, x: np.ndarray, w: float,
                  need_grad: bool = True):
    """Return (B, grad_B, g_values); B is +inf if x is not strictly feasible."""
    g_vals = np.empty(len(problem.inequalities))
    grad = None
    if need_grad:
        f, gf = problem.objective(x)
        grad = np.array(gf, dtype=float, copy=True)
    else:
        f = problem.objective(x)[0]
    value = f
    for j, con in enumerate(problem.inequalities):
        if need_grad:
            gv, gg = con(x)
        else:
            gv = con(x)[0]
        g_vals[j] = gv
        if gv >= 0.0:
            return math.inf, grad, g_vals
        value -= w * math.log(-gv)
        if need_grad:
            grad += (w / -gv) * gg
    return value, grad, g_vals


def _fd_hessian(problem: ScalarProblem, x, grad, w, step):
    """Forward-difference Hessian of the barrier from analytic gradients.

    Falls back to a backward difference when the forward trial point leaves
    the strict interior (the usual case within one step of a wall).
    """
    n = x.size
    hess = np.empty((n, n))
    for i in range(n):
        h = step if step is not None else 1e-7 * (1.0 + abs(x[i]))
        for trial_h in (h, -h, 0.25 * h, -0.25 * h):
            xt = x.copy()
            xt[i] += trial_h
            bt, gt, _ = _barrier_eval(problem, xt, w)
            if math.isfinite(bt):
                hess[:, i] = (gt - grad) / trial_h
                break
        else:
            hess[:, i] = 0.0
            hess[i, i] = 1.0
    return 0.5 * (hess + hess.T)


def _newton_direction(hess, grad):
    """Solve H d = -g with a diagonal shift until H is positive definite."""
    shift = 0.0
    base = max(1e-12, 1e-12 * float(np.max(np.abs(np.diag(hess)))))
    eye = np.eye(hess.shape[0])
    for _ in range(80):
        try:
            np.linalg.cholesky(hess + shift * eye)
            d = np.linalg.solve(hess + shift * eye, -grad)
            if np.all(np.isfinite(d)) and float(d @ grad) < 0.0:
                return d
        except np.linalg.LinAlgError:
            pass
        shift = base if shift == 0.0 else 10.0 * shift
    return -grad  # last resort: steepest descent


def solve_barrier(problem: ScalarProblem, x0, config: BarrierConfig | None = None
                  ) -> SolverResult:
    """Run the weight schedule ``t0, t0*shrink, ...`` down to ``weight_floor``,
    Newton-minimizing the barrier at each weight from the previous solution.

    ``x0`` must be strictly feasible. Returns the final iterate with fitted
    multipliers; status is CONVERGED iff the fitted stationarity residual
    meets ``kkt_tol``.
    """
    cfg = config or BarrierConfig()
    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    if x.size != problem.dimension:
        raise ValueError(f"x0 has size {x.size}, expected {problem.dimension}")
    g0 = _constraint_values(problem, x)
    if np.any(g0 >= 0.0):
        bad = int(np.argmax(g0))
        raise ValueError(
            f"x0 is not strictly feasible: constraint {bad} has value {g0[bad]:g}")

    iterations = 0
    trace = []
    w = cfg.t0
    while True:
        inner_tol = max(cfg.kkt_tol, 0.05 * w)
        best_gnorm = math.inf
        best_x = x
        tiny_steps = 0
        for _ in range(_STAGE_ITER_CAP):
            if iterations >= cfg.max_newton:
                break
            bval, grad, g_vals = _barrier_eval(problem, x, w)
            gnorm = float(np.linalg.norm(grad))
            if gnorm < best_gnorm:
                best_gnorm = gnorm
                best_x = x
            if gnorm <= inner_tol:
                break
            hess = _fd_hessian(problem, x, grad, w, cfg.hessian_step)
            d = _newton_direction(hess, grad)
            slope = float(grad @ d)
            flat_tol = 8.0 * np.finfo(float).eps * max(1.0, abs(bval))
            accepted = False
            if -slope > flat_tol:
                alpha = 1.0
                for _ in range(_MAX_BACKTRACKS):
                    xt = x + alpha * d
                    gt = _constraint_values(problem, xt)
                    # fraction-to-boundary: every slack keeps >= 0.5% of itself
                    if np.all(gt <= (1.0 - FRACTION_TO_BOUNDARY) * g_vals):
                        bt, _, _ = _barrier_eval(problem, xt, w, need_grad=False)
                        if bt <= bval + cfg.armijo_c * alpha * slope:
                            accepted = True
                            break
                    alpha *= cfg.backtrack
            if not accepted:
                # once the predicted decrease drops below the float
                # resolution of the barrier value, Armijo sees only rounding
                # noise; accept a feasible step iff the value stays flat
                # within a few ulps and the gradient norm strictly improves
                for alpha in (1.0, 0.5, 0.25):
                    xt = x + alpha * d
                    gt = _constraint_values(problem, xt)
                    if not np.all(gt <= (1.0 - FRACTION_TO_BOUNDARY) * g_vals):
                        continue
                    bt, grad_t, _ = _barrier_eval(problem, xt, w)
                    if (math.isfinite(bt) and bt <= bval + flat_tol
                            and float(np.linalg.norm(grad_t)) < gnorm):
                        accepted = True
                        break
            if not accepted or np.array_equal(xt, x):
                break
            # stop once steps shrink to the float lattice of x; past that
            # point no measurable progress is possible in double precision
            moved = np.max(np.abs(xt - x) / (1.0 + np.abs(x)))
            tiny_steps = tiny_steps + 1 if moved <= 64.0 * np.finfo(float).eps else 0
            x = xt
            iterations += 1
            if cfg.keep_trace:
                trace.append((w, x.copy(), bt))
            if tiny_steps >= 2:
                break
        _, grad, _ = _barrier_eval(problem, x, w)
        if float(np.linalg.norm(grad)) > best_gnorm:
            x = best_x
        if w <= cfg.weight_floor * (1.0 + 1e-12) or iterations >= cfg.max_newton:
            break
        w = max(w * cfg.shrink, cfg.weight_floor)

    f_val, f_grad = problem.objective(x)
    g_vals = _constraint_values(problem, x)
    barrier_mults = w / (-g_vals)
    multipliers, residual = _fit_multipliers(problem, x, f_grad, g_vals,
                                             cfg.active_tol)
    status = (SolverStatus.CONVERGED
              if residual <= cfg.kkt_tol and np.all(g_vals <= 1e-8)
              else SolverStatus.ITERATION_LIMIT)
    return SolverResult(x_star=x, objective_value=float(f_val),
                        multipliers=multipliers, kkt_residual=residual,
                        newton_iterations=iterations, status=status,
                        barrier_multipliers=barrier_mults, final_weight=w,
                        trace=trace)


def _fit_multipliers(problem: ScalarProblem, x, f_grad, g_vals, active_tol):
    """Nonnegative least-squares multipliers on near-active constraints."""
    active = [j for j, gv in enumerate(g_vals) if gv >= -active_tol]
    mults = np.zeros(len(problem.inequalities))
    if active:
        cols = np.column_stack([problem.inequalities[j](x)[1] for j in active])
        beta, _ = nnls(cols, -np.asarray(f_grad, dtype=float))
        mults[active] = beta
    residual = float(np.linalg.norm(
        np.asarray(f_grad, dtype=float)
        + sum(mults[j] * problem.inequalities[j](x)[1]
              for j in range(len(problem.inequalities)))))
    return mults, residual


def interior_point_seed(problem: ScalarProblem) -> np.ndarray:
    """Find a strictly feasible start.

    Starts from the midpoint of ``bounds`` (origin if absent) and, if that
    violates some constraint, maximizes the worst slack by a derivative-free
    coordinate search. Raises :class:`InfeasibleError` when no strictly
    interior point is found.
    """
    if problem.bounds is not None:
        x = np.array([0.5 * (lo + hi) for lo, hi in problem.bounds])
        spans = [hi - lo for lo, hi in problem.bounds]
    else:
        x = np.zeros(problem.dimension)
        spans = [2.0] * problem.dimension

    def margin(pt):
        return float(min(-con(pt)[0] for con in problem.inequalities))

    best = x.copy()
    best_margin = margin(best)
    if best_margin > 0.0:
        return best
    steps = np.array(spans, dtype=float) / 4.0
    for _ in range(60):
        improved = False
        for i in range(problem.dimension):
            for sign in (-1.0, 1.0):
                cand = best.copy()
                cand[i] += sign * steps[i]
                if problem.bounds is not None:
                    lo, hi = problem.bounds[i]
                    cand[i] = min(max(cand[i], lo), hi)
                m = margin(cand)
                if m > best_margin:
                    best, best_margin = cand, m
                    improved = True
        if not improved:
            steps *= 0.5
        if float(np.max(steps)) < 1e-9:
            break
    if best_margin <= 0.0:
        raise InfeasibleError(
            f"no strictly feasible point found (best slack {best_margin:g})")
    return best


def finite_difference_check(problem: ScalarProblem, x, h: float) -> float:
    """Largest scaled deviation between the supplied gradients and central
    finite differences of all evaluators at ``x``."""
    if h <= 0.0:
        raise ValueError("h must be positive")
    x = np.asarray(x, dtype=float)
    worst = 0.0
    for ev in (problem.objective, *problem.inequalities):
        _, grad = ev(x)
        for i in range(x.size):
            xp, xm = x.copy(), x.copy()
            xp[i] += h
            xm[i] -= h
            fd = (ev(xp)[0] - ev(xm)[0]) / (2.0 * h)
            err = abs(grad[i] - fd) / max(1.0, abs(grad[i]))
            worst = max(worst, err)
    return worst
