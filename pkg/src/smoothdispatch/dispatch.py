"""Economic/emission dispatch model with valve-point cost ripple.

A fleet of thermal units shares a fixed demand. Each unit has a quadratic
fuel cost plus a rectified-sinusoid valve-point term ``|g*sin(h*(p_min-p))|``
(nonsmooth, multimodal) and a quadratic emission curve. The demand equality
is eliminated analytically, leaving a box-and-linear-inequality feasible
region in the remaining units.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .smoothing import MU_ABS_LIMIT, theta_abs, theta_abs_grad, theta_abs_second

_UNIT_FIELDS = ("a", "b", "c", "g", "h", "alpha", "beta", "gamma",
                "p_min", "p_max")


class ProblemFormatError(ValueError):
    """Raised when a problem file cannot be parsed or validated."""


@dataclass(frozen=True)
class GeneratorCoefficients:
    """Cost, valve-point and emission coefficients of one unit.

    Cost: ``a*p^2 + b*p + c + |g*sin(h*(p_min - p))|`` in $/h.
    Emission: ``alpha*p^2 + beta*p + gamma`` in kg/h.
    Output bounds ``p_min < p_max`` in MW.
    """

    a: float
    b: float
    c: float
    g: float
    h: float
    alpha: float
    beta: float
    gamma: float
    p_min: float
    p_max: float

    def __post_init__(self):
        if not self.p_min < self.p_max:
            raise ValueError(
                f"p_min must be below p_max, got [{self.p_min}, {self.p_max}]")
        for name in ("a", "alpha", "g"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass(frozen=True)
class DispatchProblem:
    """A generator fleet plus the total demand it must meet exactly."""

    units: tuple[GeneratorCoefficients, ...]
    demand: float

    def __post_init__(self):
        object.__setattr__(self, "units", tuple(self.units))
        if not self.units:
            raise ValueError("problem needs at least one unit")
        lo = sum(u.p_min for u in self.units)
        hi = sum(u.p_max for u in self.units)
        if not lo <= self.demand <= hi:
            raise ValueError(
                f"demand {self.demand} outside aggregate box [{lo}, {hi}]")

    @property
    def n_units(self) -> int:
        return len(self.units)

    def digest(self) -> str:
        """Stable fingerprint of the coefficients and demand."""
        payload = json.dumps(
            {"demand": self.demand,
             "units": [[getattr(u, f) for f in _UNIT_FIELDS]
                       for u in self.units]},
            separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


def _check_dimension(problem: DispatchProblem, p: np.ndarray):
    if p.shape[-1] != problem.n_units:
        raise ValueError(
            f"power vector has {p.shape[-1]} entries, expected {problem.n_units}")


def cost_exact(problem: DispatchProblem, p) -> float | np.ndarray:
    """Exact nonsmooth fuel cost; broadcasts over leading axes of ``p``."""
    p = np.asarray(p, dtype=float)
    _check_dimension(problem, p)
    total = 0.0
    for i, u in enumerate(problem.units):
        pi = p[..., i]
        total = total + (u.a * pi * pi + u.b * pi + u.c
                         + np.abs(u.g * np.sin(u.h * (u.p_min - pi))))
    if np.ndim(total) == 0:
        return float(total)
    return total


def cost_smoothed(problem: DispatchProblem, p, mu: float):
    """Smoothed fuel cost and its analytic gradient.

    Each valve term ``|v_i|`` with ``v_i = g_i*sin(h_i*(p_min_i - p_i))``
    is replaced by ``theta_abs(v_i, mu)``; the gradient follows by the
    chain rule. Requires ``0 < mu < pi/2``.
    """
    if not 0.0 < mu < MU_ABS_LIMIT:
        raise ValueError(f"mu must lie in (0, pi/2), got {mu}")
    p = np.asarray(p, dtype=float)
    if p.ndim != 1:
        raise ValueError("cost_smoothed expects a single power vector")
    _check_dimension(problem, p)
    value = 0.0
    grad = np.empty(problem.n_units)
    for i, u in enumerate(problem.units):
        pi = float(p[i])
        arg = u.h * (u.p_min - pi)
        v = u.g * math.sin(arg)
        dv = -u.g * u.h * math.cos(arg)
        value += u.a * pi * pi + u.b * pi + u.c + theta_abs(v, mu)
        grad[i] = 2.0 * u.a * pi + u.b + theta_abs_grad(v, mu) * dv
    return value, grad


def emission(problem: DispatchProblem, p):
    """Quadratic emission and its gradient; broadcasts over leading axes."""
    p = np.asarray(p, dtype=float)
    _check_dimension(problem, p)
    value = 0.0
    grad = np.empty_like(p)
    for i, u in enumerate(problem.units):
        pi = p[..., i]
        value = value + u.alpha * pi * pi + u.beta * pi + u.gamma
        grad[..., i] = 2.0 * u.alpha * pi + u.beta
    if np.ndim(value) == 0:
        return float(value), grad
    return value, grad


@dataclass(frozen=True)
class ReducedProblem:
    """Demand equality eliminated: the last unit's output is implied.

    ``box`` is the per-free-unit interval tightened by the eliminated
    unit's bounds; the eliminated bounds themselves become the linear
    inequalities produced by :meth:`constraint_evaluators`.
    """

    problem: DispatchProblem
    free_indices: tuple[int, ...]
    eliminated_index: int
    box: tuple[tuple[float, float], ...]

    @property
    def dimension(self) -> int:
        return len(self.free_indices)

    def lift(self, y) -> np.ndarray:
        """Map free outputs to the full fleet vector."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        p = np.empty(self.problem.n_units)
        p[list(self.free_indices)] = y
        p[self.eliminated_index] = self.problem.demand - float(np.sum(y))
        return p

    def cost_exact(self, y) -> float:
        return cost_exact(self.problem, self.lift(y))

    def cost_smoothed(self, y, mu: float):
        value, grad = cost_smoothed(self.problem, self.lift(y), mu)
        return value, grad[list(self.free_indices)] - grad[self.eliminated_index]

    def emission(self, y):
        value, grad = emission(self.problem, self.lift(y))
        return value, grad[list(self.free_indices)] - grad[self.eliminated_index]

    def smoothed_objective(self, mu: float):
        """Fast ``y -> (value, gradient)`` evaluator of the smoothed cost."""
        units = self.problem.units
        free = self.free_indices
        elim = units[self.eliminated_index]
        demand = self.problem.demand

        def evaluate(y):
            total = demand
            value = 0.0
            grad = np.empty(len(free))
            for j, idx in enumerate(free):
                u = units[idx]
                pj = float(y[j])
                total -= pj
                arg = u.h * (u.p_min - pj)
                v = u.g * math.sin(arg)
                value += u.a * pj * pj + u.b * pj + u.c + theta_abs(v, mu)
                grad[j] = (2.0 * u.a * pj + u.b
                           - theta_abs_grad(v, mu) * u.g * u.h * math.cos(arg))
            arg = elim.h * (elim.p_min - total)
            v = elim.g * math.sin(arg)
            value += elim.a * total * total + elim.b * total + elim.c + theta_abs(v, mu)
            # d p_elim / d y_j = -1 for every free unit
            grad -= (2.0 * elim.a * total + elim.b
                     - theta_abs_grad(v, mu) * elim.g * elim.h * math.cos(arg))
            return value, grad

        return evaluate

    def smoothed_hessian(self, mu: float):
        """Analytic Hessian of the smoothed cost (diagnostics and tests)."""
        units = self.problem.units
        free = self.free_indices
        elim = units[self.eliminated_index]
        demand = self.problem.demand

        def unit_second(u, p):
            arg = u.h * (u.p_min - p)
            v = u.g * math.sin(arg)
            dv = -u.g * u.h * math.cos(arg)
            d2v = -u.g * u.h * u.h * math.sin(arg)
            return (2.0 * u.a + theta_abs_second(v, mu) * dv * dv
                    + theta_abs_grad(v, mu) * d2v)

        def evaluate(y):
            total = demand - float(np.sum(y))
            h_elim = unit_second(elim, total)
            n = len(free)
            hess = np.full((n, n), h_elim)
            for j, idx in enumerate(free):
                hess[j, j] += unit_second(units[idx], float(y[j]))
            return hess

        return evaluate

    def emission_evaluator(self):
        """Fast ``y -> (value, gradient)`` evaluator of the emission."""
        units = self.problem.units
        free = self.free_indices
        elim = units[self.eliminated_index]
        demand = self.problem.demand

        def evaluate(y):
            total = demand
            value = 0.0
            grad = np.empty(len(free))
            for j, idx in enumerate(free):
                u = units[idx]
                pj = float(y[j])
                total -= pj
                value += u.alpha * pj * pj + u.beta * pj + u.gamma
                grad[j] = 2.0 * u.alpha * pj + u.beta
            value += elim.alpha * total * total + elim.beta * total + elim.gamma
            grad -= 2.0 * elim.alpha * total + elim.beta
            return value, grad

        return evaluate

    def constraint_evaluators(self, epsilon: float | None = None):
        """Inequality evaluators ``y -> (value, gradient)``, feasible iff
        value <= 0: free-unit boxes, the eliminated unit's box expressed
        on the free units, and optionally the emission cap (appended last).
        """
        cons = []
        units = self.problem.units
        for j, idx in enumerate(self.free_indices):
            lo, hi = units[idx].p_min, units[idx].p_max
            cons.append(_box_low(j, lo, self.dimension))
            cons.append(_box_high(j, hi, self.dimension))
        elim = units[self.eliminated_index]
        demand = self.problem.demand
        cons.append(_elim_low(demand, elim.p_max, self.dimension))
        cons.append(_elim_high(demand, elim.p_min, self.dimension))
        if epsilon is not None:
            emis = self.emission_evaluator()

            def cap(y, _emis=emis, _eps=float(epsilon)):
                value, grad = _emis(y)
                return value - _eps, grad

            cons.append(cap)
        return cons


def _box_low(j, lo, dim):
    grad = np.zeros(dim)
    grad[j] = -1.0
    return lambda y: (lo - float(y[j]), grad)


def _box_high(j, hi, dim):
    grad = np.zeros(dim)
    grad[j] = 1.0
    return lambda y: (float(y[j]) - hi, grad)


def _elim_low(demand, p_max_elim, dim):
    # demand - sum(y) <= p_max  <=>  demand - p_max - sum(y) <= 0
    grad = np.full(dim, -1.0)
    return lambda y: (demand - p_max_elim - float(np.sum(y)), grad)


def _elim_high(demand, p_min_elim, dim):
    # demand - sum(y) >= p_min  <=>  sum(y) - (demand - p_min) <= 0
    grad = np.ones(dim)
    return lambda y: (float(np.sum(y)) - (demand - p_min_elim), grad)


def reduce_equality(problem: DispatchProblem,
                    eliminated_index: int | None = None) -> ReducedProblem:
    """Eliminate one unit (the last by default) via the demand equality.

    The free-unit boxes returned in ``box`` are tightened by interval
    arithmetic against the eliminated unit's bounds, so that midpoints of
    ``box`` are sensible seeds.
    """
    n = problem.n_units
    elim = (n - 1) if eliminated_index is None else eliminated_index % n
    free = tuple(i for i in range(n) if i != elim)
    e = problem.units[elim]
    box = []
    for j in free:
        u = problem.units[j]
        others_lo = sum(problem.units[k].p_min for k in free if k != j)
        others_hi = sum(problem.units[k].p_max for k in free if k != j)
        lo = max(u.p_min, problem.demand - e.p_max - others_hi)
        hi = min(u.p_max, problem.demand - e.p_min - others_lo)
        if lo > hi:
            raise ValueError(
                f"demand {problem.demand} leaves unit {j} without feasible range")
        box.append((lo, hi))
    return ReducedProblem(problem=problem, free_indices=free,
                          eliminated_index=elim, box=tuple(box))


def load_problem(path) -> DispatchProblem:
    """Read a problem definition file (JSON) and validate it.

    Schema: ``{"demand": MW, "units": [{a,b,c,g,h,alpha,beta,gamma,
    p_min,p_max}, ...]}``. Errors carry the offending line or field.
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}") from exc
    if not isinstance(raw, dict) or "units" not in raw or "demand" not in raw:
        raise ProblemFormatError(f"{path}: expected top-level 'units' and 'demand'")
    units = []
    for idx, entry in enumerate(raw["units"]):
        missing = [f for f in _UNIT_FIELDS if f not in entry]
        if missing:
            raise ProblemFormatError(
                f"{path}: unit {idx} is missing field(s) {', '.join(missing)}")
        unknown = [f for f in entry if f not in _UNIT_FIELDS]
        if unknown:
            raise ProblemFormatError(
                f"{path}: unit {idx} has unknown field(s) {', '.join(unknown)}")
        try:
            values = {f: float(entry[f]) for f in _UNIT_FIELDS}
        except (TypeError, ValueError) as exc:
            raise ProblemFormatError(
                f"{path}: unit {idx} has a non-numeric field: {exc}") from exc
        try:
            units.append(GeneratorCoefficients(**values))
        except ValueError as exc:
            raise ProblemFormatError(f"{path}: unit {idx}: {exc}") from exc
    try:
        return DispatchProblem(units=tuple(units), demand=float(raw["demand"]))
    except ValueError as exc:
        raise ProblemFormatError(f"{path}: {exc}") from exc


def builtin_instance_path(name: str = "two_gen_650") -> str:
    """Filesystem path of a problem file shipped with the package."""
    return str(resources.files("smoothdispatch").joinpath(f"data/{name}.json"))
