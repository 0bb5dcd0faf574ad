"""Dense-grid ground truth for small dispatch instances.

Enumerates the reduced feasible set at fixed resolution, evaluating the
exact nonsmooth cost and the emission, to validate barrier solutions and
swept fronts. Only one or two free dimensions are supported; beyond that
the enumeration blows up combinatorially.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .barrier import InfeasibleError
from .dispatch import DispatchProblem, cost_exact, emission, reduce_equality

_MAX_GRID_POINTS = 50_000_000


@dataclass(frozen=True)
class GridSpec:
    """Evaluation grid over the reduced box."""

    resolution: float
    box: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if self.resolution <= 0.0:
            raise ValueError("resolution must be positive")
        if not 1 <= len(self.box) <= 2:
            raise ValueError(
                f"grid oracle supports 1 or 2 free dimensions, got {len(self.box)}")

    def axes(self):
        out = []
        for lo, hi in self.box:
            count = int(np.floor((hi - lo) / self.resolution + 1e-9)) + 1
            out.append(lo + self.resolution * np.arange(count))
        if int(np.prod([len(ax) for ax in out])) > _MAX_GRID_POINTS:
            raise ValueError("grid too fine; coarsen the resolution")
        return out


def default_grid(problem: DispatchProblem, resolution: float = 0.01) -> GridSpec:
    reduced = reduce_equality(problem)
    return GridSpec(resolution=resolution, box=reduced.box)


def _evaluate_grid(problem: DispatchProblem, grid: GridSpec):
    """Lift every grid point to a full fleet vector; returns (p, cost, emis)
    restricted to points feasible for the eliminated unit's box."""
    reduced = reduce_equality(problem)
    if len(grid.box) != reduced.dimension:
        raise ValueError("grid box dimension does not match the problem")
    axes = grid.axes()
    if len(axes) == 1:
        free = axes[0][:, None]
    else:
        g0, g1 = np.meshgrid(axes[0], axes[1], indexing="ij")
        free = np.column_stack([g0.ravel(), g1.ravel()])
    n = problem.n_units
    p = np.empty((free.shape[0], n))
    p[:, list(reduced.free_indices)] = free
    p[:, reduced.eliminated_index] = problem.demand - free.sum(axis=1)
    elim = problem.units[reduced.eliminated_index]
    mask = ((p[:, reduced.eliminated_index] >= elim.p_min - 1e-9)
            & (p[:, reduced.eliminated_index] <= elim.p_max + 1e-9))
    p = p[mask]
    if p.shape[0] == 0:
        raise InfeasibleError("no grid point satisfies the eliminated box")
    cost = cost_exact(problem, p)
    emis = emission(problem, p)[0]
    return p, np.asarray(cost), np.asarray(emis)


def grid_min_cost(problem: DispatchProblem, cap: float | None, grid: GridSpec):
    """Exact-cost minimizer over the grid, optionally under ``E <= cap``.

    Returns ``(p_star, cost_star, emission_star)``. Ties break toward the
    lowest grid index, so the result is order-independent and deterministic.
    """
    p, cost, emis = _evaluate_grid(problem, grid)
    if cap is not None:
        keep = emis <= cap
        if not np.any(keep):
            raise InfeasibleError(f"no grid point satisfies the cap {cap}")
        p, cost, emis = p[keep], cost[keep], emis[keep]
    i = int(np.argmin(cost))
    return p[i].copy(), float(cost[i]), float(emis[i])


def grid_front(problem: DispatchProblem, grid: GridSpec) -> np.ndarray:
    """Nondominated (cost, emission) pairs over the grid, sorted by emission.

    Strict dominance: a point is dropped iff another is <= in both
    objectives and < in one; exact ties are all retained.
    """
    _, cost, emis = _evaluate_grid(problem, grid)
    order = np.lexsort((cost, emis))
    cost, emis = cost[order], emis[order]
    kept_cost, kept_emis = [], []
    prefix_min = np.inf
    i = 0
    m = cost.size
    while i < m:
        j = i
        while j < m and emis[j] == emis[i]:
            j += 1
        group_min = cost[i]  # sorted within the group
        if group_min < prefix_min:
            k = i
            while k < j and cost[k] == group_min:
                kept_cost.append(group_min)
                kept_emis.append(emis[k])
                k += 1
            prefix_min = group_min
        i = j
    return np.column_stack([kept_cost, kept_emis])


class FrontDistance(NamedTuple):
    cost: float
    emission: float
    combined: float


def front_distance(a, b) -> FrontDistance:
    """Directed distance from each point of ``a`` to its nearest point of
    ``b`` (Chebyshev nearest), maximized over ``a``; reported per objective
    and combined."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("front_distance needs nonempty point sets")
    worst_c = worst_e = worst_cheb = 0.0
    for row in a:
        dc = np.abs(b[:, 0] - row[0])
        de = np.abs(b[:, 1] - row[1])
        cheb = np.maximum(dc, de)
        j = int(np.argmin(cheb))
        worst_c = max(worst_c, float(dc[j]))
        worst_e = max(worst_e, float(de[j]))
        worst_cheb = max(worst_cheb, float(cheb[j]))
    return FrontDistance(cost=worst_c, emission=worst_e, combined=worst_cheb)
