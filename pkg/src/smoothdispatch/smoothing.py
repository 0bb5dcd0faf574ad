"""Smooth surrogates for the plus function, absolute value, max and min.

Two families are provided:

* ``theta_abs`` smooths ``|t|`` with a scaled log-cosh, valid for
  ``0 < mu < pi/2``; the approximation error is at most ``sin(mu)*ln 2``.
* ``phi_plus`` smooths ``(t)_+`` by convolution with a symmetric density
  (uniform or logistic), with error at most ``kappa*mu`` where ``kappa``
  is the mean absolute value of the density.

All functions are pure and overflow-safe for large ``|t|/mu`` ratios.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

MU_ABS_LIMIT = math.pi / 2.0

# switch to the asymptotic form of ln(cosh(x)); cosh overflows near x ~ 710
_LNCOSH_DIRECT_LIMIT = 30.0


class KernelKind(enum.Enum):
    LOG_COSH = "log_cosh"
    UNIFORM_CONVOLUTION = "uniform_convolution"
    SIGMOID_CONVOLUTION = "sigmoid_convolution"


def _uniform_density(s):
    s = np.asarray(s, dtype=float)
    out = np.where(np.abs(s) <= 0.5, 1.0, 0.0)
    return float(out) if out.shape == () else out


def _logistic_density(s):
    # e^{-|s|}/(1+e^{-|s|})^2, written to avoid overflow for large |s|
    z = np.exp(-np.abs(np.asarray(s, dtype=float)))
    out = z / (1.0 + z) ** 2
    return float(out) if out.shape == () else out


@lru_cache(maxsize=None)
def _kappa_by_quadrature(kind: KernelKind) -> float:
    """Mean absolute value of the kernel density, integrated adaptively."""
    if kind is KernelKind.UNIFORM_CONVOLUTION:
        val, _ = quad(lambda s: s * _uniform_density(s), 0.0, 0.5)
    elif kind is KernelKind.SIGMOID_CONVOLUTION:
        val, _ = quad(lambda s: s * _logistic_density(s), 0.0, np.inf)
    else:
        raise ValueError(f"no density kernel for {kind}")
    return 2.0 * val


@dataclass(frozen=True)
class SmoothingKernel:
    """A smoothing kernel together with its error constant ``kappa``.

    The log-cosh kind smooths ``|t|`` only; the convolution kinds smooth
    ``(t)_+``. ``kappa`` must be finite and positive.
    """

    kind: KernelKind
    kappa: float

    def __post_init__(self):
        if not math.isfinite(self.kappa) or self.kappa <= 0.0:
            raise ValueError(f"kappa must be finite and positive, got {self.kappa}")

    @classmethod
    def log_cosh(cls) -> "SmoothingKernel":
        return cls(KernelKind.LOG_COSH, math.log(2.0))

    @classmethod
    def uniform(cls) -> "SmoothingKernel":
        return cls(KernelKind.UNIFORM_CONVOLUTION,
                   _kappa_by_quadrature(KernelKind.UNIFORM_CONVOLUTION))

    @classmethod
    def sigmoid(cls) -> "SmoothingKernel":
        return cls(KernelKind.SIGMOID_CONVOLUTION,
                   _kappa_by_quadrature(KernelKind.SIGMOID_CONVOLUTION))

    def density(self, s):
        """Evaluate the kernel density (convolution kinds only)."""
        if self.kind is KernelKind.UNIFORM_CONVOLUTION:
            return _uniform_density(s)
        if self.kind is KernelKind.SIGMOID_CONVOLUTION:
            return _logistic_density(s)
        raise ValueError(f"{self.kind} has no density")


@dataclass(frozen=True)
class SmoothParam:
    """Continuation schedule: mu, geometric decay factor, and floor."""

    mu: float
    alpha: float = 0.1
    mu_min: float = 1e-6

    def __post_init__(self):
        if self.mu <= 0.0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0.0 < self.mu_min <= self.mu:
            raise ValueError(
                f"mu_min must satisfy 0 < mu_min <= mu, got {self.mu_min}")

    def stages(self):
        """Yield mu, alpha*mu, alpha^2*mu, ... down to (and including) the
        last value >= mu_min."""
        mu = self.mu
        while mu >= self.mu_min:
            yield mu
            mu *= self.alpha


def _require_mu_abs(mu: float):
    if not 0.0 < mu < MU_ABS_LIMIT:
        raise ValueError(f"mu must lie in (0, pi/2), got {mu}")


def _lncosh(x: float) -> float:
    ax = abs(x)
    if ax > _LNCOSH_DIRECT_LIMIT:
        return ax - math.log(2.0) + math.log1p(math.exp(-2.0 * ax))
    return math.log(math.cosh(x))


def theta_abs(t: float, mu: float) -> float:
    """Smooth surrogate of ``|t|``: ``sin(mu) * ln(cosh(t / sin(mu)))``.

    Underestimates ``|t|`` by at most ``sin(mu)*ln 2``; requires
    ``0 < mu < pi/2`` so that ``sin(mu) > 0``.
    """
    _require_mu_abs(mu)
    s = math.sin(mu)
    return s * _lncosh(t / s)


def theta_abs_grad(t: float, mu: float) -> float:
    """Derivative of :func:`theta_abs` in ``t``: ``tanh(t / sin(mu))``."""
    _require_mu_abs(mu)
    return math.tanh(t / math.sin(mu))


def theta_abs_second(t: float, mu: float) -> float:
    """Second derivative of :func:`theta_abs` in ``t``."""
    _require_mu_abs(mu)
    s = math.sin(mu)
    x = abs(t) / s
    if x > 300.0:
        return 0.0
    c = math.cosh(x)
    return 1.0 / (s * c * c)


def theta_abs_vector(g, mu):
    """Componentwise :func:`theta_abs` with a per-component ``mu``."""
    g = np.asarray(g, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if g.shape != mu.shape:
        raise ValueError(f"shape mismatch: {g.shape} vs {mu.shape}")
    if np.any((mu <= 0.0) | (mu >= MU_ABS_LIMIT)):
        raise ValueError("every mu component must lie in (0, pi/2)")
    flat = [theta_abs(gi, mi) for gi, mi in zip(g.ravel(), mu.ravel())]
    return np.array(flat).reshape(g.shape)


def _require_convolution(kernel: SmoothingKernel):
    if kernel.kind is KernelKind.LOG_COSH:
        raise ValueError("plus-function smoothing needs a convolution kernel")


def phi_plus(t: float, mu: float, kernel: SmoothingKernel) -> float:
    """Convolution smoothing of the plus function ``(t)_+``.

    Closed forms: uniform kernel is piecewise quadratic on ``|t| <= mu/2``;
    logistic kernel is the softplus ``mu * ln(1 + e^{t/mu})``. Both satisfy
    ``0 <= phi_plus(t, mu) - (t)_+ <= kappa * mu``.
    """
    if mu <= 0.0:
        raise ValueError(f"mu must be positive, got {mu}")
    _require_convolution(kernel)
    if kernel.kind is KernelKind.UNIFORM_CONVOLUTION:
        if t <= -0.5 * mu:
            return 0.0
        if t >= 0.5 * mu:
            return float(t)
        return (t + 0.5 * mu) ** 2 / (2.0 * mu)
    z = t / mu
    if z > _LNCOSH_DIRECT_LIMIT:
        return t + mu * math.log1p(math.exp(-z))
    return mu * math.log1p(math.exp(z))


def phi_plus_grad(t: float, mu: float, kernel: SmoothingKernel) -> float:
    """Derivative of :func:`phi_plus` in ``t``; lies in [0, 1] and is
    nondecreasing in ``t``."""
    if mu <= 0.0:
        raise ValueError(f"mu must be positive, got {mu}")
    _require_convolution(kernel)
    if kernel.kind is KernelKind.UNIFORM_CONVOLUTION:
        # joints |t| = mu/2 take the middle-piece value; the form is C^1
        if t <= -0.5 * mu:
            return 0.0
        if t >= 0.5 * mu:
            return 1.0
        return (t + 0.5 * mu) / mu
    z = t / mu
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


def smooth_max(h: float, g: float, mu: float, kernel: SmoothingKernel) -> float:
    """Smooth ``max(h, g) = h + (g - h)_+``; overestimates by at most
    ``kappa * mu``."""
    return h + phi_plus(g - h, mu, kernel)


def smooth_min(h: float, g: float, mu: float, kernel: SmoothingKernel) -> float:
    """Smooth ``min(h, g) = h - (h - g)_+``; underestimates by at most
    ``kappa * mu``."""
    return h - phi_plus(h - g, mu, kernel)


def clarke_interval(point: float, target: str) -> tuple[float, float]:
    """Clarke subdifferential of ``|t|`` (``target='abs'``) or ``(t)_+``
    (``target='plus'``) at ``point``, as a closed interval."""
    if target == "abs":
        if point == 0.0:
            return (-1.0, 1.0)
        s = math.copysign(1.0, point)
        return (s, s)
    if target == "plus":
        if point == 0.0:
            return (0.0, 1.0)
        v = 1.0 if point > 0.0 else 0.0
        return (v, v)
    raise ValueError(f"unknown target {target!r}")


@dataclass
class ProbeReport:
    """Accumulation values of smoothed derivatives along sequences
    ``t_k -> point``, ``mu_k -> 0``, against the Clarke subdifferential."""

    point: float
    target: str
    limits: dict = field(default_factory=dict)
    interval: tuple[float, float] = (0.0, 0.0)
    tol: float = 1e-9
    ok: bool = False


def gradient_consistency_probe(point: float, sequence_count: int,
                               target: str = "abs",
                               kernel: SmoothingKernel | None = None,
                               mu0: float = 1.0, decay: float = 0.5,
                               tol: float = 1e-9) -> ProbeReport:
    """Drive ``t_k = point + d * decay^k``, ``mu_k = mu0 * decay^k`` for
    directions ``d in {-1, 0, +1}`` and record the terminal smoothed
    derivative of each sequence.

    The report flags success iff every accumulation value lies in the
    Clarke subdifferential of the target at ``point`` (within ``tol``).
    """
    if sequence_count < 1:
        raise ValueError("sequence_count must be >= 1")
    if target == "plus" and kernel is None:
        kernel = SmoothingKernel.sigmoid()
    report = ProbeReport(point=point, target=target, tol=tol,
                         interval=clarke_interval(point, target))
    for d in (-1.0, 0.0, 1.0):
        value = math.nan
        for k in range(1, sequence_count + 1):
            step = decay ** k
            t_k = point + d * step
            mu_k = mu0 * step
            if target == "abs":
                value = theta_abs_grad(t_k, mu_k)
            else:
                value = phi_plus_grad(t_k, mu_k, kernel)
        report.limits[d] = value
    lo, hi = report.interval
    report.ok = all(lo - tol <= v <= hi + tol for v in report.limits.values())
    return report
