"""Self-check battery over the smoothing layer and dispatch gradients.

Each check returns a named pass/fail result; the CLI ``check`` command
prints one line per result. Kept separate from the test suite so a
deployed build can re-verify itself without pytest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .barrier import ScalarProblem, finite_difference_check
from .dispatch import DispatchProblem, reduce_equality
from .smoothing import (KernelKind, SmoothingKernel, gradient_consistency_probe,
                        phi_plus, phi_plus_grad, theta_abs, theta_abs_grad)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def phi_plus_quadrature(t: float, mu: float, kernel: SmoothingKernel,
                        tol: float = 1e-10) -> float:
    """Evaluate the defining convolution integral of the plus-function
    smoothing by adaptive quadrature (independent of the closed forms)."""
    if kernel.kind is KernelKind.UNIFORM_CONVOLUTION:
        upper = t / mu
        if upper <= -0.5:
            return 0.0
        upper = min(upper, 0.5)
        val, _ = quad(lambda s: (t - mu * s) * kernel.density(s), -0.5, upper,
                      epsabs=tol, epsrel=tol)
        return val
    if kernel.kind is KernelKind.SIGMOID_CONVOLUTION:
        val, _ = quad(lambda s: (t - mu * s) * kernel.density(s),
                      -np.inf, t / mu, epsabs=tol, epsrel=tol, limit=200)
        return val
    raise ValueError(f"{kernel.kind} is not a convolution kernel")


def check_error_band(samples: int = 2000, seed: int = 7) -> CheckResult:
    rng = np.random.default_rng(seed)
    t = rng.uniform(-1000.0, 1000.0, samples)
    mu = rng.uniform(1e-12, math.pi / 2 - 1e-12, samples)
    worst_low = worst_high = 0.0
    for ti, mi in zip(t, mu):
        gap = abs(ti) - theta_abs(ti, mi)
        worst_low = min(worst_low, gap)
        worst_high = max(worst_high, gap - math.sin(mi) * math.log(2.0))
    ok = worst_low >= -1e-12 and worst_high <= 1e-12
    return CheckResult("abs error band", ok,
                       f"min gap {worst_low:.2e}, band excess {worst_high:.2e}")


def check_derivative_bound(samples: int = 2000, seed: int = 11) -> CheckResult:
    rng = np.random.default_rng(seed)
    t = rng.uniform(-50.0, 50.0, samples)
    mu = rng.uniform(0.01, math.pi / 2 - 0.01, samples)
    ok = True
    for ti, mi in zip(t, mu):
        d = theta_abs_grad(ti, mi)
        if abs(d) > 1.0:
            ok = False
        # strict inequality is representable only below tanh saturation
        if abs(ti) / math.sin(mi) <= 18.0 and abs(d) >= 1.0:
            ok = False
    return CheckResult("abs derivative bound", ok, f"{samples} samples")


def check_convexity(samples: int = 400, seed: int = 13) -> CheckResult:
    rng = np.random.default_rng(seed)
    kernels = (SmoothingKernel.uniform(), SmoothingKernel.sigmoid())
    worst = 0.0
    for _ in range(samples):
        pts = np.sort(rng.uniform(-5.0, 5.0, 3))
        if pts[1] - pts[0] < 1e-6 or pts[2] - pts[1] < 1e-6:
            continue
        mu = rng.uniform(0.01, 1.5)

        def second_divided(f):
            d1 = (f(pts[1]) - f(pts[0])) / (pts[1] - pts[0])
            d2 = (f(pts[2]) - f(pts[1])) / (pts[2] - pts[1])
            return (d2 - d1) / (pts[2] - pts[0])

        worst = min(worst, second_divided(lambda v: theta_abs(v, mu)))
        for kern in kernels:
            worst = min(worst, second_divided(lambda v: phi_plus(v, mu, kern)))
    ok = worst >= -1e-10
    return CheckResult("convexity", ok, f"min second divided difference {worst:.2e}")


def check_monotone_in_mu(kernels=None, samples: int = 300, seed: int = 17
                         ) -> CheckResult:
    """0 <= phi(t, mu2) - phi(t, mu1) <= kappa*(mu2 - mu1) for mu2 > mu1."""
    rng = np.random.default_rng(seed)
    if kernels is None:
        kernels = (SmoothingKernel.uniform(), SmoothingKernel.sigmoid())
    ok = True
    worst = ""
    for _ in range(samples):
        t = rng.uniform(-3.0, 3.0)
        mu1 = rng.uniform(0.01, 1.0)
        mu2 = mu1 + rng.uniform(0.01, 1.0)
        for kern in kernels:
            diff = phi_plus(t, mu2, kern) - phi_plus(t, mu1, kern)
            if diff < -1e-12 or diff > kern.kappa * (mu2 - mu1) + 1e-12:
                ok = False
                worst = f"t={t:.3f} mu=({mu1:.3f},{mu2:.3f}) diff={diff:.3e}"
    return CheckResult("monotone in mu", ok, worst or f"{samples} samples")


def check_quadrature_match(t_count: int = 12, mu_count: int = 6) -> CheckResult:
    kernels = (SmoothingKernel.uniform(), SmoothingKernel.sigmoid())
    ts = np.linspace(-3.0, 3.0, t_count)
    mus = np.linspace(0.05, 1.5, mu_count)
    worst = 0.0
    for kern in kernels:
        for t in ts:
            for mu in mus:
                worst = max(worst, abs(phi_plus(t, mu, kern)
                                       - phi_plus_quadrature(t, mu, kern)))
    ok = worst <= 1e-6
    return CheckResult("closed form vs quadrature", ok, f"max abs dev {worst:.2e}")


def check_probes() -> CheckResult:
    at_zero = gradient_consistency_probe(0.0, 40, target="abs")
    at_two = gradient_consistency_probe(2.0, 40, target="abs")
    at_neg = gradient_consistency_probe(-2.0, 40, target="abs")
    plus_zero = gradient_consistency_probe(0.0, 40, target="plus")
    ok = (at_zero.ok and at_two.ok and at_neg.ok and plus_zero.ok
          and all(abs(v - 1.0) <= 1e-9 for v in at_two.limits.values())
          and all(abs(v + 1.0) <= 1e-9 for v in at_neg.limits.values()))
    return CheckResult("gradient consistency probes", ok,
                       f"limits at 0: {sorted(at_zero.limits.values())}")


def check_finite_differences(problem: DispatchProblem | None = None,
                             mu: float = 0.01, h: float = 1e-5) -> CheckResult:
    worst = 0.0
    for t in (-2.0, -0.3, 0.4, 1.7):
        fd = (theta_abs(t + h, 0.2) - theta_abs(t - h, 0.2)) / (2 * h)
        worst = max(worst, abs(fd - theta_abs_grad(t, 0.2)))
        for kern in (SmoothingKernel.uniform(), SmoothingKernel.sigmoid()):
            fd = (phi_plus(t + h, 0.7, kern) - phi_plus(t - h, 0.7, kern)) / (2 * h)
            worst = max(worst, abs(fd - phi_plus_grad(t, 0.7, kern)))
    detail = f"kernel max dev {worst:.2e}"
    ok = worst <= 1e-6
    if problem is not None:
        reduced = reduce_equality(problem)
        sp = ScalarProblem(objective=reduced.smoothed_objective(mu),
                           inequalities=tuple(reduced.constraint_evaluators()),
                           dimension=reduced.dimension, bounds=reduced.box)
        mid = np.array([0.5 * (lo + hi) for lo, hi in reduced.box])
        err = finite_difference_check(sp, mid, h)
        ok = ok and err <= 1e-6
        detail += f", dispatch max rel err {err:.2e}"
    return CheckResult("finite differences", ok, detail)


def run_battery(problem: DispatchProblem | None = None) -> list[CheckResult]:
    return [
        check_error_band(),
        check_derivative_bound(),
        check_convexity(),
        check_monotone_in_mu(),
        check_quadrature_match(),
        check_probes(),
        check_finite_differences(problem),
    ]
