"""Property and frozen-value tests for the smoothing kernels.

Expected values were computed independently: closed-form limits by hand,
irrational constants at 40-digit precision with mpmath, and the convolution
values by adaptive quadrature of the defining integral.
"""

import math

import numpy as np
import pytest

from smoothdispatch.checks import phi_plus_quadrature
from smoothdispatch.smoothing import (KernelKind, SmoothingKernel, SmoothParam,
                                      gradient_consistency_probe, phi_plus,
                                      phi_plus_grad, smooth_max, smooth_min,
                                      theta_abs, theta_abs_grad,
                                      theta_abs_second, theta_abs_vector)

UNIFORM = SmoothingKernel.uniform()
SIGMOID = SmoothingKernel.sigmoid()
LN2 = math.log(2.0)


class TestKernelConstruction:
    def test_uniform_kappa_is_quarter(self):
        assert UNIFORM.kappa == pytest.approx(0.25, abs=1e-12)

    def test_sigmoid_kappa_is_two_ln_two(self):
        assert SIGMOID.kappa == pytest.approx(2.0 * LN2, abs=1e-9)

    def test_log_cosh_kappa(self):
        assert SmoothingKernel.log_cosh().kappa == pytest.approx(LN2)

    def test_kappa_must_be_positive(self):
        with pytest.raises(ValueError, match="kappa"):
            SmoothingKernel(KernelKind.UNIFORM_CONVOLUTION, 0.0)
        with pytest.raises(ValueError, match="kappa"):
            SmoothingKernel(KernelKind.SIGMOID_CONVOLUTION, math.inf)

    def test_log_cosh_has_no_density(self):
        with pytest.raises(ValueError):
            SmoothingKernel.log_cosh().density(0.0)

    def test_densities_are_symmetric(self):
        s = np.linspace(-4.0, 4.0, 41)
        for kern in (UNIFORM, SIGMOID):
            np.testing.assert_allclose(kern.density(s), kern.density(-s))


class TestSmoothParam:
    def test_stage_sequence(self):
        stages = list(SmoothParam(mu=0.1, alpha=0.1, mu_min=1e-4).stages())
        assert len(stages) == 4
        assert stages[0] == 0.1
        assert stages[-1] == pytest.approx(1e-4, rel=1e-12)

    def test_single_stage_when_floor_equals_mu(self):
        assert list(SmoothParam(mu=0.5, alpha=0.1, mu_min=0.5).stages()) == [0.5]

    @pytest.mark.parametrize("kwargs", [
        dict(mu=0.0), dict(mu=0.1, alpha=1.0), dict(mu=0.1, alpha=0.0),
        dict(mu=0.1, mu_min=0.2), dict(mu=0.1, mu_min=0.0),
    ])
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            SmoothParam(**kwargs)


class TestThetaAbs:
    def test_zero(self):
        assert theta_abs(0.0, 0.5) == 0.0

    def test_frozen_values(self):
        # mpmath, 40 digits
        assert theta_abs(10.0, 0.1) == pytest.approx(9.9308007487255848, abs=1e-12)
        assert theta_abs(1.0, 0.5) == pytest.approx(0.67502699846008323, abs=1e-12)
        assert theta_abs(-3.0, 1.2) == pytest.approx(2.3554501834940828, abs=1e-12)

    def test_even_symmetry(self):
        rng = np.random.default_rng(0)
        for t, mu in zip(rng.uniform(-100, 100, 50), rng.uniform(0.01, 1.5, 50)):
            assert theta_abs(-t, mu) == theta_abs(t, mu)

    def test_overflow_safe_for_huge_ratio(self):
        # t/sin(mu) ~ 1e9 would overflow cosh
        val = theta_abs(1000.0, 1e-6)
        assert math.isfinite(val)
        assert val == pytest.approx(1000.0 - math.sin(1e-6) * LN2, abs=1e-9)

    def test_error_band(self):
        """0 <= |t| - theta <= sin(mu)*ln 2 on random samples."""
        rng = np.random.default_rng(42)
        t = rng.uniform(-1000, 1000, 2000)
        mu = rng.uniform(1e-9, math.pi / 2 - 1e-9, 2000)
        for ti, mi in zip(t, mu):
            gap = abs(ti) - theta_abs(ti, mi)
            assert gap >= -1e-12
            assert gap <= math.sin(mi) * LN2 + 1e-12

    def test_monotone_toward_exact_as_mu_shrinks(self):
        for t in (-7.3, 0.4, 12.0):
            values = [theta_abs(t, mu) for mu in (1.2, 0.6, 0.1, 0.01, 1e-4)]
            assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))
            assert values[-1] <= abs(t) + 1e-12

    def test_convexity_second_divided_difference(self):
        rng = np.random.default_rng(3)
        for _ in range(300):
            t1, t2, t3 = np.sort(rng.uniform(-20, 20, 3))
            if t2 - t1 < 1e-4 or t3 - t2 < 1e-4:
                continue
            mu = rng.uniform(0.01, 1.5)
            d1 = (theta_abs(t2, mu) - theta_abs(t1, mu)) / (t2 - t1)
            d2 = (theta_abs(t3, mu) - theta_abs(t2, mu)) / (t3 - t2)
            assert (d2 - d1) / (t3 - t1) >= -1e-10

    @pytest.mark.parametrize("mu", [0.0, -0.3, math.pi / 2, 2.0])
    def test_domain_error(self, mu):
        with pytest.raises(ValueError, match="pi/2"):
            theta_abs(1.0, mu)


class TestThetaAbsGrad:
    def test_zero_at_origin(self):
        assert theta_abs_grad(0.0, 0.3) == 0.0

    def test_saturation(self):
        assert abs(theta_abs_grad(5.0, 0.001) - 1.0) <= 1e-12

    def test_odd_symmetry(self):
        rng = np.random.default_rng(1)
        for t, mu in zip(rng.uniform(-50, 50, 50), rng.uniform(0.01, 1.5, 50)):
            assert theta_abs_grad(-t, mu) == -theta_abs_grad(t, mu)

    def test_bounded_by_one(self):
        """|theta'| <= 1 always; strictly below 1 wherever tanh has not
        saturated to 1.0 in float64."""
        rng = np.random.default_rng(2)
        for t, mu in zip(rng.uniform(-50, 50, 2000), rng.uniform(0.01, 1.5, 2000)):
            d = theta_abs_grad(t, mu)
            assert abs(d) <= 1.0
            if abs(t) / math.sin(mu) <= 18.0:
                assert abs(d) < 1.0

    def test_matches_finite_differences(self):
        h = 1e-6
        for t in (-3.0, -0.2, 0.0, 0.7, 4.0):
            for mu in (0.05, 0.4, 1.3):
                fd = (theta_abs(t + h, mu) - theta_abs(t - h, mu)) / (2 * h)
                assert theta_abs_grad(t, mu) == pytest.approx(fd, abs=1e-6)

    def test_second_derivative_matches_finite_differences(self):
        h = 1e-6
        for t in (-1.0, 0.0, 0.25):
            for mu in (0.2, 0.9):
                fd = (theta_abs_grad(t + h, mu) - theta_abs_grad(t - h, mu)) / (2 * h)
                assert theta_abs_second(t, mu) == pytest.approx(fd, abs=1e-5)


class TestPhiPlus:
    def test_uniform_at_zero_is_mu_over_eight(self):
        for mu in (0.01, 0.4, 1.0):
            assert phi_plus(0.0, mu, UNIFORM) == pytest.approx(mu / 8.0, rel=1e-14)

    def test_uniform_outside_support(self):
        assert phi_plus(5.0, 0.3, UNIFORM) == 5.0
        assert phi_plus(0.15, 0.3, UNIFORM) == 0.15
        assert phi_plus(-0.15, 0.3, UNIFORM) == 0.0
        assert phi_plus(-2.0, 0.3, UNIFORM) == 0.0

    def test_sigmoid_at_zero_is_ln_two(self):
        assert phi_plus(0.0, 1.0, SIGMOID) == pytest.approx(LN2, abs=1e-14)

    def test_sigmoid_overflow_safe(self):
        assert phi_plus(1e6, 1e-3, SIGMOID) == pytest.approx(1e6)
        assert phi_plus(-1e6, 1e-3, SIGMOID) == 0.0

    def test_matches_quadrature(self):
        """Closed forms against adaptive quadrature of the defining
        integral, both kernels."""
        for kern in (UNIFORM, SIGMOID):
            for t in np.linspace(-2.0, 2.0, 9):
                for mu in (0.05, 0.3, 1.2):
                    expected = phi_plus_quadrature(t, mu, kern)
                    assert phi_plus(t, mu, kern) == pytest.approx(
                        expected, abs=1e-8)

    def test_error_band(self):
        """phi - (t)_+ lies in [0, kappa*mu]; strictly positive inside the
        uniform kernel's support and everywhere for the logistic kernel."""
        rng = np.random.default_rng(5)
        for _ in range(500):
            t = rng.uniform(-4.0, 4.0)
            mu = rng.uniform(0.01, 1.5)
            for kern in (UNIFORM, SIGMOID):
                gap = phi_plus(t, mu, kern) - max(t, 0.0)
                assert 0.0 <= gap <= kern.kappa * mu + 1e-12
                if kern is SIGMOID and abs(t) / mu < 700.0:
                    assert gap > 0.0
                if kern is UNIFORM and abs(t) < 0.5 * mu:
                    assert gap > 0.0

    def test_monotone_in_mu(self):
        rng = np.random.default_rng(6)
        for _ in range(300):
            t = rng.uniform(-3.0, 3.0)
            mu1 = rng.uniform(0.01, 1.0)
            mu2 = mu1 + rng.uniform(0.01, 1.0)
            for kern in (UNIFORM, SIGMOID):
                diff = phi_plus(t, mu2, kern) - phi_plus(t, mu1, kern)
                assert -1e-12 <= diff <= kern.kappa * (mu2 - mu1) + 1e-12

    def test_rejects_log_cosh_kernel(self):
        with pytest.raises(ValueError, match="convolution"):
            phi_plus(1.0, 0.1, SmoothingKernel.log_cosh())

    def test_rejects_nonpositive_mu(self):
        with pytest.raises(ValueError, match="positive"):
            phi_plus(1.0, 0.0, UNIFORM)


class TestPhiPlusGrad:
    def test_uniform_pieces(self):
        assert phi_plus_grad(-0.2, 0.4, UNIFORM) == 0.0
        assert phi_plus_grad(0.2, 0.4, UNIFORM) == 1.0
        assert phi_plus_grad(0.0, 0.4, UNIFORM) == pytest.approx(0.5)

    def test_sigmoid_at_zero_is_half(self):
        assert phi_plus_grad(0.0, 0.7, SIGMOID) == pytest.approx(0.5)

    def test_range_and_monotonicity(self):
        ts = np.linspace(-3.0, 3.0, 101)
        for kern in (UNIFORM, SIGMOID):
            vals = [phi_plus_grad(t, 0.6, kern) for t in ts]
            assert all(0.0 <= v <= 1.0 for v in vals)
            assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_matches_finite_differences(self):
        """Central differences away from the uniform kernel's joints."""
        h = 1e-7
        for kern in (UNIFORM, SIGMOID):
            for t in (-1.0, -0.1, 0.02, 0.8):
                for mu in (0.3, 0.9):
                    if kern is UNIFORM and abs(abs(t) - mu / 2) < 10 * h:
                        continue
                    fd = (phi_plus(t + h, mu, kern)
                          - phi_plus(t - h, mu, kern)) / (2 * h)
                    grad = phi_plus_grad(t, mu, kern)
                    assert grad == pytest.approx(fd, rel=1e-6, abs=1e-6)


class TestSmoothMaxMin:
    def test_tracks_exact_max_within_band(self):
        rng = np.random.default_rng(9)
        for _ in range(300):
            h, g = rng.uniform(-10, 10, 2)
            mu = rng.uniform(0.01, 1.0)
            for kern in (UNIFORM, SIGMOID):
                sm = smooth_max(h, g, mu, kern)
                assert 0.0 <= sm - max(h, g) <= kern.kappa * mu + 1e-12
                sn = smooth_min(h, g, mu, kern)
                assert 0.0 <= min(h, g) - sn <= kern.kappa * mu + 1e-12

    def test_tie_value_uniform(self):
        for h in (-2.0, 0.0, 3.5):
            assert smooth_max(h, h, 0.4, UNIFORM) == pytest.approx(h + 0.4 / 8.0)

    def test_small_mu_limit(self):
        assert smooth_max(1.0, 3.0, 1e-9, UNIFORM) == pytest.approx(3.0, abs=1e-9)
        assert smooth_min(1.0, 3.0, 1e-9, UNIFORM) == pytest.approx(1.0, abs=1e-9)


class TestThetaAbsVector:
    def test_zeros(self):
        np.testing.assert_array_equal(
            theta_abs_vector([0.0, 0.0], [0.1, 0.2]), [0.0, 0.0])

    def test_even_components(self):
        out = theta_abs_vector([3.0, -3.0], [0.25, 0.25])
        assert out[0] == out[1]

    def test_componentwise_band_on_random_vectors(self):
        rng = np.random.default_rng(21)
        for _ in range(1000):
            g = rng.uniform(-50, 50, 4)
            mu = rng.uniform(0.01, 1.5, 4)
            out = theta_abs_vector(g, mu)
            gap = np.abs(g) - out
            assert np.all(gap >= -1e-12)
            assert np.all(gap <= np.sin(mu) * LN2 + 1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape"):
            theta_abs_vector([1.0, 2.0], [0.1])

    def test_component_domain_error(self):
        with pytest.raises(ValueError, match="pi/2"):
            theta_abs_vector([1.0, 2.0], [0.1, 2.0])


class TestGradientConsistencyProbe:
    def test_abs_at_zero_limits_in_clarke_interval(self):
        report = gradient_consistency_probe(0.0, 40, target="abs")
        assert report.ok
        assert report.interval == (-1.0, 1.0)
        assert all(-1.0 <= v <= 1.0 for v in report.limits.values())

    def test_abs_away_from_kink_converges_to_sign(self):
        for point, sign in ((2.0, 1.0), (-2.0, -1.0)):
            report = gradient_consistency_probe(point, 40, target="abs")
            assert report.ok
            for v in report.limits.values():
                assert v == pytest.approx(sign, abs=1e-9)

    def test_plus_at_zero_sigmoid_coupled_sequence(self):
        """With t_k = mu_k the smoothed slope settles at e/(1+e)."""
        report = gradient_consistency_probe(0.0, 40, target="plus", kernel=SIGMOID)
        assert report.ok
        assert report.limits[1.0] == pytest.approx(0.7310585786300049, abs=1e-12)
        assert report.limits[0.0] == pytest.approx(0.5)
        assert all(0.0 <= v <= 1.0 for v in report.limits.values())

    def test_plus_at_zero_uniform(self):
        report = gradient_consistency_probe(0.0, 40, target="plus", kernel=UNIFORM)
        assert report.ok

    def test_sequence_count_validation(self):
        with pytest.raises(ValueError, match="sequence_count"):
            gradient_consistency_probe(0.0, 0)
