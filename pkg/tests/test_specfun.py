import math

import numpy as np
import pytest

from wignerflow.errors import DomainError, NumericalError, UsageError
from wignerflow.specfun import (EllipticConvention, QuadratureSpec, bessel_k,
                                elliptic_k_complete, elliptic_k_linear_sin,
                                faddeeva_w, hermite_odd, im_erf_offset,
                                im_erf_offset_scaled, integrate_1d, jacobi_sn)

from oracles import TIGHT, erfi_maclaurin, im_erf_contour


class TestQuadrature:
    def test_gaussian(self):
        v = integrate_1d(lambda t: math.exp(-t * t), -math.inf, math.inf, TIGHT)
        assert abs(v - math.sqrt(math.pi)) < 1e-12

    def test_odd_integrand_vanishes(self):
        v = integrate_1d(lambda t: t * math.exp(-t * t), -math.inf, math.inf,
                         QuadratureSpec(1e-12, 1e-10, 2000))
        assert abs(v) < 1e-12

    def test_matches_bessel_integral_representation(self):
        v = integrate_1d(lambda t: math.exp(-math.cosh(t)) if t < 700 else 0.0,
                         0.0, math.inf, TIGHT)
        assert abs(v - bessel_k(0, 1.0)) < 1e-12

    def test_budget_exhaustion_carries_estimate(self):
        spec = QuadratureSpec(1e-15, 1e-15, max_subdivisions=3)
        with pytest.raises(NumericalError) as err:
            integrate_1d(lambda t: math.sqrt(abs(t - 0.3718)), 0.0, 1.0, spec)
        estimate, bound = err.value.payload
        assert 0.3 < estimate < 0.5 and bound > 0.0

    def test_deterministic(self):
        f = lambda t: math.sin(3 * t) ** 2 * math.exp(-t)
        assert integrate_1d(f, 0.0, 5.0) == integrate_1d(f, 0.0, 5.0)

    def test_reversed_limits_flip_sign(self):
        assert integrate_1d(lambda t: t * t, 1.0, 0.0) == pytest.approx(
            -1.0 / 3.0, abs=1e-14)

    def test_spec_validation(self):
        with pytest.raises(UsageError):
            QuadratureSpec(abs_tol=0.0)
        with pytest.raises(UsageError):
            QuadratureSpec(max_subdivisions=0)


class TestBesselK:
    def test_k0_at_one(self):
        # oracle: quadrature of the defining integral at beta = 1
        ref = integrate_1d(lambda t: math.exp(-math.cosh(t)) if t < 700 else 0.0,
                           0.0, math.inf, TIGHT)
        assert abs(bessel_k(0, 1.0) - ref) / ref < 1e-12
        assert abs(bessel_k(0, 1.0) - 0.4210244382407083) < 1e-12

    def test_k1_at_one(self):
        ref = integrate_1d(
            lambda t: math.exp(-math.cosh(t)) * math.cosh(t) if t < 700 else 0.0,
            0.0, math.inf, TIGHT)
        assert abs(bessel_k(1, 1.0) - ref) / ref < 1e-12
        assert abs(bessel_k(1, 1.0) - 0.6019072301972346) < 1e-12

    def test_large_argument_asymptotics(self):
        beta = 30.0
        leading = math.sqrt(math.pi / (2.0 * beta)) * math.exp(-beta)
        ratio = bessel_k(0, beta) / leading
        assert abs(ratio - 1.0) < 1.0 / (8.0 * beta) * 1.2

    def test_branch_crossover_is_seamless(self):
        # integral and asymptotic branches must agree through the cutover
        for arg in (15.9, 16.0, 16.1):
            ref = math.exp(-arg) * integrate_1d(
                lambda t: math.exp(-2.0 * arg * math.sinh(0.5 * t) ** 2),
                0.0, math.inf, TIGHT)
            assert abs(bessel_k(0, arg) - ref) / ref < 1e-12

    def test_derivative_identity(self):
        # K1 = -dK0/dbeta, central differences
        h = 1e-5
        for beta in np.linspace(0.5, 4.0, 8):
            deriv = (bessel_k(0, beta + h) - bessel_k(0, beta - h)) / (2 * h)
            assert abs(-deriv - bessel_k(1, beta)) / bessel_k(1, beta) < 1e-6

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            bessel_k(0, 0.0)
        with pytest.raises(DomainError):
            bessel_k(1, -2.0)
        with pytest.raises(UsageError):
            bessel_k(2, 1.0)


class TestEllipticK:
    def test_zero_parameter(self):
        assert abs(elliptic_k_complete(0.0) - math.pi / 2.0) < 1e-15

    def test_half_parameter_vs_quadrature(self):
        ref = integrate_1d(
            lambda t: 1.0 / math.sqrt(1.0 - 0.5 * math.sin(t) ** 2),
            0.0, math.pi / 2.0, TIGHT)
        assert abs(elliptic_k_complete(0.5) - ref) < 1e-12

    def test_monotone_in_parameter(self):
        assert elliptic_k_complete(0.99) > elliptic_k_complete(0.5)
        assert math.isfinite(elliptic_k_complete(0.99))

    def test_domain(self):
        with pytest.raises(DomainError):
            elliptic_k_complete(1.0)
        with pytest.raises(DomainError):
            elliptic_k_complete(-0.1)


class TestLinearSineIntegral:
    def test_zero_kappa(self):
        assert abs(elliptic_k_linear_sin(0.0) - 2.0 * math.pi) < 1e-12

    def test_half_kappa_vs_fixed_rule(self):
        # independent oracle: fixed high-order Gauss-Legendre on [0, pi/2]
        u, w = np.polynomial.legendre.leggauss(200)
        theta = 0.25 * math.pi * (u + 1.0)
        ref = 4.0 * 0.25 * math.pi * float(
            np.sum(w / np.sqrt(1.0 - 0.5 * np.sin(theta))))
        assert abs(elliptic_k_linear_sin(0.5) - ref) < 1e-10

    def test_near_singular_kappa_finite(self):
        v = elliptic_k_linear_sin(0.9375)
        assert math.isfinite(v) and v > 0.0

    def test_domain(self):
        with pytest.raises(DomainError):
            elliptic_k_linear_sin(1.0)


class TestJacobiSn:
    def test_odd_at_zero(self):
        assert jacobi_sn(0.0, 0.7) == 0.0

    def test_degenerate_parameter_is_sine(self):
        assert abs(jacobi_sn(0.7, 0.0) - math.sin(0.7)) < 1e-15

    def test_quarter_period_identity(self):
        quarter = elliptic_k_complete(0.3)
        assert abs(jacobi_sn(quarter, 0.3) - 1.0) < 1e-12

    def test_bounded_and_periodic(self):
        m = 0.9375
        period = 4.0 * elliptic_k_complete(m)
        for u in np.linspace(-8.0, 8.0, 47):
            s = jacobi_sn(float(u), m)
            assert abs(s) <= 1.0 + 1e-15
            assert abs(jacobi_sn(float(u) + period, m) - s) < 1e-10

    def test_modulus_convention(self):
        kappa = 0.6
        direct = jacobi_sn(1.1, kappa * kappa, EllipticConvention.PARAMETER)
        via_modulus = jacobi_sn(1.1, kappa, EllipticConvention.MODULUS)
        assert direct == via_modulus

    def test_domain(self):
        with pytest.raises(DomainError):
            jacobi_sn(0.3, 1.0)
        with pytest.raises(DomainError):
            jacobi_sn(0.3, 1.2, EllipticConvention.MODULUS)


class TestHermiteOdd:
    def test_first_order(self):
        assert hermite_odd(1, 0.3) == 0.6

    def test_third_order(self):
        # H3 = 8 x^3 - 12 x
        assert hermite_odd(3, 1.0) == -4.0

    def test_generating_identity(self):
        s, x = 0.3, 0.7
        total = 0.0
        for eta in range(21):
            n = 2 * eta + 1
            total += hermite_odd(n, x) * s ** n / math.factorial(n)
        ref = math.exp(-s * s) * math.sinh(2.0 * s * x)
        assert abs(total - ref) < 1e-12

    def test_usage(self):
        with pytest.raises(UsageError):
            hermite_odd(2, 0.5)
        with pytest.raises(UsageError):
            hermite_odd(-1, 0.5)


class TestImErfOffset:
    def test_value_at_origin_is_erfi_half(self):
        ref = erfi_maclaurin(0.5)
        assert abs(im_erf_offset(1.0, 0.0) - ref) < 1e-12
        assert abs(ref - 0.614952094696511) < 1e-12

    def test_even_in_chi(self):
        assert im_erf_offset(1.0, -0.8) == im_erf_offset(1.0, 0.8)

    @pytest.mark.parametrize("alpha", [0.4, 1.0, 2.0 ** 0.5, 2.7])
    def test_against_contour_quadrature(self, alpha):
        for chi in np.linspace(0.0, 6.0 / alpha, 13):
            ref = im_erf_contour(alpha, float(chi))
            assert abs(im_erf_offset(alpha, float(chi)) - ref) < 1e-10

    def test_spot_value(self):
        assert abs(im_erf_offset(1.0, 2.0) - im_erf_contour(1.0, 2.0)) < 1e-10

    def test_scaled_form_consistent(self):
        for chi in (0.0, 0.5, 1.5, 3.0):
            plain = im_erf_offset(1.3, chi)
            scaled = im_erf_offset_scaled(1.3, chi)
            assert abs(scaled * math.exp(-(1.3 * chi) ** 2) - plain) < 1e-14

    def test_zero_set_is_discrete(self):
        # finitely many sign changes on a bounded interval, separated gaps
        alpha = 2.0 ** 0.5
        grid = np.linspace(0.0, 8.0, 4001)
        vals = im_erf_offset_scaled(alpha, grid)
        flips = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
        assert 2 <= len(flips) <= 12
        assert np.all(np.diff(grid[flips]) > 0.5)

    def test_domain(self):
        with pytest.raises(DomainError):
            im_erf_offset(0.0, 1.0)
        with pytest.raises(DomainError):
            im_erf_offset(1.0, math.nan)


class TestFaddeeva:
    def test_real_axis_matches_erfcx_series(self):
        # w(t) on the real axis has real part e^{-t^2}
        for t in (0.0, 0.5, 2.0, 6.0):
            assert abs(faddeeva_w(t).real - math.exp(-t * t)) < 1e-13

    def test_lower_half_plane_rejected(self):
        with pytest.raises(DomainError):
            faddeeva_w(1.0 - 1.0j)

    def test_pure_function(self):
        z = 0.3 + 1.7j
        assert faddeeva_w(z) == faddeeva_w(z)

    def test_array_shape_preserved(self):
        z = np.array([[0.5 + 0.5j, 1.0 + 1.0j], [2.0j, 0.1 + 0.0j]])
        assert faddeeva_w(z).shape == (2, 2)
