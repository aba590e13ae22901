"""Test: heat and Newtonian kernels"""
import unittest
import math
from fractions import Fraction
import numpy as np
import torch
import torch_testing as tt
from scipy import special
from src import kernels
from src import quad
from src import analysis
from src.errors import DomainError, SingularityError
from src.params import ModelParams, HalfSpacePoint, fast_quad_spec

NUM_DECIMALS = 5


def _hermite_deriv(order, eta):
    coeffs = kernels.hermite_coefficients(order)
    return sum(power * coeff * eta**(power - 1)
               for power, coeff in enumerate(coeffs) if power > 0)


class TestHeatKernel(unittest.TestCase):
    def test_normalization_point(self):
        value = kernels.heat_kernel(np.zeros(3), 1 / (4 * np.pi), 3)
        self.assertAlmostEqual(value, 1.0, places=12)

    def test_closed_form(self):
        value = kernels.heat_kernel(np.array([1.0, 0.0, 0.0]), 1.0, 3)
        self.assertAlmostEqual(value, (4 * np.pi)**(-1.5) * np.exp(-0.25),
                               places=14)

    def test_non_positive_time(self):
        with self.assertRaises(DomainError):
            kernels.heat_kernel(np.zeros(2), 0.0)

    def test_unit_mass(self):
        spec = fast_quad_spec()
        for t in (0.1, 1.0):
            half_width = 8 * np.sqrt(t)
            for dim in (1, 2, 3):
                mass = quad.integrate_nd(
                    lambda pts: kernels.heat_kernel(pts, t),
                    [(-half_width, half_width)] * dim, spec)
                self.assertAlmostEqual(mass.value, 1.0, delta=1e-6)

    def test_four_dimensional_kernel_factorizes(self):
        rng = np.random.default_rng(3)
        points = rng.normal(size=(20, 4))
        product = np.prod(
            [kernels.heat_kernel(points[:, k:k + 1], 0.3) for k in range(4)],
            axis=0)
        tt.assert_almost_equal(
            torch.from_numpy(kernels.heat_kernel(points, 0.3, 4)),
            torch.from_numpy(product))

    def test_semigroup(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            x, t, s = rng.uniform(-2, 2), rng.uniform(0.1, 1), rng.uniform(
                0.1, 1)
            width = 12 * np.sqrt(t + s) + abs(x)
            result = quad.adaptive_quad(
                lambda z: kernels.heat_kernel(np.array([x - z]), t) * kernels.
                heat_kernel(np.array([z]), s), -width, width)
            self.assertAlmostEqual(result.value,
                                   kernels.heat_kernel(np.array([x]), t + s),
                                   delta=1e-5)

    def test_time_derivative_is_laplacian(self):
        x, t, step = np.array([0.3, -0.7]), 0.4, 1e-5
        numeric = (kernels.heat_kernel(x, t + step) -
                   kernels.heat_kernel(x, t - step)) / (2 * step)
        self.assertAlmostEqual(kernels.heat_kernel_time_deriv(x, t),
                               numeric,
                               places=8)


class TestHermite(unittest.TestCase):
    def test_closed_forms(self):
        self.assertEqual(kernels.hermite_poly(2, 0), -2)
        self.assertEqual(kernels.hermite_poly(3, 1), 4)

    def test_degree(self):
        for order in range(7):
            coeffs = kernels.hermite_coefficients(order)
            self.assertEqual(len(coeffs) - 1, order)
            self.assertNotEqual(coeffs[-1], 0)

    def test_recursion_exact(self):
        for order in range(1, 7):
            for eta in (Fraction(1, 3), Fraction(-5, 7), Fraction(2)):
                lhs = kernels.hermite_poly(order, eta)
                rhs = _hermite_deriv(order - 1, eta) \
                    - 2 * eta * kernels.hermite_poly(order - 1, eta)
                self.assertEqual(lhs, rhs)

    def test_physicists_hermite(self):
        eta = np.linspace(-2, 2, 9)
        for order in range(7):
            tt.assert_almost_equal(
                torch.from_numpy(kernels.hermite_poly(order, eta)),
                torch.from_numpy((-1)**order * special.eval_hermite(
                    order, eta)))


class TestNormalDerivative(unittest.TestCase):
    def test_normalization_point(self):
        self.assertAlmostEqual(
            kernels.heat_kernel_normal_deriv(0.0, 1 / (4 * np.pi), 0), 1.0)

    def test_odd_derivative_vanishes(self):
        self.assertEqual(kernels.heat_kernel_normal_deriv(0.0, 0.7, 1), 0.0)

    def test_second_derivative_finite_difference(self):
        x_n, t, step = 0.5, 0.1, 1e-4

        def gamma(x):
            return kernels.heat_kernel_normal_deriv(x, t, 0)

        numeric = (gamma(x_n + step) - 2 * gamma(x_n) +
                   gamma(x_n - step)) / step**2
        exact = kernels.heat_kernel_normal_deriv(x_n, t, 2)
        self.assertAlmostEqual(numeric / exact, 1.0, delta=1e-5)

    def test_fourth_derivative_finite_difference(self):
        x_n, t, step = 0.5, 0.1, 1e-3

        def second(x):
            return kernels.heat_kernel_normal_deriv(x, t, 2)

        numeric = (second(x_n + step) - 2 * second(x_n) +
                   second(x_n - step)) / step**2
        exact = kernels.heat_kernel_normal_deriv(x_n, t, 4)
        self.assertAlmostEqual(numeric / exact, 1.0, delta=1e-5)

    def test_tensor_derivative(self):
        x, t = np.array([0.2, -0.4, 0.9]), 0.3
        value = kernels.heat_kernel_deriv(x, t, [1, 0, 2])
        expected = kernels.heat_kernel_normal_deriv(0.2, t, 1) * \
            kernels.heat_kernel_normal_deriv(-0.4, t, 0) * \
            kernels.heat_kernel_normal_deriv(0.9, t, 2)
        self.assertAlmostEqual(value, expected, places=12)


class TestNewtonKernel(unittest.TestCase):
    def test_unit_sphere(self):
        value = kernels.newton_kernel(np.array([1.0, 0.0, 0.0]), 3)
        self.assertAlmostEqual(value, -1 / (4 * np.pi), places=12)
        value = kernels.newton_kernel(np.array([0.0, 2.0, 0.0]), 3)
        self.assertAlmostEqual(value, -1 / (8 * np.pi), places=12)

    def test_radial_symmetry(self):
        x = np.random.default_rng(5).normal(size=(10, 4))
        tt.assert_almost_equal(torch.from_numpy(kernels.newton_kernel(x)),
                               torch.from_numpy(kernels.newton_kernel(-x)))

    def test_singularity(self):
        with self.assertRaises(SingularityError):
            kernels.newton_kernel(np.zeros(3))

    def test_low_dimension(self):
        with self.assertRaises(DomainError):
            kernels.newton_constant(2)

    def test_harmonic(self):
        rng = np.random.default_rng(7)
        for dim in (3, 4):
            for _ in range(20):
                x = rng.uniform(-5, 5, size=dim)
                laplacian = sum(
                    kernels.newton_deriv(x, 2 * np.eye(dim, dtype=int)[k])
                    for k in range(dim))
                self.assertLess(abs(laplacian),
                                1e-10 * np.linalg.norm(x)**(-dim))

    def test_mixed_derivative_finite_difference(self):
        x, step = np.array([1.0, 1.0, 1.0]), 1e-4
        e_1, e_2 = np.eye(3)[0] * step, np.eye(3)[1] * step
        numeric = (kernels.newton_kernel(x + e_1 + e_2) -
                   kernels.newton_kernel(x + e_1 - e_2) -
                   kernels.newton_kernel(x - e_1 + e_2) +
                   kernels.newton_kernel(x - e_1 - e_2)) / (4 * step**2)
        exact = kernels.newton_deriv(x, [1, 1, 0])
        self.assertAlmostEqual(numeric / exact, 1.0, delta=1e-6)

    def test_derivatives_finite_difference(self):
        rng = np.random.default_rng(13)
        step = 1e-4
        for _ in range(100):
            direction = rng.normal(size=3)
            x = direction / np.linalg.norm(direction) * rng.uniform(0.5, 10)
            scale = np.linalg.norm(x)**(-3)
            for i in range(3):
                shift = np.eye(3)[i] * step
                first = (kernels.newton_kernel(x + shift) -
                         kernels.newton_kernel(x - shift)) / (2 * step)
                exact = kernels.newton_deriv(x, np.eye(3, dtype=int)[i])
                self.assertAlmostEqual(first, exact, delta=1e-5 * scale)
                for j in range(3):
                    index = np.eye(3, dtype=int)[i] + np.eye(3,
                                                             dtype=int)[j]
                    other = np.eye(3)[j] * step
                    second = (kernels.newton_deriv(
                        x + other, np.eye(3, dtype=int)[i]) -
                              kernels.newton_deriv(
                                  x - other, np.eye(3, dtype=int)[i])) / (
                                      2 * step)
                    self.assertAlmostEqual(
                        second,
                        kernels.newton_deriv(x, index),
                        delta=1e-5 * scale / np.linalg.norm(x))

    def test_flux(self):
        for radius in (0.5, 2.0):

            def flux(nodes):
                theta, phi = nodes[:, 0], nodes[:, 1]
                normal = np.stack([
                    np.sin(theta) * np.cos(phi),
                    np.sin(theta) * np.sin(phi),
                    np.cos(theta)
                ],
                                  axis=-1)
                points = radius * normal
                grad = np.stack([
                    kernels.newton_deriv(points, np.eye(3, dtype=int)[k])
                    for k in range(3)
                ],
                                axis=-1)
                return np.sum(grad * normal, axis=-1) * radius**2 * np.sin(
                    theta)

            total = quad.integrate_nd(flux, [(0, np.pi), (0, 2 * np.pi)])
            self.assertAlmostEqual(total.value, 1.0, delta=1e-4)

    def test_order_limit(self):
        with self.assertRaises(DomainError):
            kernels.newton_deriv(np.ones(3), [2, 1, 0])


class TestProfiles(unittest.TestCase):
    def setUp(self):
        self.params = ModelParams()
        self.spec = fast_quad_spec()

    def test_phi_sign_pattern(self):
        a_11 = HalfSpacePoint((5.0, 5.0), 0.0)
        a_12 = HalfSpacePoint((5.0, -5.0), 0.0)
        self.assertLess(kernels.phi_profile(a_11, 1, self.params, self.spec),
                        0.0)
        self.assertGreater(
            kernels.phi_profile(a_12, 1, self.params, self.spec), 0.0)

    def test_phi_sign_on_samples(self):
        rng = np.random.default_rng(17)
        for _ in range(10):
            x_1 = rng.uniform(3, 20)
            x_2 = x_1 * rng.uniform(0.6, 1.9)
            inside = HalfSpacePoint((x_1, x_2), 0.0)
            mirrored = HalfSpacePoint((x_1, -x_2), 0.0)
            self.assertLess(
                kernels.phi_profile(inside, 1, self.params, self.spec), 0.0)
            self.assertGreater(
                kernels.phi_profile(mirrored, 1, self.params, self.spec),
                0.0)

    def test_phi_decay(self):
        radii = np.geomspace(4, 64, 5)
        values = [
            kernels.phi_profile(HalfSpacePoint((r, r), 0.0), 1, self.params,
                                self.spec) for r in radii
        ]
        fit = analysis.fit_power_law(radii, values)
        self.assertAlmostEqual(fit.exponent, -3.0, delta=0.05)

    def test_psi_sign_and_oddness(self):
        point = HalfSpacePoint((1.0, 5.0), 0.0)
        mirrored = HalfSpacePoint((1.0, -5.0), 0.0)
        value = kernels.psi_profile(point, self.params, self.spec)
        self.assertGreater(value, 0.0)
        self.assertAlmostEqual(
            value,
            -kernels.psi_profile(mirrored, self.params, self.spec),
            places=10)

    def test_psi_decay(self):
        radii = np.geomspace(4, 64, 5)
        values = [
            kernels.psi_profile(HalfSpacePoint((r, r), 0.0), self.params,
                                self.spec) for r in radii
        ]
        fit = analysis.fit_power_law(radii, values)
        self.assertAlmostEqual(fit.exponent, -2.0, delta=0.05)

    def test_profile_needs_far_point(self):
        with self.assertRaises(DomainError):
            kernels.psi_profile(HalfSpacePoint((0.5, 0.5), 0.0), self.params)

    def test_far_profile_matches_point_kernel(self):
        point = HalfSpacePoint((40.0, 30.0), 0.0)
        value = kernels.psi_profile(point, self.params, self.spec)
        expected = kernels.newton_deriv(np.array([40.0, 30.0, 0.0]),
                                        [0, 1, 0])
        self.assertAlmostEqual(value / expected, 1.0, delta=1e-3)


if __name__ == '__main__':
    unittest.main()
