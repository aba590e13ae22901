"""Test: half space Stokes kernels"""
import unittest
import numpy as np
from src import greens
from src.errors import DomainError
from src.params import HalfSpacePoint, fast_quad_spec


class TestKernelTerms(unittest.TestCase):
    def test_plain(self):
        self.assertEqual(greens.kernel_terms(3, 2),
                         [("integral", 0, (0, 1), 1)])

    def test_normal_derivative(self):
        terms = greens.kernel_terms(3, 1, l_n=1)
        self.assertIn(("integral", 1, (1, 0), 1), terms)
        self.assertIn(("boundary", 0, (1, 0), 1), terms)
        self.assertEqual(len(terms), 2)

    def test_time_derivative(self):
        terms = greens.kernel_terms(3, 2, k=1)
        self.assertEqual(
            sorted(terms),
            sorted([("integral", 2, (0, 1), 1), ("integral", 0, (2, 1), 1),
                    ("integral", 0, (0, 3), 1)]))

    def test_order_limits(self):
        with self.assertRaises(DomainError):
            greens.kernel_terms(3, 1, k=1, l_prime=1, l_n=1)
        with self.assertRaises(DomainError):
            greens.kernel_terms(3, 1, k=2)


class TestLTensor(unittest.TestCase):
    def setUp(self):
        self.spec = fast_quad_spec()
        self.x = HalfSpacePoint((1.0, 0.5), 0.2)
        self.y = HalfSpacePoint((0.0, 0.0), 0.3)

    def test_normal_column_vanishes(self):
        result = greens.L_tensor(self.x, self.y, 0.1, 1, 3, self.spec)
        self.assertEqual(result.value, 0.0)
        self.assertGreater(result.bound_value, 0.0)

    def test_no_slip(self):
        for dim in (3, 4):
            report = greens.verify_no_slip(dim, samples=50, seed=3,
                                           spec=self.spec)
            self.assertEqual(report["samples"], 50)
            self.assertLessEqual(report["max_abs"], 1e-12)
            self.assertEqual(len(report["argmax"]["x"]), dim)
            self.assertEqual(report["argmax"]["x"][-1], 0.0)

    def test_no_slip_reproducible(self):
        first = greens.verify_no_slip(samples=5, seed=8, spec=self.spec)
        second = greens.verify_no_slip(samples=5, seed=8, spec=self.spec)
        self.assertEqual(first, second)

    def test_monte_carlo_oracle(self):
        exact = greens.L_tensor(self.x, self.y, 0.05, 1, 1, self.spec)
        sampled = greens.L_tensor_mc(self.x, self.y, 0.05, 1, 1,
                                     samples=self.spec.mc_samples, seed=4)
        self.assertGreater(sampled.error_estimate, 0.0)
        self.assertAlmostEqual(exact.value,
                               sampled.value,
                               delta=5 * sampled.error_estimate +
                               exact.error_estimate)

    def test_tangential_translation(self):
        shift = np.array([3.0, -2.0])
        first = greens.L_tensor(self.x, self.y, 0.1, 2, 1, self.spec).value
        second = greens.L_tensor(self.x.translated(shift),
                                 self.y.translated(shift), 0.1, 2, 1,
                                 self.spec).value
        self.assertAlmostEqual(first, second, delta=1e-6 * abs(first))

    def test_normal_derivative_identity(self):
        # D_{x_n} L_12 = D_{x_2} L_31 + boundary kernel, by parts in z_n
        t = 0.1
        left = greens.L_tensor(self.x, self.y, t, 1, 2, self.spec, l_n=1)
        right = greens.L_tensor(self.x, self.y, t, 3, 1, self.spec,
                                l_prime=2)
        boundary = greens.boundary_kernel(self.x, self.y, t, 1, self.spec)
        allowed = 1e-5 * abs(left.value) + left.error_estimate + \
            right.error_estimate + boundary.error_estimate
        self.assertAlmostEqual(left.value,
                               right.value + boundary.value,
                               delta=allowed)

    def test_bound_report(self):
        grid = [(self.x, self.y, t, 1, 2, 0, 0, 0) for t in (0.05, 0.5)]
        report = greens.verify_L_bound(grid, self.spec)
        self.assertTrue(report["finite"])
        self.assertEqual(len(report["rows"]), 2)
        self.assertEqual(report["skipped"], 0)

    def test_domain(self):
        with self.assertRaises(DomainError):
            greens.L_tensor(self.x, self.y, 0.0, 1, 1)
        with self.assertRaises(DomainError):
            greens.L_tensor(self.x, self.y, 0.1, 4, 1)
        with self.assertRaises(DomainError):
            greens.L_tensor(self.x, HalfSpacePoint((0.0, 0.0, 0.0), 0.3), 0.1,
                            1, 1)
        with self.assertRaises(DomainError):
            greens.boundary_kernel(self.x, self.y, 0.1, 3)


class TestPressureKernel(unittest.TestCase):
    def setUp(self):
        self.spec = fast_quad_spec()

    def test_normal_component_vanishes(self):
        x = HalfSpacePoint((1.0, 0.5), 0.2)
        y = HalfSpacePoint((0.0, 0.0), 0.3)
        self.assertEqual(greens.pressure_kernel(x, y, 0.1, 3).value, 0.0)

    def test_boundary_rejected(self):
        x = HalfSpacePoint((1.0, 0.5), 0.0)
        y = HalfSpacePoint((0.0, 0.0), 0.3)
        with self.assertRaises(DomainError):
            greens.pressure_kernel(x, y, 0.1, 1)

    def test_scaling(self):
        # P_j(lx, ly, l^2 t) = l^-(n + 1) P_j(x, y, t)
        x = HalfSpacePoint((1.0, 0.5), 0.2)
        y = HalfSpacePoint((0.0, 0.2), 0.3)
        scale = 2.0
        first = greens.pressure_kernel(x, y, 0.1, 1, self.spec).value
        second = greens.pressure_kernel(
            HalfSpacePoint.from_array(scale * x.as_array()),
            HalfSpacePoint.from_array(scale * y.as_array()), scale**2 * 0.1,
            1, self.spec).value
        self.assertAlmostEqual(second, scale**-4 * first,
                               delta=1e-5 * abs(first))


if __name__ == '__main__':
    unittest.main()
