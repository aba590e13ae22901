"""Test: velocity and pressure of the singular force"""
import unittest
import numpy as np
import torch
import torch_testing as tt
from src import fields
from src import force
from src import kernels
from src import quad
from src.errors import DomainError
from src.params import (ModelParams, ForceProfiles, HalfSpacePoint,
                        SpaceTimePoint, fast_quad_spec)

NUM_DECIMALS = 5


def _point(tangential, normal, t):
    return SpaceTimePoint.from_coords(tangential, normal, t)


class TestRadialProfile(unittest.TestCase):
    def setUp(self):
        self.profiles = ForceProfiles()
        self.spec = fast_quad_spec()

    def test_against_plane_convolution(self):
        sigma = 0.5
        profile = fields.RadialProfile(sigma, 2, self.profiles)
        rhos = np.array([0.0, 0.4, 1.5, 3.0])
        values, errors = profile(rhos)
        radius = self.profiles.bump_radius
        direct = []
        for rho in rhos:
            centre = np.array([rho, 0.0])
            direct.append(
                quad.integrate_nd(
                    lambda pts, c=centre: kernels.heat_kernel(
                        c - pts, sigma) * force.g_tangential(pts),
                    [(-radius, radius)] * 2, self.spec).value)
        tt.assert_almost_equal(torch.from_numpy(values),
                               torch.tensor(direct, dtype=torch.float64),
                               decimal=NUM_DECIMALS)
        self.assertTrue(np.all(errors < 1e-6))

    def test_radial_derivative(self):
        profile = fields.RadialProfile(0.05, 2, self.profiles)
        step = 1e-4
        rho = np.array([0.3, 0.8, 1.2])
        slope, _ = profile(rho, derivative=True)
        numeric = (profile(rho + step)[0] - profile(rho - step)[0]) / (2 *
                                                                      step)
        tt.assert_almost_equal(torch.from_numpy(slope),
                               torch.from_numpy(numeric),
                               decimal=NUM_DECIMALS)

    def test_three_tangential_dimensions(self):
        profile = fields.RadialProfile(0.2, 3, self.profiles)
        rho = np.array([0.0, 1e-9])
        values, _ = profile(rho)
        self.assertAlmostEqual(values[0], values[1], places=10)
        self.assertGreater(values[0], 0.0)

    def test_small_time_limit(self):
        profile = fields.RadialProfile(1e-8, 2, self.profiles)
        values, errors = profile(np.array([0.3]))
        self.assertAlmostEqual(values[0],
                               force.bump_profile(0.3, 2, self.profiles),
                               places=12)
        self.assertLess(errors[0], 1e-5)

    def test_unsupported_dimension(self):
        with self.assertRaises(DomainError):
            fields.RadialProfile(0.1, 4)


class TestFieldDomain(unittest.TestCase):
    def setUp(self):
        self.params = ModelParams()
        self.spec = fast_quad_spec()

    def test_before_force(self):
        x = _point((5.0, 5.0), 0.1, 0.5)
        self.assertEqual(fields.velocity_W(x, 1, self.params).value, 0.0)
        self.assertEqual(fields.bad_term_Bw(x, 1, self.params).value, 0.0)
        split = fields.pressure_PiB_split(x, self.params)
        self.assertEqual(split["I"].value, 0.0)
        self.assertEqual(split["J"].value, 0.0)

    def test_first_component_of_V(self):
        x = _point((5.0, 5.0), 0.1, 0.6)
        sample = fields.velocity_V(x, 1, self.params, self.spec)
        self.assertEqual(sample.value, 0.0)
        self.assertEqual(sample.component, 1)

    def test_no_slip(self):
        x = _point((5.0, 5.0), 0.0, 0.6)
        self.assertEqual(fields.velocity_W(x, 1, self.params).value, 0.0)
        self.assertEqual(fields.velocity_WG(x, 1, self.params).value, 0.0)
        self.assertEqual(fields.pressure_PiG(x, self.params).value, 0.0)

    def test_far_region(self):
        x = _point((1.0, 0.5), 0.1, 0.6)
        with self.assertRaises(DomainError):
            fields.velocity_W(x, 1, self.params, self.spec)
        with self.assertRaises(DomainError):
            fields.pressure_PiB(x, self.params, self.spec)

    def test_components(self):
        x = _point((5.0, 5.0), 0.1, 0.6)
        with self.assertRaises(DomainError):
            fields.bad_term_Bw(x, 3, self.params)
        with self.assertRaises(DomainError):
            fields.velocity_W(x, 4, self.params)

    def test_boundary_order_limit(self):
        x = _point((5.0, 5.0), 0.0, 0.6)
        with self.assertRaises(DomainError):
            fields.bad_term_Bw(x, 1, self.params, self.spec, order=2)

    def test_unknown_field(self):
        with self.assertRaises(DomainError):
            fields.evaluate_batch([_point((5.0, 5.0), 0.1, 0.6)], "u", 1,
                                  self.params)

    def test_test_cube_inside(self):
        with self.assertRaises(DomainError):
            fields.weak_divergence(HalfSpacePoint((5.0, 5.0), 0.1), 0.2, 0.6,
                                   self.params)


class TestBadTerm(unittest.TestCase):
    def setUp(self):
        self.params = ModelParams(alpha=0.9, beta=0.4)
        self.spec = fast_quad_spec()
        self.lag = 1e-3

    def test_sign_by_set(self):
        on_a11 = fields.bad_term_Bw(_point((5.0, 5.0), 0.0, 0.5 + self.lag),
                                    1, self.params, self.spec)
        on_a12 = fields.bad_term_Bw(_point((5.0, -5.0), 0.0, 0.5 + self.lag),
                                    1, self.params, self.spec)
        self.assertGreater(on_a11.value, 0.0)
        self.assertLess(on_a12.value, 0.0)
        self.assertAlmostEqual(on_a11.value,
                               -on_a12.value,
                               delta=1e-6 * abs(on_a11.value) +
                               on_a11.error_estimate + on_a12.error_estimate)

    def test_linear_in_amplitude(self):
        x = _point((5.0, 5.0), 0.0, 0.5 + self.lag)
        single = fields.bad_term_Bw(x, 1, self.params, self.spec)
        double = fields.bad_term_Bw(x, 1, ModelParams(a=2.0), self.spec)
        self.assertAlmostEqual(double.value, 2 * single.value,
                               delta=1e-12 * abs(single.value))

    def test_translation_covariance(self):
        shifted = ForceProfiles(center=(3.0, -1.0))
        first = fields.bad_term_Bw(_point((5.0, 5.0), 0.0, 0.5 + self.lag),
                                   1, self.params, self.spec)
        second = fields.bad_term_Bw(_point((8.0, 4.0), 0.0, 0.5 + self.lag),
                                    1, self.params, self.spec, shifted)
        self.assertAlmostEqual(first.value, second.value,
                               delta=1e-10 * abs(first.value))

    def test_normal_derivative_decomposition(self):
        x = _point((5.0, 5.0), 0.05, 0.5 + self.lag)
        direct = fields.normal_deriv_W_direct(x, 1, self.params, self.spec)
        tangential = fields.velocity_WG(x, 1, self.params, self.spec,
                                        tangential_derivative=True)
        bad = fields.bad_term_Bw(x, 1, self.params, self.spec)
        allowed = 1e-4 * abs(direct.value) + direct.error_estimate + \
            tangential.error_estimate + bad.error_estimate
        self.assertAlmostEqual(direct.value,
                               tangential.value + bad.value,
                               delta=allowed)


class TestPressure(unittest.TestCase):
    def setUp(self):
        self.params = ModelParams(alpha=0.9, beta=0.4)
        self.spec = fast_quad_spec()

    def test_leading_part_near_singular_time(self):
        x = _point((0.0, 5.0), 0.5, 0.5 + 1e-3)
        split = fields.pressure_PiB_split(x, self.params, self.spec)
        psi = kernels.psi_profile(x.point, self.params, self.spec)
        self.assertLess(abs(split["J"].value), abs(split["I"].value))
        total = split["I"].value + split["J"].value
        self.assertEqual(np.sign(total), -np.sign(psi))


class TestBatch(unittest.TestCase):
    def test_order_preserved(self):
        params = ModelParams()
        spec = fast_quad_spec()
        points = [_point((5.0, 5.0), 0.2, 0.55), _point((4.0, -3.0), 0.4, 0.7)]
        batch = fields.evaluate_batch(points, "V", 2, params, spec, workers=1)
        single = [fields.velocity_V(x, 2, params, spec) for x in points]
        self.assertEqual([sample.location for sample in batch], points)
        self.assertEqual([sample.value for sample in batch],
                         [sample.value for sample in single])


if __name__ == '__main__':
    unittest.main()
