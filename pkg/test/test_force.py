"""Test: divergence free singular force"""
import unittest
import numpy as np
import torch
import torch_testing as tt
from scipy import special
from src import force
from src.errors import DomainError
from src.params import ModelParams, ForceProfiles, HalfSpacePoint

NUM_DECIMALS = 5


def _finite_difference(func, point, step):
    return (func(point + step) - func(point - step)) / (2 * step)


class TestTangentialProfile(unittest.TestCase):
    def setUp(self):
        self.profiles = ForceProfiles()

    def test_support_boundary(self):
        radius = self.profiles.bump_radius
        self.assertEqual(force.g_tangential(np.array([radius, 0.0])), 0.0)
        self.assertEqual(force.g_tangential(np.array([0.0, -1.5])), 0.0)

    def test_centre_value(self):
        radius = self.profiles.bump_radius
        coefficient = force.bump_normalization(radius, 2)
        self.assertAlmostEqual(force.g_tangential(np.zeros(2)),
                               coefficient * np.exp(-1 / radius**2),
                               places=14)

    def test_normalization_closed_form(self):
        # pi int_0^a exp(-1 / u) du with a = r0^2
        square = self.profiles.bump_radius**2
        mass = np.pi * (square * np.exp(-1 / square) - special.exp1(1 / square))
        self.assertAlmostEqual(force.bump_normalization(
            self.profiles.bump_radius, 2),
                               1 / mass,
                               delta=1e-9 / mass)

    def test_unit_mass_on_grid(self):
        grid = np.linspace(-1.0, 1.0, 801)
        step = grid[1] - grid[0]
        points = np.stack(np.meshgrid(grid, grid, indexing="ij"), axis=-1)
        mass = np.sum(force.g_tangential(points)) * step**2
        self.assertAlmostEqual(mass, 1.0, delta=1e-6)

    def test_gradient_matches_differences(self):
        rng = np.random.default_rng(5)
        step = 1e-6
        for _ in range(20):
            point = rng.uniform(-0.8, 0.8, size=2)
            grad = force.g_tangential_grad(point)
            for axis in range(2):
                shift = np.zeros(2)
                shift[axis] = step
                numeric = (force.g_tangential(point + shift) -
                           force.g_tangential(point - shift)) / (2 * step)
                self.assertAlmostEqual(grad[axis], numeric, delta=1e-6)

    def test_shifted_centre(self):
        shifted = ForceProfiles(center=(3.0, -1.0))
        self.assertAlmostEqual(force.g_tangential(np.array([3.0, -1.0]),
                                                  shifted),
                               force.g_tangential(np.zeros(2)),
                               places=14)


class TestNormalProfile(unittest.TestCase):
    def setUp(self):
        self.params = ModelParams(alpha=0.9, beta=0.4)
        self.profiles = ForceProfiles()

    def test_power_on_unit_interval(self):
        self.assertAlmostEqual(force.g_normal(0.25, self.params),
                               0.25**0.6,
                               places=14)
        self.assertAlmostEqual(force.g_normal(0.25, self.params), 0.43528,
                               places=NUM_DECIMALS)

    def test_vanishes_beyond_cutoff(self):
        self.assertEqual(force.g_normal(2.0, self.params), 0.0)
        self.assertEqual(force.g_normal(self.profiles.cutoff_end,
                                        self.params), 0.0)

    def test_below_boundary(self):
        with self.assertRaises(DomainError):
            force.g_normal(-0.1, self.params)

    def test_cutoff_derivatives_at_junctions(self):
        step = 1e-4
        for junction in (self.profiles.cutoff_start,
                         self.profiles.cutoff_end):
            # S is flat to all orders at both junctions
            for offset in (-2 * step, 2 * step):
                point = junction + offset
                numeric = _finite_difference(force.cutoff, point, step)
                self.assertAlmostEqual(force.cutoff_deriv(point), numeric,
                                       delta=1e-4)
            self.assertAlmostEqual(force.cutoff_deriv(junction), 0.0,
                                   delta=1e-12)

    def test_normal_derivative(self):
        for point in (0.3, 0.9, 1.2, 1.5, 1.8):
            numeric = _finite_difference(
                lambda y: force.g_normal(y, self.params), point, 1e-6)
            self.assertAlmostEqual(force.g_normal_deriv(point, self.params),
                                   numeric,
                                   delta=1e-5)

    def test_regular_part(self):
        points = np.array([0.0, 0.2, 1.4])
        regular = force.g_normal_deriv(points, self.params, regular=True)
        self.assertAlmostEqual(regular[0], 0.6, places=14)
        self.assertAlmostEqual(regular[1] * 0.2**-0.4,
                               force.g_normal_deriv(0.2, self.params),
                               places=12)

    def test_smoothstep_symmetry(self):
        u = np.linspace(0.0, 1.0, 11)
        tt.assert_almost_equal(
            torch.from_numpy(force.smoothstep(u) + force.smoothstep(1 - u)),
            torch.ones(11, dtype=torch.float64))


class TestTimeProfile(unittest.TestCase):
    def test_values(self):
        params = ModelParams(alpha=0.9)
        self.assertEqual(force.h_time(0.5, params), 0.0)
        self.assertEqual(force.h_time(0.2, params), 0.0)
        self.assertAlmostEqual(force.h_time(1.5, params), 1.0, places=14)
        self.assertAlmostEqual(force.h_time(0.51, params),
                               63.0957,
                               delta=1e-4)

    def test_array_input(self):
        values = force.h_time(np.array([0.4, 1.5]), ModelParams())
        tt.assert_almost_equal(torch.from_numpy(values),
                               torch.tensor([0.0, 1.0], dtype=torch.float64))


class TestForce(unittest.TestCase):
    def setUp(self):
        self.params = ModelParams(n=4, alpha=0.9, beta=0.4)

    def test_zero_components(self):
        point = HalfSpacePoint((0.1, -0.2, 0.3), 0.5)
        value = force.force_at(point, 0.8, self.params)
        self.assertEqual(value[0], 0.0)
        self.assertEqual(value[2], 0.0)
        self.assertNotEqual(value[1], 0.0)
        self.assertNotEqual(value[3], 0.0)

    def test_boundary_normal_component(self):
        point = HalfSpacePoint((0.1, 0.2, 0.0), 0.0)
        self.assertEqual(force.force_at(point, 0.8, self.params)[-1], 0.0)

    def test_before_onset(self):
        point = HalfSpacePoint((0.1, 0.2, 0.0), 0.5)
        tt.assert_almost_equal(
            torch.from_numpy(force.force_at(point, 0.4, self.params)),
            torch.zeros(4, dtype=torch.float64))

    def test_divergence_free(self):
        params = ModelParams(n=3)
        rng = np.random.default_rng(17)
        step = 1e-5
        for _ in range(100):
            tangential = rng.uniform(-0.55, 0.55, size=2)
            normal = rng.uniform(0.05, 1.85)
            t = rng.uniform(0.55, 2.0)

            def component(shift, index):
                point = HalfSpacePoint(tuple(tangential + shift[:2]),
                                       normal + shift[2])
                return force.force_at(point, t, params)[index]

            e_2, e_n = np.array([0, step, 0]), np.array([0, 0, step])
            d_2 = (component(e_2, 1) - component(-e_2, 1)) / (2 * step)
            d_n = (component(e_n, 2) - component(-e_n, 2)) / (2 * step)
            scale = max(abs(d_2), abs(d_n), 1e-8)
            self.assertLess(abs(d_2 + d_n) / scale, 1e-4)

    def test_near_boundary_scaling(self):
        params = ModelParams(n=3, alpha=0.9, beta=0.4, a=2.0)
        limit = (1 - params.beta) * force.g_tangential(np.zeros(2)) * params.a
        for y_n in (1e-3, 1e-6):
            t = 0.7
            value = force.force_at(HalfSpacePoint((0.0, 0.0), y_n), t,
                                   params)[1]
            scaled = value / (y_n**-params.beta * (t - 0.5)**-params.alpha)
            self.assertAlmostEqual(scaled, limit, places=NUM_DECIMALS)

    def test_dimension_mismatch(self):
        with self.assertRaises(DomainError):
            force.force_at(HalfSpacePoint((0.0, 0.0), 0.1), 1.0, self.params)


class TestMixedNorm(unittest.TestCase):
    def setUp(self):
        self.params = ModelParams(alpha=0.9, beta=0.4)
        self.deltas = [10.0**-k for k in range(2, 9)]

    def test_bounded_inside_range(self):
        params = ModelParams(alpha=0.3, beta=0.2)
        rows = force.mixed_norm(params, ForceProfiles(), 1.0, 2.0, self.deltas)
        norms = [row["norm"] for row in rows]
        self.assertTrue(all(np.isfinite(norms)))
        self.assertLess(norms[-1] / norms[-2] - 1, 1e-3)

    def test_growth_at_critical_time_exponent(self):
        rows = force.mixed_norm(self.params, ForceProfiles(), 1 / 0.9, 2.0,
                                self.deltas)
        norms = np.array([row["norm"] for row in rows])
        self.assertTrue(np.all(np.diff(norms) > 0))
        # ||h|| grows like log(1 / delta)^(1 / q1)
        self.assertGreater(norms[-1] / norms[0], 1.2)


if __name__ == '__main__':
    unittest.main()
