"""Test: boundary sets and their sign inequalities"""
import unittest
import numpy as np
from src import regions
from src.errors import DomainError
from src.params import RegionKind, RegionLabel


class TestClassify(unittest.TestCase):
    def test_labels(self):
        cases = [((5.0, 5.0), RegionKind.A_I1), ((5.0, -5.0), RegionKind.A_I2),
                 ((-5.0, 4.0), RegionKind.A_I2), ((10.0, 0.5), RegionKind.B_I1),
                 ((1.0, 1.0), RegionKind.NONE)]
        for point, kind in cases:
            label = regions.classify(np.array(point), 1)
            self.assertIs(label.kind, kind, msg=str(point))

    def test_label_text(self):
        self.assertEqual(str(RegionLabel(RegionKind.A_I2, 1)), "A_12")
        self.assertEqual(str(RegionLabel(RegionKind.NONE)), "none")

    def test_printed_b2_never_holds(self):
        point = np.array([0.5, 10.0])
        self.assertIs(regions.classify(point, 1).kind, RegionKind.NONE)
        self.assertIs(
            regions.classify(point, 1, corrected=True).kind, RegionKind.B_I2)

    def test_a_sets_invariant_under_dilation(self):
        for n in (3, 4):
            for kind in (RegionKind.A_I1, RegionKind.A_I2):
                points = regions.sample_region(kind, 1, n, samples=500,
                                               seed=5)
                for scale in (1.0, 1.5, 10.0):
                    masks = regions.region_masks(scale * points, 1)
                    self.assertTrue(np.all(masks[kind]),
                                    msg="{} n={} scale={}".format(
                                        kind.value, n, scale))

    def test_index_two_rejected(self):
        with self.assertRaises(DomainError):
            regions.classify(np.array([5.0, 5.0]), 2)

    def test_higher_dimension(self):
        point = np.array([5.0, 5.0, 0.5])
        self.assertIs(regions.classify(point, 3).kind, RegionKind.NONE)
        self.assertIs(regions.classify(point, 1).kind, RegionKind.A_I1)


class TestSampling(unittest.TestCase):
    def test_samples_are_members(self):
        for kind in regions.ORDER:
            points = regions.sample_region(kind, 1, 3, samples=500, seed=3)
            self.assertEqual(points.shape, (500, 2))
            masks = regions.region_masks(points, 1, corrected=True)
            self.assertTrue(np.all(masks[kind]), msg=kind.value)

    def test_reproducible(self):
        first = regions.sample_region(RegionKind.B_I1, 1, 3, samples=100,
                                      seed=7)
        second = regions.sample_region(RegionKind.B_I1, 1, 3, samples=100,
                                       seed=7)
        np.testing.assert_array_equal(first, second)

    def test_ball(self):
        points = regions.sample_ball(1000, 2, 0.9, seed=1)
        self.assertLessEqual(np.max(np.linalg.norm(points, axis=-1)), 0.9)


class TestInequalities(unittest.TestCase):
    def test_no_counterexample(self):
        report = regions.verify_sign_inequalities(samples=20000, seed=2)
        self.assertTrue(report["passed"])
        self.assertEqual(len(report["inequalities"]), 4)
        for entry in report["inequalities"]:
            self.assertGreaterEqual(entry["min_slack"], 0.0)
            self.assertIsNone(entry["counterexample"])

    def test_wide_force_support_breaks_b1(self):
        # y' far outside the force support violates the B_i1 chain
        entry = regions.check_inequality(RegionKind.B_I1,
                                         samples=20000,
                                         seed=2,
                                         patch=(2.0, 3.0),
                                         y_radius=20.0)
        self.assertLess(entry["min_slack"], 0.0)
        self.assertIsNotNone(entry["counterexample"])

    def test_printed_b2_empty(self):
        report = regions.printed_b2_is_empty(samples=100000, seed=1)
        self.assertTrue(report["empty"])
        self.assertEqual(report["members"], 0)

    def test_corrected_sets_disjoint(self):
        report = regions.check_disjointness(samples=100000, seed=1)
        self.assertTrue(report["disjoint"])
        self.assertGreater(report["counts"]["B_i2"], 0)
        self.assertGreater(report["counts"]["A_i1"], 0)


if __name__ == '__main__':
    unittest.main()
