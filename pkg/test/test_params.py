"""Test: value objects and run configuration"""
import json
import tempfile
import unittest
from pathlib import Path
from src.errors import ConfigError, DomainError
from src.params import (ModelParams, QuadSpec, QuadResult, HalfSpacePoint,
                        ShearParams, GFunArgs, RunConfig, SUITES,
                        default_config_dict, config_from_dict, load_config)


class TestValueObjects(unittest.TestCase):
    def test_model_params(self):
        params = ModelParams()
        self.assertTrue(params.weak_solution)
        self.assertAlmostEqual(params.holder_exponent, 0.8, places=12)
        self.assertFalse(ModelParams(beta=0.6).weak_solution)

    def test_invalid_model_params(self):
        for kwargs in ({"n": 2}, {"alpha": 1.0}, {"beta": 0.0}, {"a": -1.0}):
            with self.assertRaises(DomainError, msg=str(kwargs)):
                ModelParams(**kwargs)

    def test_point(self):
        point = HalfSpacePoint((1.0, 2.0), 0.5)
        self.assertEqual(point.dim, 3)
        self.assertEqual(list(point.reflected()), [1.0, 2.0, -0.5])
        with self.assertRaises(DomainError):
            HalfSpacePoint((1.0, 2.0), -0.1)
        with self.assertRaises(DomainError):
            HalfSpacePoint((1.0, ), 0.1)

    def test_quad_spec(self):
        spec = QuadSpec(rel_tol=1e-6, abs_tol=1e-10)
        tight = spec.tightened(100.0)
        self.assertAlmostEqual(tight.rel_tol, 1e-8, places=20)
        self.assertAlmostEqual(tight.abs_tol, 1e-12, places=24)
        self.assertEqual(spec.tolerance(2.0), 2e-6)
        with self.assertRaises(DomainError):
            QuadSpec(rel_tol=0.0)

    def test_quad_result(self):
        total = QuadResult(1.0, 1e-3, 5) + QuadResult(2.0, 2e-3, 7)
        self.assertEqual(total.value, 3.0)
        self.assertEqual(total.evaluations, 12)
        self.assertAlmostEqual(total.scaled(-2.0).error_estimate, 6e-3)
        with self.assertRaises(DomainError):
            QuadResult(1.0, -1.0)

    def test_ranges(self):
        with self.assertRaises(DomainError):
            ShearParams(0.5)
        with self.assertRaises(DomainError):
            GFunArgs(0.0, 0.5, -0.5)


class TestRunConfig(unittest.TestCase):
    def test_defaults_round_trip(self):
        document = json.loads(json.dumps(default_config_dict()))
        self.assertEqual(config_from_dict(document), RunConfig())
        self.assertEqual(document["params"]["n"], 3)
        self.assertIn("params.alpha", document["_doc"])
        self.assertIn("suite", document["_doc"])

    def test_suites(self):
        self.assertEqual(SUITES[-1], "all")
        with self.assertRaises(ConfigError):
            RunConfig(suite="everything")

    def test_workers(self):
        with self.assertRaises(ConfigError):
            RunConfig(workers=0)

    def test_unknown_key(self):
        with self.assertRaises(ConfigError):
            config_from_dict({"suit": "shear"})

    def test_invalid_section(self):
        with self.assertRaises(ConfigError):
            config_from_dict({"params": [0.9, 0.4]})
        with self.assertRaises(ConfigError):
            config_from_dict({"params": {"gamma": 1.0}})
        with self.assertRaises(ConfigError):
            config_from_dict({"quad": {"rel_tol": -1.0}})

    def test_partial_document(self):
        config = config_from_dict({
            "params": {
                "alpha": 0.7
            },
            "suite": "holder",
            "grids": {
                "holder": {
                    "x": [6.0, 6.0]
                }
            }
        })
        self.assertEqual(config.params, ModelParams(alpha=0.7))
        self.assertEqual(config.suite, "holder")
        self.assertEqual(config.grids["holder"]["x"], [6.0, 6.0])

    def test_load_config(self):
        with tempfile.TemporaryDirectory() as tmp_dir:
            path = Path(tmp_dir) / "lab.json"
            path.write_text(json.dumps({"seed": 9, "output_dir": "out"}))
            config = load_config(path)
            self.assertEqual(config.seed, 9)
            self.assertEqual(config.output_dir, Path("out"))
            path.write_text("{not json")
            with self.assertRaises(ConfigError):
                load_config(path)
            path.write_text("[1, 2]")
            with self.assertRaises(ConfigError):
                load_config(path)
        with self.assertRaises(ConfigError):
            load_config(Path("/no/such/lab.json"))


if __name__ == '__main__':
    unittest.main()
