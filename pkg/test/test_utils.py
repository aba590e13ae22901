import io
import argparse
import logging
import tempfile
import unittest
from pathlib import Path
from src import utils
from src.errors import ConfigError


class TestParseArgs(unittest.TestCase):
    def test_run_defaults(self):
        args = utils.parse_args(["run"])
        self.assertEqual(args.command, "run")
        self.assertIsNone(args.config)
        self.assertIsNone(args.suite)
        self.assertIsNone(args.workers)
        self.assertEqual(args.log_level, logging.INFO)

    def test_run_flags(self):
        args = utils.parse_args([
            "run", "--suite", "shear", "--out", "somewhere", "--seed", "3",
            "--workers", "2", "--log_level", "debug"
        ])
        self.assertEqual(args.suite, "shear")
        self.assertEqual(args.out, Path("somewhere"))
        self.assertEqual(args.seed, 3)
        self.assertEqual(args.workers, 2)
        self.assertEqual(args.log_level, logging.DEBUG)

    def test_print_defaults(self):
        self.assertEqual(
            utils.parse_args(["print-defaults"]).command, "print-defaults")

    def test_missing_command(self):
        with self.assertRaises(SystemExit):
            utils.parse_args([])

    def test_missing_config_file(self):
        with self.assertRaises(SystemExit):
            utils.parse_args(["run", "--config", "/no/such/config.json"])


class TestLogLevel(unittest.TestCase):
    def test_levels(self):
        self.assertEqual(utils._log_level_arg("warning"), logging.WARNING)
        self.assertEqual(utils._log_level_arg("ERROR"), logging.ERROR)
        self.assertEqual(utils._log_level_arg("Critical"), logging.CRITICAL)

    def test_invalid_level(self):
        with self.assertRaises(argparse.ArgumentTypeError):
            utils._log_level_arg("verbose")


class TestEnvOverrides(unittest.TestCase):
    def test_empty_environment(self):
        self.assertEqual(utils.env_overrides({}), {})

    def test_overrides(self):
        overrides = utils.env_overrides({
            utils.ENV_OUTPUT_DIR: "/tmp/lab",
            utils.ENV_WORKERS: "4",
            "UNRELATED": "1"
        })
        self.assertEqual(overrides, {
            "output_dir": Path("/tmp/lab"),
            "workers": 4
        })

    def test_invalid_workers(self):
        with self.assertRaises(ConfigError):
            utils.env_overrides({utils.ENV_WORKERS: "many"})


class TestSetupLogger(unittest.TestCase):
    def test_file_and_console(self):
        stream = io.StringIO()
        logger = logging.getLogger("test_setup_logger")
        with tempfile.TemporaryDirectory() as tmp_dir:
            log_path = Path(tmp_dir) / "logs" / "run.log"
            utils.setup_logger(log_path, logger, logging.INFO, stream=stream)
            logger.debug("hidden")
            logger.info("visible")
            for handler in logger.handlers:
                handler.flush()
            text = log_path.read_text()
            self.assertIn("visible", text)
            self.assertNotIn("hidden", text)
            self.assertIn("visible", stream.getvalue())
            utils.setup_logger(logger=logger, stream=stream)
            self.assertEqual(len(logger.handlers), 1)


if __name__ == '__main__':
    unittest.main()
