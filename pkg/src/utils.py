"""Utilities module

Logger setup, command line arguments and environment overrides
"""
import os
import sys
import logging
import argparse
from pathlib import Path
from src.errors import ConfigError

ENV_OUTPUT_DIR = "HALFSPACE_LAB_OUTPUT_DIR"
ENV_WORKERS = "HALFSPACE_LAB_WORKERS"


def parse_args(argv=None):
    """Arg parser

    Subcommands:
        run: execute a verification suite
        print-defaults: print the default configuration document
    """
    parser = argparse.ArgumentParser(
        description="Boundary singularities of the half-space Stokes flow")
    subparsers = parser.add_subparsers(dest="command")
    subparsers.required = True
    run = subparsers.add_parser("run", help="Run a verification suite")
    run.add_argument("--config",
                     type=_config_path_arg,
                     default=None,
                     help="JSON configuration file")
    run.add_argument("--suite",
                     type=str,
                     default=None,
                     help="Suite name, overrides the config")
    run.add_argument("--out",
                     type=Path,
                     default=None,
                     help="Output directory, overrides the config")
    run.add_argument("--seed",
                     type=int,
                     default=None,
                     help="Seed of randomized checks")
    run.add_argument("--workers",
                     type=int,
                     default=None,
                     help="Parallel workers, -1 for all cores")
    run.add_argument("--log_level",
                     type=_log_level_arg,
                     default=logging.INFO,
                     help="Log level")
    subparsers.add_parser("print-defaults",
                          help="Print the default configuration")

    return parser.parse_args(argv)


LOG_LEVELS = {
    "DEBUG": logging.DEBUG,
    "INFO": logging.INFO,
    "WARNING": logging.WARNING,
    "ERROR": logging.ERROR,
    "CRITICAL": logging.CRITICAL
}


def _log_level_arg(arg_string):
    level = LOG_LEVELS.get(arg_string.upper())
    if level is None:
        raise argparse.ArgumentTypeError("Invalid log level '{}', one of {}"
                                         .format(arg_string,
                                                 ", ".join(LOG_LEVELS)))
    return level


def _config_path_arg(arg_string):
    config_path = Path(arg_string)
    if not config_path.exists():
        raise argparse.ArgumentTypeError(
            "Config file does not exist: {}".format(config_path))
    return config_path


def env_overrides(environ=None):
    """Output directory and worker count from the environment, if set"""
    environ = os.environ if environ is None else environ
    overrides = dict()
    if environ.get(ENV_OUTPUT_DIR):
        overrides["output_dir"] = Path(environ[ENV_OUTPUT_DIR])
    if environ.get(ENV_WORKERS):
        try:
            overrides["workers"] = int(environ[ENV_WORKERS])
        except ValueError as err:
            raise ConfigError("{} must be an integer, got '{}'".format(
                ENV_WORKERS, environ[ENV_WORKERS])) from err
    return overrides


LOG_FORMAT = "%(asctime)-15s %(levelname)-5s %(name)-15s - %(message)s"


def setup_logger(log_path=None,
                 logger=None,
                 log_level=logging.INFO,
                 fmt=LOG_FORMAT,
                 stream=None):
    """Route a logger to the console and, when log_path is given, a file

    Existing handlers are replaced so repeated runs in one process do not
    duplicate records.

    Args:
        log_path (str, optional): log file, parent directories are created
        logger (logging.Logger, optional): defaults to the root logger
        log_level (int): threshold of the logger
        fmt (str): record format
        stream (file, optional): console stream, stdout by default
    """
    logger = logger or logging.getLogger()
    handlers = [logging.StreamHandler(stream or sys.stdout)]
    if log_path:
        log_path = Path(log_path)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(str(log_path)))
    formatter = logging.Formatter(fmt=fmt)
    for handler in logger.handlers:
        handler.close()
    logger.handlers = []
    for handler in handlers:
        handler.setFormatter(formatter)
        logger.addHandler(handler)
    logger.setLevel(log_level)
    if log_path:
        logger.info("Logging to {}".format(log_path))
    return logger
