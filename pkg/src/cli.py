"""Command line entry point

    python -m src.cli run --config lab.json --suite shear --out results
    python -m src.cli print-defaults

Exit status 0 when every check of the run passed, 1 when a check failed,
2 on configuration errors.
"""
import sys
import json
import logging
from pathlib import Path
from datetime import datetime
from dataclasses import replace
from src import utils
from src.errors import ConfigError
from src.params import RunConfig, default_config_dict, load_config
from src.experiments.suites import SuiteRunner
from src.utils_dir import experiments
from src.utils_dir import pytorch as torch_utils

LOGGER = logging.getLogger(__name__)

EXIT_PASSED = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


def resolve_config(args, environ=None):
    """Config file (or defaults), then environment, then flags"""
    config = load_config(args.config) if args.config else RunConfig()
    overrides = utils.env_overrides(environ)
    flags = {
        "suite": args.suite,
        "output_dir": args.out,
        "seed": args.seed,
        "workers": args.workers
    }
    overrides.update(
        {key: value for key, value in flags.items() if value is not None})
    try:
        return replace(config, **overrides)
    except TypeError as err:
        raise ConfigError("Invalid override: {}".format(err)) from err


def run(config, argv=None, log_level=logging.INFO):
    """Run the configured suite, write report.json and metadata.json

    Returns:
        report (dict)
    """
    output_dir = Path(config.output_dir)
    log_file = Path("{}.log".format(datetime.now().strftime('%Y%m%d_%H%M%S')))
    utils.setup_logger(log_path=output_dir / "logs" / log_file,
                       log_level=log_level)
    LOGGER.info("Suite '{}', output in {}".format(config.suite, output_dir))
    torch_utils.torch_settings(config.seed)
    report = SuiteRunner(config).run()
    experiments.write_json(output_dir / "report.json", report)
    experiments.write_json(
        output_dir / "metadata.json",
        experiments.experiment_info(config, argv,
                                    {"log_file": str(log_file)}))
    LOGGER.info("Run {}".format("passed" if report["passed"] else "failed"))
    return report


def main(argv=None, environ=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = utils.parse_args(argv)
    if args.command == "print-defaults":
        print(json.dumps(default_config_dict(), indent=2, sort_keys=True))
        return EXIT_PASSED
    try:
        config = resolve_config(args, environ)
    except ConfigError as err:
        utils.setup_logger(log_level=args.log_level)
        LOGGER.error("Configuration error: {}".format(err))
        return EXIT_CONFIG
    report = run(config, argv, args.log_level)
    return EXIT_PASSED if report["passed"] else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
