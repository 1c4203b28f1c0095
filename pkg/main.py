"""
Command-line entry point for the rolling-window storage market simulator.

    python main.py --config configs/case_study.json --scheme both settle
    python main.py --config configs/case_study.json --scenarios 100 --jobs 4 perturb

Exit codes: 0 ok, 1 domain error, 2 usage or configuration error.
"""

import argparse
import logging
import sys

from market.config import Settings, load_config
from market.errors import ConfigParseError, ConfigValidationError, MarketSimError, ScenarioFailed
from market.runner import COMMANDS, RunOptions

# exception type -> exit code, first match wins
EXIT_CODES = [
    (ConfigParseError, 2),
    (ConfigValidationError, 2),
    (MarketSimError, 1),
]

logger = logging.getLogger('runner')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="marketsim",
        description="Rolling-window dispatch, R-LMP/R-TLMP settlement and bid-incentive experiments",
    )
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--seed", type=int, help="base seed (overrides the config)")
    parser.add_argument("--scenarios", type=int, help="number of scenarios")
    parser.add_argument("--scheme", choices=["lmp", "tlmp", "both"], help="pricing scheme(s)")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--jobs", type=int, help="parallel workers (-1 for all cores)")
    parser.add_argument("command", choices=sorted(COMMANDS), help="what to run")
    return parser


def exit_code_for(error: Exception) -> int:
    for error_type, code in EXIT_CODES:
        if isinstance(error, error_type):
            return code
    return 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    settings = Settings()
    logging.basicConfig(
        level=getattr(logging, settings.log_level.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.StreamHandler()
        ]
    )

    if args.scenarios is not None and args.scenarios < 1:
        print("✗ --scenarios must be at least 1", file=sys.stderr)
        return 2

    try:
        run = load_config(args.config)
        options = RunOptions.resolve(
            run, settings,
            seed=args.seed, scenarios=args.scenarios, scheme=args.scheme, out=args.out, jobs=args.jobs,
        )
        outputs = COMMANDS[args.command](run, options)
    except ConfigValidationError as e:
        print(f"✗ Invalid configuration {args.config}:", file=sys.stderr)
        for violation in e.violations:
            print(f"   {violation}", file=sys.stderr)
        return exit_code_for(e)
    except ScenarioFailed as e:
        logger.error(f"Scenario {e.scenario_id} failed: {e.cause}", exc_info=True)
        print(f"✗ Scenario {e.scenario_id} failed: {e.cause}", file=sys.stderr)
        return exit_code_for(e)
    except MarketSimError as e:
        logger.error(f"{args.command} failed: {e}", exc_info=True)
        print(f"✗ {e}", file=sys.stderr)
        return exit_code_for(e)

    print(f"✓ {args.command} finished, outputs in {options.out_dir}")
    for path in outputs:
        print(f"   {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
