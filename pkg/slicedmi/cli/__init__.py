"""
Command-line interface

    python -m slicedmi <command> [options]

Commands: estimate, oracle, indep, rates, smine, extract, gen. Exit codes:
0 success, 2 input error, 3 numerical or estimator error, 4 configuration
error.
"""
import argparse
import logging
import sys
import traceback
from typing import Any, Dict, List, Optional

from slicedmi import create_app
from slicedmi.cli.commands import COMMANDS
from slicedmi.cli.datasets import ensure_directory
from slicedmi.exceptions import ConfigError, SmiError
from slicedmi.models.estimates import UNITS
from slicedmi.models.run_config import RunConfig
from slicedmi.models.scenario import KINDS, LABELS
from slicedmi.models.settings import DEGENERACY_POLICIES, OPTIMIZERS
from slicedmi.services.sampling_service import SeededRng

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='run configuration JSON file')
    common.add_argument('--seed', type=int, help='64-bit unsigned seed')
    common.add_argument('--threads', type=int, help='worker threads (results do not depend on it)')
    common.add_argument('--unit', choices=UNITS, help='presentation unit of information values')
    common.add_argument('--output', help='output directory (default: $SMI_OUTPUT_DIR or results)')
    common.add_argument('--log-level', choices=('DEBUG', 'INFO', 'WARNING', 'ERROR'))
    common.add_argument('--progress', action='store_true', help='show progress bars')
    return common


def _training_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('x', nargs='?', help='x dataset file (optional with a data section)')
    parser.add_argument('y', nargs='?', help='y dataset file')
    parser.add_argument('--epochs', type=int)
    parser.add_argument('--batch-size', type=int)
    parser.add_argument('--learning-rate', type=float)
    parser.add_argument('--optimizer', choices=OPTIMIZERS)


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per operation"""
    common = _common_options()
    parser = argparse.ArgumentParser(prog='slicedmi', description='Sliced mutual information toolkit')
    commands = parser.add_subparsers(dest='command', required=True)

    estimate = commands.add_parser('estimate', parents=[common], help='SMI of two dataset files')
    estimate.add_argument('x')
    estimate.add_argument('y')
    estimate.add_argument('--m', type=int, help='number of slices')
    estimate.add_argument('--k', type=int, help='neighbor order')
    estimate.add_argument('--policy', choices=DEGENERACY_POLICIES, help='duplicate-point handling')
    estimate.add_argument('--clip', action='store_true', help='clip negative slice values to 0')
    estimate.add_argument('--per-slice', action='store_true', help='include per-slice values')

    oracle = commands.add_parser('oracle', parents=[common], help='closed-form Gaussian SMI')
    oracle.add_argument('--rho', type=float, help='scalar Gaussian pair with this correlation')
    oracle.add_argument('--m', type=int, help='Monte-Carlo slices')
    oracle.add_argument('--quadrature-grid', type=int, help='quadrature points per angle (2x2 specs)')

    indep = commands.add_parser('indep', parents=[common], help='independence-testing AUC table')
    indep.add_argument('--scenario', help=f"one of {', '.join(KINDS)} or a label {'/'.join(sorted(LABELS))}")
    indep.add_argument('--dims', help='comma-separated dimensions')
    indep.add_argument('--sizes', help='comma-separated sample sizes')
    indep.add_argument('--trials', type=int)
    indep.add_argument('--m', type=int)
    indep.add_argument('--k', type=int)

    rates = commands.add_parser('rates', parents=[common], help='RMSE convergence sweep')
    rates.add_argument('--trials', type=int)
    rates.add_argument('--truth', type=float, help='pinned ground-truth SMI in nats')
    rates.add_argument('--sweeps', help='comma-separated subset of joint,n,m,grid')
    rates.add_argument('--n-values', help='comma-separated sample counts')
    rates.add_argument('--m-values', help='comma-separated slice counts')
    rates.add_argument('--classic-mi', action='store_true', default=None,
                       help='also score classic kNN MI against the closed-form Gaussian MI')

    smine = commands.add_parser('smine', parents=[common], help='train the variational estimator')
    _training_options(smine)
    smine.add_argument('--no-slicing', action='store_true', help='classic MINE on (x, y)')
    smine.add_argument('--slices-per-batch', type=int)

    extract = commands.add_parser('extract', parents=[common], help='SMI-maximizing linear features')
    _training_options(extract)
    extract.add_argument('--r-x', type=int, help='rows of A_x (default d_x)')
    extract.add_argument('--r-y', type=int, help='rows of A_y (0 leaves y unprocessed)')

    gen = commands.add_parser('gen', parents=[common], help='write a synthetic scenario to x.csv/y.csv')
    gen.add_argument('--scenario')
    gen.add_argument('--n', type=int)
    gen.add_argument('--d', type=int)
    gen.add_argument('--d-total', type=int)
    gen.add_argument('--x-range', help='first,last (1-based, inclusive)')
    gen.add_argument('--y-range', help='first,last (1-based, inclusive)')
    return parser


def load_run_config(path: Optional[str], defaults: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Parse the run configuration file layered over the profile defaults"""
    if path is None:
        return RunConfig.from_dict(defaults or {})
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            text = handle.read()
    except UnicodeDecodeError as e:
        raise ConfigError(f"run configuration is not valid text: {e.reason}", path=path) from e
    except OSError as e:
        raise ConfigError(f"cannot read run configuration: {e.strerror}", path=path) from e
    return RunConfig.from_json(text, defaults)


def resolve_run_config(args, app_config) -> RunConfig:
    """Profile defaults, then file values, then flag overrides; draws a seed when none is given"""
    run_config = load_run_config(args.config, app_config.run_defaults())
    overrides = {'seed': args.seed, 'threads': args.threads, 'unit': args.unit, 'output_path': args.output}
    data = run_config.to_dict()
    data.update({key: value for key, value in overrides.items() if value is not None})
    run_config = RunConfig.from_dict(data)
    if run_config.seed is None:
        run_config.seed = SeededRng().seed
        logger.info(f"No seed given; using {run_config.seed}")
    return run_config


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point; returns the process exit code"""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        app_config = create_app(log_level=args.log_level)
        run_config = resolve_run_config(args, app_config)
        output_dir = ensure_directory(run_config.output_path or app_config.OUTPUT_DIR)
        progress = args.progress or app_config.SHOW_PROGRESS
        logger.info(f"Running {args.command} (seed={run_config.seed}, unit={run_config.unit}, "
                    f"threads={run_config.threads}, output={output_dir})")
        written = COMMANDS[args.command](args, run_config, output_dir, progress)
    except SmiError as e:
        logger.error(f"{args.command} failed: {e}")
        logger.error(traceback.format_exc())
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        logger.error(f"{args.command} failed: {e}")
        logger.error(traceback.format_exc())
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT

    for path in written:
        print(path)
    return EXIT_OK
