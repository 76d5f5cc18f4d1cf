"""
Main application entry point
"""

import sys
import logging
import argparse
from typing import List, Optional

try:
    from .experiments.config import ExperimentConfig
    from .experiments.commands import (
        cmd_analytic_bounds, cmd_analytic_convergence, cmd_simulate, cmd_topo_stats, cmd_fit,
    )
    from .experiments.presets import PRESETS, cmd_reproduce
    from .experiments.plots import cmd_emit_plots
    from .utils.errors import ConfigError, InterSdnError
    from .utils.settings import settings
    from .utils.constants import APP_TITLE, APP_VERSION, EXIT_OK, EXIT_CONFIG_ERROR, EXIT_RUNTIME_ERROR
except ImportError:
    from experiments.config import ExperimentConfig
    from experiments.commands import (
        cmd_analytic_bounds, cmd_analytic_convergence, cmd_simulate, cmd_topo_stats, cmd_fit,
    )
    from experiments.presets import PRESETS, cmd_reproduce
    from experiments.plots import cmd_emit_plots
    from utils.errors import ConfigError, InterSdnError
    from utils.settings import settings
    from utils.constants import APP_TITLE, APP_VERSION, EXIT_OK, EXIT_CONFIG_ERROR, EXIT_RUNTIME_ERROR

logger = logging.getLogger(__name__)


def _add_config_options(parser: argparse.ArgumentParser):
    parser.add_argument('--config', help='Experiment configuration file (JSON)')
    parser.add_argument('--set', dest='assignments', action='append', default=[], metavar='SECTION.KEY=VALUE',
                        help='Override one configuration key (repeatable)')
    parser.add_argument('--seed', type=int, help='Master seed')
    parser.add_argument('--trials', type=int, help='Monte-Carlo trials per cluster size')
    parser.add_argument('--output', help='Output directory')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='intersdn', description=APP_TITLE)
    parser.add_argument('--version', action='version', version=f'%(prog)s {APP_VERSION}')
    parser.add_argument('-v', '--verbose', action='store_true', help='Enable debug logging')
    commands = parser.add_subparsers(dest='command', required=True)

    bounds = commands.add_parser('bounds', help='Analytic data-plane bounds across the k sweep')
    _add_config_options(bounds)

    converge = commands.add_parser('converge', help='Analytic convergence times across the k sweep')
    _add_config_options(converge)

    simulate = commands.add_parser('simulate', help='Monte-Carlo simulation across the k sweep')
    _add_config_options(simulate)

    topo = commands.add_parser('topo-stats', help='Topology size, path lengths and centrality')
    _add_config_options(topo)
    topo.add_argument('--export-edges', action='store_true', help='Also write the edge list')

    reproduce = commands.add_parser('reproduce', help='Run a named reproduction')
    reproduce.add_argument('preset', choices=sorted(PRESETS))
    reproduce.add_argument('--set', dest='assignments', action='append', default=[], metavar='SECTION.KEY=VALUE')
    reproduce.add_argument('--seed', type=int)
    reproduce.add_argument('--trials', type=int)
    reproduce.add_argument('--output')

    plots = commands.add_parser('emit-plots', help='Write plotting scripts for a results directory')
    plots.add_argument('results_dir')

    fit = commands.add_parser('fit', help='Fit an exponential update-time model to observations')
    fit.add_argument('observations', help='CSV with columns t_sd,d')
    fit.add_argument('--output', help='Write the fitted model as JSON')

    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.config:
        config = ExperimentConfig.load(args.config)
    else:
        config = ExperimentConfig.from_dict({}, name=args.command.replace('-', '_'))
    return config.with_overrides(args.assignments, args.seed, args.trials, args.output)


def run_command(args: argparse.Namespace):
    if args.command == 'bounds':
        table = cmd_analytic_bounds(load_config(args))
        print(table.to_string(index=False))
    elif args.command == 'converge':
        table = cmd_analytic_convergence(load_config(args))
        print(table.to_string(index=False))
    elif args.command == 'simulate':
        result = cmd_simulate(load_config(args))
        print(result.tc_frame().to_string(index=False))
    elif args.command == 'topo-stats':
        stats = cmd_topo_stats(load_config(args), args.export_edges)
        for key, value in stats.items():
            print(f"{key}: {value}")
    elif args.command == 'reproduce':
        for path in cmd_reproduce(args.preset, args.assignments, args.seed, args.trials, args.output):
            print(path)
    elif args.command == 'emit-plots':
        for path in cmd_emit_plots(args.results_dir):
            print(path)
    elif args.command == 'fit':
        model = cmd_fit(args.observations, args.output)
        print(model.describe())


def main(argv: Optional[List[str]] = None) -> int:
    """Main application function"""
    args = build_parser().parse_args(argv)

    # Configure logging
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else getattr(logging, settings.log_level, logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    try:
        run_command(args)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG_ERROR
    except (InterSdnError, OSError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_RUNTIME_ERROR
    except KeyboardInterrupt:
        logger.warning("Interrupted by user")
        return EXIT_RUNTIME_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
