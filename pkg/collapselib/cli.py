""" Command line front end.

Every command is a pure function of its configuration and seed, reports go to --out (or stdout) and logging to stderr.
"""
import argparse
import json
import sys
import typing

import yaml

import collapselib
from collapselib import __version__, config as run_config, logging
from collapselib.data import unit
from collapselib.file import report
from collapselib.logging import helper
from collapselib.model import collapse_dynamics, criteria, measurement_chain
from collapselib.util import arg_helper


__all__ = ['main', 'EXIT_OK', 'EXIT_CONFIG', 'EXIT_RUNTIME']


EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

_logger = logging.get_logger(__name__)

_Command = typing.Callable[[run_config.RunConfig, argparse.Namespace], typing.Tuple[typing.Dict[str, typing.Any],
                                                                                     typing.Optional[str]]]


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> typing.NoReturn:  # type: ignore[override]
        raise run_config.ConfigError(f"{self.prog}: {message}")


def _trajectory_analytics(params: collapse_dynamics.GrwParams) -> typing.Optional[typing.Dict[str, typing.Any]]:
    if params.rate == 0:
        return None

    t_regime = collapse_dynamics.regime_time(params)
    width = collapse_dynamics.equilibrium_width(params)

    return {
        'rate_s-1': params.rate,
        'regime_time_s': t_regime,
        'regime_time': unit.format_quantity(t_regime, unit.SECOND),
        'equilibrium_width_cm': width,
        'equilibrium_width': unit.format_quantity(width, unit.CM)
    }


def cmd_trajectory(config: run_config.RunConfig, args: argparse.Namespace) \
        -> typing.Tuple[typing.Dict[str, typing.Any], typing.Optional[str]]:
    params = config.grw_params()
    analytics = _trajectory_analytics(params)

    if analytics is not None:
        _logger.info(f"Regime time {analytics['regime_time']}, equilibrium width {analytics['equilibrium_width']}")

    record = collapse_dynamics.simulate_trajectory(config.initial_packet(), params, config['duration'], config.mode,
                                                   config.seed, config['samples'], config['record_hits'])

    payload: typing.Dict[str, typing.Any] = {
        'analytics': analytics,
        'trajectory': record.to_json()
    }

    if config['trajectories'] > 1:
        ensemble = collapse_dynamics.run_ensemble(config.initial_packet(), params, config['duration'],
                                                  config['trajectories'], config.seed, config.mode,
                                                  config['ensemble_chunk_size'], args.jobs)
        payload['ensemble'] = ensemble.to_json()

    csv = report.dumps_csv(collapse_dynamics.TRAJECTORY_CSV_HEADER, record.rows())

    return payload, csv


def cmd_equilibrium(config: run_config.RunConfig, _: argparse.Namespace) \
        -> typing.Tuple[typing.Dict[str, typing.Any], typing.Optional[str]]:
    summary = collapse_dynamics.equilibrium_summary(config.grw_params(), config['typical_precision'],
                                                    config['window'], config['near_offset'], config['far_offset'])

    rows = [(key, value) for key, value in sorted(summary.items()) if isinstance(value, (int, float, str))]

    return summary, report.dumps_csv(('quantity', 'value'), rows)


def _sweep_grid(config: run_config.RunConfig, n_star: typing.Optional[int]) -> typing.List[int]:
    if config['n_grid'] is not None:
        return sorted(set(config['n_grid']))

    if n_star is None:
        return [1, 10, 100, 1000]

    candidates = {1, n_star // 4, n_star // 2, n_star - 1, n_star, n_star + 1, 2 * n_star, 4 * n_star}

    return sorted(n for n in candidates if n >= 1)


_SWEEP_HEADER = ('n', 'all_in_status', 'all_in_holds', 'per_marble_holds', 'proximity_sign', 'proximity_log10_mag',
                 'r2_in_sign', 'r2_in_log10_mag', 'accessible_in', 'anomaly_exhibited', 'at_threshold')


def cmd_anomaly_sweep(config: run_config.RunConfig, _: argparse.Namespace) \
        -> typing.Tuple[typing.Dict[str, typing.Any], typing.Optional[str]]:
    marble = config.marble()

    try:
        n_star: typing.Optional[int] = criteria.anomaly_threshold(marble.log_alpha_sq, config['p'])
    except criteria.NoFiniteThreshold:
        n_star = None

    rows = []

    for n in _sweep_grid(config, n_star):
        enumeration = criteria.enumeration_report(config.product_state(n), config['p'],
                                                  config['accessibility_epsilon'])

        ratio = enumeration.accessibility_in.ratio_sq

        row = {
            'n': n,
            'all_in_status': enumeration.all_in_fuzzy.status.value,
            'all_in_holds': enumeration.all_in_fuzzy.holds,
            'per_marble_holds': all(verdict.holds for _, _, verdict in enumeration.per_marble),
            **report.log_columns('proximity', enumeration.scalar_product_log),
            'r2_in_sign': None if ratio is None else ratio.sign,
            'r2_in_log10_mag': None if ratio is None else ratio.log10_mag,
            'accessible_in': enumeration.accessibility_in.accessible,
            'anomaly_exhibited': enumeration.anomaly_exhibited,
            'at_threshold': n == n_star
        }

        rows.append(row)

    payload = {
        'anomaly_threshold': n_star,
        'p': config['p'],
        'rows': rows
    }

    return payload, report.dumps_csv(_SWEEP_HEADER, ([row[key] for key in _SWEEP_HEADER] for row in rows))


_ACCESSIBILITY_HEADER = ('region', 'mean_mass_sign', 'mean_mass_log10_mag', 'variance_sign', 'variance_log10_mag',
                         'ratio_sq_sign', 'ratio_sq_log10_mag', 'accessible', 'vacuous')


def cmd_accessibility(config: run_config.RunConfig, _: argparse.Namespace) \
        -> typing.Tuple[typing.Dict[str, typing.Any], typing.Optional[str]]:
    enumeration = criteria.enumeration_report(config.product_state(), config['p'], config['accessibility_epsilon'])
    reports = (enumeration.accessibility_in, enumeration.accessibility_out)

    payload = {
        'accessibility_in': enumeration.accessibility_in.to_json(),
        'accessibility_out': enumeration.accessibility_out.to_json(),
        'expected_in_mass': enumeration.accessibility_in.mean_mass.to_json(),
        'expected_in_mass_g': enumeration.accessibility_in.expected_mass(config['marble_mass']),
        'enumeration': enumeration.to_json()
    }

    rows = []

    for r in reports:
        ratio = {'ratio_sq_sign': None, 'ratio_sq_log10_mag': None} if r.ratio_sq is None else \
            report.log_columns('ratio_sq', r.ratio_sq)

        rows.append([r.region.value, *report.log_columns('mean_mass', r.mean_mass).values(),
                     *report.log_columns('variance', r.variance).values(), *ratio.values(), r.accessible, r.vacuous])

    return payload, report.dumps_csv(_ACCESSIBILITY_HEADER, rows)


def cmd_chain(config: run_config.RunConfig, args: argparse.Namespace) \
        -> typing.Tuple[typing.Dict[str, typing.Any], typing.Optional[str]]:
    summary = measurement_chain.run_chain(config.chain_params(), config['trials'], args.jobs,
                                          config['chain_chunk_size'])

    rows = zip(range(len(summary.k_histogram)), summary.k_histogram, summary.reading_histogram)

    return summary.to_json(), report.dumps_csv(('k', 'marbles_in_count', 'reading_count'), rows)


_COMMANDS: typing.Dict[str, typing.Tuple[_Command, str]] = {
    'trajectory': (cmd_trajectory, 'Simulate the centre of mass of one marble under localization hits'),
    'equilibrium': (cmd_equilibrium, 'Regime time, equilibrium width and tail probabilities'),
    'anomaly-sweep': (cmd_anomaly_sweep, 'Sweep the number of marbles across the counting anomaly threshold'),
    'accessibility': (cmd_accessibility, 'Mass accessibility in and out of the box'),
    'chain': (cmd_chain, 'Monte Carlo simulation of the counting apparatus chain')
}


def _add_global_arguments(parser: argparse.ArgumentParser) -> None:
    # Suppressed defaults so flags may appear before or after the command
    parser.add_argument('--seed', default=argparse.SUPPRESS, help='unsigned 64-bit master seed')
    parser.add_argument('--config', default=argparse.SUPPRESS, type=arg_helper.parse_path,
                        help='flat YAML or JSON config file, or a previous report')
    parser.add_argument('--out', default=argparse.SUPPRESS, type=arg_helper.parse_path,
                        help='report output path, stdout when omitted')
    parser.add_argument('--format', default=argparse.SUPPRESS, choices=('json', 'csv'), help='report format')
    parser.add_argument('--set', default=argparse.SUPPRESS, action='append', metavar='KEY=VALUE',
                        help='override a configuration key, may be repeated')
    parser.add_argument('--rate', default=argparse.SUPPRESS, help='amplified localization rate λ (s⁻¹)')
    parser.add_argument('--jobs', default=argparse.SUPPRESS, type=int, help='parallel workers for ensembles')
    parser.add_argument('--log-level', default=argparse.SUPPRESS, type=str.upper, metavar='LEVEL',
                        choices=sorted(logging.NAME_TO_LEVEL), help='console log level, eg. INFO or EVENT')


def _build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog='collapselib', description='Spontaneous localization and marble counting toolkit')
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    _add_global_arguments(parser)

    subparsers = parser.add_subparsers(dest='command', metavar='command', parser_class=_ArgumentParser)
    subparsers.required = True

    for name, (_, description) in _COMMANDS.items():
        _add_global_arguments(subparsers.add_parser(name, help=description, description=description))

    return parser


def _emit_error(exc: BaseException, exit_code: int) -> int:
    sys.stderr.write(json.dumps({
        'error': type(exc).__name__,
        'message': str(exc).replace('\n', ' '),
        'exit_code': exit_code
    }, sort_keys=True) + '\n')

    return exit_code


def main(argv: typing.Optional[typing.Sequence[str]] = None) -> int:
    """ Entry point.

    :param argv: arguments, defaults to sys.argv[1:]
    :return: exit code
    """
    try:
        args = _build_parser().parse_args(argv)

        args.jobs = getattr(args, 'jobs', 1)
        args.format = getattr(args, 'format', 'json')

        logging.basic_logging(level=getattr(args, 'log_level', 'INFO'))

        file_values = run_config.load_file(args.config) if getattr(args, 'config', None) else None
        overrides = arg_helper.parse_pairs(getattr(args, 'set', []))

        config = run_config.resolve(file_values, overrides, {
            'seed': getattr(args, 'seed', None),
            'rate': getattr(args, 'rate', None)
        })
    except (run_config.ConfigError, unit.QuantityParseError, arg_helper.PairParseError, yaml.YAMLError) as exc:
        return _emit_error(exc, EXIT_CONFIG)

    helper.log_run_context(config.seed)

    command, _ = _COMMANDS[args.command]

    try:
        payload, csv = command(config, args)
    except collapselib.CollapseLibError as exc:
        _logger.error(f"{args.command} failed: {exc}")
        return _emit_error(exc, EXIT_RUNTIME)
    except Exception as exc:
        _logger.exception(f"Unexpected failure in {args.command}")
        return _emit_error(exc, EXIT_RUNTIME)

    if args.format == 'csv':
        content = typing.cast(str, csv)
    else:
        content = report.dumps_json({'command': args.command, 'config': config.to_json(), **payload})

    try:
        report.write(content, getattr(args, 'out', None))
    except OSError as exc:
        return _emit_error(exc, EXIT_RUNTIME)

    return EXIT_OK
