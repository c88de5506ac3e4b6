"""
Command line front end.

    hallcal generate          write a synthetic hall, its state and measurements
    hallcal calibrate         calibrate the server flow rates against measurements
    hallcal study-datavolume  surrogate test error against training-set size
    hallcal solve             one solver call, for debugging

Exit codes: 0 success, 1 usage error, 2 data or parse error, 3 solver failure.
"""
import argparse
import logging
import os
import sys

from typing import List

from hallcal.calibration.config import CalibConfig, component_seed, heuristic_config
from hallcal.calibration.engine import CalibrationAbortedError, CalibrationResult, calibrate
from hallcal.calibration.heuristic import run_heuristic
from hallcal.calibration.study import build_pool, split_pool, study_datavolume
from hallcal.components.factories import load_run_config, provider_from_yaml
from hallcal.components.provider import ComponentProvider
from hallcal.errors import DataError, HallCalError, SolverError
from hallcal.solvers.base import Solver
from hallcal.solvers.scenarios import (HallSizes, identifiable_scenario,
                                       operating_state, reference_scenario)
from hallcal.solvers.zonal import synthesize_measurements

from . import formats, reports

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SOLVER = 0, 1, 2, 3

METHODS = ('knowledge', 'vanilla', 'heuristic')
METHOD_ALIASES = {'kalibre': 'knowledge'}
SOLVERS = ('zonal', 'external')
SURROGATES = {'knowledge': 'surrogate.knowledge', 'vanilla': 'surrogate.vanilla'}

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


class UsageError(HallCalError):

    pass


class UnknownMethodError(UsageError):

    ERRMSG = 'Unknown method "{}", expected one of {}.'


class ArgumentParser(argparse.ArgumentParser):

    def error(self, message):
        raise UsageError('{}: {}'.format(self.prog, message))


def resolve_log_level(verbose: bool = False, conf: dict = None) -> str:
    """--verbose, else HALLCAL_LOG_LEVEL, else run.log_level of the run configuration."""
    if verbose:
        return 'DEBUG'

    level = os.environ.get('HALLCAL_LOG_LEVEL') or (conf or {}).get('run', {}).get('log_level') or 'INFO'

    return str(level).upper()


def configure_logging(level: str = 'INFO'):
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO), format=LOG_FORMAT)


def canonical_method(method: str) -> str:
    method = METHOD_ALIASES.get(method, method)

    if method not in METHODS:
        raise UnknownMethodError(UnknownMethodError.ERRMSG.format(method, METHODS + tuple(METHOD_ALIASES)))

    return method


def resolve_seed(seed: int = None, conf: dict = None) -> int:
    """--seed, else HALLCAL_SEED, else the run configuration."""
    if seed is not None:
        return int(seed)

    if os.environ.get('HALLCAL_SEED'):
        return int(os.environ['HALLCAL_SEED'])

    return int((conf or {}).get('run', {}).get('seed', 0))


def _fractions(text: str) -> List[float]:
    try:
        values = [float(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError('expected comma separated numbers, got {!r}'.format(text))

    if not values or not all(0.0 < v <= 1.0 for v in values):
        raise argparse.ArgumentTypeError('fractions must lie in (0, 1], got {!r}'.format(text))

    return values


def cmd_generate(out_dir: str, seed: int = 0, sizes: HallSizes = HallSizes(), sensor_noise_sd: float = 0.1,
                 identifiable: bool = False) -> dict:
    """Writes layout.yaml, scenario.yaml, state.yaml and measurements.csv under out_dir."""
    if identifiable:
        scenario = identifiable_scenario(sizes.servers, seed, sensor_noise_sd)
    else:
        scenario = reference_scenario(sizes, seed, sensor_noise_sd)

    layout = scenario.layout
    state = operating_state(layout, seed + 2)
    measured = synthesize_measurements(scenario, state)

    paths = {name: os.path.join(out_dir, name)
             for name in ('layout.yaml', 'scenario.yaml', 'state.yaml', 'measurements.csv')}

    formats.write_layout(paths['layout.yaml'], layout)
    formats.write_scenario(paths['scenario.yaml'], scenario)
    formats.write_state(paths['state.yaml'], layout, state)
    formats.write_sensor_vector(paths['measurements.csv'], measured, layout)

    logger.info('Hall with %d CRACs, %d servers and %d sensors written to %s',
                layout.l, layout.m, layout.n, out_dir)

    return paths


def _provider(conf: dict, layout_path: str, scenario_path: str = None):
    layout = formats.read_layout(layout_path)
    provider = provider_from_yaml(conf)
    provider.set('layout', layout)
    scenario = None

    if scenario_path is not None:
        scenario = formats.read_scenario(scenario_path, layout)
        provider.set('scenario', scenario)

    return provider, layout, scenario


def _solver(provider: ComponentProvider, kind: str, scenario, workdir: str = None, command: str = None) -> Solver:
    if kind not in SOLVERS:
        raise UsageError('Unknown solver "{}", expected one of {}.'.format(kind, SOLVERS))

    if kind == 'zonal':
        if scenario is None:
            raise UsageError('The zonal solver needs a --scenario file.')

        return provider.get('solver.zonal')

    return provider.get('solver.external', workdir=workdir, command=command)


def run_method(method: str, provider: ComponentProvider, solver: Solver, measured, state, conf: dict,
               seed: int, iterations: int = None, evaluations: int = None) -> CalibrationResult:
    method = canonical_method(method)

    cfg = CalibConfig.from_conf(conf, seed, iterations)

    if method == 'heuristic':
        es = heuristic_config(conf, seed, evaluations)
        return run_heuristic(solver, measured, state, es, cfg.bounds, cfg.initial_guess(solver.layout.m))

    if method == 'vanilla':
        surrogate = provider.get(SURROGATES[method], seed=component_seed(seed, 'vanilla'))
    else:
        surrogate = provider.get(SURROGATES[method])

    return calibrate(solver, surrogate, measured, state, cfg, method)


def cmd_calibrate(layout_path: str, state_path: str, measurements_path: str, out_dir: str,
                  scenario_path: str = None, config_path: str = None, method: str = 'knowledge',
                  solver: str = 'zonal', seed: int = None, iterations: int = None, evaluations: int = None,
                  workdir: str = None, command: str = None) -> CalibrationResult:
    method = canonical_method(method)

    conf = load_run_config(config_path)
    seed = resolve_seed(seed, conf)
    overrides = {'run': {'seed': seed, 'method': method, 'solver': solver}}

    if iterations is not None:
        overrides['calibration'] = {'max_iterations': int(iterations)}

    if evaluations is not None:
        overrides['heuristic'] = {'max_evals': int(evaluations)}

    conf = load_run_config(config_path, overrides)

    provider, layout, scenario = _provider(conf, layout_path, scenario_path)
    state = formats.read_state(state_path, layout)
    measured = formats.read_measurements(measurements_path, layout)
    hidden = scenario.hidden_flow_rates if scenario is not None else None

    try:
        result = run_method(method, provider, _solver(provider, solver, scenario, workdir, command),
                            measured, state, conf, seed, iterations, evaluations)
    except CalibrationAbortedError as e:
        reports.write_report(out_dir, layout, e.result, conf, hidden, aborted=str(e))
        raise

    reports.write_report(out_dir, layout, result, conf, hidden)
    logger.info('%s calibration: best MAE %.4f degC after %d solver calls, report in %s',
                method, result.best_mae, result.solver_calls, out_dir)

    return result


def cmd_study_datavolume(layout_path: str, scenario_path: str, state_path: str, out_dir: str,
                         config_path: str = None, fractions: List[float] = None, pool_size: int = None,
                         seed: int = None, solver: str = 'zonal', workdir: str = None, command: str = None):
    conf = load_run_config(config_path)
    seed = resolve_seed(seed, conf)
    overrides = {'run': {'seed': seed}, 'study': {}}

    if fractions is not None:
        overrides['study']['fractions'] = list(fractions)

    if pool_size is not None:
        overrides['study']['pool_size'] = int(pool_size)

    conf = load_run_config(config_path, overrides)
    study = conf['study']

    provider, layout, scenario = _provider(conf, layout_path, scenario_path)
    state = formats.read_state(state_path, layout)

    pool = build_pool(_solver(provider, solver, scenario, workdir, command), state, int(study['pool_size']),
                      component_seed(seed, 'pool'), tuple(study.get('flow_rate_range', (0.1, 0.5))))
    train, test = split_pool(pool, float(study.get('test_fraction', 0.2)), component_seed(seed, 'split'))

    builders = {
        'knowledge_fixed': lambda: provider.get('surrogate.knowledge'),
        'knowledge_trainable': lambda: provider.get('surrogate.knowledge_trainable'),
        'vanilla': lambda: provider.get('surrogate.vanilla', seed=component_seed(seed, 'vanilla')),
    }
    table = study_datavolume(train, test, builders, study['fractions'])

    os.makedirs(out_dir, exist_ok=True)
    reports.write_study(os.path.join(out_dir, 'study.csv'), table)

    return table


def cmd_solve(layout_path: str, state_path: str, out_path: str, scenario_path: str = None,
              flow_rates_path: str = None, config_path: str = None, solver: str = 'zonal',
              workdir: str = None, command: str = None):
    """One solve at the given flow rates, or at the hidden ones of the scenario."""
    conf = load_run_config(config_path)
    provider, layout, scenario = _provider(conf, layout_path, scenario_path)
    state = formats.read_state(state_path, layout)

    if flow_rates_path is not None:
        flow_rates = formats.read_flow_rates(flow_rates_path, layout)
    elif scenario is not None:
        flow_rates = scenario.hidden_flow_rates
    else:
        raise UsageError('Give --flow-rates or a --scenario to solve at.')

    temperatures = _solver(provider, solver, scenario, workdir, command).solve(state.with_flow_rates(flow_rates))
    formats.write_sensor_vector(out_path, temperatures, layout)

    return temperatures


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog='hallcal', description='Surrogate-assisted calibration of data-hall flow rates.')
    parser.add_argument('-v', '--verbose', action='store_true', help='Log at DEBUG level.')
    commands = parser.add_subparsers(dest='command', required=True)

    generate = commands.add_parser('generate', help='Write a synthetic hall with hidden flow rates.')
    generate.add_argument('--seed', type=int, default=None)
    generate.add_argument('--out-dir', default='hall')
    generate.add_argument('--cracs', type=int, default=HallSizes.cracs)
    generate.add_argument('--servers', type=int, default=HallSizes.servers)
    generate.add_argument('--cold-sensors', type=int, default=HallSizes.cold_sensors)
    generate.add_argument('--hot-sensors', type=int, default=HallSizes.hot_sensors)
    generate.add_argument('--noise-sd', type=float, default=0.1, help='Sensor noise in degC.')
    generate.add_argument('--identifiable', action='store_true',
                          help='One hot sensor per server, so every flow rate can be recovered.')

    def inputs(sub, measurements: bool = True):
        sub.add_argument('--layout', required=True)
        sub.add_argument('--state', required=True)
        sub.add_argument('--scenario', help='Scenario file, needed by the zonal solver.')

        if measurements:
            sub.add_argument('--measurements', required=True)

        sub.add_argument('--config', help='YAML run configuration merged over the defaults.')
        sub.add_argument('--solver', choices=SOLVERS, default='zonal')
        sub.add_argument('--workdir', help='Working directory of the external solver.')
        sub.add_argument('--command', dest='solver_command', help='Command of the external solver.')

    calibrate_cmd = commands.add_parser('calibrate', help='Calibrate the flow rates against measurements.')
    inputs(calibrate_cmd)
    calibrate_cmd.add_argument('--method', default='knowledge',
                               help='One of {}.'.format(', '.join(METHODS + tuple(METHOD_ALIASES))))
    calibrate_cmd.add_argument('--seed', type=int, default=None)
    calibrate_cmd.add_argument('--iters', type=int, default=None, help='Calibration iterations.')
    calibrate_cmd.add_argument('--evals', type=int, default=None, help='Solver budget of the heuristic.')
    calibrate_cmd.add_argument('--out-dir', default='report')

    study = commands.add_parser('study-datavolume', help='Surrogate test error against training-set size.')
    inputs(study, measurements=False)
    study.add_argument('--fractions', type=_fractions, default=None)
    study.add_argument('--pool-size', type=int, default=None)
    study.add_argument('--seed', type=int, default=None)
    study.add_argument('--out-dir', default='study')

    solve = commands.add_parser('solve', help='Run the solver once.')
    inputs(solve, measurements=False)
    solve.add_argument('--flow-rates', help='CSV of server_id and flow rate.')
    solve.add_argument('--out', default='solved.csv')

    return parser


def dispatch(args) -> int:
    if args.command == 'generate':
        sizes = HallSizes(args.cracs, args.servers, args.cold_sensors, args.hot_sensors)
        cmd_generate(args.out_dir, resolve_seed(args.seed), sizes, args.noise_sd, args.identifiable)

    elif args.command == 'calibrate':
        cmd_calibrate(args.layout, args.state, args.measurements, args.out_dir, args.scenario, args.config,
                      args.method, args.solver, args.seed, args.iters, args.evals, args.workdir, args.solver_command)

    elif args.command == 'study-datavolume':
        cmd_study_datavolume(args.layout, args.scenario, args.state, args.out_dir, args.config,
                             args.fractions, args.pool_size, args.seed, args.solver, args.workdir, args.solver_command)

    elif args.command == 'solve':
        cmd_solve(args.layout, args.state, args.out, args.scenario, args.flow_rates, args.config,
                  args.solver, args.workdir, args.solver_command)

    return EXIT_OK


def main(argv: List[str] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        conf = load_run_config(getattr(args, 'config', None))
        configure_logging(resolve_log_level(args.verbose, conf))
        return dispatch(args)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return EXIT_USAGE
    except DataError as e:
        print(str(e), file=sys.stderr)
        return EXIT_DATA
    except SolverError as e:
        print(str(e), file=sys.stderr)
        return EXIT_SOLVER
    except (HallCalError, OSError) as e:
        print(str(e), file=sys.stderr)
        return EXIT_DATA


if __name__ == '__main__':
    sys.exit(main())
