"""Command line interface. Each subcommand reads a config file, runs one
estimator and writes ``<subcommand>.csv`` and ``<subcommand>.json`` to
the output directory.

"""

import os
import sys
import csv
import json
import math
import time
import logging
import argparse
import datetime
import platform
from collections import OrderedDict as odict

import numpy as np
import scipy
import humanfriendly
from humanfriendly import format_timespan

from . import __version__
from .audit import Sequencer
from .audit import graph_audit_checks
from .config import load_config
from .entropy import entropy_curve
from .entropy import fano_bound
from .entropy import fixing_estimate
from .entropy import glue_depth_parameters
from .entropy import reach_constants
from .entropy import realize_entropy
from .entropy import rw_entropy
from .errors import ConfigError
from .errors import ContractViolationError
from .errors import IndeterminateResultError
from .errors import ResourceBudgetError
from .freegroup import StepDistribution
from .freegroup import load_measure
from .freegroup import sample_walk
from .freegroup import srw
from .gluing import CopyVertex
from .gluing import GluedGraph
from .gluing import TailVertex
from .gluing import TreeVertex
from .gluing import default_marked_pair
from .gluing import glue
from .irs import GluedConjugacyClass
from .logs import configure_logging
from .logs import log_lines
from .logs import log_traceback
from .models import QuotientCayleyGraph
from .models import quotient_by_name
from .schreier import FreeGroupCayleyGraph
from .wreath import FinitaryPermutationGroup
from .wreath import LamplighterGroup
from .wreath import LamplighterSubgroup
from .wreath import PointStabilizer
from .wreath import parse_dimension
from .wreath import parse_lamp_order


LOGGER = logging.getLogger(__name__)

EXIT_SUCCESS = 0
EXIT_AUDIT_FAILED = 1
EXIT_CONTRACT_VIOLATION = 2
EXIT_RESOURCE_BUDGET = 3

ENTROPY_CURVE_COLUMNS = [
    'p', 't', 'estimate_nats', 'stderr', 'mode', 'theta_samples', 'seed'
]
RW_ENTROPY_COLUMNS = ['t', 'H', 'H_over_t', 'H_diff']
FIXING_COLUMNS = [
    'k', 'n', 'alpha_lower', 'alpha_upper', 'stderr', 'horizon', 'walks', 'seed'
]
NORM_COLUMNS = ['word', 'norm', 'certificate']
WALK_COLUMNS = ['t', 'position', 'depth']
GRAPH_AUDIT_COLUMNS = ['check', 'result', 'message']
REALIZE_COLUMNS = [
    'target', 'p', 'estimate_nats', 'stderr', 'mode', 'iterations', 't', 'seed'
]


class Construction(object):
    """The objects a config describes: the walk measure, the graph for
    graph constructions, the subgroup descriptor `K` when the
    construction has one and the group rw-entropy is computed in.

    """

    def __init__(self, kind, mu, graph=None, K=None, group=None):
        self.kind = kind
        self.mu = mu
        self.graph = graph
        self.K = K
        self.group = group

    @property
    def metadata(self):
        if isinstance(self.graph, GluedGraph):
            return self.graph.metadata

        return {}

    def require_K(self, subcommand):
        if self.K is None:
            raise ContractViolationError(
                f"{subcommand} needs a glued, lamplighter or finperm construction, "
                f"not {self.kind}")

        return self.K

    def require_graph(self, subcommand):
        if self.graph is None:
            raise ContractViolationError(
                f"{subcommand} needs a tree, quotient or glued construction, "
                f"not {self.kind}")

        return self.graph


def _free_group_measure(config, rank):
    if config['measure_file'] is not None:
        return load_measure(config['measure_file'], rank=rank)

    if config['measure'] == 'srw':
        return srw(rank)

    return StepDistribution(config['measure'], rank=rank, normalize=True)


def _group_measure(config, group):
    if config['measure_file'] is not None:
        raise ConfigError("'measure_file' is only supported for free group walks",
                          config.filename)

    if config['measure'] == 'srw':
        return group.srw()

    return group.measure(config['measure'])


def build_construction(config):
    values = config.construction_values
    kind = config.construction

    if kind == 'tree':
        mu = _free_group_measure(config, values['rank'])

        return Construction(kind, mu, graph=FreeGroupCayleyGraph(values['rank']))
    elif kind == 'quotient':
        quotient = quotient_by_name(values['name'], rank=2)
        mu = _free_group_measure(config, quotient.rank)

        return Construction(kind,
                            mu,
                            graph=QuotientCayleyGraph(quotient),
                            group=quotient)
    elif kind == 'glued':
        base = QuotientCayleyGraph(quotient_by_name(values['base'], rank=2))
        mu = _free_group_measure(config, 2)
        graph = glue(default_marked_pair(base, values['mark']),
                     values['n'],
                     mu if values['orient'] else None,
                     config['horizon'],
                     config['walks'],
                     config['seed'],
                     config['parallel'])

        return Construction(kind, mu, graph=graph, K=GluedConjugacyClass(graph))
    elif kind == 'lamplighter':
        group = LamplighterGroup(parse_lamp_order(values['lamp']),
                                 parse_dimension(values['base']))

        return Construction(kind,
                            _group_measure(config, group),
                            K=LamplighterSubgroup(group),
                            group=group)
    else:
        group = FinitaryPermutationGroup(parse_dimension(values['points']),
                                         values['shift'])

        return Construction(kind,
                            _group_measure(config, group),
                            K=PointStabilizer(group),
                            group=group)


def format_vertex(v):
    if type(v) is TreeVertex:
        return str(v.word)
    elif type(v) is CopyVertex:
        return f'copy({v.leaf},{list(v.state)})'
    elif type(v) is TailVertex:
        return f'tail({v.leaf},{v.position})'
    elif isinstance(v, tuple):
        return str(list(v))
    else:
        return str(v)


def _exact_max_indices(config):
    mode = config['mode']

    if mode == 'exact':
        return sys.maxsize
    elif mode == 'monte_carlo':
        return -1
    else:
        return config['exact_max_indices']


def _format(value):
    if isinstance(value, float):
        if math.isinf(value):
            return 'infinite'

        return repr(value)

    return str(value)


def _measure_metadata(mu):
    if isinstance(mu, StepDistribution):
        return [[str(word), probability] for word, probability in mu.items()]

    return [[repr(g), probability] for g, probability in mu.items()]


def do_entropy_curve(config, construction):
    K = construction.require_K('entropy-curve')
    curve = entropy_curve(K,
                          construction.mu,
                          config['p_grid'],
                          config['t'],
                          config['theta_samples'],
                          config['seed'],
                          _exact_max_indices(config),
                          config['support_budget'],
                          config['walk_samples'],
                          config['miller_madow'],
                          config['parallel'])
    rows = [[estimate.p,
             estimate.t,
             estimate.value,
             estimate.stderr,
             estimate.mode,
             estimate.theta_samples,
             estimate.seed]
            for estimate in curve.estimates]
    extra = {}

    if config['t'] >= 2:
        previous = entropy_curve(K,
                                 construction.mu,
                                 config['p_grid'],
                                 config['t'] - 1,
                                 config['theta_samples'],
                                 config['seed'],
                                 _exact_max_indices(config),
                                 config['support_budget'],
                                 config['walk_samples'],
                                 config['miller_madow'],
                                 config['parallel'])
        extra['H_diff'] = [
            [estimate.p, estimate.t * estimate.value - last.t * last.value]
            for estimate, last in zip(curve.estimates, previous.estimates)
        ]

    return ENTROPY_CURVE_COLUMNS, rows, extra, EXIT_SUCCESS


def do_rw_entropy(config, construction):
    rows = rw_entropy(construction.mu,
                      config['t_max'],
                      construction.group,
                      config['support_budget'])

    return RW_ENTROPY_COLUMNS, [list(row) for row in rows], {}, EXIT_SUCCESS


def do_fixing(config, construction):
    graph = construction.require_graph('fixing')
    mu = construction.mu
    k = config['k']
    extra = {}

    if isinstance(graph, GluedGraph) and config['epsilon'] is not None:
        beta = config['beta']

        if beta is None:
            beta = graph.metadata.get('beta')

        if beta is None:
            raise ContractViolationError(
                'choosing the glue depth needs beta or an oriented glued graph')

        delta = config['delta']

        if delta is None:
            delta = reach_constants(mu)

        depth = glue_depth_parameters(k,
                                      config['epsilon'],
                                      mu.max_step_length,
                                      beta,
                                      config['eta'],
                                      delta)
        metadata = graph.metadata
        graph = GluedGraph(graph.marked, depth.n)
        graph.metadata.update({key: value
                               for key, value in metadata.items()
                               if key.startswith('beta')})
        construction.graph = graph
        extra['glue_depth'] = odict([
            ('n', depth.n),
            ('ell', depth.ell),
            ('q', depth.q),
            ('beta', beta),
            ('eta', config['eta']),
            ('delta', delta),
            ('epsilon', config['epsilon'])
        ])
        LOGGER.info('Chose glue depth %d (ell=%d, q=%.6f).', depth.n, depth.ell, depth.q)

    n = config['n']

    if n is None:
        if isinstance(graph, GluedGraph):
            n = graph.n
        else:
            n = k + 1

    report = fixing_estimate(graph,
                             mu,
                             k,
                             n,
                             config['horizon'],
                             config['walks'],
                             config['seed'],
                             config['parallel'])
    rows = [[report.k,
             report.n,
             report.alpha_lower,
             report.alpha_upper,
             max(report.stderr_lower, report.stderr_upper),
             report.horizon,
             report.walks,
             report.seed]]
    extra['fano_bound'] = fano_bound(report.alpha_lower, k)

    return FIXING_COLUMNS, rows, extra, EXIT_SUCCESS


def do_norm(config, construction):
    K = construction.require_K('norm')
    rows = []

    for text in config['words']:
        result = K.mho(K.parse_element(text))

        if result.is_finite:
            rows.append([text, result.norm, ''])
        else:
            rows.append([text, 'infinite', result.certificate])

    return NORM_COLUMNS, rows, {}, EXIT_SUCCESS


def _displacement(g):
    return sum(abs(a) for a in g[1])


def do_walk(config, construction):
    mu = construction.mu
    t = config['t']
    rows = []

    if construction.graph is not None:
        graph = construction.graph
        v = graph.root
        previous = None

        for i, position in enumerate(sample_walk(mu, t, config['seed'])):
            if previous is not None:
                step = previous.inverse() * position
                v = graph.act(v, step)

            rows.append([i, format_vertex(v), graph.depth_lower_bound(v)])
            previous = position
    else:
        group = construction.group
        items = list(mu.items())
        cdf = np.cumsum([probability for _, probability in items])
        rng = np.random.default_rng(config['seed'])
        indices = np.minimum(np.searchsorted(cdf, rng.random(t), side='right'),
                             len(items) - 1)
        position = group.identity
        rows.append([0, group.format(position), 0])

        for i, index in enumerate(indices, 1):
            position = group.mul(position, items[index][0])
            rows.append([i, group.format(position), _displacement(position)])

    return WALK_COLUMNS, rows, {}, EXIT_SUCCESS


def do_graph_audit(config, construction):
    graph = construction.require_graph('graph-audit')
    n = config['n']

    if n is None:
        if isinstance(graph, GluedGraph):
            n = graph.n
        else:
            n = 3

    sequencer = Sequencer('graph-audit')
    sequencer.run(graph_audit_checks(graph,
                                     n,
                                     config['pairs'],
                                     config['samples'],
                                     config['seed']))
    sequencer.report()
    summary = sequencer.summary_json()
    rows = [[check['name'], check['result'], check.get('message', '')]
            for check in summary['checks']]

    if sequencer.summary_count().failed > 0:
        code = EXIT_AUDIT_FAILED
    else:
        code = EXIT_SUCCESS

    return GRAPH_AUDIT_COLUMNS, rows, {'audit': summary}, code


def do_realize(config, construction):
    K = construction.require_K('realize')

    if config['target'] is None:
        raise ConfigError("realize needs 'target'", config.filename)

    realization = realize_entropy(K,
                                  construction.mu,
                                  config['target'],
                                  config['t'],
                                  config['theta_samples'],
                                  config['seed'],
                                  config['tolerance'],
                                  exact_max_indices=_exact_max_indices(config),
                                  support_budget=config['support_budget'],
                                  parallel=config['parallel'])
    estimate = realization.estimate
    rows = [[config['target'],
             realization.p,
             estimate.value,
             estimate.stderr,
             estimate.mode,
             realization.iterations,
             estimate.t,
             config['seed']]]

    return REALIZE_COLUMNS, rows, {}, EXIT_SUCCESS


SUBCOMMANDS = odict([
    ('entropy-curve', (do_entropy_curve, 'Coupled bundle entropy curve over p.')),
    ('rw-entropy', (do_rw_entropy, 'Exact random walk entropy H_t.')),
    ('fixing', (do_fixing, 'Prefix fixing probability estimate.')),
    ('norm', (do_norm, 'Norms of given words or elements.')),
    ('walk', (do_walk, 'A sampled walk.')),
    ('graph-audit', (do_graph_audit, 'Tree-likeness and Schreier audit.')),
    ('realize', (do_realize, 'Find p realizing a target entropy.'))
])


def versions():
    return odict([
        ('irsentropy', __version__),
        ('numpy', np.__version__),
        ('scipy', scipy.__version__),
        ('humanfriendly', humanfriendly.__version__),
        ('python', platform.python_version())
    ])


def write_csv(filename, columns, rows):
    with open(filename, 'w', newline='') as fout:
        writer = csv.writer(fout, lineterminator='\n')
        writer.writerow(columns)

        for row in rows:
            writer.writerow([_format(value) for value in row])


def write_json(filename, metadata):
    with open(filename, 'w') as fout:
        fout.write(json.dumps(metadata, indent=4, default=str))
        fout.write('\n')


def run(subcommand, config, output_dir='.'):
    """Run given subcommand with given config and write its outputs.
    Returns the exit code and the CSV file name.

    """

    function = SUBCOMMANDS[subcommand][0]
    started = datetime.datetime.now()
    start_time = time.time()
    LOGGER.info('Running %s with seed %d.', subcommand, config['seed'])
    construction = build_construction(config)
    columns, rows, extra, code = function(config, construction)
    execution_time = time.time() - start_time
    os.makedirs(output_dir, exist_ok=True)
    csv_filename = os.path.join(output_dir, f'{subcommand}.csv')
    json_filename = os.path.join(output_dir, f'{subcommand}.json')
    write_csv(csv_filename, columns, rows)
    metadata = odict([
        ('subcommand', subcommand),
        ('config', config.resolved()),
        ('construction', construction.metadata),
        ('measure', _measure_metadata(construction.mu)),
        ('columns', columns),
        ('rows', len(rows)),
        ('versions', versions()),
        ('started', str(started)),
        ('wall_clock', execution_time),
        ('wall_clock_text', format_timespan(execution_time))
    ])
    metadata.update(extra)
    write_json(json_filename, metadata)
    LOGGER.info('Wrote %s and %s in %s.',
                csv_filename,
                json_filename,
                format_timespan(execution_time))

    return code, csv_filename


def _log_level(name):
    level = getattr(logging, name.upper(), None)

    if not isinstance(level, int):
        raise argparse.ArgumentTypeError(f"bad log level '{name}'")

    return level


def setup_parser():
    parser = argparse.ArgumentParser(
        description='Intersectional invariant random subgroups and their entropy.')
    parser.add_argument('--version',
                        action='version',
                        version=__version__)
    parser.add_argument('--log-level',
                        type=_log_level,
                        default=logging.INFO,
                        help='Console log level (default: info).')
    parser.add_argument('--log-file',
                        help='Also log to <LOG_FILE>-<date>.log.')
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('config',
                        nargs='?',
                        help='Experiment config file. All defaults if omitted.')
    common.add_argument('--set',
                        dest='overrides',
                        action='append',
                        default=[],
                        metavar='KEY=VALUE',
                        help='Override a config entry, block entries as block.key.')
    common.add_argument('--seed',
                        type=int,
                        help='Override the seed.')
    common.add_argument('-j', '--parallel',
                        type=int,
                        help='Number of worker threads.')
    common.add_argument('-o', '--output-dir',
                        default='.',
                        help='Output directory (default: %(default)s).')
    subparsers = parser.add_subparsers(title='subcommands', dest='subcommand')
    subparsers.required = True

    for name, (_, text) in SUBCOMMANDS.items():
        subparsers.add_parser(name, parents=[common], help=text, description=text)

    return parser


def _main(args):
    overrides = list(args.overrides)

    if args.seed is not None:
        overrides.append(f'seed={args.seed}')

    if args.parallel is not None:
        overrides.append(f'parallel={args.parallel}')

    config = load_config(args.config, overrides)
    code, csv_filename = run(args.subcommand, config, args.output_dir)
    print(csv_filename)

    return code


def main():
    parser = setup_parser()
    args = parser.parse_args()

    if not logging.getLogger().handlers:
        configure_logging(args.log_file, console_log_level=args.log_level)

    try:
        code = _main(args)
    except ContractViolationError as e:
        log_traceback(LOGGER)
        LOGGER.error('Contract violation: %s', e)
        code = EXIT_CONTRACT_VIOLATION
    except IndeterminateResultError as e:
        log_traceback(LOGGER)
        LOGGER.error('Indeterminate result: %s', e)
        code = EXIT_CONTRACT_VIOLATION
    except ResourceBudgetError as e:
        log_traceback(LOGGER)
        LOGGER.error('Resource budget exceeded: %s', e)
        code = EXIT_RESOURCE_BUDGET

    if code == EXIT_AUDIT_FAILED:
        log_lines('Graph audit failed.', LOGGER)

    sys.exit(code)
