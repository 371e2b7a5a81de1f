"""
Command line front end.

    building-voi list
    building-voi run --problem ashp --analysis evpi --samples 2000000
    building-voi run --problem gshp --analysis evii --measurement trt
    building-voi run --problem ventilation --analysis sweep --sweep floor-area
    building-voi run --manifest out/manifest.json --out rerun

Every run writes report.json, CSV sidecars and manifest.json into the
output directory. Exit status is 0 on success, 2 for unknown names and 1
for any other failure.
"""
import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass, field

import astropy.table as atpy
import fsspec
import numpy as np

from . import config as conf
from . import engine
from . import results
from ._version import version
from .errors import ConfigError, UnknownNameError, VoiError
from .gshp import deterministic_optimum
from .registry import get_entry, list_problems

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

ANALYSES = ('prior', 'evpi', 'evii', 'outcome-dist', 'sweep')


@dataclass
class AnalysisRequest:
    """
    problem: registered problem name
    analysis: one of ANALYSES
    measurement: measurement label (evii), all measurements when None
    action: action label (outcome-dist), every action when None
    sweep: sweep name (sweep analysis), with or without the problem prefix
    cfg: problem config; registry defaults when None
    """
    problem: str
    analysis: str
    measurement: str = None
    action: str = None
    sweep: str = None
    estimator: engine.EstimatorConfig = field(
        default_factory=engine.EstimatorConfig)
    out: str = 'voi_output'
    cfg: object = None
    bins: int = 40
    export_table: bool = False


class _Output:

    def __init__(self, out):
        self.out = str(out).rstrip('/')
        fs, root = fsspec.core.url_to_fs(self.out)
        fs.makedirs(root, exist_ok=True)
        self.files = []

    def path(self, name):
        self.files.append(name)
        return f'{self.out}/{name}'

    def json(self, name, doc):
        results.write_json(doc, self.path(name))

    def table(self, name, tab):
        results.write_table(tab, self.path(name))


def _utility_table(grid, table, problem, target):
    unit = problem.currency
    tab = atpy.Table()
    param = problem.schema.get(target)
    tab[f'{target} [{param.unit}]'] = grid
    for action, row in zip(problem.actions, table):
        tab[f'utility_{action.label} [{unit}]'] = row
    return tab


def _resolve_action(problem, label):
    try:
        return problem.actions.index_of(label)
    except KeyError:
        raise UnknownNameError(f'{problem.name} action', label,
                               problem.actions.labels) from None


def _run_prior(request, entry, problem, out):
    prior = engine.solve_prior(problem, request.estimator)
    out.table('prior_actions.csv', prior.to_table())
    doc = dict(prior=prior.to_dict())
    if entry.name == 'gshp':
        fixed = deterministic_optimum(request.cfg, request.estimator)
        doc['deterministic'] = fixed.to_dict()
        out.table('deterministic_actions.csv', fixed.to_table())
    if entry.reference is not None:
        doc['calibration_reference'] = entry.reference(prior)
    return doc, prior.redraws


def _run_evpi(request, entry, problem, out):
    cost = None
    if entry.information_cost is not None:
        cost = entry.information_cost(request.cfg)
    report, best, perfect = engine.evpi_with_outcomes(problem,
                                                      request.estimator, cost,
                                                      request.bins)
    out.table('prior_actions.csv', report.prior.to_table())
    out.table('posterior_actions.csv', report.frequency_table())
    out.table('outcome_prior_action.csv', best.to_table())
    out.table('outcome_perfect_information.csv', perfect.to_table())
    doc = dict(evpi=report.to_dict(),
               prior_outcome=best.to_dict(),
               perfect_information_outcome=perfect.to_dict())
    return doc, report.prior.redraws


def _run_evii(request, entry, problem, out):
    menu = entry.measurements(request.cfg)
    if request.measurement is not None:
        menu = [entry.measurement(request.cfg, request.measurement)]
    elif not menu:
        raise ConfigError(f'problem {entry.name} has no measurements; '
                          'use --analysis evpi')
    config = request.estimator
    prior = engine.solve_prior(problem, config)
    target = menu[0].target
    table = None
    if request.export_table or any(not m.is_perfect for m in menu):
        table = engine.utility_table(problem, target, config)
        if request.export_table:
            out.table('utility_table.csv',
                      _utility_table(*table, problem, target))
    reports = [
        engine.evii(problem, m, config, prior=prior, table=table)
        for m in menu
    ]
    out.table('prior_actions.csv', prior.to_table())
    if request.measurement is not None:
        out.table('posterior_actions.csv', reports[0].frequency_table())
        doc = dict(evii=reports[0].to_dict())
        if entry.reference is not None:
            doc['calibration_reference'] = entry.reference(prior)
        return doc, prior.redraws
    out.table('net_benefit.csv',
              results.net_benefit_table(reports, problem.currency))
    gains = np.array([r.net_benefit for r in reports])
    best = int(np.argmax(gains))
    doc = dict(evii=[r.to_dict() for r in reports],
               best_measurement=reports[best].measurement_label,
               best_unique=bool(np.sum(gains == gains[best]) == 1))
    if entry.reference is not None:
        doc['calibration_reference'] = entry.reference(
            prior, reports[best].measurement_label)
    logger.info('%s: greatest net benefit from %s (%.6g)', problem.name,
                reports[best].measurement_label, gains[best])
    return doc, prior.redraws


def _run_outcome(request, entry, problem, out):
    if request.action is not None:
        actions = [_resolve_action(problem, request.action)]
    else:
        actions = range(len(problem.actions))
    dists = []
    for a in actions:
        d = engine.outcome_distribution(problem, a, request.estimator,
                                        request.bins)
        out.table(f'outcome_{d.label}.csv', d.to_table())
        dists.append(d.to_dict())
    return dict(outcome_distributions=dists), 0


def _run_sweep(request, entry, problem, out):
    if request.sweep is None:
        raise UnknownNameError(f'{entry.name} sweep', None,
                               [s.name for s in entry.sweeps])
    name = request.sweep.split(':', 1)[-1]
    sweep = entry.sweep(name)
    result = engine.sensitivity_sweep(sweep.family(request.cfg),
                                      list(sweep.values),
                                      engine.EVPI,
                                      request.estimator,
                                      parameter=sweep.parameter,
                                      unit=sweep.unit)
    out.table(f'sweep_{sweep.name}.csv', result.to_table())
    return dict(sweep=result.to_dict(),
                sweep_seeds=[r.seed for r in result.rows]), 0


RUNNERS = {
    'prior': _run_prior,
    'evpi': _run_evpi,
    'evii': _run_evii,
    'outcome-dist': _run_outcome,
    'sweep': _run_sweep,
}


def run(request):
    """
    Run one analysis and write its report, CSV sidecars and manifest

    Returns
    -------
    result: dict
        report and manifest documents plus the list of written files
    """
    if request.analysis not in RUNNERS:
        raise UnknownNameError('analysis', request.analysis, RUNNERS)
    entry = get_entry(request.problem)
    if request.cfg is None:
        request.cfg = entry.default_config()
    t0 = time.time()
    problem = entry.build(request.cfg)
    out = _Output(request.out)
    logger.info('running %s on %s with %d samples, seed %d',
                request.analysis, problem.name, request.estimator.n_samples,
                request.estimator.seed)
    body, redraws = RUNNERS[request.analysis](request, entry, problem, out)
    report = dict(problem=problem.name,
                  analysis=request.analysis,
                  currency=problem.currency,
                  time_basis=problem.time_basis,
                  version=version,
                  **body)
    out.json('report.json', report)
    manifest = dict(problem=request.problem,
                    analysis=request.analysis,
                    measurement=request.measurement,
                    action=request.action,
                    sweep=request.sweep,
                    bins=request.bins,
                    export_table=request.export_table,
                    seed=request.estimator.seed,
                    estimator=request.estimator.to_dict(),
                    config=conf.to_dict(request.cfg),
                    version=version,
                    block_size=engine.BLOCK_SIZE,
                    redraws=int(redraws),
                    sweep_seeds=body.get('sweep_seeds'),
                    files=list(out.files) + ['manifest.json'],
                    duration_seconds=time.time() - t0)
    out.json('manifest.json', manifest)
    logger.info('wrote %s to %s', ', '.join(out.files), out.out)
    return dict(report=report, manifest=manifest, files=out.files)


def request_from_manifest(path, out=None, workers=None):
    """Rebuild the request recorded in a run manifest"""
    with fsspec.open(str(path), 'r') as fp:
        doc = json.load(fp)
    try:
        entry = get_entry(doc['problem'])
        estimator = conf.from_dict(engine.EstimatorConfig, doc['estimator'],
                                   'estimator')
        if workers is not None:
            estimator = conf.from_dict(engine.EstimatorConfig,
                                       dict(doc['estimator'],
                                            workers=workers), 'estimator')
        return AnalysisRequest(problem=doc['problem'],
                               analysis=doc['analysis'],
                               measurement=doc.get('measurement'),
                               action=doc.get('action'),
                               sweep=doc.get('sweep'),
                               estimator=estimator,
                               out=out or 'voi_output',
                               cfg=entry.load_config(doc['config']),
                               bins=doc.get('bins', 40),
                               export_table=doc.get('export_table', False))
    except KeyError as exc:
        raise ConfigError(f'manifest {path} lacks field {exc}') from None


def request_from_args(args):
    if args.manifest is not None:
        return request_from_manifest(args.manifest, args.out, args.workers)
    if args.problem is None:
        raise ConfigError('--problem is required unless --manifest is given')
    entry = get_entry(args.problem)
    section = None
    if args.config is not None:
        doc = conf.load_document(args.config)
        for name in doc:
            get_entry(name)
        section = doc.get(args.problem)
    kw = dict(n_samples=args.samples, seed=args.seed)
    if args.workers is not None:
        kw['workers'] = args.workers
    if args.grid_points is not None:
        kw['grid_points'] = args.grid_points
    return AnalysisRequest(problem=args.problem,
                           analysis=args.analysis,
                           measurement=args.measurement,
                           action=args.action,
                           sweep=args.sweep,
                           estimator=engine.EstimatorConfig(**kw),
                           out=args.out or 'voi_output',
                           cfg=entry.load_config(section),
                           bins=args.bins,
                           export_table=args.export_table)


def _parser():
    parser = argparse.ArgumentParser(
        prog='building-voi',
        description='Value of information analysis for building energy '
        'decisions')
    parser.add_argument('--version', action='version', version=version)
    sub = parser.add_subparsers(dest='command', required=True)

    lst = sub.add_parser('list', help='list the registered problems')
    lst.add_argument('--json',
                     action='store_true',
                     help='print the listing as JSON')

    r = sub.add_parser('run', help='run one analysis')
    r.add_argument('--problem', help='registered problem name')
    r.add_argument('--analysis', choices=ANALYSES, default='prior')
    r.add_argument('--measurement', help='measurement label (evii)')
    r.add_argument('--action', help='action label (outcome-dist)')
    r.add_argument('--sweep', help='sweep name (sweep)')
    r.add_argument('--samples', type=int, default=100000)
    r.add_argument('--seed', type=int, default=42)
    r.add_argument('--workers', type=int, default=None)
    r.add_argument('--config', help='JSON config document')
    r.add_argument('--out', help='output directory (default voi_output)')
    r.add_argument('--grid-points', type=int, default=None)
    r.add_argument('--bins', type=int, default=40)
    r.add_argument('--export-table',
                   action='store_true',
                   help='write the EVII utility table')
    r.add_argument('--manifest', help='rerun the run recorded in a manifest')
    r.add_argument('--quiet', action='store_true')
    return parser


def _print_listing(listing, as_json):
    if as_json:
        print(json.dumps(listing, indent=2))
        return
    for item in listing:
        params = ', '.join(f"{p['name']} ({p['role']})"
                           for p in item['parameters'])
        print(f"{item['name']}: {item['description']}")
        print(f"  actions: {item['n_actions']}, basis: {item['time_basis']}")
        print(f'  parameters: {params}')
        print('  measurements: ' + (', '.join(item['measurements']) or '-'))
        print('  sweeps: ' + (', '.join(item['sweeps']) or '-'))


def main(argv=None):
    args = _parser().parse_args(argv)
    quiet = getattr(args, 'quiet', False)
    logging.basicConfig(level=logging.WARNING if quiet else logging.INFO,
                        format='%(asctime)s %(name)s %(levelname)s '
                        '%(message)s')
    try:
        if args.command == 'list':
            _print_listing(list_problems(), args.json)
            return 0
        result = run(request_from_args(args))
    except UnknownNameError as exc:
        print(f'error: {exc}', file=sys.stderr)
        return 2
    except VoiError as exc:
        print(f'error: {exc}', file=sys.stderr)
        return 1
    if not quiet:
        print(results.dumps(result['report']), end='')
    return 0


if __name__ == '__main__':
    sys.exit(main())
