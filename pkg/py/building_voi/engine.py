"""
Estimators for the prior decision problem, the expected value of perfect
information (EVPI) and of imperfect information (EVII), outcome
distributions and sensitivity sweeps.

All estimators share one sample set per seed (common random numbers):
scenarios are drawn in fixed-size blocks from counter-based streams, so the
numbers do not depend on how many workers evaluate the blocks. Problems
whose priors all have finite support are enumerated exactly instead.
"""
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import distributions as dists
from .errors import (ConfigError, ProblemError, UtilityEvaluationError,
                     VoiError)
from .problem import MEASURED
from .results import (EVII, EVPI, ActionStatistic, OutcomeDistribution,
                      PriorSolution, SweepResult, SweepRow, VoiReport)

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

BLOCK_SIZE = 4096
MAX_ENUMERATION = 10**7
MAX_REDRAW_ROUNDS = 1000

PRIOR = 'prior'
ENUMERATION_MODES = ('auto', 'never', 'always')


@dataclass(frozen=True)
class EstimatorConfig:
    """
    n_samples: outer Monte Carlo samples
    seed: run seed feeding the counter-based streams
    span_sigmas, grid_points: posterior grid (half-width in prior standard
        deviations, number of points for continuous priors)
    inner_quadrature_points: nuisance draws averaged per grid point
    workers: threads evaluating sample blocks
    enumerate: 'auto' enumerates finite-support priors exactly,
        'never' forces Monte Carlo, 'always' refuses anything else
    """
    n_samples: int = 100000
    seed: int = 42
    span_sigmas: float = dists.DEFAULT_SPAN_SIGMAS
    grid_points: int = dists.DEFAULT_GRID_POINTS
    inner_quadrature_points: int = 64
    workers: int = 1
    enumerate: str = 'auto'

    def __post_init__(self):
        if self.n_samples < 1:
            raise ConfigError('n_samples must be at least 1')
        if self.workers < 1:
            raise ConfigError('workers must be at least 1')
        if not self.span_sigmas > 0:
            raise ConfigError('span_sigmas must be positive')
        if self.grid_points < dists.MIN_GRID_POINTS:
            raise ConfigError(
                f'grid_points must be at least {dists.MIN_GRID_POINTS}')
        if self.inner_quadrature_points < 64:
            raise ConfigError('inner_quadrature_points must be at least 64')
        if self.enumerate not in ENUMERATION_MODES:
            raise ConfigError(f'enumerate must be one of {ENUMERATION_MODES}')

    def to_dict(self):
        return asdict(self)


@dataclass(eq=False)
class ScenarioSet:
    """Parameter values with weights (None means equal Monte Carlo weights)"""
    values: dict
    weights: np.ndarray = None
    redraws: int = 0

    @property
    def exact(self):
        return self.weights is not None

    def __len__(self):
        return len(next(iter(self.values.values())))


def _blocks(n):
    return [(i, min(BLOCK_SIZE, n - i * BLOCK_SIZE))
            for i in range(math.ceil(n / BLOCK_SIZE))]


def _map(func, items, workers):
    if workers == 1 or len(items) <= 1:
        return [func(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def draw_block(problem, seed, block, n, purpose=dists.PRIOR_STREAM):
    """
    Draw n admissible scenarios for one block of the sample index space

    Returns
    -------
    values: dict
        name -> ndarray of length n
    redraws: int
        Number of scenarios rejected by the problem's admissibility check
    """
    rng = dists.stream(seed, block, purpose)
    values = {
        p.name: np.asarray(p.distribution.sample(rng, n), dtype=float)
        for p in problem.schema
    }
    redraws = 0
    if problem.admissible is None:
        return values, redraws
    for _ in range(MAX_REDRAW_ROUNDS):
        bad = ~np.asarray(problem.admissible(values), dtype=bool)
        nbad = int(bad.sum())
        if nbad == 0:
            return values, redraws
        redraws += nbad
        for p in problem.schema:
            values[p.name][bad] = p.distribution.sample(rng, nbad)
    raise ProblemError(
        f'{problem.name}: no admissible scenarios after '
        f'{MAX_REDRAW_ROUNDS} redraw rounds')


def _use_enumeration(problem, config):
    if config.enumerate == 'never' or not problem.schema.finite_support:
        if config.enumerate == 'always':
            raise ConfigError(
                f'{problem.name}: exact enumeration needs finite-support '
                'priors')
        return False
    count = math.prod(
        len(p.distribution.outcomes()[0]) for p in problem.schema)
    if count > MAX_ENUMERATION:
        if config.enumerate == 'always':
            raise ConfigError(f'{problem.name}: {count} outcomes exceed the '
                              f'enumeration limit {MAX_ENUMERATION}')
        return False
    return True


def enumerate_scenarios(problem):
    """Every joint outcome of finite-support priors with its probability"""
    supports = [p.distribution.outcomes() for p in problem.schema]
    grids = np.meshgrid(*[s[0] for s in supports], indexing='ij')
    probs = np.meshgrid(*[s[1] for s in supports], indexing='ij')
    values = {
        p.name: g.ravel().astype(float)
        for p, g in zip(problem.schema, grids)
    }
    weights = np.prod([p.ravel() for p in probs], axis=0)
    dropped = 0
    if problem.admissible is not None:
        keep = np.asarray(problem.admissible(values), dtype=bool)
        dropped = int((~keep).sum())
        values = {k: v[keep] for k, v in values.items()}
        weights = weights[keep]
        if weights.sum() <= 0:
            raise ProblemError(f'{problem.name}: no admissible outcomes')
    return ScenarioSet(values, weights / weights.sum(), dropped)


def _first_failure(problem, action, values):
    n = len(next(iter(values.values())))
    for i in range(n):
        try:
            u = problem.utility(action,
                                {k: v[i:i + 1]
                                 for k, v in values.items()})
        except Exception:
            return i
        if not np.all(np.isfinite(u)):
            return i
    return 0


def checked_utilities(problem, values, offset=0, actions=None):
    """
    Utilities of the given actions (all by default) over a scenario set,
    shape (n_actions, n_scenarios). Failures are reported with the action
    and the global sample index.
    """
    rows = range(len(problem.actions)) if actions is None else actions
    n = len(next(iter(values.values())))
    out = np.empty((len(rows), n))
    for j, a in enumerate(rows):
        try:
            u = np.asarray(problem.utility(a, values), dtype=float)
        except (VoiError, ArithmeticError, ValueError) as exc:
            raise UtilityEvaluationError(
                a, offset + _first_failure(problem, a, values), exc) from exc
        bad = ~np.isfinite(u)
        if bad.any():
            raise UtilityEvaluationError(a, offset + int(np.argmax(bad)),
                                         'non-finite utility')
        out[j] = u
    return out


def evaluate(problem, config, actions=None):
    """
    Draw (or enumerate) the scenario set and evaluate utilities on it

    Returns
    -------
    scenarios: ScenarioSet
    utilities: ndarray
        Shape (n_actions, n_scenarios)
    """
    t0 = time.time()
    if _use_enumeration(problem, config):
        scen = enumerate_scenarios(problem)
        util = checked_utilities(problem, scen.values, actions=actions)
        logger.info('%s: enumerated %d outcomes in %.2fs', problem.name,
                    len(scen), time.time() - t0)
        return scen, util

    def work(block):
        idx, n = block
        values, redraws = draw_block(problem, config.seed, idx, n)
        util = checked_utilities(problem,
                                 values,
                                 offset=idx * BLOCK_SIZE,
                                 actions=actions)
        return values, redraws, util

    parts = _map(work, _blocks(config.n_samples), config.workers)
    values = {
        name: np.concatenate([p[0][name] for p in parts])
        for name in problem.schema.names
    }
    redraws = sum(p[1] for p in parts)
    util = np.concatenate([p[2] for p in parts], axis=1)
    logger.info('%s: %d Monte Carlo samples (%d redrawn) in %.2fs',
                problem.name, config.n_samples, redraws, time.time() - t0)
    return ScenarioSet(values, None, redraws), util


def _mean_se(x, weights):
    """Mean and standard error along the last axis"""
    if weights is not None:
        return x @ weights, np.zeros(x.shape[:-1])
    n = x.shape[-1]
    m = x.mean(axis=-1)
    if n < 2:
        return m, np.zeros(x.shape[:-1])
    return m, x.std(axis=-1, ddof=1) / math.sqrt(n)


def _frequencies(problem, best, weights):
    n_act = len(problem.actions)
    if weights is None:
        freq = np.bincount(best, minlength=n_act) / len(best)
    else:
        freq = np.bincount(best, weights=weights, minlength=n_act)
    return {a.label: float(f) for a, f in zip(problem.actions, freq)}


def _prior_solution(problem, scen, util):
    means, ses = _mean_se(util, scen.weights)
    best = int(np.argmax(means))
    per_action = tuple(
        ActionStatistic(a.index, a.label, a.payload, float(m), float(s))
        for a, m, s in zip(problem.actions, means, ses))
    return PriorSolution(problem=problem.name,
                         best_action=best,
                         best_label=problem.actions[best].label,
                         expected_utility=float(means[best]),
                         standard_error=float(ses[best]),
                         per_action=per_action,
                         n_samples=len(scen),
                         exact=scen.exact,
                         redraws=scen.redraws,
                         currency=problem.currency,
                         time_basis=problem.time_basis)


def solve_prior(problem, config=None):
    """
    Prior decision problem: the action maximizing expected utility, with
    every action evaluated on the same scenario set. Ties go to the
    lowest action index.

    Returns
    -------
    solution: PriorSolution
    """
    config = config or EstimatorConfig()
    scen, util = evaluate(problem, config)
    return _prior_solution(problem, scen, util)


def evpi(problem, config=None, information_cost=None):
    """
    Expected value of perfect information, estimated as the mean regret
    max_a u(a, theta_i) - u(a*, theta_i) of the prior action a* over the
    shared scenario set.

    Parameters
    ----------
    problem: DecisionProblem
    config: EstimatorConfig
    information_cost: (label, cost), optional
        Cost of the perfect information source; fills the net benefit

    Returns
    -------
    report: VoiReport
    """
    config = config or EstimatorConfig()
    scen, util = evaluate(problem, config)
    return _evpi_report(problem, scen, util, information_cost)


def _evpi_report(problem, scen, util, information_cost):
    prior = _prior_solution(problem, scen, util)
    best = np.argmax(util, axis=0)
    informed = util.max(axis=0)
    regret = informed - util[prior.best_action]
    value, se = _mean_se(regret, scen.weights)
    inf_mean, inf_se = _mean_se(informed, scen.weights)
    report = VoiReport(kind=EVPI,
                       problem=problem.name,
                       value=float(value),
                       standard_error=float(se),
                       prior=prior,
                       posterior_action_frequency=_frequencies(
                           problem, best, scen.weights),
                       informed_expected_utility=float(inf_mean),
                       informed_standard_error=float(inf_se),
                       n_samples=len(scen),
                       exact=scen.exact)
    if information_cost is not None:
        report = report.with_cost(*information_cost)
    logger.info('%s: EVPI %.6g +/- %.3g', problem.name, report.value,
                report.standard_error)
    return report


def _inner_table(problem, target, grid, config, block):
    """Utility table averaged over nuisance draws, shape (n_actions, G)"""
    nuisance = problem.schema.nuisance(exclude=target)
    if not nuisance:
        return checked_utilities(problem, {target: grid})
    m = config.inner_quadrature_points
    draws, _ = draw_block(problem, config.seed, block, m,
                          dists.NUISANCE_STREAM)
    values = {target: np.repeat(grid, m)}
    for name in nuisance:
        values[name] = np.tile(draws[name], len(grid))
    util = checked_utilities(problem, values)
    return util.reshape(len(problem.actions), len(grid), m).mean(axis=2)


def utility_table(problem, target, config=None):
    """
    Utilities of every action at every posterior grid point of ``target``,
    averaged over nuisance parameters when the problem has any

    Returns
    -------
    grid: ndarray
    table: ndarray
        Shape (n_actions, len(grid))
    """
    config = config or EstimatorConfig()
    dist = problem.schema.get(target).distribution
    grid = dists.grid_points(dist, config.span_sigmas, config.grid_points)
    return grid, _inner_table(problem, target, grid, config, 0)


def _posterior_expectations(measurement, prior, grid, z, table):
    """E[u(a, theta) | z] for each observation, shape (n_obs, n_actions)"""
    post = dists.grid_posterior(prior,
                                z=z,
                                log_likelihood=measurement.log_density,
                                points=grid)
    return post.expect(table)


def _perfect_expectations(problem, values, target, config, block):
    """E[u(a, theta) | theta_target] with nuisance averaged, (n, n_actions)"""
    nuisance = problem.schema.nuisance(exclude=target)
    theta = values[target]
    if not nuisance:
        return checked_utilities(problem, {target: theta}).T
    m = config.inner_quadrature_points
    draws, _ = draw_block(problem, config.seed, block, m,
                          dists.NUISANCE_STREAM)
    rep = {target: np.repeat(theta, m)}
    for name in nuisance:
        rep[name] = np.tile(draws[name], len(theta))
    util = checked_utilities(problem, rep)
    return util.reshape(len(problem.actions), len(theta), m).mean(axis=2).T


def evii(problem,
         measurement,
         config=None,
         tabulate=True,
         prior=None,
         table=None):
    """
    Expected value of imperfect information of one measurement.

    For each outer sample theta_i an observation z_i is drawn from the
    measurement likelihood, the posterior of the measured parameter is
    tabulated on a fixed grid and the regret of the prior action under
    that posterior is recorded. With ``tabulate`` the action x grid utility
    table is computed once and reused for every outer sample; otherwise it
    is recomputed per block with fresh nuisance draws.

    prior: PriorSolution, optional
        Solution obtained with the same config, reused across measurements
    table: (grid, table), optional
        Output of utility_table for the measured parameter and this config

    Returns
    -------
    report: VoiReport
        ``net_benefit`` is filled with value minus measurement cost
    """
    config = config or EstimatorConfig()
    target = measurement.target
    param = problem.schema.get(target)
    if param.role != MEASURED:
        raise ProblemError(f'{problem.name}: measurement {measurement.label} '
                           f'targets {target}, which is not measured')
    t0 = time.time()
    if prior is None:
        prior = solve_prior(problem, config)
    a_star = prior.best_action
    grid = None
    if measurement.is_perfect:
        table = None
    elif table is not None:
        grid, table = table
    else:
        grid = dists.grid_points(param.distribution, config.span_sigmas,
                                 config.grid_points)
        if tabulate:
            table = _inner_table(problem, target, grid, config, 0)

    def work(block):
        idx, n = block
        values, _ = draw_block(problem, config.seed, idx, n)
        if measurement.is_perfect:
            expect = _perfect_expectations(problem, values, target, config,
                                           idx)
        else:
            z = measurement.observe(
                values[target],
                dists.stream(config.seed, idx, dists.OBSERVATION_STREAM))
            tab = table
            if tab is None:
                tab = _inner_table(problem, target, grid, config, idx)
            expect = _posterior_expectations(measurement,
                                             param.distribution, grid, z, tab)
        best = np.argmax(expect, axis=1)
        informed = expect[np.arange(n), best]
        return informed - expect[:, a_star], informed, best

    parts = _map(work, _blocks(config.n_samples), config.workers)
    regret = np.concatenate([p[0] for p in parts])
    informed = np.concatenate([p[1] for p in parts])
    best = np.concatenate([p[2] for p in parts])
    value, se = _mean_se(regret, None)
    inf_mean, inf_se = _mean_se(informed, None)
    report = VoiReport(kind=EVII,
                       problem=problem.name,
                       value=float(value),
                       standard_error=float(se),
                       prior=prior,
                       posterior_action_frequency=_frequencies(
                           problem, best, None),
                       informed_expected_utility=float(inf_mean),
                       informed_standard_error=float(inf_se),
                       n_samples=config.n_samples,
                       exact=False)
    report = report.with_cost(measurement.label, measurement.cost)
    logger.info('%s: EVII(%s) %.6g +/- %.3g in %.2fs', problem.name,
                measurement.label, report.value, report.standard_error,
                time.time() - t0)
    return report


def net_benefit(report, measurement):
    """Value of the information minus the cost of the measurement"""
    if report.kind != EVII:
        raise ProblemError('net benefit of a measurement needs an EVII report')
    return report.value - measurement.cost


def _histogram(problem, action, label, u, weights, bins):
    lo, hi = float(u.min()), float(u.max())
    counts, edges = np.histogram(u,
                                 bins=bins,
                                 range=(lo, hi) if hi > lo else None,
                                 weights=weights)
    m, se = _mean_se(u, weights)
    return OutcomeDistribution(problem=problem.name,
                               action=action,
                               label=label,
                               edges=edges,
                               counts=counts,
                               mean=float(m),
                               standard_error=float(se),
                               exact=weights is not None,
                               currency=problem.currency)


def outcome_distribution(problem, action, config=None, bins=40):
    """
    Distribution of utilities achieved by one action under the prior

    Returns
    -------
    dist: OutcomeDistribution
        Histogram covering min..max of the sampled utilities, with mean
    """
    config = config or EstimatorConfig()
    action = problem.actions.check(action)
    scen, util = evaluate(problem, config, actions=[action])
    return _histogram(problem, action, problem.actions[action].label,
                      util[0], scen.weights, bins)


def preposterior_outcome_distribution(problem, config=None, bins=40):
    """Distribution of utilities achieved when acting on perfect information"""
    config = config or EstimatorConfig()
    scen, util = evaluate(problem, config)
    return _histogram(problem, None, 'perfect information', util.max(axis=0),
                      scen.weights, bins)


def evpi_with_outcomes(problem, config=None, information_cost=None, bins=40):
    """
    EVPI together with the outcome distributions of the prior action and of
    acting on perfect information, all from one evaluation of the utility
    matrix

    Returns
    -------
    report: VoiReport
    prior_outcome: OutcomeDistribution
    informed_outcome: OutcomeDistribution
    """
    config = config or EstimatorConfig()
    scen, util = evaluate(problem, config)
    report = _evpi_report(problem, scen, util, information_cost)
    a_star = report.prior.best_action
    prior_outcome = _histogram(problem, a_star, problem.actions[a_star].label,
                               util[a_star], scen.weights, bins)
    informed_outcome = _histogram(problem, None, 'perfect information',
                                  util.max(axis=0), scen.weights, bins)
    return report, prior_outcome, informed_outcome


def sensitivity_sweep(problem_factory,
                      sweep,
                      analysis=EVPI,
                      config=None,
                      parameter='value',
                      unit=''):
    """
    Repeat the prior (or prior plus EVPI) analysis over a list of values

    Parameters
    ----------
    problem_factory: callable
        value -> DecisionProblem
    sweep: list of float
    analysis: 'prior' or 'EVPI'
    config: EstimatorConfig
        Row i runs with seed ``config.seed + i``
    parameter, unit: str
        Name and unit of the swept quantity, for the table header

    Returns
    -------
    result: SweepResult
        One row per value; a failing row is marked and the sweep continues
    """
    config = config or EstimatorConfig()
    if len(sweep) == 0:
        raise ConfigError('sweep needs at least one value')
    if analysis not in (PRIOR, EVPI):
        raise ConfigError(f'unknown sweep analysis {analysis!r}')
    rows = []
    name = ''
    for i, value in enumerate(sweep):
        row_config = replace(config, seed=config.seed + i)
        try:
            problem = problem_factory(value)
            name = problem.name
            if analysis == PRIOR:
                prior, report = solve_prior(problem, row_config), None
            else:
                report = evpi(problem, row_config)
                prior = report.prior
        except Exception as exc:
            logger.warning('sweep row %s=%r failed: %s', parameter, value,
                           exc)
            rows.append(
                SweepRow(float(value), row_config.seed, failed=True,
                         error=str(exc)))
            continue
        rows.append(
            SweepRow(value=float(value),
                     seed=row_config.seed,
                     best_action=prior.best_action,
                     best_label=prior.best_label,
                     expected_utility=prior.expected_utility,
                     standard_error=prior.standard_error,
                     evpi=None if report is None else report.value,
                     evpi_standard_error=(None if report is None else
                                          report.standard_error)))
    return SweepResult(name, parameter, unit, analysis, tuple(rows))
