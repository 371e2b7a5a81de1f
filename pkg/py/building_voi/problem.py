"""
Representation of a stochastic decision problem: a finite action space,
scalar uncertain parameters with priors, a utility evaluator and the
measurement models that can inform the parameters.

Utilities are negative costs in GBP; the estimators maximize utility.
"""
import itertools
import logging
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid
from scipy.stats import norm

from .distributions import Degenerate, Distribution, Gaussian
from .errors import ProblemError

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

MEASURED = 'measured'
NUISANCE = 'nuisance'
ROLES = (MEASURED, NUISANCE)
TIME_BASES = ('per-year', 'per-day', 'lifetime')

# more corners than this and validate_problem checks axis points only
MAX_CHECK_CORNERS = 256


@dataclass(frozen=True)
class Action:
    index: int
    label: str
    payload: float
    unit: str = ''


@dataclass(frozen=True)
class ActionSpace:
    actions: tuple

    @classmethod
    def from_payloads(cls, payloads, unit='', fmt='{:g}'):
        """Actions labelled by their formatted payloads, in the given order"""
        return cls(
            tuple(
                Action(i, fmt.format(p), p, unit)
                for i, p in enumerate(payloads)))

    def __len__(self):
        return len(self.actions)

    def __iter__(self):
        return iter(self.actions)

    def __getitem__(self, index):
        return self.actions[index]

    @property
    def labels(self):
        return [a.label for a in self.actions]

    @property
    def payloads(self):
        return np.array([a.payload for a in self.actions], dtype=float)

    def index_of(self, label):
        for a in self.actions:
            if a.label == str(label):
                return a.index
        raise KeyError(label)

    def check(self, index):
        if isinstance(index, (bool, np.bool_)) or not isinstance(
                index, (int, np.integer)) or not 0 <= index < len(self):
            raise ProblemError(
                f'unknown action index {index!r}; valid 0..{len(self) - 1}')
        return int(index)

    def violations(self):
        out = []
        if len(self.actions) == 0:
            return ['action space is empty']
        if [a.index for a in self.actions] != list(range(len(self.actions))):
            out.append('action indices are not contiguous 0..n-1')
        if len(set(self.labels)) != len(self.labels):
            out.append('labels unique: duplicate action labels')
        if not np.all(np.isfinite(self.payloads)):
            out.append('action payloads must be finite numbers')
        return out


@dataclass(frozen=True)
class Parameter:
    name: str
    distribution: Distribution
    role: str = NUISANCE
    unit: str = ''


@dataclass(frozen=True)
class ParameterSchema:
    params: tuple

    def __len__(self):
        return len(self.params)

    def __iter__(self):
        return iter(self.params)

    @property
    def names(self):
        return [p.name for p in self.params]

    def get(self, name):
        for p in self.params:
            if p.name == name:
                return p
        raise ProblemError(f'no parameter named {name!r}; schema has ' +
                           ', '.join(self.names))

    @property
    def measured(self):
        return [p.name for p in self.params if p.role == MEASURED]

    def nuisance(self, exclude=None):
        return [p.name for p in self.params if p.name != exclude]

    @property
    def finite_support(self):
        return all(p.distribution.finite_support for p in self.params)

    def violations(self):
        out = []
        if len(set(self.names)) != len(self.names):
            out.append('parameter names must be unique')
        for p in self.params:
            if p.role not in ROLES:
                out.append(f'parameter {p.name}: unknown role {p.role!r}')
            if not isinstance(p.distribution, Distribution):
                out.append(f'parameter {p.name}: not a distribution')
        if len(self.measured) > 1:
            out.append('at most one parameter may be marked measured')
        return out


class ScenarioSample(Mapping):
    """
    One realization of the uncertain parameters, name -> value.

    With a schema the keys must match the schema names exactly and every
    value must be finite and inside its prior's support (a support point
    for finite-support priors).
    """

    def __init__(self, values, schema=None):
        try:
            self._values = {k: float(v) for k, v in dict(values).items()}
        except (TypeError, ValueError) as exc:
            raise ProblemError(f'scenario values must be numbers: {exc}') \
                from exc
        if schema is not None:
            self._check(schema)

    def _check(self, schema):
        names = set(schema.names)
        missing = names - set(self._values)
        if missing:
            raise ProblemError('sample missing schema parameters: ' +
                               ', '.join(sorted(missing)))
        extra = set(self._values) - names
        if extra:
            raise ProblemError('sample has parameters outside the schema: ' +
                               ', '.join(sorted(extra)))
        for p in schema:
            x = self._values[p.name]
            if not np.isfinite(x):
                raise ProblemError(f'{p.name}={x!r} is not finite')
            dist = p.distribution
            if dist.finite_support:
                inside = float(dist.mass(x)) > 0
            else:
                lo, hi = dist.support()
                inside = lo <= x <= hi
            if not inside:
                raise ProblemError(
                    f'{p.name}={x!r} lies outside the prior support')

    def __getitem__(self, key):
        return self._values[key]

    def __iter__(self):
        return iter(self._values)

    def __len__(self):
        return len(self._values)

    def __repr__(self):
        return f'ScenarioSample({self._values!r})'

    def arrays(self):
        """Length-one arrays in the form utility callables take"""
        return {k: np.array([v]) for k, v in self._values.items()}


@dataclass(frozen=True)
class DecisionProblem:
    """
    The triple of actions, prior and utility.

    utility: callable(action_index, values) -> ndarray
        ``values`` maps every schema name to an array of equal length;
        the result holds one utility per scenario. Must be pure.
    admissible: callable(values) -> bool ndarray, optional
        Scenarios failing it are redrawn by the samplers.
    """
    name: str
    actions: ActionSpace
    schema: ParameterSchema
    utility: object
    currency: str = 'GBP'
    time_basis: str = 'per-year'
    admissible: object = None
    description: str = ''
    metadata: dict = field(default_factory=dict, compare=False)

    def utilities(self, values):
        """
        Returns
        -------
        u: ndarray
            Shape (n_actions, n_scenarios)
        """
        n = len(next(iter(values.values())))
        out = np.empty((len(self.actions), n))
        for a in range(len(self.actions)):
            out[a] = self.utility(a, values)
        return out


@dataclass(frozen=True)
class MeasurementModel:
    """
    Gaussian measurement z ~ N(theta, sigma(theta)) of one parameter with
    sigma(theta) = absolute_noise + relative_noise*|theta|. Both zero gives
    a perfect measurement.
    """
    target: str
    label: str
    cost: float = 0.
    relative_noise: float = 0.
    absolute_noise: float = 0.
    description: str = ''

    def __post_init__(self):
        if not self.cost >= 0:
            raise ProblemError(f'measurement {self.label}: negative cost')
        if self.relative_noise < 0 or self.absolute_noise < 0:
            raise ProblemError(f'measurement {self.label}: negative noise')

    @property
    def is_perfect(self):
        return self.relative_noise == 0 and self.absolute_noise == 0

    def noise_scale(self, theta):
        return self.absolute_noise + self.relative_noise * np.abs(theta)

    def likelihood(self, theta):
        """Distribution of the observation for a parameter value theta"""
        scale = float(self.noise_scale(theta))
        if scale == 0:
            return Degenerate(theta)
        return Gaussian(theta, scale)

    def log_density(self, z, theta):
        return norm.logpdf(z, theta, self.noise_scale(theta))

    def density(self, z, theta):
        return norm.pdf(z, theta, self.noise_scale(theta))

    def observe(self, theta, rng):
        theta = np.asarray(theta, dtype=float)
        return theta + self.noise_scale(theta) * rng.standard_normal(
            theta.shape)


@dataclass
class ValidationReport:
    problem: str
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return len(self.violations) == 0

    def __bool__(self):
        return self.ok


def evaluate_utility(problem, action, sample):
    """
    Utility u(a, theta) of one action in one scenario

    Parameters
    ----------
    problem: DecisionProblem
    action: int
        Action index
    sample: ScenarioSample or mapping
        Parameter name -> value; checked against the schema and the
        prior supports

    Returns
    -------
    u: float
        Utility in the problem currency (costs are negative)
    """
    action = problem.actions.check(action)
    sample = ScenarioSample(sample, problem.schema)
    return float(problem.utility(action, sample.arrays())[0])


def _check_points(schema):
    """Prior mean plus the +/-3 sigma corners, clipped to the support"""
    axes = []
    for p in schema:
        dist = p.distribution
        lo, hi = dist.support()
        m, s = dist.mean(), dist.std()
        axes.append((m, min(max(m - 3 * s, lo), hi),
                     min(max(m + 3 * s, lo), hi)))
    names = schema.names
    points = [('prior mean', {n: ax[0] for n, ax in zip(names, axes)})]
    if 2**len(axes) <= MAX_CHECK_CORNERS:
        for corner in itertools.product((1, 2), repeat=len(axes)):
            vals = {n: ax[c] for n, ax, c in zip(names, axes, corner)}
            tag = ', '.join(f'{n}{"-" if c == 1 else "+"}3sd'
                            for n, c in zip(names, corner))
            points.append((f'corner ({tag})', vals))
    else:
        for i, n in enumerate(names):
            for c, sign in ((1, '-'), (2, '+')):
                vals = dict(points[0][1])
                vals[n] = axes[i][c]
                points.append((f'axis ({n}{sign}3sd)', vals))
    return points


def validate_problem(problem):
    """
    Check the structural invariants of a problem and evaluate its utility
    at the prior mean and the +/-3 sigma corners.

    Returns
    -------
    report: ValidationReport
        Never raises; failures are listed in ``report.violations``
    """
    report = ValidationReport(problem.name)
    v = report.violations
    v.extend(problem.actions.violations())
    v.extend(problem.schema.violations())
    if problem.time_basis not in TIME_BASES:
        v.append(f'unknown time basis {problem.time_basis!r}')
    if v:
        return report
    for label, vals in _check_points(problem.schema):
        arrays = {k: np.array([x]) for k, x in vals.items()}
        if problem.admissible is not None and not bool(
                np.all(problem.admissible(arrays))):
            continue
        for a in range(len(problem.actions)):
            try:
                u1 = problem.utility(a, arrays)
                u2 = problem.utility(a, arrays)
            except Exception as exc:
                v.append(f'utility raised at {label}, action {a}: '
                         f'{exc}')
                continue
            if not np.all(np.isfinite(u1)):
                v.append(f'utility not finite at {label}, action {a}')
            elif not np.array_equal(u1, u2):
                v.append(
                    f'utility not deterministic at {label}, action {a}')
    return report


def validate_measurement(problem, measurement, n_theta=33, n_z=4001):
    """
    Check that a measurement targets a measured parameter and that its
    likelihood integrates to one over z for theta across the prior support.

    Returns
    -------
    report: ValidationReport
    """
    report = ValidationReport(f'{problem.name}:{measurement.label}')
    v = report.violations
    try:
        param = problem.schema.get(measurement.target)
    except ProblemError as exc:
        v.append(str(exc))
        return report
    if param.role != MEASURED:
        v.append(f'measurement target {param.name} is not marked measured')
    if measurement.is_perfect:
        return report
    dist = param.distribution
    m, s = dist.mean(), dist.std()
    lo, hi = dist.support()
    thetas = np.linspace(max(m - 4 * s, lo), min(m + 4 * s, hi), n_theta)
    for theta in thetas:
        scale = float(measurement.noise_scale(theta))
        if scale <= 0:
            continue
        z = np.linspace(theta - 10 * scale, theta + 10 * scale, n_z)
        total = trapezoid(measurement.density(z, theta), z)
        if abs(total - 1) > 1e-6:
            v.append(f'likelihood integrates to {total:.8f} at '
                     f'{param.name}={theta:g}')
    return report
