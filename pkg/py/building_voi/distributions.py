"""
Distribution families for priors and likelihoods, random streams and
Bayesian posterior construction.

Every family is an immutable dataclass exposing ``sample``, ``density``
(``mass`` for the finite-support families), ``mean``, ``var`` and
``support``, and serializes to the config document syntax, e.g.
``{"type": "gaussian", "mu": 12.6, "sigma": 1.36}``.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.special as sps
from scipy.integrate import trapezoid
from scipy.stats import norm

from .errors import DistributionError, PosteriorError

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

# truncated normal switches from rejection to inverse-CDF below this
MIN_ACCEPTANCE = 0.1
DEFAULT_SPAN_SIGMAS = 6.0
DEFAULT_GRID_POINTS = 512
MIN_GRID_POINTS = 64

PRIOR_STREAM = 0
OBSERVATION_STREAM = 1
NUISANCE_STREAM = 2


def stream(seed, index, purpose=PRIOR_STREAM):
    """
    Counter-based random stream.

    Parameters
    ----------
    seed: int
        The run seed
    index: int
        Block (or row) counter; the same (seed, index, purpose) always
        yields the same draws, whichever worker consumes it
    purpose: int
        Separates prior, observation and nuisance draws

    Returns
    -------
    rng: numpy.random.Generator
    """
    seq = np.random.SeedSequence([int(seed) % 2**64, int(purpose), int(index)])
    return np.random.Generator(np.random.Philox(seq))


def _finite(name, value):
    if not np.isfinite(value):
        raise DistributionError(f'{name} must be finite, got {value!r}')
    return float(value)


def _std_normal_tail(x):
    # x*phi(x), zero at the infinities
    if np.isinf(x):
        return 0.
    return x * norm.pdf(x)


class Distribution:
    """Common interface of the distribution families"""
    finite_support = False

    def sample(self, rng, size=None):
        raise NotImplementedError

    def density(self, x):
        raise NotImplementedError

    def log_density(self, x):
        with np.errstate(divide='ignore'):
            return np.log(self.density(x))

    def mean(self):
        raise NotImplementedError

    def var(self):
        raise NotImplementedError

    def std(self):
        return math.sqrt(self.var())

    def support(self):
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Gaussian(Distribution):
    mu: float
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, 'mu', _finite('mu', self.mu))
        object.__setattr__(self, 'sigma', _finite('sigma', self.sigma))
        if self.sigma <= 0:
            raise DistributionError(
                f'gaussian sigma must be positive, got {self.sigma}')

    def sample(self, rng, size=None):
        return rng.normal(self.mu, self.sigma, size)

    def density(self, x):
        return norm.pdf(x, self.mu, self.sigma)

    def log_density(self, x):
        return norm.logpdf(x, self.mu, self.sigma)

    def mean(self):
        return self.mu

    def var(self):
        return self.sigma**2

    def support(self):
        return (-np.inf, np.inf)

    def to_dict(self):
        return dict(type='gaussian', mu=self.mu, sigma=self.sigma)


@dataclass(frozen=True)
class TruncatedGaussian(Distribution):
    """
    Gaussian restricted to [lower, upper]; ``upper=None`` means unbounded.
    mu and sigma are the parameters of the parent Gaussian.
    """
    mu: float
    sigma: float
    lower: float
    upper: float = None

    def __post_init__(self):
        object.__setattr__(self, 'mu', _finite('mu', self.mu))
        object.__setattr__(self, 'sigma', _finite('sigma', self.sigma))
        object.__setattr__(self, 'lower', _finite('lower', self.lower))
        if self.upper is not None:
            object.__setattr__(self, 'upper', _finite('upper', self.upper))
            if not self.lower < self.upper:
                raise DistributionError(
                    'truncated gaussian needs lower < upper, got '
                    f'[{self.lower}, {self.upper}]')
        if self.sigma <= 0:
            raise DistributionError(
                f'truncated gaussian sigma must be positive, got {self.sigma}')
        if self._mass() <= 0:
            raise DistributionError(
                'truncation interval carries no probability mass')

    def _standardized(self):
        a = (self.lower - self.mu) / self.sigma
        if self.upper is None:
            b = np.inf
        else:
            b = (self.upper - self.mu) / self.sigma
        return a, b

    def _mass(self):
        a, b = self._standardized()
        if a > 0:
            # upper tail: work with survival functions
            return float(sps.ndtr(-a) - sps.ndtr(-b))
        return float(sps.ndtr(b) - sps.ndtr(a))

    def acceptance(self):
        """Acceptance rate of rejection sampling from the parent"""
        return self._mass()

    def sample(self, rng, size=None):
        n = 1 if size is None else int(np.prod(size))
        a, b = self._standardized()
        mass = self._mass()
        if mass >= MIN_ACCEPTANCE:
            out = np.empty(n)
            filled = 0
            while filled < n:
                need = n - filled
                draw = rng.standard_normal(int(need / mass * 1.2) + 16)
                draw = draw[(draw >= a) & (draw <= b)][:need]
                out[filled:filled + len(draw)] = draw
                filled += len(draw)
        elif a > 0:
            u = rng.uniform(sps.ndtr(-b), sps.ndtr(-a), n)
            out = -sps.ndtri(u)
        else:
            u = rng.uniform(sps.ndtr(a), sps.ndtr(b), n)
            out = sps.ndtri(u)
        out = np.clip(self.mu + self.sigma * out, self.lower,
                      np.inf if self.upper is None else self.upper)
        if size is None:
            return float(out[0])
        return out.reshape(size)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        upper = np.inf if self.upper is None else self.upper
        inside = (x >= self.lower) & (x <= upper)
        return np.where(inside,
                        norm.pdf(x, self.mu, self.sigma) / self._mass(), 0.)

    def mean(self):
        a, b = self._standardized()
        return self.mu + self.sigma * (norm.pdf(a) -
                                       norm.pdf(b)) / self._mass()

    def var(self):
        a, b = self._standardized()
        z = self._mass()
        shift = (norm.pdf(a) - norm.pdf(b)) / z
        return self.sigma**2 * (1 + (_std_normal_tail(a) -
                                     _std_normal_tail(b)) / z - shift**2)

    def support(self):
        return (self.lower, np.inf if self.upper is None else self.upper)

    def to_dict(self):
        return dict(type='truncated_gaussian',
                    mu=self.mu,
                    sigma=self.sigma,
                    lower=self.lower,
                    upper=self.upper)


class _FiniteDistribution(Distribution):
    finite_support = True

    def outcomes(self):
        """
        Returns
        -------
        values, probs: ndarray
            The support points and their probabilities
        """
        raise NotImplementedError

    def mass(self, k):
        values, probs = self.outcomes()
        k = np.asarray(k, dtype=float)
        hits = k[..., None] == values
        return (hits * probs).sum(axis=-1)

    def density(self, x):
        # mass with respect to counting measure
        return self.mass(x)

    def mean(self):
        values, probs = self.outcomes()
        return float(np.dot(values, probs))

    def var(self):
        values, probs = self.outcomes()
        return float(np.dot((values - self.mean())**2, probs))

    def support(self):
        values = self.outcomes()[0]
        return (float(values.min()), float(values.max()))


@dataclass(frozen=True)
class DiscreteUniform(_FiniteDistribution):
    lo: int
    hi: int
    inclusive: bool = True

    def __post_init__(self):
        if int(self.lo) != self.lo or int(self.hi) != self.hi:
            raise DistributionError('discrete uniform bounds must be integers')
        object.__setattr__(self, 'lo', int(self.lo))
        object.__setattr__(self, 'hi', int(self.hi))
        if self._count() < 1:
            raise DistributionError(
                f'empty discrete uniform [{self.lo}, {self.hi}]')

    def _count(self):
        return self.hi - self.lo + (1 if self.inclusive else 0)

    def outcomes(self):
        n = self._count()
        return (np.arange(self.lo, self.lo + n, dtype=float),
                np.full(n, 1. / n))

    def sample(self, rng, size=None):
        x = rng.integers(self.lo, self.hi, size, endpoint=self.inclusive)
        if size is None:
            return float(x)
        return x.astype(float)

    def mean(self):
        return (self.lo + self.lo + self._count() - 1) / 2.

    def var(self):
        return (self._count()**2 - 1) / 12.

    def to_dict(self):
        return dict(type='discrete_uniform',
                    lo=self.lo,
                    hi=self.hi,
                    inclusive=self.inclusive)


@dataclass(frozen=True)
class Categorical(_FiniteDistribution):
    values: tuple
    probs: tuple

    def __post_init__(self):
        values = tuple(_finite('value', v) for v in self.values)
        probs = tuple(float(p) for p in self.probs)
        if len(values) == 0 or len(values) != len(probs):
            raise DistributionError(
                'categorical needs equally long, non-empty values and probs')
        if min(probs) < 0:
            raise DistributionError('categorical probs must be non-negative')
        if abs(math.fsum(probs) - 1) > 1e-12:
            raise DistributionError(
                f'categorical probs sum to {math.fsum(probs)!r}, not 1')
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'probs', probs)

    def outcomes(self):
        return np.array(self.values), np.array(self.probs)

    def sample(self, rng, size=None):
        x = rng.choice(np.array(self.values), size, p=np.array(self.probs))
        if size is None:
            return float(x)
        return x

    def to_dict(self):
        return dict(type='categorical',
                    values=list(self.values),
                    probs=list(self.probs))


@dataclass(frozen=True)
class Degenerate(_FiniteDistribution):
    """Point mass; houses the perfect-information posterior"""
    value: float

    def __post_init__(self):
        object.__setattr__(self, 'value', _finite('value', self.value))

    def outcomes(self):
        return np.array([self.value]), np.array([1.])

    def sample(self, rng, size=None):
        if size is None:
            return self.value
        return np.full(size, self.value)

    def mean(self):
        return self.value

    def var(self):
        return 0.

    def to_dict(self):
        return dict(type='degenerate', value=self.value)


FAMILIES = {
    'gaussian': Gaussian,
    'truncated_gaussian': TruncatedGaussian,
    'discrete_uniform': DiscreteUniform,
    'categorical': Categorical,
    'degenerate': Degenerate,
}


def from_dict(data):
    """
    Build a distribution from its config document form

    Parameters
    ----------
    data: dict
        Mapping with a ``type`` tag plus the family's fields

    Returns
    -------
    spec: Distribution
    """
    if isinstance(data, Distribution):
        return data
    data = dict(data)
    tag = data.pop('type', None)
    if tag not in FAMILIES:
        raise DistributionError(
            f'unknown distribution type {tag!r}; known: ' +
            ', '.join(sorted(FAMILIES)))
    cls = FAMILIES[tag]
    known = set(cls.__dataclass_fields__)
    extra = set(data) - known
    if extra:
        raise DistributionError(
            f'unknown keys for {tag}: ' + ', '.join(sorted(extra)))
    try:
        return cls(**data)
    except TypeError as exc:
        raise DistributionError(f'bad {tag} specification: {exc}') from exc


def to_dict(spec):
    return spec.to_dict()


def sample(spec, rng, size=None):
    return spec.sample(rng, size)


def density(spec, x):
    return spec.density(x)


def mass(spec, k):
    if not spec.finite_support:
        raise DistributionError(
            f'{type(spec).__name__} has no probability mass function')
    return spec.mass(k)


def mean(spec):
    return spec.mean()


def conjugate_gaussian_posterior(prior, obs_sigma, z):
    """
    Posterior of a Gaussian prior after one Gaussian observation with
    known noise ``obs_sigma``
    """
    obs_sigma = float(obs_sigma)
    if not (np.isfinite(obs_sigma) and obs_sigma > 0):
        raise DistributionError(
            f'observation sigma must be finite and positive, got {obs_sigma}')
    s0 = prior.sigma**2
    s1 = obs_sigma**2
    mu = (s1 * prior.mu + s0 * z) / (s0 + s1)
    var = s0 * s1 / (s0 + s1)
    return Gaussian(mu, math.sqrt(var))


def grid_points(spec,
                span_sigmas=DEFAULT_SPAN_SIGMAS,
                n_points=DEFAULT_GRID_POINTS):
    """
    Quadrature points covering mean +/- span_sigmas*std, clipped to
    the support. Finite-support families use their own support points.
    """
    m = spec.mean()
    s = spec.std()
    if spec.finite_support:
        values = spec.outcomes()[0]
        if s > 0:
            values = values[(values >= m - span_sigmas * s) &
                            (values <= m + span_sigmas * s)]
        return np.unique(values)
    if not (np.isfinite(m) and np.isfinite(s)):
        raise DistributionError('grid needs a finite prior mean and scale')
    lo, hi = spec.support()
    return np.linspace(max(m - span_sigmas * s, lo),
                       min(m + span_sigmas * s, hi), n_points)


@dataclass(frozen=True, eq=False)
class GridPosterior:
    """
    Posterior tabulated on a grid.

    points: strictly increasing parameter values, shape (G,)
    weights: probabilities attached to the points, summing to one; shape
        (G,) for one observation or (n_obs, G) for a batch
    pdf: posterior density normalized by trapezoidal quadrature
        (None for finite-support priors)
    """
    points: np.ndarray
    weights: np.ndarray
    pdf: np.ndarray = None

    @classmethod
    def from_unnormalized(cls, points, values, discrete=False):
        points = np.asarray(points, dtype=float)
        values = np.asarray(values, dtype=float)
        total = values.sum(axis=-1, keepdims=True)
        pdf = None
        if not discrete and len(points) > 1:
            pdf = values / trapezoid(values, points, axis=-1)[..., None]
        return cls(points, values / total, pdf)

    @property
    def batched(self):
        return self.weights.ndim == 2

    def expect(self, values):
        """
        Posterior expectation of functions tabulated on the points.

        values of shape (G,) give a scalar per observation; a table of
        shape (k, G) gives k expectations per observation.
        """
        return self.weights @ np.asarray(values, dtype=float).T

    def mean(self):
        m = self.expect(self.points)
        return m if self.batched else float(m)

    def var(self):
        m = np.expand_dims(self.expect(self.points), -1)
        v = np.sum(self.weights * (self.points - m)**2, axis=-1)
        return v if self.batched else float(v)


def log_prior_on_grid(prior, points):
    """Log prior density (log mass for finite-support priors) at the points"""
    with np.errstate(divide='ignore'):
        if prior.finite_support:
            return np.log(prior.mass(points))
        return prior.log_density(points)


def grid_posterior(prior,
                   likelihood_density=None,
                   z=None,
                   span_sigmas=DEFAULT_SPAN_SIGMAS,
                   n_points=DEFAULT_GRID_POINTS,
                   log_likelihood=None,
                   points=None):
    """
    Posterior over a scalar parameter by grid quadrature, computed in log
    space and shifted by the per-observation maximum before normalizing

    Parameters
    ----------
    prior: Distribution
    likelihood_density: callable
        f(z, theta) broadcasting over an array of theta values
    z: float or 1d array
        The observation; an array gives one posterior row per entry
    span_sigmas: float
        Half-width of the grid in prior standard deviations
    n_points: int
        Grid size for continuous priors (at least 64)
    log_likelihood: callable, optional
        log f(z, theta), used instead of ``likelihood_density``
    points: ndarray, optional
        Precomputed grid (from grid_points) to reuse across calls

    Returns
    -------
    posterior: GridPosterior
    """
    if (likelihood_density is None) == (log_likelihood is None):
        raise DistributionError(
            'give exactly one of likelihood_density and log_likelihood')
    if points is None:
        if n_points < MIN_GRID_POINTS:
            raise DistributionError(
                f'posterior grid needs at least {MIN_GRID_POINTS} points, '
                f'got {n_points}')
        points = grid_points(prior, span_sigmas, n_points)
    points = np.asarray(points, dtype=float)
    z = np.asarray(z, dtype=float)
    if z.ndim > 1:
        raise DistributionError('observations must be a scalar or 1d array')
    zz = z[..., None]
    with np.errstate(divide='ignore', invalid='ignore'):
        if log_likelihood is not None:
            ll = np.asarray(log_likelihood(zz, points), dtype=float)
        else:
            ll = np.log(
                np.asarray(likelihood_density(zz, points), dtype=float))
        ll = np.broadcast_to(ll, z.shape + points.shape) + \
            log_prior_on_grid(prior, points)
    peak = ll.max(axis=-1, keepdims=True)
    bad = ~np.isfinite(peak[..., 0])
    if np.any(bad):
        first = float(z.flat[int(np.argmax(bad))])
        raise PosteriorError(
            f'posterior weights all vanish for observation z={first!r}')
    return GridPosterior.from_unnormalized(points,
                                           np.exp(ll - peak),
                                           discrete=prior.finite_support)
