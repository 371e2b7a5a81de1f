import numpy as np
import pytest
from scipy.integrate import quad, trapezoid
from scipy.stats import norm, truncnorm

from building_voi import distributions as dists
from building_voi.errors import DistributionError, PosteriorError


def test_stream_is_counter_based():
    a = dists.stream(42, 3).standard_normal(5)
    b = dists.stream(42, 3).standard_normal(5)
    c = dists.stream(42, 4).standard_normal(5)
    d = dists.stream(42, 3, dists.OBSERVATION_STREAM).standard_normal(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


@pytest.mark.parametrize('spec', [
    dists.Gaussian(1.94, 0.31),
    dists.TruncatedGaussian(0.01, 0.25, lower=0.),
    dists.DiscreteUniform(0, 100),
    dists.Categorical([1., 2., 5.], [0.2, 0.3, 0.5]),
    dists.Degenerate(3.5),
])
def test_document_form(spec):
    doc = spec.to_dict()
    assert doc['type'] in dists.FAMILIES
    assert dists.from_dict(doc) == spec


def test_from_dict_rejects_unknown():
    with pytest.raises(DistributionError, match='unknown distribution type'):
        dists.from_dict({'type': 'lognormal', 'mu': 0, 'sigma': 1})
    with pytest.raises(DistributionError, match='unknown keys'):
        dists.from_dict({'type': 'gaussian', 'mu': 0, 'sigma': 1, 'nu': 2})


@pytest.mark.parametrize('kw', [
    dict(mu=0, sigma=0),
    dict(mu=0, sigma=-1),
    dict(mu=np.nan, sigma=1),
])
def test_gaussian_invalid(kw):
    with pytest.raises(DistributionError):
        dists.Gaussian(**kw)


def test_truncated_gaussian_moments():
    spec = dists.TruncatedGaussian(0.01, 0.25, lower=0.)
    ref = truncnorm((0 - 0.01) / 0.25, np.inf, loc=0.01, scale=0.25)
    assert spec.mean() == pytest.approx(0.2032, abs=1e-4)
    assert spec.mean() == pytest.approx(ref.mean(), rel=1e-10)
    assert spec.var() == pytest.approx(ref.var(), rel=1e-8)
    x = np.linspace(-0.1, 1, 12)
    assert np.allclose(spec.density(x), ref.pdf(x))


def test_truncated_gaussian_sampler_mean():
    spec = dists.TruncatedGaussian(0.01, 0.25, lower=0.)
    x = spec.sample(dists.stream(1, 0), 10**6)
    assert x.min() >= 0
    assert abs(x.mean() - spec.mean()) < 5 * spec.std() / np.sqrt(len(x))


def test_truncated_gaussian_far_tail_uses_inverse_cdf():
    spec = dists.TruncatedGaussian(0., 1., lower=4.)
    assert spec.acceptance() < dists.MIN_ACCEPTANCE
    x = spec.sample(dists.stream(7, 0), 10**5)
    assert np.all(x >= 4)
    assert abs(x.mean() - spec.mean()) < 5 * spec.std() / np.sqrt(len(x))


def test_truncated_gaussian_empty_interval():
    with pytest.raises(DistributionError):
        dists.TruncatedGaussian(0., 1., lower=1., upper=0.5)


def test_discrete_uniform():
    spec = dists.DiscreteUniform(0, 100)
    values, probs = spec.outcomes()
    assert len(values) == 101
    assert probs.sum() == pytest.approx(1)
    assert spec.mean() == 50
    assert spec.mass(50) == pytest.approx(1 / 101)
    assert spec.mass(50.5) == 0
    x = spec.sample(dists.stream(0, 0), 1000)
    assert x.dtype == float
    assert x.min() >= 0 and x.max() <= 100
    assert np.all(x == np.round(x))
    exclusive = dists.DiscreteUniform(0, 10, inclusive=False)
    assert exclusive.outcomes()[0].max() == 9


def test_categorical_probs_must_sum_to_one():
    with pytest.raises(DistributionError, match='sum to'):
        dists.Categorical([0, 1], [0.5, 0.6])
    with pytest.raises(DistributionError):
        dists.Categorical([0, 1], [0.5])


def test_mass_needs_finite_support():
    assert dists.mass(dists.Degenerate(2.), 2.) == 1
    with pytest.raises(DistributionError):
        dists.mass(dists.Gaussian(0, 1), 0.)


def test_conjugate_posterior():
    post = dists.conjugate_gaussian_posterior(dists.Gaussian(1.94, 0.31),
                                              0.10, 2.2)
    assert post.mu == pytest.approx(2.1755, abs=2e-3)
    assert post.sigma == pytest.approx(0.0952, abs=1e-3)
    with pytest.raises(DistributionError):
        dists.conjugate_gaussian_posterior(dists.Gaussian(0, 1), 0., 1.)


def test_grid_posterior_matches_conjugate():
    prior = dists.Gaussian(1.94, 0.31)
    obs = 0.10
    post = dists.grid_posterior(prior, lambda z, t: norm.pdf(z, t, obs), 2.2)
    exact = dists.conjugate_gaussian_posterior(prior, obs, 2.2)
    assert post.mean() == pytest.approx(exact.mu, rel=1e-4)
    assert np.sqrt(post.var()) == pytest.approx(exact.sigma, rel=1e-3)
    assert post.weights.sum() == pytest.approx(1)
    assert trapezoid(post.pdf, post.points) == pytest.approx(1)


def test_grid_posterior_finite_support_uses_support_points():
    prior = dists.DiscreteUniform(0, 10)
    post = dists.grid_posterior(prior, lambda z, t: norm.pdf(z, t, 1.), 3.)
    assert np.array_equal(post.points, np.arange(11.))
    assert post.pdf is None
    assert post.weights.sum() == pytest.approx(1)


def test_grid_posterior_errors():
    prior = dists.Gaussian(0, 1)
    with pytest.raises(DistributionError, match='at least'):
        dists.grid_posterior(prior, lambda z, t: norm.pdf(z, t, 1), 0.,
                             n_points=10)
    with pytest.raises(PosteriorError, match='z='):
        dists.grid_posterior(prior, lambda z, t: np.zeros_like(t), 0.)


def test_grid_points_clipped_to_support():
    spec = dists.TruncatedGaussian(0.01, 0.25, lower=0.)
    grid = dists.grid_points(spec)
    assert grid[0] == 0
    assert len(grid) == dists.DEFAULT_GRID_POINTS


CONTINUOUS = [
    dists.Gaussian(1.94, 0.31),
    dists.Gaussian(0., 1.),
    dists.TruncatedGaussian(0.01, 0.25, lower=0.),
    dists.TruncatedGaussian(0., 1., lower=4.),
    dists.TruncatedGaussian(0.5, 2., lower=-1., upper=2.),
]
FINITE = [
    dists.DiscreteUniform(0, 100),
    dists.Categorical([1., 2., 3.], [0.1, 0.7, 0.2]),
    dists.Degenerate(3.5),
]


@pytest.mark.parametrize('spec', CONTINUOUS)
def test_density_integrates_to_one(spec):
    lo, hi = spec.support()
    m, s = spec.mean(), spec.std()
    lo, hi = max(lo, m - 15 * s), min(hi, m + 15 * s)
    total, _ = quad(lambda x: float(spec.density(x)), lo, hi,
                    epsabs=1e-12, epsrel=1e-10, limit=200)
    assert total == pytest.approx(1, abs=1e-6)


@pytest.mark.parametrize('spec', FINITE)
def test_mass_sums_to_one(spec):
    values, _ = spec.outcomes()
    assert spec.mass(values).sum() == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize('spec', CONTINUOUS + FINITE)
def test_sample_moments(spec):
    n = 10**6
    x = np.asarray(spec.sample(dists.stream(11, 0), n))
    assert x.shape == (n, )
    lo, hi = spec.support()
    assert x.min() >= lo and x.max() <= hi
    assert abs(x.mean() - spec.mean()) <= 5 * spec.std() / np.sqrt(n)
    assert x.var() == pytest.approx(spec.var(), rel=0.02, abs=1e-12)


def test_reference_values():
    x = dists.DiscreteUniform(0, 100).sample(dists.stream(5, 0), 10**6)
    assert x.mean() == pytest.approx(50, abs=0.1)
    assert dists.density(dists.Gaussian(0., 1.), 0.) == pytest.approx(
        0.398942, abs=1e-6)
    cat = dists.Categorical([1., 2., 3.], [0.1, 0.7, 0.2])
    assert dists.mass(cat, 2.) == pytest.approx(0.7)
    assert dists.mass(cat, 2.5) == 0


def test_conjugate_posterior_limits():
    prior = dists.Gaussian(1.94, 0.31)
    vague = dists.conjugate_gaussian_posterior(prior, 1e12, 2.2)
    assert vague.mu == pytest.approx(prior.mu, rel=1e-12)
    assert vague.sigma == pytest.approx(prior.sigma, rel=1e-12)
    sharp = dists.conjugate_gaussian_posterior(prior, 1e-9, 2.2)
    assert sharp.mu == pytest.approx(2.2, rel=1e-12)
    assert sharp.sigma == pytest.approx(1e-9, rel=1e-6)


@pytest.mark.parametrize('prior', [
    dists.Gaussian(1.94, 0.31),
    dists.TruncatedGaussian(0.01, 0.25, lower=0.),
    dists.DiscreteUniform(0, 100),
])
def test_flat_likelihood_returns_prior(prior):
    post = dists.grid_posterior(prior, lambda z, t: np.ones_like(t), 0.)
    ref = prior.density(post.points)
    assert np.allclose(post.weights, ref / ref.sum(), rtol=1e-10, atol=0)


def test_grid_posterior_relative_noise_matches_importance_sampling():
    prior = dists.Gaussian(1.94, 0.31)
    z, scale = 1.94, 0.05
    post = dists.grid_posterior(prior,
                                lambda z, t: norm.pdf(z, t, scale * t), z)
    theta = prior.sample(dists.stream(3, 0), 10**6)
    theta = theta[theta > 0]
    w = norm.pdf(z, theta, scale * theta)
    oracle = np.sum(w * theta) / np.sum(w)
    assert post.mean() == pytest.approx(oracle, abs=1e-3)
    logpost = dists.grid_posterior(
        prior, z=z, log_likelihood=lambda z, t: norm.logpdf(z, t, scale * t))
    assert np.allclose(logpost.weights, post.weights, rtol=1e-8, atol=1e-15)


def test_grid_posterior_concentrates_as_noise_vanishes():
    prior = dists.Gaussian(1.94, 0.31)
    variances = []
    for sigma in (0.2, 0.05, 0.01):
        post = dists.grid_posterior(prior,
                                    lambda z, t: norm.pdf(z, t, sigma), 2.2)
        exact = dists.conjugate_gaussian_posterior(prior, sigma, 2.2)
        assert post.mean() == pytest.approx(exact.mu, rel=1e-4)
        assert np.sqrt(post.var()) == pytest.approx(exact.sigma, rel=0.02)
        variances.append(post.var())
    assert np.all(np.diff(variances) < 0)


@pytest.mark.parametrize('factor', [1e-250, 1., 1e250])
def test_grid_posterior_ignores_likelihood_scale(factor):
    prior = dists.Gaussian(1.94, 0.31)
    ref = dists.grid_posterior(prior, lambda z, t: norm.pdf(z, t, 0.1), 2.2)
    post = dists.grid_posterior(prior,
                                lambda z, t: factor * norm.pdf(z, t, 0.1),
                                2.2)
    assert np.allclose(post.weights, ref.weights, rtol=1e-8, atol=1e-15)


@pytest.mark.parametrize('offset', [-1e4, 0., 1e4])
def test_grid_posterior_ignores_log_likelihood_offset(offset):
    prior = dists.Gaussian(1.94, 0.31)

    def loglike(z, t):
        return norm.logpdf(z, t, 0.1) + offset

    ref = dists.grid_posterior(prior, lambda z, t: norm.pdf(z, t, 0.1), 2.2)
    post = dists.grid_posterior(prior, z=2.2, log_likelihood=loglike)
    assert np.allclose(post.weights, ref.weights, rtol=1e-8, atol=1e-15)


def test_grid_posterior_batch_matches_single_observations():
    prior = dists.Gaussian(1.94, 0.31)

    def loglike(z, t):
        return norm.logpdf(z, t, 0.05 * t)

    zs = np.array([1.6, 1.94, 2.2, 2.7])
    batch = dists.grid_posterior(prior, z=zs, log_likelihood=loglike)
    assert batch.batched
    assert batch.weights.shape == (len(zs), dists.DEFAULT_GRID_POINTS)
    table = np.vstack([batch.points, batch.points**2])
    expect = batch.expect(table)
    assert expect.shape == (len(zs), 2)
    for i, z in enumerate(zs):
        single = dists.grid_posterior(prior, z=z, log_likelihood=loglike)
        assert not single.batched
        assert np.allclose(batch.weights[i], single.weights, rtol=1e-12)
        assert batch.mean()[i] == pytest.approx(single.mean(), rel=1e-12)
        assert batch.var()[i] == pytest.approx(single.var(), rel=1e-10)
        assert expect[i] == pytest.approx(single.expect(table), rel=1e-12)


def test_grid_posterior_reuses_given_points():
    prior = dists.DiscreteUniform(0, 100)
    points = dists.grid_points(prior)
    post = dists.grid_posterior(prior,
                                z=[10., 90.],
                                log_likelihood=lambda z, t: norm.logpdf(
                                    z, t, 10.),
                                points=points)
    assert np.array_equal(post.points, points)
    assert post.mean()[0] < 50 < post.mean()[1]


def test_grid_posterior_argument_errors():
    prior = dists.Gaussian(0, 1)

    def like(z, t):
        return norm.pdf(z, t, 1)

    with pytest.raises(DistributionError, match='exactly one'):
        dists.grid_posterior(prior, z=0.)
    with pytest.raises(DistributionError, match='exactly one'):
        dists.grid_posterior(prior, like, 0., log_likelihood=np.log)
    with pytest.raises(DistributionError, match='1d'):
        dists.grid_posterior(prior, like, np.zeros((2, 2)))
    with pytest.raises(PosteriorError, match='z='):
        dists.grid_posterior(prior,
                             z=[0., 1.],
                             log_likelihood=lambda z, t: np.where(
                                 z > 0.5, -np.inf, 0.) + 0 * t)
