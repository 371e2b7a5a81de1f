"""
Maintenance scheduling for a bank of air-source heat pumps.

The owner picks the number of evenly spaced maintenance activities per
year, N_m in 0..12, to minimize the annual operating cost (electricity
plus maintenance) under uncertain load, electricity price, base seasonal
performance factor, degradation and maintenance effectiveness.
"""
import logging
from dataclasses import dataclass

import numpy as np

from ..distributions import Distribution, Gaussian, TruncatedGaussian
from ..errors import ConfigError, ProblemError
from ..problem import (NUISANCE, ActionSpace, DecisionProblem, Parameter,
                       ParameterSchema)

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

PARAMETERS = ('load', 'price', 'spf_base', 'degradation', 'maint_noise')


@dataclass(frozen=True)
class AshpParams:
    """
    load_prior: annual heating load, GWh/yr
    price_prior: electricity price, p/kWh
    spf_base_prior: base seasonal performance factor
    degradation_prior: performance degradation factor alpha (note the
        truncation at zero moves its mean to about 0.20)
    maint_noise_prior: relative error epsilon of the maintenance uplift
    beta_a, beta_b, gamma: maintenance uplift curve
    maintenance_cost_per_activity: GBP for servicing every unit once
    meter_cost_per_year: annualized smart meter cost, GBP
    actions: admissible maintenance counts per year
    """
    load_prior: Distribution = Gaussian(12.6, 1.36)
    price_prior: Distribution = Gaussian(32.6, 1.6)
    spf_base_prior: Distribution = Gaussian(2.9, 0.167)
    degradation_prior: Distribution = TruncatedGaussian(0.01, 0.25, lower=0.)
    maint_noise_prior: Distribution = Gaussian(0., 0.1)
    beta_a: float = 0.05
    beta_b: float = 2.5
    gamma: float = 1.4
    maintenance_cost_per_activity: float = 18000.
    meter_cost_per_year: float = 70.
    actions: tuple = tuple(range(13))

    def __post_init__(self):
        if not self.beta_b > 0 or not self.gamma > 0:
            raise ConfigError('beta_b and gamma must be positive')
        if self.maintenance_cost_per_activity < 0 or \
           self.meter_cost_per_year < 0:
            raise ConfigError('costs must be non-negative')
        if len(self.actions) == 0 or any(
                int(n) != n or n < 0 for n in self.actions):
            raise ConfigError(
                'actions must be non-negative integer maintenance counts')


def maintenance_uplift(n_m, epsilon, params=None):
    """
    Fractional SPF improvement from N_m maintenance activities

    Parameters
    ----------
    n_m: int
        Maintenance activities per year
    epsilon: float or ndarray
        Relative error of the uplift
    params: AshpParams

    Returns
    -------
    beta: float or ndarray
    """
    params = params or AshpParams()
    if np.any(np.asarray(n_m) < 0):
        raise ProblemError('maintenance count must be non-negative')
    x = np.power(float(n_m), params.gamma)
    return params.beta_a * x / (params.beta_b + x) * (1 + np.asarray(epsilon))


def ashp_annual_cost(n_m, theta, params=None):
    """
    Annual operating cost, GBP/yr

    Parameters
    ----------
    n_m: int
        Maintenance activities per year
    theta: mapping
        load (GWh/yr), price (p/kWh), spf_base, degradation, maint_noise;
        scalars or equally long arrays
    params: AshpParams

    Returns
    -------
    cost: float or ndarray
        Electricity cost plus maintenance cost
    """
    params = params or AshpParams()
    beta = maintenance_uplift(n_m, theta['maint_noise'], params)
    spf = (np.asarray(theta['spf_base']) *
           (1 - np.asarray(theta['degradation'])) * (1 + beta))
    if np.any(spf <= 0):
        raise ProblemError('non-positive effective SPF; degradation must '
                           'stay below 1')
    energy = np.asarray(theta['load']) * 1e6 / spf  # kWh
    electricity = energy * np.asarray(theta['price']) / 100.
    return electricity + params.maintenance_cost_per_activity * n_m


def smart_meter(params=None):
    """Label and annual cost of the perfect-information meter"""
    params = params or AshpParams()
    return 'smart-meter', params.meter_cost_per_year


def build_ashp_problem(params=None):
    """
    Returns
    -------
    problem: DecisionProblem
        One action per maintenance count, five nuisance parameters and
        utility equal to minus the annual operating cost
    """
    params = params or AshpParams()
    counts = tuple(int(n) for n in params.actions)
    schema = ParameterSchema((
        Parameter('load', params.load_prior, NUISANCE, 'GWh/yr'),
        Parameter('price', params.price_prior, NUISANCE, 'p/kWh'),
        Parameter('spf_base', params.spf_base_prior, NUISANCE),
        Parameter('degradation', params.degradation_prior, NUISANCE),
        Parameter('maint_noise', params.maint_noise_prior, NUISANCE),
    ))

    def utility(action, values):
        return -ashp_annual_cost(counts[action], values, params)

    def admissible(values):
        return values['degradation'] < 1

    return DecisionProblem(
        name='ashp',
        actions=ActionSpace.from_payloads(counts, unit='activities/yr'),
        schema=schema,
        utility=utility,
        time_basis='per-year',
        admissible=admissible,
        description='air-source heat pump maintenance scheduling')
