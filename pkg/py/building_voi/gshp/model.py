"""
Borehole length selection for a ground-source heat pump under uncertain
ground thermal conductivity, and the ground tests that can measure it.
"""
import logging
from dataclasses import dataclass, replace

import numpy as np

from ..distributions import Degenerate, Distribution, Gaussian
from ..engine import solve_prior
from ..errors import ConfigError
from ..problem import (MEASURED, ActionSpace, DecisionProblem,
                       MeasurementModel, Parameter, ParameterSchema)
from .ground import GroundModelConfig, response_kernel, simulate_gshp
from .load import LONDON_MONTHLY_TEMPERATURE, synth_load_profile

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

# label, relative uncertainty nu (two standard deviations), cost in GBP
GROUND_TESTS = (
    ('probe-in-situ', 0.25, 187.),
    ('probe-lab', 0.17, 1800.),
    ('trt', 0.10, 5000.),
    ('extended-trt', 0.05, 10000.),
)

# published design figures for this case study, reported next to the model's
REFERENCE_DESIGN = dict(length=155.,
                        expected_cost=819100.,
                        best_measurement='trt')


@dataclass(frozen=True)
class GshpConfig:
    """
    lengths: candidate borehole lengths, m, ascending
    n_boreholes: identical boreholes sharing the load evenly
    drilling_cost: GBP per m per borehole
    conductivity_prior: W/(m K)
    lifetime: years of operation
    price: electricity price, p/kWh
    fluid_bounds: allowed fluid temperature range, degC
    cop_intercept, cop_slope: COP = intercept + slope * T_fluid
    aux_cop: COP of the auxiliary heater
    annual_load: MWh/yr
    peak_load: kW
    climatology: monthly mean outdoor temperature, degC
    base_temperature: heating base temperature, degC
    ground_tests: (label, nu, cost) per available ground test
    """
    lengths: tuple = tuple(float(x) for x in range(110, 195, 5))
    n_boreholes: int = 12
    drilling_cost: float = 70.
    conductivity_prior: Distribution = Gaussian(1.94, 0.31)
    lifetime: int = 50
    price: float = 32.6
    fluid_bounds: tuple = (5., 35.)
    cop_intercept: float = 4.0279
    cop_slope: float = 0.1319
    aux_cop: float = 1.
    annual_load: float = 116.
    peak_load: float = 30.5
    climatology: tuple = LONDON_MONTHLY_TEMPERATURE
    base_temperature: float = 15.5
    ground_model: GroundModelConfig = GroundModelConfig()
    ground_tests: tuple = GROUND_TESTS

    def __post_init__(self):
        lengths = np.asarray(self.lengths, dtype=float)
        if len(lengths) == 0 or np.any(lengths <= 0) or np.any(
                np.diff(lengths) <= 0):
            raise ConfigError('lengths must be positive and ascending')
        if self.n_boreholes < 1 or self.lifetime < 1:
            raise ConfigError('n_boreholes and lifetime must be at least 1')
        if not self.conductivity_prior.std() > 0 and not isinstance(
                self.conductivity_prior, Degenerate):
            raise ConfigError('conductivity prior needs a positive spread')
        if len(self.fluid_bounds) != 2 or not (self.fluid_bounds[0] <
                                               self.fluid_bounds[1]):
            raise ConfigError('fluid_bounds must be (lower, upper), ordered')
        for name in ('drilling_cost', 'price', 'annual_load', 'peak_load'):
            if getattr(self, name) < 0:
                raise ConfigError(f'{name} must be non-negative')
        if not self.aux_cop > 0:
            raise ConfigError('aux_cop must be positive')
        for test in self.ground_tests:
            if len(test) != 3 or test[1] < 0 or test[2] < 0:
                raise ConfigError(f'bad ground test entry {test!r}; expected '
                                  '(label, nu >= 0, cost >= 0)')


def capital_cost(length, cfg=None):
    """Drilling cost of the whole field, GBP"""
    cfg = cfg or GshpConfig()
    return cfg.drilling_cost * length * cfg.n_boreholes


def gshp_lifetime_cost(length,
                       conductivity,
                       cfg=None,
                       load=None,
                       kernel=None):
    """
    Drilling cost plus lifetime electricity cost, GBP

    Parameters
    ----------
    length: float
        Borehole length, m
    conductivity: float or ndarray
        Ground thermal conductivity, W/(m K)
    cfg: GshpConfig
    load: LoadProfile, optional
        Defaults to synth_load_profile(cfg)
    kernel: GroundKernel, optional

    Returns
    -------
    cost: ndarray
        One cost per conductivity value
    """
    cfg = cfg or GshpConfig()
    if load is None:
        load = synth_load_profile(cfg)
    sim = simulate_gshp(length, conductivity, load, cfg, kernel=kernel)
    return capital_cost(length, cfg) + sim.electricity * cfg.price / 100.


def ground_test_measurements(cfg=None):
    """
    Ground tests as measurements of the conductivity with standard
    deviation (nu/2) * lambda
    """
    cfg = cfg or GshpConfig()
    return [
        MeasurementModel('conductivity',
                         label,
                         cost=float(cost),
                         relative_noise=float(nu) / 2,
                         description=f'ground test with nu={nu:g}')
        for label, nu, cost in cfg.ground_tests
    ]


def build_gshp_problem(cfg=None):
    """
    Returns
    -------
    problem: DecisionProblem
        One action per borehole length; the conductivity is the measured
        parameter and utility is minus the lifetime cost
    """
    cfg = cfg or GshpConfig()
    lengths = tuple(float(x) for x in cfg.lengths)
    # shared read-only inputs, built before any threads start
    load = synth_load_profile(cfg)
    kernel = response_kernel(cfg.ground_model, len(load))
    schema = ParameterSchema((Parameter('conductivity',
                                        cfg.conductivity_prior, MEASURED,
                                        'W/mK'), ))

    def utility(action, values):
        return -gshp_lifetime_cost(lengths[action], values['conductivity'],
                                   cfg, load, kernel)

    def admissible(values):
        return values['conductivity'] > 0

    return DecisionProblem(name='gshp',
                           actions=ActionSpace.from_payloads(lengths,
                                                             unit='m'),
                           schema=schema,
                           utility=utility,
                           time_basis='lifetime',
                           admissible=admissible,
                           description='ground-source heat pump borehole '
                           'sizing',
                           metadata=dict(annual_demand=load.annual_demand))


def deterministic_optimum(cfg=None, config=None):
    """
    Prior decision with the conductivity fixed at its prior mean

    Returns
    -------
    solution: PriorSolution
    """
    cfg = cfg or GshpConfig()
    fixed = replace(cfg,
                    conductivity_prior=Degenerate(
                        cfg.conductivity_prior.mean()))
    return solve_prior(build_gshp_problem(fixed), config)


def reference_comparison(prior=None, best_measurement=None):
    """
    The model's borehole design (and best ground test) side by side with
    REFERENCE_DESIGN. The simplified ground simulation does not land on
    the published optimum exactly.

    Parameters
    ----------
    prior: PriorSolution, optional
    best_measurement: str, optional
        Label of the ground test with the greatest net benefit

    Returns
    -------
    doc: dict
        ``reference`` and ``model`` blocks with matching keys
    """
    model = {}
    if prior is not None:
        model['length'] = float(prior.per_action[prior.best_action].payload)
        model['expected_cost'] = -prior.expected_utility
    if best_measurement is not None:
        model['best_measurement'] = best_measurement
    reference = {k: REFERENCE_DESIGN[k] for k in model}
    if 'length' in model:
        model['length_difference'] = model['length'] - reference['length']
        model['relative_cost_difference'] = (
            model['expected_cost'] / reference['expected_cost'] - 1)
    return dict(reference=reference, model=model)
