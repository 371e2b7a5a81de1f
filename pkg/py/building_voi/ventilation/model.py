"""
Daily ventilation-rate choice for an office under uncertain occupancy.

The daily cost of a ventilation setting is the fan electricity plus the
salary lost to airborne infections, with the infection risk from the
Wells-Riley model.
"""
import logging
from dataclasses import dataclass, replace

import numpy as np

from ..distributions import DiscreteUniform, Distribution
from ..errors import ConfigError, ProblemError
from ..problem import (MEASURED, ActionSpace, DecisionProblem,
                       MeasurementModel, Parameter, ParameterSchema)

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

FLOOR_AREA_PER_PERSON = (5., 10., 15., 20., 25.)  # m2/person
INFECTION_RATES = (0.5, 1., 2., 3., 4., 5.)  # percent


@dataclass(frozen=True)
class InfectionModelConfig:
    """
    quanta_rate: quanta emitted per infector per hour
    breathing_rate: m3/h per occupant
    """
    quanta_rate: float = 10.
    breathing_rate: float = 0.54

    def __post_init__(self):
        if not self.quanta_rate >= 0 or not self.breathing_rate >= 0:
            raise ConfigError('infection model rates must be non-negative')


@dataclass(frozen=True)
class OfficeConfig:
    """
    Office geometry, fan, occupancy and illness parameters.

    ach_options are the selectable air changes per hour, ascending. Fan
    power is flow times specific fan power over efficiency; fan_hours and
    exposure_hours are per day, price in p/kWh, prevalence a fraction.
    """
    max_occupancy: int = 100
    floor_area: float = 1000.  # m2
    ceiling_height: float = 2.4  # m
    ach_options: tuple = (1., 3., 6., 12., 20.)
    fan_specific_power: float = 1.9  # W/(l/s)
    fan_efficiency: float = 0.6
    fan_hours: float = 10.
    exposure_hours: float = 8.
    price: float = 32.6
    prevalence: float = 0.0218
    sick_days: float = 3.
    daily_salary: float = 128.
    occupancy_prior: Distribution = DiscreteUniform(0, 100)
    infection_model: InfectionModelConfig = InfectionModelConfig()
    occupancy_sensor_sigma: float = 10.
    occupancy_sensor_cost: float = 0.

    def __post_init__(self):
        for name in ('floor_area', 'ceiling_height', 'fan_specific_power',
                     'fan_efficiency'):
            if not getattr(self, name) > 0:
                raise ConfigError(f'{name} must be positive')
        for name in ('fan_hours', 'exposure_hours', 'price', 'sick_days',
                     'daily_salary', 'occupancy_sensor_sigma',
                     'occupancy_sensor_cost'):
            if not getattr(self, name) >= 0:
                raise ConfigError(f'{name} must be non-negative')
        if self.max_occupancy < 0:
            raise ConfigError('max_occupancy must be non-negative')
        if self.occupancy_prior.support()[1] > self.max_occupancy:
            raise ConfigError('occupancy prior extends beyond max_occupancy')
        if not 0 <= self.prevalence <= 1:
            raise ConfigError('prevalence must lie in [0, 1]')
        ach = np.asarray(self.ach_options, dtype=float)
        if len(ach) == 0 or np.any(ach <= 0) or np.any(np.diff(ach) <= 0):
            raise ConfigError(
                'ach_options must be positive and strictly ascending')

    @property
    def volume(self):
        """Room volume, m3"""
        return self.floor_area * self.ceiling_height


def ventilation_cost(ach, cfg=None):
    """
    Daily fan electricity cost, GBP

    Parameters
    ----------
    ach: float
        Air changes per hour
    cfg: OfficeConfig
    """
    cfg = cfg or OfficeConfig()
    flow = ach * cfg.volume * 1000 / 3600.  # l/s
    power = flow * cfg.fan_specific_power / cfg.fan_efficiency  # W
    energy = power * cfg.fan_hours / 1000.  # kWh
    return energy * cfg.price / 100.


def infection_probability(occupants, ach, cfg=None):
    """
    Wells-Riley probability that a susceptible occupant is infected during
    one day of exposure

    Parameters
    ----------
    occupants: float or ndarray
        Number of people present
    ach: float
        Air changes per hour
    cfg: OfficeConfig

    Returns
    -------
    p: float or ndarray
    """
    cfg = cfg or OfficeConfig()
    if not ach > 0:
        raise ProblemError(f'air change rate must be positive, got {ach!r}')
    occupants = np.asarray(occupants, dtype=float)
    if np.any(occupants < 0):
        raise ProblemError('occupancy must be non-negative')
    if np.any(occupants > cfg.max_occupancy):
        raise ProblemError(
            f'occupancy above the office capacity {cfg.max_occupancy}')
    model = cfg.infection_model
    infectors = occupants * cfg.prevalence
    supply = ach * cfg.volume  # m3/h
    dose = (infectors * model.quanta_rate * model.breathing_rate *
            cfg.exposure_hours / supply)
    return -np.expm1(-dose)


def ventilation_total_cost(ach, occupants, cfg=None):
    """Daily fan cost plus expected salary lost to sick days, GBP"""
    cfg = cfg or OfficeConfig()
    occupants = np.asarray(occupants, dtype=float)
    illness = (occupants * infection_probability(occupants, ach, cfg) *
               cfg.sick_days * cfg.daily_salary)
    return ventilation_cost(ach, cfg) + illness


def occupancy_measurements(cfg=None):
    """Noisy occupancy count from desk booking data"""
    cfg = cfg or OfficeConfig()
    return [
        MeasurementModel('occupancy',
                         'desk-booking',
                         cost=cfg.occupancy_sensor_cost,
                         absolute_noise=cfg.occupancy_sensor_sigma,
                         description='booked desks as a proxy for '
                         'the number of occupants')
    ]


def build_ventilation_problem(cfg=None):
    """
    Returns
    -------
    problem: DecisionProblem
        One action per air change rate; occupancy is the measured
        parameter and utility is minus the daily total cost
    """
    cfg = cfg or OfficeConfig()
    rates = tuple(float(a) for a in cfg.ach_options)
    schema = ParameterSchema(
        (Parameter('occupancy', cfg.occupancy_prior, MEASURED, 'persons'), ))

    def utility(action, values):
        return -ventilation_total_cost(rates[action], values['occupancy'],
                                       cfg)

    def admissible(values):
        return values['occupancy'] >= 0

    return DecisionProblem(name='ventilation',
                           actions=ActionSpace.from_payloads(rates,
                                                             unit='ACH'),
                           schema=schema,
                           utility=utility,
                           time_basis='per-day',
                           admissible=admissible,
                           description='office ventilation rate under '
                           'uncertain occupancy')


def floor_area_family(cfg=None):
    """Problem factory over floor area per person, m2/person"""
    cfg = cfg or OfficeConfig()

    def factory(per_person):
        if not per_person > 0:
            raise ConfigError('floor area per person must be positive')
        area = float(per_person) * max(cfg.max_occupancy, 1)
        return build_ventilation_problem(replace(cfg, floor_area=area))

    return factory


def infection_rate_family(cfg=None):
    """Problem factory over the infection prevalence, in percent"""
    cfg = cfg or OfficeConfig()

    def factory(percent):
        return build_ventilation_problem(
            replace(cfg, prevalence=float(percent) / 100.))

    return factory
