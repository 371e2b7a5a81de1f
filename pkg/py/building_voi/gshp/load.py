"""
Synthetic heating load of the building served by the ground-source heat
pump: monthly degree-hour weighting of a fixed London climatology.
"""
import logging
from dataclasses import dataclass

import numpy as np
from pylru import lrudecorator

from ..errors import ConfigError

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

HOURS_PER_YEAR = 8760.
STEPS_PER_YEAR = 12

# monthly mean outdoor air temperature, degC, January first
LONDON_MONTHLY_TEMPERATURE = (5.2, 5.3, 7.6, 9.9, 13.3, 16.5, 18.7, 18.5,
                              15.7, 12.0, 8.0, 5.5)


def _frozen(x):
    x = np.array(x, dtype=float)
    x.setflags(write=False)
    return x


@dataclass(frozen=True, eq=False)
class LoadProfile:
    """
    Heating demand per timestep over the whole horizon.

    demand: kWh delivered to the building in each step
    peak_power: design-peak power within each step, kW
    step_hours: length of a step, hours
    """
    demand: np.ndarray
    peak_power: np.ndarray
    step_hours: float = HOURS_PER_YEAR / STEPS_PER_YEAR

    def __post_init__(self):
        object.__setattr__(self, 'demand', _frozen(self.demand))
        object.__setattr__(self, 'peak_power', _frozen(self.peak_power))
        if self.demand.shape != self.peak_power.shape or self.demand.ndim != 1:
            raise ConfigError('demand and peak_power must be equally long 1d '
                              'arrays')
        if np.any(self.demand < 0) or np.any(self.peak_power < 0):
            raise ConfigError('load profile must be non-negative')
        if not self.step_hours > 0:
            raise ConfigError('step_hours must be positive')

    def __len__(self):
        return len(self.demand)

    @property
    def mean_power(self):
        """Demand averaged over each step, kW"""
        return self.demand / self.step_hours

    @property
    def annual_demand(self):
        """Demand of the first year, kWh"""
        return float(self.demand[:STEPS_PER_YEAR].sum())

    @property
    def max_power(self):
        return float(self.peak_power.max()) if len(self) else 0.

    @classmethod
    def zero(cls, n_steps, step_hours=HOURS_PER_YEAR / STEPS_PER_YEAR):
        return cls(np.zeros(n_steps), np.zeros(n_steps), step_hours)


@lrudecorator(16)
def _monthly_profile(climatology, base_temperature, annual_load, peak_load,
                     lifetime):
    temps = np.asarray(climatology, dtype=float)
    if len(temps) != STEPS_PER_YEAR:
        raise ConfigError('climatology needs one temperature per month')
    weight = np.maximum(0, base_temperature - temps)
    if weight.sum() <= 0:
        raise ConfigError('climatology is never below the base temperature')
    step_hours = HOURS_PER_YEAR / STEPS_PER_YEAR
    demand = weight / weight.sum() * annual_load * 1000.  # kWh
    mean_power = demand / step_hours
    peak = mean_power * peak_load / mean_power.max()
    logger.debug('synthesised load: %.0f kWh/yr, mean %.2f kW, peak %.1f kW',
                 demand.sum(), demand.sum() / HOURS_PER_YEAR, peak.max())
    return LoadProfile(np.tile(demand, lifetime), np.tile(peak, lifetime),
                       step_hours)


def synth_load_profile(cfg):
    """
    Monthly heating demand proportional to the heating degree-hours below
    ``cfg.base_temperature``, normalized to ``cfg.annual_load`` MWh/yr and
    repeated for ``cfg.lifetime`` years. Each month's peak power scales its
    mean power so that the coldest month peaks at ``cfg.peak_load`` kW.

    Parameters
    ----------
    cfg: GshpConfig

    Returns
    -------
    load: LoadProfile
        Shared read-only instance for equal configurations
    """
    return _monthly_profile(tuple(cfg.climatology), float(cfg.base_temperature),
                            float(cfg.annual_load), float(cfg.peak_load),
                            int(cfg.lifetime))
