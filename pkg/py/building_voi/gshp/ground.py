"""
Borehole field operation: infinite line source response with temporal
superposition of the extraction history and greedy per-step dispatch of
the heat pump against the fluid temperature limits.
"""
import logging
from dataclasses import dataclass

import numpy as np
from pylru import lrudecorator
from scipy.special import exp1

from ..errors import ConfigError, ProblemError, SimulationError

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

TIMESTEPS = {'monthly': 8760. / 12}
BISECTION_TOLERANCE = 0.01  # degC
MAX_BISECTION = 100
SECONDS_PER_HOUR = 3600.


@dataclass(frozen=True)
class GroundModelConfig:
    """
    undisturbed_temp: far-field ground temperature, degC
    thermal_diffusivity: m2/s
    borehole_radius: m
    borehole_resistance: fluid to borehole wall, m K/W
    timestep: superposition step
    """
    undisturbed_temp: float = 12.
    thermal_diffusivity: float = 1e-6
    borehole_radius: float = 0.075
    borehole_resistance: float = 0.1
    timestep: str = 'monthly'

    def __post_init__(self):
        for name in ('undisturbed_temp', 'thermal_diffusivity',
                     'borehole_radius', 'borehole_resistance'):
            if not getattr(self, name) > 0:
                raise ConfigError(f'ground_model.{name} must be positive')
        if self.timestep not in TIMESTEPS:
            raise ConfigError(f'unsupported timestep {self.timestep!r}; '
                              'known: ' + ', '.join(TIMESTEPS))

    @property
    def step_hours(self):
        return TIMESTEPS[self.timestep]


@dataclass(frozen=True, eq=False)
class GroundKernel:
    """
    Line source step responses without the 1/(4 pi lambda) factor.

    steps[m] is the response m steps after a unit step change in
    extraction (steps[0] is unused); hour is the response after one hour.
    """
    steps: np.ndarray
    hour: float
    step_hours: float


@lrudecorator(32)
def _kernel(radius, diffusivity, step_hours, n_steps):
    lag = np.arange(1, n_steps + 1) * step_hours * SECONDS_PER_HOUR
    steps = np.zeros(n_steps + 1)
    steps[1:] = exp1(radius**2 / (4 * diffusivity * lag))
    steps.setflags(write=False)
    hour = float(exp1(radius**2 / (4 * diffusivity * SECONDS_PER_HOUR)))
    return GroundKernel(steps, hour, step_hours)


def response_kernel(ground, n_steps):
    """
    Parameters
    ----------
    ground: GroundModelConfig
    n_steps: int
        Horizon length in steps

    Returns
    -------
    kernel: GroundKernel
        Cached and read-only, so it can be shared between threads
    """
    return _kernel(float(ground.borehole_radius),
                   float(ground.thermal_diffusivity), float(ground.step_hours),
                   int(n_steps))


def heat_pump_cop(fluid_temp, cfg):
    """Coefficient of performance as a linear function of fluid temperature"""
    return cfg.cop_intercept + cfg.cop_slope * fluid_temp


@dataclass(frozen=True, eq=False)
class GshpSimulation:
    """
    Outcome of a borehole field simulation, one entry per conductivity.

    electricity: total electricity of heat pump and auxiliary heater, kWh
    min_fluid_temp: lowest peak-hour fluid temperature, degC
    aux_fraction: share of the demand met by the auxiliary heater
    series: per-step arrays (demand, gshp_heat, aux_heat, fluid_temp, cop),
        each of shape (n_steps, n_conductivity), when requested
    """
    electricity: np.ndarray
    min_fluid_temp: np.ndarray
    aux_fraction: np.ndarray
    series: dict = None


def simulate_gshp(length,
                  conductivity,
                  load,
                  cfg,
                  kernel=None,
                  keep_series=False):
    """
    Operate the heat pump for the whole load profile.

    Each step the wall temperature follows from the superposed extraction
    history. The pump extracts the most ground heat the demand allows such
    that the peak-hour fluid temperature stays above the lower bound; the
    shortfall goes to the auxiliary heater.

    Parameters
    ----------
    length: float
        Length of each borehole, m
    conductivity: float or ndarray
        Ground thermal conductivity, W/(m K)
    load: LoadProfile
    cfg: GshpConfig
    kernel: GroundKernel, optional
        Precomputed response_kernel for this load length
    keep_series: bool
        Return the per-step series as well

    Returns
    -------
    result: GshpSimulation
    """
    lam = np.atleast_1d(np.asarray(conductivity, dtype=float))
    if lam.ndim != 1:
        raise ProblemError('conductivity must be a scalar or a 1d array')
    if np.any(~(lam > 0)):
        raise ProblemError('ground conductivity must be positive')
    if not length > 0:
        raise ProblemError(f'borehole length must be positive, got {length}')
    ground = cfg.ground_model
    n_steps = len(load)
    if kernel is None:
        kernel = response_kernel(ground, n_steps)
    if len(kernel.steps) < n_steps + 1:
        raise ProblemError('response kernel shorter than the load profile')
    g = kernel.steps
    hours = load.step_hours
    t_low, t_high = cfg.fluid_bounds
    total_length = length * cfg.n_boreholes
    scale = 1 / (4 * np.pi * lam)
    resist = ground.borehole_resistance
    slope = g[1] * scale + resist  # degC per W/m, step mean
    slope_hour = kernel.hour * scale + resist  # extra peak-hour drop

    n_lam = len(lam)
    dq = np.zeros((n_steps, n_lam))
    q_prev = np.zeros(n_lam)
    electricity = np.zeros(n_lam)
    aux_total = np.zeros(n_lam)
    min_temp = np.full(n_lam, np.inf)
    if keep_series:
        series = {
            k: np.zeros((n_steps, n_lam))
            for k in ('demand', 'gshp_heat', 'aux_heat', 'fluid_temp', 'cop')
        }

    for n in range(n_steps):
        history = g[n + 1:1:-1] @ dq[:n] if n else 0.
        base = ground.undisturbed_temp - scale * (history - q_prev * g[1])
        demand = float(load.demand[n])
        if demand <= 0:
            q = np.zeros(n_lam)
            fluid = base
            peak_fluid = base
            cop = heat_pump_cop(fluid, cfg)
            gshp_heat = np.zeros(n_lam)
        else:
            ratio = load.peak_power[n] * hours / demand
            slope_peak = slope + max(ratio - 1, 0) * slope_hour
            q_full = demand * 1000 / (total_length * hours)  # W/m
            q_cap = np.clip((base - t_low) / slope_peak, 0, q_full)
            q_min = np.clip((base - t_high) / slope, 0, q_cap)

            def excess(qv):
                cop_v = heat_pump_cop(base - qv * slope, cfg)
                return qv - q_full * (1 - 1 / cop_v)

            lo, hi = q_min.copy(), q_cap.copy()
            for _ in range(MAX_BISECTION):
                if np.all((hi - lo) * slope <= BISECTION_TOLERANCE):
                    break
                mid = 0.5 * (lo + hi)
                above = excess(mid) >= 0
                hi = np.where(above, mid, hi)
                lo = np.where(above, lo, mid)
            else:
                raise SimulationError(
                    f'fluid temperature bisection did not converge at '
                    f'timestep {n}')
            unconstrained = excess(q_cap) >= 0
            q = np.where(unconstrained, 0.5 * (lo + hi), q_cap)
            fluid = base - q * slope
            peak_fluid = fluid - q * max(ratio - 1, 0) * slope_hour
            cop = heat_pump_cop(fluid, cfg)
            ground_heat = q * total_length * hours / 1000.  # kWh
            with np.errstate(divide='ignore', invalid='ignore'):
                limited = np.where(cop > 1, ground_heat / (1 - 1 / cop), 0.)
            gshp_heat = np.where(unconstrained, demand,
                                 np.minimum(limited, demand))
        aux_heat = demand - gshp_heat
        with np.errstate(divide='ignore', invalid='ignore'):
            pump = np.where(gshp_heat > 0, gshp_heat / cop, 0.)
        electricity += pump + aux_heat / cfg.aux_cop
        aux_total += aux_heat
        min_temp = np.minimum(min_temp, peak_fluid)
        if keep_series:
            series['demand'][n] = demand
            series['gshp_heat'][n] = gshp_heat
            series['aux_heat'][n] = aux_heat
            series['fluid_temp'][n] = fluid
            series['cop'][n] = cop
        dq[n] = q - q_prev
        q_prev = q

    total_demand = float(load.demand.sum())
    aux_fraction = (aux_total / total_demand if total_demand > 0 else
                    np.zeros(n_lam))
    if n_steps == 0:
        min_temp = np.full(n_lam, ground.undisturbed_temp)
    return GshpSimulation(electricity=electricity,
                          min_fluid_temp=min_temp,
                          aux_fraction=aux_fraction,
                          series=series if keep_series else None)
