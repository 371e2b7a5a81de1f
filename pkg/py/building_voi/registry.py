"""
Registry of the decision problems the command line can run.
"""
import logging
from dataclasses import dataclass, field

from . import config as conf
from .ashp import AshpParams, build_ashp_problem, smart_meter
from .errors import UnknownNameError
from .gshp import (GshpConfig, build_gshp_problem, ground_test_measurements,
                   reference_comparison)
from .ventilation import (FLOOR_AREA_PER_PERSON, INFECTION_RATES,
                          OfficeConfig, build_ventilation_problem,
                          floor_area_family, infection_rate_family,
                          occupancy_measurements)

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())


@dataclass(frozen=True)
class Sweep:
    """
    family: callable(cfg) -> (value -> DecisionProblem)
    """
    name: str
    parameter: str
    unit: str
    values: tuple
    family: object


@dataclass(frozen=True)
class ProblemEntry:
    """
    build: callable(cfg) -> DecisionProblem
    measurements: callable(cfg) -> list of MeasurementModel
    information_cost: callable(cfg) -> (label, cost), optional
        Cost of perfect information attached to EVPI reports
    reference: callable(prior=None, best_measurement=None) -> dict, optional
        Published figures next to the model's, attached to prior and EVII
        reports
    """
    name: str
    description: str
    config_type: type
    build: object
    measurements: object
    sweeps: tuple = field(default_factory=tuple)
    information_cost: object = None
    reference: object = None

    def default_config(self):
        return self.config_type()

    def load_config(self, section=None):
        return conf.from_dict(self.config_type, section or {}, self.name)

    def measurement(self, cfg, label):
        menu = self.measurements(cfg)
        for m in menu:
            if m.label == label:
                return m
        raise UnknownNameError(f'{self.name} measurement', label,
                               [m.label for m in menu])

    def sweep(self, name):
        for s in self.sweeps:
            if s.name == name:
                return s
        raise UnknownNameError(f'{self.name} sweep', name,
                               [s.name for s in self.sweeps])


def _no_measurements(cfg):
    return []


PROBLEMS = {
    'ashp':
    ProblemEntry('ashp',
                 'air-source heat pump maintenance scheduling',
                 AshpParams,
                 build_ashp_problem,
                 _no_measurements,
                 information_cost=smart_meter),
    'ventilation':
    ProblemEntry('ventilation',
                 'office ventilation rate under uncertain occupancy',
                 OfficeConfig,
                 build_ventilation_problem,
                 occupancy_measurements,
                 sweeps=(Sweep('floor-area', 'floor_area_per_person',
                               'm2/person', FLOOR_AREA_PER_PERSON,
                               floor_area_family),
                         Sweep('infection-rate', 'prevalence', 'percent',
                               INFECTION_RATES, infection_rate_family))),
    'gshp':
    ProblemEntry('gshp', 'ground-source heat pump borehole sizing',
                 GshpConfig, build_gshp_problem, ground_test_measurements,
                 reference=reference_comparison),
}


def get_entry(name):
    """
    Returns
    -------
    entry: ProblemEntry

    Raises
    ------
    UnknownNameError
        Listing the registered problem names
    """
    try:
        return PROBLEMS[name]
    except KeyError:
        raise UnknownNameError('problem', name, PROBLEMS) from None


def list_problems():
    """
    Alphabetized listing of the registered problems

    Returns
    -------
    listing: list of dict
        name, description, action count, parameters, measurement labels
        and sweep names per problem
    """
    out = []
    for name in sorted(PROBLEMS):
        entry = PROBLEMS[name]
        cfg = entry.default_config()
        problem = entry.build(cfg)
        out.append(
            dict(name=name,
                 description=entry.description,
                 n_actions=len(problem.actions),
                 time_basis=problem.time_basis,
                 parameters=[
                     dict(name=p.name, role=p.role, unit=p.unit)
                     for p in problem.schema
                 ],
                 measurements=[m.label for m in entry.measurements(cfg)],
                 sweeps=[f'{name}:{s.name}' for s in entry.sweeps]))
    return out
