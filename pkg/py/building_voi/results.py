"""
Result records produced by the estimators, with their JSON documents and
astropy tables for the CSV sidecars.
"""
import json
import logging
from dataclasses import dataclass, field, replace

import astropy.table as atpy
import fsspec
import numpy as np

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

EVPI = 'EVPI'
EVII = 'EVII'


def _num(x):
    if x is None or not np.isfinite(x):
        return None
    return float(x)


@dataclass(frozen=True)
class ActionStatistic:
    action: int
    label: str
    payload: float
    mean: float
    standard_error: float

    def to_dict(self):
        return dict(action=int(self.action),
                    label=self.label,
                    payload=_num(self.payload),
                    mean=_num(self.mean),
                    standard_error=_num(self.standard_error))


@dataclass(frozen=True)
class PriorSolution:
    """Solution of the prior decision problem"""
    problem: str
    best_action: int
    best_label: str
    expected_utility: float
    standard_error: float
    per_action: tuple
    n_samples: int
    exact: bool
    redraws: int = 0
    currency: str = 'GBP'
    time_basis: str = 'per-year'

    @property
    def expected_cost(self):
        return -self.expected_utility

    def to_dict(self):
        return dict(problem=self.problem,
                    best_action=int(self.best_action),
                    best_label=self.best_label,
                    expected_utility=_num(self.expected_utility),
                    standard_error=_num(self.standard_error),
                    per_action=[a.to_dict() for a in self.per_action],
                    n_samples=int(self.n_samples),
                    exact=bool(self.exact),
                    redraws=int(self.redraws),
                    currency=self.currency,
                    time_basis=self.time_basis)

    def to_table(self):
        unit = self.currency
        tab = atpy.Table()
        tab['action'] = [a.action for a in self.per_action]
        tab['label'] = [a.label for a in self.per_action]
        tab['payload'] = [a.payload for a in self.per_action]
        tab[f'mean_utility [{unit}]'] = [a.mean for a in self.per_action]
        tab[f'standard_error [{unit}]'] = [
            a.standard_error for a in self.per_action
        ]
        return tab


@dataclass(frozen=True)
class VoiReport:
    """
    Expected value of perfect (EVPI) or imperfect (EVII) information.

    posterior_action_frequency maps action labels, in action order, to the
    fraction of outcomes in which that action is optimal once informed.
    """
    kind: str
    problem: str
    value: float
    standard_error: float
    prior: PriorSolution
    posterior_action_frequency: dict
    informed_expected_utility: float
    informed_standard_error: float
    n_samples: int
    exact: bool
    measurement_label: str = None
    measurement_cost: float = None
    net_benefit: float = None

    @property
    def relative_value(self):
        """Value as a fraction of the prior expected cost"""
        base = abs(self.prior.expected_utility)
        return self.value / base if base > 0 else np.nan

    @property
    def prior_action_retained(self):
        """Fraction of outcomes in which the prior action stays optimal"""
        return self.posterior_action_frequency[self.prior.best_label]

    def with_cost(self, label, cost):
        return replace(self,
                       measurement_label=label,
                       measurement_cost=float(cost),
                       net_benefit=self.value - float(cost))

    def to_dict(self):
        return dict(
            kind=self.kind,
            problem=self.problem,
            value=_num(self.value),
            standard_error=_num(self.standard_error),
            relative_value=_num(self.relative_value),
            informed_expected_utility=_num(self.informed_expected_utility),
            informed_standard_error=_num(self.informed_standard_error),
            posterior_action_frequency={
                k: _num(v)
                for k, v in self.posterior_action_frequency.items()
            },
            measurement_label=self.measurement_label,
            measurement_cost=_num(self.measurement_cost),
            net_benefit=_num(self.net_benefit),
            net_benefit_standard_error=(None if self.net_benefit is None
                                        else _num(self.standard_error)),
            n_samples=int(self.n_samples),
            exact=bool(self.exact),
            prior=self.prior.to_dict())

    def frequency_table(self):
        tab = atpy.Table()
        tab['label'] = list(self.posterior_action_frequency.keys())
        tab['fraction'] = list(self.posterior_action_frequency.values())
        tab['prior_action'] = [
            k == self.prior.best_label for k in self.posterior_action_frequency
        ]
        return tab


@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    """
    Histogram of achieved utilities. ``action`` is None for the
    perfect-information (pre-posterior) policy.
    """
    problem: str
    action: int
    label: str
    edges: np.ndarray
    counts: np.ndarray
    mean: float
    standard_error: float
    exact: bool
    currency: str = 'GBP'

    @property
    def occupied_bins(self):
        return int(np.count_nonzero(self.counts))

    def to_dict(self):
        return dict(problem=self.problem,
                    action=None if self.action is None else int(self.action),
                    label=self.label,
                    mean=_num(self.mean),
                    standard_error=_num(self.standard_error),
                    minimum=_num(self.edges[0]),
                    maximum=_num(self.edges[-1]),
                    bins=len(self.counts),
                    exact=bool(self.exact))

    def to_table(self):
        unit = self.currency
        tab = atpy.Table()
        tab[f'bin_lower [{unit}]'] = self.edges[:-1]
        tab[f'bin_upper [{unit}]'] = self.edges[1:]
        tab['weight [probability]' if self.exact else 'count [samples]'] = \
            self.counts
        return tab


@dataclass(frozen=True)
class SweepRow:
    value: float
    seed: int
    best_action: int = None
    best_label: str = None
    expected_utility: float = None
    standard_error: float = None
    evpi: float = None
    evpi_standard_error: float = None
    failed: bool = False
    error: str = None

    def to_dict(self):
        return dict(value=_num(self.value),
                    seed=int(self.seed),
                    best_action=self.best_action,
                    best_label=self.best_label,
                    expected_utility=_num(self.expected_utility),
                    standard_error=_num(self.standard_error),
                    evpi=_num(self.evpi),
                    evpi_standard_error=_num(self.evpi_standard_error),
                    failed=self.failed,
                    error=self.error)


@dataclass(frozen=True)
class SweepResult:
    problem: str
    parameter: str
    unit: str
    analysis: str
    rows: tuple = field(default_factory=tuple)
    currency: str = 'GBP'

    def to_dict(self):
        return dict(problem=self.problem,
                    parameter=self.parameter,
                    unit=self.unit,
                    analysis=self.analysis,
                    rows=[r.to_dict() for r in self.rows])

    def to_table(self):
        unit = self.currency

        def col(name):
            return [np.nan if getattr(r, name) is None else getattr(r, name)
                    for r in self.rows]

        tab = atpy.Table()
        tab[f'{self.parameter} [{self.unit}]'] = col('value')
        tab['best_label'] = ['' if r.best_label is None else r.best_label
                             for r in self.rows]
        tab[f'expected_utility [{unit}]'] = col('expected_utility')
        tab[f'standard_error [{unit}]'] = col('standard_error')
        tab[f'evpi [{unit}]'] = col('evpi')
        tab[f'evpi_standard_error [{unit}]'] = col('evpi_standard_error')
        tab['seed'] = [r.seed for r in self.rows]
        tab['status'] = ['failed' if r.failed else 'ok' for r in self.rows]
        return tab


def net_benefit_table(reports, currency='GBP'):
    """Table of EVII, measurement cost and net benefit per measurement"""
    tab = atpy.Table()
    tab['measurement'] = [r.measurement_label for r in reports]
    tab[f'evii [{currency}]'] = [r.value for r in reports]
    tab[f'evii_standard_error [{currency}]'] = [
        r.standard_error for r in reports
    ]
    tab[f'cost [{currency}]'] = [r.measurement_cost for r in reports]
    tab[f'net_benefit [{currency}]'] = [r.net_benefit for r in reports]
    return tab


def dumps(doc):
    """Deterministic JSON text for a report document"""
    return json.dumps(doc, indent=2, sort_keys=True) + '\n'


def write_json(doc, path):
    with fsspec.open(str(path), 'w') as fp:
        fp.write(dumps(doc))


def write_table(tab, path):
    with fsspec.open(str(path), 'w') as fp:
        tab.write(fp, format='ascii.csv')
