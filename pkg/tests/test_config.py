import json

import pytest

from building_voi import config as conf
from building_voi.ashp import AshpParams
from building_voi.distributions import Gaussian
from building_voi.errors import ConfigError
from building_voi.gshp import GshpConfig
from building_voi.ventilation import OfficeConfig


@pytest.mark.parametrize('cls', [AshpParams, OfficeConfig, GshpConfig])
def test_defaults_survive_document_form(cls):
    doc = conf.to_dict(cls())
    json.dumps(doc)
    assert conf.from_dict(cls, doc) == cls()


@pytest.mark.parametrize('cls, key, value, attr', [
    (AshpParams, 'meter_cost_per_year', 90., 'meter_cost_per_year'),
    (OfficeConfig, 'infection_model', {
        'quanta_rate': 20.
    }, 'infection_model.quanta_rate'),
    (GshpConfig, 'ground_model', {
        'borehole_resistance': 0.12
    }, 'ground_model.borehole_resistance'),
])
def test_edited_field_takes_effect(cls, key, value, attr):
    doc = conf.to_dict(cls())
    if isinstance(value, dict):
        doc[key].update(value)
        expected = next(iter(value.values()))
    else:
        doc[key] = value
        expected = value
    cfg = conf.from_dict(cls, json.loads(json.dumps(doc)))
    obj = cfg
    for part in attr.split('.'):
        obj = getattr(obj, part)
    assert obj == expected


def test_distribution_override():
    cfg = conf.from_dict(GshpConfig, {
        'conductivity_prior': {
            'type': 'gaussian',
            'mu': 2.5,
            'sigma': 0.2
        },
        'lengths': [120, 140]
    })
    assert cfg.conductivity_prior == Gaussian(2.5, 0.2)
    assert cfg.lengths == (120, 140)
    hash(cfg)


def test_unknown_keys_name_the_path():
    with pytest.raises(ConfigError, match='gshp.ground_model.depth'):
        conf.from_dict(GshpConfig, {'ground_model': {'depth': 100}}, 'gshp')
    with pytest.raises(ConfigError, match='ventilation.ceiling'):
        conf.from_dict(OfficeConfig, {'ceiling': 3}, 'ventilation')


def test_bad_values():
    with pytest.raises(ConfigError):
        conf.from_dict(OfficeConfig, {'floor_area': 'big'})
    with pytest.raises(ConfigError):
        conf.from_dict(OfficeConfig, {'max_occupancy': 10.5})
    with pytest.raises(ConfigError):
        conf.from_dict(OfficeConfig, {'prevalence': 2.})
    with pytest.raises(ConfigError):
        conf.from_dict(GshpConfig,
                       {'conductivity_prior': {
                           'type': 'gaussian',
                           'mu': 1
                       }})


def test_load_document(tmp_path):
    path = tmp_path / 'cfg.json'
    path.write_text(json.dumps({'ventilation': {'floor_area': 1200.}}))
    assert conf.load_document(path) == {'ventilation': {'floor_area': 1200.}}
    path.write_text('{not json')
    with pytest.raises(ConfigError, match='not valid JSON'):
        conf.load_document(path)
    with pytest.raises(ConfigError, match='not found'):
        conf.load_document(tmp_path / 'missing.json')
