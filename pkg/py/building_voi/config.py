"""
Conversion between the frozen configuration dataclasses of the case
studies and their JSON document form.

A config document maps problem names to sections whose keys mirror the
field names of the problem's config type; nested dataclasses become
nested sections and distributions are written as ``{"type": ...}``
mappings.
"""
import json
import logging
from dataclasses import fields, is_dataclass

import fsspec

from . import distributions as dists
from .errors import ConfigError, DistributionError

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())


def _deep_tuple(x):
    if isinstance(x, (list, tuple)):
        return tuple(_deep_tuple(y) for y in x)
    return x


def _deep_list(x):
    if isinstance(x, (list, tuple)):
        return [_deep_list(y) for y in x]
    return x


def _convert(default, value, path):
    if isinstance(default, dists.Distribution):
        try:
            return dists.from_dict(value)
        except (DistributionError, TypeError) as exc:
            raise ConfigError(f'{path}: {exc}') from exc
    if is_dataclass(default):
        if isinstance(value, type(default)):
            return value
        return from_dict(type(default), value, path)
    if isinstance(default, tuple):
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f'{path}: expected a list, got {value!r}')
        return _deep_tuple(value)
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f'{path}: expected true/false, got {value!r}')
        return value
    if isinstance(default, (int, float)):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f'{path}: expected a number, got {value!r}')
        if isinstance(default, int) and int(value) != value:
            raise ConfigError(f'{path}: expected an integer, got {value!r}')
        return type(default)(value)
    if isinstance(default, str) and not isinstance(value, str):
        raise ConfigError(f'{path}: expected a string, got {value!r}')
    return value


def from_dict(cls, data, path=''):
    """
    Build a config dataclass from a mapping, keeping defaults for keys
    that are not given

    Parameters
    ----------
    cls: type
        Frozen dataclass whose fields all have defaults
    data: mapping
    path: str
        Dotted location of ``data`` in the document, for error messages

    Returns
    -------
    cfg: cls instance
    """
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f'{path or cls.__name__}: expected a section, '
                          f'got {data!r}')
    known = {f.name: f for f in fields(cls)}
    prefix = f'{path}.' if path else ''
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigError('unknown config key(s): ' +
                          ', '.join(prefix + k for k in unknown))
    defaults = cls()
    kw = {
        k: _convert(getattr(defaults, k), v, prefix + k)
        for k, v in data.items()
    }
    try:
        return cls(**kw)
    except ConfigError as exc:
        raise ConfigError(f'{path or cls.__name__}: {exc}') from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f'{path or cls.__name__}: {exc}') from exc


def to_dict(cfg):
    """Document form of a config dataclass with every default materialized"""
    out = {}
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if isinstance(value, dists.Distribution):
            value = value.to_dict()
        elif is_dataclass(value):
            value = to_dict(value)
        else:
            value = _deep_list(value)
        out[f.name] = value
    return out


def load_document(path):
    """
    Read a JSON config document

    Returns
    -------
    doc: dict
        Problem name -> config section
    """
    try:
        with fsspec.open(str(path), 'r') as fp:
            doc = json.load(fp)
    except FileNotFoundError as exc:
        raise ConfigError(f'config file {path} not found') from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f'config file {path} is not valid JSON: {exc}') \
            from exc
    if not isinstance(doc, dict):
        raise ConfigError(f'config file {path} must hold a JSON object')
    logger.debug('loaded config sections %s from %s', sorted(doc), path)
    return doc
