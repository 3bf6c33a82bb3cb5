""" Flat run configuration.

A run is configured by a single mapping of keys to values, values may carry units ("1 g", "1e10 cm**-2", "1 day").
Sources are merged with precedence command line flag > --set overrides > config file > preset > defaults, then every
parameter block is built and validated before any simulation starts.
"""
from __future__ import annotations

import math
import typing

import attr
import yaml

import collapselib
from collapselib import logging
from collapselib.data import unit
from collapselib.file import yaml as config_yaml
from collapselib.model import collapse_dynamics, criteria, measurement_chain, state_algebra
from collapselib.util import storage


__all__ = ['ConfigError', 'Preset', 'presets', 'RunConfig', 'DEFAULTS', 'load_file', 'resolve']


_logger = logging.get_logger(__name__)


class ConfigError(collapselib.CollapseLibError):
    pass


def _to_float(x: typing.Any, to_unit: typing.Optional[unit.T_PARSE_UNIT] = None) -> float:
    if isinstance(x, bool):
        raise ConfigError(f"Expected a number, got {x!r}")

    return unit.parse_magnitude(x, to_unit or unit.dimensionless)


def _quantity(to_unit: unit.T_PARSE_UNIT) -> typing.Callable[[typing.Any], float]:
    def f(x: typing.Any) -> float:
        return _to_float(x, to_unit)

    return f


def _number(x: typing.Any) -> float:
    return _to_float(x)


def _count(x: typing.Any) -> int:
    # Counts may be written in float notation, eg. 1e10
    if isinstance(x, int) and not isinstance(x, bool):
        return x

    value = _to_float(x)

    if not value.is_integer():
        raise ConfigError(f"Expected an integer, got {x!r}")

    return int(value)


def _seed(x: typing.Any) -> int:
    try:
        value = int(str(x).strip(), 0) if isinstance(x, str) else int(x)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"Invalid seed {x!r}") from exc

    if isinstance(x, bool) or not 0 <= value < 2 ** 64:
        raise ConfigError(f"Seed must be an unsigned 64-bit integer, got {x!r}")

    return value


def _flag(x: typing.Any) -> bool:
    if isinstance(x, bool):
        return x

    text = str(x).strip().lower()

    if text in ('1', 'true', 'yes', 'on'):
        return True

    if text in ('0', 'false', 'no', 'off'):
        return False

    raise ConfigError(f"Expected a boolean, got {x!r}")


def _text(x: typing.Any) -> str:
    return str(x).strip()


def _optional(f: typing.Callable[[typing.Any], typing.Any]) -> typing.Callable[[typing.Any], typing.Any]:
    def g(x: typing.Any) -> typing.Any:
        if x is None or (isinstance(x, str) and x.strip().lower() in ('', 'none', 'null')):
            return None

        return f(x)

    return g


def _list_of(f: typing.Callable[[typing.Any], typing.Any]) -> typing.Callable[[typing.Any], typing.List[typing.Any]]:
    def g(x: typing.Any) -> typing.List[typing.Any]:
        if isinstance(x, str):
            x = [part for part in x.split(',') if part.strip()]
        elif not isinstance(x, (list, tuple)):
            x = [x]

        return [f(item) for item in x]

    return g


# Key: (parser, default)
_SCHEMA: typing.Dict[str, typing.Tuple[typing.Callable[[typing.Any], typing.Any], typing.Any]] = {
    'preset': (_optional(_text), 'physical'),
    'seed': (_seed, 0),
    'ensemble_chunk_size': (_count, 256),

    # Localization model
    'alpha_loc': (_quantity(unit.PER_CM2), 1e10),
    'lambda_micro': (_quantity(unit.PER_SECOND), 1e-16),
    'n_nucleons': (_number, 1e23),
    'mass': (_quantity(unit.GRAM), 1.0),
    'hbar': (_quantity(unit.ERG_SECOND), 1.0546e-27),
    'spread_convention': (_text, collapse_dynamics.SpreadConvention.PRINTED.value),
    'rate': (_optional(_quantity(unit.PER_SECOND)), None),

    # Trajectories
    'initial_mean': (_quantity(unit.CM), 0.0),
    'initial_precision': (_quantity(unit.PER_CM2), 1e22),
    'duration': (_quantity(unit.SECOND), 1e-4),
    'mode': (_text, collapse_dynamics.Mode.HITS.value),
    'samples': (_count, 100),
    'record_hits': (_flag, False),
    'trajectories': (_count, 1),

    # Equilibrium analytics
    'typical_precision': (_quantity(unit.PER_CM2), 1e22),
    'window': (_quantity(unit.SECOND), 86400.0),
    'near_offset': (_quantity(unit.CM), 10.0),
    'far_offset': (_quantity(unit.CM), 1e14),

    # Marbles and criteria
    'n': (_count, 10),
    'alpha_sq': (_number, 0.9),
    'beta_sq': (_optional(_number), None),
    'p': (_number, 0.4),
    'accessibility_epsilon': (_number, criteria.DEFAULT_EPSILON),
    'marble_mass': (_quantity(unit.GRAM), 1.0),
    'n_grid': (_optional(_list_of(_count)), None),

    # Counting chain
    'gamma_sq': (_number, 0.99),
    'trials': (_count, 100000),
    'flip_mode': (_text, measurement_chain.FlipMode.UNIFORM.value),
    'ordering': (_text, measurement_chain.Ordering.SEQUENTIAL.value),
    'alpha_sq_each': (_optional(_list_of(_number)), None),
    'chain_chunk_size': (_count, 4096)
}

DEFAULTS: typing.Dict[str, typing.Any] = {key: default for key, (_, default) in _SCHEMA.items()}


@attr.s(frozen=True)
class Preset(storage.RegistryEntry):
    name: str = attr.ib()
    description: str = attr.ib()
    values: typing.Mapping[str, typing.Any] = attr.ib(factory=dict)

    @property
    def registry_key(self) -> str:
        return self.name


presets: storage.Registry[Preset] = storage.Registry([
    Preset('physical', 'Macroscopic marble of 1 g with 10²³ nucleons', {
        'alpha_loc': 1e10,
        'lambda_micro': 1e-16,
        'n_nucleons': 1e23,
        'mass': 1.0,
        'hbar': 1.0546e-27,
        'initial_precision': 1e22,
        'duration': 1e-4,
        'mode': collapse_dynamics.Mode.HITS.value,
        'typical_precision': 1e22,
        'window': 86400.0,
        'near_offset': 10.0,
        'far_offset': 1e14
    }),
    # Same dimensionless balance at desk scale: λ = 100 s⁻¹ and an equilibrium precision of 10
    Preset('desk', 'Rescaled parameters where the spreading equilibrium is reached in a fraction of a second', {
        'alpha_loc': 1.0,
        'lambda_micro': 1.0,
        'n_nucleons': 100.0,
        'mass': 2 * math.pi,
        'hbar': 1.0,
        'initial_precision': 1.0,
        'duration': 10.0,
        'mode': collapse_dynamics.Mode.HITS_SPREAD.value,
        'typical_precision': 10.0,
        'window': 1.0,
        'near_offset': 1.0,
        'far_offset': 100.0
    })
])


@attr.s(frozen=True)
class RunConfig(object):
    """ Fully resolved flat configuration with typed accessors for each parameter block. """

    values: typing.Mapping[str, typing.Any] = attr.ib()

    def __getitem__(self, key: str) -> typing.Any:
        return self.values[key]

    @property
    def seed(self) -> int:
        return typing.cast(int, self.values['seed'])

    def grw_params(self) -> collapse_dynamics.GrwParams:
        lambda_micro = self['lambda_micro']

        if self['rate'] is not None:
            lambda_micro = self['rate'] / self['n_nucleons']

        return collapse_dynamics.GrwParams(
            self['alpha_loc'],
            lambda_micro,
            self['n_nucleons'],
            self['mass'],
            self['hbar'],
            spread_convention=self['spread_convention']
        )

    def initial_packet(self) -> collapse_dynamics.GaussianWavepacket:
        return collapse_dynamics.GaussianWavepacket(self['initial_mean'], self['initial_precision'])

    @property
    def mode(self) -> collapse_dynamics.Mode:
        return collapse_dynamics.Mode(self['mode'])

    def marble(self) -> state_algebra.MarbleState:
        if self['beta_sq'] is not None:
            return state_algebra.make_marble(epsilon=self['beta_sq'])

        return state_algebra.make_marble(self['alpha_sq'])

    def product_state(self, n: typing.Optional[int] = None) -> state_algebra.ProductState:
        if self['alpha_sq_each'] is not None and n is None:
            return state_algebra.ProductState.from_marbles(
                state_algebra.make_marble(a) for a in self['alpha_sq_each']
            )

        return state_algebra.ProductState.homogeneous(self.marble(), self['n'] if n is None else n)

    def chain_params(self) -> measurement_chain.ChainParams:
        each = self['alpha_sq_each']
        alpha_sq = self['alpha_sq'] if self['beta_sq'] is None else 1.0 - self['beta_sq']

        return measurement_chain.ChainParams(
            self['n'] if each is None else len(each),
            alpha_sq,
            self['gamma_sq'],
            self.seed,
            flip_mode=self['flip_mode'],
            ordering=self['ordering'],
            alpha_sq_each=each
        )

    def validate(self) -> None:
        """ Build every parameter block once, raising ConfigError on the first invalid one. """
        try:
            self.grw_params()
            self.initial_packet()
            _ = self.mode
            self.marble()
            self.chain_params()
        except (collapselib.CollapseLibError, ValueError) as exc:
            raise ConfigError(f"Invalid configuration: {exc}") from exc

        if self['duration'] < 0:
            raise ConfigError('duration cannot be negative')

        for key in ('samples', 'trials', 'trajectories', 'ensemble_chunk_size', 'chain_chunk_size'):
            if self[key] < 1:
                raise ConfigError(f"{key} must be at least 1")

        if not 0.0 < self['p'] < 0.5:
            raise ConfigError(f"p must lie in (0, 0.5), got {self['p']}")

        if not self['accessibility_epsilon'] > 0:
            raise ConfigError('accessibility_epsilon must be positive')

        if self['n_grid'] is not None and any(n < 1 for n in self['n_grid']):
            raise ConfigError('n_grid entries must be at least 1')

    def to_json(self) -> typing.Dict[str, typing.Any]:
        return dict(self.values)


def _parse(values: typing.Mapping[str, typing.Any], source: str) -> typing.Dict[str, typing.Any]:
    parsed = {}

    for key, value in values.items():
        key = str(key).strip().replace('-', '_')

        if key not in _SCHEMA:
            raise ConfigError(f"Unknown configuration key \"{key}\" in {source}")

        try:
            parsed[key] = _SCHEMA[key][0](value)
        except (unit.QuantityParseError, ValueError, TypeError) as exc:
            raise ConfigError(f"Invalid value {value!r} for \"{key}\" in {source}: {exc}") from exc

    return parsed


def load_file(path: str) -> typing.Dict[str, typing.Any]:
    """ Load a flat configuration file. A report containing an embedded `config` mapping may be used directly.

    :param path: YAML or JSON file
    :return: raw mapping
    """
    try:
        with open(path, 'r', encoding='utf-8') as f:
            document = config_yaml.load(f)
    except OSError as exc:
        raise ConfigError(f"Unable to read config file \"{path}\": {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"Unable to parse config file \"{path}\": {exc}") from exc

    if document is None:
        return {}

    if not isinstance(document, dict):
        raise ConfigError(f"Config file \"{path}\" must contain a mapping")

    if isinstance(document.get('config'), dict):
        _logger.info(f"Using configuration embedded in \"{path}\"")
        return document['config']

    return document


def resolve(file_values: typing.Optional[typing.Mapping[str, typing.Any]] = None,
            overrides: typing.Optional[typing.Mapping[str, typing.Any]] = None,
            flags: typing.Optional[typing.Mapping[str, typing.Any]] = None) -> RunConfig:
    """ Merge configuration sources and validate the result.

    :param file_values: mapping loaded from a config file
    :param overrides: --set key=value pairs
    :param flags: dedicated command line flags, None values are ignored
    :return: validated RunConfig
    """
    file_parsed = _parse(file_values or {}, 'config file')
    override_parsed = _parse(overrides or {}, '--set overrides')
    flag_parsed = _parse({k: v for k, v in (flags or {}).items() if v is not None}, 'command line')

    # Preset selection follows the same precedence as every other key
    preset_name = DEFAULTS['preset']

    for source in (file_parsed, override_parsed, flag_parsed):
        if 'preset' in source:
            preset_name = source['preset']

    values = dict(DEFAULTS)

    if preset_name is not None:
        try:
            preset = presets[preset_name]
        except storage.UnknownEntry as exc:
            raise ConfigError(str(exc)) from None

        values.update(_parse(preset.values, f"preset {preset.name}"))

    for source in (file_parsed, override_parsed, flag_parsed):
        values.update(source)

    values['preset'] = preset_name

    config = RunConfig(values)
    config.validate()

    _logger.debug(f"Resolved configuration with preset {preset_name}")

    return config
