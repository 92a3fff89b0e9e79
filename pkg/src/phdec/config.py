# -*- coding: utf-8 -*-
#
# Copyright (c) 2026 The phdec developers
# All rights reserved. Distributed under the BSD 3-Clause license, see LICENSE.
'''
Run configuration files.

Flat ``key = value`` files with three sections::

    [scenario]
    mesh = ../meshes/tank_16x4.mesh
    formulation = potential
    ...
    [params]
    rho = 1000
    ...
    [output]
    directory = out
    ...
'''
import configparser
import dataclasses
import logging
import os
import typing

from . import consts
from .errors import ConfigError

logger = logging.getLogger(__name__)

FORMULATIONS = ('potential', 'rotational')
INTEGRATORS = ('implicit-midpoint', 'rk4')
INITIAL_CONDITIONS = ('flat', 'cosine', 'taylor-green', 'rest')
INFLOW_WALLS = ('left', 'right', 'bottom')


@dataclasses.dataclass(frozen=True)
class ScenarioConfig:
    mesh: str
    formulation: str
    integrator: str
    dt: float
    t_end: float
    initial: str
    surface_amplitude: float
    surface_mode: int
    velocity_amplitude: float
    inflow_amplitude: float
    inflow_duration: float
    inflow_wall: str
    inflow_table: typing.Tuple[typing.Tuple[float, float], ...]  # (t, g) pairs, overrides the pulse
    probe_x: float


@dataclasses.dataclass(frozen=True)
class ParamsConfig:
    rho: float
    tau: float
    g0: float
    pbar: float


@dataclasses.dataclass(frozen=True)
class OutputConfig:
    directory: str
    cadence: int
    snapshots: bool
    seed: int

    loglevel: str
    logfile: str
    logsize: int
    lognumber: int

    tolerances: typing.Dict[str, float]


@dataclasses.dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioConfig
    params: ParamsConfig
    output: OutputConfig
    source: str  # config file name, or '<stream>'

    def tolerance(self, name: str, default: float) -> float:
        return self.output.tolerances.get(name, default)

    def __str__(self) -> str:
        return 'Configuration: \n' + '\n'.join(
            f'{section}.{k}={v}'
            for section in ('scenario', 'params', 'output')
            for k, v in dataclasses.asdict(getattr(self, section)).items()
        )


def read_config_file(cfg_file: typing.Optional[typing.Union[typing.TextIO, str]] = None) -> str:
    if cfg_file is None:
        cfg_file = consts.CONFIGFILE
    if isinstance(cfg_file, str):
        try:
            with open(cfg_file, 'r', encoding='utf-8') as f:
                return f.read()
        except OSError as e:
            raise ConfigError(f'Could not read configuration file {cfg_file}: {e.strerror}') from None
    # path is in fact a file-like object
    return cfg_file.read()


def _as_bool(value: str) -> bool:
    return value.strip().lower() in ('true', 'yes', '1', 'on')


def _parse_table(value: str) -> typing.Tuple[typing.Tuple[float, float], ...]:
    if not value.strip():
        return ()
    pairs: typing.List[typing.Tuple[float, float]] = []
    for item in value.split(','):
        t, g = item.split(':')
        pairs.append((float(t), float(g)))
    times = [p[0] for p in pairs]
    if times != sorted(times):
        raise ValueError('inflow_table times must be increasing')
    return tuple(pairs)


def _parse_size(value: str) -> int:
    # Size in MB, trailing M allowed
    value = value.strip()
    if value[-1:] in ('M', 'm'):
        value = value[:-1]
    return int(value) * 1024 * 1024


def read(cfg_file: typing.Optional[typing.Union[typing.TextIO, str]] = None) -> RunConfig:
    config_str = read_config_file(cfg_file)
    source = cfg_file if isinstance(cfg_file, str) else (consts.CONFIGFILE if cfg_file is None else '<stream>')

    cfg = configparser.ConfigParser()
    try:
        cfg.read_string(config_str)
    except configparser.Error as e:
        raise ConfigError(f'Configuration file {source} could not be parsed: {e}') from None

    for section in ('scenario', 'params', 'output'):
        if not cfg.has_section(section):
            cfg.add_section(section)
    scn = cfg['scenario']
    prm = cfg['params']
    out = cfg['output']

    # Relative mesh paths are relative to the configuration file
    base_dir = os.path.dirname(os.path.abspath(source)) if isinstance(cfg_file, str) else os.getcwd()

    try:
        mesh = scn['mesh']
        if not os.path.isabs(mesh):
            mesh = os.path.normpath(os.path.join(base_dir, mesh))
        scenario = ScenarioConfig(
            mesh=mesh,
            formulation=scn.get('formulation', 'potential').strip().lower(),
            integrator=scn.get('integrator', 'implicit-midpoint').strip().lower(),
            dt=float(scn['dt']),
            t_end=float(scn['t_end']),
            initial=scn.get('initial', 'flat').strip().lower(),
            surface_amplitude=float(scn.get('surface_amplitude', '0')),
            surface_mode=int(scn.get('surface_mode', '1')),
            velocity_amplitude=float(scn.get('velocity_amplitude', '1')),
            inflow_amplitude=float(scn.get('inflow_amplitude', '0')),
            inflow_duration=float(scn.get('inflow_duration', '0')),
            inflow_wall=scn.get('inflow_wall', 'left').strip().lower(),
            inflow_table=_parse_table(scn.get('inflow_table', '')),
            probe_x=float(scn.get('probe_x', '0')),
        )
        params = ParamsConfig(
            rho=float(prm.get('rho', '1')),
            tau=float(prm.get('tau', '0')),
            g0=float(prm.get('g0', '9.81')),
            pbar=float(prm.get('pbar', '0')),
        )
        tolerances = {
            key[4:]: float(value) for key, value in out.items() if key.startswith('tol_')
        }
        output = OutputConfig(
            directory=out.get('directory', 'out'),
            cadence=int(out.get('cadence', '1')),
            snapshots=_as_bool(out.get('snapshots', 'false')),
            seed=int(out.get('seed', str(consts.DEFAULT_SEED))),
            loglevel=out.get('loglevel', 'ERROR').upper(),
            logfile=out.get('logfile', ''),
            logsize=_parse_size(out.get('logsize', '32M')),
            lognumber=int(out.get('lognumber', '3')),
            tolerances=tolerances,
        )
    except ValueError as e:
        raise ConfigError(
            f'Mandatory configuration file in incorrect format: {e.args[0]}. Please, revise {source}'
        ) from None
    except KeyError as e:
        raise ConfigError(
            f'Mandatory configuration parameter not found: {e.args[0]}. Please, revise {source}'
        ) from None

    run_cfg = RunConfig(scenario=scenario, params=params, output=output, source=source)
    validate(run_cfg)
    logger.debug('Read configuration from %s', source)
    return run_cfg


def validate(cfg: RunConfig) -> None:
    scn, prm, out = cfg.scenario, cfg.params, cfg.output
    problems: typing.List[str] = []
    if scn.formulation not in FORMULATIONS:
        problems.append(f'formulation must be one of {", ".join(FORMULATIONS)}')
    if scn.integrator not in INTEGRATORS:
        problems.append(f'integrator must be one of {", ".join(INTEGRATORS)}')
    if scn.initial not in INITIAL_CONDITIONS:
        problems.append(f'initial must be one of {", ".join(INITIAL_CONDITIONS)}')
    if scn.inflow_wall not in INFLOW_WALLS:
        problems.append(f'inflow_wall must be one of {", ".join(INFLOW_WALLS)}')
    if not scn.dt > 0:
        problems.append('dt must be positive')
    if scn.t_end < 0:
        problems.append('t_end must not be negative')
    if scn.surface_mode < 1:
        problems.append('surface_mode must be at least 1')
    if scn.inflow_duration < 0:
        problems.append('inflow_duration must not be negative')
    if not prm.rho > 0:
        problems.append('rho must be positive')
    if prm.tau < 0:
        problems.append('tau must not be negative')
    if prm.g0 < 0:
        problems.append('g0 must not be negative')
    if out.cadence < 1:
        problems.append('cadence must be at least 1')
    if out.loglevel not in ('DEBUG', 'INFO', 'WARNING', 'WARN', 'ERROR', 'CRITICAL'):
        problems.append(f'invalid loglevel {out.loglevel}')
    for name, value in out.tolerances.items():
        if not value > 0:
            problems.append(f'tolerance {name} must be positive')
    if not os.path.isfile(scn.mesh):
        problems.append(f'mesh file {scn.mesh} not found')
    if problems:
        raise ConfigError(f'Invalid configuration {cfg.source}: ' + '; '.join(problems))
