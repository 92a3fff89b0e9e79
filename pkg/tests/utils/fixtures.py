# -*- coding: utf-8 -*-
#
# Copyright (c) 2026 The phdec developers
# All rights reserved. Distributed under the BSD 3-Clause license, see LICENSE.
'''
Configuration, mesh and state fixtures
'''
import io
import random
import typing

import numpy as np

from phdec import config, consts, elliptic, meshgen
from phdec.complex import SimplicialComplex
from phdec.forms import Cochain, HodgeSystem

from . import conf

TEST_CONFIG = '''# Sample phdec run configuration

[scenario]
# Mesh file, relative paths are relative to this file
mesh = {mesh}
# potential or rotational
formulation = {formulation}
# implicit-midpoint or rk4
integrator = {integrator}
dt = {dt}
t_end = {t_end}
# flat, cosine, taylor-green or rest
initial = {initial}
surface_amplitude = {surface_amplitude}
surface_mode = {surface_mode}
velocity_amplitude = {velocity_amplitude}

# Wall inflow pulse, amplitude 0 disables it
inflow_amplitude = {inflow_amplitude}
inflow_duration = {inflow_duration}
inflow_wall = {inflow_wall}
probe_x = {probe_x}

[params]
rho = {rho}
tau = {tau}
g0 = {g0}
pbar = {pbar}

[output]
directory = {directory}
cadence = {cadence}
snapshots = {snapshots}
seed = {seed}

# Log level, valid are DEBUG, INFO, WARN, ERROR. Defaults to ERROR
loglevel = {loglevel}
# Log file, defaults to stderr
logfile = {logfile}
# Max log size before rotating it, in MB. Defaults to 32 MB.
logsize = {logsize}
lognumber = {lognumber}

tol_energy = {tol_energy}
'''

SCENARIO_KEYS = (
    'mesh',
    'formulation',
    'integrator',
    'dt',
    't_end',
    'initial',
    'surface_amplitude',
    'surface_mode',
    'velocity_amplitude',
    'inflow_amplitude',
    'inflow_duration',
    'inflow_wall',
    'probe_x',
)
PARAMS_KEYS = ('rho', 'tau', 'g0', 'pbar')
OUTPUT_KEYS = ('directory', 'cadence', 'snapshots', 'seed', 'loglevel', 'logfile', 'logsize', 'lognumber')


def get_config(**overrides: typing.Any) -> typing.Tuple[typing.Dict[str, typing.Any], config.RunConfig]:
    values: typing.Dict[str, typing.Any] = {
        'mesh': conf.TANK_MESH,
        'formulation': random.choice(config.FORMULATIONS),
        'integrator': random.choice(config.INTEGRATORS),
        'dt': random.uniform(1e-4, 1e-1),
        't_end': random.uniform(0.0, 10.0),
        'initial': random.choice(config.INITIAL_CONDITIONS),
        'surface_amplitude': random.uniform(0.0, 0.01),
        'surface_mode': random.randint(1, 5),
        'velocity_amplitude': random.uniform(0.0, 2.0),
        'inflow_amplitude': random.uniform(0.0, 0.1),
        'inflow_duration': random.uniform(0.0, 2.0),
        'inflow_wall': random.choice(config.INFLOW_WALLS),
        'probe_x': random.uniform(0.0, 1.0),
        'rho': random.uniform(1.0, 1000.0),
        'tau': random.uniform(0.0, 0.1),
        'g0': random.uniform(0.0, 10.0),
        'pbar': random.uniform(-1.0, 1.0),
        'directory': f'/tmp/phdec_{random.randint(0, 100)}',
        'cadence': random.randint(1, 100),
        'snapshots': random.choice([True, False]),
        'seed': random.randint(0, 2**31),
        'loglevel': random.choice(['DEBUG', 'INFO', 'WARNING', 'ERROR']),
        'logfile': f'/tmp/phdec_{random.randint(0, 100)}.log',
        'logsize': random.randint(1, 100),
        'lognumber': random.randint(0, 100),
        'tol_energy': random.uniform(1e-8, 1e-2),
    }
    values.update(overrides)
    config_file = io.StringIO(TEST_CONFIG.format(**values))
    # Read it
    return values, config.read(config_file)


# Meshes
def square(n: int = 4) -> SimplicialComplex:
    """Closed unit square, every side a wall."""
    return meshgen.structured_rectangle(n, n, sigma=())


def tank(nx: int = 16, ny: int = 4) -> SimplicialComplex:
    return meshgen.tank(nx, ny, conf.TANK_LENGTH, conf.TANK_DEPTH)


def droplet(n: int = 12, layers: int = 2) -> SimplicialComplex:
    return meshgen.polygon_disc(n, 1.0, layers)


# Cochains
def rng(seed: int = conf.SEED) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_cochain(c: SimplicialComplex, degree: int, generator: np.random.Generator) -> Cochain:
    size = (c.n_vertices, c.n_edges, c.n_triangles)[degree]
    return Cochain(degree, generator.standard_normal(size), c)


def solenoidal(hs: HodgeSystem, generator: np.random.Generator) -> Cochain:
    return elliptic.solenoidal_projection(random_cochain(hs.complex, 1, generator), hs)


def linear(hs: HodgeSystem, a: float = 0.7, b: float = -0.3) -> Cochain:
    """0-cochain of ``a x + b y``."""
    return Cochain(0, a * hs.positions[:, 0] + b * hs.positions[:, 1], hs.complex)


FORMULATIONS = consts.FORMULATIONS
