# -*- coding: utf-8 -*-
#
# Copyright (c) 2026 The phdec developers
# All rights reserved. Distributed under the BSD 3-Clause license, see LICENSE.
'''
Project wide constants
'''
import typing

DEBUG = False

CONFIGFILE: typing.Final[str] = 'ph.conf'
LOGFORMAT: typing.Final[str] = (
    '%(levelname)s %(asctime)s %(message)s'
    if not DEBUG
    else '%(levelname)s %(asctime)s %(name)s:%(funcName)s %(lineno)d %(message)s'
)

VERSION: typing.Final[str] = 'v1.0.0'

# Spatial dimension. Sign factors are written in terms of it, only 2 is exercised
DIM: typing.Final[int] = 2

# Mesh file format
MESH_HEADER: typing.Final[str] = 'ph-mesh 1'
SIGMA: typing.Final[str] = 'SIGMA'  # free surface
GAMMA: typing.Final[str] = 'GAMMA'  # fixed wall

# Formulations
FORM_V: typing.Final[str] = 'v'
FORM_ETA: typing.Final[str] = 'eta'
FORM_OMEGA: typing.Final[str] = 'omega'
FORMULATIONS: typing.Final[typing.Tuple[str, ...]] = (FORM_V, FORM_ETA, FORM_OMEGA)

# Tolerances
TOL_GALERKIN: typing.Final[float] = 1e-11
TOL_SOLENOIDAL: typing.Final[float] = 1e-9
TOL_COMPATIBILITY: typing.Final[float] = 1e-10
TOL_RECOVERY: typing.Final[float] = 1e-7  # least squares phi-flow recovery
TOL_ORTHOGONALITY: typing.Final[float] = 1e-9
TOL_ENERGY: typing.Final[float] = 1e-4
TOL_POWER: typing.Final[float] = 1e-3
TOL_AREA: typing.Final[float] = 1e-5
TOL_CG: typing.Final[float] = 1e-12

# Implicit midpoint fixed point iteration
MIDPOINT_TOL: typing.Final[float] = 1e-11
MIDPOINT_MAX_ITER: typing.Final[int] = 50

# Max vertex displacement per step, relative to the shortest adjacent edge
MAX_DISPLACEMENT_RATIO: typing.Final[float] = 0.4

# Degree 4 symmetric rule on the reference triangle, 6 points (barycentric, weight)
QUADRATURE_T4: typing.Final[typing.Tuple[typing.Tuple[float, float, float, float], ...]] = (
    (0.445948490915965, 0.445948490915965, 0.108103018168070, 0.223381589678011),
    (0.445948490915965, 0.108103018168070, 0.445948490915965, 0.223381589678011),
    (0.108103018168070, 0.445948490915965, 0.445948490915965, 0.223381589678011),
    (0.091576213509771, 0.091576213509771, 0.816847572980459, 0.109951743655322),
    (0.091576213509771, 0.816847572980459, 0.091576213509771, 0.109951743655322),
    (0.816847572980459, 0.091576213509771, 0.091576213509771, 0.109951743655322),
)
# Gauss-Legendre points on edges
EDGE_GAUSS_POINTS: typing.Final[int] = 3

# Parallelism cap
THREADS_ENV: typing.Final[str] = 'PH_THREADS'

DEFAULT_SEED: typing.Final[int] = 20240607

# Exit codes
EXIT_OK: typing.Final[int] = 0
EXIT_FAILURE: typing.Final[int] = 1
EXIT_USAGE: typing.Final[int] = 2
