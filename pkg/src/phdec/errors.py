# -*- coding: utf-8 -*-
#
# Copyright (c) 2026 The phdec developers
# All rights reserved. Distributed under the BSD 3-Clause license, see LICENSE.
'''
Exceptions raised by phdec
'''
import typing


class PHError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(PHError):
    pass


class MeshError(PHError):
    """
    Mesh could not be parsed or validated.

    ``simplex`` holds the offending vertex tuple (if any) and ``line`` the
    1-based line of the mesh file where the problem was found.
    """

    simplex: typing.Optional[typing.Tuple[int, ...]]
    line: typing.Optional[int]

    def __init__(
        self,
        message: str,
        simplex: typing.Optional[typing.Tuple[int, ...]] = None,
        line: typing.Optional[int] = None,
    ) -> None:
        self.simplex = simplex
        self.line = line
        if simplex is not None:
            message = f'{message} (simplex {simplex})'
        if line is not None:
            message = f'line {line}: {message}'
        super().__init__(message)


class OrientationError(MeshError):
    pass


class NonManifoldError(MeshError):
    pass


class BoundaryLabelError(MeshError):
    pass


class DegreeError(PHError):
    """Cochain degree or mesh mismatch."""


class FormulationError(DegreeError):
    """State or derivative tuple of the wrong variable set."""


class SolverError(PHError):
    pass


class CompatibilityError(SolverError):
    """Pure Neumann data with net flux."""


class PreconditionError(PHError):
    residual: float

    def __init__(self, message: str, residual: float = float('nan')) -> None:
        self.residual = residual
        super().__init__(f'{message} (residual {residual:.3e})')


class TopologyError(PHError):
    pass


class GeometryError(PHError):
    """Inverted or tangled mesh. ``suggested_dt`` is set when a step caused it."""

    suggested_dt: typing.Optional[float]

    def __init__(self, message: str, suggested_dt: typing.Optional[float] = None) -> None:
        self.suggested_dt = suggested_dt
        if suggested_dt is not None:
            message = f'{message}, try dt <= {suggested_dt:.6e}'
        super().__init__(message)


class FDStepError(PHError):
    pass
