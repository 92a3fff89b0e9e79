# -*- coding: utf-8 -*-
#
# Copyright (c) 2026 The phdec developers
# All rights reserved. Distributed under the BSD 3-Clause license, see LICENSE.
'''
Hamiltonians of the three formulations, free surface geometry and the
functional derivatives of the energy.

Energies are per unit density: kinetic ``1/2 <v, v>``, gravity ``g0 int y``
and surface ``tau / rho * length(Sigma)``.
'''
import dataclasses
import logging
import typing

import numpy as np

from . import consts, elliptic, forms
from .complex import SimplicialComplex, signed_areas
from .errors import ConfigError, FormulationError, GeometryError, PreconditionError
from .forms import Cochain, HodgeSystem

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class PhysParams:
    rho: float = 1.0
    tau: float = 0.0
    g0: float = 9.81
    pbar: float = 0.0  # only p - pbar enters the equations

    def __post_init__(self) -> None:
        if not self.rho > 0:
            raise ConfigError(f'density must be positive, got {self.rho}')
        if self.tau < 0:
            raise ConfigError(f'surface tension must be non negative, got {self.tau}')
        if self.g0 < 0:
            raise ConfigError(f'gravity must be non negative, got {self.g0}')

    @property
    def capillarity(self) -> float:
        return self.tau / self.rho


def polyline_curvature(points: np.ndarray) -> np.ndarray:
    """
    Turning angle over half the adjacent lengths at every interior point of a
    polyline (closed if the first point is repeated at the end). Left turns are
    positive.
    """
    e1 = points[1:-1] - points[:-2]
    e2 = points[2:] - points[1:-1]
    l1 = np.linalg.norm(e1, axis=1)
    l2 = np.linalg.norm(e2, axis=1)
    if (l1 <= 0).any() or (l2 <= 0).any():
        raise GeometryError('zero length surface edge')
    cross = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    dot = np.einsum('ij,ij->i', e1, e2)
    return np.arctan2(cross, dot) / (0.5 * (l1 + l2))


@dataclasses.dataclass(frozen=True, eq=False)
class SurfaceState:
    """Discrete free surface: the Sigma vertices of one mesh configuration."""

    vertices: np.ndarray  # Sigma vertex ids
    positions: np.ndarray  # (S, 2)
    normals: np.ndarray  # (S, 2) outward, unit
    measure: np.ndarray  # half the adjacent boundary edge lengths
    curvature: np.ndarray
    edge_lengths: np.ndarray  # per Sigma edge

    @property
    def length(self) -> float:
        return float(self.edge_lengths.sum())

    @property
    def length_gradient(self) -> np.ndarray:
        """
        Density of the derivative of the surface length along the vertex
        normals, ``2 sin(turning / 2) / measure``. Agrees with the curvature up
        to ``turning**3 / 24`` per vertex.
        """
        turning = self.curvature * self.measure
        return 2.0 * np.sin(0.5 * turning) / self.measure

    @staticmethod
    def build(c: SimplicialComplex, positions: np.ndarray) -> 'SurfaceState':
        sigma = c.sigma_vertices
        sigma_edges = c.sigma_edges()
        edge_lengths = np.linalg.norm(positions[c.edges[sigma_edges, 1]] - positions[c.edges[sigma_edges, 0]], axis=1)
        if (edge_lengths <= 0).any():
            raise GeometryError('zero length surface edge')
        if sigma.size == 0:
            empty = np.zeros((0, 2))
            return SurfaceState(sigma, empty, empty, np.zeros(0), np.zeros(0), edge_lengths)

        prev_v, next_v = c.sigma_neighbours()
        x = positions[sigma]
        e1 = x - positions[prev_v]
        e2 = positions[next_v] - x
        l1 = np.linalg.norm(e1, axis=1)
        l2 = np.linalg.norm(e2, axis=1)
        if (l1 <= 0).any() or (l2 <= 0).any():
            raise GeometryError('zero length surface edge')
        n1 = np.stack([e1[:, 1], -e1[:, 0]], axis=1) / l1[:, None]
        n2 = np.stack([e2[:, 1], -e2[:, 0]], axis=1) / l2[:, None]
        normals = n1 + n2
        normals /= np.linalg.norm(normals, axis=1)[:, None]
        cross = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        turning = np.arctan2(cross, np.einsum('ij,ij->i', e1, e2))
        measure = 0.5 * (l1 + l2)
        return SurfaceState(sigma, x, normals, measure, turning / measure, edge_lengths)


def domain_area(c: SimplicialComplex, positions: np.ndarray) -> float:
    return float(signed_areas(positions, c.triangles).sum())


def surface_length(c: SimplicialComplex, positions: np.ndarray) -> float:
    edges = c.edges[c.sigma_edges()]
    return float(np.linalg.norm(positions[edges[:, 1]] - positions[edges[:, 0]], axis=1).sum())


def gravity_energy(c: SimplicialComplex, positions: np.ndarray, g0: float) -> float:
    """``g0 int_Omega y``, exact for the piecewise linear geometry."""
    areas = signed_areas(positions, c.triangles)
    centroid_y = positions[c.triangles, 1].mean(axis=1)
    return float(g0 * np.sum(areas * centroid_y))


def gravity_gradient(c: SimplicialComplex, positions: np.ndarray, g0: float) -> np.ndarray:
    """
    Density of the derivative of ``gravity_energy`` along the Sigma vertex
    normals. Each adjacent edge sweeps a triangle whose first moment is
    ``l cos(turning / 2) (2 y_i + y_j) / 6``.
    """
    surface = SurfaceState.build(c, positions)
    if surface.vertices.size == 0:
        return np.zeros(0)
    prev_v, next_v = c.sigma_neighbours()
    y = surface.positions[:, 1]
    l1 = np.linalg.norm(surface.positions - positions[prev_v], axis=1)
    l2 = np.linalg.norm(positions[next_v] - surface.positions, axis=1)
    tilt = np.cos(0.5 * surface.curvature * surface.measure)
    moment = l1 * (2.0 * y + positions[prev_v, 1]) + l2 * (2.0 * y + positions[next_v, 1])
    return g0 * tilt * moment / (6.0 * surface.measure)


@dataclasses.dataclass(frozen=True)
class Energy:
    kinetic: float
    gravity: float
    surface: float

    @property
    def total(self) -> float:
        return self.kinetic + self.gravity + self.surface


def _potential_terms(hs: HodgeSystem, params: PhysParams) -> typing.Tuple[float, float]:
    c = hs.complex
    return gravity_energy(c, hs.positions, params.g0), params.capillarity * surface_length(c, hs.positions)


def hamiltonian_v(v: Cochain, params: PhysParams, hs: HodgeSystem, *, check: bool = True) -> Energy:
    if check:
        forms.require_solenoidal(v, hs, 'velocity')
    gravity, surface = _potential_terms(hs, params)
    return Energy(0.5 * forms.inner(v, v, hs), gravity, surface)


def require_tangent(eta: Cochain, hs: HodgeSystem) -> None:
    loads = forms.flux_loads(eta, hs)
    scale = max(1.0, np.sqrt(max(forms.inner(eta, eta, hs), 0.0)))
    residual = float(np.abs(loads).max()) / scale if loads.size else 0.0
    if residual > consts.TOL_SOLENOIDAL:
        raise PreconditionError('eta is not tangent', residual)


def boundary_energy(phi_boundary: np.ndarray, hs: HodgeSystem) -> float:
    """``1/2 int_dOmega phi dn(phi)`` of the harmonic extension of boundary values."""
    phi = elliptic.harmonic_lift(phi_boundary, hs)
    loads = (hs.stiffness @ phi.values)[hs.complex.boundary_vertices]
    return 0.5 * float(phi_boundary @ loads)


def hamiltonian_eta(
    eta: Cochain, phi_boundary: np.ndarray, params: PhysParams, hs: HodgeSystem, *, check: bool = True
) -> Energy:
    if check:
        forms.require_solenoidal(eta, hs, 'eta')
        require_tangent(eta, hs)
    gravity, surface = _potential_terms(hs, params)
    kinetic = 0.5 * forms.inner(eta, eta, hs) + boundary_energy(phi_boundary, hs)
    return Energy(kinetic, gravity, surface)


def rotational_energy(omega: Cochain, hs: HodgeSystem) -> float:
    """``1/2 int beta ^ *omega`` with ``beta = N_beta(omega)``."""
    potential = elliptic.solve_Nbeta(omega, hs)
    return 0.5 * float(potential.dual @ omega.values)


def hamiltonian_omega(omega: Cochain, phi_boundary: np.ndarray, params: PhysParams, hs: HodgeSystem) -> Energy:
    gravity, surface = _potential_terms(hs, params)
    kinetic = rotational_energy(omega, hs) + boundary_energy(phi_boundary, hs)
    return Energy(kinetic, gravity, surface)


# States in the three variable sets
@dataclasses.dataclass(frozen=True, eq=False)
class FlowState:
    """
    Fluid state on one mesh configuration. ``v`` for the velocity formulation,
    ``eta`` plus boundary potential values for the potential split and
    ``omega`` plus boundary potential values for the vorticity formulation.
    """

    formulation: str
    hs: HodgeSystem = dataclasses.field(repr=False)
    v: typing.Optional[Cochain] = None
    eta: typing.Optional[Cochain] = None
    omega: typing.Optional[Cochain] = None
    phi_boundary: typing.Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        needed = {
            consts.FORM_V: ('v',),
            consts.FORM_ETA: ('eta', 'phi_boundary'),
            consts.FORM_OMEGA: ('omega', 'phi_boundary'),
        }.get(self.formulation)
        if needed is None:
            raise FormulationError(f'unknown formulation {self.formulation}')
        for name in needed:
            if getattr(self, name) is None:
                raise FormulationError(f'{self.formulation} state needs {name}')

    @staticmethod
    def from_velocity(v: Cochain, hs: HodgeSystem) -> 'FlowState':
        return FlowState(consts.FORM_V, hs, v=v)

    def velocity(self) -> Cochain:
        if self.v is not None:
            return self.v
        return forms.d(self.phi()) + self.coexact()

    def phi(self) -> Cochain:
        if self.phi_boundary is not None:
            return elliptic.harmonic_lift(self.phi_boundary, self.hs)
        assert self.v is not None
        return elliptic.solve_Nphi(elliptic.NeumannData.from_field(self.v, self.hs), self.hs)

    def coexact(self) -> Cochain:
        if self.eta is not None:
            return self.eta
        if self.omega is not None:
            return elliptic.solve_Nbeta(self.omega, self.hs).eta
        assert self.v is not None
        return elliptic.p_coexact(self.v, self.hs)

    def vorticity(self) -> Cochain:
        if self.omega is not None:
            return self.omega
        if self.eta is not None:
            # d d phi vanishes exactly on the integer incidences
            return forms.d(self.eta)
        return forms.d(self.velocity())

    def to(self, formulation: str) -> 'FlowState':
        if formulation == self.formulation:
            return self
        if formulation == consts.FORM_V:
            return FlowState(formulation, self.hs, v=self.velocity())
        phi_b = self.phi().values[self.hs.complex.boundary_vertices]
        if formulation == consts.FORM_ETA:
            return FlowState(formulation, self.hs, eta=self.coexact(), phi_boundary=phi_b)
        return FlowState(formulation, self.hs, omega=self.vorticity(), phi_boundary=phi_b)

    def energy(self, params: PhysParams) -> Energy:
        if self.formulation == consts.FORM_V:
            assert self.v is not None
            return hamiltonian_v(self.v, params, self.hs)
        assert self.phi_boundary is not None
        if self.formulation == consts.FORM_ETA:
            assert self.eta is not None
            return hamiltonian_eta(self.eta, self.phi_boundary, params, self.hs)
        assert self.omega is not None
        return hamiltonian_omega(self.omega, self.phi_boundary, params, self.hs)


@dataclasses.dataclass(frozen=True, eq=False)
class FunctionalDerivs:
    """
    Derivative tuple of a functional. ``dv`` and ``deta`` are 1-cochains,
    ``domega`` a 0-cochain, ``dsigma`` one density per Sigma vertex, ``dphi``
    one load per boundary vertex and ``dgamma`` an optional effort per Gamma
    vertex for the port brackets.
    """

    formulation: str
    dsigma: np.ndarray
    dv: typing.Optional[np.ndarray] = None
    dphi: typing.Optional[np.ndarray] = None
    deta: typing.Optional[np.ndarray] = None
    domega: typing.Optional[np.ndarray] = None
    dgamma: typing.Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        needed = {
            consts.FORM_V: ('dv',),
            consts.FORM_ETA: ('deta', 'dphi'),
            consts.FORM_OMEGA: ('domega', 'dphi'),
        }.get(self.formulation)
        if needed is None:
            raise FormulationError(f'unknown formulation {self.formulation}')
        for name in needed:
            if getattr(self, name) is None:
                raise FormulationError(f'{self.formulation} derivatives need {name}')

    def combine(self, a: float, other: 'FunctionalDerivs', b: float) -> 'FunctionalDerivs':
        """``a * self + b * other``."""
        if other.formulation != self.formulation:
            raise FormulationError('cannot combine derivatives of different formulations')

        def mix(x: typing.Optional[np.ndarray], y: typing.Optional[np.ndarray]) -> typing.Optional[np.ndarray]:
            if x is None and y is None:
                return None
            x = np.zeros_like(y) if x is None else x
            y = np.zeros_like(x) if y is None else y
            return a * x + b * y

        return FunctionalDerivs(
            self.formulation,
            typing.cast(np.ndarray, mix(self.dsigma, other.dsigma)),
            mix(self.dv, other.dv),
            mix(self.dphi, other.dphi),
            mix(self.deta, other.deta),
            mix(self.domega, other.domega),
            mix(self.dgamma, other.dgamma),
        )


def nodal_pairing(a: Cochain, b: Cochain, hs: HodgeSystem, vertices: np.ndarray) -> np.ndarray:
    """Pointwise ``<a#, b#>`` at ``vertices`` from the vertex values of the Whitney fields."""
    fa = forms.vertex_field(a, hs)[vertices]
    fb = forms.vertex_field(b, hs)[vertices]
    return np.einsum('ij,ij->i', fa, fb)


def bernoulli_head(v: Cochain, params: PhysParams, hs: HodgeSystem, vertices: np.ndarray) -> np.ndarray:
    """``1/2 |v|^2 + g0 y`` at ``vertices``."""
    return 0.5 * nodal_pairing(v, v, hs, vertices) + params.g0 * hs.positions[vertices, 1]


def omega_representative(gradient: np.ndarray, hs: HodgeSystem) -> np.ndarray:
    """Vorticity effort for a gradient over the vorticity values, pinned to zero on the boundary."""
    return elliptic.stream_representative(gradient, hs)


def omega_effort(omega: Cochain, hs: HodgeSystem) -> np.ndarray:
    """Representative of ``*beta``, whose coexact image best fits ``delta N_beta(omega)``."""
    return elliptic.solve_Nbeta(omega, hs).stream.values


def coexact_image(chi: np.ndarray, hs: HodgeSystem) -> np.ndarray:
    """``M1^-1 D1^T K0^T chi``, the coexact field of a vorticity effort."""
    return hs.mass_solve(1, hs.d1.T @ (hs.k0.T @ chi))


def func_derivs_H(state: FlowState, params: PhysParams) -> FunctionalDerivs:
    hs = state.hs
    c = hs.complex
    sigma = c.sigma_vertices
    surface = SurfaceState.build(c, hs.positions)
    v = state.velocity()
    dsigma = bernoulli_head(v, params, hs, sigma) + params.capillarity * surface.curvature
    if state.formulation == consts.FORM_V:
        return FunctionalDerivs(consts.FORM_V, dsigma, dv=v.values.copy())

    phi = state.phi()
    eta = state.coexact()
    dphi = (hs.stiffness @ phi.values)[c.boundary_vertices]
    dsigma = dsigma + (-1) ** (consts.DIM - 1) * nodal_pairing(forms.d(phi), eta, hs, sigma)
    if state.formulation == consts.FORM_ETA:
        return FunctionalDerivs(consts.FORM_ETA, dsigma, dphi=dphi, deta=eta.values.copy())
    return FunctionalDerivs(
        consts.FORM_OMEGA, dsigma, dphi=dphi, domega=omega_effort(state.vorticity(), hs)
    )


# Shape derivatives
def perturb_surface(
    c: SimplicialComplex, positions: np.ndarray, surface: SurfaceState, direction: np.ndarray, h: float
) -> np.ndarray:
    moved = positions.copy()
    moved[surface.vertices] += h * direction[:, None] * surface.normals
    if (signed_areas(moved, c.triangles) <= 0).any():
        raise GeometryError(f'surface perturbation of size {h:.3e} tangles the mesh')
    return moved


def shape_derivative_audit(
    functional: typing.Callable[[np.ndarray], float],
    density: np.ndarray,
    c: SimplicialComplex,
    positions: np.ndarray,
    direction: np.ndarray,
    h: float,
) -> float:
    """
    ``|central FD of functional along direction * N - sum(density * direction * measure)|``
    for a normal displacement of the Sigma vertices.
    """
    surface = SurfaceState.build(c, positions)
    plus = functional(perturb_surface(c, positions, surface, direction, h))
    minus = functional(perturb_surface(c, positions, surface, direction, -h))
    fd = (plus - minus) / (2.0 * h)
    predicted = float(np.sum(density * direction * surface.measure))
    logger.debug('shape derivative: fd %.12e predicted %.12e', fd, predicted)
    return abs(fd - predicted)
