# -*- coding: utf-8 -*-
#
# Copyright (c) 2026 The phdec developers
# All rights reserved. Distributed under the BSD 3-Clause license, see LICENSE.
'''
Elliptic solves: Neumann and Dirichlet Laplace problems, the potential
``beta`` of the coexact component and the discrete Hodge decomposition.

Boundary fluxes are weak: one load per boundary vertex, ``F_i = int_dOmega g psi_i``.
'''
import dataclasses
import logging
import typing

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse import linalg as spla

from . import consts, forms
from .complex import SimplicialComplex, betti_numbers
from .errors import CompatibilityError, PreconditionError, SolverError, TopologyError
from .forms import Cochain, HodgeSystem

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True, eq=False)
class NeumannData:
    """Weak outward flux, one load per vertex of ``complex.boundary_vertices``."""

    loads: np.ndarray
    complex: SimplicialComplex = dataclasses.field(repr=False)

    def __post_init__(self) -> None:
        loads = np.array(self.loads, dtype=float).reshape(-1)
        if loads.size != len(self.complex.boundary_vertices):
            raise SolverError(f'expected {len(self.complex.boundary_vertices)} boundary loads, got {loads.size}')
        object.__setattr__(self, 'loads', loads)

    @property
    def sigma_mask(self) -> np.ndarray:
        return np.isin(self.complex.boundary_vertices, self.complex.sigma_vertices)

    @property
    def gamma_mask(self) -> np.ndarray:
        return np.isin(self.complex.boundary_vertices, self.complex.gamma_vertices)

    def full(self) -> np.ndarray:
        """Loads as a vertex vector, zero in the interior."""
        out = np.zeros(self.complex.n_vertices)
        out[self.complex.boundary_vertices] = self.loads
        return out

    def net_flux(self) -> float:
        return float(self.loads.sum())

    def check_compatible(self) -> None:
        scale = max(1.0, float(np.abs(self.loads).sum()))
        if abs(self.net_flux()) > consts.TOL_COMPATIBILITY * scale:
            raise CompatibilityError(f'Neumann data has net flux {self.net_flux():.3e}')

    @staticmethod
    def from_edge_flux(flux: np.ndarray, hs: HodgeSystem) -> 'NeumannData':
        """Per boundary edge fluxes, split half and half between the end points."""
        c = hs.complex
        geo = hs.boundary_geometry
        full = np.zeros(c.n_vertices)
        np.add.at(full, geo['start'], 0.5 * flux)
        np.add.at(full, geo['end'], 0.5 * flux)
        return NeumannData(full[c.boundary_vertices], c)

    @staticmethod
    def from_field(v: Cochain, hs: HodgeSystem) -> 'NeumannData':
        return NeumannData(forms.flux_loads(v, hs), hs.complex)

    @staticmethod
    def from_function(grad: forms.Field, hs: HodgeSystem) -> 'NeumannData':
        """Loads of ``dn phi`` for an analytic gradient, Gauss quadrature on every boundary edge."""
        c = hs.complex
        geo = hs.boundary_geometry
        start = hs.positions[geo['start']]
        tangent = hs.positions[geo['end']] - start
        s, w = forms._edge_gauss()
        full = np.zeros(c.n_vertices)
        for sk, wk in zip(s, w):
            pts = start + sk * tangent
            gx, gy = grad(pts[:, 0], pts[:, 1])
            dn = (gx * geo['normal'][:, 0] + gy * geo['normal'][:, 1]) * geo['length'] * wk
            np.add.at(full, geo['start'], (1.0 - sk) * dn)
            np.add.at(full, geo['end'], sk * dn)
        return NeumannData(full[c.boundary_vertices], c)


# Neumann problem
def _neumann_factor(hs: HodgeSystem) -> typing.Any:
    solver = hs._solvers.get('neumann')
    if solver is None:
        n = hs.complex.n_vertices
        m = hs.m0 @ np.ones(n)
        saddle = sp.bmat([[hs.stiffness, sp.csc_matrix(m[:, None])], [sp.csc_matrix(m[None, :]), None]]).tocsc()
        try:
            solver = spla.splu(saddle)
        except RuntimeError as e:
            logger.warning('Neumann saddle factorization failed (%s), using CG', e)
            solver = False
        hs._solvers['neumann'] = solver
    return solver


def _neumann_cg(rhs: np.ndarray, hs: HodgeSystem) -> np.ndarray:
    m = hs.m0 @ np.ones(hs.complex.n_vertices)
    op = spla.LinearOperator(hs.stiffness.shape, matvec=lambda x: hs.stiffness @ x + m * (m @ x), dtype=float)
    x, info = spla.cg(op, rhs, rtol=consts.TOL_CG, maxiter=20 * len(rhs))
    if info != 0:
        raise SolverError(f'CG did not converge (info {info})')
    return x


def neumann_solve(rhs: np.ndarray, hs: HodgeSystem) -> np.ndarray:
    """
    ``S x = rhs`` with ``sum(M0 x) = 0``, ``S`` the P1 stiffness matrix.

    A net load in ``rhs`` is absorbed by the mean value multiplier, so the map
    is the symmetric pseudo inverse of ``S`` on any right hand side.
    """
    n = hs.complex.n_vertices
    solver = _neumann_factor(hs)
    if solver is False:
        return _neumann_cg(rhs, hs)
    x = solver.solve(np.concatenate([rhs, [0.0]]))
    if not np.all(np.isfinite(x)):
        raise SolverError('Neumann solve produced non finite values')
    return x[:n]


def solve_Nphi(data: NeumannData, hs: HodgeSystem) -> Cochain:
    """Harmonic ``phi`` with normal derivative ``data`` and zero mean."""
    data.check_compatible()
    return Cochain(0, neumann_solve(data.full(), hs), hs.complex)


def gradient_potential(v: Cochain, hs: HodgeSystem) -> Cochain:
    """Zero mean ``phi`` minimizing ``|v - d phi|`` in the M1 norm."""
    return Cochain(0, neumann_solve(forms.weak_divergence(v, hs), hs), hs.complex)


# Dirichlet problems
def _dirichlet_factor(hs: HodgeSystem, free: np.ndarray) -> typing.Any:
    key = ('dirichlet', free.tobytes())
    solver = hs._solvers.get(key)
    if solver is None:
        block = hs.stiffness[free][:, free].tocsc()
        try:
            solver = spla.splu(block)
        except RuntimeError as e:
            raise SolverError(f'Dirichlet factorization failed: {e}') from None
        hs._solvers[key] = solver
    return solver


def mixed_solve(
    hs: HodgeSystem,
    dirichlet: np.ndarray,
    values: np.ndarray,
    loads: np.ndarray,
) -> Cochain:
    """
    ``S u = loads`` on the vertices outside ``dirichlet``, ``u = values`` on ``dirichlet``.

    ``loads`` is a full vertex vector. Without Dirichlet vertices the problem is
    pure Neumann and the loads must sum to zero.
    """
    c = hs.complex
    if len(dirichlet) == 0:
        scale = max(1.0, float(np.abs(loads).sum()))
        if abs(float(loads.sum())) > consts.TOL_COMPATIBILITY * scale:
            raise CompatibilityError(f'pure Neumann loads have net flux {loads.sum():.3e}')
        return Cochain(0, neumann_solve(loads, hs), c)
    u = np.zeros(c.n_vertices)
    u[dirichlet] = values
    free = np.setdiff1d(np.arange(c.n_vertices), dirichlet)
    if free.size:
        rhs = loads[free] - hs.stiffness[free][:, dirichlet] @ np.asarray(values, dtype=float)
        u[free] = _dirichlet_factor(hs, free).solve(rhs)
    return Cochain(0, u, c)


def harmonic_lift(boundary_values: np.ndarray, hs: HodgeSystem) -> Cochain:
    """Discrete harmonic extension of values on ``boundary_vertices``."""
    c = hs.complex
    return mixed_solve(hs, c.boundary_vertices, boundary_values, np.zeros(c.n_vertices))


def extend_by_zero(values: np.ndarray, indices: np.ndarray, size: int) -> np.ndarray:
    out = np.zeros(size)
    out[indices] = values
    return out


# Coexact potentials
def _beta_factor(hs: HodgeSystem) -> typing.Tuple[typing.Any, np.ndarray]:
    cached = hs._cache.get('nbeta')
    if cached is None:
        d1t = hs.d1.T.toarray()
        m1_inv_d1t = hs.mass_solve(1, d1t)
        laplace = hs.d1 @ m1_inv_d1t
        try:
            factor = scipy.linalg.cho_factor(laplace)
        except np.linalg.LinAlgError:
            raise SolverError('coexact Laplacian is not positive definite (closed component?)') from None
        cached = (factor, m1_inv_d1t)
        hs._cache['nbeta'] = cached
    return cached


def _stream_factor(hs: HodgeSystem) -> typing.Any:
    cached = hs._cache.get('stream')
    if cached is None:
        _factor, m1_inv_d1t = _beta_factor(hs)
        interior = hs.complex.interior_vertices
        k0i = hs.k0[interior].toarray()
        laplace = hs.d1 @ m1_inv_d1t
        try:
            cached = (scipy.linalg.cho_factor(k0i @ laplace @ k0i.T), k0i, laplace)
        except np.linalg.LinAlgError:
            raise SolverError('stream function system is singular') from None
        hs._cache['stream'] = cached
    return cached


def stream_representative(density: np.ndarray, hs: HodgeSystem) -> np.ndarray:
    """
    0-cochain ``chi``, zero on the boundary, with ``K0^T chi`` closest to a
    density over the triangles. The misfit is measured in the norm induced on
    coexact fields, ``D1 M1^-1 D1^T``.
    """
    c = hs.complex
    chi = np.zeros(c.n_vertices)
    if c.interior_vertices.size == 0:
        return chi
    factor, k0i, laplace = _stream_factor(hs)
    chi[c.interior_vertices] = scipy.linalg.cho_solve(factor, k0i @ (laplace @ density))
    return chi


@dataclasses.dataclass(frozen=True, eq=False)
class CoexactPotential:
    beta: Cochain  # 2-cochain
    eta: Cochain  # delta beta, 1-cochain
    dual: np.ndarray  # M2 beta
    stream: Cochain  # *beta, pinned to zero on the boundary

    def boundary_star(self, hs: HodgeSystem) -> np.ndarray:
        """Boundary values of the representative of ``*beta``."""
        return self.stream.values[hs.complex.boundary_vertices]

    def boundary_flux(self, hs: HodgeSystem) -> np.ndarray:
        """Weak normal trace of ``delta beta``, one load per boundary vertex."""
        return forms.flux_loads(self.eta, hs)


def solve_Nbeta(omega: Cochain, hs: HodgeSystem) -> CoexactPotential:
    """
    ``beta`` with ``d delta beta = omega``; ``delta beta`` is M1 orthogonal to
    every gradient, boundary ones included, so its weak normal trace vanishes.
    """
    factor, m1_inv_d1t = _beta_factor(hs)
    y = scipy.linalg.cho_solve(factor, omega.values)
    eta = m1_inv_d1t @ y
    c = hs.complex
    stream = Cochain(0, stream_representative(y, hs), c)
    return CoexactPotential(Cochain(2, hs.areas * y, c), Cochain(1, eta, c), y, stream)


def p_coexact(v: Cochain, hs: HodgeSystem) -> Cochain:
    """Coexact component of ``v``: ``delta N_beta(d v)``."""
    return solve_Nbeta(forms.d(v), hs).eta


def solenoidal_projection(w: Cochain, hs: HodgeSystem) -> Cochain:
    """
    Removes the interior weak divergence of ``w`` with a gradient of a function
    vanishing on the boundary. Idempotent.
    """
    c = hs.complex
    interior = c.interior_vertices
    if interior.size == 0:
        return w
    rhs = forms.weak_divergence(w, hs)[interior]
    psi = np.zeros(c.n_vertices)
    psi[interior] = _dirichlet_factor(hs, interior).solve(rhs)
    return Cochain(1, w.values - hs.d0 @ psi, c)


@dataclasses.dataclass(frozen=True, eq=False)
class HodgeDecomposition:
    exact: Cochain  # d phi
    coexact: Cochain  # delta beta
    harmonic: Cochain
    phi: Cochain
    beta: Cochain

    def orthogonality(self, hs: HodgeSystem) -> float:
        """
        Largest M1 pairing between two of the three components, relative to
        the squared norm of their sum.
        """
        parts = (self.exact, self.coexact, self.harmonic)
        scale = max(sum(max(forms.inner(p, p, hs), 0.0) for p in parts), 1e-300)
        worst = 0.0
        for i in range(3):
            for j in range(i + 1, 3):
                worst = max(worst, abs(forms.inner(parts[i], parts[j], hs)) / scale)
        return worst


def hodge_decompose(v: Cochain, hs: HodgeSystem) -> HodgeDecomposition:
    """``v = d phi + delta beta + alpha`` for a solenoidal ``v`` on a simply connected domain."""
    _b0, b1 = betti_numbers(hs.complex)
    if b1 != 0:
        raise TopologyError(f'Hodge decomposition needs b1 = 0, mesh has b1 = {b1}')
    residual = forms.divergence_residual(v, hs)
    if residual > consts.TOL_SOLENOIDAL:
        raise PreconditionError('field is not solenoidal', residual)
    phi = solve_Nphi(NeumannData.from_field(v, hs), hs)
    exact = forms.d(phi)
    potential = solve_Nbeta(forms.d(v), hs)
    harmonic = v - exact - potential.eta
    logger.debug('Hodge decomposition: |alpha| = %.3e', harmonic.norm())
    return HodgeDecomposition(exact, potential.eta, harmonic, phi, potential.beta)
