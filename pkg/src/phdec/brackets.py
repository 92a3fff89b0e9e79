# -*- coding: utf-8 -*-
#
# Copyright (c) 2026 The phdec developers
# All rights reserved. Distributed under the BSD 3-Clause license, see LICENSE.
'''
Poisson brackets of the free surface Euler equations in the three variable
sets, their boundary port variants, the derivative maps between the variable
sets and a finite difference Jacobi audit.

Volume terms are quadratic forms with the contraction kernel ``K(d v)``
(see ``HodgeSystem.contraction_kernel``); surface terms pair Sigma densities
with weak boundary fluxes.
'''
import dataclasses
import logging
import typing

import numpy as np
import scipy.sparse as sp

from . import consts, elliptic, energetics, forms
from .energetics import FlowState, FunctionalDerivs
from .errors import FDStepError, FormulationError
from .forms import Cochain, HodgeSystem

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True, eq=False)
class BracketInput:
    state: FlowState
    F: FunctionalDerivs
    G: FunctionalDerivs
    port: bool = False  # integrate the surface term over all of the boundary

    def require(self, formulation: str) -> None:
        for tuple_ in (self.F, self.G):
            if tuple_.formulation != formulation:
                raise FormulationError(
                    f'{formulation} bracket called with {tuple_.formulation} derivatives'
                )


def kernel(state: FlowState) -> sp.csr_matrix:
    """Contraction kernel of the state vorticity, cached on the HodgeSystem."""
    hs = state.hs
    vorticity = state.vorticity().values
    key = vorticity.tobytes()
    cached = hs._cache.get('kernel')
    if cached is not None and cached[0] == key:
        return cached[1]
    k = hs.contraction_kernel(vorticity)
    hs._cache['kernel'] = (key, k)
    return k


def _loads(values: np.ndarray, hs: HodgeSystem) -> np.ndarray:
    return (hs.d0.T @ (hs.m1 @ values))[hs.complex.boundary_vertices]


def _sigma_positions(hs: HodgeSystem) -> np.ndarray:
    c = hs.complex
    return c.boundary_position(c.sigma_vertices)


def boundary_effort(F: FunctionalDerivs, hs: HodgeSystem, correction: typing.Optional[np.ndarray] = None) -> np.ndarray:
    """``Ext(F_Sigma + correction) + F_b`` over the boundary vertices."""
    c = hs.complex
    effort = np.zeros(len(c.boundary_vertices))
    effort[_sigma_positions(hs)] = F.dsigma if correction is None else F.dsigma + correction
    if F.dgamma is not None:
        effort[c.boundary_position(c.gamma_vertices)] += F.dgamma
    return effort


def neumann_gradient(loads: np.ndarray, hs: HodgeSystem) -> np.ndarray:
    """``d N_phi(loads)``."""
    phi = elliptic.solve_Nphi(elliptic.NeumannData(loads, hs.complex), hs)
    return hs.d0 @ phi.values


def surface_correction(dphi: np.ndarray, eta: Cochain, hs: HodgeSystem) -> np.ndarray:
    """``(-1)^n <d N_phi(dphi), eta>`` at the Sigma vertices."""
    if not dphi.any() or not eta.values.any():
        return np.zeros(len(hs.complex.sigma_vertices))
    grad = Cochain(1, neumann_gradient(dphi, hs), hs.complex)
    return (-1) ** consts.DIM * energetics.nodal_pairing(grad, eta, hs, hs.complex.sigma_vertices)


def _surface_term(
    e_f: np.ndarray, e_g: np.ndarray, flux_f: np.ndarray, flux_g: np.ndarray
) -> float:
    return float(e_f @ flux_g - e_g @ flux_f)


def bracket_vS(inp: BracketInput) -> float:
    inp.require(consts.FORM_V)
    hs = inp.state.hs
    F, G = inp.F, inp.G
    assert F.dv is not None and G.dv is not None
    volume = float(F.dv @ (kernel(inp.state) @ G.dv))
    flux_f, flux_g = _loads(F.dv, hs), _loads(G.dv, hs)
    if inp.port:
        return volume + _surface_term(boundary_effort(F, hs), boundary_effort(G, hs), flux_f, flux_g)
    sigma = _sigma_positions(hs)
    return volume + _surface_term(F.dsigma, G.dsigma, flux_f[sigma], flux_g[sigma])


def _split_bracket(inp: BracketInput, volume_f: np.ndarray, volume_g: np.ndarray, eta: Cochain) -> float:
    """Shared (eta, phi, Sigma) and (omega, phi, Sigma) evaluation."""
    hs = inp.state.hs
    F, G = inp.F, inp.G
    assert F.dphi is not None and G.dphi is not None
    u_f = volume_f + (neumann_gradient(F.dphi, hs) if F.dphi.any() else 0.0)
    u_g = volume_g + (neumann_gradient(G.dphi, hs) if G.dphi.any() else 0.0)
    volume = float(u_f @ (kernel(inp.state) @ u_g))
    c_f = surface_correction(F.dphi, eta, hs)
    c_g = surface_correction(G.dphi, eta, hs)
    if inp.port:
        return volume + _surface_term(
            boundary_effort(F, hs, c_f), boundary_effort(G, hs, c_g), F.dphi, G.dphi
        )
    sigma = _sigma_positions(hs)
    return volume + _surface_term(F.dsigma + c_f, G.dsigma + c_g, F.dphi[sigma], G.dphi[sigma])


def bracket_eta(inp: BracketInput) -> float:
    inp.require(consts.FORM_ETA)
    assert inp.F.deta is not None and inp.G.deta is not None
    return _split_bracket(inp, inp.F.deta, inp.G.deta, inp.state.coexact())


def bracket_omega(inp: BracketInput) -> float:
    inp.require(consts.FORM_OMEGA)
    hs = inp.state.hs
    assert inp.F.domega is not None and inp.G.domega is not None
    return _split_bracket(
        inp,
        energetics.coexact_image(inp.F.domega, hs),
        energetics.coexact_image(inp.G.domega, hs),
        inp.state.coexact(),
    )


BRACKETS: typing.Final[typing.Mapping[str, typing.Callable[[BracketInput], float]]] = {
    consts.FORM_V: bracket_vS,
    consts.FORM_ETA: bracket_eta,
    consts.FORM_OMEGA: bracket_omega,
}


def bracket(state: FlowState, F: FunctionalDerivs, G: FunctionalDerivs, port: bool = False) -> float:
    return BRACKETS[F.formulation](BracketInput(state, F, G, port))


# Derivative maps between the variable sets
def _lift_transpose(w: np.ndarray, hs: HodgeSystem) -> np.ndarray:
    """Transpose of the harmonic extension, restricted to the boundary vertices."""
    c = hs.complex
    interior, boundary = c.interior_vertices, c.boundary_vertices
    out = w[boundary].copy()
    if interior.size:
        z = elliptic._dirichlet_factor(hs, interior).solve(w[interior])
        out -= hs.stiffness[interior][:, boundary].T @ z
    return out


def derivs_v_to_eta(F: FunctionalDerivs, state: FlowState) -> FunctionalDerivs:
    """Derivatives of ``F(d phi + eta, Sigma)`` with respect to ``(eta, phi_boundary, Sigma)``."""
    if F.formulation != consts.FORM_V or F.dv is None:
        raise FormulationError('expected velocity derivatives')
    hs = state.hs
    dv = Cochain(1, F.dv, hs.complex)
    deta = elliptic.p_coexact(dv, hs).values
    dphi = _lift_transpose(hs.d0.T @ (hs.m1 @ F.dv), hs)
    dsigma = F.dsigma - surface_correction(dphi, state.coexact(), hs)
    return FunctionalDerivs(consts.FORM_ETA, dsigma, dphi=dphi, deta=deta, dgamma=F.dgamma)


def derivs_eta_to_v(F: FunctionalDerivs, state: FlowState) -> FunctionalDerivs:
    if F.formulation != consts.FORM_ETA or F.deta is None or F.dphi is None:
        raise FormulationError('expected (eta, phi, Sigma) derivatives')
    hs = state.hs
    dv = F.deta + (neumann_gradient(F.dphi, hs) if F.dphi.any() else 0.0)
    dsigma = F.dsigma + surface_correction(F.dphi, state.coexact(), hs)
    return FunctionalDerivs(consts.FORM_V, dsigma, dv=dv, dgamma=F.dgamma)


def derivs_omega_to_eta(F: FunctionalDerivs, state: FlowState) -> FunctionalDerivs:
    if F.formulation != consts.FORM_OMEGA or F.domega is None:
        raise FormulationError('expected (omega, phi, Sigma) derivatives')
    return FunctionalDerivs(
        consts.FORM_ETA,
        F.dsigma,
        dphi=F.dphi,
        deta=energetics.coexact_image(F.domega, state.hs),
        dgamma=F.dgamma,
    )


# Jacobi audit
def _check_step(h: float, scale: float) -> None:
    if not np.isfinite(h) or h <= 0:
        raise FDStepError(f'finite difference step must be positive, got {h}')
    if h <= np.finfo(float).eps * max(1.0, scale):
        raise FDStepError(f'finite difference step {h:.3e} underflows against state scale {scale:.3e}')


def _central_gradient(
    fn: typing.Callable[[np.ndarray], float], x: np.ndarray, h: float
) -> np.ndarray:
    grad = np.zeros_like(x)
    for j in range(x.size):
        plus = x.copy()
        minus = x.copy()
        plus[j] += h
        minus[j] -= h
        grad[j] = (fn(plus) - fn(minus)) / (2.0 * h)
    return grad


def _shape_gradient(
    state: FlowState, F: FunctionalDerivs, G: FunctionalDerivs, h: float
) -> np.ndarray:
    """
    Sigma density of ``d{F, G}`` from normal displacements of each Sigma vertex.
    Cochain values are carried over unchanged to the moved mesh.
    """
    hs = state.hs
    c = hs.complex
    surface = energetics.SurfaceState.build(c, hs.positions)
    _check_step(h, float(np.abs(hs.positions).max()))
    positions = np.array(hs.positions)
    grad = np.zeros(len(surface.vertices))
    for j in range(grad.size):
        direction = np.zeros(grad.size)
        direction[j] = 1.0
        values = [
            bracket(
                dataclasses.replace(
                    state, hs=hs.deformed(energetics.perturb_surface(c, positions, surface, direction, step))
                ),
                F,
                G,
            )
            for step in (h, -h)
        ]
        grad[j] = (values[0] - values[1]) / (2.0 * h)
    return grad / surface.measure


def bracket_derivative(
    state: FlowState, F: FunctionalDerivs, G: FunctionalDerivs, h: float, shape: bool = False
) -> FunctionalDerivs:
    """
    Derivative tuple of the state functional ``{F, G}`` by central differences
    over every state entry. Sigma is frozen unless ``shape`` is set, then its
    slot holds the density of the derivative along the vertex normals.
    """
    hs = state.hs
    c = hs.complex
    if shape and c.sigma_vertices.size:
        dsigma = _shape_gradient(state, F, G, h)
    else:
        dsigma = np.zeros(len(c.sigma_vertices))

    if state.formulation == consts.FORM_V:
        assert state.v is not None

        def value_v(x: np.ndarray) -> float:
            v = elliptic.solenoidal_projection(Cochain(1, x, c), hs)
            return bracket(FlowState.from_velocity(v, hs), F, G)

        _check_step(h, float(np.abs(state.v.values).max(initial=0.0)))
        grad = _central_gradient(value_v, state.v.values.copy(), h)
        dv = elliptic.solenoidal_projection(Cochain(1, hs.mass_solve(1, grad), c), hs)
        return FunctionalDerivs(consts.FORM_V, dsigma, dv=dv.values)

    assert state.phi_boundary is not None
    phi_b = state.phi_boundary
    if state.formulation == consts.FORM_ETA:
        assert state.eta is not None
        eta = state.eta.values

        def value_eta(x: np.ndarray) -> float:
            return bracket(FlowState(consts.FORM_ETA, hs, eta=Cochain(1, x, c), phi_boundary=phi_b), F, G)

        def value_phi_eta(x: np.ndarray) -> float:
            return bracket(FlowState(consts.FORM_ETA, hs, eta=state.eta, phi_boundary=x), F, G)

        _check_step(h, float(np.abs(eta).max(initial=0.0)))
        grad = _central_gradient(value_eta, eta.copy(), h)
        deta = elliptic.p_coexact(Cochain(1, hs.mass_solve(1, grad), c), hs)
        dphi = _central_gradient(value_phi_eta, phi_b.copy(), h)
        return FunctionalDerivs(consts.FORM_ETA, dsigma, dphi=dphi, deta=deta.values)

    assert state.omega is not None
    omega = state.omega.values

    def value_omega(x: np.ndarray) -> float:
        return bracket(FlowState(consts.FORM_OMEGA, hs, omega=Cochain(2, x, c), phi_boundary=phi_b), F, G)

    def value_phi_omega(x: np.ndarray) -> float:
        return bracket(FlowState(consts.FORM_OMEGA, hs, omega=state.omega, phi_boundary=x), F, G)

    _check_step(h, float(np.abs(omega).max(initial=0.0)))
    grad = _central_gradient(value_omega, omega.copy(), h)
    dphi = _central_gradient(value_phi_omega, phi_b.copy(), h)
    return FunctionalDerivs(
        consts.FORM_OMEGA, dsigma, dphi=dphi, domega=energetics.omega_representative(grad, hs)
    )


def jacobi_terms(
    state: FlowState,
    F: FunctionalDerivs,
    G: FunctionalDerivs,
    K: FunctionalDerivs,
    h: float,
    shape: bool = False,
) -> typing.Tuple[float, float, float]:
    """``({F,{G,K}}, {G,{K,F}}, {K,{F,G}})`` for linear functionals with fixed derivative tuples."""
    for tuple_ in (F, G, K):
        if tuple_.formulation != state.formulation:
            raise FormulationError(f'{tuple_.formulation} derivatives on a {state.formulation} state')
    return (
        bracket(state, F, bracket_derivative(state, G, K, h, shape)),
        bracket(state, G, bracket_derivative(state, K, F, h, shape)),
        bracket(state, K, bracket_derivative(state, F, G, h, shape)),
    )


def jacobi_fd_test(
    state: FlowState,
    F: FunctionalDerivs,
    G: FunctionalDerivs,
    K: FunctionalDerivs,
    h: float,
    shape: bool = False,
) -> float:
    """``|{F,{G,K}} + {G,{K,F}} + {K,{F,G}}|``."""
    total = sum(jacobi_terms(state, F, G, K, h, shape))
    logger.debug('Jacobi residual %.3e (h = %.1e, shape = %s)', total, h, shape)
    return abs(total)
