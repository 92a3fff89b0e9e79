# -*- coding: utf-8 -*-
#
# Copyright (c) 2026 The phdec developers
# All rights reserved. Distributed under the BSD 3-Clause license, see LICENSE.
'''
Flow/effort spaces, the three Dirac structure maps with boundary ports and the
audits built on them.

Slot layout of a tuple (efforts and flows share it):

* ``volume``: 1-cochain (velocity and eta maps) or 0-cochain (vorticity map)
* ``phi``: one value per boundary vertex (absent in the velocity map)
* ``sigma``: one value per Sigma vertex
* ``port``: one value per Gamma vertex

Efforts on Sigma are densities, flows on Sigma are weak fluxes, so boundary
pairings are plain dot products.
'''
import dataclasses
import logging
import typing

import numpy as np
import scipy.linalg

from . import consts, elliptic, energetics, forms
from .brackets import bracket, kernel, neumann_gradient
from .energetics import FlowState
from .errors import FormulationError, PreconditionError, SolverError
from .forms import Cochain, HodgeSystem

logger = logging.getLogger(__name__)

LIFT_HARMONIC: typing.Final[str] = 'harmonic'
LIFT_ZERO: typing.Final[str] = 'zero'


@dataclasses.dataclass(frozen=True, eq=False)
class Slots:
    volume: np.ndarray
    sigma: np.ndarray
    port: np.ndarray
    phi: typing.Optional[np.ndarray] = None

    def arrays(self) -> typing.Tuple[np.ndarray, ...]:
        return tuple(a for a in (self.volume, self.phi, self.sigma, self.port) if a is not None)


EffortTuple = Slots
FlowTuple = Slots


@dataclasses.dataclass(frozen=True, eq=False)
class DiracTuple:
    formulation: str
    state: FlowState = dataclasses.field(repr=False)
    flows: FlowTuple
    efforts: EffortTuple
    recovery_residual: float = 0.0


def zero_efforts(formulation: str, hs: HodgeSystem) -> EffortTuple:
    c = hs.complex
    volume = np.zeros(c.n_vertices if formulation == consts.FORM_OMEGA else c.n_edges)
    phi = None if formulation == consts.FORM_V else np.zeros(len(c.boundary_vertices))
    return Slots(volume, np.zeros(len(c.sigma_vertices)), np.zeros(len(c.gamma_vertices)), phi)


def _volume_pairing(formulation: str, e: np.ndarray, f: np.ndarray, hs: HodgeSystem) -> float:
    if formulation == consts.FORM_OMEGA:
        return float(e @ (hs.k0 @ f))
    return float(e @ (hs.m1 @ f))


def _pairing(formulation: str, e: EffortTuple, f: FlowTuple, hs: HodgeSystem) -> float:
    total = _volume_pairing(formulation, e.volume, f.volume, hs)
    if e.phi is not None and f.phi is not None:
        total += float(e.phi @ f.phi)
    return total + float(e.sigma @ f.sigma) + float(e.port @ f.port)


def bilinear_form(t1: DiracTuple, t2: DiracTuple) -> float:
    """Symmetric pairing ``<e1, f2> + <e2, f1>`` summed over all slots."""
    if t1.formulation != t2.formulation:
        raise FormulationError(f'cannot pair {t1.formulation} and {t2.formulation} tuples')
    if t1.state.hs is not t2.state.hs:
        raise FormulationError('tuples evaluated on different geometries')
    hs = t1.state.hs
    return _pairing(t1.formulation, t1.efforts, t2.flows, hs) + _pairing(t1.formulation, t2.efforts, t1.flows, hs)


def power_balance(t: DiracTuple) -> typing.Tuple[float, float]:
    """(interior, port) power of a tuple. ``interior + port`` vanishes on the structure."""
    hs = t.state.hs
    e, f = t.efforts, t.flows
    interior = _volume_pairing(t.formulation, e.volume, f.volume, hs) + float(e.sigma @ f.sigma)
    if e.phi is not None and f.phi is not None:
        interior += float(e.phi @ f.phi)
    return interior, float(e.port @ f.port)


def _boundary_values(sigma: np.ndarray, port: np.ndarray, hs: HodgeSystem) -> np.ndarray:
    """``Ext(sigma) + port`` over the boundary vertices."""
    c = hs.complex
    out = np.zeros(len(c.boundary_vertices))
    out[c.boundary_position(c.sigma_vertices)] = sigma
    out[c.boundary_position(c.gamma_vertices)] += port
    return out


def lift(boundary: np.ndarray, hs: HodgeSystem, lifting: str = LIFT_HARMONIC) -> np.ndarray:
    c = hs.complex
    if lifting == LIFT_HARMONIC:
        return elliptic.harmonic_lift(boundary, hs).values
    if lifting == LIFT_ZERO:
        return elliptic.extend_by_zero(boundary, c.boundary_vertices, c.n_vertices)
    raise ValueError(f'unknown lifting {lifting}')


# Velocity formulation
def d1_map(e: EffortTuple, state: FlowState, lifting: str = LIFT_HARMONIC) -> DiracTuple:
    """
    ``f_v = d li(Ext(e_Sigma) + e_b) + i_{e_v#} dv``, ``f_Sigma = -flux(e_v)|Sigma``,
    ``f_b = -flux(e_v)|Gamma``. ``e_v`` must be solenoidal.
    """
    hs = state.hs
    c = hs.complex
    e_v = Cochain(1, e.volume, c)
    forms.require_solenoidal(e_v, hs, 'volume effort')
    potential = lift(_boundary_values(e.sigma, e.port, hs), hs, lifting)
    f_v = hs.d0 @ potential + hs.mass_solve(1, kernel(state).T @ e.volume)
    loads = forms.weak_divergence(e_v, hs)
    flows = Slots(f_v, -loads[c.sigma_vertices], -loads[c.gamma_vertices])
    return DiracTuple(consts.FORM_V, state, flows, e)


# Potential split and vorticity formulations
def _surface_operator(eta: Cochain, hs: HodgeSystem) -> np.ndarray:
    """Dense (S, N) map ``psi -> <d psi, eta>`` at the Sigma vertices."""
    c = hs.complex
    qx, qy = hs.vertex_operators
    field = forms.vertex_field(eta, hs)[c.sigma_vertices]
    gx = (qx @ hs.d0)[c.sigma_vertices].toarray()
    gy = (qy @ hs.d0)[c.sigma_vertices].toarray()
    return field[:, 0, None] * gx + field[:, 1, None] * gy


def _split_map(formulation: str, e: EffortTuple, e_eta: np.ndarray, state: FlowState) -> DiracTuple:
    hs = state.hs
    c = hs.complex
    assert e.phi is not None
    loads = e.phi
    if abs(loads.sum()) > consts.TOL_COMPATIBILITY * max(1.0, float(np.abs(loads).sum())):
        raise PreconditionError('phi effort has net flux', float(loads.sum()))
    eta = state.coexact()
    divergence = hs.d0.T @ (hs.m1 @ e_eta)
    residual = float(np.linalg.norm(divergence)) / max(1.0, float(np.linalg.norm(e_eta)))
    if residual > consts.TOL_SOLENOIDAL:
        raise PreconditionError('volume effort is not coexact', residual)

    u = e_eta + (neumann_gradient(loads, hs) if loads.any() else 0.0)
    w = hs.mass_solve(1, kernel(state).T @ u)
    rhs = hs.d0.T @ (hs.m1 @ w)
    phi_w = elliptic.neumann_solve(rhs, hs)
    recovery = float(np.linalg.norm(hs.stiffness @ phi_w - rhs) / max(1.0, float(np.linalg.norm(rhs))))
    if recovery > consts.TOL_RECOVERY:
        raise SolverError(f'phi flow recovery residual {recovery:.3e}')
    f_eta = w - hs.d0 @ phi_w

    surface = _surface_operator(eta, hs)
    sign = (-1) ** consts.DIM
    full_loads = elliptic.extend_by_zero(loads, c.boundary_vertices, c.n_vertices)
    correction = sign * surface @ (elliptic.neumann_solve(full_loads, hs) if loads.any() else full_loads)
    sigma_pos = c.boundary_position(c.sigma_vertices)
    adjoint = elliptic.neumann_solve(surface.T @ loads[sigma_pos], hs)[c.boundary_vertices]
    f_phi = (
        phi_w[c.boundary_vertices]
        + _boundary_values(e.sigma + correction, e.port, hs)
        - sign * adjoint
    )
    flows = Slots(
        f_eta,
        -loads[sigma_pos],
        -loads[c.boundary_position(c.gamma_vertices)],
        f_phi,
    )
    if formulation == consts.FORM_OMEGA:
        flows = dataclasses.replace(flows, volume=hs.d1 @ f_eta)
    curl_defect = float(np.linalg.norm(f_eta - elliptic.p_coexact(Cochain(1, w, c), hs).values))
    logger.debug('%s map: recovery %.3e, curl defect %.3e', formulation, recovery, curl_defect)
    return DiracTuple(formulation, state, flows, e, recovery)


def d2_map(e: EffortTuple, state: FlowState) -> DiracTuple:
    """
    ``f_eta = P_coexact(i_{U#} d eta)`` with ``U = e_eta + d N_phi(e_phi)``; the
    phi flow is the boundary trace of the gradient part plus the lifted surface
    efforts; ``f_Sigma = -e_phi|Sigma``, ``f_b = -e_phi|Gamma``.
    """
    return _split_map(consts.FORM_ETA, e, e.volume, state)


def d3_map(e: EffortTuple, state: FlowState) -> DiracTuple:
    """As ``d2_map`` with ``e_eta`` the coexact image of ``e_omega`` and ``f_omega = d f_eta``."""
    c = state.hs.complex
    if np.abs(e.volume[c.boundary_vertices]).max(initial=0.0) > 0:
        raise PreconditionError('vorticity effort must vanish on the boundary', float(np.abs(e.volume[c.boundary_vertices]).max()))
    return _split_map(consts.FORM_OMEGA, e, energetics.coexact_image(e.volume, state.hs), state)


DIRAC_MAPS: typing.Final[typing.Mapping[str, typing.Callable[[EffortTuple, FlowState], DiracTuple]]] = {
    consts.FORM_V: d1_map,
    consts.FORM_ETA: d2_map,
    consts.FORM_OMEGA: d3_map,
}


def effort_from_derivs(F: energetics.FunctionalDerivs, hs: HodgeSystem) -> EffortTuple:
    c = hs.complex
    port = F.dgamma if F.dgamma is not None else np.zeros(len(c.gamma_vertices))
    if F.formulation == consts.FORM_V:
        assert F.dv is not None
        return Slots(F.dv, F.dsigma, port)
    volume = F.deta if F.formulation == consts.FORM_ETA else F.domega
    assert volume is not None
    return Slots(volume, F.dsigma, port, F.dphi)


def chain_rule_residual(state: FlowState, F: energetics.FunctionalDerivs, H: energetics.FunctionalDerivs) -> float:
    """``|<e_F, f(e_H)> + {F, H}_port|`` relative to the bracket magnitude."""
    hs = state.hs
    t = DIRAC_MAPS[state.formulation](effort_from_derivs(H, hs), state)
    pairing = _pairing(state.formulation, effort_from_derivs(F, hs), t.flows, hs)
    value = bracket(state, F, H, port=True)
    return abs(pairing + value) / max(1.0, abs(value))


# Effort parameterization and audits
@dataclasses.dataclass(frozen=True, eq=False)
class EffortBasis:
    """Linear parameterization of the admissible efforts of one formulation."""

    volume: np.ndarray  # (volume size, p)
    phi: typing.Optional[np.ndarray]
    sigma: np.ndarray
    port: np.ndarray

    @property
    def size(self) -> int:
        return self.volume.shape[1]

    def effort(self, x: np.ndarray) -> EffortTuple:
        return Slots(
            self.volume @ x,
            self.sigma @ x,
            self.port @ x,
            None if self.phi is None else self.phi @ x,
        )


def _blocks(sizes: typing.Sequence[int]) -> typing.List[np.ndarray]:
    """Identity blocks placing each slot parameter in its own column range."""
    total = sum(sizes)
    out: typing.List[np.ndarray] = []
    start = 0
    for size in sizes:
        block = np.zeros((size, total))
        block[:, start : start + size] = np.eye(size)
        out.append(block)
        start += size
    return out


def effort_basis(formulation: str, hs: HodgeSystem) -> EffortBasis:
    c = hs.complex
    n_sigma, n_gamma = len(c.sigma_vertices), len(c.gamma_vertices)
    if formulation == consts.FORM_V:
        constraint = (hs.d0.T @ hs.m1)[c.interior_vertices].toarray()
        solenoidal = scipy.linalg.null_space(constraint) if constraint.size else np.eye(c.n_edges)
        b_vol, b_sigma, b_port = _blocks((solenoidal.shape[1], n_sigma, n_gamma))
        return EffortBasis(solenoidal @ b_vol, None, b_sigma, b_port)

    zero_sum = scipy.linalg.null_space(np.ones((1, len(c.boundary_vertices))))
    if formulation == consts.FORM_ETA:
        volume = hs.mass_solve(1, hs.d1.T.toarray())
    elif formulation == consts.FORM_OMEGA:
        # zero trace vorticity efforts
        volume = np.zeros((c.n_vertices, len(c.interior_vertices)))
        volume[c.interior_vertices, np.arange(len(c.interior_vertices))] = 1.0
    else:
        raise FormulationError(f'unknown formulation {formulation}')
    b_vol, b_phi, b_sigma, b_port = _blocks((volume.shape[1], zero_sum.shape[1], n_sigma, n_gamma))
    return EffortBasis(volume @ b_vol, zero_sum @ b_phi, b_sigma, b_port)


def flow_dimension(formulation: str, hs: HodgeSystem) -> int:
    """Dimension of the flow space dual to the admissible efforts."""
    c = hs.complex
    ports = len(c.sigma_vertices) + len(c.gamma_vertices)
    if formulation == consts.FORM_V:
        return c.n_edges - len(c.interior_vertices) + ports
    boundary = len(c.boundary_vertices) - 1
    if formulation == consts.FORM_ETA:
        return int(np.linalg.matrix_rank(hs.d1.toarray())) + boundary + ports
    return len(c.interior_vertices) + boundary + ports


def _norm(t: DiracTuple) -> float:
    """M1 norm on 1-cochain volume slots, Euclidean everywhere else."""
    hs = t.state.hs
    total = 0.0
    for slots in (t.efforts, t.flows):
        volume, *rest = slots.arrays()
        if t.formulation == consts.FORM_OMEGA:
            total += float(volume @ volume)
        else:
            total += abs(float(volume @ (hs.m1 @ volume)))
        total += sum(float(a @ a) for a in rest)
    return float(np.sqrt(total))


@dataclasses.dataclass
class AuditResult:
    formulation: str
    max_residual: float
    gram_residual: float
    rank: int
    parameters: int
    flow_dimension: int
    pairs: typing.List[typing.Tuple[int, float]] = dataclasses.field(default_factory=list)

    @property
    def rank_ok(self) -> bool:
        return self.rank == self.parameters == self.flow_dimension


def self_orthogonality_audit(state: FlowState, samples: int, seed: int = consts.DEFAULT_SEED) -> AuditResult:
    """
    Pairs ``samples`` random structure tuples with each other, then checks the
    full Gram matrix of the pairing on a basis and the rank of the map.
    """
    formulation = state.formulation
    hs = state.hs
    basis = effort_basis(formulation, hs)
    dirac_map = DIRAC_MAPS[formulation]
    rng = np.random.default_rng(seed)

    tuples = [dirac_map(basis.effort(rng.standard_normal(basis.size)), state) for _ in range(samples)]
    norms = [_norm(t) for t in tuples]
    pairs: typing.List[typing.Tuple[int, float]] = []
    pair_id = 0
    for i in range(samples):
        for j in range(i, samples):
            scale = max(norms[i] * norms[j], 1e-300)
            pairs.append((pair_id, abs(bilinear_form(tuples[i], tuples[j])) / scale))
            pair_id += 1

    columns = [dirac_map(basis.effort(x), state) for x in np.eye(basis.size)]
    efforts = [np.column_stack([t.efforts.arrays()[k] for t in columns]) for k in range(len(columns[0].efforts.arrays()))]
    flows = [np.column_stack([t.flows.arrays()[k] for t in columns]) for k in range(len(columns[0].flows.arrays()))]
    if formulation == consts.FORM_OMEGA:
        gram = efforts[0].T @ (hs.k0 @ flows[0])
    else:
        gram = efforts[0].T @ (hs.m1 @ flows[0])
    for e_block, f_block in zip(efforts[1:], flows[1:]):
        gram += e_block.T @ f_block
    symmetric = gram + gram.T
    scale = max(float(np.max([_norm(t) for t in columns])) ** 2, 1e-300)
    rank = int(np.linalg.matrix_rank(np.vstack(efforts + flows)))

    result = AuditResult(
        formulation,
        max((r for _, r in pairs), default=0.0),
        float(np.abs(symmetric).max(initial=0.0)) / scale,
        rank,
        basis.size,
        flow_dimension(formulation, hs),
        pairs,
    )
    logger.info(
        'Dirac audit %s: max pair residual %.3e, gram residual %.3e, rank %d/%d/%d',
        formulation,
        result.max_residual,
        result.gram_residual,
        result.rank,
        result.parameters,
        result.flow_dimension,
    )
    return result


def random_state(formulation: str, hs: HodgeSystem, rng: np.random.Generator, vorticity: bool = True) -> FlowState:
    """Random admissible state. ``vorticity=False`` gives the irrotational (canonical) case."""
    c = hs.complex
    phi_b = rng.standard_normal(len(c.boundary_vertices))
    if formulation == consts.FORM_V:
        w = Cochain(1, rng.standard_normal(c.n_edges), c)
        v = elliptic.solenoidal_projection(w, hs)
        if not vorticity:
            v = forms.d(elliptic.harmonic_lift(phi_b, hs))
        return FlowState.from_velocity(v, hs)
    z = rng.standard_normal(c.n_triangles) if vorticity else np.zeros(c.n_triangles)
    if formulation == consts.FORM_ETA:
        eta = Cochain(1, hs.mass_solve(1, hs.d1.T @ z), c)
        return FlowState(consts.FORM_ETA, hs, eta=eta, phi_boundary=phi_b)
    return FlowState(consts.FORM_OMEGA, hs, omega=Cochain(2, z, c), phi_boundary=phi_b)
