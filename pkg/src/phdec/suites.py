# -*- coding: utf-8 -*-
#
# Copyright (c) 2026 The phdec developers
# All rights reserved. Distributed under the BSD 3-Clause license, see LICENSE.
'''
Property suites run by ``ph check``. Every check yields one report row; a
suite passes when all of its rows do. Rows with an infinite threshold are
informational.
'''
import logging
import typing

import numpy as np

from . import brackets, consts, dirac, elliptic, energetics, forms, processes
from .complex import SimplicialComplex, betti_numbers, refine_uniform
from .energetics import FlowState, FunctionalDerivs, PhysParams
from .errors import TopologyError
from .forms import Cochain, HodgeSystem
from .report import CheckRow

logger = logging.getLogger(__name__)

INFORMATIONAL: typing.Final[float] = float('inf')

SuiteType = typing.Callable[[SimplicialComplex, int], typing.List[CheckRow]]


def _row(suite: str, check: str, value: float, threshold: float) -> CheckRow:
    value = float(value)
    if threshold == INFORMATIONAL:
        return CheckRow(suite, check, value, threshold, True)
    return CheckRow(suite, check, value, threshold, bool(np.isfinite(value)) and value <= threshold)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(a), abs(b))


def exactness(c: SimplicialComplex, seed: int) -> typing.List[CheckRow]:
    rng = np.random.default_rng(seed)
    b0, b1 = betti_numbers(c)
    a = Cochain(1, rng.standard_normal(c.n_edges), c)
    return [
        _row('exactness', 'd1_d0', float(np.abs((c.d1 @ c.d0).toarray()).max(initial=0.0)), 0.0),
        _row('exactness', 'stokes', forms.stokes_residual(a), 1e-13),
        _row('exactness', 'euler_characteristic', abs(c.n_vertices - c.n_edges + c.n_triangles - (b0 - b1)), 0.0),
    ]


def forms_suite(c: SimplicialComplex, seed: int) -> typing.List[CheckRow]:
    rng = np.random.default_rng(seed)
    hs = HodgeSystem(c)
    f = Cochain(0, rng.standard_normal(c.n_vertices), c)
    v = Cochain(1, rng.standard_normal(c.n_edges), c)
    w = Cochain(1, rng.standard_normal(c.n_edges), c)
    s = Cochain(2, rng.standard_normal(c.n_triangles), c)

    adjoint_d = _rel(forms.inner(forms.d(f), v, hs), float(f.values @ forms.weak_divergence(v, hs)))
    adjoint_delta = _rel(forms.inner(forms.codifferential(s, hs), v, hs), float(s.values @ (hs.m2 @ (hs.d1 @ v.values))))
    wedge_11 = abs(forms.wedge_pair(v, w, hs) + forms.wedge_pair(w, v, hs)) / max(1.0, abs(forms.wedge_pair(v, w, hs)))
    wedge_02 = _rel(forms.wedge_pair(f, s, hs), forms.wedge_pair(s, f, hs))
    m1 = hs.m1.toarray()
    symmetry = float(np.abs(m1 - m1.T).max()) / float(np.abs(m1).max())

    def lam(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.sin(x) * np.cosh(y)

    def mu(x: np.ndarray, y: np.ndarray) -> typing.Tuple[np.ndarray, np.ndarray]:
        return x * y, x - y * y

    def div_mu(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return -y

    return [
        _row('forms', 'adjoint_d', adjoint_d, consts.TOL_GALERKIN),
        _row('forms', 'adjoint_codifferential', adjoint_delta, 1e-10),
        _row('forms', 'wedge_sign_11', wedge_11, 1e-12),
        _row('forms', 'wedge_sign_02', wedge_02, 1e-12),
        _row('forms', 'mass_symmetry', symmetry, 1e-14),
        _row('forms', 'integration_by_parts', forms.integration_by_parts_residual(lam, mu, div_mu, hs), INFORMATIONAL),
    ]


def neumann_convergence(c: SimplicialComplex, levels: int = 3) -> typing.List[float]:
    """L2 errors of the Neumann solve for a manufactured harmonic function over uniform refinements."""

    def exact(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.exp(x) * np.cos(y)

    def grad(x: np.ndarray, y: np.ndarray) -> typing.Tuple[np.ndarray, np.ndarray]:
        return np.exp(x) * np.cos(y), -np.exp(x) * np.sin(y)

    errors: typing.List[float] = []
    mesh = c
    for level in range(levels):
        if level:
            mesh = refine_uniform(mesh)
        hs = HodgeSystem(mesh)
        phi = elliptic.solve_Nphi(elliptic.NeumannData.from_function(grad, hs), hs).values
        diff = phi - forms.interpolate(exact, hs).values
        diff -= float(hs.lumped @ diff) / float(hs.lumped.sum())
        errors.append(float(np.sqrt(diff @ (hs.m0 @ diff))))
    return errors


def observed_order(errors: typing.Sequence[float]) -> float:
    return float(np.log2(errors[-2] / errors[-1]))


def elliptic_suite(c: SimplicialComplex, seed: int) -> typing.List[CheckRow]:
    rng = np.random.default_rng(seed)
    hs = HodgeSystem(c)
    n = c.n_vertices
    a = rng.standard_normal(n)
    b = rng.standard_normal(n)
    symmetry = _rel(float(a @ elliptic.neumann_solve(b, hs)), float(b @ elliptic.neumann_solve(a, hs)))
    loads = a - a.mean()
    u = elliptic.neumann_solve(loads, hs)
    residual = float(np.abs(hs.stiffness @ u - loads).max()) / max(1.0, float(np.abs(loads).max()))
    rows = [
        _row('elliptic', 'neumann_symmetry', symmetry, 1e-10),
        _row('elliptic', 'neumann_residual', residual, 1e-10),
    ]
    if c.sigma_vertices.size:
        values = rng.standard_normal(len(c.sigma_vertices))
        mixed = elliptic.mixed_solve(hs, c.sigma_vertices, values, np.zeros(n))
        free = np.setdiff1d(np.arange(n), c.sigma_vertices)
        r = float(np.abs((hs.stiffness @ mixed.values)[free]).max(initial=0.0))
        rows.append(_row('elliptic', 'mixed_residual', r / max(1.0, float(np.abs(values).max())), 1e-10))

    _b0, b1 = betti_numbers(c)
    v = elliptic.solenoidal_projection(Cochain(1, rng.standard_normal(c.n_edges), c), hs)
    if b1:
        try:
            elliptic.hodge_decompose(v, hs)
            rejected = 0.0
        except TopologyError:
            rejected = 1.0
        rows.append(_row('elliptic', 'hodge_rejects_b1', 1.0 - rejected, 0.0))
    else:
        parts = elliptic.hodge_decompose(v, hs)
        norm_v = np.sqrt(forms.inner(v, v, hs))
        harmonic = np.sqrt(max(forms.inner(parts.harmonic, parts.harmonic, hs), 0.0)) / norm_v
        rows.append(_row('elliptic', 'hodge_orthogonality', parts.orthogonality(hs), consts.TOL_ORTHOGONALITY))
        rows.append(_row('elliptic', 'hodge_harmonic', harmonic, 1e-8))
        w = elliptic.p_coexact(v, hs)
        idempotent = (elliptic.p_coexact(w, hs) - w).norm() / max(1.0, w.norm())
        rows.append(_row('elliptic', 'coexact_idempotent', idempotent, 1e-10))
    if c.n_triangles <= 512:
        rows.append(_row('elliptic', 'neumann_order', abs(observed_order(neumann_convergence(c)) - 2.0), 0.2))
    return rows


def energetics_suite(c: SimplicialComplex, seed: int) -> typing.List[CheckRow]:
    rng = np.random.default_rng(seed)
    hs = HodgeSystem(c)
    params = PhysParams(rho=1.0, tau=0.1, g0=9.81)
    v = elliptic.solenoidal_projection(Cochain(1, rng.standard_normal(c.n_edges), c), hs)
    w = elliptic.solenoidal_projection(Cochain(1, rng.standard_normal(c.n_edges), c), hs)
    state = FlowState.from_velocity(v, hs)

    h = 1e-3
    plus = energetics.hamiltonian_v(v + w * h, params, hs, check=False).total
    minus = energetics.hamiltonian_v(v - w * h, params, hs, check=False).total
    fd = (plus - minus) / (2 * h)
    derivs = energetics.func_derivs_H(state, params)
    assert derivs.dv is not None
    predicted = float(derivs.dv @ (hs.m1 @ w.values))
    rows = [_row('energetics', 'dH_dv', _rel(fd, predicted), 1e-8)]

    _b0, b1 = betti_numbers(c)
    if not b1:
        h_v = state.energy(params).total
        h_eta = state.to(consts.FORM_ETA).energy(params).total
        h_omega = state.to(consts.FORM_OMEGA).energy(params).total
        rows.append(_row('energetics', 'energy_v_eta', _rel(h_v, h_eta), 1e-9))
        rows.append(_row('energetics', 'energy_v_omega', _rel(h_v, h_omega), 1e-9))

    if c.sigma_vertices.size:
        direction = rng.standard_normal(len(c.sigma_vertices))
        positions = np.array(hs.positions)
        surface = energetics.SurfaceState.build(c, positions)
        gravity = energetics.gravity_gradient(c, positions, params.g0)
        error = energetics.shape_derivative_audit(
            lambda x: energetics.gravity_energy(c, x, params.g0), gravity, c, positions, direction, 1e-5
        )
        scale = max(1.0, float(np.abs(gravity * direction * surface.measure).sum()))
        rows.append(_row('energetics', 'gravity_shape_derivative', error / scale, 1e-7))
        length = surface.length_gradient
        error = energetics.shape_derivative_audit(
            lambda x: energetics.surface_length(c, x), length, c, positions, direction, 1e-5
        )
        scale = max(1.0, float(np.abs(length * direction * surface.measure).sum()))
        rows.append(_row('energetics', 'surface_shape_derivative', error / scale, 1e-7))
        # curvature against the exact length gradient
        turning = np.abs(surface.curvature * surface.measure)
        mismatch = abs(float(np.sum((surface.curvature - length) * direction * surface.measure)))
        bound = float(np.sum(np.abs(direction) * turning**3)) / 24.0
        rows.append(_row('energetics', 'curvature_consistency', mismatch, bound + 1e-12))
    return rows


# Brackets
def random_derivs(state: FlowState, rng: np.random.Generator) -> FunctionalDerivs:
    """Random admissible derivative tuple (solenoidal, coexact or zero trace volume part)."""
    hs = state.hs
    basis = dirac.effort_basis(state.formulation, hs)
    e = basis.effort(rng.standard_normal(basis.size))
    if state.formulation == consts.FORM_V:
        return FunctionalDerivs(consts.FORM_V, e.sigma, dv=e.volume, dgamma=e.port)
    if state.formulation == consts.FORM_ETA:
        return FunctionalDerivs(consts.FORM_ETA, e.sigma, dphi=e.phi, deta=e.volume, dgamma=e.port)
    return FunctionalDerivs(consts.FORM_OMEGA, e.sigma, dphi=e.phi, domega=e.volume, dgamma=e.port)


def _canonical(F: FunctionalDerivs) -> FunctionalDerivs:
    """Same tuple with the volume derivative removed."""
    assert F.deta is not None
    return FunctionalDerivs(consts.FORM_ETA, F.dsigma, dphi=F.dphi, deta=np.zeros_like(F.deta))


def brackets_suite(c: SimplicialComplex, seed: int, tuples: int = 100) -> typing.List[CheckRow]:
    rng = np.random.default_rng(seed)
    hs = HodgeSystem(c)
    rows: typing.List[CheckRow] = []
    _b0, b1 = betti_numbers(c)
    for formulation in consts.FORMULATIONS:
        state = dirac.random_state(formulation, hs, rng)
        skew = bilinear = 0.0
        for _ in range(tuples):
            F, F2, G = (random_derivs(state, rng) for _ in range(3))
            fg = brackets.bracket(state, F, G)
            skew = max(skew, abs(fg + brackets.bracket(state, G, F)) / max(1.0, abs(fg)))
            a, b = rng.standard_normal(2)
            combined = brackets.bracket(state, F.combine(a, F2, b), G)
            expected = a * fg + b * brackets.bracket(state, F2, G)
            bilinear = max(bilinear, _rel(combined, expected))
        rows.append(_row('brackets', f'skew_{formulation}', skew, 1e-10))
        rows.append(_row('brackets', f'bilinear_{formulation}', bilinear, 1e-10))

    if not b1:
        v_state = dirac.random_state(consts.FORM_V, hs, rng)
        eta_state = v_state.to(consts.FORM_ETA)
        worst = 0.0
        for _ in range(10):
            F, G = random_derivs(v_state, rng), random_derivs(v_state, rng)
            direct = brackets.bracket(v_state, F, G)
            mapped = brackets.bracket(
                eta_state, brackets.derivs_v_to_eta(F, eta_state), brackets.derivs_v_to_eta(G, eta_state)
            )
            worst = max(worst, _rel(direct, mapped))
        rows.append(_row('brackets', 'consistency_v_eta', worst, 1e-8))

        omega_state = dirac.random_state(consts.FORM_OMEGA, hs, rng)
        eta_state = omega_state.to(consts.FORM_ETA)
        worst = 0.0
        for _ in range(10):
            F, G = random_derivs(omega_state, rng), random_derivs(omega_state, rng)
            direct = brackets.bracket(omega_state, F, G)
            mapped = brackets.bracket(
                eta_state, brackets.derivs_omega_to_eta(F, omega_state), brackets.derivs_omega_to_eta(G, omega_state)
            )
            worst = max(worst, _rel(direct, mapped))
        rows.append(_row('brackets', 'consistency_omega_eta', worst, 1e-8))

    if c.n_triangles <= 50:
        canonical = dirac.random_state(consts.FORM_ETA, hs, rng, vorticity=False)
        F, G, K = (_canonical(random_derivs(canonical, rng)) for _ in range(3))
        rows.append(_row('brackets', 'jacobi_canonical', _jacobi(canonical, F, G, K, shape=True), 1e-12))
        for formulation in consts.FORMULATIONS:
            # Sigma moves change the metric of the weak fluxes in the velocity bracket
            shape = formulation != consts.FORM_V
            state = dirac.random_state(formulation, hs, rng, vorticity=False)
            F, G, K = (random_derivs(state, rng) for _ in range(3))
            threshold = 1e-6 if formulation == consts.FORM_V else 1e-12
            rows.append(_row('brackets', f'jacobi_{formulation}_irrotational', _jacobi(state, F, G, K, shape), threshold))
            state = dirac.random_state(formulation, hs, rng)
            F, G, K = (random_derivs(state, rng) for _ in range(3))
            rows.append(_row('brackets', f'jacobi_{formulation}', _jacobi(state, F, G, K, shape), INFORMATIONAL))
    return rows


def _jacobi(
    state: FlowState, F: FunctionalDerivs, G: FunctionalDerivs, K: FunctionalDerivs, shape: bool = False
) -> float:
    """Jacobi residual relative to the cyclic terms and the pairwise brackets."""
    terms = brackets.jacobi_terms(state, F, G, K, 1e-4, shape)
    pairwise = (abs(brackets.bracket(state, a, b)) for a, b in ((F, G), (G, K), (K, F)))
    scale = max(1.0, sum(abs(t) for t in terms), *pairwise)
    return abs(sum(terms)) / scale


# Dirac structures
DIRAC_PAIR_THRESHOLD: typing.Final[float] = 1e-9

AuditEntry = typing.Tuple[int, dirac.AuditResult]  # (state seed, audit)


def _dirac_job(job: typing.Tuple[SimplicialComplex, str, int, int]) -> typing.Tuple[typing.List[CheckRow], AuditEntry]:
    c, formulation, seed, samples = job
    hs = HodgeSystem(c)
    rng = np.random.default_rng(seed)
    state = dirac.random_state(formulation, hs, rng)
    audit = dirac.self_orthogonality_audit(state, samples, seed)
    rank_defect = abs(audit.rank - audit.parameters) + abs(audit.parameters - audit.flow_dimension)
    F = random_derivs(state, rng)
    H = energetics.func_derivs_H(state, PhysParams(rho=1.0, tau=0.1, g0=9.81))
    label = f'{formulation}_{seed}'
    rows = [
        _row('dirac', f'pairs_{label}', audit.max_residual, DIRAC_PAIR_THRESHOLD),
        _row('dirac', f'gram_{label}', audit.gram_residual, DIRAC_PAIR_THRESHOLD),
        _row('dirac', f'rank_{label}', rank_defect, 0.0),
        _row('dirac', f'chain_rule_{label}', dirac.chain_rule_residual(state, F, H), 1e-8),
    ]
    return rows, (seed, audit)


def dirac_audits(
    c: SimplicialComplex, seed: int, states: int = 5, samples: int = 20
) -> typing.Tuple[typing.List[CheckRow], typing.List[AuditEntry]]:
    """Report rows plus the per state audits behind them."""
    jobs = [(c, formulation, seed + k, samples) for formulation in consts.FORMULATIONS for k in range(states)]
    rows: typing.List[CheckRow] = []
    audits: typing.List[AuditEntry] = []
    for job_rows, entry in processes.run_all(_dirac_job, jobs):
        rows.extend(job_rows)
        audits.append(entry)
    return rows, audits


def dirac_suite(c: SimplicialComplex, seed: int, states: int = 5, samples: int = 20) -> typing.List[CheckRow]:
    return dirac_audits(c, seed, states, samples)[0]


SUITES: typing.Final[typing.Mapping[str, SuiteType]] = {
    'exactness': exactness,
    'forms': forms_suite,
    'elliptic': elliptic_suite,
    'energetics': energetics_suite,
    'brackets': brackets_suite,
    'dirac': dirac_suite,
}


def log_outcome(name: str, rows: typing.Sequence[CheckRow]) -> None:
    failed = [row.check for row in rows if not row.passed]
    if failed:
        logger.warning('Suite %s: %d of %d checks failed: %s', name, len(failed), len(rows), ', '.join(failed))
    else:
        logger.info('Suite %s: %d checks passed', name, len(rows))


def run_suite(name: str, c: SimplicialComplex, seed: int = consts.DEFAULT_SEED) -> typing.List[CheckRow]:
    rows = SUITES[name](c, seed)
    log_outcome(name, rows)
    return rows
