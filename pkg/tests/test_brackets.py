# -*- coding: utf-8 -*-
#
# Copyright (c) 2026 The phdec developers
# All rights reserved. Distributed under the BSD 3-Clause license, see LICENSE.
import dataclasses
import typing
from unittest import TestCase

import numpy as np

from phdec import brackets, consts, dirac, energetics, suites
from phdec.energetics import FunctionalDerivs
from phdec.errors import FDStepError, FormulationError
from phdec.forms import HodgeSystem

from .utils import fixtures


class TestBrackets(TestCase):
    def setUp(self) -> None:
        self.hs = HodgeSystem(fixtures.tank(6, 3))
        self.rng = fixtures.rng()

    def test_skew_symmetry(self) -> None:
        for formulation in fixtures.FORMULATIONS:
            state = dirac.random_state(formulation, self.hs, self.rng)
            for _ in range(5):
                F, G = suites.random_derivs(state, self.rng), suites.random_derivs(state, self.rng)
                fg = brackets.bracket(state, F, G)
                gf = brackets.bracket(state, G, F)
                self.assertLess(abs(fg + gf), 1e-10 * max(1.0, abs(fg)), formulation)
                for port in (False, True):
                    ff = brackets.bracket(state, F, F, port=port)
                    self.assertLess(abs(ff), 1e-9 * max(1.0, abs(fg)), formulation)

    def test_bilinear(self) -> None:
        for formulation in fixtures.FORMULATIONS:
            state = dirac.random_state(formulation, self.hs, self.rng)
            F, F2, G = (suites.random_derivs(state, self.rng) for _ in range(3))
            a, b = 0.3, -1.7
            combined = brackets.bracket(state, F.combine(a, F2, b), G)
            expected = a * brackets.bracket(state, F, G) + b * brackets.bracket(state, F2, G)
            self.assertLess(abs(combined - expected), 1e-10 * max(1.0, abs(expected)), formulation)

    def test_port_surface_term(self) -> None:
        # without Gamma efforts the port bracket only differs on the walls
        state = dirac.random_state(consts.FORM_V, self.hs, self.rng)
        F, G = suites.random_derivs(state, self.rng), suites.random_derivs(state, self.rng)
        quiet = [FunctionalDerivs(consts.FORM_V, t.dsigma, dv=t.dv) for t in (F, G)]
        closed = brackets.bracket(state, *quiet)
        ported = brackets.bracket(state, *quiet, port=True)
        self.assertLess(abs(closed - ported), 1e-10 * max(1.0, abs(closed)))

    def test_mixed_formulations(self) -> None:
        state = dirac.random_state(consts.FORM_V, self.hs, self.rng)
        eta_state = state.to(consts.FORM_ETA)
        F = suites.random_derivs(state, self.rng)
        G = suites.random_derivs(eta_state, self.rng)
        with self.assertRaises(FormulationError):
            brackets.bracket(state, F, G)
        with self.assertRaises(FormulationError):
            brackets.bracket(eta_state, G, F)
        with self.assertRaises(FormulationError):
            brackets.derivs_eta_to_v(F, state)
        with self.assertRaises(FormulationError):
            brackets.derivs_v_to_eta(G, eta_state)
        with self.assertRaises(FormulationError):
            brackets.derivs_omega_to_eta(G, eta_state)
        with self.assertRaises(FormulationError):
            brackets.jacobi_fd_test(state, F, F, G, 1e-4)

    def test_derivative_maps(self) -> None:
        state = dirac.random_state(consts.FORM_V, self.hs, self.rng)
        eta_state = state.to(consts.FORM_ETA)
        F = suites.random_derivs(state, self.rng)
        mapped = brackets.derivs_v_to_eta(F, eta_state)
        self.assertEqual(mapped.formulation, consts.FORM_ETA)
        assert mapped.dphi is not None and mapped.deta is not None
        self.assertEqual(mapped.dphi.shape, (len(self.hs.complex.boundary_vertices),))
        self.assertEqual(mapped.deta.shape, (self.hs.complex.n_edges,))
        back = brackets.derivs_eta_to_v(mapped, eta_state)
        self.assertEqual(back.formulation, consts.FORM_V)

        omega_state = dirac.random_state(consts.FORM_OMEGA, self.hs, self.rng)
        G = suites.random_derivs(omega_state, self.rng)
        self.assertEqual(brackets.derivs_omega_to_eta(G, omega_state).formulation, consts.FORM_ETA)

    def test_fd_step(self) -> None:
        state = dirac.random_state(consts.FORM_V, self.hs, self.rng)
        F, G, K = (suites.random_derivs(state, self.rng) for _ in range(3))
        for h in (0.0, -1e-4, float('nan'), 1e-30):
            with self.assertRaises(FDStepError, msg=f'{h}'):
                brackets.jacobi_fd_test(state, F, G, K, h)

    def test_kernel_cache(self) -> None:
        state = dirac.random_state(consts.FORM_V, self.hs, self.rng)
        k1 = brackets.kernel(state)
        self.assertIs(brackets.kernel(state), k1)
        dense = k1.toarray()
        self.assertLess(np.abs(dense + dense.T).max(), 1e-13 * max(1.0, np.abs(dense).max()))


def normalized_jacobi(terms: typing.Tuple[float, float, float]) -> float:
    return abs(sum(terms)) / max(1.0, sum(abs(t) for t in terms))


class TestJacobi(TestCase):
    def setUp(self) -> None:
        self.hs = HodgeSystem(fixtures.tank(4, 2))
        self.rng = fixtures.rng()

    def test_canonical(self) -> None:
        state = dirac.random_state(consts.FORM_ETA, self.hs, self.rng, vorticity=False)
        F, G, K = (suites._canonical(suites.random_derivs(state, self.rng)) for _ in range(3))
        self.assertLessEqual(brackets.jacobi_fd_test(state, F, G, K, 1e-4), 1e-12)
        self.assertLessEqual(brackets.jacobi_fd_test(state, F, G, K, 1e-4, shape=True), 1e-12)

    def test_irrotational(self) -> None:
        state = dirac.random_state(consts.FORM_V, self.hs, self.rng, vorticity=False)
        F, G, K = (suites.random_derivs(state, self.rng) for _ in range(3))
        self.assertLess(normalized_jacobi(brackets.jacobi_terms(state, F, G, K, 1e-4)), 1e-6)
        for formulation in (consts.FORM_ETA, consts.FORM_OMEGA):
            state = dirac.random_state(formulation, self.hs, self.rng, vorticity=False)
            F, G, K = (suites.random_derivs(state, self.rng) for _ in range(3))
            terms = brackets.jacobi_terms(state, F, G, K, 1e-4, shape=True)
            self.assertLessEqual(normalized_jacobi(terms), 1e-12, formulation)

    def test_derivative_step(self) -> None:
        # brackets are affine in v and omega once Sigma is fixed
        for formulation in (consts.FORM_V, consts.FORM_OMEGA):
            state = dirac.random_state(formulation, self.hs, self.rng)
            F, G = suites.random_derivs(state, self.rng), suites.random_derivs(state, self.rng)
            fine = brackets.bracket_derivative(state, F, G, 1e-4)
            coarse = brackets.bracket_derivative(state, F, G, 1e-2)
            for name in ('dv', 'domega', 'dphi'):
                a, b = getattr(fine, name), getattr(coarse, name)
                if a is None:
                    continue
                self.assertLess(np.abs(a - b).max(), 1e-6 * max(1.0, np.abs(a).max()), f'{formulation} {name}')
            self.assertFalse(fine.dsigma.any())

    def test_shape_slot(self) -> None:
        c = self.hs.complex
        state = dirac.random_state(consts.FORM_ETA, self.hs, self.rng)
        F, G = suites.random_derivs(state, self.rng), suites.random_derivs(state, self.rng)
        h = 1e-5
        derivs = brackets.bracket_derivative(state, F, G, h, shape=True)
        self.assertEqual(derivs.dsigma.shape, (len(c.sigma_vertices),))

        positions = np.array(self.hs.positions)
        surface = energetics.SurfaceState.build(c, positions)
        direction = self.rng.standard_normal(len(c.sigma_vertices))
        values = []
        for step in (h, -h):
            moved = energetics.perturb_surface(c, positions, surface, direction, step)
            values.append(brackets.bracket(dataclasses.replace(state, hs=self.hs.deformed(moved)), F, G))
        fd = (values[0] - values[1]) / (2.0 * h)
        predicted = float(np.sum(derivs.dsigma * direction * surface.measure))
        scale = max(1.0, abs(fd), abs(brackets.bracket(state, F, G)))
        self.assertLess(abs(fd - predicted), 1e-5 * scale)
