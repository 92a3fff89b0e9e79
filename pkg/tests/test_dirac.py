# -*- coding: utf-8 -*-
#
# Copyright (c) 2026 The phdec developers
# All rights reserved. Distributed under the BSD 3-Clause license, see LICENSE.
import dataclasses
from unittest import TestCase

import numpy as np

from phdec import consts, dirac, energetics, suites
from phdec.complex import load_mesh
from phdec.energetics import PhysParams
from phdec.errors import FormulationError, PreconditionError
from phdec.forms import HodgeSystem

from .utils import conf, fixtures


class TestDiracStructure(TestCase):
    def setUp(self) -> None:
        self.rng = fixtures.rng()

    def test_velocity_audit(self) -> None:
        for c in (load_mesh(conf.SQUARE_MESH), fixtures.tank(4, 2)):
            hs = HodgeSystem(c)
            state = dirac.random_state(consts.FORM_V, hs, self.rng)
            audit = dirac.self_orthogonality_audit(state, 5, conf.SEED)
            self.assertEqual(audit.formulation, consts.FORM_V)
            self.assertEqual(len(audit.pairs), 15)
            self.assertLess(audit.max_residual, 1e-9)
            self.assertLess(audit.gram_residual, 1e-9)
            self.assertTrue(audit.rank_ok, f'{audit.rank} {audit.parameters} {audit.flow_dimension}')

    def test_audits(self) -> None:
        for c in (load_mesh(conf.SQUARE_MESH), fixtures.tank(4, 2)):
            hs = HodgeSystem(c)
            for formulation in fixtures.FORMULATIONS:
                state = dirac.random_state(formulation, hs, self.rng)
                audit = dirac.self_orthogonality_audit(state, 4, conf.SEED)
                self.assertEqual(audit.formulation, formulation)
                self.assertEqual(len(audit.pairs), 10)
                self.assertLess(audit.max_residual, 1e-9, formulation)
                self.assertLess(audit.gram_residual, 1e-9, formulation)
                self.assertTrue(audit.rank_ok, f'{formulation} {audit.rank} {audit.parameters} {audit.flow_dimension}')

    def test_chain_rule(self) -> None:
        hs = HodgeSystem(fixtures.tank(4, 2))
        params = PhysParams(rho=1.0, tau=0.1, g0=9.81)
        for formulation in fixtures.FORMULATIONS:
            state = dirac.random_state(formulation, hs, self.rng)
            H = energetics.func_derivs_H(state, params)
            for _ in range(3):
                F = suites.random_derivs(state, self.rng)
                self.assertLess(dirac.chain_rule_residual(state, F, H), 1e-8, formulation)
            # energy is conserved when the ports are closed
            self.assertLess(dirac.chain_rule_residual(state, H, H), 1e-8, formulation)

    def test_lifting_independence(self) -> None:
        c = fixtures.tank(6, 3)
        hs = HodgeSystem(c)
        state = dirac.random_state(consts.FORM_V, hs, self.rng)
        basis = dirac.effort_basis(consts.FORM_V, hs)
        e = basis.effort(self.rng.standard_normal(basis.size))
        harmonic = dirac.d1_map(e, state, dirac.LIFT_HARMONIC)
        zero = dirac.d1_map(e, state, dirac.LIFT_ZERO)
        difference = harmonic.flows.volume - zero.flows.volume
        # the liftings differ by the gradient of an interior function
        self.assertGreater(np.abs(difference).max(), 1e-6)
        scale = max(1.0, float(np.abs(harmonic.flows.volume).max()))
        pairings = basis.volume.T @ (hs.m1 @ difference)
        self.assertLess(np.abs(pairings).max(), 1e-9 * scale)
        self.assertTrue(np.array_equal(harmonic.flows.sigma, zero.flows.sigma))
        self.assertTrue(np.array_equal(harmonic.flows.port, zero.flows.port))
        other = dirac.d1_map(basis.effort(self.rng.standard_normal(basis.size)), state)
        self.assertAlmostEqual(dirac.bilinear_form(harmonic, other), dirac.bilinear_form(zero, other), places=9)

    def test_power_balance(self) -> None:
        hs = HodgeSystem(fixtures.tank(6, 3))
        state = dirac.random_state(consts.FORM_V, hs, self.rng)
        basis = dirac.effort_basis(consts.FORM_V, hs)
        t = dirac.d1_map(basis.effort(self.rng.standard_normal(basis.size)), state)
        interior, port = dirac.power_balance(t)
        self.assertLess(abs(interior + port), 1e-9 * max(1.0, abs(interior), abs(port)))
        self.assertNotEqual(port, 0.0)
        # the pairing of a tuple with itself is twice its power
        self.assertLess(abs(dirac.bilinear_form(t, t)), 1e-9 * max(1.0, abs(interior)))

    def test_basis(self) -> None:
        c = fixtures.tank(4, 2)
        hs = HodgeSystem(c)
        ports = len(c.sigma_vertices) + len(c.gamma_vertices)
        v = dirac.effort_basis(consts.FORM_V, hs)
        self.assertEqual(v.size, c.n_edges - len(c.interior_vertices) + ports)
        self.assertIsNone(v.phi)
        omega = dirac.effort_basis(consts.FORM_OMEGA, hs)
        self.assertEqual(omega.size, len(c.interior_vertices) + len(c.boundary_vertices) - 1 + ports)
        e = omega.effort(self.rng.standard_normal(omega.size))
        self.assertTrue(np.allclose(e.volume[c.boundary_vertices], 0.0))
        assert e.phi is not None
        self.assertAlmostEqual(float(e.phi.sum()), 0.0, places=12)
        with self.assertRaises(FormulationError):
            dirac.effort_basis('lagrangian', hs)

    def test_bilinear_mismatch(self) -> None:
        hs = HodgeSystem(fixtures.tank(4, 2))
        state = dirac.random_state(consts.FORM_V, hs, self.rng)
        basis = dirac.effort_basis(consts.FORM_V, hs)
        t = dirac.d1_map(basis.effort(self.rng.standard_normal(basis.size)), state)
        with self.assertRaises(FormulationError):
            dirac.bilinear_form(t, dataclasses.replace(t, formulation=consts.FORM_ETA))
        other = dirac.random_state(consts.FORM_V, HodgeSystem(fixtures.tank(4, 2)), self.rng)
        with self.assertRaises(FormulationError):
            dirac.bilinear_form(t, dataclasses.replace(t, state=other))

    def test_preconditions(self) -> None:
        c = fixtures.tank(4, 2)
        hs = HodgeSystem(c)
        # volume effort with interior divergence
        efforts = dataclasses.replace(
            dirac.zero_efforts(consts.FORM_V, hs), volume=fixtures.random_cochain(c, 1, self.rng).values
        )
        with self.assertRaises(PreconditionError):
            dirac.d1_map(efforts, dirac.random_state(consts.FORM_V, hs, self.rng))

        # phi effort with net flux
        efforts = dirac.zero_efforts(consts.FORM_ETA, hs)
        efforts = dataclasses.replace(efforts, phi=np.ones(len(c.boundary_vertices)))
        with self.assertRaises(PreconditionError):
            dirac.d2_map(efforts, dirac.random_state(consts.FORM_ETA, hs, self.rng))

        # vorticity effort nonzero on the boundary
        volume = np.zeros(c.n_vertices)
        volume[c.boundary_vertices[0]] = 1.0
        efforts = dataclasses.replace(dirac.zero_efforts(consts.FORM_OMEGA, hs), volume=volume)
        with self.assertRaises(PreconditionError):
            dirac.d3_map(efforts, dirac.random_state(consts.FORM_OMEGA, hs, self.rng))

    def test_lift(self) -> None:
        c = fixtures.tank(4, 2)
        hs = HodgeSystem(c)
        boundary = self.rng.standard_normal(len(c.boundary_vertices))
        zero = dirac.lift(boundary, hs, dirac.LIFT_ZERO)
        self.assertTrue(np.array_equal(zero[c.boundary_vertices], boundary))
        self.assertTrue(np.array_equal(zero[c.interior_vertices], np.zeros(len(c.interior_vertices))))
        harmonic = dirac.lift(boundary, hs)
        self.assertTrue(np.allclose(harmonic[c.boundary_vertices], boundary))
        with self.assertRaises(ValueError):
            dirac.lift(boundary, hs, 'cubic')

    def test_random_state(self) -> None:
        hs = HodgeSystem(fixtures.tank(4, 2))
        for formulation in fixtures.FORMULATIONS:
            state = dirac.random_state(formulation, hs, self.rng)
            self.assertEqual(state.formulation, formulation)
        canonical = dirac.random_state(consts.FORM_ETA, hs, self.rng, vorticity=False)
        assert canonical.eta is not None
        self.assertEqual(float(np.abs(canonical.eta.values).max()), 0.0)
