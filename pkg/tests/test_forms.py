# -*- coding: utf-8 -*-
#
# Copyright (c) 2026 The phdec developers
# All rights reserved. Distributed under the BSD 3-Clause license, see LICENSE.
import typing
from unittest import TestCase

import numpy as np

from phdec import forms
from phdec.elliptic import NeumannData
from phdec.errors import DegreeError, GeometryError, PreconditionError
from phdec.forms import Cochain, HodgeSystem

from .utils import conf, fixtures


def constant_field(x: np.ndarray, y: np.ndarray) -> typing.Tuple[np.ndarray, np.ndarray]:
    return np.full_like(x, 0.8), np.full_like(y, -1.3)


class TestCochain(TestCase):
    def setUp(self) -> None:
        self.c = fixtures.square()
        self.rng = fixtures.rng()

    def test_arithmetic(self) -> None:
        a = fixtures.random_cochain(self.c, 1, self.rng)
        b = fixtures.random_cochain(self.c, 1, self.rng)
        self.assertTrue(np.allclose((a + b).values, a.values + b.values))
        self.assertTrue(np.allclose((a - b).values, a.values - b.values))
        self.assertTrue(np.allclose((2.0 * a).values, 2.0 * a.values))
        self.assertTrue(np.allclose((-a).values, -a.values))

    def test_mismatch(self) -> None:
        a = fixtures.random_cochain(self.c, 1, self.rng)
        with self.assertRaises(DegreeError):
            a + fixtures.random_cochain(self.c, 0, self.rng)  # pylint: disable=expression-not-assigned
        with self.assertRaises(DegreeError):
            a + fixtures.random_cochain(fixtures.square(), 1, self.rng)  # pylint: disable=expression-not-assigned
        with self.assertRaises(DegreeError):
            Cochain(1, np.zeros(3), self.c)
        with self.assertRaises(DegreeError):
            Cochain(3, np.zeros(self.c.n_triangles), self.c)
        with self.assertRaises(DegreeError):
            forms.d(fixtures.random_cochain(self.c, 2, self.rng))

    def test_immutable(self) -> None:
        a = fixtures.random_cochain(self.c, 0, self.rng)
        with self.assertRaises(ValueError):
            a.values[0] = 1.0

    def test_dd(self) -> None:
        f = fixtures.random_cochain(self.c, 0, self.rng)
        self.assertLess(np.abs(forms.d(forms.d(f)).values).max(), 1e-13)

    def test_stokes(self) -> None:
        for c in (self.c, fixtures.tank(), fixtures.droplet()):
            a = fixtures.random_cochain(c, 1, self.rng)
            self.assertLess(forms.stokes_residual(a), 1e-13)

    def test_trace(self) -> None:
        f = fixtures.random_cochain(self.c, 0, self.rng)
        boundary = forms.trace(f)
        self.assertTrue(np.array_equal(boundary.indices, self.c.boundary_vertices))
        self.assertTrue(np.allclose(forms.trace(forms.d(f)).values, boundary.d(self.c).values))
        with self.assertRaises(DegreeError):
            forms.trace(fixtures.random_cochain(self.c, 2, self.rng))


class TestHodgeSystem(TestCase):
    def setUp(self) -> None:
        self.c = fixtures.tank(8, 4)
        self.hs = HodgeSystem(self.c)
        self.rng = fixtures.rng()

    def test_masses(self) -> None:
        for k in (0, 1):
            m = self.hs.mass(k).toarray()
            self.assertLess(np.abs(m - m.T).max(), 1e-14 * np.abs(m).max())
            self.assertGreater(np.linalg.eigvalsh(m).min(), 0.0)
        self.assertAlmostEqual(float(self.hs.m0.sum()), self.hs.area(), places=13)
        self.assertAlmostEqual(self.hs.area(), conf.TANK_LENGTH * conf.TANK_DEPTH, places=13)
        s = fixtures.random_cochain(self.c, 2, self.rng)
        self.assertTrue(np.allclose(self.hs.mass_solve(2, self.hs.m2 @ s.values), s.values))

    def test_mass_solve(self) -> None:
        rhs = self.rng.standard_normal(self.c.n_edges)
        x = self.hs.mass_solve(1, rhs)
        self.assertLess(np.abs(self.hs.m1 @ x - rhs).max(), conf.GALERKIN)

    def test_inverted(self) -> None:
        positions = np.array(self.c.vertices)
        positions[self.c.sigma_vertices[0], 1] = -10.0
        with self.assertRaises(GeometryError):
            HodgeSystem(self.c, positions)

    def test_constant_fields(self) -> None:
        # Whitney 1-forms reproduce constant vector fields
        v = forms.de_rham(constant_field, self.hs)
        proxy = forms.sharp(v, self.hs)
        self.assertTrue(np.allclose(proxy.values[:, 0], 0.8, atol=conf.EXACT))
        self.assertTrue(np.allclose(proxy.values[:, 1], -1.3, atol=conf.EXACT))
        nodal = forms.vertex_field(v, self.hs)
        self.assertTrue(np.allclose(nodal, [0.8, -1.3], atol=conf.EXACT))
        projected = forms.project_field(constant_field, self.hs)
        self.assertLess(np.abs(projected.values - v.values).max(), conf.GALERKIN)
        self.assertAlmostEqual(forms.inner(v, v, self.hs), (0.8**2 + 1.3**2) * self.hs.area(), places=12)
        flat = forms.flat(proxy, self.hs)
        self.assertLess(np.abs(flat.values - v.values).max(), conf.GALERKIN)

    def test_normal_trace(self) -> None:
        v = forms.de_rham(constant_field, self.hs)
        flux = forms.normal_trace(v, self.hs)
        geo = self.hs.boundary_geometry
        expected = (0.8 * geo['normal'][:, 0] - 1.3 * geo['normal'][:, 1]) * geo['length']
        self.assertTrue(np.allclose(flux, expected, atol=conf.EXACT))
        self.assertAlmostEqual(float(flux.sum()), 0.0, places=12)

    def assertClose(self, a: float, b: float, rtol: float = 1e-12) -> None:  # pylint: disable=invalid-name
        self.assertLessEqual(abs(a - b), rtol * max(1.0, abs(a), abs(b)), f'{a} != {b}')

    def test_adjoints(self) -> None:
        f = fixtures.random_cochain(self.c, 0, self.rng)
        v = fixtures.random_cochain(self.c, 1, self.rng)
        s = fixtures.random_cochain(self.c, 2, self.rng)
        self.assertClose(forms.inner(forms.d(f), v, self.hs), float(f.values @ forms.weak_divergence(v, self.hs)))
        self.assertClose(
            forms.inner(forms.codifferential(s, self.hs), v, self.hs), forms.inner(s, forms.d(v), self.hs), 1e-10
        )
        with self.assertRaises(DegreeError):
            forms.codifferential(f, self.hs)

    def test_wedge(self) -> None:
        f = fixtures.random_cochain(self.c, 0, self.rng)
        v = fixtures.random_cochain(self.c, 1, self.rng)
        w = fixtures.random_cochain(self.c, 1, self.rng)
        s = fixtures.random_cochain(self.c, 2, self.rng)
        self.assertClose(forms.wedge_pair(v, w, self.hs), -forms.wedge_pair(w, v, self.hs))
        self.assertClose(forms.wedge_pair(v, v, self.hs), 0.0)
        self.assertClose(forms.wedge_pair(f, s, self.hs), forms.wedge_pair(s, f, self.hs))
        self.assertClose(float(forms.wedge_density(v, w, self.hs).values.sum()), forms.wedge_pair(v, w, self.hs))
        with self.assertRaises(DegreeError):
            forms.wedge_pair(v, s, self.hs)

    def test_contraction_kernel(self) -> None:
        v = fixtures.random_cochain(self.c, 1, self.rng)
        k = self.hs.contraction_kernel(forms.d(v).values).toarray()
        self.assertLess(np.abs(k + k.T).max(), 1e-13 * max(1.0, np.abs(k).max()))
        e = forms.contract_vorticity(v.values, forms.d(v).values, self.hs)
        # i_{v#} dv is orthogonal to v
        scale = float(np.linalg.norm(v.values) * np.linalg.norm(self.hs.m1 @ e))
        self.assertLess(abs(float(v.values @ (self.hs.m1 @ e))), 1e-12 * scale)

    def test_linear_potential(self) -> None:
        f = fixtures.linear(self.hs)
        loads = forms.weak_divergence(forms.d(f), self.hs)
        self.assertLess(np.abs(loads[self.c.interior_vertices]).max(), conf.GALERKIN)
        self.assertAlmostEqual(float(loads.sum()), 0.0, places=12)

        def grad(x: np.ndarray, y: np.ndarray) -> typing.Tuple[np.ndarray, np.ndarray]:
            return np.full_like(x, 0.7), np.full_like(y, -0.3)

        weak = NeumannData.from_field(forms.d(f), self.hs).loads
        quadrature = NeumannData.from_function(grad, self.hs).loads
        self.assertLess(np.abs(weak - quadrature).max(), conf.GALERKIN)

    def test_solenoidal(self) -> None:
        v = fixtures.random_cochain(self.c, 1, self.rng)
        with self.assertRaises(PreconditionError) as ctx:
            forms.require_solenoidal(v, self.hs)
        self.assertGreater(ctx.exception.residual, 0.0)
        with self.assertRaises(PreconditionError):
            forms.lie_bracket_1(v, v, self.hs)
        w = fixtures.solenoidal(self.hs, self.rng)
        self.assertLess(forms.divergence_residual(w, self.hs), 1e-12)
        forms.require_solenoidal(w, self.hs)
        self.assertEqual(forms.divergence_residual(Cochain.zeros(self.c, 1), self.hs), 0.0)

    def test_lie_bracket(self) -> None:
        a = fixtures.solenoidal(self.hs, self.rng)
        b = fixtures.solenoidal(self.hs, self.rng)
        ab = forms.lie_bracket_1(a, b, self.hs)
        ba = forms.lie_bracket_1(b, a, self.hs)
        self.assertEqual(ab.degree, 1)
        self.assertLess(np.abs(ab.values + ba.values).max(), conf.GALERKIN * max(1.0, np.abs(ab.values).max()))
