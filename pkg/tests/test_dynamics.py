# -*- coding: utf-8 -*-
#
# Copyright (c) 2026 The phdec developers
# All rights reserved. Distributed under the BSD 3-Clause license, see LICENSE.
import logging
import math
import typing
from unittest import TestCase

import numpy as np

from phdec import config, consts, dynamics, elliptic, forms
from phdec.complex import SimplicialComplex, load_mesh
from phdec.dynamics import Inflow, Scenario, Simulation
from phdec.energetics import PhysParams, gravity_energy
from phdec.errors import ConfigError, GeometryError
from phdec.forms import HodgeSystem

from .utils import conf, fixtures, tools

CONSTANT_INFLOW = ((0.0, 0.02), (1.0, 0.02))


class TestInflow(TestCase):
    def test_table(self) -> None:
        c = fixtures.tank()
        inflow = Inflow.on_wall(c, 'left', table=CONSTANT_INFLOW)
        self.assertTrue(inflow.active)
        self.assertAlmostEqual(float(inflow.weights.sum()), conf.TANK_DEPTH, places=13)
        self.assertTrue((inflow.weights[c.vertices[:, 0] > 0] == 0).all())
        for t in (0.0, 0.37, 5.0):
            self.assertAlmostEqual(inflow.speed(t), 0.02, places=15)
            self.assertAlmostEqual(inflow.acceleration(t), 0.0, places=9)
        # fluid is pushed in: outward loads are negative
        self.assertTrue(np.allclose(inflow.loads(0.5), -0.02 * inflow.weights))

    def test_pulse(self) -> None:
        inflow = Inflow.on_wall(fixtures.tank(), 'right', amplitude=0.1, duration=1.0)
        self.assertAlmostEqual(inflow.speed(0.5), 0.1, places=14)
        self.assertEqual(inflow.speed(1.5), 0.0)
        self.assertEqual(inflow.speed(-0.1), 0.0)
        self.assertAlmostEqual(inflow.acceleration(0.25), 0.1 * math.pi, places=12)
        self.assertTrue(np.allclose(inflow.load_rate(0.25), -0.1 * math.pi * inflow.weights))
        self.assertFalse(Inflow.on_wall(fixtures.tank(), 'bottom').active)

    def test_bad_walls(self) -> None:
        with self.assertRaises(ConfigError):
            Inflow.on_wall(fixtures.tank(), 'top')
        # a droplet has no walls
        with self.assertRaises(ConfigError):
            Inflow.on_wall(fixtures.droplet(), 'left')


class TestMeshMotion(TestCase):
    def setUp(self) -> None:
        self.c = fixtures.tank(8, 4)

    def test_check_displacement(self) -> None:
        positions = np.array(self.c.vertices)
        displacement = np.zeros_like(positions)
        dynamics.check_displacement(self.c, positions, displacement, 0.1)
        shortest = dynamics.local_edge_length(self.c, positions)
        v = int(self.c.sigma_vertices[2])
        displacement[v, 1] = shortest[v]
        with self.assertRaises(GeometryError) as ctx:
            dynamics.check_displacement(self.c, positions, displacement, 0.1)
        assert ctx.exception.suggested_dt is not None
        self.assertLess(ctx.exception.suggested_dt, 0.1)
        self.assertAlmostEqual(ctx.exception.suggested_dt, 0.9 * 0.1 * consts.MAX_DISPLACEMENT_RATIO, places=12)

    def test_advance_surface(self) -> None:
        positions = np.array(self.c.vertices)
        speeds = np.full(len(self.c.sigma_vertices), 0.01)
        moved = dynamics.advance_surface(self.c, positions, speeds, 0.1)
        self.assertTrue(np.allclose(moved[:, 1], 0.001))
        self.assertTrue(np.allclose(moved[:, 0], positions[self.c.sigma_vertices, 0]))
        with self.assertRaises(GeometryError) as ctx:
            dynamics.advance_surface(self.c, positions, speeds * 1000, 0.1)
        self.assertIsNotNone(ctx.exception.suggested_dt)

    def test_deform_mesh(self) -> None:
        hs = HodgeSystem(self.c)
        target = np.array(self.c.vertices[self.c.sigma_vertices])
        target[:, 1] += 0.01
        deformed = dynamics.deform_mesh(hs, target)
        self.assertTrue(np.allclose(deformed[self.c.sigma_vertices], target))
        self.assertTrue(np.array_equal(deformed[self.c.gamma_vertices], self.c.vertices[self.c.gamma_vertices]))
        # still a valid mesh
        HodgeSystem(self.c, deformed)
        self.assertTrue(np.array_equal(dynamics.deform_mesh(hs, self.c.vertices[self.c.sigma_vertices]), self.c.vertices))


class TestRates(TestCase):
    def test_hydrostatic_pressure(self) -> None:
        params = PhysParams(g0=9.81)
        for c in (fixtures.tank(8, 4), fixtures.square()):
            hs = HodgeSystem(c)
            v = forms.Cochain.zeros(c, 1)
            pressure = dynamics.pressure_solve(v, params, hs)
            rate = dynamics.velocity_rate(v, pressure, params, hs)
            self.assertLess(np.abs(rate.values).max(), 1e-10)

    def test_transport(self) -> None:
        c = fixtures.square()
        hs = HodgeSystem(c)
        v = elliptic.p_coexact(forms.project_field(dynamics.taylor_green(c, 0.5), hs), hs)
        residuals = dynamics.transport_residuals(v, PhysParams(g0=9.81), hs)
        self.assertLess(residuals['omega'], 1e-10)
        self.assertLess(residuals['eta'], 1e-10)

    def test_dispersion(self) -> None:
        deep = dynamics.linear_dispersion_frequency(1, 1.0, 100.0, 9.81)
        self.assertAlmostEqual(deep, math.sqrt(9.81 * math.pi), places=12)
        k = 2 * math.pi / 2.0
        capillary = dynamics.linear_dispersion_frequency(2, 2.0, 0.5, 9.81, 0.1)
        self.assertAlmostEqual(capillary, math.sqrt((9.81 * k + 0.1 * k**3) * math.tanh(0.5 * k)), places=12)

    def test_measure_frequency(self) -> None:
        t = np.linspace(0.0, 4.0 * math.pi, 4001)
        self.assertLess(abs(dynamics.measure_frequency(t, np.sin(2.0 * t)) - 2.0), 1e-4)
        self.assertTrue(math.isnan(dynamics.measure_frequency(t, np.ones_like(t))))


class TestScenario(TestCase):
    def test_invalid(self) -> None:
        tank = fixtures.tank(4, 2)
        square = fixtures.square(2)
        for kwargs in (
            {'complex': tank, 'formulation': 'lagrangian'},
            {'complex': tank, 'integrator': 'euler'},
            {'complex': tank, 'initial': 'taylor-green'},
            {'complex': square},
            {
                'complex': square,
                'formulation': dynamics.ROTATIONAL,
                'inflow': Inflow.on_wall(square, 'left', table=CONSTANT_INFLOW),
            },
            {'complex': tank, 'dt': 0.0},
            {'complex': tank, 'dt': -0.01},
        ):
            with self.assertRaises(ConfigError, msg=f'{kwargs}'):
                Scenario(**kwargs)

    def test_from_config(self) -> None:
        with tools.temp_dir() as directory:
            cfg = config.read(tools.run_config(directory, conf.TANK_MESH))
            scenario = Scenario.from_config(cfg)
            self.assertEqual(scenario.formulation, dynamics.POTENTIAL)
            self.assertIsNone(scenario.inflow)
            self.assertEqual(scenario.params.g0, 9.81)
            cfg = config.read(tools.run_config(directory, conf.TANK_MESH, inflow_table='0:0.02, 1:0.02'))
            scenario = Scenario.from_config(cfg)
            assert scenario.inflow is not None
            self.assertAlmostEqual(scenario.inflow.speed(0.5), 0.02, places=15)


class TestSimulation(TestCase):
    def setUp(self) -> None:
        logging.disable(logging.WARNING)

    def tearDown(self) -> None:
        logging.disable(logging.NOTSET)

    def test_potential_rest(self) -> None:
        c = fixtures.tank(8, 4)
        sim = Simulation(Scenario(c, dynamics.POTENTIAL, PhysParams(g0=9.81), dt=0.01))
        y0 = sim.y.copy()
        for _ in range(3):
            sim.step()
        self.assertTrue(np.allclose(sim.y, y0, atol=1e-14))
        self.assertEqual(sim.steps, 3)
        self.assertAlmostEqual(sim.t, 0.03, places=14)
        energy = sim.energy()
        self.assertLess(energy.kinetic, 1e-20)
        self.assertAlmostEqual(energy.gravity, gravity_energy(c, c.vertices, 9.81), places=12)
        self.assertEqual(sim.port_flux(), 0.0)
        self.assertLess(np.abs(sim.velocity().values).max(), 1e-14)

    def test_rotational_rest(self) -> None:
        for c in (fixtures.tank(8, 4), load_mesh(conf.BOX_MESH)):
            sim = Simulation(Scenario(c, dynamics.ROTATIONAL, PhysParams(g0=9.81), dt=0.01))
            for _ in range(3):
                sim.step()
            self.assertLess(np.abs(sim.velocity().values).max(), 1e-9)
            self.assertLess(sim.divergence_residual(), 1e-9)

    def test_taylor_green(self) -> None:
        scenario = Scenario(
            load_mesh(conf.BOX_MESH),
            dynamics.ROTATIONAL,
            PhysParams(g0=0.0),
            dt=0.01,
            t_end=0.05,
            initial='taylor-green',
            velocity_amplitude=0.1,
        )
        record = dynamics.run_scenario(scenario)
        self.assertEqual(record.steps, 5)
        self.assertEqual(len(record.rows), 6)
        self.assertGreater(record.column('H_kin')[0], 0.0)
        self.assertLess(record.energy_drift(), 1e-8)
        self.assertLess(record.max_divergence(), 1e-9)
        self.assertEqual(record.area_drift(), 0.0)
        self.assertTrue(all(math.isnan(p) for _, p in record.probe))

    def test_constant_inflow(self) -> None:
        c = fixtures.tank()
        scenario = Scenario(
            c,
            dynamics.POTENTIAL,
            PhysParams(g0=9.81),
            dt=0.01,
            t_end=0.1,
            inflow=Inflow.on_wall(c, 'left', table=CONSTANT_INFLOW),
            snapshots=True,
        )
        record = dynamics.run_scenario(scenario)
        area = record.column('area')
        expected = 0.02 * conf.TANK_DEPTH * 0.1
        self.assertLess(abs((area[-1] - area[0]) - expected), 1e-2 * expected)
        self.assertEqual(len(record.snapshots), 11)
        self.assertTrue(math.isfinite(record.power_residual()))

    def test_standing_wave(self) -> None:
        scenario = Scenario(
            fixtures.tank(),
            dynamics.POTENTIAL,
            PhysParams(g0=9.81),
            dt=0.01,
            t_end=0.1,
            initial='cosine',
            surface_amplitude=0.0025,
            probe_x=0.0,
            cadence=2,
        )
        record = dynamics.run_scenario(scenario)
        self.assertEqual(record.steps, 10)
        self.assertEqual(len(record.rows), 6)
        self.assertLess(record.energy_drift(), consts.TOL_ENERGY)
        self.assertLess(record.area_drift(), consts.TOL_AREA)
        # the probe sits on a crest that starts to fall
        self.assertLess(record.probe[-1][1], record.probe[0][1])

    def test_step_too_large(self) -> None:
        scenario = Scenario(
            fixtures.tank(),
            dynamics.POTENTIAL,
            PhysParams(g0=9.81),
            integrator='rk4',
            dt=2.0,
            initial='cosine',
            surface_amplitude=0.01,
        )
        sim = Simulation(scenario)
        with self.assertRaises(GeometryError) as ctx:
            sim.step()
        assert ctx.exception.suggested_dt is not None
        self.assertLess(ctx.exception.suggested_dt, 2.0)
        self.assertEqual(sim.steps, 0)


class TestStandingWave(TestCase):
    """Small amplitude standing waves in the still water tank (amplitude / depth = 0.01)."""

    amplitude = 0.01 * conf.TANK_DEPTH

    def setUp(self) -> None:
        logging.disable(logging.WARNING)
        self.omega = dynamics.linear_dispersion_frequency(1, conf.TANK_LENGTH, conf.TANK_DEPTH, 9.81)
        self.period = 2.0 * math.pi / self.omega

    def tearDown(self) -> None:
        logging.disable(logging.NOTSET)

    def scenario(self, c: SimplicialComplex, dt: float, t_end: float, **kwargs: typing.Any) -> Scenario:
        return Scenario(
            c,
            dynamics.POTENTIAL,
            PhysParams(g0=9.81),
            dt=dt,
            t_end=t_end,
            initial='cosine',
            surface_amplitude=self.amplitude,
            **kwargs,
        )

    def test_ten_periods(self) -> None:
        c = fixtures.tank(8, 4)
        record = dynamics.run_scenario(self.scenario(c, self.period / 200, 10 * self.period, cadence=10))
        self.assertEqual(record.steps, 2000)
        self.assertLess(record.energy_drift(), consts.TOL_ENERGY)
        self.assertLess(record.area_drift(), consts.TOL_AREA)
        h = record.column('H')
        wave = h[0] - gravity_energy(c, c.vertices, 9.81)
        self.assertGreater(wave, 0.0)
        self.assertLess(np.abs(h - h[0]).max() / wave, 0.05)

    def test_step_convergence(self) -> None:
        c = fixtures.tank(8, 4)
        states = []
        for dt, n in ((0.04, 10), (0.02, 20), (0.01, 40)):
            sim = Simulation(self.scenario(c, dt, n * dt))
            for _ in range(n):
                sim.step()
            states.append(sim.y)
        coarse = float(np.linalg.norm(states[0] - states[1]))
        fine = float(np.linalg.norm(states[1] - states[2]))
        self.assertGreater(fine, 1e-9)
        # implicit midpoint is second order
        self.assertTrue(3.5 < coarse / fine < 4.5, coarse / fine)

    def test_dispersion(self) -> None:
        record = dynamics.run_scenario(self.scenario(fixtures.tank(64, 8), 0.01, 2.0 * self.period, probe_x=0.25))
        t, height = (np.array(column) for column in zip(*record.probe))
        measured = dynamics.measure_frequency(t, height)
        self.assertLess(abs(measured - self.omega) / self.omega, 0.03)


class TestPowerBalance(TestCase):
    def setUp(self) -> None:
        logging.disable(logging.WARNING)

    def tearDown(self) -> None:
        logging.disable(logging.NOTSET)

    def test_bottom_pulse(self) -> None:
        c = fixtures.tank()
        inflow = Inflow.on_wall(c, 'bottom', amplitude=5e-4, duration=0.4)
        scenario = Scenario(c, dynamics.POTENTIAL, PhysParams(g0=9.81), dt=1e-3, t_end=0.4, inflow=inflow)
        record = dynamics.run_scenario(scenario)
        self.assertEqual(record.steps, 400)
        port = record.column('port_flux')
        # work is done on the fluid while the pulse accelerates it
        self.assertLess(port[: len(port) // 4].sum(), 0.0)
        self.assertLess(record.power_residual(), consts.TOL_POWER)
        area = record.column('area')
        pushed = 0.5 * 5e-4 * 0.4 * conf.TANK_LENGTH
        self.assertLess(abs((area[-1] - area[0]) - pushed), 1e-2 * pushed)
