# -*- coding: utf-8 -*-
#
# Copyright (c) 2026 The phdec developers
# All rights reserved. Distributed under the BSD 3-Clause license, see LICENSE.
'''
Time stepping of free surface flows.

Two steppers share the moving mesh machinery:

* ``potential``: irrotational flow, the unknowns are the surface potential
  and the surface vertex positions. The interior potential is recovered by a
  mixed Dirichlet (surface) / Neumann (walls) solve.
* ``rotational``: the unknowns are the velocity 1-cochain and the surface
  vertex positions. The pressure comes from a Poisson problem that keeps the
  weak divergence at its prescribed value.

Surface vertices move along their normals with the discrete normal velocity.
The interior vertices follow by harmonic extension over the reference mesh;
wall vertices never move.
'''
import dataclasses
import logging
import typing

import numpy as np

from . import consts, elliptic, forms
from .complex import SimplicialComplex, load_mesh
from .energetics import (
    Energy,
    PhysParams,
    SurfaceState,
    bernoulli_head,
    domain_area,
    gravity_energy,
    gravity_gradient,
    nodal_pairing,
    surface_length,
)
from .errors import ConfigError, GeometryError, PHError, SolverError
from .forms import Cochain, HodgeSystem

if typing.TYPE_CHECKING:
    from .config import RunConfig

logger = logging.getLogger(__name__)

POTENTIAL = 'potential'
ROTATIONAL = 'rotational'

CSV_COLUMNS = ('t', 'H', 'H_kin', 'H_grav', 'H_surf', 'port_flux', 'area', 'div_residual')


# Wall inflow
@dataclasses.dataclass(frozen=True, eq=False)
class Inflow:
    """
    Prescribed normal velocity on one wall. ``speed(t)`` is the inflow speed
    (into the domain); the outward normal velocity is its negative.

    Without a table the speed is a ``sin^2`` pulse of the given amplitude and
    duration, zero afterwards. A table of ``(t, speed)`` pairs is linearly
    interpolated and held constant beyond its ends.
    """

    weights: np.ndarray  # vertex loads of a unit outward normal velocity on the wall
    amplitude: float = 0.0
    duration: float = 0.0
    table: typing.Tuple[typing.Tuple[float, float], ...] = ()

    def speed(self, t: float) -> float:
        if self.table:
            ts, gs = zip(*self.table)
            return float(np.interp(t, ts, gs))
        if self.duration <= 0 or not 0 <= t <= self.duration:
            return 0.0
        return self.amplitude * np.sin(np.pi * t / self.duration) ** 2

    def acceleration(self, t: float) -> float:
        if self.table:
            ts = [p[0] for p in self.table]
            h = 1e-6 * max(1.0, ts[-1] - ts[0])
            return (self.speed(t + h) - self.speed(t - h)) / (2 * h)
        if self.duration <= 0 or not 0 <= t <= self.duration:
            return 0.0
        return self.amplitude * np.pi / self.duration * np.sin(2 * np.pi * t / self.duration)

    def loads(self, t: float) -> np.ndarray:
        """Outward flux loads at time ``t`` (full vertex vector)."""
        return -self.speed(t) * self.weights

    def load_rate(self, t: float) -> np.ndarray:
        return -self.acceleration(t) * self.weights

    @property
    def active(self) -> bool:
        return bool(self.table) or (self.amplitude != 0 and self.duration > 0)

    @staticmethod
    def on_wall(
        c: SimplicialComplex,
        wall: str,
        amplitude: float = 0.0,
        duration: float = 0.0,
        table: typing.Tuple[typing.Tuple[float, float], ...] = (),
    ) -> 'Inflow':
        x = c.vertices
        scale = float(np.ptp(x, axis=0).max())
        tol = 1e-9 * scale
        if wall == 'left':
            on = np.abs(x[:, 0] - x[:, 0].min()) <= tol
        elif wall == 'right':
            on = np.abs(x[:, 0] - x[:, 0].max()) <= tol
        elif wall == 'bottom':
            on = np.abs(x[:, 1] - x[:, 1].min()) <= tol
        else:
            raise ConfigError(f'unknown inflow wall {wall}')
        weights = np.zeros(c.n_vertices)
        for e in c.gamma_edges():
            a, b = c.edges[e]
            if on[a] and on[b]:
                half = 0.5 * float(np.linalg.norm(x[b] - x[a]))
                weights[a] += half
                weights[b] += half
        if not weights.any():
            raise ConfigError(f'no wall edges on the {wall} side of the mesh')
        return Inflow(weights, amplitude, duration, table)


# Mesh motion
def local_edge_length(c: SimplicialComplex, positions: np.ndarray) -> np.ndarray:
    """Shortest incident edge length of every vertex."""
    lengths = np.linalg.norm(positions[c.edges[:, 1]] - positions[c.edges[:, 0]], axis=1)
    out = np.full(c.n_vertices, np.inf)
    np.minimum.at(out, c.edges[:, 0], lengths)
    np.minimum.at(out, c.edges[:, 1], lengths)
    return out


def check_displacement(c: SimplicialComplex, positions: np.ndarray, displacement: np.ndarray, dt: float) -> None:
    """Raises GeometryError when a vertex moves more than the allowed share of its shortest edge."""
    if displacement.size == 0:
        return
    moved = np.linalg.norm(displacement, axis=1)
    limit = consts.MAX_DISPLACEMENT_RATIO * local_edge_length(c, positions)
    ratio = moved / limit
    worst = int(np.argmax(ratio))
    if ratio[worst] > 1.0:
        raise GeometryError(
            f'vertex {worst} moves {moved[worst]:.3e}, more than {consts.MAX_DISPLACEMENT_RATIO} '
            f'of its shortest edge',
            suggested_dt=0.9 * dt / float(ratio[worst]),
        )


def advance_surface(
    c: SimplicialComplex, positions: np.ndarray, speeds: np.ndarray, dt: float
) -> np.ndarray:
    """
    Explicit move of the surface vertices by ``dt * speed`` along their
    normals. Returns the new surface positions.
    """
    surface = SurfaceState.build(c, positions)
    step = dt * speeds[:, None] * surface.normals
    full = np.zeros_like(positions)
    full[c.sigma_vertices] = step
    check_displacement(c, positions, full, dt)
    return surface.positions + step


def deform_mesh(reference: HodgeSystem, sigma_positions: np.ndarray) -> np.ndarray:
    """
    Vertex positions with the surface vertices at ``sigma_positions``, walls
    fixed and interior vertices displaced harmonically (over the reference
    mesh).
    """
    c = reference.complex
    base = np.asarray(reference.positions)
    if c.sigma_vertices.size == 0:
        return base.copy()
    boundary = c.boundary_vertices
    displacement = np.zeros((c.n_vertices, 2))
    displacement[c.sigma_vertices] = sigma_positions - base[c.sigma_vertices]
    out = base.copy()
    for k in range(2):
        out[:, k] += elliptic.harmonic_lift(displacement[boundary, k], reference).values
    return out


# Rates
def pressure_solve(
    v: Cochain,
    params: PhysParams,
    hs: HodgeSystem,
    load_rate: typing.Optional[np.ndarray] = None,
) -> Cochain:
    """
    Kinematic pressure ``p / rho`` (relative to ``pbar``) keeping the weak
    divergence of the velocity rate equal to ``load_rate`` (zero inside,
    prescribed on the walls). On the surface the pressure is the capillary
    jump ``tau k / rho``. A closed container gives a pure Neumann problem.
    """
    c = hs.complex
    n = c.n_vertices
    if load_rate is None:
        load_rate = np.zeros(n)
    vorticity = forms.d(v).values
    convective = hs.d0.T @ (hs.contraction_kernel(vorticity).T @ v.values)
    head = bernoulli_head(v, params, hs, np.arange(n))
    loads = -convective - hs.stiffness @ head - load_rate
    sigma = c.sigma_vertices
    if sigma.size == 0:
        return elliptic.mixed_solve(hs, sigma, np.zeros(0), loads)
    capillary = params.capillarity * SurfaceState.build(c, hs.positions).curvature
    return elliptic.mixed_solve(hs, sigma, capillary, loads)


def velocity_rate(v: Cochain, pressure: Cochain, params: PhysParams, hs: HodgeSystem) -> Cochain:
    """``-i_{v#} dv - d(1/2 |v|^2 + g0 y + p)``."""
    c = hs.complex
    head = bernoulli_head(v, params, hs, np.arange(c.n_vertices)) + pressure.values
    rate = -forms.contract_vorticity(v.values, forms.d(v).values, hs) - hs.d0 @ head
    return Cochain(1, rate, c)


def vorticity_rate(v: Cochain, hs: HodgeSystem) -> Cochain:
    """``-d i_{v#} dv``: gradients drop out of the vorticity equation."""
    return forms.d(Cochain(1, -forms.contract_vorticity(v.values, forms.d(v).values, hs), hs.complex))


def transport_residuals(v: Cochain, params: PhysParams, hs: HodgeSystem) -> typing.Dict[str, float]:
    """
    One step consistency of the vorticity and coexact equations against the
    velocity rate, relative to the rate norms.
    """
    pressure = pressure_solve(v, params, hs)
    rate = velocity_rate(v, pressure, params, hs)
    omega_dot = forms.d(rate)
    omega_ref = vorticity_rate(v, hs)
    eta_dot = elliptic.p_coexact(rate, hs)
    eta_ref = elliptic.p_coexact(
        Cochain(1, -forms.contract_vorticity(v.values, forms.d(v).values, hs), hs.complex), hs
    )
    scale_omega = max(1.0, omega_ref.norm())
    scale_eta = max(1.0, np.sqrt(max(forms.inner(eta_ref, eta_ref, hs), 0.0)))
    diff_eta = eta_dot - eta_ref
    return {
        'omega': (omega_dot - omega_ref).norm() / scale_omega,
        'eta': float(np.sqrt(max(forms.inner(diff_eta, diff_eta, hs), 0.0))) / scale_eta,
    }


# Initial conditions
def taylor_green(c: SimplicialComplex, amplitude: float = 1.0) -> forms.Field:
    """Single Taylor-Green cell over the bounding box of the mesh."""
    lo = c.vertices.min(axis=0)
    size = np.ptp(c.vertices, axis=0)

    def field(x: np.ndarray, y: np.ndarray) -> typing.Tuple[np.ndarray, np.ndarray]:
        sx = np.pi * (x - lo[0]) / size[0]
        sy = np.pi * (y - lo[1]) / size[1]
        u = amplitude * np.pi / size[1] * np.sin(sx) * np.cos(sy)
        w = -amplitude * np.pi / size[0] * np.cos(sx) * np.sin(sy)
        return u, w

    return field


def linear_dispersion_frequency(mode: int, length: float, depth: float, g0: float, capillarity: float = 0.0) -> float:
    """Angular frequency of a linear standing wave in a rectangular tank."""
    k = mode * np.pi / length
    return float(np.sqrt((g0 * k + capillarity * k**3) * np.tanh(k * depth)))


def measure_frequency(times: np.ndarray, signal: np.ndarray) -> float:
    """
    Angular frequency from the mean spacing of the zero crossings of
    ``signal - mean``. NaN with fewer than three crossings.
    """
    s = np.asarray(signal, dtype=float) - float(np.mean(signal))
    t = np.asarray(times, dtype=float)
    crossings = []
    for i in range(len(s) - 1):
        if s[i] == 0.0:
            crossings.append(t[i])
        elif s[i] * s[i + 1] < 0:
            crossings.append(t[i] - s[i] * (t[i + 1] - t[i]) / (s[i + 1] - s[i]))
    if len(crossings) < 3:
        return float('nan')
    half_period = float(np.mean(np.diff(crossings)))
    return np.pi / half_period


# Scenario and record
@dataclasses.dataclass(frozen=True, eq=False)
class Scenario:
    complex: SimplicialComplex
    formulation: str = POTENTIAL
    params: PhysParams = dataclasses.field(default_factory=PhysParams)
    integrator: str = 'implicit-midpoint'
    dt: float = 1e-2
    t_end: float = 1.0
    initial: str = 'flat'
    surface_amplitude: float = 0.0
    surface_mode: int = 1
    velocity_amplitude: float = 1.0
    inflow: typing.Optional[Inflow] = None
    probe_x: float = 0.0
    cadence: int = 1
    snapshots: bool = False

    def __post_init__(self) -> None:
        if self.formulation not in (POTENTIAL, ROTATIONAL):
            raise ConfigError(f'unknown formulation {self.formulation}')
        if self.integrator not in ('implicit-midpoint', 'rk4'):
            raise ConfigError(f'unknown integrator {self.integrator}')
        if self.formulation == POTENTIAL and self.initial == 'taylor-green':
            raise ConfigError('taylor-green initial data carries vorticity, use the rotational formulation')
        if self.formulation == POTENTIAL and self.complex.sigma_vertices.size == 0:
            raise ConfigError('potential formulation needs a free surface')
        if self.inflow is not None and self.inflow.active and self.complex.sigma_vertices.size == 0:
            raise ConfigError('inflow into a closed container')
        if not self.dt > 0:
            raise ConfigError('dt must be positive')

    @staticmethod
    def from_config(cfg: 'RunConfig') -> 'Scenario':
        scn = cfg.scenario
        c = load_mesh(scn.mesh)
        params = PhysParams(cfg.params.rho, cfg.params.tau, cfg.params.g0, cfg.params.pbar)
        inflow = None
        if scn.inflow_table or (scn.inflow_amplitude != 0 and scn.inflow_duration > 0):
            inflow = Inflow.on_wall(
                c, scn.inflow_wall, scn.inflow_amplitude, scn.inflow_duration, scn.inflow_table
            )
        return Scenario(
            complex=c,
            formulation=scn.formulation,
            params=params,
            integrator=scn.integrator,
            dt=scn.dt,
            t_end=scn.t_end,
            initial=scn.initial,
            surface_amplitude=scn.surface_amplitude,
            surface_mode=scn.surface_mode,
            velocity_amplitude=scn.velocity_amplitude,
            inflow=inflow,
            probe_x=scn.probe_x,
            cadence=cfg.output.cadence,
            snapshots=cfg.output.snapshots,
        )


@dataclasses.dataclass
class TrajectoryRecord:
    rows: typing.List[typing.Tuple[float, ...]] = dataclasses.field(default_factory=list)
    probe: typing.List[typing.Tuple[float, float]] = dataclasses.field(default_factory=list)
    snapshots: typing.Dict[int, np.ndarray] = dataclasses.field(default_factory=dict)
    steps: int = 0

    def column(self, name: str) -> np.ndarray:
        i = CSV_COLUMNS.index(name)
        return np.array([row[i] for row in self.rows])

    def energy_drift(self) -> float:
        h = self.column('H')
        if h.size == 0:
            return 0.0
        scale = max(abs(h[0]), np.abs(self.column('H_kin')).max(), 1e-300)
        return float(np.abs(h - h[0]).max() / scale)

    def area_drift(self) -> float:
        a = self.column('area')
        return float(np.abs(a - a[0]).max() / a[0]) if a.size else 0.0

    def power_residual(self) -> float:
        """
        Largest ``|dH/dt + port_flux|`` over the recorded intervals, trapezoid
        rule for the port term, relative to the largest energy rate scale.
        """
        t, h, port = self.column('t'), self.column('H'), self.column('port_flux')
        if t.size < 2:
            return 0.0
        dt = np.diff(t)
        balance = np.diff(h) / dt + 0.5 * (port[1:] + port[:-1])
        scale = max(float(np.abs(np.diff(h) / dt).max()), float(np.abs(port).max()), 1e-300)
        return float(np.abs(balance).max() / scale)

    def max_divergence(self) -> float:
        d = self.column('div_residual')
        return float(d.max()) if d.size else 0.0


# Stepper
class Simulation:
    """
    State vector: the surface potential (potential) or the velocity
    (rotational), followed by the flattened surface positions.
    """

    scenario: Scenario
    reference: HodgeSystem
    t: float
    y: np.ndarray
    steps: int

    _hs: typing.Optional[typing.Tuple[bytes, HodgeSystem]]

    def __init__(self, scenario: Scenario) -> None:
        self.scenario = scenario
        c = scenario.complex
        self.sigma = c.sigma_vertices
        self._hs = None
        self.t = 0.0
        self.steps = 0

        positions = np.array(c.vertices, dtype=float)
        if scenario.initial == 'flat' and self.sigma.size:
            positions[self.sigma, 1] = positions[self.sigma, 1].mean()
        elif scenario.initial == 'cosine' and self.sigma.size:
            lo = float(c.vertices[:, 0].min())
            width = float(np.ptp(c.vertices[:, 0]))
            phase = scenario.surface_mode * np.pi * (positions[self.sigma, 0] - lo) / width
            positions[self.sigma, 1] += scenario.surface_amplitude * np.cos(phase)
        self.reference = HodgeSystem(c)
        xs = positions[self.sigma]
        hs = self.geometry(xs.ravel())

        if scenario.formulation == POTENTIAL:
            field = np.zeros(self.sigma.size)
        elif scenario.initial == 'taylor-green':
            v = forms.project_field(taylor_green(c, scenario.velocity_amplitude), hs)
            field = np.array(elliptic.p_coexact(v, hs).values)
        else:
            field = np.zeros(c.n_edges)
        self.y = np.concatenate([field, xs.ravel()])
        logger.info(
            'Simulation: %s, %s, %d vertices, %d surface vertices, dt=%g',
            scenario.formulation,
            scenario.integrator,
            c.n_vertices,
            self.sigma.size,
            scenario.dt,
        )

    # State access
    @property
    def n_field(self) -> int:
        return self.y.size - 2 * self.sigma.size

    def split(self, y: np.ndarray) -> typing.Tuple[np.ndarray, np.ndarray]:
        n = self.n_field
        return y[:n], y[n:]

    def geometry(self, xs: np.ndarray) -> HodgeSystem:
        key = xs.tobytes()
        if self._hs is not None and self._hs[0] == key:
            return self._hs[1]
        if self.sigma.size == 0:
            hs = self.reference
        else:
            hs = HodgeSystem(self.scenario.complex, deform_mesh(self.reference, xs.reshape(-1, 2)))
        self._hs = (key, hs)
        return hs

    @property
    def hs(self) -> HodgeSystem:
        return self.geometry(self.split(self.y)[1])

    def _loads(self, t: float) -> np.ndarray:
        inflow = self.scenario.inflow
        if inflow is None:
            return np.zeros(self.scenario.complex.n_vertices)
        return inflow.loads(t)

    def _load_rate(self, t: float) -> np.ndarray:
        inflow = self.scenario.inflow
        if inflow is None:
            return np.zeros(self.scenario.complex.n_vertices)
        return inflow.load_rate(t)

    def potential(self, y: np.ndarray, t: float) -> Cochain:
        phi_s, xs = self.split(y)
        return elliptic.mixed_solve(self.geometry(xs), self.sigma, phi_s, self._loads(t))

    def velocity(self) -> Cochain:
        if self.scenario.formulation == ROTATIONAL:
            field, _ = self.split(self.y)
            return Cochain(1, field, self.scenario.complex)
        return forms.d(self.potential(self.y, self.t))

    # Rates
    def _surface_motion(self, hs: HodgeSystem, flux: np.ndarray) -> np.ndarray:
        if self.sigma.size == 0:
            return np.zeros(0)
        surface = SurfaceState.build(hs.complex, hs.positions)
        speed = flux / surface.measure
        return (speed[:, None] * surface.normals).ravel()

    def potential_rate(self, y: np.ndarray, t: float) -> np.ndarray:
        """
        Surface potential rate and normal surface velocity ``u = dn phi``.

        The Eulerian rate is ``-(1/2 |grad phi|^2 + g0 y) - tau k / rho``, with
        ``g0 y`` and ``k`` taken as the normal derivatives of the discrete
        gravity energy and surface length; vertices that follow the normal add
        ``u dn phi``.
        """
        params = self.scenario.params
        _, xs = self.split(y)
        hs = self.geometry(xs)
        c = hs.complex
        phi = self.potential(y, t)
        v = forms.d(phi)
        flux = (hs.stiffness @ phi.values)[self.sigma]
        surface = SurfaceState.build(c, hs.positions)
        head = 0.5 * nodal_pairing(v, v, hs, self.sigma) + gravity_gradient(c, hs.positions, params.g0)
        speed = flux / surface.measure
        phi_dot = -head - params.capillarity * surface.length_gradient + speed**2
        return np.concatenate([phi_dot, self._surface_motion(hs, flux)])

    def rotational_rate(self, y: np.ndarray, t: float) -> np.ndarray:
        params = self.scenario.params
        field, xs = self.split(y)
        hs = self.geometry(xs)
        v = Cochain(1, field, hs.complex)
        pressure = pressure_solve(v, params, hs, self._load_rate(t))
        v_dot = velocity_rate(v, pressure, params, hs)
        flux = forms.weak_divergence(v, hs)[self.sigma]
        return np.concatenate([v_dot.values, self._surface_motion(hs, flux)])

    def rate(self, y: np.ndarray, t: float) -> np.ndarray:
        if self.scenario.formulation == POTENTIAL:
            return self.potential_rate(y, t)
        return self.rotational_rate(y, t)

    # Integrators
    def _midpoint(self, y0: np.ndarray, t: float, dt: float) -> np.ndarray:
        y1 = y0 + dt * self.rate(y0, t)
        scale = max(1.0, float(np.abs(y0).max()))
        for iteration in range(consts.MIDPOINT_MAX_ITER):
            y_next = y0 + dt * self.rate(0.5 * (y0 + y1), t + 0.5 * dt)
            change = float(np.abs(y_next - y1).max())
            y1 = y_next
            if change <= consts.MIDPOINT_TOL * scale:
                logger.debug('midpoint converged in %d iterations', iteration + 1)
                return y1
        raise SolverError(
            f'implicit midpoint did not converge in {consts.MIDPOINT_MAX_ITER} iterations (last change {change:.3e})'
        )

    def _rk4(self, y0: np.ndarray, t: float, dt: float) -> np.ndarray:
        k1 = self.rate(y0, t)
        k2 = self.rate(y0 + 0.5 * dt * k1, t + 0.5 * dt)
        k3 = self.rate(y0 + 0.5 * dt * k2, t + 0.5 * dt)
        k4 = self.rate(y0 + dt * k3, t + dt)
        return y0 + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)

    def step(self, dt: typing.Optional[float] = None) -> None:
        dt = self.scenario.dt if dt is None else dt
        t = self.t
        try:
            old_positions = self.hs.positions
            if self.scenario.integrator == 'rk4':
                y1 = self._rk4(self.y, t, dt)
            else:
                y1 = self._midpoint(self.y, t, dt)
            field, xs = self.split(y1)
            full = np.zeros_like(old_positions)
            full[self.sigma] = xs.reshape(-1, 2) - old_positions[self.sigma]
            check_displacement(self.scenario.complex, np.asarray(old_positions), full, dt)
            hs = self.geometry(xs)
            if self.scenario.formulation == ROTATIONAL:
                field = elliptic.solenoidal_projection(Cochain(1, field, hs.complex), hs).values
                y1 = np.concatenate([field, xs])
        except GeometryError as e:
            error = GeometryError(f'step at t = {t:.6e}: {e}')
            error.suggested_dt = e.suggested_dt if e.suggested_dt is not None else 0.5 * dt
            raise error from None
        except SolverError as e:
            raise SolverError(f'step at t = {t:.6e}: {e}') from None
        self.y = y1
        self.t = t + dt
        self.steps += 1

    # Diagnostics
    def energy(self) -> Energy:
        params = self.scenario.params
        hs = self.hs
        c = hs.complex
        gravity = gravity_energy(c, hs.positions, params.g0)
        surface = params.capillarity * surface_length(c, hs.positions)
        if self.scenario.formulation == POTENTIAL:
            phi = self.potential(self.y, self.t).values
            kinetic = 0.5 * float(phi @ (hs.stiffness @ phi))
        else:
            v = self.velocity()
            kinetic = 0.5 * forms.inner(v, v, hs)
        return Energy(kinetic, gravity, surface)

    def port_head(self) -> np.ndarray:
        """Bernoulli head ``1/2 |v|^2 + p/rho + g0 y`` at every vertex."""
        params = self.scenario.params
        hs = self.hs
        c = hs.complex
        if self.scenario.formulation == ROTATIONAL:
            v = self.velocity()
            pressure = pressure_solve(v, params, hs, self._load_rate(self.t))
            return bernoulli_head(v, params, hs, np.arange(c.n_vertices)) + pressure.values
        # Unsteady Bernoulli: the head is -d_t phi at fixed points. d_t phi is
        # harmonic; on the surface it is the material rate minus u dn(phi).
        phi = self.potential(self.y, self.t)
        rate = self.potential_rate(self.y, self.t)[: self.sigma.size]
        surface = SurfaceState.build(c, hs.positions)
        normal_speed = (hs.stiffness @ phi.values)[self.sigma] / surface.measure
        phi_t = elliptic.mixed_solve(hs, self.sigma, rate - normal_speed**2, self._load_rate(self.t))
        return -phi_t.values

    def port_flux(self) -> float:
        """``sum_Gamma h g``: power leaving through the walls (negative while fluid is pushed in)."""
        inflow = self.scenario.inflow
        if inflow is None or not inflow.active:
            return 0.0
        return float(self.port_head() @ inflow.loads(self.t))

    def divergence_residual(self) -> float:
        if self.scenario.formulation == POTENTIAL:
            return 0.0
        hs = self.hs
        v = self.velocity()
        interior = hs.complex.interior_vertices
        div = forms.weak_divergence(v, hs)[interior]
        scale = max(1.0, np.sqrt(max(forms.inner(v, v, hs), 0.0)))
        return float(np.abs(div).max()) / scale if div.size else 0.0

    def probe(self) -> float:
        """Surface height at the surface vertex closest (in x) to the probe abscissa."""
        if self.sigma.size == 0:
            return float('nan')
        xs = self.split(self.y)[1].reshape(-1, 2)
        i = int(np.argmin(np.abs(self.scenario.complex.vertices[self.sigma, 0] - self.scenario.probe_x)))
        return float(xs[i, 1])

    def record(self, trajectory: TrajectoryRecord) -> None:
        e = self.energy()
        hs = self.hs
        trajectory.rows.append(
            (
                self.t,
                e.total,
                e.kinetic,
                e.gravity,
                e.surface,
                self.port_flux(),
                domain_area(hs.complex, hs.positions),
                self.divergence_residual(),
            )
        )
        trajectory.probe.append((self.t, self.probe()))
        if self.scenario.snapshots and self.sigma.size:
            trajectory.snapshots[self.steps] = np.array(hs.positions[self.sigma])


def run_scenario(scenario: Scenario) -> TrajectoryRecord:
    """Runs ``scenario`` from t = 0 to ``t_end``, recording every ``cadence`` steps."""
    sim = Simulation(scenario)
    trajectory = TrajectoryRecord()
    n_steps = int(np.ceil(scenario.t_end / scenario.dt - 1e-9))
    sim.record(trajectory)
    for k in range(n_steps):
        dt = min(scenario.dt, scenario.t_end - sim.t)
        if dt <= 0:
            break
        try:
            sim.step(dt)
        except PHError:
            logger.error('Run stopped after %d steps', sim.steps)
            raise
        if (k + 1) % scenario.cadence == 0 or k == n_steps - 1:
            sim.record(trajectory)
    trajectory.steps = sim.steps
    logger.info('Run finished: %d steps, t = %g', sim.steps, sim.t)
    return trajectory
