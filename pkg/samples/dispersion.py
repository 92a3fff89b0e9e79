#!/usr/bin/env python3
# -*- coding: utf-8 -*-
#
# Copyright (c) 2026 The phdec developers
# All rights reserved. Distributed under the BSD 3-Clause license, see LICENSE.
'''
Linear standing wave frequencies in a rectangular tank.

Prints the continuous dispersion value and the frequency of the linearized
discrete system on a tank mesh (surface potential against surface height,
coupled through the discrete Dirichlet to Neumann map), then the period and
the time step giving 200 steps per period.

    PYTHONPATH=../src python3 dispersion.py --mesh ../meshes/tank_32x8.mesh --g0 9.81
'''
import argparse
import sys

import numpy as np
import scipy.linalg

from phdec import dynamics
from phdec.complex import load_mesh
from phdec.energetics import SurfaceState
from phdec.forms import HodgeSystem


def discrete_frequencies(mesh: str, g0: float, capillarity: float) -> np.ndarray:
    c = load_mesh(mesh)
    hs = HodgeSystem(c)
    sigma = c.sigma_vertices
    free = np.setdiff1d(np.arange(c.n_vertices), sigma)
    s = hs.stiffness.toarray()
    # Schur complement: surface loads of the harmonic extension of surface values
    dtn = s[np.ix_(sigma, sigma)] - s[np.ix_(sigma, free)] @ np.linalg.solve(s[np.ix_(free, free)], s[np.ix_(free, sigma)])
    surface = SurfaceState.build(c, hs.positions)
    measure = np.diag(surface.measure)

    # Linearized curvature of a graph over the surface vertices (walls held at zero elevation)
    x = surface.positions[:, 0]
    order = np.argsort(x)
    n = len(sigma)
    curvature = np.zeros((n, n))
    for k in range(n):
        i = order[k]
        left = x[order[k - 1]] if k > 0 else c.vertices[:, 0].min()
        right = x[order[k + 1]] if k < n - 1 else c.vertices[:, 0].max()
        hl, hr = x[i] - left, right - x[i]
        if k > 0:
            curvature[i, order[k - 1]] = -2.0 / (hl * (hl + hr))
        if k < n - 1:
            curvature[i, order[k + 1]] = -2.0 / (hr * (hl + hr))
        curvature[i, i] = 2.0 / (hl * hr)
    restoring = g0 * np.eye(n) + capillarity * curvature
    # omega^2 = eigenvalues of M^-1 DtN (g + tau K)
    eig = scipy.linalg.eigvals(np.linalg.solve(measure, dtn) @ restoring)
    return np.sort(np.sqrt(np.abs(eig.real)))


def main() -> None:
    parser = argparse.ArgumentParser(description='Linear standing wave frequencies')
    parser.add_argument('--mesh', default='../meshes/tank_32x8.mesh')
    parser.add_argument('--length', type=float, default=1.0)
    parser.add_argument('--depth', type=float, default=0.25)
    parser.add_argument('--mode', type=int, default=1)
    parser.add_argument('--g0', type=float, default=9.81)
    parser.add_argument('--tau', type=float, default=0.0)
    parser.add_argument('--rho', type=float, default=1.0)
    args = parser.parse_args()

    capillarity = args.tau / args.rho
    omega = dynamics.linear_dispersion_frequency(args.mode, args.length, args.depth, args.g0, capillarity)
    discrete = discrete_frequencies(args.mesh, args.g0, capillarity)
    closest = float(discrete[np.argmin(np.abs(discrete - omega))])
    sys.stdout.write(f'continuous omega = {omega:.10e}\n')
    sys.stdout.write(f'discrete omega   = {closest:.10e} ({100 * (closest / omega - 1):+.3f}%)\n')
    sys.stdout.write(f'period           = {2 * np.pi / omega:.10e}\n')
    sys.stdout.write(f'dt (200/period)  = {2 * np.pi / omega / 200:.10e}\n')


if __name__ == "__main__":
    main()
