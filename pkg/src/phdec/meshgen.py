# -*- coding: utf-8 -*-
#
# Copyright (c) 2026 The phdec developers
# All rights reserved. Distributed under the BSD 3-Clause license, see LICENSE.
'''
Generators for the meshes shipped in ``meshes/`` and used by the tests.
'''
import math
import typing

import numpy as np

from . import consts
from .complex import SimplicialComplex, signed_areas

Sides = typing.Iterable[str]  # any of top, bottom, left, right


def _orient(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    # Flip whatever the construction produced clockwise
    triangles = triangles.copy()
    flip = signed_areas(vertices, triangles) < 0
    triangles[flip] = triangles[flip][:, [0, 2, 1]]
    return triangles


def structured_rectangle(
    nx: int,
    ny: int,
    width: float = 1.0,
    height: float = 1.0,
    origin: typing.Tuple[float, float] = (0.0, 0.0),
    sigma: Sides = ('top',),
) -> SimplicialComplex:
    """
    ``nx`` x ``ny`` cells, each split in two along the (0,0)-(1,1) diagonal.
    Sides listed in ``sigma`` are free surface, the rest are walls.
    """
    x0, y0 = origin
    xs = x0 + width * np.arange(nx + 1) / nx
    ys = y0 + height * np.arange(ny + 1) / ny
    vertices = np.array([(x, y) for y in ys for x in xs])

    def vid(i: int, j: int) -> int:
        return j * (nx + 1) + i

    triangles = []
    for j in range(ny):
        for i in range(nx):
            v00, v10, v01, v11 = vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1)
            triangles.append((v00, v10, v11))
            triangles.append((v00, v11, v01))

    sigma = set(sigma)
    labels: typing.Dict[typing.Tuple[int, int], str] = {}

    def label(side: str) -> str:
        return consts.SIGMA if side in sigma else consts.GAMMA

    for i in range(nx):
        labels[(vid(i, 0), vid(i + 1, 0))] = label('bottom')
        labels[(vid(i, ny), vid(i + 1, ny))] = label('top')
    for j in range(ny):
        labels[(vid(0, j), vid(0, j + 1))] = label('left')
        labels[(vid(nx, j), vid(nx, j + 1))] = label('right')
    return SimplicialComplex(vertices, _orient(vertices, np.array(triangles)), labels)


def tank(nx: int, ny: int, length: float = 1.0, depth: float = 1.0) -> SimplicialComplex:
    """Rectangular tank, still water surface at y = 0 (Sigma), bottom at y = -depth."""
    return structured_rectangle(nx, ny, length, depth, origin=(0.0, -depth), sigma=('top',))


def _rings(
    n: int, radii: typing.Sequence[float], center: typing.Optional[int]
) -> typing.Tuple[typing.List[typing.Tuple[float, float]], typing.List[typing.Tuple[int, int, int]]]:
    vertices: typing.List[typing.Tuple[float, float]] = []
    if center is not None:
        vertices.append((0.0, 0.0))
    offset = len(vertices)
    for r in radii:
        for j in range(n):
            theta = 2.0 * math.pi * j / n
            vertices.append((r * math.cos(theta), r * math.sin(theta)))

    def vid(ring: int, j: int) -> int:
        return offset + ring * n + (j % n)

    triangles: typing.List[typing.Tuple[int, int, int]] = []
    if center is not None:
        for j in range(n):
            triangles.append((0, vid(0, j), vid(0, j + 1)))
    for ring in range(len(radii) - 1):
        for j in range(n):
            inner_j, inner_k = vid(ring, j), vid(ring, j + 1)
            outer_j, outer_k = vid(ring + 1, j), vid(ring + 1, j + 1)
            triangles.append((inner_j, outer_j, outer_k))
            triangles.append((inner_j, outer_k, inner_k))
    return vertices, triangles


def polygon_disc(n: int = 32, radius: float = 1.0, layers: int = 4, label: str = consts.SIGMA) -> SimplicialComplex:
    """Disc with ``n`` boundary vertices on the circle. Default labels make it a droplet (Gamma empty)."""
    radii = [radius * (k + 1) / layers for k in range(layers)]
    vertices, triangles = _rings(n, radii, center=0)
    v = np.array(vertices)
    outer = [1 + (layers - 1) * n + j for j in range(n)]
    labels = {(outer[j], outer[(j + 1) % n]): label for j in range(n)}
    return SimplicialComplex(v, _orient(v, np.array(triangles)), labels)


def annulus(n: int = 16, inner: float = 0.5, outer: float = 1.0, layers: int = 2) -> SimplicialComplex:
    radii = [inner + (outer - inner) * k / layers for k in range(layers + 1)]
    vertices, triangles = _rings(n, radii, center=None)
    v = np.array(vertices)
    labels: typing.Dict[typing.Tuple[int, int], str] = {}
    for ring in (0, layers):
        ids = [ring * n + j for j in range(n)]
        for j in range(n):
            labels[(ids[j], ids[(j + 1) % n])] = consts.GAMMA
    return SimplicialComplex(v, _orient(v, np.array(triangles)), labels)


def single_triangle(label: str = consts.GAMMA) -> SimplicialComplex:
    vertices = np.array([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)])
    return SimplicialComplex(vertices, np.array([(0, 1, 2)]), {(0, 1): label, (1, 2): label, (2, 0): label})


def two_triangles() -> SimplicialComplex:
    vertices = np.array([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (3.0, 0.0), (4.0, 0.0), (3.0, 1.0)])
    labels = {(a, b): consts.GAMMA for a, b in ((0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3))}
    return SimplicialComplex(vertices, np.array([(0, 1, 2), (3, 4, 5)]), labels)
