# -*- coding: utf-8 -*-
#
# Copyright (c) 2026 The phdec developers
# All rights reserved. Distributed under the BSD 3-Clause license, see LICENSE.
'''
Oriented 2D simplicial complexes with a labelled boundary.

Conventions used everywhere else in the package:

* edges are stored ``(a, b)`` with ``a < b``; ``D0`` has -1 at ``a`` and +1 at ``b``.
* triangles are counterclockwise; ``D1`` row of ``(i, j, k)`` is the signed sum
  of ``[i, j] + [j, k] + [k, i]``.
* the boundary is traversed counterclockwise (domain on the left), the outward
  normal is on the right of the traversal direction.
* vertices touching a GAMMA edge (corners included) belong to Gamma; Sigma
  vertices are the ones whose boundary edges are all SIGMA.
'''
import itertools
import logging
import os
import typing

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from . import consts
from .errors import BoundaryLabelError, MeshError, NonManifoldError, OrientationError

logger = logging.getLogger(__name__)

_ids = itertools.count(1)

LOCAL_EDGES: typing.Final[typing.Tuple[typing.Tuple[int, int], ...]] = ((0, 1), (1, 2), (2, 0))

BoundaryLabels = typing.Mapping[typing.Tuple[int, int], str]


def signed_areas(positions: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    p0 = positions[triangles[:, 0]]
    p1 = positions[triangles[:, 1]]
    p2 = positions[triangles[:, 2]]
    return 0.5 * (
        (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1]) - (p1[:, 1] - p0[:, 1]) * (p2[:, 0] - p0[:, 0])
    )


class SimplicialComplex:
    """
    Immutable oriented triangulation.

    ``mesh_id`` identifies the topology; cochains built on a complex can only
    be combined with cochains of the same ``mesh_id``. Deforming the vertex
    positions (see ``with_positions``) keeps the id.
    """

    mesh_id: int
    vertices: np.ndarray  # (N, 2) reference positions
    edges: np.ndarray  # (E, 2), a < b
    triangles: np.ndarray  # (M, 3), counterclockwise
    tri_edges: np.ndarray  # (M, 3) edge index of local edges [i,j], [j,k], [k,i]
    tri_signs: np.ndarray  # (M, 3) +1 if local edge agrees with the stored orientation
    d0: sp.csr_matrix  # (E, N) integer
    d1: sp.csr_matrix  # (M, E) integer

    boundary_edges: np.ndarray  # edge indices
    boundary_labels: np.ndarray  # SIGMA / GAMMA per boundary edge
    boundary_dir: np.ndarray  # +1 if the counterclockwise traversal goes a -> b
    boundary_vertices: np.ndarray  # sorted
    sigma_vertices: np.ndarray  # sorted, Sigma-interior
    gamma_vertices: np.ndarray  # sorted, includes corners
    interior_vertices: np.ndarray  # sorted
    boundary_loops: typing.List[typing.List[int]]  # vertex rings in traversal order

    _edge_index: typing.Dict[typing.Tuple[int, int], int]

    def __init__(
        self,
        vertices: np.ndarray,
        triangles: np.ndarray,
        labels: BoundaryLabels,
        *,
        mesh_id: typing.Optional[int] = None,
    ) -> None:
        self.mesh_id = mesh_id if mesh_id is not None else next(_ids)
        self.vertices = np.array(vertices, dtype=float).reshape(-1, 2)
        self.triangles = np.array(triangles, dtype=np.int64).reshape(-1, 3)
        self.vertices.flags.writeable = False
        self.triangles.flags.writeable = False
        self._build_edges()
        self._validate_orientation()
        self._build_boundary(labels)
        self._build_vertex_sets()

    # Construction helpers
    def _build_edges(self) -> None:
        n_vertices = len(self.vertices)
        if self.triangles.size and (self.triangles.min() < 0 or self.triangles.max() >= n_vertices):
            bad = int(np.argmax((self.triangles < 0).any(axis=1) | (self.triangles >= n_vertices).any(axis=1)))
            raise MeshError('triangle references an unknown vertex', simplex=tuple(int(i) for i in self.triangles[bad]))
        for t in self.triangles:
            if len(set(t.tolist())) != 3:
                raise MeshError('degenerate triangle', simplex=tuple(int(i) for i in t))

        self._edge_index = {}
        edges: typing.List[typing.Tuple[int, int]] = []
        tri_edges = np.zeros((len(self.triangles), 3), dtype=np.int64)
        tri_signs = np.zeros((len(self.triangles), 3), dtype=np.int64)
        incidence: typing.Dict[int, int] = {}
        for t, tri in enumerate(self.triangles):
            for local, (p, q) in enumerate(LOCAL_EDGES):
                a, b = int(tri[p]), int(tri[q])
                key = (a, b) if a < b else (b, a)
                e = self._edge_index.get(key)
                if e is None:
                    e = len(edges)
                    self._edge_index[key] = e
                    edges.append(key)
                tri_edges[t, local] = e
                tri_signs[t, local] = 1 if a < b else -1
                incidence[e] = incidence.get(e, 0) + 1

        self.edges = np.array(edges, dtype=np.int64).reshape(-1, 2)
        self.tri_edges = tri_edges
        self.tri_signs = tri_signs
        for e, count in incidence.items():
            if count > 2:
                raise NonManifoldError('edge shared by more than two triangles', simplex=tuple(edges[e]))
        self._incidence = np.array([incidence[e] for e in range(len(edges))], dtype=np.int64)

        n_edges = len(edges)
        rows = np.repeat(np.arange(n_edges), 2)
        cols = self.edges.reshape(-1)
        vals = np.tile(np.array([-1, 1], dtype=np.int64), n_edges)
        self.d0 = sp.csr_matrix((vals, (rows, cols)), shape=(n_edges, n_vertices), dtype=np.int64)
        m = len(self.triangles)
        self.d1 = sp.csr_matrix(
            (tri_signs.reshape(-1), (np.repeat(np.arange(m), 3), tri_edges.reshape(-1))),
            shape=(m, n_edges),
            dtype=np.int64,
        )

    def _validate_orientation(self) -> None:
        areas = signed_areas(self.vertices, self.triangles)
        flipped = np.nonzero(areas <= 0)[0]
        if flipped.size:
            t = int(flipped[0])
            raise OrientationError(
                'triangle is not counterclockwise', simplex=tuple(int(i) for i in self.triangles[t])
            )
        # Interior edges must be traversed in opposite directions by their two triangles
        column_sums = np.asarray(self.d1.sum(axis=0)).reshape(-1)
        bad = np.nonzero((self._incidence == 2) & (column_sums != 0))[0]
        if bad.size:
            raise OrientationError('inconsistent orientation across edge', simplex=tuple(self.edges[bad[0]]))

    def _build_boundary(self, labels: BoundaryLabels) -> None:
        boundary = np.nonzero(self._incidence == 1)[0]
        normalized: typing.Dict[typing.Tuple[int, int], str] = {}
        for (a, b), label in labels.items():
            key = (a, b) if a < b else (b, a)
            label = label.upper()
            if label not in (consts.SIGMA, consts.GAMMA):
                raise BoundaryLabelError(f'unknown boundary label {label}', simplex=key)
            if key not in self._edge_index or self._incidence[self._edge_index[key]] != 1:
                raise BoundaryLabelError('label given for a non boundary edge', simplex=key)
            normalized[key] = label

        self.boundary_edges = boundary
        labels_out: typing.List[str] = []
        for e in boundary:
            key = (int(self.edges[e, 0]), int(self.edges[e, 1]))
            if key not in normalized:
                raise BoundaryLabelError('unlabeled boundary edge', simplex=key)
            labels_out.append(normalized[key])
        self.boundary_labels = np.array(labels_out, dtype=object)

        # Orientation of the boundary edges is inherited from their only triangle
        column_sums = np.asarray(self.d1.sum(axis=0)).reshape(-1)
        self.boundary_dir = column_sums[boundary].astype(np.int64)

        # Boundary must be a set of closed curves
        successor: typing.Dict[int, int] = {}
        degree: typing.Dict[int, int] = {}
        for e, direction in zip(boundary, self.boundary_dir):
            a, b = int(self.edges[e, 0]), int(self.edges[e, 1])
            start, end = (a, b) if direction > 0 else (b, a)
            if start in successor:
                raise NonManifoldError('boundary vertex with more than two boundary edges', simplex=(start,))
            successor[start] = end
            degree[start] = degree.get(start, 0) + 1
            degree[end] = degree.get(end, 0) + 1
        for v, count in degree.items():
            if count != 2:
                raise NonManifoldError('boundary vertex without exactly two boundary edges', simplex=(v,))

        loops: typing.List[typing.List[int]] = []
        pending = set(successor)
        while pending:
            first = min(pending)
            loop = [first]
            pending.discard(first)
            current = successor[first]
            while current != first:
                loop.append(current)
                pending.discard(current)
                current = successor[current]
            loops.append(loop)
        self.boundary_loops = loops

    def _build_vertex_sets(self) -> None:
        boundary_vertices: typing.Set[int] = set()
        gamma: typing.Set[int] = set()
        for e, label in zip(self.boundary_edges, self.boundary_labels):
            a, b = int(self.edges[e, 0]), int(self.edges[e, 1])
            boundary_vertices.update((a, b))
            if label == consts.GAMMA:
                gamma.update((a, b))
        self.boundary_vertices = np.array(sorted(boundary_vertices), dtype=np.int64)
        self.gamma_vertices = np.array(sorted(gamma), dtype=np.int64)
        self.sigma_vertices = np.array(sorted(boundary_vertices - gamma), dtype=np.int64)
        self.interior_vertices = np.array(
            sorted(set(range(len(self.vertices))) - boundary_vertices), dtype=np.int64
        )

    # Queries
    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def edge_index(self, a: int, b: int) -> int:
        return self._edge_index[(a, b) if a < b else (b, a)]

    def label_count(self, label: str) -> int:
        return int(np.count_nonzero(self.boundary_labels == label))

    def boundary_edge_vertices(self, directed: bool = True) -> np.ndarray:
        """(K, 2) boundary edge end points, in traversal order if ``directed``."""
        pairs = self.edges[self.boundary_edges].copy()
        if directed:
            flip = self.boundary_dir < 0
            pairs[flip] = pairs[flip][:, ::-1]
        return pairs

    def boundary_position(self, vertices: np.ndarray) -> np.ndarray:
        """Positions of ``vertices`` inside ``boundary_vertices``."""
        return np.searchsorted(self.boundary_vertices, vertices)

    def sigma_neighbours(self) -> typing.Tuple[np.ndarray, np.ndarray]:
        """Previous and next vertex along the boundary traversal of every Sigma vertex."""
        previous: typing.Dict[int, int] = {}
        following: typing.Dict[int, int] = {}
        for loop in self.boundary_loops:
            for k, v in enumerate(loop):
                previous[v] = loop[k - 1]
                following[v] = loop[(k + 1) % len(loop)]
        prev_v = np.array([previous[int(v)] for v in self.sigma_vertices], dtype=np.int64)
        next_v = np.array([following[int(v)] for v in self.sigma_vertices], dtype=np.int64)
        return prev_v, next_v

    def sigma_edges(self) -> np.ndarray:
        return self.boundary_edges[self.boundary_labels == consts.SIGMA]

    def gamma_edges(self) -> np.ndarray:
        return self.boundary_edges[self.boundary_labels == consts.GAMMA]

    def vertex_edges(self) -> sp.csr_matrix:
        """|D0|^T, vertex to incident edge incidence."""
        return abs(self.d0).T.tocsr()

    def with_positions(self, positions: np.ndarray) -> 'SimplicialComplex':
        """Same topology (and id) over new vertex positions."""
        labels = {
            (int(self.edges[e, 0]), int(self.edges[e, 1])): str(label)
            for e, label in zip(self.boundary_edges, self.boundary_labels)
        }
        return SimplicialComplex(positions, self.triangles, labels, mesh_id=self.mesh_id)

    def labels(self) -> typing.Dict[typing.Tuple[int, int], str]:
        return {
            (int(self.edges[e, 0]), int(self.edges[e, 1])): str(label)
            for e, label in zip(self.boundary_edges, self.boundary_labels)
        }

    def __repr__(self) -> str:
        return (
            f'SimplicialComplex(id={self.mesh_id}, vertices={self.n_vertices}, '
            f'edges={self.n_edges}, triangles={self.n_triangles})'
        )


def betti_numbers(c: SimplicialComplex) -> typing.Tuple[int, int]:
    """(b0, b1) from the ranks of the incidence operators."""
    adjacency = sp.csr_matrix(
        (np.ones(c.n_edges), (c.edges[:, 0], c.edges[:, 1])), shape=(c.n_vertices, c.n_vertices)
    )
    b0, _ = csgraph.connected_components(adjacency, directed=False)
    rank_d0 = c.n_vertices - b0

    # Closed triangle components (no boundary edge) contribute to the kernel of D1^T
    b2 = 0
    if c.n_triangles:
        shared = abs(c.d1) @ abs(c.d1).T
        n_comp, comp = csgraph.connected_components(shared, directed=False)
        open_components = set(comp[np.nonzero(abs(c.d1)[:, c.boundary_edges].sum(axis=1))[0]].tolist())
        b2 = n_comp - len(open_components)
    rank_d1 = c.n_triangles - b2
    b1 = c.n_edges - rank_d1 - rank_d0
    return int(b0), int(b1)


def refine_uniform(c: SimplicialComplex) -> SimplicialComplex:
    """Split every triangle in four through its edge midpoints."""
    n = c.n_vertices
    midpoints = 0.5 * (c.vertices[c.edges[:, 0]] + c.vertices[c.edges[:, 1]])
    vertices = np.vstack([c.vertices, midpoints])
    triangles: typing.List[typing.Tuple[int, int, int]] = []
    for t, (i, j, k) in enumerate(c.triangles):
        mij, mjk, mki = (n + int(e) for e in c.tri_edges[t])
        triangles.extend(((i, mij, mki), (mij, j, mjk), (mki, mjk, k), (mij, mjk, mki)))
    labels: typing.Dict[typing.Tuple[int, int], str] = {}
    for e, label in zip(c.boundary_edges, c.boundary_labels):
        a, b = int(c.edges[e, 0]), int(c.edges[e, 1])
        m = n + int(e)
        labels[(a, m)] = str(label)
        labels[(m, b)] = str(label)
    return SimplicialComplex(vertices, np.array(triangles), labels)


def _strip(line: str) -> str:
    return line.split('#', 1)[0].strip()


def load_mesh(path: str) -> SimplicialComplex:
    """Read a ``ph-mesh 1`` file."""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            raw = f.readlines()
    except OSError as e:
        raise MeshError(f'could not read mesh file {path}: {e.strerror}') from None

    lines = [(n + 1, _strip(l)) for n, l in enumerate(raw)]
    lines = [(n, l) for n, l in lines if l]
    if not lines or lines[0][1].split() != consts.MESH_HEADER.split():
        raise MeshError(f'missing "{consts.MESH_HEADER}" header', line=lines[0][0] if lines else 1)

    pos = 1

    def section(name: str) -> typing.List[typing.Tuple[int, typing.List[str]]]:
        nonlocal pos
        if pos >= len(lines):
            raise MeshError(f'missing section {name}', line=lines[-1][0])
        lineno, text = lines[pos]
        parts = text.split()
        if len(parts) != 2 or parts[0] != name:
            raise MeshError(f'expected "{name} <count>"', line=lineno)
        try:
            count = int(parts[1])
        except ValueError:
            raise MeshError(f'invalid count for {name}', line=lineno) from None
        body = lines[pos + 1 : pos + 1 + count]
        if len(body) != count:
            raise MeshError(f'section {name} declares {count} rows, found {len(body)}', line=lineno)
        pos += 1 + count
        return [(n, l.split()) for n, l in body]

    vertices: typing.List[typing.Tuple[float, float]] = []
    for lineno, parts in section('vertices'):
        try:
            x, y = parts
            vertices.append((float(x), float(y)))
        except ValueError:
            raise MeshError('vertex rows are "x y"', line=lineno) from None

    triangles: typing.List[typing.Tuple[int, int, int]] = []
    for lineno, parts in section('triangles'):
        try:
            i, j, k = (int(p) for p in parts)
        except ValueError:
            raise MeshError('triangle rows are "i j k"', line=lineno) from None
        triangles.append((i, j, k))

    labels: typing.Dict[typing.Tuple[int, int], str] = {}
    for lineno, parts in section('boundary'):
        try:
            a_s, b_s, label = parts
            a, b = int(a_s), int(b_s)
        except ValueError:
            raise MeshError('boundary rows are "i j LABEL"', line=lineno) from None
        if label.upper() not in (consts.SIGMA, consts.GAMMA):
            raise BoundaryLabelError(f'unknown boundary label {label}', simplex=(a, b), line=lineno)
        labels[(a, b)] = label.upper()

    if pos != len(lines):
        raise MeshError('unexpected content after boundary section', line=lines[pos][0])

    c = SimplicialComplex(np.array(vertices), np.array(triangles, dtype=np.int64), labels)
    logger.debug('Loaded %s from %s', c, path)
    return c


def write_mesh(c: SimplicialComplex, path: str, positions: typing.Optional[np.ndarray] = None) -> None:
    """Writes ``c`` in the ``ph-mesh 1`` format (write then rename)."""
    positions = c.vertices if positions is None else positions
    out: typing.List[str] = [consts.MESH_HEADER, f'vertices {c.n_vertices}']
    out.extend(f'{x:.17g} {y:.17g}' for x, y in positions)
    out.append(f'triangles {c.n_triangles}')
    out.extend(f'{i} {j} {k}' for i, j, k in c.triangles)
    out.append(f'boundary {len(c.boundary_edges)}')
    for (a, b), label in zip(c.boundary_edge_vertices(), c.boundary_labels):
        out.append(f'{a} {b} {label}')
    tmp = f'{path}.tmp'
    with open(tmp, 'w', encoding='utf-8', newline='\n') as f:
        f.write('\n'.join(out) + '\n')
    os.replace(tmp, path)


def mesh_info(c: SimplicialComplex) -> typing.Dict[str, typing.Any]:
    b0, b1 = betti_numbers(c)
    areas = signed_areas(c.vertices, c.triangles)
    lengths = np.linalg.norm(c.vertices[c.edges[:, 1]] - c.vertices[c.edges[:, 0]], axis=1)
    angles = []
    for i in range(3):
        u = c.vertices[c.triangles[:, (i + 1) % 3]] - c.vertices[c.triangles[:, i]]
        w = c.vertices[c.triangles[:, (i + 2) % 3]] - c.vertices[c.triangles[:, i]]
        cross = u[:, 0] * w[:, 1] - u[:, 1] * w[:, 0]
        angles.append(np.degrees(np.arctan2(cross, np.einsum('ij,ij->i', u, w))))
    return {
        'vertices': c.n_vertices,
        'edges': c.n_edges,
        'triangles': c.n_triangles,
        'sigma_edges': c.label_count(consts.SIGMA),
        'gamma_edges': c.label_count(consts.GAMMA),
        'sigma_vertices': len(c.sigma_vertices),
        'gamma_vertices': len(c.gamma_vertices),
        'b0': b0,
        'b1': b1,
        'area': float(areas.sum()),
        'h_max': float(lengths.max()) if lengths.size else 0.0,
        'h_min': float(lengths.min()) if lengths.size else 0.0,
        'min_angle': float(np.min(angles)) if c.n_triangles else 0.0,
    }
