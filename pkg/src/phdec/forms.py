# -*- coding: utf-8 -*-
#
# Copyright (c) 2026 The phdec developers
# All rights reserved. Distributed under the BSD 3-Clause license, see LICENSE.
'''
Discrete forms on a SimplicialComplex.

Cochains carry values on oriented simplices. Metric operations go through a
HodgeSystem, the lowest order Whitney (Galerkin) discretization tied to one set
of vertex positions:

* ``M0`` P1 mass, ``M1`` Whitney edge mass, ``M2 = diag(1/area)``
* ``K0[i, t] = int(lambda_i ^ vol_t)``, ``K1[i, j] = int(W_i ^ W_j)``
* Hodge representatives solve ``M_{2-k} s = K_k^T c``

Whitney 1-form of edge ``(a, b)`` is ``lambda_a grad(lambda_b) - lambda_b grad(lambda_a)``.
'''
import dataclasses
import functools
import logging
import typing

import numpy as np
import scipy.sparse as sp
from scipy.sparse import linalg as spla

from . import consts
from .complex import LOCAL_EDGES, SimplicialComplex, signed_areas
from .errors import DegreeError, GeometryError, PreconditionError, SolverError

logger = logging.getLogger(__name__)

Field = typing.Callable[[np.ndarray, np.ndarray], typing.Tuple[np.ndarray, np.ndarray]]
Function = typing.Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclasses.dataclass(frozen=True, eq=False)
class Cochain:
    degree: int
    values: np.ndarray
    complex: SimplicialComplex = dataclasses.field(repr=False)

    def __post_init__(self) -> None:
        if self.degree not in (0, 1, 2):
            raise DegreeError(f'invalid cochain degree {self.degree}')
        values = np.array(self.values, dtype=float).reshape(-1)
        expected = (self.complex.n_vertices, self.complex.n_edges, self.complex.n_triangles)[self.degree]
        if values.size != expected:
            raise DegreeError(f'{self.degree}-cochain needs {expected} values, got {values.size}')
        values.flags.writeable = False
        object.__setattr__(self, 'values', values)

    @property
    def mesh_id(self) -> int:
        return self.complex.mesh_id

    @staticmethod
    def zeros(c: SimplicialComplex, degree: int) -> 'Cochain':
        size = (c.n_vertices, c.n_edges, c.n_triangles)[degree]
        return Cochain(degree, np.zeros(size), c)

    def _check(self, other: 'Cochain') -> None:
        if other.mesh_id != self.mesh_id:
            raise DegreeError(f'cochains live on different meshes ({self.mesh_id} != {other.mesh_id})')
        if other.degree != self.degree:
            raise DegreeError(f'degree mismatch ({self.degree} != {other.degree})')

    def __add__(self, other: 'Cochain') -> 'Cochain':
        self._check(other)
        return Cochain(self.degree, self.values + other.values, self.complex)

    def __sub__(self, other: 'Cochain') -> 'Cochain':
        self._check(other)
        return Cochain(self.degree, self.values - other.values, self.complex)

    def __neg__(self) -> 'Cochain':
        return Cochain(self.degree, -self.values, self.complex)

    def __mul__(self, scalar: float) -> 'Cochain':
        return Cochain(self.degree, float(scalar) * self.values, self.complex)

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


@dataclasses.dataclass(frozen=True, eq=False)
class BoundaryCochain:
    """Values of a 0 (vertices) or 1 (edges) cochain restricted to the boundary."""

    degree: int
    indices: np.ndarray  # vertex indices (degree 0) or edge indices (degree 1)
    values: np.ndarray
    mesh_id: int

    def d(self, c: SimplicialComplex) -> 'BoundaryCochain':
        if self.degree != 0:
            raise DegreeError('boundary d is only defined for 0-cochains')
        full = np.zeros(c.n_vertices)
        full[self.indices] = self.values
        a, b = c.edges[c.boundary_edges, 0], c.edges[c.boundary_edges, 1]
        return BoundaryCochain(1, c.boundary_edges, full[b] - full[a], self.mesh_id)


@dataclasses.dataclass(frozen=True, eq=False)
class VectorProxy:
    """Piecewise constant vector field, one value per triangle."""

    values: np.ndarray  # (M, 2)
    mesh_id: int


class HodgeSystem:
    """
    Galerkin mass and wedge operators for one vertex configuration.

    Deforming the mesh means building a new HodgeSystem (``deformed``); all
    factorizations live in the instance, so nothing stale survives a change of
    geometry.
    """

    complex: SimplicialComplex
    positions: np.ndarray
    areas: np.ndarray
    grads: np.ndarray  # (M, 3, 2) gradients of the barycentric coordinates
    m0: sp.csc_matrix
    m1: sp.csc_matrix
    m2: sp.csc_matrix
    k0: sp.csr_matrix
    k1: sp.csr_matrix
    d0: sp.csr_matrix
    d1: sp.csr_matrix
    stiffness: sp.csc_matrix
    lumped: np.ndarray  # row sums of M0

    _solvers: typing.Dict[str, typing.Any]
    _cache: typing.Dict[typing.Any, typing.Any]

    def __init__(self, c: SimplicialComplex, positions: typing.Optional[np.ndarray] = None) -> None:
        self.complex = c
        self.positions = np.array(c.vertices if positions is None else positions, dtype=float)
        self.positions.flags.writeable = False
        self.areas = signed_areas(self.positions, c.triangles)
        if (self.areas <= 0).any():
            t = int(np.argmin(self.areas))
            raise GeometryError(f'triangle {tuple(int(i) for i in c.triangles[t])} is inverted or degenerate')

        p = self.positions[c.triangles]  # (M, 3, 2)
        grads = np.empty_like(p)
        for i in range(3):
            e = p[:, (i + 2) % 3] - p[:, (i + 1) % 3]
            grads[:, i, 0] = -e[:, 1]
            grads[:, i, 1] = e[:, 0]
        self.grads = grads / (2.0 * self.areas)[:, None, None]

        self.d0 = c.d0.astype(float).tocsr()
        self.d1 = c.d1.astype(float).tocsr()
        self._assemble()
        self._solvers = {}
        self._cache = {}

    # Assembly
    def _local_p1(self) -> np.ndarray:
        base = (np.ones((3, 3)) + np.eye(3)) / 12.0
        return self.areas[:, None, None] * base[None]

    def _local_whitney(self, kind: str) -> np.ndarray:
        """Signed local (M, 3, 3) Whitney integrals, ``dot`` for the mass, ``wedge`` for K1."""
        c = self.complex
        p1 = self._local_p1()
        g = self.grads
        if kind == 'dot':
            pair = np.einsum('tik,tjk->tij', g, g)
        else:
            pair = g[:, :, None, 0] * g[:, None, :, 1] - g[:, :, None, 1] * g[:, None, :, 0]
        local = np.zeros((c.n_triangles, 3, 3))
        for l1, (a, b) in enumerate(LOCAL_EDGES):
            for l2, (cc, dd) in enumerate(LOCAL_EDGES):
                local[:, l1, l2] = (
                    p1[:, a, cc] * pair[:, b, dd]
                    - p1[:, a, dd] * pair[:, b, cc]
                    - p1[:, b, cc] * pair[:, a, dd]
                    + p1[:, b, dd] * pair[:, a, cc]
                )
        signs = c.tri_signs.astype(float)
        return local * signs[:, :, None] * signs[:, None, :]

    def _assemble_edges(self, local: np.ndarray, weights: typing.Optional[np.ndarray] = None) -> sp.csr_matrix:
        c = self.complex
        if weights is not None:
            local = local * weights[:, None, None]
        rows = np.repeat(c.tri_edges, 3, axis=1).reshape(-1)
        cols = np.tile(c.tri_edges, (1, 3)).reshape(-1)
        return sp.csr_matrix((local.reshape(-1), (rows, cols)), shape=(c.n_edges, c.n_edges))

    def _assemble(self) -> None:
        c = self.complex
        tri = c.triangles
        rows = np.repeat(tri, 3, axis=1).reshape(-1)
        cols = np.tile(tri, (1, 3)).reshape(-1)
        self.m0 = sp.csc_matrix((self._local_p1().reshape(-1), (rows, cols)), shape=(c.n_vertices, c.n_vertices))
        self.lumped = np.asarray(self.m0.sum(axis=1)).reshape(-1)

        self._whitney_dot = self._local_whitney('dot')
        self._whitney_wedge = self._local_whitney('wedge')
        self.m1 = self._assemble_edges(self._whitney_dot).tocsc()
        self.k1 = self._assemble_edges(self._whitney_wedge)
        self.m2 = sp.diags(1.0 / self.areas).tocsc()

        m = c.n_triangles
        self.k0 = sp.csr_matrix(
            (np.full(3 * m, 1.0 / 3.0), (tri.reshape(-1), np.repeat(np.arange(m), 3))),
            shape=(c.n_vertices, m),
        )
        self.stiffness = (self.d0.T @ self.m1 @ self.d0).tocsc()

    def deformed(self, positions: np.ndarray) -> 'HodgeSystem':
        return HodgeSystem(self.complex, positions)

    def mass(self, k: int) -> sp.csc_matrix:
        return (self.m0, self.m1, self.m2)[k]

    def incidence(self, k: int) -> sp.csr_matrix:
        if k == 0:
            return self.d0
        if k == 1:
            return self.d1
        raise DegreeError(f'no exterior derivative on {k}-cochains in dimension {consts.DIM}')

    def mass_solve(self, k: int, rhs: np.ndarray) -> np.ndarray:
        """Solves ``M_k x = rhs`` with a cached sparse factorization."""
        if k == 2:
            return rhs * (self.areas[:, None] if rhs.ndim == 2 else self.areas)
        key = f'mass{k}'
        solver = self._solvers.get(key)
        if solver is None:
            try:
                solver = spla.splu(self.mass(k))
            except RuntimeError as e:
                raise SolverError(f'mass matrix M{k} factorization failed: {e}') from None
            self._solvers[key] = solver
        return solver.solve(np.asarray(rhs, dtype=float))

    def contraction_kernel(self, vorticity: np.ndarray) -> sp.csr_matrix:
        """
        ``K[i, j] = int zeta W_i x W_j`` with ``zeta = vorticity / area`` per triangle.

        Antisymmetric. ``M1^-1 K^T E`` is the Galerkin 1-cochain of ``i_{E#} dv``
        when ``vorticity = d v``.
        """
        return self._assemble_edges(self._whitney_wedge, vorticity / self.areas)

    def local_wedge(self) -> np.ndarray:
        return self._whitney_wedge

    @functools.cached_property
    def vertex_operators(self) -> typing.Tuple[sp.csr_matrix, sp.csr_matrix]:
        """(Qx, Qy): area weighted vertex values of the Whitney field of a 1-cochain."""
        c = self.complex
        vertex_area = np.zeros(c.n_vertices)
        np.add.at(vertex_area, c.triangles.reshape(-1), np.repeat(self.areas, 3))
        rows: typing.List[np.ndarray] = []
        cols: typing.List[np.ndarray] = []
        vx: typing.List[np.ndarray] = []
        vy: typing.List[np.ndarray] = []
        signs = c.tri_signs.astype(float)
        for vertex in range(3):
            weight = self.areas / vertex_area[c.triangles[:, vertex]]
            for l, (p, q) in enumerate(LOCAL_EDGES):
                if vertex == p:
                    value = self.grads[:, q]
                elif vertex == q:
                    value = -self.grads[:, p]
                else:
                    continue
                coeff = (weight * signs[:, l])[:, None] * value
                rows.append(c.triangles[:, vertex])
                cols.append(c.tri_edges[:, l])
                vx.append(coeff[:, 0])
                vy.append(coeff[:, 1])
        r, cl = np.concatenate(rows), np.concatenate(cols)
        shape = (c.n_vertices, c.n_edges)
        return (
            sp.csr_matrix((np.concatenate(vx), (r, cl)), shape=shape),
            sp.csr_matrix((np.concatenate(vy), (r, cl)), shape=shape),
        )

    @functools.cached_property
    def boundary_geometry(self) -> typing.Dict[str, np.ndarray]:
        """Per boundary edge: owner triangle, local traversal vertices, length and outward normal."""
        c = self.complex
        owner = np.zeros(len(c.boundary_edges), dtype=np.int64)
        local_p = np.zeros(len(c.boundary_edges), dtype=np.int64)
        local_q = np.zeros(len(c.boundary_edges), dtype=np.int64)
        position = {int(e): k for k, e in enumerate(c.boundary_edges)}
        for t in range(c.n_triangles):
            for l, (p, q) in enumerate(LOCAL_EDGES):
                k = position.get(int(c.tri_edges[t, l]))
                if k is not None:
                    owner[k], local_p[k], local_q[k] = t, p, q
        start = self.positions[c.triangles[owner, local_p]]
        end = self.positions[c.triangles[owner, local_q]]
        tangent = end - start
        length = np.linalg.norm(tangent, axis=1)
        normal = np.stack([tangent[:, 1], -tangent[:, 0]], axis=1) / length[:, None]
        return {
            'owner': owner,
            'p': local_p,
            'q': local_q,
            'start': c.triangles[owner, local_p],
            'end': c.triangles[owner, local_q],
            'length': length,
            'normal': normal,
        }

    def area(self) -> float:
        return float(self.areas.sum())


# Whitney interpolation
def whitney_eval(values: np.ndarray, hs: HodgeSystem, tris: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Whitney field of a 1-cochain at barycentric points ``lam`` (K, 3) of triangles ``tris``."""
    c = hs.complex
    g = hs.grads[tris]
    coeff = values[c.tri_edges[tris]] * c.tri_signs[tris]
    out = np.zeros((len(tris), 2))
    for l, (p, q) in enumerate(LOCAL_EDGES):
        out += coeff[:, l, None] * (lam[:, p, None] * g[:, q] - lam[:, q, None] * g[:, p])
    return out


def vertex_field(v: Cochain, hs: HodgeSystem) -> np.ndarray:
    """(N, 2) vertex values of the Whitney field, area weighted over the incident triangles."""
    _check_degree(v, 1)
    qx, qy = hs.vertex_operators
    return np.stack([qx @ v.values, qy @ v.values], axis=1)


def _quadrature_points(hs: HodgeSystem) -> typing.Tuple[np.ndarray, np.ndarray, np.ndarray]:
    rule = np.array(consts.QUADRATURE_T4)
    lam, w = rule[:, :3], rule[:, 3]
    p = hs.positions[hs.complex.triangles]  # (M, 3, 2)
    points = np.einsum('qi,tik->tqk', lam, p)  # (M, Q, 2)
    return lam, w, points


def _edge_gauss() -> typing.Tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(consts.EDGE_GAUSS_POINTS)
    return 0.5 * (x + 1.0), 0.5 * w


# Cochain algebra
def _check_degree(c: Cochain, *degrees: int) -> None:
    if c.degree not in degrees:
        raise DegreeError(f'expected a cochain of degree {" or ".join(map(str, degrees))}, got {c.degree}')


def _check_mesh(hs: HodgeSystem, *cochains: Cochain) -> None:
    for c in cochains:
        if c.mesh_id != hs.complex.mesh_id:
            raise DegreeError(f'cochain on mesh {c.mesh_id} used with mesh {hs.complex.mesh_id}')


def d(c: Cochain) -> Cochain:
    if c.degree >= consts.DIM:
        raise DegreeError(f'd of a {c.degree}-cochain is not defined')
    op = c.complex.d0 if c.degree == 0 else c.complex.d1
    return Cochain(c.degree + 1, op @ c.values, c.complex)


def inner(a: Cochain, b: Cochain, hs: HodgeSystem) -> float:
    a._check(b)
    _check_mesh(hs, a)
    return float(a.values @ (hs.mass(a.degree) @ b.values))


def codifferential(c: Cochain, hs: HodgeSystem) -> Cochain:
    """``M_{k-1}^-1 D_{k-1}^T M_k c``, the L2 adjoint of d."""
    if c.degree == 0:
        raise DegreeError('codifferential of a 0-cochain is not defined')
    _check_mesh(hs, c)
    k = c.degree
    rhs = hs.incidence(k - 1).T @ (hs.mass(k) @ c.values)
    return Cochain(k - 1, hs.mass_solve(k - 1, rhs), c.complex)


def wedge_pair(a: Cochain, b: Cochain, hs: HodgeSystem) -> float:
    """Integral of ``a ^ b`` over the domain."""
    if a.degree + b.degree != consts.DIM:
        raise DegreeError(f'wedge pairing needs degrees adding to {consts.DIM}, got {a.degree} and {b.degree}')
    _check_mesh(hs, a, b)
    if a.degree == 0:
        return float(a.values @ (hs.k0 @ b.values))
    if a.degree == 1:
        return float(a.values @ (hs.k1 @ b.values))
    return float(b.values @ (hs.k0 @ a.values))


def star_rep(c: Cochain, hs: HodgeSystem) -> Cochain:
    """Galerkin representative of the Hodge star, ``M_{2-k} s = K_k^T c``."""
    _check_mesh(hs, c)
    if c.degree == 0:
        rhs = hs.k0.T @ c.values
    elif c.degree == 1:
        rhs = hs.k1.T @ c.values
    else:
        rhs = hs.k0 @ c.values
    return Cochain(consts.DIM - c.degree, hs.mass_solve(consts.DIM - c.degree, rhs), c.complex)


def trace(c: Cochain) -> BoundaryCochain:
    cx = c.complex
    if c.degree == 0:
        return BoundaryCochain(0, cx.boundary_vertices, c.values[cx.boundary_vertices], c.mesh_id)
    if c.degree == 1:
        return BoundaryCochain(1, cx.boundary_edges, c.values[cx.boundary_edges], c.mesh_id)
    raise DegreeError('trace is defined for 0 and 1 cochains only')


def normal_trace(v: Cochain, hs: HodgeSystem) -> np.ndarray:
    """Outward flux of the Whitney field through every boundary edge (edge quadrature)."""
    _check_degree(v, 1)
    _check_mesh(hs, v)
    geo = hs.boundary_geometry
    s, w = _edge_gauss()
    flux = np.zeros(len(geo['owner']))
    rows = np.arange(len(geo['owner']))
    for sk, wk in zip(s, w):
        lam = np.zeros((len(rows), 3))
        lam[rows, geo['p']] = 1.0 - sk
        lam[rows, geo['q']] = sk
        field = whitney_eval(v.values, hs, geo['owner'], lam)
        flux += wk * np.einsum('ik,ik->i', field, geo['normal'])
    return flux * geo['length']


def weak_divergence(v: Cochain, hs: HodgeSystem) -> np.ndarray:
    """``D0^T M1 v``: minus the weak divergence inside, the outward flux loads on the boundary."""
    _check_degree(v, 1)
    return hs.d0.T @ (hs.m1 @ v.values)


def flux_loads(v: Cochain, hs: HodgeSystem) -> np.ndarray:
    """Weak normal trace of ``v``, one load per boundary vertex (ordered as ``boundary_vertices``)."""
    return weak_divergence(v, hs)[hs.complex.boundary_vertices]


def divergence_residual(v: Cochain, hs: HodgeSystem) -> float:
    """Lumped L2 norm of the interior weak divergence, relative to the M1 norm of ``v``."""
    interior = hs.complex.interior_vertices
    r = weak_divergence(v, hs)[interior]
    norm_v = np.sqrt(max(inner(v, v, hs), 0.0))
    if norm_v == 0.0:
        return 0.0
    return float(np.sqrt(np.sum(r * r / hs.lumped[interior])) / norm_v)


def boundary_pairing(trace_values: np.ndarray, edge_flux: np.ndarray, hs: HodgeSystem) -> float:
    """Lumped boundary quadrature of a boundary 0-cochain against per-edge fluxes."""
    c = hs.complex
    full = np.zeros(c.n_vertices)
    full[c.boundary_vertices] = trace_values
    geo = hs.boundary_geometry
    return float(np.sum(0.5 * (full[geo['start']] + full[geo['end']]) * edge_flux))


def require_solenoidal(v: Cochain, hs: HodgeSystem, what: str = 'field') -> None:
    residual = divergence_residual(v, hs)
    if residual > consts.TOL_SOLENOIDAL:
        raise PreconditionError(f'{what} is not solenoidal', residual)


# Musical isomorphisms and contraction
def sharp(v: Cochain, hs: HodgeSystem) -> VectorProxy:
    _check_degree(v, 1)
    third = np.full((hs.complex.n_triangles, 3), 1.0 / 3.0)
    return VectorProxy(whitney_eval(v.values, hs, np.arange(hs.complex.n_triangles), third), v.mesh_id)


def _proxy_loads(values: np.ndarray, hs: HodgeSystem) -> np.ndarray:
    """``b_j = int X . W_j`` for a piecewise constant field X."""
    c = hs.complex
    b = np.zeros(c.n_edges)
    for l, (p, q) in enumerate(LOCAL_EDGES):
        average = (hs.grads[:, q] - hs.grads[:, p]) / 3.0
        contrib = hs.areas * c.tri_signs[:, l] * np.einsum('tk,tk->t', values, average)
        np.add.at(b, c.tri_edges[:, l], contrib)
    return b


def flat(x: VectorProxy, hs: HodgeSystem) -> Cochain:
    return Cochain(1, hs.mass_solve(1, _proxy_loads(x.values, hs)), hs.complex)


def interior_product(x: VectorProxy, c: Cochain, hs: HodgeSystem) -> Cochain:
    """Galerkin 1-cochain of ``i_X c`` for a 2-cochain ``c``."""
    _check_degree(c, 2)
    _check_mesh(hs, c)
    zeta = c.values / hs.areas
    covector = zeta[:, None] * np.stack([-x.values[:, 1], x.values[:, 0]], axis=1)
    return Cochain(1, hs.mass_solve(1, _proxy_loads(covector, hs)), hs.complex)


def interior_product_star_route(x: VectorProxy, c: Cochain, hs: HodgeSystem) -> Cochain:
    """``i_X c = *(X_flat ^ *c)`` through Galerkin star representatives."""
    _check_degree(c, 2)
    density = star_rep(c, hs)  # P1 density
    cx = hs.complex
    lam, w, _points = _quadrature_points(hs)
    b = np.zeros(cx.n_edges)
    for q in range(len(w)):
        zeta = np.einsum('i,ti->t', lam[q], density.values[cx.triangles])
        for l, (p, r) in enumerate(LOCAL_EDGES):
            basis = lam[q, p] * hs.grads[:, r] - lam[q, r] * hs.grads[:, p]
            contrib = hs.areas * w[q] * zeta * cx.tri_signs[:, l] * np.einsum('tk,tk->t', x.values, basis)
            np.add.at(b, cx.tri_edges[:, l], contrib)
    wedge = Cochain(1, hs.mass_solve(1, b), cx)
    return star_rep(wedge, hs)


def contract_vorticity(e: np.ndarray, vorticity: np.ndarray, hs: HodgeSystem) -> np.ndarray:
    """``M1^-1 K^T e``, the Galerkin ``i_{e#} dv`` for ``vorticity = D1 v``."""
    return hs.mass_solve(1, hs.contraction_kernel(vorticity).T @ e)


def wedge_density(a: Cochain, b: Cochain, hs: HodgeSystem) -> Cochain:
    """Galerkin 2-cochain of ``a ^ b`` for two 1-cochains (integral per triangle)."""
    _check_degree(a, 1)
    a._check(b)
    c = hs.complex
    la = a.values[c.tri_edges]
    lb = b.values[c.tri_edges]
    return Cochain(2, np.einsum('ti,tij,tj->t', la, hs.local_wedge(), lb), c)


def lie_bracket_1(a: Cochain, b: Cochain, hs: HodgeSystem) -> Cochain:
    """``[a, b]_1 = (-1)^(n-1) delta(a ^ b)`` for solenoidal 1-cochains."""
    require_solenoidal(a, hs, 'first argument')
    require_solenoidal(b, hs, 'second argument')
    return (-1) ** (consts.DIM - 1) * codifferential(wedge_density(a, b, hs), hs)


# Projections of analytic data
def project_field(fn: Field, hs: HodgeSystem) -> Cochain:
    """Galerkin L2 projection of a vector field onto Whitney 1-forms."""
    cx = hs.complex
    lam, w, points = _quadrature_points(hs)
    b = np.zeros(cx.n_edges)
    for q in range(len(w)):
        fx, fy = fn(points[:, q, 0], points[:, q, 1])
        field = np.stack([np.broadcast_to(fx, hs.areas.shape), np.broadcast_to(fy, hs.areas.shape)], axis=1)
        for l, (p, r) in enumerate(LOCAL_EDGES):
            basis = lam[q, p] * hs.grads[:, r] - lam[q, r] * hs.grads[:, p]
            contrib = hs.areas * w[q] * cx.tri_signs[:, l] * np.einsum('tk,tk->t', field, basis)
            np.add.at(b, cx.tri_edges[:, l], contrib)
    return Cochain(1, hs.mass_solve(1, b), cx)


def de_rham(fn: Field, hs: HodgeSystem) -> Cochain:
    """Edge circulations of a vector field (Gauss quadrature along each edge)."""
    cx = hs.complex
    start = hs.positions[cx.edges[:, 0]]
    tangent = hs.positions[cx.edges[:, 1]] - start
    s, w = _edge_gauss()
    values = np.zeros(cx.n_edges)
    for sk, wk in zip(s, w):
        pts = start + sk * tangent
        fx, fy = fn(pts[:, 0], pts[:, 1])
        values += wk * (fx * tangent[:, 0] + fy * tangent[:, 1])
    return Cochain(1, values, cx)


def interpolate(fn: Function, hs: HodgeSystem) -> Cochain:
    return Cochain(0, np.broadcast_to(fn(hs.positions[:, 0], hs.positions[:, 1]), (hs.complex.n_vertices,)), hs.complex)


def integrate_p1(f: Cochain, fn: Function, hs: HodgeSystem) -> float:
    """Quadrature of (P1 interpolant of f) times an analytic function."""
    lam, w, points = _quadrature_points(hs)
    total = 0.0
    for q in range(len(w)):
        local = np.einsum('i,ti->t', lam[q], f.values[hs.complex.triangles])
        total += float(np.sum(hs.areas * w[q] * local * fn(points[:, q, 0], points[:, q, 1])))
    return total


def integration_by_parts_residual(
    lam_fn: Function, mu_fn: Field, div_mu_fn: Function, hs: HodgeSystem
) -> float:
    """
    ``|<d lam, mu> - <lam, -div mu> - boundary_pairing(tr lam, n(mu))|`` for
    smooth manufactured data. First order in the mesh size.
    """
    lam_h = interpolate(lam_fn, hs)
    mu_h = de_rham(mu_fn, hs)
    volume = inner(d(lam_h), mu_h, hs)
    source = integrate_p1(lam_h, lambda x, y: -div_mu_fn(x, y), hs)
    boundary = boundary_pairing(trace(lam_h).values, normal_trace(mu_h, hs), hs)
    return abs(volume - source - boundary)


def stokes_residual(a: Cochain) -> float:
    """``sum(d a) - signed boundary sum of a``, relative to the boundary sum magnitude."""
    _check_degree(a, 1)
    cx = a.complex
    total = float(np.sum(cx.d1 @ a.values))
    boundary = float(np.sum(cx.boundary_dir * a.values[cx.boundary_edges]))
    scale = max(float(np.sum(np.abs(a.values[cx.boundary_edges]))), 1.0)
    return abs(total - boundary) / scale
