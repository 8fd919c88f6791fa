"""Uniform Cartesian meshes and their interface classification."""
from dataclasses import dataclass, field

import numpy as np

from .exceptions import MeshTooCoarse, MultipleCrossings
from .geometry import (AxisRect, _count_sign_changes, bisect_segments, build_cut,
                       snap_signs, vertex_signs)


class CartesianMesh:
    """``n_side x n_side`` squares on an axis-aligned square domain.

    Vertices and elements are numbered row-major from the lower left.
    Edges are numbered horizontal first, then vertical.  For every edge,
    ``edge_elements[e] = (k1, k2)`` with ``k1 < k2`` (``k2 = -1`` on the
    boundary) and ``edge_normals[e]`` points from ``k1`` into ``k2``
    (outward on the boundary).
    """

    def __init__(self, domain, n_side):
        if int(n_side) != n_side or n_side < 2:
            raise ValueError(f"n_side must be an integer >= 2, got {n_side}")
        if not np.isclose(domain.width, domain.height):
            raise ValueError("domain must be square")
        n = int(n_side)
        self.domain = domain
        self.n_side = n
        self.h = domain.width / n

        xs = domain.x0 + self.h * np.arange(n + 1)
        ys = domain.y0 + self.h * np.arange(n + 1)
        X, Y = np.meshgrid(xs, ys)
        self.vertices = np.column_stack([X.ravel(), Y.ravel()])

        i, j = np.meshgrid(np.arange(n), np.arange(n))
        i, j = i.ravel(), j.ravel()
        v0 = j * (n + 1) + i
        self.elements = np.column_stack([v0, v0 + 1, v0 + n + 2, v0 + n + 1])

        # horizontal edges: row j in 0..n, column i in 0..n-1
        ih, jh = np.meshgrid(np.arange(n), np.arange(n + 1))
        ih, jh = ih.ravel(), jh.ravel()
        hv0 = jh * (n + 1) + ih
        below = np.where(jh > 0, (jh - 1) * n + ih, -1)
        above = np.where(jh < n, jh * n + ih, -1)
        # vertical edges: row j in 0..n-1, column i in 0..n
        iv, jv = np.meshgrid(np.arange(n + 1), np.arange(n))
        iv, jv = iv.ravel(), jv.ravel()
        vv0 = jv * (n + 1) + iv
        left = np.where(iv > 0, jv * n + iv - 1, -1)
        right = np.where(iv < n, jv * n + iv, -1)

        self.edges = np.vstack([np.column_stack([hv0, hv0 + 1]),
                                np.column_stack([vv0, vv0 + n + 1])])
        k1 = np.concatenate([np.where(below >= 0, below, above),
                             np.where(left >= 0, left, right)])
        k2 = np.concatenate([np.where((below >= 0) & (above >= 0), above, -1),
                             np.where((left >= 0) & (right >= 0), right, -1)])
        self.edge_elements = np.column_stack([k1, k2])

        nh = np.tile([0.0, 1.0], (len(hv0), 1))
        nh[jh == 0] = [0.0, -1.0]
        nv = np.tile([1.0, 0.0], (len(vv0), 1))
        nv[iv == 0] = [-1.0, 0.0]
        self.edge_normals = np.vstack([nh, nv])
        self.n_horizontal = len(hv0)

        # local edge k of an element: bottom, right, top, left
        e_bottom = j * n + i
        e_top = (j + 1) * n + i
        e_left = self.n_horizontal + j * (n + 1) + i
        e_right = e_left + 1
        self.element_edges = np.column_stack([e_bottom, e_right, e_top, e_left])

        on_bdry = ((np.isclose(self.vertices[:, 0], domain.x0))
                   | (np.isclose(self.vertices[:, 0], domain.x0 + domain.width))
                   | (np.isclose(self.vertices[:, 1], domain.y0))
                   | (np.isclose(self.vertices[:, 1], domain.y0 + domain.height)))
        self.boundary_vertices = np.flatnonzero(on_bdry)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_elements(self):
        return len(self.elements)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def interior_edges(self):
        return np.flatnonzero(self.edge_elements[:, 1] >= 0)

    @property
    def boundary_edges(self):
        return np.flatnonzero(self.edge_elements[:, 1] < 0)

    def edge_length(self, e=None):
        return self.h

    def element_rect(self, k):
        x0, y0 = self.vertices[self.elements[k, 0]]
        return AxisRect(float(x0), float(y0), self.h, self.h)

    def element_origins(self):
        return self.vertices[self.elements[:, 0]]

    def locate(self, points):
        """Element index containing each point (points on shared edges go up/right)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        n = self.n_side
        i = np.floor((pts[:, 0] - self.domain.x0) / self.h).astype(int)
        j = np.floor((pts[:, 1] - self.domain.y0) / self.h).astype(int)
        return np.clip(j, 0, n - 1) * n + np.clip(i, 0, n - 1)

    def dump(self, path):
        """Write the plain-text mesh dump (``V``, ``E`` and ``B`` records)."""
        with open(path, "w") as fh:
            for i, (x, y) in enumerate(self.vertices):
                fh.write(f"V {i} {x:.17g} {y:.17g}\n")
            for k, vs in enumerate(self.elements):
                fh.write(f"E {k} {vs[0]} {vs[1]} {vs[2]} {vs[3]}\n")
            for e, (v0, v1) in enumerate(self.edges):
                k1, k2 = self.edge_elements[e]
                nx, ny = self.edge_normals[e]
                fh.write(f"B {e} {v0} {v1} {k1} {k2} {nx:g} {ny:g}\n")


def build_mesh(domain=None, n_side=10):
    if domain is None:
        domain = AxisRect(0.0, 0.0, 1.0, 1.0)
    return CartesianMesh(domain, n_side)


@dataclass
class MeshClassification:
    """Interface-aware split of mesh entities.

    ``cuts`` maps each interface element to its cut, ``element_side`` holds
    -1/+1 for non-interface elements (0 for interface elements), and
    ``edge_split`` maps each interior interface edge to the crossing point.
    """

    mesh: CartesianMesh
    cuts: dict
    element_side: np.ndarray
    edge_split: dict
    vertex_sign: np.ndarray = field(repr=False)
    curve: object = field(default=None, repr=False)

    @property
    def interface_elements(self):
        return np.array(sorted(self.cuts), dtype=int)

    @property
    def non_interface_elements(self):
        return np.flatnonzero(self.element_side != 0)

    @property
    def interface_edges(self):
        return np.array(sorted(self.edge_split), dtype=int)

    @property
    def non_interface_interior_edges(self):
        inter = set(self.edge_split)
        return np.array([e for e in self.mesh.interior_edges if e not in inter], dtype=int)

    @property
    def boundary_edges(self):
        return self.mesh.boundary_edges

    @property
    def boundary_vertices(self):
        return self.mesh.boundary_vertices

    def is_interface(self, k):
        return k in self.cuts


def classify_mesh(mesh, curve, tol=1e-12):
    """Find interface elements and interior interface edges.

    Edge crossings are computed once per edge so that neighbouring
    elements share the same split point.
    """
    verts = mesh.vertices
    P_idx, Q_idx = mesh.edges[:, 0], mesh.edges[:, 1]
    changes = _count_sign_changes(curve, verts[P_idx], verts[Q_idx])
    bad = np.flatnonzero(changes > 1)
    if len(bad):
        raise MeshTooCoarse(f"edge {bad[0]} is crossed more than once by the interface",
                            edge=int(bad[0])) from MultipleCrossings(str(bad[0]))

    signs = vertex_signs(curve, verts, tol)
    crossing = np.flatnonzero(signs[P_idx] * signs[Q_idx] < 0)
    points = bisect_segments(curve, verts[P_idx[crossing]], verts[Q_idx[crossing]])
    signs, keep = snap_signs(verts, signs, P_idx[crossing], Q_idx[crossing], points, mesh.h)
    edge_point = {}
    for e, p, ok in zip(crossing, points, keep):
        if ok and signs[P_idx[e]] * signs[Q_idx[e]] < 0:
            edge_point[int(e)] = p

    # only elements touching a crossing or a zero vertex can be cut
    elem_signs = signs[mesh.elements]
    candidates = np.flatnonzero((elem_signs.min(axis=1) < 0) & (elem_signs.max(axis=1) > 0)
                                | (elem_signs == 0).any(axis=1))
    element_side = np.where(elem_signs.sum(axis=1) >= 0, 1, -1)
    cuts = {}
    for k in candidates:
        epts = [edge_point.get(int(e)) for e in mesh.element_edges[k]]
        vs = verts[mesh.elements[k]]
        try:
            cut, side = build_cut(vs, elem_signs[k], epts)
        except MultipleCrossings as exc:
            raise MeshTooCoarse(f"element {k}: {exc}") from exc
        if cut is None:
            element_side[k] = side
        else:
            cuts[int(k)] = cut
            element_side[k] = 0

    edge_split = {}
    for e, p in edge_point.items():
        k1, k2 = mesh.edge_elements[e]
        if k2 >= 0 and k1 in cuts and k2 in cuts:
            edge_split[e] = p
    return MeshClassification(mesh=mesh, cuts=cuts, element_side=element_side,
                              edge_split=edge_split, vertex_sign=signs, curve=curve)
