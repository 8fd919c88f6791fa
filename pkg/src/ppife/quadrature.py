"""Gauss rules on segments, triangles and (cut) mesh elements."""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from .geometry import bisect_segments, fan_triangulation, polygon_centroid


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Reference rule.

    Segment rules live on [0, 1] (``nodes`` shape (n,)); triangle rules on
    the reference triangle (0,0), (1,0), (0,1) (``nodes`` shape (n, 2)).
    """

    nodes: np.ndarray
    weights: np.ndarray
    degree: int

    @property
    def barycentric(self):
        """Triangle nodes as barycentric coordinates (n, 3)."""
        xi, eta = self.nodes[:, 0], self.nodes[:, 1]
        return np.column_stack([1.0 - xi - eta, xi, eta])


@dataclass(frozen=True, eq=False)
class TaggedQuadrature:
    """Global-coordinate points and weights, with a -1/+1 side per point."""

    points: np.ndarray
    weights: np.ndarray
    sides: np.ndarray

    def integrate(self, values):
        return float(np.dot(self.weights, values))


@lru_cache(maxsize=None)
def segment_rule(n_points=3):
    """Gauss-Legendre on [0, 1], exact to degree ``2*n_points - 1``."""
    x, w = np.polynomial.legendre.leggauss(n_points)
    return QuadratureRule(nodes=0.5 * (x + 1.0), weights=0.5 * w, degree=2 * n_points - 1)


def _symmetric_rule(orbits):
    pts, wts = [], []
    for a, w in orbits:
        if a is None:
            pts.append((1 / 3, 1 / 3))
            wts.append(w)
            continue
        b = 1.0 - 2.0 * a
        for p in ((a, a), (b, a), (a, b)):
            pts.append(p)
            wts.append(w)
    return np.array(pts), 0.5 * np.array(wts)


def _conical_rule(n):
    # collapsed square (u, v) -> (u, v (1-u)), Jacobian (1-u) absorbed by Gauss-Jacobi
    zu, wu = roots_jacobi(n, 1.0, 0.0)
    zv, wv = np.polynomial.legendre.leggauss(n)
    u = 0.5 * (zu + 1.0)
    v = 0.5 * (zv + 1.0)
    U, V = np.meshgrid(u, v, indexing="ij")
    W = np.outer(wu / 4.0, wv / 2.0)
    return np.column_stack([U.ravel(), (V * (1.0 - U)).ravel()]), W.ravel()


@lru_cache(maxsize=None)
def triangle_rule(strength=4):
    """Positive-weight triangle rule exact for polynomials of degree ``strength``.

    Strength 2 and 4 are the classical 3- and 6-point symmetric rules;
    strength 7 is a 16-point collapsed Gauss-Jacobi product rule.
    """
    if strength == 2:
        nodes, weights = _symmetric_rule([(1 / 6, 1 / 3)])
    elif strength == 4:
        nodes, weights = _symmetric_rule([
            (0.445948490915965, 0.223381589678011),
            (0.091576213509771, 0.109951743655322),
        ])
    elif strength == 7:
        nodes, weights = _conical_rule(4)
    else:
        raise ValueError(f"unsupported triangle rule strength {strength}")
    return QuadratureRule(nodes=nodes, weights=weights, degree=strength)


def map_triangle(rule, tri):
    """Map a reference triangle rule onto triangle ``tri`` (3, 2)."""
    tri = np.asarray(tri, dtype=float)
    J = np.column_stack([tri[1] - tri[0], tri[2] - tri[0]])
    pts = tri[0] + rule.nodes @ J.T
    return pts, rule.weights * abs(np.linalg.det(J))


@lru_cache(maxsize=None)
def square_rule(strength=4):
    """Tensor Gauss rule on [0, 1]^2, nodes (n*n, 2)."""
    n = {2: 2, 4: 3, 7: 5}.get(strength)
    if n is None:
        raise ValueError(f"unsupported square rule strength {strength}")
    seg = segment_rule(n)
    X, Y = np.meshgrid(seg.nodes, seg.nodes, indexing="ij")
    W = np.outer(seg.weights, seg.weights)
    return QuadratureRule(nodes=np.column_stack([X.ravel(), Y.ravel()]),
                          weights=W.ravel(), degree=2 * n - 1)


def polygon_quadrature(polygon, strength):
    pts, wts = [], []
    rule = triangle_rule(strength)
    for tri in fan_triangulation(polygon):
        p, w = map_triangle(rule, tri)
        pts.append(p)
        wts.append(w)
    if not pts:
        return np.empty((0, 2)), np.empty(0)
    return np.vstack(pts), np.concatenate(wts)


def element_quadrature(mesh, classification, k, strength=4):
    """Tagged rule on element ``k``.

    Uncut elements get a tensor Gauss rule and their single side; cut
    elements get triangle rules on the fan triangulations of both chord
    sub-polygons.
    """
    cut = classification.cuts.get(int(k))
    if cut is None:
        rule = square_rule(strength)
        origin = mesh.vertices[mesh.elements[k, 0]]
        pts = origin + mesh.h * rule.nodes
        w = rule.weights * mesh.h**2
        side = classification.element_side[k]
        return TaggedQuadrature(pts, w, np.full(len(w), side, dtype=int))
    pm, wm = polygon_quadrature(cut.minus_polygon, strength)
    pp, wp = polygon_quadrature(cut.plus_polygon, strength)
    sides = np.concatenate([-np.ones(len(wm), dtype=int), np.ones(len(wp), dtype=int)])
    return TaggedQuadrature(np.vstack([pm, pp]), np.concatenate([wm, wp]), sides)


def segment_points(p0, p1, n_points):
    rule = segment_rule(n_points)
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    pts = p0 + rule.nodes[:, None] * (p1 - p0)
    return pts, rule.weights * float(np.hypot(*(p1 - p0)))


def edge_quadrature(p0, p1, split=None, n_points=3, side_of=None):
    """Gauss rule on the edge ``p0``-``p1``, split into two pieces at ``split``.

    ``side_of`` maps an array of points to -1/+1; each piece is tagged with
    the side of its midpoint.  Without ``side_of`` tags are 0.
    """
    pieces = [(p0, p1)] if split is None else [(p0, split), (split, p1)]
    pts, wts, tags = [], [], []
    for a, b in pieces:
        p, w = segment_points(a, b, n_points)
        mid = 0.5 * (np.asarray(a, dtype=float) + np.asarray(b, dtype=float))
        tag = 0 if side_of is None else int(np.asarray(side_of(mid[None]))[0])
        pts.append(p)
        wts.append(w)
        tags.append(np.full(len(w), tag, dtype=int))
    return TaggedQuadrature(np.vstack(pts), np.concatenate(wts), np.concatenate(tags))


@dataclass(frozen=True, eq=False)
class MeshQuadrature:
    """Tagged quadrature over every element of a mesh, flattened.

    ``elements[q]`` is the element that owns point ``q``; ``sides`` are chord
    sides inside interface elements and the element side elsewhere.
    """

    points: np.ndarray
    weights: np.ndarray
    sides: np.ndarray
    elements: np.ndarray


def mesh_quadrature(mesh, classification, strength=7):
    rule = square_rule(strength)
    plain = classification.non_interface_elements
    origins = mesh.vertices[mesh.elements[plain, 0]]
    nq = len(rule.weights)
    pts = [(origins[:, None, :] + mesh.h * rule.nodes[None]).reshape(-1, 2)]
    wts = [np.tile(rule.weights * mesh.h**2, len(plain))]
    sides = [np.repeat(classification.element_side[plain], nq)]
    elems = [np.repeat(plain, nq)]
    for k in classification.interface_elements:
        tq = element_quadrature(mesh, classification, k, strength)
        pts.append(tq.points)
        wts.append(tq.weights)
        sides.append(tq.sides)
        elems.append(np.full(len(tq.weights), k))
    return MeshQuadrature(np.vstack(pts), np.concatenate(wts),
                          np.concatenate(sides).astype(int), np.concatenate(elems))


STRIP_SEGMENTS = 16


def strip_triangles(cut, curve, h, n_seg=STRIP_SEGMENTS):
    """Triangles filling the sliver between the chord DE and the true curve.

    The arc is approximated by a polyline through ``n_seg - 1`` interior
    points, found along the chord normal.  Returns a list of
    ``(triangle, chord_side, true_side)``; inside each triangle both the
    chord side and the curve side are constant, with ``true_side`` the
    opposite of ``chord_side``.
    """
    D, E = cut.D, cut.E
    n = cut.chord_normal
    t = np.linspace(0.0, 1.0, n_seg + 1)
    P = D + t[:, None] * (E - D)
    s = np.zeros(n_seg + 1)
    inner = P[1:-1]
    lo, hi = inner - 0.5 * h * n, inner + 0.5 * h * n
    f_lo = curve.level_set(lo[:, 0], lo[:, 1])
    f_hi = curve.level_set(hi[:, 0], hi[:, 1])
    ok = f_lo * f_hi < 0
    if ok.any():
        roots = bisect_segments(curve, lo[ok], hi[ok])
        s[1:-1][ok] = (roots - inner[ok]) @ n
    C = P + s[:, None] * n
    tris = []
    for i in range(n_seg):
        a, b = s[i], s[i + 1]
        if a == 0.0 and b == 0.0:
            continue
        if a * b < 0:
            X = P[i] + a / (a - b) * (P[i + 1] - P[i])
            pieces = [np.array([P[i], X, C[i]]), np.array([X, P[i + 1], C[i + 1]])]
        else:
            pieces = [np.array([P[i], P[i + 1], C[i + 1]]), np.array([P[i], C[i + 1], C[i]])]
        for tri in pieces:
            u, v = tri[1] - tri[0], tri[2] - tri[0]
            if u[0] * v[1] - u[1] * v[0] == 0.0:
                continue
            chord = int(cut.chord_side(polygon_centroid(tri)[None])[0])
            tris.append((tri, chord, -chord))
    return tris


@dataclass(frozen=True, eq=False)
class StripQuadrature:
    """Flattened rules on the chord/curve slivers of all interface elements."""

    points: np.ndarray
    weights: np.ndarray
    chord_sides: np.ndarray
    true_sides: np.ndarray
    elements: np.ndarray


def strip_quadrature(mesh, classification, strength=7, n_seg=STRIP_SEGMENTS):
    curve = classification.curve
    rule = triangle_rule(strength)
    pts, wts, cs, ts, el = [], [], [], [], []
    if curve is not None:
        for k in classification.interface_elements:
            for tri, chord, true in strip_triangles(classification.cuts[k], curve, mesh.h, n_seg):
                p, w = map_triangle(rule, tri)
                pts.append(p)
                wts.append(w)
                cs.append(np.full(len(w), chord))
                ts.append(np.full(len(w), true))
                el.append(np.full(len(w), k))
    if not pts:
        e = np.empty(0, dtype=int)
        return StripQuadrature(np.empty((0, 2)), np.empty(0), e, e, e)
    return StripQuadrature(np.vstack(pts), np.concatenate(wts), np.concatenate(cs),
                           np.concatenate(ts), np.concatenate(el))
