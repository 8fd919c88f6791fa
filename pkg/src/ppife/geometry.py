"""Interface curves, segment/rectangle intersection and cut-cell polygons.

A curve is described by a level set function that is negative in the
minus subdomain and positive in the plus subdomain.  Level set callables
must accept numpy arrays and broadcast.
"""
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .exceptions import MultipleCrossings

#: relative distance under which an edge crossing is snapped onto a vertex
SNAP_TOL = 1e-10
#: relative sub-area under which a cut is treated as no cut at all
SLIVER_TOL = 1e-12
_N_SAMPLES = 16
_BISECT_ITERS = 64


class Region(IntEnum):
    MINUS = -1
    ON_INTERFACE = 0
    PLUS = 1


class InterfaceCurve:
    """A curve given implicitly by ``level_set(x, y) == 0``."""

    def __init__(self, level_set):
        self._level_set = level_set

    def level_set(self, x, y):
        return self._level_set(x, y)

    def __call__(self, x, y):
        return self.level_set(x, y)


class EllipseCurve(InterfaceCurve):
    """Ellipse ``r(x, y) = 1`` with ``r = sqrt(((x-x0)/a)**2 + ((y-y0)/b)**2)``."""

    def __init__(self, center=(0.0, 0.0), semi_axes=(np.pi / 4, np.pi / 6)):
        self.center = (float(center[0]), float(center[1]))
        self.semi_axes = (float(semi_axes[0]), float(semi_axes[1]))
        if min(self.semi_axes) <= 0:
            raise ValueError("semi axes must be positive")

    def r(self, x, y):
        x0, y0 = self.center
        a, b = self.semi_axes
        return np.sqrt(((np.asarray(x) - x0) / a) ** 2 + ((np.asarray(y) - y0) / b) ** 2)

    def level_set(self, x, y):
        return self.r(x, y) - 1.0

    def point(self, angle):
        """Parametric point ``(x0 + a cos t, y0 + b sin t)``."""
        x0, y0 = self.center
        a, b = self.semi_axes
        return np.stack([x0 + a * np.cos(angle), y0 + b * np.sin(angle)], axis=-1)

    def normal(self, x, y):
        """Unit normal pointing into the plus region (direction of grad r)."""
        x0, y0 = self.center
        a, b = self.semi_axes
        g = np.stack([(np.asarray(x) - x0) / a**2, (np.asarray(y) - y0) / b**2], axis=-1)
        return g / np.linalg.norm(g, axis=-1, keepdims=True)


class LineCurve(InterfaceCurve):
    """Straight line ``nx*x + ny*y - c = 0``; minus where the value is negative."""

    def __init__(self, nx, ny, c):
        self.coeffs = (float(nx), float(ny), float(c))

    def level_set(self, x, y):
        nx, ny, c = self.coeffs
        return nx * np.asarray(x, dtype=float) + ny * np.asarray(y, dtype=float) - c


@dataclass(frozen=True)
class AxisRect:
    x0: float
    y0: float
    width: float
    height: float

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError("rectangle needs positive width and height")

    @property
    def area(self):
        return self.width * self.height

    @property
    def size(self):
        return max(self.width, self.height)

    def vertices(self):
        """Corners counterclockwise from the lower left, shape (4, 2)."""
        x0, y0, w, h = self.x0, self.y0, self.width, self.height
        return np.array([[x0, y0], [x0 + w, y0], [x0 + w, y0 + h], [x0, y0 + h]])


def polygon_area(poly):
    """Signed shoelace area of a vertex list, positive when counterclockwise."""
    p = np.asarray(poly, dtype=float)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def polygon_centroid(poly):
    p = np.asarray(poly, dtype=float)
    x, y = p[:, 0], p[:, 1]
    cross = x * np.roll(y, -1) - np.roll(x, -1) * y
    area = 0.5 * cross.sum()
    cx = ((x + np.roll(x, -1)) * cross).sum() / (6 * area)
    cy = ((y + np.roll(y, -1)) * cross).sum() / (6 * area)
    return np.array([cx, cy])


def fan_triangulation(poly):
    """Fan triangles from the first vertex; zero-area triangles are dropped."""
    p = np.asarray(poly, dtype=float)
    tris = []
    for k in range(1, len(p) - 1):
        tri = np.array([p[0], p[k], p[k + 1]])
        if polygon_area(tri) > 0:
            tris.append(tri)
    return tris


@dataclass(frozen=True, eq=False)
class CutConfiguration:
    """Chord split of an interface rectangle.

    ``vertex_sides`` gives, for each of the four rectangle corners, the
    sub-polygon (chord side) it belongs to.
    """

    D: np.ndarray
    E: np.ndarray
    minus_polygon: np.ndarray
    plus_polygon: np.ndarray
    vertex_sides: tuple

    @property
    def chord(self):
        return (self.D, self.E)

    @property
    def minus_triangles(self):
        return fan_triangulation(self.minus_polygon)

    @property
    def plus_triangles(self):
        return fan_triangulation(self.plus_polygon)

    @property
    def chord_length(self):
        return float(np.hypot(*(self.E - self.D)))

    @property
    def chord_normal(self):
        """Unit normal of DE pointing into the plus polygon."""
        t = self.E - self.D
        n = np.array([t[1], -t[0]]) / np.hypot(t[0], t[1])
        if np.dot(polygon_centroid(self.plus_polygon) - self.D, n) < 0:
            n = -n
        return n

    def chord_side(self, points):
        """Side of the chord line (-1 or +1) for an array of points (..., 2).

        Points on the chord line itself go to the minus side.
        """
        pts = np.asarray(points, dtype=float)
        n = self.chord_normal
        s = (pts[..., 0] - self.D[0]) * n[0] + (pts[..., 1] - self.D[1]) * n[1]
        return np.where(s > 0, 1, -1)


def classify_point(curve, p, tol=1e-12):
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    v = float(curve.level_set(p[0], p[1]))
    if abs(v) <= tol:
        return Region.ON_INTERFACE
    return Region.MINUS if v < 0 else Region.PLUS


def _count_sign_changes(curve, P, Q):
    """Sign changes of the level set sampled along segments P->Q (arrays (m, 2))."""
    s = np.linspace(0.0, 1.0, _N_SAMPLES + 2)
    pts = P[:, None, :] + s[None, :, None] * (Q - P)[:, None, :]
    vals = np.sign(curve.level_set(pts[..., 0], pts[..., 1]))
    # zeros are ignored when counting alternations
    changes = np.zeros(len(P), dtype=int)
    last = vals[:, 0].copy()
    for k in range(1, vals.shape[1]):
        v = vals[:, k]
        flip = (v != 0) & (last != 0) & (v != last)
        changes += flip
        last = np.where(v != 0, v, last)
    return changes


def bisect_segments(curve, P, Q, tol=1e-13):
    """Vectorised bisection for roots on segments whose endpoints differ in sign."""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    lo = np.zeros(len(P))
    hi = np.ones(len(P))
    f_lo = curve.level_set(P[:, 0], P[:, 1])
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        pts = P + mid[:, None] * (Q - P)
        f_mid = curve.level_set(pts[:, 0], pts[:, 1])
        same = np.sign(f_mid) == np.sign(f_lo)
        lo = np.where(same, mid, lo)
        f_lo = np.where(same, f_mid, f_lo)
        hi = np.where(same, hi, mid)
        if np.all(hi - lo <= tol * 1e-3):
            break
    s = 0.5 * (lo + hi)
    return P + s[:, None] * (Q - P)


def segment_intersection(curve, seg, tol=1e-12):
    """Crossing of the curve with a segment, or ``None`` when signs agree.

    Raises :class:`MultipleCrossings` when sampling shows the level set
    changing sign more than once along the segment.
    """
    P = np.asarray(seg[0], dtype=float)
    Q = np.asarray(seg[1], dtype=float)
    if _count_sign_changes(curve, P[None], Q[None])[0] > 1:
        raise MultipleCrossings(f"curve crosses segment {P}-{Q} more than once")
    fp = float(curve.level_set(*P))
    fq = float(curve.level_set(*Q))
    if abs(fp) <= tol or abs(fq) <= tol or np.sign(fp) == np.sign(fq):
        return None
    return bisect_segments(curve, P[None], Q[None])[0]


def _edge_pairs():
    # local edges: bottom, right, top, left, as vertex pairs in CCW walking order
    return ((0, 1), (1, 2), (2, 3), (3, 0))


def build_cut(verts, signs, edge_points, tol_area=SLIVER_TOL):
    """Turn vertex signs and per-edge crossings into a cut.

    ``signs`` holds -1/0/+1 per corner (0 meaning the corner lies on the
    interface) and ``edge_points`` one crossing point or ``None`` per local
    edge (bottom, right, top, left).  Returns ``(cut, side)``: ``cut`` is a
    :class:`CutConfiguration` or ``None`` and ``side`` is the element's
    single side when there is no cut.
    """
    verts = np.asarray(verts, dtype=float)
    walk = []  # (point, sign) with sign 0 marking chord endpoints
    for k, (i, _) in enumerate(_edge_pairs()):
        walk.append((verts[i], int(signs[i])))
        if edge_points[k] is not None:
            walk.append((np.asarray(edge_points[k], dtype=float), 0))
    cuts = [k for k, (_, s) in enumerate(walk) if s == 0]

    nonzero = [int(s) for s in signs if s != 0]
    if len(cuts) > 2:
        raise MultipleCrossings("interface meets the element boundary more than twice")
    if len(cuts) < 2:
        return None, _majority(nonzero, verts, signs)

    i0, i1 = cuts
    arc_a = [walk[k] for k in range(i0, i1 + 1)]
    arc_b = [walk[k % len(walk)] for k in range(i1, i0 + len(walk) + 1)]
    side_a = _arc_side(arc_a)
    side_b = _arc_side(arc_b)
    poly_a = np.array([p for p, _ in arc_a])
    poly_b = np.array([p for p, _ in arc_b])
    area = abs(polygon_area(verts))
    area_a, area_b = polygon_area(poly_a), polygon_area(poly_b)
    if (side_a == 0 or side_b == 0 or side_a == side_b
            or min(area_a, area_b) < tol_area * area):
        if area_a >= area_b and side_a != 0:
            return None, side_a
        if side_b != 0:
            return None, side_b
        return None, _majority(nonzero, verts, signs)

    minus, plus = (poly_a, poly_b) if side_a < 0 else (poly_b, poly_a)
    D, E = walk[i0][0], walk[i1][0]
    # corners on the chord keep the side of the larger sub-polygon
    big = -1 if polygon_area(minus) >= polygon_area(plus) else 1
    vertex_sides = tuple(int(s) if s != 0 else big for s in signs)
    return CutConfiguration(D=D, E=E, minus_polygon=minus, plus_polygon=plus,
                            vertex_sides=vertex_sides), 0


def _arc_side(arc):
    sides = {s for _, s in arc if s != 0}
    if len(sides) == 1:
        return sides.pop()
    return 0


def _majority(nonzero, verts, signs):
    total = sum(nonzero)
    if total != 0:
        return 1 if total > 0 else -1
    # tie: fall back to the first signed corner, then plus
    return nonzero[0] if nonzero else 1


def snap_signs(verts, signs, P_idx, Q_idx, points, h):
    """Zero the sign of any vertex lying within ``SNAP_TOL*h`` of a crossing.

    Returns the updated signs and a mask of crossings that survive.
    """
    signs = np.array(signs, dtype=int)
    keep = np.ones(len(points), dtype=bool)
    if len(points) == 0:
        return signs, keep
    dp = np.linalg.norm(points - verts[P_idx], axis=1)
    dq = np.linalg.norm(points - verts[Q_idx], axis=1)
    snap_p = dp <= SNAP_TOL * h
    snap_q = (dq <= SNAP_TOL * h) & ~snap_p
    signs[P_idx[snap_p]] = 0
    signs[Q_idx[snap_q]] = 0
    keep = ~(snap_p | snap_q)
    return signs, keep


def vertex_signs(curve, verts, tol):
    vals = curve.level_set(verts[:, 0], verts[:, 1])
    return np.where(np.abs(vals) <= tol, 0, np.sign(vals)).astype(int)


def cut_rectangle(curve, rect, tol=1e-12):
    """Split ``rect`` along the chord joining the two interface crossings.

    Returns ``None`` when the rectangle is not cut (including tangential
    touches and cuts that leave a sliver below ``SLIVER_TOL`` of the area).
    """
    verts = rect.vertices()
    signs = vertex_signs(curve, verts, tol)
    P_idx = np.array([i for i, _ in _edge_pairs()])
    Q_idx = np.array([j for _, j in _edge_pairs()])
    if np.any(_count_sign_changes(curve, verts[P_idx], verts[Q_idx]) > 1):
        raise MultipleCrossings("curve crosses a rectangle edge more than once")
    crossing = signs[P_idx] * signs[Q_idx] < 0
    points = np.full((4, 2), np.nan)
    if crossing.any():
        points[crossing] = bisect_segments(curve, verts[P_idx[crossing]], verts[Q_idx[crossing]])
    idx = np.flatnonzero(crossing)
    signs, keep = snap_signs(verts, signs, P_idx[idx], Q_idx[idx], points[idx], rect.size)
    edge_points = [None] * 4
    for k, ok in zip(idx, keep):
        if ok and signs[P_idx[k]] * signs[Q_idx[k]] < 0:
            edge_points[k] = points[k]
    cut, _ = build_cut(verts, signs, edge_points)
    return cut


def rectangle_side(curve, rect, tol=1e-12):
    """Side of a rectangle that :func:`cut_rectangle` reports as uncut."""
    verts = rect.vertices()
    signs = vertex_signs(curve, verts, tol)
    nonzero = [int(s) for s in signs if s != 0]
    return _majority(nonzero, verts, signs)
