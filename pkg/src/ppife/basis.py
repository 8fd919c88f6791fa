"""Bilinear FE and immersed FE shape functions.

Every shape function is stored per element as bilinear coefficients
``(a, b, c, d)`` of ``a + b*xi + c*eta + d*xi*eta`` in the element's
reference coordinates ``xi = (x - x0)/h``, ``eta = (y - y0)/h``, one set per
branch (minus, plus).  ``IFEElementBasis.global_coeffs`` converts to
coefficients of ``1, x, y, xy``.  On non-interface elements both branches
hold the standard Lagrange coefficients.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .exceptions import SingularLocalSystem

MINUS, PLUS = 0, 1
PIVOT_TOL = 1e-14

# Q1 shapes on [0, 1]^2, vertex order CCW from lower left
REFERENCE_Q1 = np.array([[1.0, -1.0, -1.0, 1.0],
                         [0.0, 1.0, 0.0, -1.0],
                         [0.0, 0.0, 0.0, 1.0],
                         [0.0, 0.0, 1.0, -1.0]])
_REF_VERTS = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def monomials(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.stack([np.ones_like(x), x, y, x * y], axis=-1)


def monomial_grads(x, y):
    """Gradients of (1, x, y, xy), shape (..., 4, 2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z, o = np.zeros_like(x), np.ones_like(x)
    gx = np.stack([z, o, z, y], axis=-1)
    gy = np.stack([z, z, o, x], axis=-1)
    return np.stack([gx, gy], axis=-1)


def to_global(coeffs, origin, h):
    """Reference-coordinate coefficients (..., 4) to coefficients of 1, x, y, xy."""
    a, b, c, d = np.moveaxis(np.asarray(coeffs, dtype=float), -1, 0)
    x0, y0 = origin
    b, c, d = b / h, c / h, d / h**2
    return np.stack([a - b * x0 - c * y0 + d * x0 * y0, b - d * y0, c - d * x0, d], axis=-1)


def standard_bilinear_basis(rect):
    """Coefficients (4, 4) of the Q1 Lagrange shapes in global coordinates."""
    x0, y0 = rect.x0, rect.y0
    x1, y1 = x0 + rect.width, y0 + rect.height
    c = np.array([[x1 * y1, -y1, -x1, 1.0],
                  [-x0 * y1, y1, x0, -1.0],
                  [x0 * y0, -y0, -x0, 1.0],
                  [-x1 * y0, y0, x1, -1.0]])
    return c / (rect.width * rect.height)


@dataclass(frozen=True, eq=False)
class IFEElementBasis:
    """Shape functions of one element.

    ``coeffs[i, s]`` are the reference-coordinate coefficients of shape
    ``i`` on branch ``s`` (0 = minus, 1 = plus).  ``cut`` is ``None`` for
    standard elements, whose single material side is ``side``.
    """

    coeffs: np.ndarray
    origin: tuple = (0.0, 0.0)
    h: float = 1.0
    cut: object = None
    side: int = 0

    @property
    def kind(self):
        return "standard" if self.cut is None else "immersed"

    def local(self, points):
        return (np.asarray(points, dtype=float) - np.asarray(self.origin)) / self.h

    def global_coeffs(self):
        """Coefficients of ``1, x, y, xy``, shape (4, 2, 4)."""
        return to_global(self.coeffs, self.origin, self.h)

    def branch(self, points):
        pts = np.asarray(points, dtype=float)
        if self.cut is None:
            return np.full(pts.shape[:-1], PLUS if self.side > 0 else MINUS)
        return np.where(self.cut.chord_side(pts) > 0, PLUS, MINUS)


def _local_system(cut, beta_minus, beta_plus, origin, h):
    M = np.zeros((8, 8))
    mono = monomials(_REF_VERTS[:, 0], _REF_VERTS[:, 1])
    for j in range(4):
        s = PLUS if cut.vertex_sides[j] > 0 else MINUS
        M[j, 4 * s:4 * s + 4] = mono[j]
    D = (cut.D - origin) / h
    E = (cut.E - origin) / h
    for row, p in ((4, D), (5, E)):
        m = monomials(p[0], p[1])
        M[row, :4] = -m
        M[row, 4:] = m
    M[6, 3], M[6, 7] = -1.0, 1.0
    n = cut.chord_normal
    mid = 0.5 * (D + E)
    flux = np.array([0.0, n[0], n[1], mid[1] * n[0] + mid[0] * n[1]])
    scale = 1.0 / max(beta_minus, beta_plus)
    M[7, :4] = -beta_minus * flux * scale
    M[7, 4:] = beta_plus * flux * scale
    return M


def build_immersed_basis(rect, cut, beta_minus, beta_plus):
    """Solve the nodal / continuity / flux constraints for the 4 IFE shapes."""
    if beta_minus <= 0 or beta_plus <= 0:
        raise ValueError("diffusion coefficients must be positive")
    origin = np.array([rect.x0, rect.y0])
    M = _local_system(cut, beta_minus, beta_plus, origin, rect.size)
    lu, piv = lu_factor(M, check_finite=True)
    if np.min(np.abs(np.diag(lu))) < PIVOT_TOL:
        raise SingularLocalSystem("immersed shape function system is singular")
    rhs = np.zeros((8, 4))
    rhs[:4, :4] = np.eye(4)
    sol = lu_solve((lu, piv), rhs)
    coeffs = np.stack([sol[:4].T, sol[4:].T], axis=1)
    return IFEElementBasis(coeffs=coeffs, origin=(rect.x0, rect.y0), h=rect.size, cut=cut)


def constraint_residuals(basis, rect, beta_minus, beta_plus):
    """Residuals (4 shapes x 8 constraints) of an immersed basis.

    Columns: four nodal conditions, continuity at D and E, mixed derivative
    jump (reference coordinates), and the flux integral over DE in physical
    units.
    """
    cut = basis.cut
    D, E = basis.local(cut.D), basis.local(cut.E)
    res = np.zeros((4, 8))
    n = cut.chord_normal
    mid = 0.5 * (D + E)
    g = monomial_grads(*mid) / basis.h
    for i in range(4):
        cm, cp = basis.coeffs[i, MINUS], basis.coeffs[i, PLUS]
        for j in range(4):
            c = cp if cut.vertex_sides[j] > 0 else cm
            res[i, j] = monomials(*_REF_VERTS[j]) @ c - (1.0 if i == j else 0.0)
        res[i, 4] = monomials(*D) @ (cp - cm)
        res[i, 5] = monomials(*E) @ (cp - cm)
        res[i, 6] = cp[3] - cm[3]
        flux = beta_plus * (g.T @ cp) - beta_minus * (g.T @ cm)
        res[i, 7] = float(flux @ n) * cut.chord_length
    return res


def partition_residual(basis):
    """Max deviation of the coefficient sums per branch from those of 1."""
    return float(np.abs(basis.coeffs.sum(axis=0) - [1.0, 0.0, 0.0, 0.0]).max())


def eval_shape(basis, i, p):
    s = int(basis.branch(np.asarray(p, dtype=float)[None])[0])
    xi = basis.local(p)
    return float(monomials(xi[0], xi[1]) @ basis.coeffs[i, s])


def eval_shape_grad(basis, i, p):
    s = int(basis.branch(np.asarray(p, dtype=float)[None])[0])
    xi = basis.local(p)
    return monomial_grads(xi[0], xi[1]).T @ basis.coeffs[i, s] / basis.h


class GlobalSpace:
    """Lagrange-type IFE space: one dof per mesh vertex.

    Bulk arrays make point evaluation vectorised: ``coeffs`` has shape
    ``(n_elements, 4, 2, 4)`` in reference coordinates; ``chord_origin`` /
    ``chord_normal`` describe the branch-selecting chord line of each
    interface element.
    """

    def __init__(self, mesh, classification, beta):
        self.mesh = mesh
        self.classification = classification
        self.beta = (float(beta[0]), float(beta[1]))
        n_el = mesh.n_elements
        self.origins = mesh.element_origins()
        self.coeffs = np.broadcast_to(REFERENCE_Q1[None, :, None, :], (n_el, 4, 2, 4)).copy()
        self.element_side = classification.element_side.copy()
        self.chord_origin = np.zeros((n_el, 2))
        self.chord_normal = np.zeros((n_el, 2))
        self.is_interface = np.zeros(n_el, dtype=bool)
        for k, cut in classification.cuts.items():
            try:
                basis = build_immersed_basis(mesh.element_rect(k), cut, *self.beta)
            except SingularLocalSystem as exc:
                raise SingularLocalSystem(f"element {k}: {exc}", element=k) from exc
            self.coeffs[k] = basis.coeffs
            self.chord_origin[k] = cut.D
            self.chord_normal[k] = cut.chord_normal
            self.is_interface[k] = True

    @property
    def n_dofs(self):
        return self.mesh.n_vertices

    @property
    def boundary_dofs(self):
        return self.mesh.boundary_vertices

    @property
    def element_dofs(self):
        return self.mesh.elements

    def element_basis(self, k):
        cut = self.classification.cuts.get(int(k))
        return IFEElementBasis(coeffs=self.coeffs[k], origin=tuple(self.origins[k]),
                               h=self.mesh.h, cut=cut, side=int(self.element_side[k]))

    def branch(self, elems, points):
        """Chord-side branch (0 minus, 1 plus) of points inside ``elems``."""
        elems = np.asarray(elems)
        pts = np.asarray(points, dtype=float)
        d = pts - self.chord_origin[elems]
        s = np.einsum("ij,ij->i", d, self.chord_normal[elems])
        chord = np.where(s > 0, PLUS, MINUS)
        plain = np.where(self.element_side[elems] > 0, PLUS, MINUS)
        return np.where(self.is_interface[elems], chord, plain)

    def side(self, elems, points):
        return np.where(self.branch(elems, points) == PLUS, 1, -1)

    def shape_values(self, elems, points, branch=None):
        """Values (P, 4) and gradients (P, 4, 2) of the element shapes at points."""
        elems = np.asarray(elems)
        pts = np.asarray(points, dtype=float)
        if branch is None:
            branch = self.branch(elems, pts)
        c = self.coeffs[elems, :, branch, :]  # (P, 4 shapes, 4 coeffs)
        h = self.mesh.h
        xi = (pts - self.origins[elems]) / h
        x, y = xi[:, 0], xi[:, 1]
        vals = c[..., 0] + c[..., 1] * x[:, None] + c[..., 2] * y[:, None] + c[..., 3] * (x * y)[:, None]
        gx = (c[..., 1] + c[..., 3] * y[:, None]) / h
        gy = (c[..., 2] + c[..., 3] * x[:, None]) / h
        return vals, np.stack([gx, gy], axis=-1)

    def evaluate(self, coeffs, points, elems=None):
        """Evaluate the finite element function with dof vector ``coeffs``."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if elems is None:
            elems = self.mesh.locate(pts)
        vals, grads = self.shape_values(elems, pts)
        u = np.asarray(coeffs)[self.mesh.elements[elems]]
        return np.einsum("pi,pi->p", vals, u), np.einsum("pij,pi->pj", grads, u)


def build_global_space(mesh, classification, beta):
    return GlobalSpace(mesh, classification, beta)


def interpolate(space, u):
    """Nodal interpolant: the dof vector ``u(vertex)`` for a vectorised ``u(x, y)``."""
    v = space.mesh.vertices
    return np.asarray(u(v[:, 0], v[:, 1]), dtype=float) * np.ones(len(v))
