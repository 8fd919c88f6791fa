"""Mass, PPIFE stiffness and load assembly; Dirichlet elimination.

The stiffness matrix realises the partially penalized bilinear form::

    a(w, v) = sum_K int_K beta grad w . grad v
              - sum_B int_B {beta grad w . n} [v]
              + eps * sum_B int_B {beta grad v . n} [w]
              + sum_B int_B sigma0 / |B|**alpha [v] [w]

where B runs over interior interface edges only.  Entry ``A[i, j]`` is
``a(phi_j, phi_i)``.
"""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .basis import PLUS
from .linalg import TripletBuffer, compress
from .quadrature import element_quadrature, mesh_quadrature, segment_points

# reference Q1 matrices on a square, vertex order CCW from lower left
_Q1_STIFF = np.array([[4, -1, -2, -1],
                      [-1, 4, -1, -2],
                      [-2, -1, 4, -1],
                      [-1, -2, -1, 4]]) / 6.0
_Q1_MASS = np.array([[4, 2, 1, 2],
                     [2, 4, 2, 1],
                     [1, 2, 4, 2],
                     [2, 1, 2, 4]]) / 36.0

ASSEMBLY_STRENGTH = 4
LOAD_STRENGTH = 7
EDGE_POINTS = 3


@dataclass(frozen=True)
class PenaltyConfig:
    epsilon: int = 1
    sigma0: float = 1.0
    alpha: float = 1.0

    def __post_init__(self):
        if self.epsilon not in (-1, 0, 1):
            raise ValueError(f"epsilon must be -1, 0 or 1, got {self.epsilon}")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.sigma0 < 0:
            raise ValueError("sigma0 must be nonnegative")
        if self.epsilon in (-1, 0) and self.sigma0 <= 0:
            raise ValueError("epsilon in {-1, 0} needs a positive sigma0")

    @property
    def symmetric(self):
        return self.epsilon == -1


def _block_triplets(buf, dofs, blocks):
    # dofs (m, 4), blocks (m, 4, 4)
    rows = np.repeat(dofs[:, :, None], 4, axis=2)
    cols = np.repeat(dofs[:, None, :], 4, axis=1)
    buf.add(rows, cols, blocks)


def _beta_of(space, sides):
    bm, bp = space.beta
    return np.where(np.asarray(sides) > 0, bp, bm)


def local_mass(space, k):
    tq = element_quadrature(space.mesh, space.classification, k, ASSEMBLY_STRENGTH)
    vals, _ = space.shape_values(np.full(len(tq.weights), k), tq.points,
                                 branch=(tq.sides > 0).astype(int))
    return np.einsum("q,qi,qj->ij", tq.weights, vals, vals)


def local_stiffness(space, k):
    tq = element_quadrature(space.mesh, space.classification, k, ASSEMBLY_STRENGTH)
    _, grads = space.shape_values(np.full(len(tq.weights), k), tq.points,
                                  branch=(tq.sides > 0).astype(int))
    w = tq.weights * _beta_of(space, tq.sides)
    return np.einsum("q,qid,qjd->ij", w, grads, grads)


def assemble_mass(space):
    mesh, cl = space.mesh, space.classification
    buf = TripletBuffer(space.n_dofs)
    plain = cl.non_interface_elements
    _block_triplets(buf, mesh.elements[plain],
                    np.broadcast_to(_Q1_MASS * mesh.h**2, (len(plain), 4, 4)))
    for k in cl.interface_elements:
        buf.add_block(mesh.elements[k], mesh.elements[k], local_mass(space, k))
    M = compress(buf)
    M = ((M + M.T) * 0.5).tocsr()
    M.sort_indices()
    return M


def assemble_volume(space):
    mesh, cl = space.mesh, space.classification
    buf = TripletBuffer(space.n_dofs)
    plain = cl.non_interface_elements
    beta = _beta_of(space, cl.element_side[plain])
    _block_triplets(buf, mesh.elements[plain], beta[:, None, None] * _Q1_STIFF)
    for k in cl.interface_elements:
        buf.add_block(mesh.elements[k], mesh.elements[k], local_stiffness(space, k))
    return buf


def edge_traces(space, e, n_points=EDGE_POINTS):
    """Jumps and averaged normal fluxes of all shapes touching interface edge ``e``.

    Returns ``(dofs, pts, weights, jump, flux)`` with ``jump`` and ``flux``
    of shape (n_quad, len(dofs)).  Traces from each neighbour use that
    neighbour's own basis and chord branch.
    """
    mesh = space.mesh
    v0, v1 = mesh.vertices[mesh.edges[e]]
    split = space.classification.edge_split[e]
    p_a, w_a = segment_points(v0, split, n_points)
    p_b, w_b = segment_points(split, v1, n_points)
    pts = np.vstack([p_a, p_b])
    wts = np.concatenate([w_a, w_b])
    k1, k2 = mesh.edge_elements[e]
    normal = mesh.edge_normals[e]
    dofs = np.unique(np.concatenate([mesh.elements[k1], mesh.elements[k2]]))
    jump = np.zeros((len(wts), len(dofs)))
    flux = np.zeros((len(wts), len(dofs)))
    for k, sign in ((k1, 1.0), (k2, -1.0)):
        elems = np.full(len(wts), k)
        branch = space.branch(elems, pts)
        vals, grads = space.shape_values(elems, pts, branch=branch)
        beta = _beta_of(space, np.where(branch == PLUS, 1, -1))
        cols = np.searchsorted(dofs, mesh.elements[k])
        jump[:, cols] += sign * vals
        flux[:, cols] += 0.5 * beta[:, None] * (grads @ normal)
    return dofs, pts, wts, jump, flux


def local_edge_matrix(space, e, cfg):
    dofs, _, wts, J, G = edge_traces(space, e)
    pen = cfg.sigma0 / space.mesh.h**cfg.alpha
    # row = test function, column = trial function
    L = (-np.einsum("q,qa,qb->ab", wts, J, G)
         + cfg.epsilon * np.einsum("q,qa,qb->ab", wts, G, J)
         + pen * np.einsum("q,qa,qb->ab", wts, J, J))
    return dofs, L


def assemble_stiffness(space, cfg):
    buf = assemble_volume(space)
    for e in space.classification.interface_edges:
        dofs, L = local_edge_matrix(space, e, cfg)
        buf.add_block(dofs, dofs, L)
    A = compress(buf)
    if cfg.symmetric:
        # symmetrise away summation-order round-off
        A = ((A + A.T) * 0.5).tocsr()
        A.sort_indices()
    return A


class LoadAssembler:
    """Load vectors ``F_i(t) = int f(., t) phi_i`` on a fixed quadrature cache.

    ``f(x, y, t)`` is evaluated at the cached points; the problem decides
    the material side of each point itself.
    """

    def __init__(self, space, strength=LOAD_STRENGTH):
        self.space = space
        self.quad = mesh_quadrature(space.mesh, space.classification, strength)
        q = self.quad
        vals, _ = space.shape_values(q.elements, q.points, branch=(q.sides > 0).astype(int))
        self._wphi = q.weights[:, None] * vals
        self._dofs = space.mesh.elements[q.elements]

    def __call__(self, f, t):
        q = self.quad
        fv = np.asarray(f(q.points[:, 0], q.points[:, 1], t), dtype=float)
        contrib = self._wphi * fv[:, None]
        return np.bincount(self._dofs.ravel(), weights=contrib.ravel(),
                           minlength=self.space.n_dofs)


def assemble_load(space, f, t, strength=LOAD_STRENGTH):
    return LoadAssembler(space, strength)(f, t)


@dataclass
class DirichletData:
    dofs: np.ndarray
    g: object

    def values(self, vertices, t):
        p = vertices[self.dofs]
        return np.asarray(self.g(p[:, 0], p[:, 1], t), dtype=float) * np.ones(len(self.dofs))


class DirichletSystem:
    """Symmetric elimination of Dirichlet dofs from a fixed operator.

    The constrained operator has zeroed rows and columns at the
    constrained dofs and a unit diagonal there; right-hand sides are
    lifted by subtracting the eliminated columns.
    """

    def __init__(self, K, dofs):
        K = sp.csr_matrix(K)
        n = K.shape[0]
        self.dofs = np.asarray(dofs, dtype=int)
        mask = np.zeros(n, dtype=bool)
        mask[self.dofs] = True
        self.mask = mask
        self.lift = K[:, self.dofs].tocsc()
        keep = sp.diags((~mask).astype(float))
        Kc = keep @ K @ keep + sp.diags(mask.astype(float))
        Kc = sp.csr_matrix(Kc)
        Kc.eliminate_zeros()
        Kc.sort_indices()
        self.matrix = Kc

    def rhs(self, b, values):
        values = np.asarray(values, dtype=float)
        r = np.asarray(b, dtype=float) - self.lift @ values
        r[self.dofs] = values
        return r


def apply_dirichlet(K, rhs, data, vertices, t):
    """Constrained ``(matrix, rhs)`` for Dirichlet data at time ``t``."""
    system = DirichletSystem(K, data.dofs)
    return system.matrix, system.rhs(rhs, data.values(vertices, t))
