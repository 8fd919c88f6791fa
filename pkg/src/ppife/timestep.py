"""Theta-scheme time stepping for the fully discrete PPIFE method.

Each step solves::

    (M/dt + theta A) u^n = (M/dt - (1-theta) A) u^{n-1} + theta F^n + (1-theta) F^{n-1}

with Dirichlet values imposed by symmetric elimination.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from .assembly import (DirichletSystem, LoadAssembler, PenaltyConfig, assemble_mass,
                       assemble_stiffness, edge_traces)
from .error_analysis import ERROR_EDGE_POINTS
from .exceptions import NoConvergence
from .linalg import DEFAULT_TOL, bicgstab, cg
from .quadrature import mesh_quadrature

log = logging.getLogger(__name__)

INTERPOLATION = "interpolation"
ELLIPTIC_PROJECTION = "elliptic"


@dataclass(frozen=True)
class ThetaSchemeConfig:
    theta: float = 1.0
    t_final: float = 1.0
    n_steps: int = 10
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [0, 1]")
        if self.t_final <= 0:
            raise ValueError("t_final must be positive")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError("n_steps must be a positive integer")
        if self.theta == 0.0:
            log.warning("theta = 0 (forward Euler) carries no stability guarantee")

    @property
    def dt(self):
        return self.t_final / self.n_steps

    def time(self, n):
        return self.t_final * n / self.n_steps

    @classmethod
    def from_ratio(cls, h, ratio=2.0, theta=1.0, t_final=1.0, tol=DEFAULT_TOL):
        """Uniform steps with ``dt`` as close as possible to ``ratio * h``."""
        n_steps = max(1, int(round(t_final / (ratio * h))))
        return cls(theta=theta, t_final=t_final, n_steps=n_steps, tol=tol)


@dataclass
class TransientSolution:
    times: list = field(default_factory=list)
    coeffs: list = field(default_factory=list)
    stride: int = 1
    iterations: list = field(default_factory=list)

    @property
    def final(self):
        return self.coeffs[-1]

    @property
    def final_time(self):
        return self.times[-1]


def _solve(K, b, x0, symmetric, tol):
    if symmetric:
        return cg(K, b, tol=tol, x0=x0)
    return bicgstab(K, b, tol=tol, x0=x0)


class ThetaStepper:
    """Pre-formed composite operator for repeated theta steps.

    ``symmetric`` selects CG; otherwise BiCGStab is used.
    """

    def __init__(self, M, A, dt, theta, boundary_dofs, symmetric=False, tol=DEFAULT_TOL):
        self.dt = float(dt)
        self.theta = float(theta)
        self.tol = tol
        K = (M * (1.0 / self.dt) + A * self.theta).tocsr()
        self.symmetric = bool(symmetric or self.theta == 0.0)
        if self.symmetric:
            K = ((K + K.T) * 0.5).tocsr()
        self.composite = K
        self.explicit = (M * (1.0 / self.dt) - A * (1.0 - self.theta)).tocsr()
        self.dirichlet = DirichletSystem(K, boundary_dofs)
        self.boundary_dofs = np.asarray(boundary_dofs)

    @property
    def matrix(self):
        return self.dirichlet.matrix

    def step(self, u_prev, F_prev, F_curr, g_values, step=None):
        rhs = self.explicit @ u_prev + self.theta * F_curr + (1.0 - self.theta) * F_prev
        b = self.dirichlet.rhs(rhs, g_values)
        x0 = np.array(u_prev, dtype=float)
        x0[self.boundary_dofs] = g_values
        try:
            u, its = _solve(self.matrix, b, x0, self.symmetric, self.tol)
        except NoConvergence as exc:
            raise NoConvergence(f"step {step}: {exc}", iterations=exc.iterations,
                                residual=exc.residual, step=step) from exc
        u[self.boundary_dofs] = g_values
        return u, its


def theta_step(M, A, u_prev, F_prev, F_curr, dt, theta, boundary_dofs, g_values,
               symmetric=False, tol=DEFAULT_TOL):
    stepper = ThetaStepper(M, A, dt, theta, boundary_dofs, symmetric, tol)
    u, _ = stepper.step(np.asarray(u_prev, dtype=float), F_prev, F_curr, g_values)
    return u


def elliptic_projection_rhs(space, grad_u, beta_at):
    """``a(u, phi_i)`` for a continuous ``u`` with continuous normal flux.

    ``beta_at(x, y)`` is the true coefficient; jump terms of ``u`` vanish.
    """
    mesh = space.mesh
    q = mesh_quadrature(mesh, space.classification, 7)
    _, grads = space.shape_values(q.elements, q.points, branch=(q.sides > 0).astype(int))
    x, y = q.points[:, 0], q.points[:, 1]
    flux = beta_at(x, y)[:, None] * grad_u(x, y)
    contrib = q.weights[:, None] * np.einsum("qid,qd->qi", grads, flux)
    b = np.bincount(mesh.elements[q.elements].ravel(), weights=contrib.ravel(),
                    minlength=space.n_dofs)
    for e in space.classification.interface_edges:
        dofs, pts, w, J, _ = edge_traces(space, e, ERROR_EDGE_POINTS)
        n = mesh.edge_normals[e]
        fn = beta_at(pts[:, 0], pts[:, 1]) * (grad_u(pts[:, 0], pts[:, 1]) @ n)
        b[dofs] -= (w * fn) @ J
    return b


def initial_condition(space, problem, mode=INTERPOLATION, cfg=None, A=None, tol=DEFAULT_TOL):
    """Initial dof vector: nodal interpolation or elliptic projection of ``u0``."""
    v = space.mesh.vertices
    u0 = np.asarray(problem.initial_u0(v[:, 0], v[:, 1]), dtype=float) * np.ones(len(v))
    if mode == INTERPOLATION:
        return u0
    if mode != ELLIPTIC_PROJECTION:
        raise ValueError(f"unknown initial condition mode {mode!r}")
    cfg = cfg or PenaltyConfig()
    if A is None:
        A = assemble_stiffness(space, cfg)
    b = elliptic_projection_rhs(space, problem.initial_grad_u0, problem.beta_at)
    bd = space.boundary_dofs
    system = DirichletSystem(A, bd)
    rhs = system.rhs(b, u0[bd])
    u, _ = _solve(system.matrix, rhs, u0, cfg.symmetric, tol)
    u[bd] = u0[bd]
    return u


def run_transient(space, cfg, scheme, problem, init=INTERPOLATION, u_init=None,
                  stride=None, M=None, A=None):
    """March the theta scheme from ``t = 0`` to ``scheme.t_final``.

    ``u_init`` overrides the initial condition with an explicit dof vector.
    Records ``u^0``, every ``stride``-th level and the final level.
    """
    if M is None:
        M = assemble_mass(space)
    if A is None:
        A = assemble_stiffness(space, cfg)
    if u_init is None:
        u = initial_condition(space, problem, init, cfg, A, tol=scheme.tol)
    else:
        u = np.array(u_init, dtype=float)
    bd = space.boundary_dofs
    vb = space.mesh.vertices[bd]

    def g(t):
        return np.asarray(problem.boundary_g(vb[:, 0], vb[:, 1], t), dtype=float) * np.ones(len(bd))

    load = LoadAssembler(space)
    stepper = ThetaStepper(M, A, scheme.dt, scheme.theta, bd, cfg.symmetric, scheme.tol)
    stride = stride or scheme.n_steps
    sol = TransientSolution(times=[0.0], coeffs=[u.copy()], stride=stride)
    F_prev = load(problem.source_f, 0.0) if scheme.theta < 1.0 else None
    for n in range(1, scheme.n_steps + 1):
        t = scheme.time(n)
        F_curr = load(problem.source_f, t) if scheme.theta > 0.0 else None
        u, its = stepper.step(u, 0.0 if F_prev is None else F_prev,
                              0.0 if F_curr is None else F_curr, g(t), step=n)
        sol.iterations.append(its)
        if n % stride == 0 or n == scheme.n_steps:
            sol.times.append(t)
            sol.coeffs.append(u.copy())
        F_prev = F_curr if F_curr is not None else load(problem.source_f, t)
    return sol
