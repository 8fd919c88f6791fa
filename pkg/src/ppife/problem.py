"""Benchmark problems with known solutions.

All callables are vectorised over ``x`` and ``y``.
"""
from dataclasses import dataclass, field

import numpy as np

from .geometry import EllipseCurve


@dataclass
class EllipseProblem:
    """Ellipse interface benchmark on the unit square.

    The exact solution is ``r**p * exp(t) / beta_minus`` inside the ellipse
    and ``(r**p / beta_plus - 1 / beta_plus + 1 / beta_minus) * exp(t)``
    outside, so both the solution and the normal flux are continuous.
    """

    beta_minus: float = 1.0
    beta_plus: float = 10.0
    x0: float = 0.0
    y0: float = 0.0
    a: float = np.pi / 4
    b: float = np.pi / 6
    p: int = 5
    t_final: float = 1.0

    def __post_init__(self):
        if self.beta_minus <= 0 or self.beta_plus <= 0:
            raise ValueError("diffusion coefficients must be positive")

    @property
    def beta(self):
        return (self.beta_minus, self.beta_plus)

    @property
    def curve(self):
        return EllipseCurve((self.x0, self.y0), (self.a, self.b))

    def r(self, x, y):
        X = np.asarray(x, dtype=float) - self.x0
        Y = np.asarray(y, dtype=float) - self.y0
        return np.sqrt(X**2 / self.a**2 + Y**2 / self.b**2)

    def side(self, x, y):
        """-1 inside the ellipse, +1 outside (points on it count as outside)."""
        return np.where(self.r(x, y) < 1.0, -1, 1)

    def beta_at(self, x, y, side=None):
        side = self.side(x, y) if side is None else side
        return np.where(np.asarray(side) < 0, self.beta_minus, self.beta_plus)

    def _spatial(self, x, y, side):
        rp = self.r(x, y) ** self.p
        bm, bp = self.beta_minus, self.beta_plus
        return np.where(side < 0, rp / bm, rp / bp - 1.0 / bp + 1.0 / bm)

    def exact_u(self, x, y, t, side=None):
        side = self.side(x, y) if side is None else np.asarray(side)
        return self._spatial(x, y, side) * np.exp(t)

    def exact_grad_u(self, x, y, t, side=None):
        """Gradient (..., 2); ``grad r**p = p r**(p-2) (X/a^2, Y/b^2)``."""
        side = self.side(x, y) if side is None else np.asarray(side)
        X = np.asarray(x, dtype=float) - self.x0
        Y = np.asarray(y, dtype=float) - self.y0
        r = self.r(x, y)
        coef = self.p * r ** (self.p - 2) * np.exp(t) / self.beta_at(x, y, side)
        return np.stack([coef * X / self.a**2, coef * Y / self.b**2], axis=-1)

    def laplacian_rp(self, x, y):
        X = np.asarray(x, dtype=float) - self.x0
        Y = np.asarray(y, dtype=float) - self.y0
        r = self.r(x, y)
        a2, b2 = self.a**2, self.b**2
        p = self.p
        return (p * (p - 2) * r ** (p - 4) * (X**2 / a2**2 + Y**2 / b2**2)
                + p * r ** (p - 2) * (1.0 / a2 + 1.0 / b2))

    def source_f(self, x, y, t, side=None):
        """``u_t - div(beta grad u)``; beta cancels against the 1/beta prefactor."""
        side = self.side(x, y) if side is None else np.asarray(side)
        return np.exp(t) * (self._spatial(x, y, side) - self.laplacian_rp(x, y))

    def boundary_g(self, x, y, t):
        return self.exact_u(x, y, t)

    def initial_u0(self, x, y):
        return self.exact_u(x, y, 0.0)

    def initial_grad_u0(self, x, y):
        return self.exact_grad_u(x, y, 0.0)


def _zero(x, y, *args):
    return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)


@dataclass
class FunctionProblem:
    """Problem assembled from plain callables with a single interface curve.

    ``source(x, y, t)``, ``boundary(x, y, t)``, ``initial(x, y)`` and the
    optional ``initial_grad(x, y)`` / ``exact``/``exact_grad`` callables are
    vectorised; ``curve`` decides the material side.
    """

    curve: object
    beta_minus: float = 1.0
    beta_plus: float = 1.0
    source: object = _zero
    boundary: object = _zero
    initial: object = _zero
    initial_grad: object = None
    exact: object = None
    exact_grad: object = None
    t_final: float = 1.0
    extra: dict = field(default_factory=dict)

    @property
    def beta(self):
        return (self.beta_minus, self.beta_plus)

    def side(self, x, y):
        return np.where(self.curve.level_set(x, y) < 0, -1, 1)

    def beta_at(self, x, y, side=None):
        side = self.side(x, y) if side is None else side
        return np.where(np.asarray(side) < 0, self.beta_minus, self.beta_plus)

    def source_f(self, x, y, t, side=None):
        return self.source(x, y, t)

    def boundary_g(self, x, y, t):
        return self.boundary(x, y, t)

    def initial_u0(self, x, y):
        return self.initial(x, y)

    def initial_grad_u0(self, x, y):
        if self.initial_grad is None:
            raise ValueError("problem has no initial gradient")
        return self.initial_grad(x, y)

    def exact_u(self, x, y, t, side=None):
        return self.exact(x, y, t)

    def exact_grad_u(self, x, y, t, side=None):
        return self.exact_grad(x, y, t)
