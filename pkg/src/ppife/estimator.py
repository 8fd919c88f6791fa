"""Scikit-learn style front end.

``PPIFESolver`` holds the discretisation hyper-parameters; ``fit`` takes a
problem object (e.g. :class:`~ppife.problem.EllipseProblem`), runs the
theta scheme to the problem's final time and ``predict`` evaluates the
discrete solution at points.  Parameters round-trip through
``get_params`` / ``set_params`` so solvers can be cloned and swept.
"""
import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .assembly import PenaltyConfig, assemble_mass, assemble_stiffness
from .basis import build_global_space
from .error_analysis import ErrorEvaluator, ErrorRecord
from .geometry import AxisRect
from .linalg import DEFAULT_TOL
from .mesh import build_mesh, classify_mesh
from .timestep import INTERPOLATION, ThetaSchemeConfig, run_transient


def check_points(X, domain=None):
    """Validate an ``(n, 2)`` array of points, optionally inside ``domain``."""
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if X.shape[1] != 2:
        raise ValueError(f"expected points with 2 columns, got {X.shape[1]}")
    if domain is not None:
        slack = 1e-12 * domain.size
        inside = ((X[:, 0] >= domain.x0 - slack) & (X[:, 0] <= domain.x0 + domain.width + slack)
                  & (X[:, 1] >= domain.y0 - slack) & (X[:, 1] <= domain.y0 + domain.height + slack))
        if not inside.all():
            raise ValueError("points outside the computational domain")
    return X


class PPIFESolver(RegressorMixin, BaseEstimator):
    """Partially penalized IFE solver for a parabolic interface problem.

    Parameters
    ----------
    n_side : int
        Squares per side of the uniform mesh.
    theta : float
        1 for backward Euler, 0.5 for Crank-Nicolson.
    epsilon : {-1, 0, 1}
        Symmetrisation parameter of the interface edge terms.
    sigma0, alpha : float
        Penalty ``sigma0 / |B|**alpha`` on interface edge jumps.
    dt_ratio : float
        Time step ``dt = dt_ratio * h`` (rounded to a whole number of steps).
    init : {"interpolation", "elliptic"}
        Initial condition operator.
    tol : float
        Relative residual tolerance of the linear solves.

    Attributes
    ----------
    mesh_, classification_, space_ : fitted discretisation
    scheme_ : ThetaSchemeConfig
    solution_ : TransientSolution
    coef_ : ndarray, dof vector at the final time
    """

    def __init__(self, n_side=20, theta=1.0, epsilon=1, sigma0=1.0, alpha=1.0,
                 dt_ratio=2.0, init=INTERPOLATION, tol=DEFAULT_TOL, domain=None):
        self.n_side = n_side
        self.theta = theta
        self.epsilon = epsilon
        self.sigma0 = sigma0
        self.alpha = alpha
        self.dt_ratio = dt_ratio
        self.init = init
        self.tol = tol
        self.domain = domain

    def _penalty(self):
        return PenaltyConfig(int(self.epsilon), float(self.sigma0), float(self.alpha))

    def fit(self, problem, y=None):
        cfg = self._penalty()
        domain = self.domain or AxisRect(0.0, 0.0, 1.0, 1.0)
        self.mesh_ = build_mesh(domain, int(self.n_side))
        self.classification_ = classify_mesh(self.mesh_, problem.curve)
        self.space_ = build_global_space(self.mesh_, self.classification_, problem.beta)
        self.scheme_ = ThetaSchemeConfig.from_ratio(self.mesh_.h, self.dt_ratio, self.theta,
                                                    problem.t_final, self.tol)
        self.mass_ = assemble_mass(self.space_)
        self.stiffness_ = assemble_stiffness(self.space_, cfg)
        self.solution_ = run_transient(self.space_, cfg, self.scheme_, problem, init=self.init,
                                       M=self.mass_, A=self.stiffness_)
        self.coef_ = self.solution_.final
        self.problem_ = problem
        self.n_iter_ = int(np.sum(self.solution_.iterations))
        return self

    def predict(self, X):
        """Discrete solution at the final time, evaluated at points ``X`` (n, 2)."""
        check_is_fitted(self, "coef_")
        X = check_points(X, self.mesh_.domain)
        u, _ = self.space_.evaluate(self.coef_, X)
        return u

    def predict_gradient(self, X):
        check_is_fitted(self, "coef_")
        X = check_points(X, self.mesh_.domain)
        _, g = self.space_.evaluate(self.coef_, X)
        return g

    def error_record(self, problem=None, side_rule="curve"):
        """All four error norms at the final time against ``problem``'s exact solution."""
        check_is_fitted(self, "coef_")
        problem = problem or self.problem_
        t = self.solution_.final_time
        ev = ErrorEvaluator(self.space_, side_rule=side_rule)
        u = self.coef_
        return ErrorRecord(
            h=self.mesh_.h, dt=self.scheme_.dt,
            linf=ev.linf(u, problem.exact_u, t),
            l2=ev.l2(u, problem.exact_u, t),
            h1=ev.h1_semi(u, problem.exact_grad_u, t),
            energy=ev.energy(u, problem.exact_grad_u, self._penalty(), t),
        )
