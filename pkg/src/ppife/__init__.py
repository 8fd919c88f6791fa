"""Partially penalized immersed finite elements for parabolic interface problems."""
from .assembly import (DirichletData, DirichletSystem, PenaltyConfig, apply_dirichlet,
                       assemble_load, assemble_mass, assemble_stiffness)
from .basis import (GlobalSpace, IFEElementBasis, build_global_space, build_immersed_basis,
                    interpolate, partition_residual, standard_bilinear_basis)
from .error_analysis import (ErrorEvaluator, ErrorRecord, energy_error, h1_semi_error,
                             l2_error, linf_error, rates)
from .estimator import PPIFESolver
from .geometry import AxisRect, EllipseCurve, InterfaceCurve, LineCurve, Region, cut_rectangle
from .mesh import CartesianMesh, build_mesh, classify_mesh
from .problem import EllipseProblem, FunctionProblem
from .study import RunConfig, run_study
from .timestep import ThetaSchemeConfig, initial_condition, run_transient, theta_step

__version__ = "0.1.0"

__all__ = [
    "AxisRect", "CartesianMesh", "DirichletData", "DirichletSystem", "EllipseCurve",
    "EllipseProblem", "ErrorEvaluator", "ErrorRecord", "FunctionProblem", "GlobalSpace",
    "IFEElementBasis", "InterfaceCurve", "LineCurve", "PPIFESolver", "PenaltyConfig", "Region",
    "RunConfig", "ThetaSchemeConfig", "apply_dirichlet", "assemble_load", "assemble_mass",
    "assemble_stiffness", "build_global_space", "build_immersed_basis", "build_mesh",
    "classify_mesh", "cut_rectangle", "energy_error", "h1_semi_error", "initial_condition",
    "interpolate", "l2_error", "linf_error", "rates", "run_study", "run_transient",
    "partition_residual", "standard_bilinear_basis", "theta_step",
]
