"""Geometrically exact Cosserat rod finite elements.

Total Lagrangian quaternion kinematics with a Petrov-Galerkin projection;
internal virtual work either displacement-based (DB) or mixed (MX) with
independent resultant contact force/moment fields in compliance form.
"""

from .assembly import Clamp, DrivenRotation, LoadCase, PointLoad, StaticProblem
from .material import ElasticLaw, StrainState, complementary_energy, contact_forces, strain_energy
from .mesh import Discretization, gauss_rule, lagrange_basis
from .metrics import convergence_slope, pose_evaluator, twist_error
from .newton import (
    NewtonReport,
    SolverConfig,
    convergence_rate,
    min_increment_search,
    newton_solve,
)

__all__ = [
    "Clamp",
    "Discretization",
    "DrivenRotation",
    "ElasticLaw",
    "LoadCase",
    "NewtonReport",
    "PointLoad",
    "SolverConfig",
    "StaticProblem",
    "StrainState",
    "complementary_energy",
    "contact_forces",
    "convergence_rate",
    "convergence_slope",
    "gauss_rule",
    "lagrange_basis",
    "min_increment_search",
    "newton_solve",
    "pose_evaluator",
    "strain_energy",
    "twist_error",
]

__version__ = "0.1.0"
