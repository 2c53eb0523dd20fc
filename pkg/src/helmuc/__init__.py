"""Stabilized finite elements for unique continuation of the Helmholtz equation."""

from .analysis import ConvergenceReport, ErrorReport, StudyConfig, error_norms, fit_rate, run_convergence_study, star_norm
from .assembly import assemble_jump, assemble_load, assemble_mass, assemble_stiffness, l2_project, quadrature_rule
from .estimator import UniqueContinuationRegressor
from .mesh import Mesh, Region, build_uniform_mesh, classify_elements, interior_face_normal
from .problems import Perturbation, ProblemCase, gaussian_bump, hadamard, perturb, wkb_leading
from .solver import StabilizationParams, apply_G, build_system, solve

__all__ = [
    "ConvergenceReport",
    "ErrorReport",
    "Mesh",
    "Perturbation",
    "ProblemCase",
    "Region",
    "StabilizationParams",
    "StudyConfig",
    "UniqueContinuationRegressor",
    "apply_G",
    "assemble_jump",
    "assemble_load",
    "assemble_mass",
    "assemble_stiffness",
    "build_system",
    "build_uniform_mesh",
    "classify_elements",
    "error_norms",
    "fit_rate",
    "gaussian_bump",
    "hadamard",
    "interior_face_normal",
    "l2_project",
    "perturb",
    "quadrature_rule",
    "run_convergence_study",
    "solve",
    "star_norm",
    "wkb_leading",
]
