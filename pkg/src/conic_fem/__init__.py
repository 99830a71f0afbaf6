"""Continuous finite elements on planar domains bounded by conic arcs.

Bernstein-Bezier patches on straight and pie-shaped triangles, a locally
supported spline basis vanishing on the boundary, Duffy-type quadrature on
curved triangles and moment-based assembly.
"""

from .assembly import (PdeCoefficients, assemble, element_matrices, element_matrices_direct,
                       error_norms, solve_eigs, solve_poisson)
from .bernstein import BBPatch, Triangle, bb_product, degree_raise, eval_bb, grad_bb, multiply_quadratic
from .conic import QuadraticForm, RationalArc, eval_arc, fit_arc, implicitize, ray_height, subdivide_arc
from .errors import ConicFemError, GeometryError, MeshValidationError, SolverError, UsageError
from .mds import DofTable, build_mds
from .mesh import CurvedTriangulation, TriKind, load_mesh, refine_uniform, validate_conditions
from .quadrature import bb_moments, curved_rule, duffy, rule_1d

__version__ = "0.1.0"

__all__ = [
    "BBPatch", "ConicFemError", "CurvedTriangulation", "DofTable", "GeometryError",
    "MeshValidationError", "PdeCoefficients", "QuadraticForm", "RationalArc", "SolverError",
    "TriKind", "Triangle", "UsageError", "assemble", "bb_moments", "bb_product", "build_mds",
    "curved_rule", "degree_raise", "duffy", "element_matrices", "element_matrices_direct",
    "error_norms", "eval_arc", "eval_bb", "fit_arc", "grad_bb", "implicitize", "load_mesh",
    "multiply_quadratic", "ray_height", "refine_uniform", "rule_1d", "solve_eigs",
    "solve_poisson", "subdivide_arc", "validate_conditions",
]
