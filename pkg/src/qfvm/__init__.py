"""Quadratic vertex-centred finite volume schemes on tetrahedral meshes."""

from .assembly import (
    GlobalSystem,
    assemble,
    element_matrix_closed_form,
    element_matrix_quadrature,
)
from .convergence import (
    CASES,
    ConvergenceReport,
    ManufacturedCase,
    error_norms,
    get_case,
    run_convergence,
)
from .dual import build_dual, reference_dual
from .exceptions import (
    DualConstructionError,
    GeometryError,
    MeshError,
    ParameterError,
    QFVMError,
    SolverError,
    StabilityError,
)
from .geometry import Tet, Theta5, min_v_angle, tet_geometry, theta5
from .mesh import Mesh, audit, generate_structured, perturb, read_mesh, write_mesh
from .scheme import (
    PRESETS,
    SchemeParams,
    lambda_range,
    preset,
    scheme_constants,
    solve_orthogonal,
)
from .solver import SolveReport, solve
from .stability import element_stability, n_tilde, vstar_search

__version__ = "0.1.0"

__all__ = [
    "CASES",
    "ConvergenceReport",
    "DualConstructionError",
    "GeometryError",
    "GlobalSystem",
    "ManufacturedCase",
    "Mesh",
    "MeshError",
    "PRESETS",
    "ParameterError",
    "QFVMError",
    "SchemeParams",
    "SolveReport",
    "SolverError",
    "StabilityError",
    "Tet",
    "Theta5",
    "assemble",
    "audit",
    "build_dual",
    "element_matrix_closed_form",
    "element_matrix_quadrature",
    "element_stability",
    "error_norms",
    "generate_structured",
    "get_case",
    "lambda_range",
    "min_v_angle",
    "n_tilde",
    "perturb",
    "preset",
    "read_mesh",
    "reference_dual",
    "run_convergence",
    "scheme_constants",
    "solve",
    "solve_orthogonal",
    "tet_geometry",
    "theta5",
    "vstar_search",
    "write_mesh",
]
