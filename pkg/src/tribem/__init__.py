"""tribem: 3D linear elastostatics with constant triangular boundary elements.

Workflow: ingest a closed triangulated surface (ASCII STL or the built-in
bar generator), attach one displacement or traction vector per element,
assemble the dense collocation system from integrated Kelvin kernels, solve
it, and report the complementary boundary quantities plus optional interior
displacements.
"""

__version__ = "0.1.0"

from .assembly import (
    BCKind,
    BoundaryCondition,
    DenseSystem,
    SolutionField,
    assemble_system,
    element_influence,
    extract_solution,
    rigid_body_diagnostic,
)
from .bcs import PlanarPredicate, parse_bc_file, tag_elements
from .errors import (
    BoundaryConditionError,
    ConfigError,
    DegenerateElementError,
    KernelSingularityError,
    SingularSystemError,
    StlParseError,
    TriBemError,
)
from .geometry import (
    Mesh,
    TriangleElement,
    collocation_point,
    generate_bar_mesh,
    is_watertight,
    jacobian,
    load_stl,
    map_param_to_point,
    parse_stl,
    signed_volume,
    unit_normal,
    write_stl,
)
from .kernels import KernelPair, MaterialConstants, kernel_eval, material_constants
from .pipeline import SolveJob, build_boundary_conditions, run_job
from .quadrature import QuadratureRule, integrate_over_element, quadrature_rule
from .solver import SolveReport, evaluate_interior, solve_dense

__all__ = [
    "BCKind",
    "BoundaryCondition",
    "BoundaryConditionError",
    "ConfigError",
    "DegenerateElementError",
    "DenseSystem",
    "KernelPair",
    "KernelSingularityError",
    "MaterialConstants",
    "Mesh",
    "PlanarPredicate",
    "QuadratureRule",
    "SingularSystemError",
    "SolutionField",
    "SolveJob",
    "SolveReport",
    "StlParseError",
    "TriBemError",
    "TriangleElement",
    "assemble_system",
    "build_boundary_conditions",
    "collocation_point",
    "element_influence",
    "evaluate_interior",
    "extract_solution",
    "generate_bar_mesh",
    "integrate_over_element",
    "is_watertight",
    "jacobian",
    "kernel_eval",
    "load_stl",
    "map_param_to_point",
    "material_constants",
    "parse_bc_file",
    "parse_stl",
    "quadrature_rule",
    "rigid_body_diagnostic",
    "run_job",
    "signed_volume",
    "solve_dense",
    "tag_elements",
    "unit_normal",
    "write_stl",
]
