"""Explicit lumped-mass P1 finite elements for the 2D electric-field Maxwell
system with variable permittivity, plus a manufactured-solution
convergence harness."""

from .mesh import ElementGeometry, Mesh, build_structured_mesh, element_geometry
from .permittivity import (
    BumpPermittivity,
    CoefficientDiagnostics,
    ConstantPermittivity,
    FunctionCoefficient,
    compute_diagnostics,
)
from .manufactured import ExactSolution, ManufacturedSource, fd_oracle_f
from .assembly import (
    DofMap,
    LumpedMass,
    apply_dirichlet,
    assemble_div_div,
    assemble_load,
    assemble_lumped_mass,
    assemble_operator,
    assemble_stiffness,
)
from .timestepper import (
    BlowUpError,
    FieldState,
    TimeGrid,
    check_cfl,
    initialize,
    run,
    step,
)
from .error_norms import ErrorAccumulator, ErrorReport, finalize

__version__ = "0.1.0"

__all__ = [
    "BlowUpError",
    "BumpPermittivity",
    "CoefficientDiagnostics",
    "ConstantPermittivity",
    "DofMap",
    "ElementGeometry",
    "ErrorAccumulator",
    "ErrorReport",
    "ExactSolution",
    "FieldState",
    "FunctionCoefficient",
    "LumpedMass",
    "ManufacturedSource",
    "Mesh",
    "TimeGrid",
    "apply_dirichlet",
    "assemble_div_div",
    "assemble_load",
    "assemble_lumped_mass",
    "assemble_operator",
    "assemble_stiffness",
    "build_structured_mesh",
    "check_cfl",
    "compute_diagnostics",
    "element_geometry",
    "fd_oracle_f",
    "finalize",
    "initialize",
    "run",
    "step",
]
