"""Exception taxonomy for the solver.

Two failure families matter to callers: input/validation problems (bad
meshes, bad boundary conditions, bad config) and numerical failures
(singular kernels or systems).  The CLI maps them to exit codes 1 and 2;
the HTTP service maps them to 400 and 409.
"""


class TriBemError(Exception):
    """Base class for all solver errors."""

    kind = "validation"


class StlParseError(TriBemError):
    """Malformed ASCII STL input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DegenerateElementError(TriBemError):
    """Triangle with (numerically) zero area."""


class BoundaryConditionError(TriBemError):
    """Bad BC file, incomplete/duplicate coverage, or ambiguous tagging."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigError(TriBemError):
    """Invalid run configuration (material domain, mesh spec, paths)."""


class KernelSingularityError(TriBemError):
    """Kernel evaluated at (numerically) coincident source and field points."""

    kind = "numerical"


class SingularSystemError(TriBemError):
    """Exactly singular pivot during factorization.

    Usually means the problem has no displacement constraints (a floating
    structure).
    """

    kind = "numerical"
