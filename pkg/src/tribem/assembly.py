"""Dense collocation system assembly.

For collocation point P_e on a smooth boundary the integral identity reads

    (1/2) u(P_e) = sum_m [ Uhat(e,m) t_m - That(e,m) u_m ]

with Uhat/That the 3x3 matrices of kernel integrals over element m.  Each
element prescribes either its displacement triple or its traction triple;
the complementary triple is unknown.  Moving unknowns left and knowns right
yields K U = F with 3x3 blocks:

    column m traction-prescribed (u_m unknown):  K block = That, +0.5 I at e = m
    column m displacement-prescribed (t_m unknown):  K block = -Uhat
    F row e = sum_traction Uhat t_m - sum_displacement That u_m
              - 0.5 u_e when element e prescribes displacement

Row blocks are independent; assembly may fan them out over worker threads
without affecting the result (writes are disjoint and each row's column loop
runs in fixed element order).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import BoundaryConditionError, ConfigError
from .geometry import Mesh, TriangleElement, as_vec3, map_param_to_point
from .kernels import MaterialConstants, kelvin_matrices
from .quadrature import element_quadrature_points, quadrature_rule, quadrature_scales


class BCKind(str, Enum):
    DISPLACEMENT = "displacement"
    TRACTION = "traction"


@dataclass(frozen=True)
class BoundaryCondition:
    """Prescribed displacement or traction vector for one element (1-based)."""

    element_index: int
    kind: BCKind
    value: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "value", as_vec3(self.value))
        if not np.isfinite(self.value).all():
            raise BoundaryConditionError(
                f"element {self.element_index}: non-finite BC value"
            )


@dataclass
class DenseSystem:
    """The 3T x 3T collocation matrix, right-hand side, and unknown layout.

    Row/column block e occupies indices 3(e-1)..3e-1 (0-based), components
    ordered x, y, z.  `bc_is_traction[m]` records element m's prescribed
    kind; the unknown in its slots is the complementary quantity.
    """

    K: np.ndarray
    F: np.ndarray
    bc_is_traction: np.ndarray

    @property
    def size(self) -> int:
        return self.F.shape[0]

    def unknown_kind(self, element_index: int) -> BCKind:
        """What the solver returns in the slots of a 1-based element."""
        if self.bc_is_traction[element_index - 1]:
            return BCKind.DISPLACEMENT
        return BCKind.TRACTION


@dataclass
class SolutionField:
    """Per-element displacement and traction triples after the solve.

    One triple per element came from its boundary condition, the other from
    the solution vector; `bc_is_traction` says which was prescribed.
    """

    displacements: np.ndarray  # (T, 3)
    tractions: np.ndarray  # (T, 3)
    bc_is_traction: np.ndarray  # (T,)

    def solved_kind(self, element_index: int) -> BCKind:
        return (
            BCKind.DISPLACEMENT
            if self.bc_is_traction[element_index - 1]
            else BCKind.TRACTION
        )

    def prescribed_kind(self, element_index: int) -> BCKind:
        return (
            BCKind.TRACTION
            if self.bc_is_traction[element_index - 1]
            else BCKind.DISPLACEMENT
        )


def compile_bcs(mesh: Mesh, bcs) -> tuple[np.ndarray, np.ndarray]:
    """Validate exactly-one-BC-per-element cover; return (is_traction, values)."""
    count = len(mesh)
    seen = np.zeros(count, dtype=bool)
    is_traction = np.zeros(count, dtype=bool)
    values = np.zeros((count, 3))
    for bc in bcs:
        idx = bc.element_index
        if not 1 <= idx <= count:
            raise BoundaryConditionError(
                f"element index {idx} out of range 1..{count}"
            )
        if seen[idx - 1]:
            raise BoundaryConditionError(f"duplicate boundary condition for element {idx}")
        seen[idx - 1] = True
        is_traction[idx - 1] = bc.kind == BCKind.TRACTION
        values[idx - 1] = bc.value
    if not seen.all():
        missing = np.flatnonzero(~seen)[:10] + 1
        raise BoundaryConditionError(
            f"elements without a boundary condition: {missing.tolist()}"
            + ("..." if (~seen).sum() > 10 else "")
        )
    return is_traction, values


def element_influence(
    collocation_of_e, elem_m: TriangleElement, mat: MaterialConstants
) -> tuple[np.ndarray, np.ndarray]:
    """Integrated kernel blocks Uhat, That of one element at one source point."""
    rule = quadrature_rule()
    points = map_param_to_point(elem_m, rule.u, rule.v)  # (16, 3)
    scales = (1.0 - rule.v) * (elem_m.jacobian / 16.0)
    U, T = kelvin_matrices(as_vec3(collocation_of_e), points, elem_m.normal, mat)
    return (
        np.einsum("kij,k->ij", U, scales),
        np.einsum("kij,k->ij", T, scales),
    )


def _influence_row(source, qpoints, normals, scales, mat):
    """Uhat, That of all T elements at one source point; each (T, 3, 3)."""
    U, T = kelvin_matrices(source, qpoints, normals[:, None, :], mat)
    return (
        np.einsum("mkij,mk->mij", U, scales),
        np.einsum("mkij,mk->mij", T, scales),
    )


def _for_each_row(count: int, fill, workers: int) -> None:
    if workers <= 1:
        for e in range(count):
            fill(e)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, range(count)))


def assemble_system(
    mesh: Mesh, bcs, mat: MaterialConstants, workers: int = 1
) -> DenseSystem:
    """Build the dense system K U = F from mesh, BC cover, and material."""
    count = len(mesh)
    if count < 4:
        raise ConfigError(f"need at least 4 elements for a closed surface, got {count}")
    is_traction, values = compile_bcs(mesh, bcs)

    qpoints = element_quadrature_points(mesh)
    scales = quadrature_scales(mesh)
    normals = mesh.normals
    collocations = mesh.collocations
    half_eye = 0.5 * np.eye(3)

    K = np.empty((3 * count, 3 * count))
    F = np.empty(3 * count)

    def fill(e: int) -> None:
        U_hat, T_hat = _influence_row(collocations[e], qpoints, normals, scales, mat)
        col_blocks = np.where(is_traction[:, None, None], T_hat, -U_hat)
        if is_traction[e]:
            col_blocks[e] = col_blocks[e] + half_eye
        K[3 * e : 3 * e + 3, :] = col_blocks.transpose(1, 0, 2).reshape(3, 3 * count)
        rhs_blocks = np.where(is_traction[:, None, None], U_hat, -T_hat)
        row_f = np.einsum("mij,mj->i", rhs_blocks, values)
        if not is_traction[e]:
            row_f = row_f - 0.5 * values[e]
        F[3 * e : 3 * e + 3] = row_f

    _for_each_row(count, fill, workers)
    return DenseSystem(K=K, F=F, bc_is_traction=is_traction)


def extract_solution(system: DenseSystem, raw_solution: np.ndarray, bcs) -> SolutionField:
    """Split the raw unknown vector into per-element displacement/traction triples."""
    raw = np.asarray(raw_solution, dtype=np.float64)
    count = len(system.bc_is_traction)
    if raw.shape != (3 * count,):
        raise ConfigError(
            f"solution length {raw.shape} does not match system size {3 * count}"
        )
    solved = raw.reshape(count, 3)
    values = np.zeros((count, 3))
    for bc in bcs:
        values[bc.element_index - 1] = bc.value
    is_traction = system.bc_is_traction
    displacements = np.where(is_traction[:, None], solved, values)
    tractions = np.where(is_traction[:, None], values, solved)
    return SolutionField(
        displacements=displacements,
        tractions=tractions,
        bc_is_traction=is_traction.copy(),
    )


@dataclass
class RigidBodyDiagnostic:
    """Deviation of each row from the rigid-translation identity.

    D_e = 0.5 I + sum_m That(e,m) vanishes for exactly integrated closed
    surfaces; its size measures the fixed-rule self/near-element integration
    error.
    """

    deviations: np.ndarray  # (T, 3, 3)
    norms: np.ndarray  # (T,) Frobenius
    max_norm: float
    mean_norm: float


def rigid_body_diagnostic(
    mesh: Mesh, mat: MaterialConstants, workers: int = 1
) -> RigidBodyDiagnostic:
    """Compute D_e = 0.5 I + sum_m That(e,m) for every collocation point."""
    count = len(mesh)
    qpoints = element_quadrature_points(mesh)
    scales = quadrature_scales(mesh)
    normals = mesh.normals
    collocations = mesh.collocations
    deviations = np.empty((count, 3, 3))

    def fill(e: int) -> None:
        _, T_hat = _influence_row(collocations[e], qpoints, normals, scales, mat)
        deviations[e] = 0.5 * np.eye(3) + T_hat.sum(axis=0)

    _for_each_row(count, fill, workers)
    norms = np.linalg.norm(deviations, axis=(1, 2))
    return RigidBodyDiagnostic(
        deviations=deviations,
        norms=norms,
        max_norm=float(norms.max()),
        mean_norm=float(norms.mean()),
    )
