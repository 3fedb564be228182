"""End-to-end solve pipeline and plain-text output formatting.

This is the engine behind both the HTTP service and the CLI: build a job
from in-memory inputs, run assembly / solve / post-processing, and render
the three output artifacts (results table, flat unknowns, run report).

The formatters work on plain lists and dicts rather than solver objects so
the CLI can reuse them verbatim on JSON payloads received from a remote
service; floats survive the JSON round trip exactly, which keeps repeated
runs byte-identical.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .assembly import (
    BCKind,
    BoundaryCondition,
    RigidBodyDiagnostic,
    SolutionField,
    assemble_system,
    extract_solution,
    rigid_body_diagnostic,
)
from .bcs import PlanarPredicate, merge_bcs, parse_bc_file, tag_elements
from .errors import BoundaryConditionError
from .geometry import Mesh
from .kernels import MaterialConstants
from .solver import SolveReport, evaluate_interior, solve_dense


@dataclass
class SolveJob:
    """Everything a solve needs, already in memory."""

    mesh: Mesh
    bcs: list[BoundaryCondition]
    material: MaterialConstants
    interior_points: np.ndarray | None = None  # (P, 3)
    workers: int = 1
    with_diagnostic: bool = True


@dataclass
class SolveOutcome:
    field: SolutionField
    raw_solution: np.ndarray
    report: SolveReport
    diagnostic: RigidBodyDiagnostic | None
    interior_displacements: list[np.ndarray] = field(default_factory=list)
    assembly_seconds: float = 0.0


def build_boundary_conditions(
    mesh: Mesh,
    file_text: str | None = None,
    predicates: list[PlanarPredicate] | None = None,
    default_kind=None,
    default_value=(0.0, 0.0, 0.0),
) -> list[BoundaryCondition]:
    """Combine a BC file and/or planar rules into a full element cover.

    Rules (when given) build a complete cover with the default payload for
    unmatched elements; explicit file entries then override per element.  A
    file on its own must cover every element.
    """
    if default_kind is None:
        default_kind = BCKind.TRACTION
    explicit = (
        parse_bc_file(file_text, element_count=len(mesh)) if file_text is not None else []
    )
    if predicates:
        base = tag_elements(mesh, predicates, default_kind, default_value)
        return merge_bcs(base, explicit)
    if not explicit:
        raise BoundaryConditionError(
            "no boundary conditions given (need a BC file and/or planar rules)"
        )
    return explicit


def run_job(job: SolveJob) -> SolveOutcome:
    """Assemble, solve, and post-process one configured problem."""
    t0 = time.perf_counter()
    system = assemble_system(job.mesh, job.bcs, job.material, workers=job.workers)
    assembly_seconds = time.perf_counter() - t0

    raw, report = solve_dense(system)
    resolved = extract_solution(system, raw, job.bcs)

    diagnostic = None
    if job.with_diagnostic:
        diagnostic = rigid_body_diagnostic(job.mesh, job.material, workers=job.workers)

    interior = []
    if job.interior_points is not None:
        for point in np.atleast_2d(np.asarray(job.interior_points, dtype=np.float64)):
            interior.append(evaluate_interior(point, job.mesh, resolved, job.material))

    return SolveOutcome(
        field=resolved,
        raw_solution=raw,
        report=report,
        diagnostic=diagnostic,
        interior_displacements=interior,
        assembly_seconds=assembly_seconds,
    )


def element_rows(field: SolutionField) -> list[dict]:
    """Per-element result records in element order (plain types only)."""
    rows = []
    for e in range(len(field.bc_is_traction)):
        index = e + 1
        solved_kind = field.solved_kind(index).value
        prescribed_kind = field.prescribed_kind(index).value
        if field.bc_is_traction[e]:
            solved = field.displacements[e]
            prescribed = field.tractions[e]
        else:
            solved = field.tractions[e]
            prescribed = field.displacements[e]
        rows.append(
            {
                "index": index,
                "solved_kind": solved_kind,
                "solved": [float(x) for x in solved],
                "prescribed_kind": prescribed_kind,
                "prescribed": [float(x) for x in prescribed],
            }
        )
    return rows


def format_results_csv(rows: list[dict]) -> str:
    """One line per element: index, solved triple, prescribed triple."""
    lines = ["# element,solved_kind,sx,sy,sz,prescribed_kind,px,py,pz"]
    for row in rows:
        s = row["solved"]
        p = row["prescribed"]
        lines.append(
            f"{row['index']},{row['solved_kind']},"
            f"{s[0]:.17g},{s[1]:.17g},{s[2]:.17g},"
            f"{row['prescribed_kind']},{p[0]:.17g},{p[1]:.17g},{p[2]:.17g}"
        )
    return "\n".join(lines) + "\n"


def format_unknowns(values) -> str:
    """Flat solution vector, one value per line, element-major x,y,z order."""
    return "\n".join(f"{float(v):.17g}" for v in values) + "\n"


def format_report(summary: dict) -> str:
    """Human-readable run report (6 significant digits)."""
    lines = [
        "tribem run report",
        "-----------------",
        f"elements:              {summary['element_count']}",
        f"system size:           {3 * summary['element_count']}",
        f"relative residual:     {summary['residual_norm']:.6g}",
    ]
    cond = summary.get("condition_estimate")
    lines.append(
        f"condition estimate:    {cond:.6g}" if cond is not None else "condition estimate:    unavailable"
    )
    diag = summary.get("diagnostic")
    if diag is not None:
        lines.append(f"rigid-body dev (max):  {diag['max_norm']:.6g}")
        lines.append(f"rigid-body dev (mean): {diag['mean_norm']:.6g}")
    lines.append(f"assembly time:         {summary['assembly_seconds']:.6g} s")
    lines.append(f"solve time:            {summary['solve_seconds']:.6g} s")
    interior = summary.get("interior") or []
    if interior:
        lines.append("interior displacements:")
        for item in interior:
            p = item["point"]
            d = item["displacement"]
            lines.append(
                f"  ({p[0]:.6g}, {p[1]:.6g}, {p[2]:.6g}) -> "
                f"({d[0]:.6g}, {d[1]:.6g}, {d[2]:.6g})"
            )
    return "\n".join(lines) + "\n"
