"""FastAPI service wrapping the solver pipeline.

Domain errors surface as structured JSON: validation problems (bad mesh,
bad BCs, bad material) map to 400, numerical failures (singular system,
kernel singularity) to 409.  Solves are stateless; every request carries
its full problem description.
"""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..bcs import PlanarPredicate
from ..assembly import BCKind
from ..errors import TriBemError
from ..geometry import (
    Mesh,
    generate_bar_mesh,
    is_watertight,
    parse_stl,
    signed_volume,
)
from ..kernels import material_constants
from ..pipeline import SolveJob, build_boundary_conditions, element_rows, run_job
from .models import (
    DiagnosticSummary,
    ElementResult,
    HealthResponse,
    InteriorResult,
    MeshSummary,
    MeshInput,
    RunReport,
    SolveRequest,
    SolveResponse,
)


def _build_mesh(spec: MeshInput) -> Mesh:
    if spec.stl_text is not None:
        return parse_stl(spec.stl_text)
    bar = spec.bar
    return generate_bar_mesh((bar.width, bar.height), bar.length, bar.resolution)


def _finite_or_none(value: float | None) -> float | None:
    if value is None or not math.isfinite(value):
        return None
    return value


def create_app() -> FastAPI:
    app = FastAPI(
        title="tribem",
        version=__version__,
        description=(
            "3D linear elastostatics with constant triangular boundary elements"
        ),
    )

    @app.exception_handler(TriBemError)
    async def domain_error_handler(request: Request, exc: TriBemError):
        status = 409 if exc.kind == "numerical" else 400
        return JSONResponse(
            status_code=status,
            content={"detail": {"kind": exc.kind, "message": str(exc)}},
        )

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/mesh/inspect", response_model=MeshSummary)
    def inspect_mesh(spec: MeshInput) -> MeshSummary:
        mesh = _build_mesh(spec)
        return MeshSummary(
            element_count=len(mesh),
            total_area=float(mesh.jacobians.sum() / 2.0),
            signed_volume=signed_volume(mesh),
            watertight=is_watertight(mesh),
            diameter=mesh.diameter,
        )

    @app.post("/solve", response_model=SolveResponse)
    def solve(request: SolveRequest) -> SolveResponse:
        mesh = _build_mesh(request.mesh)
        material = material_constants(request.material.E, request.material.nu)
        predicates = [
            PlanarPredicate(
                axis=rule.axis,
                value=rule.value,
                kind=BCKind(rule.kind),
                payload=rule.vector,
                tolerance=rule.tolerance,
            )
            for rule in request.boundary.rules
        ]
        bcs = build_boundary_conditions(
            mesh,
            file_text=request.boundary.file_text,
            predicates=predicates,
            default_kind=BCKind(request.boundary.default_kind),
            default_value=request.boundary.default_vector,
        )
        interior = (
            np.asarray(request.interior_points, dtype=np.float64)
            if request.interior_points
            else None
        )
        outcome = run_job(
            SolveJob(
                mesh=mesh,
                bcs=bcs,
                material=material,
                interior_points=interior,
                workers=request.workers,
                with_diagnostic=request.diagnostic,
            )
        )

        diagnostic = None
        if outcome.diagnostic is not None:
            diagnostic = DiagnosticSummary(
                max_norm=outcome.diagnostic.max_norm,
                mean_norm=outcome.diagnostic.mean_norm,
            )
        return SolveResponse(
            elements=[ElementResult(**row) for row in element_rows(outcome.field)],
            unknowns=[float(v) for v in outcome.raw_solution],
            report=RunReport(
                element_count=len(mesh),
                residual_norm=outcome.report.residual_norm,
                condition_estimate=_finite_or_none(outcome.report.condition_estimate),
                assembly_seconds=outcome.assembly_seconds,
                solve_seconds=outcome.report.elapsed,
                diagnostic=diagnostic,
            ),
            interior=[
                InteriorResult(
                    point=tuple(p), displacement=tuple(float(x) for x in d)
                )
                for p, d in zip(request.interior_points, outcome.interior_displacements)
            ],
        )

    return app


app = create_app()


def serve_main() -> None:
    """Console entry point: run the service under uvicorn."""
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(description="Serve the tribem solver over HTTP")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    args = parser.parse_args()
    uvicorn.run(app, host=args.host, port=args.port)
