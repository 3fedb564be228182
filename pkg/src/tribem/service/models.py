"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field, model_validator

Vec3 = tuple[float, float, float]


class Material(BaseModel):
    E: float = Field(gt=0, description="Elastic modulus (force/area)")
    nu: float = Field(gt=0, lt=0.5, description="Poisson ratio")


class BarMesh(BaseModel):
    """Built-in rectangular prism generator input."""

    width: float = Field(gt=0)
    height: float = Field(gt=0)
    length: float = Field(gt=0)
    resolution: Literal["coarse", "medium", "high"] = "medium"


class MeshInput(BaseModel):
    """Exactly one of an inline ASCII STL or a bar generator spec."""

    stl_text: str | None = None
    bar: BarMesh | None = None

    @model_validator(mode="after")
    def _exactly_one(self):
        if (self.stl_text is None) == (self.bar is None):
            raise ValueError("provide exactly one of stl_text or bar")
        return self


class PlanarRule(BaseModel):
    """Boundary condition for elements whose vertices all lie on axis=value."""

    axis: Literal["x", "y", "z"]
    value: float
    kind: Literal["displacement", "traction"]
    vector: Vec3
    tolerance: float | None = Field(
        default=None, description="match tolerance; default 1e-6 x mesh diameter"
    )


class BoundarySpec(BaseModel):
    """BC file text and/or planar rules; rules imply a default payload."""

    file_text: str | None = None
    rules: list[PlanarRule] = []
    default_kind: Literal["displacement", "traction"] = "traction"
    default_vector: Vec3 = (0.0, 0.0, 0.0)


class SolveRequest(BaseModel):
    mesh: MeshInput
    material: Material
    boundary: BoundarySpec
    interior_points: list[Vec3] = []
    workers: int = Field(default=1, ge=1, le=64)
    diagnostic: bool = True


class ElementResult(BaseModel):
    index: int
    solved_kind: Literal["displacement", "traction"]
    solved: Vec3
    prescribed_kind: Literal["displacement", "traction"]
    prescribed: Vec3


class DiagnosticSummary(BaseModel):
    max_norm: float
    mean_norm: float


class RunReport(BaseModel):
    element_count: int
    residual_norm: float
    condition_estimate: float | None
    assembly_seconds: float
    solve_seconds: float
    diagnostic: DiagnosticSummary | None = None


class InteriorResult(BaseModel):
    point: Vec3
    displacement: Vec3


class SolveResponse(BaseModel):
    elements: list[ElementResult]
    unknowns: list[float]
    report: RunReport
    interior: list[InteriorResult] = []


class MeshSummary(BaseModel):
    element_count: int
    total_area: float
    signed_volume: float
    watertight: bool
    diameter: float


class HealthResponse(BaseModel):
    status: str
    version: str
