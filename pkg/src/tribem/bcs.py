"""Boundary-condition input: line-oriented BC files and planar tagging rules.

The file grammar is one condition per line, `#` starting a comment:

    <element_index> <D|T> <vx> <vy> <vz>

Planar predicates automate the benchmark workflow of picking elements whose
vertices all lie on a coordinate plane (the fixed and loaded faces);
everything unmatched falls back to a default payload, typically zero
traction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assembly import BCKind, BoundaryCondition
from .errors import BoundaryConditionError
from .geometry import Mesh

_AXES = {"x": 0, "y": 1, "z": 2}

_KIND_LETTERS = {"D": BCKind.DISPLACEMENT, "T": BCKind.TRACTION}


def parse_bc_file(text: str, element_count: int | None = None) -> list[BoundaryCondition]:
    """Parse BC lines; duplicate or out-of-range indices fail with line numbers.

    Range checking needs the mesh size, so it only happens when
    `element_count` is given (the drivers always pass it).
    """
    bcs: list[BoundaryCondition] = []
    seen: dict[int, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 5:
            raise BoundaryConditionError(
                f"expected '<index> <D|T> <vx> <vy> <vz>', got {raw.strip()!r}",
                line=lineno,
            )
        try:
            index = int(fields[0])
        except ValueError:
            raise BoundaryConditionError(
                f"bad element index {fields[0]!r}", line=lineno
            ) from None
        kind = _KIND_LETTERS.get(fields[1])
        if kind is None:
            raise BoundaryConditionError(
                f"unknown BC kind {fields[1]!r} (use D or T)", line=lineno
            )
        try:
            value = [float(f) for f in fields[2:5]]
        except ValueError as exc:
            raise BoundaryConditionError(f"bad numeric value: {exc}", line=lineno) from None
        if index < 1 or (element_count is not None and index > element_count):
            bound = element_count if element_count is not None else "?"
            raise BoundaryConditionError(
                f"element index {index} out of range 1..{bound}", line=lineno
            )
        if index in seen:
            raise BoundaryConditionError(
                f"duplicate condition for element {index} (first on line {seen[index]})",
                line=lineno,
            )
        seen[index] = lineno
        bcs.append(BoundaryCondition(element_index=index, kind=kind, value=value))
    return bcs


@dataclass(frozen=True)
class PlanarPredicate:
    """Tags elements whose three vertices all lie on axis = value.

    `tolerance=None` defaults to 1e-6 times the mesh bounding-box diagonal
    at tagging time.
    """

    axis: str
    value: float
    kind: BCKind
    payload: tuple[float, float, float]
    tolerance: float | None = None

    def match_mask(self, mesh: Mesh) -> np.ndarray:
        if self.axis not in _AXES:
            raise BoundaryConditionError(f"unknown axis {self.axis!r}")
        tol = self.tolerance
        if tol is None:
            tol = 1e-6 * mesh.diameter
        coords = mesh.vertices[:, :, _AXES[self.axis]]  # (T, 3)
        return np.all(np.abs(coords - self.value) <= tol, axis=1)


def tag_elements(
    mesh: Mesh,
    predicates: list[PlanarPredicate],
    default_kind: BCKind = BCKind.TRACTION,
    default_value=(0.0, 0.0, 0.0),
) -> list[BoundaryCondition]:
    """Full BC cover: predicate matches first, the default for the rest.

    An element matching two predicates is ambiguous and rejected.
    """
    count = len(mesh)
    masks = [p.match_mask(mesh) for p in predicates]
    if masks:
        hits = np.sum(masks, axis=0)
        if np.any(hits > 1):
            offenders = (np.flatnonzero(hits > 1) + 1).tolist()
            raise BoundaryConditionError(
                f"elements matched by more than one predicate: {offenders}"
            )
    bcs = []
    for e in range(count):
        for pred, mask in zip(predicates, masks):
            if mask[e]:
                bcs.append(
                    BoundaryCondition(
                        element_index=e + 1, kind=pred.kind, value=pred.payload
                    )
                )
                break
        else:
            bcs.append(
                BoundaryCondition(
                    element_index=e + 1, kind=default_kind, value=default_value
                )
            )
    return bcs


def merge_bcs(
    base: list[BoundaryCondition], overrides: list[BoundaryCondition]
) -> list[BoundaryCondition]:
    """Apply explicit per-element conditions on top of a rule-based cover."""
    merged = {bc.element_index: bc for bc in base}
    for bc in overrides:
        merged[bc.element_index] = bc
    return [merged[idx] for idx in sorted(merged)]
