"""Triangulated surface geometry: STL ingestion, per-element quantities.

Every element carries three ordered vertices whose winding points the unit
normal out of the solid, the surface Jacobian (twice the triangle area,
computed by Heron's formula), and the interior collocation point at
parametric coordinates (u, v) = (1/4, 1/2).

The parametric-to-Cartesian mapping deliberately follows the plane-projection
branch construction (selected by which normal component dominates at the
1/sqrt(3) threshold) rather than the plain affine map; the two agree for
in-plane points and the affine map is used as the independent oracle in the
test suite.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateElementError, StlParseError

# |n_z| (then |n_y|) at or above this picks the projection branch.
_BRANCH_THRESHOLD = 1.0 / np.sqrt(3.0)

# An element is degenerate when jacobian < this factor times diameter^2.
_DEGENERACY_FACTOR = 1e-14

_BAR_RESOLUTIONS = ("coarse", "medium", "high")


def as_vec3(value) -> np.ndarray:
    """Coerce to a float64 array of shape (3,)."""
    arr = np.asarray(value, dtype=np.float64)
    if arr.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {arr.shape}")
    return arr


def _cross_and_norm(a: np.ndarray, b: np.ndarray, c: np.ndarray):
    cx = (b[1] - a[1]) * (c[2] - a[2]) - (b[2] - a[2]) * (c[1] - a[1])
    cy = (b[2] - a[2]) * (c[0] - a[0]) - (b[0] - a[0]) * (c[2] - a[2])
    cz = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    d = np.sqrt(cx * cx + cy * cy + cz * cz)
    return np.array([cx, cy, cz]), d


def unit_normal(a, b, c) -> np.ndarray:
    """Outward unit normal of the (a, b, c) winding.

    Components are the vertex-difference cross products divided by their
    joint magnitude d; collinear vertices (d = 0) are rejected.
    """
    a, b, c = as_vec3(a), as_vec3(b), as_vec3(c)
    cross, d = _cross_and_norm(a, b, c)
    if d == 0.0:
        raise DegenerateElementError("collinear vertices: normal is undefined")
    return cross / d


def jacobian(a, b, c) -> float:
    """Surface Jacobian: twice the triangle area via Heron's formula.

    The radicand is clamped at zero against floating-point noise on
    near-degenerate triangles; a result below the degeneracy threshold
    (relative to the squared longest edge) raises.
    """
    a, b, c = as_vec3(a), as_vec3(b), as_vec3(c)
    alpha = float(np.linalg.norm(a - b))
    beta = float(np.linalg.norm(b - c))
    gamma = float(np.linalg.norm(c - a))
    sigma = 0.5 * (alpha + beta + gamma)
    radicand = sigma * (sigma - alpha) * (sigma - beta) * (sigma - gamma)
    value = 2.0 * np.sqrt(max(radicand, 0.0))
    diameter = max(alpha, beta, gamma)
    if value < _DEGENERACY_FACTOR * diameter * diameter:
        raise DegenerateElementError(
            f"degenerate triangle: jacobian {value:.3e} below threshold "
            f"for diameter {diameter:.3e}"
        )
    return value


def _project_params(a, b, c, normal, u, v) -> np.ndarray:
    """Map parametric (u, v) on the unit triangle to Cartesian points.

    Vectorized over leading axes of all inputs (vertices/normal shaped
    (..., 3), u and v broadcastable to (...)).  Two coordinates come from
    the affine map; the third is recovered from the plane equation, with
    the eliminated axis chosen by the dominant normal component.
    """
    u = np.asarray(u, dtype=np.float64)[..., None]
    v = np.asarray(v, dtype=np.float64)[..., None]
    affine = a + (b - a) * u + (c - a) * v

    nx, ny, nz = normal[..., 0], normal[..., 1], normal[..., 2]
    use_z = np.abs(nz) >= _BRANCH_THRESHOLD
    use_y = ~use_z & (np.abs(ny) >= _BRANCH_THRESHOLD)
    use_x = ~use_z & ~use_y

    # Unselected branches may divide by ~0; mask the divisor first.
    safe_nz = np.where(use_z, nz, 1.0)
    safe_ny = np.where(use_y, ny, 1.0)
    safe_nx = np.where(use_x, nx, 1.0)

    dx = affine[..., 0] - a[..., 0]
    dy = affine[..., 1] - a[..., 1]
    dz = affine[..., 2] - a[..., 2]

    z_from_plane = a[..., 2] - (nx * dx + ny * dy) / safe_nz
    y_from_plane = a[..., 1] - (nx * dx + nz * dz) / safe_ny
    x_from_plane = a[..., 0] - (ny * dy + nz * dz) / safe_nx

    out = affine.copy()
    out[..., 2] = np.where(use_z, z_from_plane, out[..., 2])
    out[..., 1] = np.where(use_y, y_from_plane, out[..., 1])
    out[..., 0] = np.where(use_x, x_from_plane, out[..., 0])
    return out


@dataclass(frozen=True)
class TriangleElement:
    """One constant boundary element: ordered vertices plus cached geometry."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    normal: np.ndarray
    jacobian: float
    collocation: np.ndarray

    @classmethod
    def from_vertices(cls, a, b, c) -> "TriangleElement":
        a, b, c = as_vec3(a), as_vec3(b), as_vec3(c)
        if not (np.isfinite(a).all() and np.isfinite(b).all() and np.isfinite(c).all()):
            raise DegenerateElementError("non-finite vertex coordinate")
        jac = jacobian(a, b, c)
        normal = unit_normal(a, b, c)
        collocation = _project_params(a, b, c, normal, 0.25, 0.5)
        for arr in (a, b, c, normal, collocation):
            arr.setflags(write=False)
        return cls(a=a, b=b, c=c, normal=normal, jacobian=jac, collocation=collocation)

    @property
    def vertices(self) -> np.ndarray:
        return np.stack([self.a, self.b, self.c])

    @property
    def diameter(self) -> float:
        return float(
            max(
                np.linalg.norm(self.b - self.a),
                np.linalg.norm(self.c - self.b),
                np.linalg.norm(self.a - self.c),
            )
        )


def map_param_to_point(elem: TriangleElement, u: float, v: float) -> np.ndarray:
    """Cartesian point for parametric (u, v) on the element's unit triangle."""
    return _project_params(elem.a, elem.b, elem.c, elem.normal, u, v)


def collocation_point(elem: TriangleElement) -> np.ndarray:
    """The element's interior collocation point, (u, v) = (1/4, 1/2)."""
    return map_param_to_point(elem, 0.25, 0.5)


class Mesh:
    """Ordered collection of triangle elements (1-based in external files).

    Immutable after construction; the stacked per-element arrays are shared,
    read-only views used by assembly.
    """

    def __init__(self, elements):
        elements = tuple(elements)
        if len(elements) < 1:
            raise StlParseError("mesh contains no facets")
        self.elements = elements
        self.vertices = np.stack([e.vertices for e in elements])  # (T, 3, 3)
        self.normals = np.stack([e.normal for e in elements])  # (T, 3)
        self.jacobians = np.array([e.jacobian for e in elements])  # (T,)
        self.collocations = np.stack([e.collocation for e in elements])  # (T, 3)
        for arr in (self.vertices, self.normals, self.jacobians, self.collocations):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @property
    def diameter(self) -> float:
        """Bounding-box diagonal; the length scale for tolerances."""
        pts = self.vertices.reshape(-1, 3)
        return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))

    def param_points(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Mapped points for all elements at each (u_k, v_k); shape (T, K, 3)."""
        return _project_params(
            self.vertices[:, None, 0, :],
            self.vertices[:, None, 1, :],
            self.vertices[:, None, 2, :],
            self.normals[:, None, :],
            u[None, :],
            v[None, :],
        )


def signed_volume(mesh: Mesh) -> float:
    """Volume enclosed by a closed outward-oriented mesh (divergence theorem).

    Positive when facet winding points outward; meaningless for open meshes.
    """
    a = mesh.vertices[:, 0, :]
    b = mesh.vertices[:, 1, :]
    c = mesh.vertices[:, 2, :]
    dets = np.einsum("ij,ij->i", a, np.cross(b, c))
    return float(dets.sum() / 6.0)


def edge_use_counts(mesh: Mesh) -> Counter:
    """Count how many facets use each undirected edge (keyed by coordinates)."""
    counts: Counter = Counter()
    for elem in mesh:
        keys = [tuple(elem.a), tuple(elem.b), tuple(elem.c)]
        for i in range(3):
            edge = frozenset((keys[i], keys[(i + 1) % 3]))
            counts[edge] += 1
    return counts


def is_watertight(mesh: Mesh) -> bool:
    """True when every edge is shared by exactly two facets."""
    return all(n == 2 for n in edge_use_counts(mesh).values())


# --------------------------------------------------------------------------
# ASCII STL
# --------------------------------------------------------------------------


def parse_stl(text: str) -> Mesh:
    """Parse an ASCII STL stream into a Mesh.

    Facet order in the file defines element order; the file's own winding is
    trusted as outward and the stored facet normals are ignored (normals are
    recomputed from the winding).  Scientific notation such as 2.000000e+000
    parses as a plain float.
    """
    if "\x00" in text:
        raise StlParseError("input contains NUL bytes; binary STL is not supported")

    lines = text.splitlines()
    pos = 0

    def next_line():
        nonlocal pos
        while pos < len(lines):
            pos += 1
            stripped = lines[pos - 1].strip()
            if stripped:
                return stripped, pos
        return None, pos

    def expect(line, lineno, *keywords):
        tokens = line.split()
        if [t.lower() for t in tokens[: len(keywords)]] != list(keywords):
            raise StlParseError(
                f"expected '{' '.join(keywords)}', got {line!r}", line=lineno
            )
        return tokens[len(keywords) :]

    def floats(tokens, lineno, count):
        if len(tokens) != count:
            raise StlParseError(
                f"expected {count} numeric fields, got {len(tokens)}", line=lineno
            )
        try:
            return [float(t) for t in tokens]
        except ValueError as exc:
            raise StlParseError(f"bad numeric token: {exc}", line=lineno) from None

    line, lineno = next_line()
    if line is None:
        raise StlParseError("empty input", line=lineno)
    if not line.lower().startswith("solid"):
        raise StlParseError(
            "input does not start with 'solid'; not an ASCII STL", line=lineno
        )

    elements = []
    while True:
        line, lineno = next_line()
        if line is None:
            raise StlParseError("unexpected end of input inside solid", line=lineno)
        lowered = line.lower()
        if lowered.startswith("endsolid"):
            break
        rest = expect(line, lineno, "facet", "normal")
        floats(rest, lineno, 3)  # stored normal is ignored; recomputed from winding

        line, lineno = next_line()
        if line is None:
            raise StlParseError("truncated facet: missing 'outer loop'", line=lineno)
        expect(line, lineno, "outer", "loop")

        verts = []
        for _ in range(3):
            line, lineno = next_line()
            if line is None:
                raise StlParseError("truncated facet: missing vertex", line=lineno)
            rest = expect(line, lineno, "vertex")
            verts.append(floats(rest, lineno, 3))

        line, lineno = next_line()
        if line is None:
            raise StlParseError("truncated facet: missing 'endloop'", line=lineno)
        expect(line, lineno, "endloop")
        line, lineno = next_line()
        if line is None:
            raise StlParseError("truncated facet: missing 'endfacet'", line=lineno)
        expect(line, lineno, "endfacet")

        try:
            elements.append(TriangleElement.from_vertices(*verts))
        except DegenerateElementError as exc:
            raise DegenerateElementError(f"facet {len(elements) + 1}: {exc}") from exc

    line, lineno = next_line()
    if line is not None:
        raise StlParseError(f"unexpected content after endsolid: {line!r}", line=lineno)
    if not elements:
        raise StlParseError("solid contains no facets")
    return Mesh(elements)


def load_stl(path) -> Mesh:
    """Read an STL file, rejecting binary payloads before text parsing."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if b"\x00" in raw:
        raise StlParseError("binary STL is not supported (NUL bytes found)")
    try:
        text = raw.decode("ascii")
    except UnicodeDecodeError as exc:
        raise StlParseError(f"not an ASCII file: {exc}") from None
    return parse_stl(text)


def write_stl(mesh: Mesh, name: str = "tribem") -> str:
    """Serialize a mesh back to ASCII STL with recomputed facet normals."""
    out = [f"solid {name}"]
    for elem in mesh:
        n = elem.normal
        out.append(f"  facet normal {n[0]:.6e} {n[1]:.6e} {n[2]:.6e}")
        out.append("    outer loop")
        for v in (elem.a, elem.b, elem.c):
            out.append(f"      vertex {v[0]:.6e} {v[1]:.6e} {v[2]:.6e}")
        out.append("    endloop")
        out.append("  endfacet")
    out.append(f"endsolid {name}")
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# Built-in bar generator
# --------------------------------------------------------------------------


def _grid_face(origin, e1, e2, p, q, out):
    """Append the 2*p*q triangles of one rectangular face.

    Winding is chosen so normals follow e1 x e2; callers pick (e1, e2) so
    that direction points out of the solid.
    """
    origin = np.asarray(origin, dtype=np.float64)
    e1 = np.asarray(e1, dtype=np.float64)
    e2 = np.asarray(e2, dtype=np.float64)

    def g(i, j):
        return origin + e1 * (i / p) + e2 * (j / q)

    for i in range(p):
        for j in range(q):
            p00, p10 = g(i, j), g(i + 1, j)
            p01, p11 = g(i, j + 1), g(i + 1, j + 1)
            out.append(TriangleElement.from_vertices(p00, p10, p11))
            out.append(TriangleElement.from_vertices(p00, p11, p01))


def bar_grid_spec(resolution: str) -> tuple[int, int, float]:
    """(cross-section divisions n, axial cells nz, end-grading strength).

    Facet totals are 8*n*nz + 8*n for the fan-capped presets: 176 for
    medium, 416 for high (approximating the 172/428-element meshes of the
    reference benchmark); coarse is the minimal 12-facet box.  The grading
    packs small cells near both end faces, where the fixed/loaded boundary
    layers dominate the quadrature error of the fixed 16-point rule.
    """
    if resolution == "coarse":
        return 1, 1, 1.0
    if resolution == "medium":
        return 1, 21, 2.0
    if resolution == "high":
        return 2, 25, 1.5
    raise ValueError(
        f"unknown resolution {resolution!r}; expected one of {_BAR_RESOLUTIONS}"
    )


def _axial_levels(nz: int, grading: float, length: float) -> np.ndarray:
    """nz+1 z-levels on [0, length]; tanh stretching refines both ends."""
    if grading == 1.0 or nz == 1:
        return np.linspace(0.0, length, nz + 1)
    s = np.linspace(0.0, 1.0, nz + 1)
    return length * 0.5 * (1.0 + np.tanh(grading * (2.0 * s - 1.0)) / np.tanh(grading))


def _cap_rim(n: int, w: float, h: float, z: float) -> list[np.ndarray]:
    """The 4n cross-section rim points at height z, counterclockwise in xy."""
    pts = []
    for i in range(n):
        pts.append(np.array([i * w / n, 0.0, z]))
    for i in range(n):
        pts.append(np.array([w, i * h / n, z]))
    for i in range(n):
        pts.append(np.array([w - i * w / n, h, z]))
    for i in range(n):
        pts.append(np.array([0.0, h - i * h / n, z]))
    return pts


def generate_bar_mesh(cross_section, length: float, resolution: str = "medium") -> Mesh:
    """Closed, outward-oriented triangulated prism along z.

    One face lies in z = 0 (the fixed face in the benchmark), one in
    z = length (the loaded face, emitted last).  Side faces are structured
    grids with end-graded axial cells; end caps are fans around the face
    center, which keeps every rim edge shared with a side facet, so the
    mesh is watertight by construction.  The coarse preset is the plain
    twelve-facet box.
    """
    w, h = float(cross_section[0]), float(cross_section[1])
    length = float(length)
    if w <= 0 or h <= 0 or length <= 0:
        raise ValueError("bar dimensions must be positive")
    n, nz, grading = bar_grid_spec(resolution)

    elements: list[TriangleElement] = []
    if resolution == "coarse":
        _grid_face((0, 0, 0), (0, 0, length), (0, h, 0), 1, 1, elements)  # x = 0
        _grid_face((w, 0, 0), (0, h, 0), (0, 0, length), 1, 1, elements)  # x = w
        _grid_face((0, 0, 0), (w, 0, 0), (0, 0, length), 1, 1, elements)  # y = 0
        _grid_face((0, h, 0), (0, 0, length), (w, 0, 0), 1, 1, elements)  # y = h
        _grid_face((0, 0, 0), (0, h, 0), (w, 0, 0), 1, 1, elements)  # z = 0
        _grid_face((0, 0, length), (w, 0, 0), (0, h, 0), 1, 1, elements)  # z = len
        return Mesh(elements)

    levels = _axial_levels(nz, grading, length)
    ez = np.array([0.0, 0.0, 1.0])

    def side(origin, transverse):
        origin = np.asarray(origin, dtype=np.float64)
        transverse = np.asarray(transverse, dtype=np.float64)
        for i in range(n):
            t0, t1 = i / n, (i + 1) / n
            for j in range(nz):
                z0, z1 = levels[j], levels[j + 1]
                p00 = origin + transverse * t0 + ez * z0
                p10 = origin + transverse * t1 + ez * z0
                p01 = origin + transverse * t0 + ez * z1
                p11 = origin + transverse * t1 + ez * z1
                elements.append(TriangleElement.from_vertices(p00, p10, p11))
                elements.append(TriangleElement.from_vertices(p00, p11, p01))

    # Four sides walked counterclockwise, then the z=0 cap, then z=length.
    side((0, 0, 0), (w, 0, 0))  # y = 0
    side((w, 0, 0), (0, h, 0))  # x = w
    side((w, h, 0), (-w, 0, 0))  # y = h
    side((0, h, 0), (0, -h, 0))  # x = 0
    for z, outward_up in ((0.0, False), (length, True)):
        rim = _cap_rim(n, w, h, z)
        center = np.array([w / 2.0, h / 2.0, z])
        for k in range(len(rim)):
            a, b = rim[k], rim[(k + 1) % len(rim)]
            if outward_up:
                elements.append(TriangleElement.from_vertices(center, a, b))
            else:
                elements.append(TriangleElement.from_vertices(center, b, a))
    return Mesh(elements)
