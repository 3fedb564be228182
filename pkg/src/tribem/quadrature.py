"""Fixed 16-point quadrature over the unit parameter triangle.

The rule is composite 2x2-point Gauss on the four quadrants of the (t, v)
unit square, pushed onto the triangle through u = t(1 - v); the (1 - v)
factor in the weights is that substitution's Jacobian.  Surface integrals
over an element then read

    integral f dS = (1/16) * sum_k f(x_k) * (1 - v_k) * J

with J the element Jacobian (twice the area).  Constant and linear
integrands are integrated exactly; accuracy degrades near the singular
self-element case, which is evaluated with the same 16 points on purpose
(the collocation point is not a quadrature node, so all evaluations stay
finite).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .geometry import Mesh, TriangleElement, map_param_to_point


class QuadraturePoint(NamedTuple):
    t: float
    v: float
    u: float
    weight: float


@dataclass(frozen=True)
class QuadratureRule:
    """The 16 tabulated (t, v) pairs, derived u = t(1 - v), and weights."""

    t: np.ndarray
    v: np.ndarray
    u: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    def __iter__(self):
        for k in range(len(self.t)):
            yield QuadraturePoint(self.t[k], self.v[k], self.u[k], self.weights[k])


def _build_rule() -> QuadratureRule:
    delta = 1.0 / (4.0 * np.sqrt(3.0))
    quarter, three_quarter = 0.25, 0.75
    # (t_k, v_k) in the tabulated order: t-center cycles 1/4, 3/4, 3/4, 1/4
    # over groups of four; within a group the (+,+), (+,-), (-,+), (-,-)
    # offset pattern repeats; v-center is 1/4 for the first eight points and
    # 3/4 for the rest.
    pairs = []
    for t0, v0 in ((quarter, quarter), (three_quarter, quarter),
                   (three_quarter, three_quarter), (quarter, three_quarter)):
        for st, sv in ((+1, +1), (+1, -1), (-1, +1), (-1, -1)):
            pairs.append((t0 + st * delta, v0 + sv * delta))
    t = np.array([p[0] for p in pairs])
    v = np.array([p[1] for p in pairs])
    u = t * (1.0 - v)
    weights = np.full(16, 1.0 / 16.0)
    for arr in (t, v, u, weights):
        arr.setflags(write=False)
    return QuadratureRule(t=t, v=v, u=u, weights=weights)


_RULE = _build_rule()


def quadrature_rule() -> QuadratureRule:
    """The shared immutable 16-point rule."""
    return _RULE


def integrate_over_element(
    f: Callable[[np.ndarray], np.ndarray | float],
    elem: TriangleElement,
) -> np.ndarray | float:
    """Integrate a point function over the element surface.

    `f` takes a Cartesian point (3,) and returns a scalar or array; the
    result has the same shape.  Summation runs in fixed k = 1..16 order so
    identical inputs give bitwise-identical sums.
    """
    rule = _RULE
    total = None
    for k in range(16):
        point = map_param_to_point(elem, rule.u[k], rule.v[k])
        term = np.asarray(f(point), dtype=np.float64) * (1.0 - rule.v[k])
        total = term if total is None else total + term
    result = total * (elem.jacobian / 16.0)
    return float(result) if result.ndim == 0 else result


def element_quadrature_points(mesh: Mesh) -> np.ndarray:
    """Cartesian quadrature nodes for every element; shape (T, 16, 3)."""
    return mesh.param_points(_RULE.u, _RULE.v)


def quadrature_scales(mesh: Mesh) -> np.ndarray:
    """Per (element, node) weight (1 - v_k) * J / 16; shape (T, 16)."""
    return (1.0 - _RULE.v)[None, :] * (mesh.jacobians[:, None] / 16.0)
