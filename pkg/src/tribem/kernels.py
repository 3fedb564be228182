"""Kelvin fundamental solutions for 3D isotropic linear elastostatics.

U maps a unit point load to displacements (decays as 1/r); T maps it to
surface tractions on a plane with a given unit normal (decays as 1/r^2).
Both are evaluated from the expanded component formulas in terms of r, its
Cartesian direction cosines, and cos(theta) = r_hat . n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, KernelSingularityError

# Below this separation the kernels are treated as singular; reaching it is
# a caller bug (quadrature nodes never coincide with collocation points).
_R_MIN = 1e-30


@dataclass(frozen=True)
class MaterialConstants:
    """Elastic modulus, Poisson ratio, and the derived kernel constants."""

    E: float
    nu: float
    G: float
    C: float
    C1: float
    C2: float
    C3: float
    n: int = 2  # radial power of the traction kernel; fixed in 3D


def material_constants(E: float, nu: float) -> MaterialConstants:
    """Derive G, C, C1, C2, C3 from the modulus and Poisson ratio.

    nu = 0.5 (incompressible) makes C and C2 singular and is rejected
    together with everything outside (0, 0.5).
    """
    E = float(E)
    nu = float(nu)
    if not (E > 0.0):
        raise ConfigError(f"elastic modulus must be positive, got {E}")
    if not (0.0 < nu < 0.5):
        raise ConfigError(f"Poisson ratio must lie in (0, 0.5), got {nu}")
    G = E / (2.0 * (1.0 + nu))
    return MaterialConstants(
        E=E,
        nu=nu,
        G=G,
        C=1.0 / (16.0 * np.pi * G * (1.0 - nu)),
        C1=3.0 - 4.0 * nu,
        C2=1.0 / (8.0 * np.pi * (1.0 - nu)),
        C3=1.0 - 2.0 * nu,
    )


@dataclass(frozen=True)
class KernelPair:
    """Displacement (U) and traction (T) kernel matrices at one point pair."""

    U: np.ndarray
    T: np.ndarray


def kelvin_matrices(source, field, field_normal, mat: MaterialConstants):
    """Vectorized U and T kernel evaluation.

    `source`, `field`, `field_normal` broadcast over leading axes (each
    shaped (..., 3)); returns two arrays shaped (..., 3, 3).  U is exactly
    symmetric by construction (off-diagonal entries share one computed
    value).  Raises if any point pair is closer than the singularity guard.
    """
    source = np.asarray(source, dtype=np.float64)
    field = np.asarray(field, dtype=np.float64)
    normal = np.asarray(field_normal, dtype=np.float64)

    d = field - source
    r = np.sqrt(np.einsum("...i,...i->...", d, d))
    if np.any(r < _R_MIN):
        raise KernelSingularityError(
            "kernel evaluated at coincident source and field points"
        )
    rd = d / r[..., None]
    rdx, rdy, rdz = rd[..., 0], rd[..., 1], rd[..., 2]
    nx = np.broadcast_to(normal[..., 0], r.shape)
    ny = np.broadcast_to(normal[..., 1], r.shape)
    nz = np.broadcast_to(normal[..., 2], r.shape)
    cos_theta = rdx * nx + rdy * ny + rdz * nz

    c_over_r = mat.C / r
    u_xy = c_over_r * rdx * rdy
    u_yz = c_over_r * rdy * rdz
    u_zx = c_over_r * rdz * rdx

    U = np.empty(r.shape + (3, 3))
    U[..., 0, 0] = c_over_r * (mat.C1 + rdx * rdx)
    U[..., 1, 1] = c_over_r * (mat.C1 + rdy * rdy)
    U[..., 2, 2] = c_over_r * (mat.C1 + rdz * rdz)
    U[..., 0, 1] = u_xy
    U[..., 1, 0] = u_xy
    U[..., 1, 2] = u_yz
    U[..., 2, 1] = u_yz
    U[..., 2, 0] = u_zx
    U[..., 0, 2] = u_zx

    m = -mat.C2 / (r * r)
    c3 = mat.C3
    T = np.empty(r.shape + (3, 3))
    T[..., 0, 0] = m * (c3 + 3.0 * rdx * rdx) * cos_theta
    T[..., 1, 1] = m * (c3 + 3.0 * rdy * rdy) * cos_theta
    T[..., 2, 2] = m * (c3 + 3.0 * rdz * rdz) * cos_theta
    T[..., 0, 1] = m * (3.0 * rdx * rdy * cos_theta - c3 * (ny * rdx - nx * rdy))
    T[..., 1, 0] = m * (3.0 * rdy * rdx * cos_theta - c3 * (nx * rdy - ny * rdx))
    T[..., 1, 2] = m * (3.0 * rdy * rdz * cos_theta - c3 * (nz * rdy - ny * rdz))
    T[..., 2, 1] = m * (3.0 * rdz * rdy * cos_theta - c3 * (ny * rdz - nz * rdy))
    T[..., 2, 0] = m * (3.0 * rdz * rdx * cos_theta - c3 * (nx * rdz - nz * rdx))
    T[..., 0, 2] = m * (3.0 * rdx * rdz * cos_theta - c3 * (nz * rdx - nx * rdz))
    return U, T


def kernel_eval(source, field, field_normal, mat: MaterialConstants) -> KernelPair:
    """U and T at a single (source, field) pair; normal must be unit length."""
    U, T = kelvin_matrices(
        np.asarray(source, dtype=np.float64),
        np.asarray(field, dtype=np.float64),
        np.asarray(field_normal, dtype=np.float64),
        mat,
    )
    return KernelPair(U=U, T=T)
