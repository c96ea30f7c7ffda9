"""Quadrature engine for surface pair integrals with weakly singular kernels.

Two rules cooperate here:

* Distinct surfaces: plain product rule over both node sets (the kernel is
  smooth between disjoint surfaces).

* Same surface: for each outer node, the inner integral is evaluated in
  polar coordinates centered at that node, where the area element rho d_rho
  cancels the 1/d kernel singularity.  The parameter rectangle is mapped to
  locally isometric coordinates (a metric shear), fanned into four triangles
  from the center, and integrated by Gauss-Legendre in angle and radius.
  For sphere and ellipsoid charts the patch chart's pole is re-seated onto
  the coordinate axis least aligned with the node, so the parametrization is
  uniformly regular around the singularity.

All reductions run over fixed 4096-sample blocks whose partial sums are
combined with math.fsum in index order, so results are bitwise reproducible
for any SHELLBOUND_THREADS setting.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache

import numpy as np

from .errors import GeometryViolationError
from .geometry import (
    Ellipsoid,
    Sphere,
    SurfaceMesh,
    Torus,
    _ScaledSphereChart,
    implicit_value,
)

_BLOCK = 4096
_N_PSI = 16  # Gauss-Legendre order in angle, per fan triangle
_N_S = 24  # Gauss-Legendre order in scaled radius


@lru_cache(maxsize=64)
def _gl01(n: int):
    """Gauss-Legendre nodes/weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def thread_count() -> int:
    try:
        n = int(os.environ.get("SHELLBOUND_THREADS", "1"))
    except ValueError:
        n = 1
    return max(1, n)


def weighted_kernel_sum(weights: np.ndarray, dists: np.ndarray, kernel_fn) -> float:
    """sum(weights * kernel_fn(dists)) with a deterministic reduction.

    The array is cut into fixed-size blocks; each block contributes one
    dot-product partial, and the partials are combined with math.fsum in
    block order.  Block size never depends on the thread count, so the
    result is identical for any parallelism level.
    """
    n = weights.shape[0]
    offsets = range(0, n, _BLOCK)

    def partial(o: int) -> float:
        w = weights[o : o + _BLOCK]
        d = dists[o : o + _BLOCK]
        return float(np.dot(w, kernel_fn(d)))

    workers = thread_count()
    if workers > 1 and n > 8 * _BLOCK:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(partial, offsets))
    else:
        parts = [partial(o) for o in offsets]
    return math.fsum(parts)


def _patch_chart_groups(mesh: SurfaceMesh):
    """Group node indices by the patch chart used for their singular patch."""
    shape = mesh.shape
    if isinstance(shape, (Sphere, Ellipsoid)):
        if isinstance(shape, Sphere):
            axes = np.array([shape.radius] * 3)
        else:
            axes = np.array([shape.a, shape.b, shape.c])
        center = np.asarray(shape.center, dtype=float)
        q = (mesh.nodes - center) / axes
        pole = np.argmin(np.abs(q), axis=1)
        groups = []
        for k in range(3):
            idx = np.nonzero(pole == k)[0]
            if idx.size:
                groups.append((idx, _ScaledSphereChart(center, axes, k)))
        return groups
    if isinstance(shape, Torus):
        return [(np.arange(mesh.n_nodes), mesh.chart)]
    raise GeometryViolationError(f"no singular patch rule for {type(shape).__name__}")


def _build_patch_group(mesh: SurfaceMesh, idx: np.ndarray, chart):
    """Polar-patch quadrature for one batch of nodes sharing a chart.

    Returns (dists, jw) of shape (B, 4*_N_PSI*_N_S): distances from each
    node to its patch points and the matching quadrature weights, whose row
    sums equal the surface area.
    """
    B = idx.shape[0]
    nodes = mesh.nodes[idx]
    if isinstance(chart, _ScaledSphereChart):
        uv = np.array([chart.params_of_point(x) for x in nodes])
        u0, v0 = uv[:, 0], uv[:, 1]
    else:
        u0, v0 = mesh.params[idx, 0], mesh.params[idx, 1]

    xu, xv = chart.tangents(u0, v0)
    E = np.einsum("bi,bi->b", xu, xu)
    F = np.einsum("bi,bi->b", xu, xv)
    G = np.einsum("bi,bi->b", xv, xv)
    a11 = np.sqrt(E)
    a12 = F / a11
    a22 = np.sqrt(np.maximum(G - a12 * a12, 0.0))
    det = a11 * a22  # = sqrt(E G - F^2)

    if chart.u_periodic:
        du_lo = np.full(B, -math.pi)
        du_hi = np.full(B, math.pi)
    else:
        du_lo = chart.u_lo - u0
        du_hi = chart.u_hi - u0
    dv_lo, dv_hi = -math.pi, math.pi

    # Quadrilateral corners around the node, CCW, in sheared coordinates
    # (du, dv) -> (a11 du + a12 dv, a22 dv).
    corners_uv = np.empty((B, 4, 2))
    corners_uv[:, 0] = np.stack([du_lo, np.full(B, dv_lo)], axis=1)
    corners_uv[:, 1] = np.stack([du_hi, np.full(B, dv_lo)], axis=1)
    corners_uv[:, 2] = np.stack([du_hi, np.full(B, dv_hi)], axis=1)
    corners_uv[:, 3] = np.stack([du_lo, np.full(B, dv_hi)], axis=1)
    C = np.empty_like(corners_uv)
    C[..., 0] = a11[:, None] * corners_uv[..., 0] + a12[:, None] * corners_uv[..., 1]
    C[..., 1] = a22[:, None] * corners_uv[..., 1]

    theta = np.arctan2(C[..., 1], C[..., 0])  # (B, 4)
    g_psi, w_psi = _gl01(_N_PSI)
    g_s, w_s = _gl01(_N_S)

    P = C  # edge start corners
    Q = np.roll(C, -1, axis=1)  # edge end corners
    span = np.mod(np.roll(theta, -1, axis=1) - theta, 2.0 * math.pi)  # (B, 4)
    psi = theta[..., None] + span[..., None] * g_psi  # (B, 4, n_psi)
    e = np.stack([np.cos(psi), np.sin(psi)], axis=-1)

    nrm = np.stack([P[..., 1] - Q[..., 1], Q[..., 0] - P[..., 0]], axis=-1)
    h = np.einsum("bki,bki->bk", nrm, P)
    flip = np.sign(h)
    nrm = nrm * flip[..., None]
    h = h * flip
    denom = np.einsum("bki,bkji->bkj", nrm, e)
    rho_max = h[..., None] / denom  # (B, 4, n_psi)

    rho = rho_max[..., None] * g_s  # (B, 4, n_psi, n_s)
    pt_x = rho * e[..., 0:1]
    pt_y = rho * e[..., 1:2]
    dv = pt_y / a22[:, None, None, None]
    du = (pt_x - a12[:, None, None, None] * dv) / a11[:, None, None, None]
    u = u0[:, None, None, None] + du
    v = v0[:, None, None, None] + dv

    Y = chart.embed(u, v)  # (B, 4, n_psi, n_s, 3)
    diff = Y - nodes[:, None, None, None, :]
    d = np.sqrt(np.einsum("...i,...i->...", diff, diff))
    J = chart.jacobian(u, v)

    w_ang = span[..., None] * w_psi  # (B, 4, n_psi)
    jw = (
        J
        * (rho_max * rho_max * w_ang)[..., None]
        * (g_s * w_s)
        / det[:, None, None, None]
    )
    return d.reshape(B, -1), jw.reshape(B, -1)


@lru_cache(maxsize=None)
def _diag_geometry(mesh: SurfaceMesh):
    """Flattened (distances, outer-weight * patch-weight) for one surface.

    weighted_kernel_sum over these arrays yields the full double surface
    integral of a radial kernel (no 1/V normalization applied).
    """
    M = 4 * _N_PSI * _N_S
    d_all = np.empty((mesh.n_nodes, M))
    jw_all = np.empty((mesh.n_nodes, M))
    for idx, chart in _patch_chart_groups(mesh):
        d, jw = _build_patch_group(mesh, idx, chart)
        d_all[idx] = d
        jw_all[idx] = jw
    tw = mesh.weights[:, None] * jw_all
    return (
        np.ascontiguousarray(d_all.reshape(-1)),
        np.ascontiguousarray(tw.reshape(-1)),
        jw_all,
    )


def patch_weight_residual(mesh: SurfaceMesh) -> float:
    """Max relative defect of per-node patch weights against the area."""
    _, _, jw = _diag_geometry(mesh)
    sums = jw.sum(axis=1)
    return float(np.max(np.abs(sums - mesh.area)) / mesh.area)


@lru_cache(maxsize=None)
def _pair_geometry(mesh_i: SurfaceMesh, mesh_j: SurfaceMesh):
    """Flattened (distances, weight products) between two distinct surfaces."""
    diff = mesh_i.nodes[:, None, :] - mesh_j.nodes[None, :, :]
    d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    w = mesh_i.weights[:, None] * mesh_j.weights[None, :]
    return np.ascontiguousarray(d.reshape(-1)), np.ascontiguousarray(w.reshape(-1))


@lru_cache(maxsize=None)
def _disjoint_ok(mesh_i: SurfaceMesh, mesh_j: SurfaceMesh) -> bool:
    scale = max(_shape_scale(mesh_i.shape), _shape_scale(mesh_j.shape))
    tol = -1e-9 * scale
    for mesh, other in ((mesh_i, mesh_j), (mesh_j, mesh_i)):
        for x in other.nodes:
            if implicit_value(mesh.shape, x) < tol:
                return False
    return True


def _shape_scale(shape) -> float:
    if isinstance(shape, Sphere):
        return shape.radius
    if isinstance(shape, Torus):
        return shape.R_major + shape.r_minor
    if isinstance(shape, Ellipsoid):
        return max(shape.a, shape.b, shape.c)
    return 1.0


def check_disjoint(mesh_i: SurfaceMesh, mesh_j: SurfaceMesh) -> None:
    """Raise when one surface's nodes penetrate the other surface."""
    if not _disjoint_ok(mesh_i, mesh_j):
        raise GeometryViolationError(
            f"surfaces {type(mesh_i.shape).__name__} and {type(mesh_j.shape).__name__} overlap"
        )


def diag_weighted_sum(mesh: SurfaceMesh, kernel_fn) -> float:
    """Double integral of kernel(d) over mesh x mesh (singularity-safe)."""
    d, tw, _ = _diag_geometry(mesh)
    return weighted_kernel_sum(tw, d, kernel_fn)


def offdiag_weighted_sum(mesh_i: SurfaceMesh, mesh_j: SurfaceMesh, kernel_fn) -> float:
    """Double integral of kernel(d) over two disjoint surfaces."""
    check_disjoint(mesh_i, mesh_j)
    d, w = _pair_geometry(mesh_i, mesh_j)
    return weighted_kernel_sum(w, d, kernel_fn)


def clear_caches() -> None:
    _diag_geometry.cache_clear()
    _pair_geometry.cache_clear()
    _disjoint_ok.cache_clear()
