"""Ambient spaces, points, and quadrature meshes for the supported surface shapes.

Conventions: default units put hbar = 1 and mass = 1/2, so the spectral
parameter nu coincides with the decay rate kappa = sqrt(2*m)*nu/hbar and
bound-state energies read E = -nu**2.  Flat points are Cartesian triples;
hyperbolic points live on the hyperboloid -x0^2 + |x|^2 = -1/K embedded in
Minkowski R^{1,3}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    GeometryViolationError,
    InvalidArgumentError,
    UnsupportedShapeError,
)

FLAT = "flat"
HYPERBOLIC = "hyperbolic"


@dataclass(frozen=True)
class PhysicalConstants:
    """Particle constants. Defaults make kappa = nu and E = -nu^2."""

    hbar: float = 1.0
    mass: float = 0.5

    def __post_init__(self):
        if not (self.hbar > 0.0 and math.isfinite(self.hbar)):
            raise InvalidArgumentError(f"hbar must be positive, got {self.hbar}")
        if not (self.mass > 0.0 and math.isfinite(self.mass)):
            raise InvalidArgumentError(f"mass must be positive, got {self.mass}")

    @property
    def kappa_factor(self) -> float:
        """kappa = kappa_factor * nu maps spectral parameter to decay rate."""
        return math.sqrt(2.0 * self.mass) / self.hbar


@dataclass(frozen=True)
class AmbientSpace:
    """Flat R^3 or hyperbolic H^3 with constant sectional curvature -K (K > 0)."""

    kind: str
    curvature_K: float = 0.0
    volume: float | None = None

    def __post_init__(self):
        if self.kind not in (FLAT, HYPERBOLIC):
            raise InvalidArgumentError(f"unknown space kind {self.kind!r}")
        if self.kind == FLAT and self.curvature_K != 0.0:
            raise InvalidArgumentError("flat space requires curvature_K = 0")
        if self.kind == HYPERBOLIC and not self.curvature_K > 0.0:
            raise InvalidArgumentError("hyperbolic space requires curvature_K > 0")
        if self.volume is not None and not self.volume > 0.0:
            raise InvalidArgumentError("ambient volume must be positive when given")

    @property
    def is_flat(self) -> bool:
        return self.kind == FLAT


def flat_space(volume: float | None = None) -> AmbientSpace:
    return AmbientSpace(kind=FLAT, curvature_K=0.0, volume=volume)


def hyperbolic_space(curvature_K: float, volume: float | None = None) -> AmbientSpace:
    return AmbientSpace(kind=HYPERBOLIC, curvature_K=curvature_K, volume=volume)


@dataclass(frozen=True)
class Point3:
    """A point of an ambient space.

    Flat points carry three Cartesian coordinates.  Hyperbolic points carry
    the four hyperboloid-model coordinates (x0, x1, x2, x3).
    """

    coords: tuple[float, ...]

    def __post_init__(self):
        if len(self.coords) not in (3, 4):
            raise InvalidArgumentError(
                f"Point3 needs 3 (flat) or 4 (hyperbolic) coordinates, got {len(self.coords)}"
            )
        if not all(math.isfinite(c) for c in self.coords):
            raise InvalidArgumentError("point coordinates must be finite")

    @property
    def is_flat(self) -> bool:
        return len(self.coords) == 3

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)


def flat_point(x: float, y: float, z: float) -> Point3:
    return Point3((float(x), float(y), float(z)))


def hyperbolic_point(space: AmbientSpace, x1: float, x2: float, x3: float) -> Point3:
    """Lift spatial coordinates onto the hyperboloid of curvature -K."""
    if space.is_flat:
        raise InvalidArgumentError("hyperbolic_point requires a hyperbolic space")
    K = space.curvature_K
    x0 = math.sqrt(1.0 / K + x1 * x1 + x2 * x2 + x3 * x3)
    return Point3((x0, float(x1), float(x2), float(x3)))


def _check_on_hyperboloid(space: AmbientSpace, p: Point3) -> None:
    K = space.curvature_K
    c = p.coords
    resid = -c[0] * c[0] + c[1] * c[1] + c[2] * c[2] + c[3] * c[3] + 1.0 / K
    if abs(resid) > 1e-9 * (1.0 / K + sum(x * x for x in c)):
        raise InvalidArgumentError(
            f"point does not satisfy the hyperboloid constraint for K={K} (residual {resid:.3e})"
        )
    if c[0] <= 0.0:
        raise InvalidArgumentError("hyperboloid points must lie on the upper sheet (x0 > 0)")


def ambient_distance(space: AmbientSpace, p: Point3, q: Point3) -> float:
    """Geodesic distance between two points of the given space.

    Flat: Euclidean norm.  Hyperbolic: (1/sqrt(K)) * arccosh(-K <p,q>_Minkowski).
    """
    if space.is_flat:
        if not (p.is_flat and q.is_flat):
            raise InvalidArgumentError("flat distance requires 3-coordinate points")
        a = p.as_array() - q.as_array()
        return float(np.sqrt(np.dot(a, a)))
    if p.is_flat or q.is_flat:
        raise InvalidArgumentError("hyperbolic distance requires 4-coordinate points")
    _check_on_hyperboloid(space, p)
    _check_on_hyperboloid(space, q)
    K = space.curvature_K
    pc, qc = p.coords, q.coords
    inner = -pc[0] * qc[0] + pc[1] * qc[1] + pc[2] * qc[2] + pc[3] * qc[3]
    # -K*inner >= 1 exactly; clip round-off below 1 before arccosh.
    arg = max(-K * inner, 1.0)
    return math.acosh(arg) / math.sqrt(K)


@dataclass(frozen=True)
class SurfaceCurvatureMeta:
    """Geometric side data consumed by the bound evaluators.

    H_upper/H_lower bound the Gaussian (= sectional) curvature of the surface,
    rho_min/rho_max are the radii used by the lower/upper polar-coordinate
    comparisons, and (chord_arc_delta, chord_arc_kappa) are the chord-arc
    constants with delta*kappa < 1.
    """

    H_upper: float
    H_lower: float
    rho_min: float
    rho_max: float
    chord_arc_delta: float
    chord_arc_kappa: float

    def __post_init__(self):
        if self.H_lower > self.H_upper:
            raise InvalidArgumentError("H_lower must not exceed H_upper")
        if not (0.0 < self.rho_min <= self.rho_max):
            raise InvalidArgumentError("need 0 < rho_min <= rho_max")
        dk = self.chord_arc_delta * self.chord_arc_kappa
        if not (0.0 < dk < 1.0):
            raise InvalidArgumentError(f"need 0 < delta*kappa < 1, got {dk}")

    @property
    def delta_kappa(self) -> float:
        return self.chord_arc_delta * self.chord_arc_kappa


@dataclass(frozen=True)
class Sphere:
    center: tuple[float, float, float]
    radius: float


@dataclass(frozen=True)
class Torus:
    """Torus of revolution about the z axis through its center."""

    center: tuple[float, float, float]
    R_major: float
    r_minor: float


@dataclass(frozen=True)
class Ellipsoid:
    """Axis-aligned ellipsoid with semi-axes (a, b, c)."""

    center: tuple[float, float, float]
    a: float
    b: float
    c: float


class _Chart:
    """Smooth parametrization (u, v) -> R^3 of one closed surface.

    u is the polar-type parameter (interval [u_lo, u_hi], possibly periodic),
    v is always 2*pi-periodic.  embed/jacobian/tangents accept broadcasting
    arrays.
    """

    u_lo: float
    u_hi: float
    u_periodic: bool

    def embed(self, u, v) -> np.ndarray:
        raise NotImplementedError

    def jacobian(self, u, v) -> np.ndarray:
        raise NotImplementedError

    def tangents(self, u, v) -> tuple[np.ndarray, np.ndarray]:
        """Coordinate tangent vectors (d embed/du, d embed/dv)."""
        raise NotImplementedError


class _SphereChart(_Chart):
    def __init__(self, center, radius):
        self.center = np.asarray(center, dtype=float)
        self.R = float(radius)
        self.u_lo, self.u_hi, self.u_periodic = 0.0, math.pi, False

    def embed(self, u, v):
        su = np.sin(u)
        return self.center + self.R * np.stack(
            [su * np.cos(v), su * np.sin(v), np.cos(u) * np.ones_like(v)], axis=-1
        )

    def jacobian(self, u, v):
        return self.R * self.R * np.sin(u) * np.ones_like(v)


class _TorusChart(_Chart):
    def __init__(self, center, R_major, r_minor):
        self.center = np.asarray(center, dtype=float)
        self.Rmaj = float(R_major)
        self.rmin = float(r_minor)
        self.u_lo, self.u_hi, self.u_periodic = 0.0, 2.0 * math.pi, True

    def embed(self, u, v):
        ring = self.Rmaj + self.rmin * np.cos(u)
        return self.center + np.stack(
            [ring * np.cos(v), ring * np.sin(v), self.rmin * np.sin(u) * np.ones_like(v)],
            axis=-1,
        )

    def jacobian(self, u, v):
        return self.rmin * (self.Rmaj + self.rmin * np.cos(u)) * np.ones_like(v)

    def tangents(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        su, cu = np.sin(u), np.cos(u)
        sv, cv = np.sin(v), np.cos(v)
        ring = self.Rmaj + self.rmin * cu
        xu = self.rmin * np.stack([-su * cv, -su * sv, cu], axis=-1)
        xv = np.stack([-ring * sv, ring * cv, np.zeros_like(u)], axis=-1)
        return xu, xv


class _EllipsoidChart(_Chart):
    def __init__(self, center, a, b, c):
        self.center = np.asarray(center, dtype=float)
        self.a, self.b, self.c = float(a), float(b), float(c)
        self.u_lo, self.u_hi, self.u_periodic = 0.0, math.pi, False

    def embed(self, u, v):
        su = np.sin(u)
        return self.center + np.stack(
            [self.a * su * np.cos(v), self.b * su * np.sin(v), self.c * np.cos(u) * np.ones_like(v)],
            axis=-1,
        )

    def jacobian(self, u, v):
        a, b, c = self.a, self.b, self.c
        su, cu = np.sin(u), np.cos(u)
        cv, sv = np.cos(v), np.sin(v)
        return su * np.sqrt(
            c * c * su * su * (b * b * cv * cv + a * a * sv * sv) + a * a * b * b * cu * cu
        )


class _ScaledSphereChart(_Chart):
    """Unit sphere scaled by per-axis semi-axes, pole along a chosen axis.

    Used by the singular-patch quadrature, which re-seats the chart pole away
    from the node under integration so the parametrization stays uniformly
    regular there.  Covers spheres (equal axes) and axis-aligned ellipsoids.
    """

    def __init__(self, center, semi_axes, pole_axis: int):
        self.center = np.asarray(center, dtype=float)
        self.axes = np.asarray(semi_axes, dtype=float)
        self.k = int(pole_axis)
        self.i = (self.k + 1) % 3
        self.j = (self.k + 2) % 3
        self.u_lo, self.u_hi, self.u_periodic = 0.0, math.pi, False

    def _unit(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        q = np.empty(u.shape + (3,), dtype=float)
        su = np.sin(u)
        q[..., self.k] = np.cos(u)
        q[..., self.i] = su * np.cos(v)
        q[..., self.j] = su * np.sin(v)
        return q

    def embed(self, u, v):
        return self.center + self.axes * self._unit(u, v)

    def tangents(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        su, cu = np.sin(u), np.cos(u)
        sv, cv = np.sin(v), np.cos(v)
        xu = np.empty(u.shape + (3,), dtype=float)
        xv = np.empty(u.shape + (3,), dtype=float)
        xu[..., self.k] = -self.axes[self.k] * su
        xu[..., self.i] = self.axes[self.i] * cu * cv
        xu[..., self.j] = self.axes[self.j] * cu * sv
        xv[..., self.k] = 0.0
        xv[..., self.i] = -self.axes[self.i] * su * sv
        xv[..., self.j] = self.axes[self.j] * su * cv
        return xu, xv

    def jacobian(self, u, v):
        xu, xv = self.tangents(u, v)
        return np.linalg.norm(np.cross(xu, xv), axis=-1)

    def params_of_point(self, x) -> tuple[float, float]:
        """Chart coordinates of an on-surface point."""
        q = (np.asarray(x, dtype=float) - self.center) / self.axes
        u = math.acos(float(np.clip(q[self.k], -1.0, 1.0)))
        v = math.atan2(float(q[self.j]), float(q[self.i]))
        return u, v


@dataclass(frozen=True, eq=False)
class SurfaceMesh:
    """Product quadrature mesh on one closed surface (flat embedding).

    nodes[k] lies on the surface, weights[k] > 0, sum(weights) == area.
    params[k] are the (u, v) chart coordinates of node k; chart is the smooth
    parametrization used for the per-node singular patch quadrature.  Treat
    instances as immutable; arrays must not be modified after construction.
    """

    shape: object
    order: int
    nodes: np.ndarray
    weights: np.ndarray
    params: np.ndarray
    area: float
    diameter_ambient: float
    meta: SurfaceCurvatureMeta
    chart: _Chart = field(repr=False)

    def __post_init__(self):
        if self.nodes.ndim != 2 or self.nodes.shape[1] != 3:
            raise InvalidArgumentError("nodes must be an (N, 3) array")
        if np.any(self.weights <= 0.0):
            raise GeometryViolationError("quadrature weights must be strictly positive")
        if self.meta.H_lower > 0.0:
            # Bonnet-Myers: ambient diameter cannot exceed the intrinsic one.
            cap = math.pi / math.sqrt(self.meta.H_lower)
            if self.diameter_ambient > cap * (1.0 + 1e-12):
                raise GeometryViolationError(
                    f"H_lower={self.meta.H_lower} contradicts diameter {self.diameter_ambient}"
                )

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]


def _check_order(order: int) -> int:
    if not isinstance(order, (int, np.integer)) or order < 4:
        raise InvalidArgumentError(f"quadrature order must be an integer >= 4, got {order}")
    return int(order)


def _node_grid_gl(chart: _Chart, order: int):
    """Gauss-Legendre in cos(u) times uniform v for polar-type charts."""
    x, w = np.polynomial.legendre.leggauss(order)
    u = np.arccos(x[::-1])  # ascending u
    wu = w[::-1]
    nv = 2 * order
    v = 2.0 * math.pi * np.arange(nv) / nv
    dv = 2.0 * math.pi / nv
    U, V = np.meshgrid(u, v, indexing="ij")
    # dA = jacobian(u,v) du dv and du = dw/sin(u) under w = cos(u).
    su = np.sin(U)
    W = (chart.jacobian(U, V) / su) * wu[:, None] * dv
    return U.ravel(), V.ravel(), W.ravel()


def _node_grid_periodic(chart: _Chart, order: int):
    """Uniform trapezoid in both angles for doubly periodic charts."""
    nu_, nv = order, 2 * order
    u = 2.0 * math.pi * np.arange(nu_) / nu_
    v = 2.0 * math.pi * np.arange(nv) / nv
    du = 2.0 * math.pi / nu_
    dv = 2.0 * math.pi / nv
    U, V = np.meshgrid(u, v, indexing="ij")
    W = chart.jacobian(U, V) * du * dv
    return U.ravel(), V.ravel(), W.ravel()


def _assemble_mesh(shape, order, chart, area, diameter, meta, periodic_u):
    grid = _node_grid_periodic(chart, order) if periodic_u else _node_grid_gl(chart, order)
    U, V, W = grid
    nodes = chart.embed(U, V)
    return SurfaceMesh(
        shape=shape,
        order=order,
        nodes=np.ascontiguousarray(nodes),
        weights=np.ascontiguousarray(W),
        params=np.ascontiguousarray(np.stack([U, V], axis=-1)),
        area=float(area),
        diameter_ambient=float(diameter),
        meta=meta,
        chart=chart,
    )


def build_sphere(
    radius: float,
    center: tuple[float, float, float] = (0.0, 0.0, 0.0),
    order: int = 16,
    meta: SurfaceCurvatureMeta | None = None,
) -> SurfaceMesh:
    """Sphere of the given radius, Gauss-Legendre x uniform-azimuth mesh."""
    order = _check_order(order)
    if not radius > 0.0:
        raise InvalidArgumentError(f"sphere radius must be positive, got {radius}")
    R = float(radius)
    if meta is None:
        H = 1.0 / (R * R)
        meta = SurfaceCurvatureMeta(
            H_upper=H,
            H_lower=H,
            rho_min=math.pi * R / 2.0,
            rho_max=math.pi * R / 2.0,
            chord_arc_delta=0.75 * R,
            chord_arc_kappa=1.0 / R,
        )
    chart = _SphereChart(center, R)
    return _assemble_mesh(
        Sphere(tuple(float(c) for c in center), R),
        order,
        chart,
        area=4.0 * math.pi * R * R,
        diameter=2.0 * R,
        meta=meta,
        periodic_u=False,
    )


def build_torus(
    R_major: float,
    r_minor: float,
    center: tuple[float, float, float] = (0.0, 0.0, 0.0),
    order: int = 16,
    meta: SurfaceCurvatureMeta | None = None,
) -> SurfaceMesh:
    """Torus of revolution (axis z), uniform product mesh in both angles.

    Auto-filled meta uses the Gaussian curvature range of the torus of
    revolution, rho_max = pi*(R + 2r) (a covering-radius bound), rho_min =
    pi*r/2, and chord-arc constants with delta*kappa = 0.75 (safe for the
    worst arc/chord ratio ~ pi/2 attained on equatorial half-loops).
    """
    order = _check_order(order)
    if not (R_major > 0.0 and r_minor > 0.0):
        raise InvalidArgumentError("torus radii must be positive")
    if r_minor >= R_major:
        raise GeometryViolationError(
            f"torus needs r_minor < R_major, got r={r_minor}, R={R_major}"
        )
    R, r = float(R_major), float(r_minor)
    if meta is None:
        kap = max(1.0 / r, 1.0 / (R - r))
        meta = SurfaceCurvatureMeta(
            H_upper=1.0 / (r * (R + r)),
            H_lower=-1.0 / (r * (R - r)),
            rho_min=math.pi * r / 2.0,
            rho_max=math.pi * (R + 2.0 * r),
            chord_arc_delta=0.75 / kap,
            chord_arc_kappa=kap,
        )
    chart = _TorusChart(center, R, r)
    return _assemble_mesh(
        Torus(tuple(float(c) for c in center), R, r),
        order,
        chart,
        area=4.0 * math.pi * math.pi * R * r,
        diameter=2.0 * (R + r),
        meta=meta,
        periodic_u=True,
    )


def build_ellipsoid(
    a: float,
    b: float,
    c: float,
    center: tuple[float, float, float] = (0.0, 0.0, 0.0),
    order: int = 16,
    meta: SurfaceCurvatureMeta | None = None,
) -> SurfaceMesh:
    """Axis-aligned ellipsoid; area is accumulated numerically.

    Gaussian curvature of an ellipsoid attains its extrema at the axis
    endpoints, K(axis p) = p^2/(q^2 s^2) for {p,q,s} the semi-axes, which
    fills H_upper/H_lower in closed form.
    """
    order = _check_order(order)
    if not (a > 0.0 and b > 0.0 and c > 0.0):
        raise InvalidArgumentError("ellipsoid semi-axes must be positive")
    axes = (float(a), float(b), float(c))
    if meta is None:
        prod2 = (axes[0] * axes[1] * axes[2]) ** 2
        curv = [p * p * p * p / prod2 for p in axes]  # p^2/(q^2 s^2) == p^4/(abc)^2
        H_up, H_lo = max(curv), min(curv)
        kap = max(axes) / min(axes) ** 2
        meta = SurfaceCurvatureMeta(
            H_upper=H_up,
            H_lower=H_lo,
            rho_min=(math.pi / 2.0) / math.sqrt(H_up),
            rho_max=(math.pi / 2.0) / math.sqrt(H_lo),
            chord_arc_delta=0.75 / kap,
            chord_arc_kappa=kap,
        )
    chart = _EllipsoidChart(center, *axes)
    grid = _node_grid_gl(chart, order)
    area = float(np.sum(grid[2]))
    shape = Ellipsoid(tuple(float(x) for x in center), *axes)
    mesh = _assemble_mesh(
        shape, order, chart, area=area, diameter=2.0 * max(axes), meta=meta, periodic_u=False
    )
    return mesh


def build_surface(shape: object, order: int = 16, meta: SurfaceCurvatureMeta | None = None) -> SurfaceMesh:
    """Dispatch a shape tag to its mesh builder."""
    if isinstance(shape, Sphere):
        return build_sphere(shape.radius, shape.center, order, meta)
    if isinstance(shape, Torus):
        return build_torus(shape.R_major, shape.r_minor, shape.center, order, meta)
    if isinstance(shape, Ellipsoid):
        return build_ellipsoid(shape.a, shape.b, shape.c, shape.center, order, meta)
    raise UnsupportedShapeError(f"unsupported shape {type(shape).__name__}")


def surface_geodesic_distance(mesh: SurfaceMesh, i: int, j: int) -> float:
    """Intrinsic distance between two mesh nodes; spheres only.

    On a sphere the geodesic is a great-circle arc, R times the central
    angle, which always dominates the ambient chord.
    """
    if not isinstance(mesh.shape, Sphere):
        raise UnsupportedShapeError(
            f"geodesic distance implemented for spheres only, got {type(mesh.shape).__name__}"
        )
    n = mesh.n_nodes
    if not (0 <= i < n and 0 <= j < n):
        raise InvalidArgumentError(f"node indices ({i}, {j}) out of range for {n} nodes")
    center = np.asarray(mesh.shape.center, dtype=float)
    R = mesh.shape.radius
    a = (mesh.nodes[i] - center) / R
    b = (mesh.nodes[j] - center) / R
    cosang = float(np.clip(np.dot(a, b), -1.0, 1.0))
    return R * math.acos(cosang)


def implicit_value(shape: object, x: np.ndarray) -> float:
    """Signed implicit function of a shape: ~0 on the surface, <0 inside."""
    x = np.asarray(x, dtype=float)
    if isinstance(shape, Sphere):
        return float(np.linalg.norm(x - np.asarray(shape.center)) - shape.radius)
    if isinstance(shape, Torus):
        rel = x - np.asarray(shape.center)
        ring = math.hypot(rel[0], rel[1]) - shape.R_major
        return float(math.hypot(ring, rel[2]) - shape.r_minor)
    if isinstance(shape, Ellipsoid):
        rel = x - np.asarray(shape.center)
        q = (rel[0] / shape.a) ** 2 + (rel[1] / shape.b) ** 2 + (rel[2] / shape.c) ** 2
        return float(math.sqrt(max(q, 0.0)) - 1.0)
    raise UnsupportedShapeError(f"unsupported shape {type(shape).__name__}")
