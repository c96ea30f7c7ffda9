"""Principal (Krein) matrix assembly and bound-state solving.

For surfaces Sigma_i carrying the rank-one attractive interaction
-(lambda_i/V_i)|Gamma_i><Gamma_i|, the bound-state energies E = -nu**2 are
the zeros of the lowest eigenvalue of the symmetric matrix

    Phi_ii(nu) = 1/lambda_i - P_ii(nu)            (lambda form)
               = P_ii(nu_i*) - P_ii(nu)           (nu* form)
    Phi_ij(nu) = -P_ij(nu)   (i != j)

with P_ij the kernel pair integral (V_i V_j)^{-1/2} int int G_nu.  Every
P_ij decreases strictly in nu and the off-diagonals are nonpositive, so the
lowest eigenvalue increases in nu and bisection is unconditionally safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _quadrature as quad
from .errors import (
    InvalidArgumentError,
    InvalidStateError,
    NoBoundStateError,
    NoConvergenceError,
)
from .geometry import AmbientSpace, PhysicalConstants, Point3, SurfaceMesh
from .jacobi import jacobi_eigh
from .kernels import static_kernel_array

__all__ = [
    "Coupling",
    "CouplingSpec",
    "PrincipalMatrix",
    "BoundStateResult",
    "pair_integral",
    "assemble_phi",
    "coupling_from_energy",
    "energy_from_coupling",
    "lowest_eigenvalue_flow",
    "solve_ground_state",
    "wavefunction",
]

_NU_FLOOR = 1e-8
_NU_CEIL = 1e4


@dataclass(frozen=True)
class Coupling:
    """Interaction strength of one surface: coupling constant or its
    standalone bound-state parameter, never both."""

    lam: float | None = None
    nu_star: float | None = None

    def __post_init__(self):
        if (self.lam is None) == (self.nu_star is None):
            raise InvalidArgumentError("give exactly one of lam or nu_star")
        if self.lam is not None and not self.lam > 0.0:
            raise InvalidArgumentError(f"coupling must be positive, got {self.lam}")
        if self.nu_star is not None and not self.nu_star > 0.0:
            raise InvalidArgumentError(f"nu_star must be positive, got {self.nu_star}")

    @staticmethod
    def from_lambda(lam: float) -> "Coupling":
        return Coupling(lam=float(lam))

    @staticmethod
    def from_nu_star(nu_star: float) -> "Coupling":
        return Coupling(nu_star=float(nu_star))


@dataclass(frozen=True)
class CouplingSpec:
    items: tuple[Coupling, ...]

    def __post_init__(self):
        # May be empty: point-only hybrid systems carry no surface couplings.
        for it in self.items:
            if not isinstance(it, Coupling):
                raise InvalidArgumentError(f"expected Coupling, got {type(it).__name__}")

    @staticmethod
    def from_lambdas(*lams: float) -> "CouplingSpec":
        return CouplingSpec(tuple(Coupling.from_lambda(x) for x in lams))

    @staticmethod
    def from_nu_stars(*stars: float) -> "CouplingSpec":
        return CouplingSpec(tuple(Coupling.from_nu_star(x) for x in stars))

    def __len__(self) -> int:
        return len(self.items)


@dataclass(frozen=True, eq=False)
class PrincipalMatrix:
    nu: float
    entries: np.ndarray
    surfaces: tuple[SurfaceMesh, ...]
    couplings: CouplingSpec

    def __post_init__(self):
        A = self.entries
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise InvalidArgumentError("entries must be square")
        scale = max(float(np.max(np.abs(A))), 1e-300)
        if float(np.max(np.abs(A - A.T))) > 1e-12 * scale:
            raise InvalidArgumentError("principal matrix must be symmetric")

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def omega_min(self) -> float:
        """Lowest eigenvalue (cyclic Jacobi)."""
        if self.n == 1:
            return float(self.entries[0, 0])
        w, _ = jacobi_eigh(self.entries)
        return float(w[0])


@dataclass(frozen=True)
class BoundStateResult:
    energy: float
    nu_star: float
    weights: np.ndarray
    converged: bool
    iterations: int
    residual: float


def _check_flat(space: AmbientSpace) -> None:
    if not space.is_flat:
        raise InvalidArgumentError(
            "surface meshes are embedded in flat ambient space; hyperbolic "
            "systems are served by the closed-form bound evaluators"
        )


def pair_integral(
    mesh_i: SurfaceMesh,
    mesh_j: SurfaceMesh,
    space: AmbientSpace,
    constants: PhysicalConstants,
    nu: float,
) -> float:
    """(V_i V_j)^{-1/2} double surface integral of the static kernel."""
    _check_flat(space)
    if not nu > 0.0:
        raise InvalidArgumentError(f"pair integral needs nu > 0, got {nu}")
    kernel = lambda d: static_kernel_array(space, constants, nu, d)
    if mesh_i is mesh_j:
        return quad.diag_weighted_sum(mesh_i, kernel) / mesh_i.area
    raw = quad.offdiag_weighted_sum(mesh_i, mesh_j, kernel)
    return raw / math.sqrt(mesh_i.area * mesh_j.area)


def _validate_system(surfaces, couplings: CouplingSpec) -> None:
    if len(surfaces) == 0:
        raise InvalidArgumentError("need at least one surface")
    if len(couplings) != len(surfaces):
        raise InvalidArgumentError(
            f"{len(surfaces)} surfaces but {len(couplings)} couplings"
        )


def assemble_phi(
    surfaces,
    couplings: CouplingSpec,
    space: AmbientSpace,
    constants: PhysicalConstants,
    nu: float,
) -> PrincipalMatrix:
    """Principal matrix at spectral parameter nu (energy -nu**2)."""
    _validate_system(surfaces, couplings)
    surfaces = tuple(surfaces)
    n = len(surfaces)
    A = np.zeros((n, n))
    for i, (mesh, cp) in enumerate(zip(surfaces, couplings.items)):
        p_nu = pair_integral(mesh, mesh, space, constants, nu)
        if cp.lam is not None:
            A[i, i] = 1.0 / cp.lam - p_nu
        else:
            A[i, i] = pair_integral(mesh, mesh, space, constants, cp.nu_star) - p_nu
    for i in range(n):
        for j in range(i + 1, n):
            val = -pair_integral(surfaces[i], surfaces[j], space, constants, nu)
            A[i, j] = A[j, i] = val
    return PrincipalMatrix(nu=nu, entries=A, surfaces=surfaces, couplings=couplings)


def coupling_from_energy(
    mesh: SurfaceMesh,
    space: AmbientSpace,
    constants: PhysicalConstants,
    nu_star: float,
) -> float:
    """Coupling whose standalone bound state sits at energy -nu_star**2."""
    if not nu_star > 0.0:
        raise InvalidArgumentError(f"nu_star must be positive, got {nu_star}")
    return 1.0 / pair_integral(mesh, mesh, space, constants, nu_star)


def energy_from_coupling(
    mesh: SurfaceMesh,
    space: AmbientSpace,
    constants: PhysicalConstants,
    lam: float,
) -> float | None:
    """Standalone bound-state parameter nu* for one surface, or None.

    Returns None when the coupling is at or below the critical value (the
    pair integral at nu -> 0 caps 1/lambda for a bound state to form).
    """
    if not lam > 0.0:
        raise InvalidArgumentError(f"coupling must be positive, got {lam}")
    target = 1.0 / lam
    f = lambda nu: target - pair_integral(mesh, mesh, space, constants, nu)
    lo = _NU_FLOOR
    if f(lo) >= 0.0:
        return None
    hi = 1.0
    while f(hi) <= 0.0:
        hi *= 2.0
        if hi > _NU_CEIL:
            raise NoConvergenceError(
                f"no sign change for coupling {lam} with nu up to {_NU_CEIL}"
            )
    for _ in range(200):
        if hi - lo <= 1e-13 * max(1.0, lo):
            break
        mid = 0.5 * (lo + hi)
        if f(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def lowest_eigenvalue_flow(
    surfaces,
    couplings: CouplingSpec,
    space: AmbientSpace,
    constants: PhysicalConstants,
    nu_grid,
) -> list[tuple[float, float]]:
    """(nu, omega_min) samples of the monotone eigenvalue flow."""
    grid = [float(x) for x in nu_grid]
    if any(b <= a for a, b in zip(grid, grid[1:])) or (grid and grid[0] <= 0.0):
        raise InvalidArgumentError("nu_grid must be positive and strictly increasing")
    out = []
    for nu in grid:
        pm = assemble_phi(surfaces, couplings, space, constants, nu)
        out.append((nu, pm.omega_min()))
    return out


def solve_ground_state(
    surfaces,
    couplings: CouplingSpec,
    space: AmbientSpace,
    constants: PhysicalConstants,
    tol: float = 1e-10,
) -> BoundStateResult:
    """Ground state by bisection on the lowest-eigenvalue flow.

    The returned weights are the unit null eigenvector at the crossing,
    sign-fixed to be componentwise nonnegative (ground-state positivity).
    """
    _validate_system(surfaces, couplings)
    surfaces = tuple(surfaces)

    def omega(nu: float) -> float:
        return assemble_phi(surfaces, couplings, space, constants, nu).omega_min()

    stars = [cp.nu_star for cp in couplings.items if cp.nu_star is not None]
    lo = max(stars) if stars else _NU_FLOOR
    f_lo = omega(lo)
    if f_lo > 0.0:
        raise NoBoundStateError(
            f"omega_min({lo}) = {f_lo} > 0: no bound state at or below the bracket start"
        )
    iterations = 0
    hi = max(2.0 * lo, 1.0)
    while omega(hi) <= 0.0:
        iterations += 1
        hi *= 2.0
        if hi > _NU_CEIL:
            raise NoBoundStateError(f"no bound state in bracket [{lo}, {_NU_CEIL}]")
    while hi - lo > 0.5e-12 * max(1.0, hi) and iterations < 200:
        iterations += 1
        mid = 0.5 * (lo + hi)
        if omega(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    nu_sol = 0.5 * (lo + hi)
    pm = assemble_phi(surfaces, couplings, space, constants, nu_sol)
    w, V = jacobi_eigh(pm.entries)
    vec = V[:, 0]
    if float(np.sum(vec)) < 0.0:
        vec = -vec
    residual = abs(float(w[0]))
    return BoundStateResult(
        energy=-nu_sol * nu_sol,
        nu_star=nu_sol,
        weights=vec,
        converged=bool(residual < tol),
        iterations=iterations,
        residual=residual,
    )


def surface_potential(
    mesh: SurfaceMesh,
    space: AmbientSpace,
    constants: PhysicalConstants,
    nu: float,
    x: Point3,
) -> float:
    """V^{-1/2} integral of the static kernel from a point to one surface."""
    _check_flat(space)
    if not x.is_flat:
        raise InvalidArgumentError("need a flat-space point")
    diff = mesh.nodes - x.as_array()
    d = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    if np.any(d == 0.0):
        return math.inf
    kernel = lambda dd: static_kernel_array(space, constants, nu, dd)
    return quad.weighted_kernel_sum(mesh.weights, d, kernel) / math.sqrt(mesh.area)


def wavefunction(
    result: BoundStateResult,
    surfaces,
    space: AmbientSpace,
    constants: PhysicalConstants,
    x: Point3,
) -> float:
    """Ground-state amplitude sum_i A_i V_i^{-1/2} int_Sigma_i G_nu*."""
    if not result.converged:
        raise InvalidStateError("wavefunction needs a converged bound-state result")
    surfaces = tuple(surfaces)
    if len(surfaces) != result.weights.shape[0]:
        raise InvalidArgumentError("surface count does not match result weights")
    total = 0.0
    for mesh, a in zip(surfaces, result.weights):
        total += float(a) * surface_potential(mesh, space, constants, result.nu_star, x)
    return total
