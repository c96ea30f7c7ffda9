"""Heat kernels of the model spaces, their static (Laplace-in-time) kernels,
two-sided heat-kernel bounds, and the modified Bessel function K1.

The static kernel is the free resolvent at energy E = -nu**2,

    G_nu(d) = (1/hbar) * integral_0^inf dt exp(-nu**2 t/hbar) K_t(d),

which in flat space is the Yukawa kernel (m/2*pi*hbar^2) e^{-kappa d}/d with
kappa = sqrt(2m) nu / hbar, and in hyperbolic space of curvature -K picks up
the factor sqrt(K) d / sinh(sqrt(K) d) and the shifted decay rate
sqrt(K + 2 m nu^2/hbar^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import DivergentInputError, InvalidArgumentError
from .geometry import AmbientSpace, PhysicalConstants

__all__ = [
    "StaticKernelQuery",
    "KernelBoundConstants",
    "heat_kernel",
    "static_kernel",
    "static_kernel_numeric",
    "static_kernel_array",
    "static_kernel_dalpha_array",
    "static_kernel_d2alpha_array",
    "heat_kernel_lower_bound",
    "heat_kernel_upper_bound",
    "bessel_k1",
]


@dataclass(frozen=True)
class StaticKernelQuery:
    """One static-kernel evaluation request at spectral parameter nu."""

    nu: float
    distance: float
    space: AmbientSpace
    constants: PhysicalConstants

    def __post_init__(self):
        if not (self.nu >= 0.0 and math.isfinite(self.nu)):
            raise InvalidArgumentError(f"nu must be finite and >= 0, got {self.nu}")
        if not (self.distance >= 0.0 and math.isfinite(self.distance)):
            raise InvalidArgumentError(f"distance must be finite and >= 0, got {self.distance}")


@dataclass(frozen=True)
class KernelBoundConstants:
    """Dimensionless constants (C1, C2, C3) of the off-diagonal upper bound."""

    C1: float
    C2: float
    C3: float

    def __post_init__(self):
        for name in ("C1", "C2", "C3"):
            val = getattr(self, name)
            if not (val > 0.0 and math.isfinite(val)):
                raise InvalidArgumentError(f"{name} must be positive, got {val}")


def _x_over_sinh(x):
    """x/sinh(x), stable at x = 0 (limit 1)."""
    x = np.asarray(x, dtype=float)
    small = x < 1e-6
    safe = np.where(small, 1.0, x)
    out = np.where(small, 1.0 - x * x / 6.0, safe / np.sinh(safe))
    return out


def heat_kernel(space: AmbientSpace, constants: PhysicalConstants, t, d):
    """Heat kernel of exp(-t H / hbar), H = -hbar^2 Lap / 2m, at distance d.

    Broadcasts over array t and d; returns a float for scalar inputs.
    """
    t_arr = np.asarray(t, dtype=float)
    d_arr = np.asarray(d, dtype=float)
    if np.any(t_arr <= 0.0):
        raise InvalidArgumentError("heat kernel requires t > 0")
    if np.any(d_arr < 0.0):
        raise InvalidArgumentError("heat kernel requires d >= 0")
    m, hbar = constants.mass, constants.hbar
    gauss = (m / (2.0 * math.pi * hbar * t_arr)) ** 1.5 * np.exp(
        -m * d_arr * d_arr / (2.0 * hbar * t_arr)
    )
    if space.is_flat:
        out = gauss
    else:
        K = space.curvature_K
        out = gauss * _x_over_sinh(math.sqrt(K) * d_arr) * np.exp(
            -K * hbar * t_arr / (2.0 * m)
        )
    if np.ndim(out) == 0:
        return float(out)
    return out


def static_kernel(q: StaticKernelQuery) -> float:
    """Closed-form static kernel G_nu(distance) for the query's space."""
    if q.nu == 0.0 and q.distance == 0.0:
        raise DivergentInputError("static kernel diverges at nu = 0, distance = 0")
    if q.distance == 0.0:
        return math.inf
    return float(static_kernel_array(q.space, q.constants, q.nu, np.asarray([q.distance]))[0])


def static_kernel_array(
    space: AmbientSpace, constants: PhysicalConstants, nu: float, d: np.ndarray
) -> np.ndarray:
    """Vectorized static kernel over a strictly positive distance array."""
    m, hbar = constants.mass, constants.hbar
    d = np.asarray(d, dtype=float)
    pref = m / (2.0 * math.pi * hbar * hbar)
    if space.is_flat:
        kappa = constants.kappa_factor * nu
        return pref * np.exp(-kappa * d) / d
    K = space.curvature_K
    gamma = math.sqrt(K + 2.0 * m * nu * nu / (hbar * hbar))
    return pref * (math.sqrt(K) / np.sinh(math.sqrt(K) * d)) * np.exp(-gamma * d)


def static_kernel_dalpha_array(
    space: AmbientSpace, constants: PhysicalConstants, nu: float, d: np.ndarray
) -> np.ndarray:
    """d/d(alpha) of the static kernel at alpha = nu**2 (bounded as d -> 0)."""
    if nu <= 0.0:
        raise InvalidArgumentError("alpha-derivative kernels need nu > 0")
    m, hbar = constants.mass, constants.hbar
    d = np.asarray(d, dtype=float)
    pref = m / (2.0 * math.pi * hbar * hbar)
    if space.is_flat:
        kappa = constants.kappa_factor * nu
        # -(beta/2 nu) G with beta = sqrt(2m) d / hbar; the 1/d of G cancels.
        return -pref * (constants.kappa_factor / (2.0 * nu)) * np.exp(-kappa * d)
    K = space.curvature_K
    gamma = math.sqrt(K + 2.0 * m * nu * nu / (hbar * hbar))
    # d G(d) in the bounded form pref * (sqrt(K) d / sinh(sqrt(K) d)) e^{-gamma d}.
    dG = pref * np.asarray(_x_over_sinh(math.sqrt(K) * d)) * np.exp(-gamma * d)
    return -(m / (hbar * hbar)) / gamma * dG


def static_kernel_d2alpha_array(
    space: AmbientSpace, constants: PhysicalConstants, nu: float, d: np.ndarray
) -> np.ndarray:
    """Second alpha-derivative of the static kernel (bounded as d -> 0)."""
    if nu <= 0.0:
        raise InvalidArgumentError("alpha-derivative kernels need nu > 0")
    m, hbar = constants.mass, constants.hbar
    d = np.asarray(d, dtype=float)
    pref = m / (2.0 * math.pi * hbar * hbar)
    if space.is_flat:
        kf = constants.kappa_factor
        kappa = kf * nu
        expf = np.exp(-kappa * d)
        # G * beta (beta + 1/nu) / (4 nu^2); one power of d cancels the 1/d of G.
        return pref * expf * (kf / (4.0 * nu * nu)) * (kf * d + 1.0 / nu)
    K = space.curvature_K
    gamma = math.sqrt(K + 2.0 * m * nu * nu / (hbar * hbar))
    ratio = np.asarray(_x_over_sinh(math.sqrt(K) * d))
    expf = np.exp(-gamma * d)
    mh = m / (hbar * hbar)
    # (m/hbar^2)^2 (gamma^-3 + d gamma^-2) * (d G), with d*G kept in the
    # bounded form pref * (sqrt(K) d / sinh(sqrt(K) d)) e^{-gamma d}.
    dG = pref * ratio * expf
    return mh * mh * (1.0 / gamma**3 + d / gamma**2) * dG


def static_kernel_numeric(q: StaticKernelQuery) -> float:
    """Adaptive time-quadrature of e^{-nu^2 t/hbar} K_t(d) / hbar.

    Truncates at t_max = 40 hbar / nu^2 (hyperbolic decay only tightens
    this); the discarded tail is below e^{-40} of the total.
    """
    if q.nu <= 0.0:
        raise InvalidArgumentError("numeric static kernel needs nu > 0")
    if q.distance <= 0.0:
        raise DivergentInputError("numeric static kernel needs distance > 0")
    m, hbar = q.constants.mass, q.constants.hbar
    rate = q.nu * q.nu / hbar
    t_max = 40.0 / rate

    def integrand(t):
        return math.exp(-rate * t) * heat_kernel(q.space, q.constants, t, q.distance) / hbar

    # Hint the peak of t^{-3/2} e^{-a/t - b t} to the subdivision.
    a = m * q.distance * q.distance / (2.0 * hbar)
    t_peak = math.sqrt(a / rate) if a > 0 else None
    pts = [t_peak] if (t_peak is not None and 0.0 < t_peak < t_max) else None
    val, _err = integrate.quad(
        integrand, 0.0, t_max, points=pts, epsabs=0.0, epsrel=1e-12, limit=200
    )
    return val


def heat_kernel_lower_bound(constants: PhysicalConstants, t, d):
    """Gaussian comparison lower bound; exact for flat space."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0.0):
        raise InvalidArgumentError("lower bound requires t > 0")
    m, hbar = constants.mass, constants.hbar
    d_arr = np.asarray(d, dtype=float)
    out = (m / (2.0 * math.pi * hbar * t_arr)) ** 1.5 * np.exp(
        -m * d_arr * d_arr / (2.0 * hbar * t_arr)
    )
    if np.ndim(out) == 0:
        return float(out)
    return out


def heat_kernel_upper_bound(
    kc: KernelBoundConstants,
    V_M: float,
    constants: PhysicalConstants,
    t,
    d,
):
    """Off-diagonal upper bound C1/V_M + C2 * Gaussian with widened variance C3.

    Pass V_M = math.inf for noncompact ambient manifolds; the volume term
    then drops out.
    """
    if not V_M > 0.0:
        raise InvalidArgumentError(f"V_M must be positive (or inf), got {V_M}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0.0):
        raise InvalidArgumentError("upper bound requires t > 0")
    m, hbar = constants.mass, constants.hbar
    d_arr = np.asarray(d, dtype=float)
    vol_term = 0.0 if math.isinf(V_M) else kc.C1 / V_M
    out = vol_term + kc.C2 * (m / (2.0 * math.pi * hbar * t_arr)) ** 1.5 * np.exp(
        -m * d_arr * d_arr / (2.0 * kc.C3 * hbar * t_arr)
    )
    if np.ndim(out) == 0:
        return float(out)
    return out


def bessel_k1(z: float) -> float:
    """Modified Bessel function of the second kind, order one."""
    if not z > 0.0:
        raise InvalidArgumentError(f"bessel_k1 requires z > 0, got {z}")
    return float(special.k1(z))
