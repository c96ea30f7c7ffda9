"""Heat and static kernels, their bounds, and the alpha-derivative family."""

import math

import numpy as np
import pytest

from shellbound import (
    DivergentInputError,
    InvalidArgumentError,
    KernelBoundConstants,
    PhysicalConstants,
    StaticKernelQuery,
    bessel_k1,
    heat_kernel,
    heat_kernel_lower_bound,
    heat_kernel_upper_bound,
    static_kernel,
)
from shellbound.kernels import (
    static_kernel_array,
    static_kernel_d2alpha_array,
    static_kernel_dalpha_array,
    static_kernel_numeric,
)
from shellbound.geometry import flat_space, hyperbolic_space


def test_flat_static_kernel_value(constants, flat):
    nu, d = 0.7, 1.3
    got = static_kernel(StaticKernelQuery(nu=nu, distance=d, space=flat, constants=constants))
    m, hbar = constants.mass, constants.hbar
    kappa = math.sqrt(2.0 * m) * nu / hbar
    expected = m / (2.0 * math.pi * hbar * hbar) * math.exp(-kappa * d) / d
    assert got == pytest.approx(expected, rel=1e-15)


def test_hyperbolic_static_kernel_value(constants):
    space = hyperbolic_space(0.8)
    nu, d = 0.7, 1.3
    got = static_kernel(StaticKernelQuery(nu=nu, distance=d, space=space, constants=constants))
    m, hbar = constants.mass, constants.hbar
    K = 0.8
    gamma = math.sqrt(K + 2.0 * m * nu * nu / (hbar * hbar))
    expected = (
        m / (2.0 * math.pi * hbar * hbar)
        * math.sqrt(K) / math.sinh(math.sqrt(K) * d)
        * math.exp(-gamma * d)
    )
    assert got == pytest.approx(expected, rel=1e-15)


def test_hyperbolic_kernel_flat_limit(constants, flat):
    nu, d = 0.9, 0.8
    soft = hyperbolic_space(1e-12)
    a = static_kernel(StaticKernelQuery(nu=nu, distance=d, space=soft, constants=constants))
    b = static_kernel(StaticKernelQuery(nu=nu, distance=d, space=flat, constants=constants))
    assert a == pytest.approx(b, rel=1e-9)


def test_static_kernel_edge_cases(constants, flat):
    assert static_kernel(
        StaticKernelQuery(nu=1.0, distance=0.0, space=flat, constants=constants)
    ) == math.inf
    with pytest.raises(DivergentInputError):
        static_kernel(StaticKernelQuery(nu=0.0, distance=0.0, space=flat, constants=constants))
    with pytest.raises(InvalidArgumentError):
        StaticKernelQuery(nu=-1.0, distance=1.0, space=flat, constants=constants)
    with pytest.raises(InvalidArgumentError):
        StaticKernelQuery(nu=1.0, distance=-1.0, space=flat, constants=constants)
    with pytest.raises(InvalidArgumentError):
        StaticKernelQuery(nu=math.inf, distance=1.0, space=flat, constants=constants)


@pytest.mark.parametrize("make_space", [lambda: flat_space(), lambda: hyperbolic_space(0.8)])
def test_static_kernel_matches_time_quadrature(constants, make_space):
    space = make_space()
    for nu, d in [(0.7, 1.3), (1.5, 0.4), (0.2, 2.5)]:
        q = StaticKernelQuery(nu=nu, distance=d, space=space, constants=constants)
        assert static_kernel(q) == pytest.approx(static_kernel_numeric(q), rel=1e-8)


def test_static_kernel_numeric_validation(constants, flat):
    with pytest.raises(InvalidArgumentError):
        static_kernel_numeric(StaticKernelQuery(nu=0.0, distance=1.0, space=flat, constants=constants))
    with pytest.raises(DivergentInputError):
        static_kernel_numeric(StaticKernelQuery(nu=1.0, distance=0.0, space=flat, constants=constants))


def _gl(n, a, b):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def test_flat_heat_kernel_semigroup(constants, flat):
    # int K_t(|x-y|) K_s(|y-z|) d^3 y = K_{t+s}(|x-z|)
    t, s, D = 0.3, 0.5, 1.2
    r, wr = _gl(220, 1e-9, 14.0)
    c, wc = _gl(128, -1.0, 1.0)
    rr = r[:, None]
    d2 = rr * rr + D * D - 2.0 * rr * D * c[None, :]
    inner = heat_kernel(flat, constants, s, np.sqrt(d2))
    outer = heat_kernel(flat, constants, t, r)
    total = 2.0 * math.pi * float(wr @ (outer * rr[:, 0] ** 2 * (inner @ wc)))
    assert total == pytest.approx(heat_kernel(flat, constants, t + s, D), rel=1e-8)


def test_hyperbolic_heat_kernel_semigroup(constants):
    # same composition with the H^3 volume element sinh^2(sqrt(K) r)/K and
    # the hyperbolic law of cosines for the inner distance
    K = 0.6
    space = hyperbolic_space(K)
    rK = math.sqrt(K)
    t, s, D = 0.4, 0.7, 0.9
    r, wr = _gl(260, 1e-9, 16.0)
    c, wc = _gl(128, -1.0, 1.0)
    rr = r[:, None]
    ch = np.cosh(rK * rr) * math.cosh(rK * D) - np.sinh(rK * rr) * math.sinh(rK * D) * c[None, :]
    d = np.arccosh(np.maximum(ch, 1.0)) / rK
    inner = heat_kernel(space, constants, s, d)
    outer = heat_kernel(space, constants, t, r)
    vol = np.sinh(rK * r) ** 2 / K
    total = 2.0 * math.pi * float(wr @ (outer * vol * (inner @ wc)))
    assert total == pytest.approx(heat_kernel(space, constants, t + s, D), rel=1e-6)


def test_heat_kernel_validation_and_broadcast(constants, flat):
    with pytest.raises(InvalidArgumentError):
        heat_kernel(flat, constants, 0.0, 1.0)
    with pytest.raises(InvalidArgumentError):
        heat_kernel(flat, constants, 1.0, -1.0)
    out = heat_kernel(flat, constants, np.array([0.1, 0.2, 0.3]), 1.0)
    assert out.shape == (3,)
    assert isinstance(heat_kernel(flat, constants, 0.1, 1.0), float)


def test_heat_kernel_bounds(constants, flat):
    space = hyperbolic_space(0.7)
    kc = KernelBoundConstants(1.0, 1.0, 1.0)
    ts = np.array([0.05, 0.3, 1.0, 4.0])
    ds = np.array([0.0, 0.4, 1.5, 3.0])
    for t in ts:
        flat_k = heat_kernel(flat, constants, t, ds)
        hyp_k = heat_kernel(space, constants, t, ds)
        lower = heat_kernel_lower_bound(constants, t, ds)
        upper = heat_kernel_upper_bound(kc, math.inf, constants, t, ds)
        # the Gaussian comparison is exact in flat space and caps H^3 from above
        assert np.allclose(lower, flat_k, rtol=1e-15)
        assert np.all(hyp_k <= upper * (1.0 + 1e-15))
        assert np.all(hyp_k <= flat_k * (1.0 + 1e-15))
        # a finite ambient volume only adds to the cap
        cap_vol = heat_kernel_upper_bound(kc, 50.0, constants, t, ds)
        assert np.all(cap_vol >= upper)
    with pytest.raises(InvalidArgumentError):
        heat_kernel_upper_bound(kc, 0.0, constants, 1.0, 1.0)
    with pytest.raises(InvalidArgumentError):
        heat_kernel_lower_bound(constants, -1.0, 1.0)


def test_kernel_bound_constants_validation():
    with pytest.raises(InvalidArgumentError):
        KernelBoundConstants(0.0, 1.0, 1.0)
    with pytest.raises(InvalidArgumentError):
        KernelBoundConstants(1.0, -2.0, 1.0)
    with pytest.raises(InvalidArgumentError):
        KernelBoundConstants(1.0, 1.0, math.inf)


@pytest.mark.parametrize("make_space", [lambda: flat_space(), lambda: hyperbolic_space(0.8)])
def test_dalpha_kernel_matches_finite_difference(constants, make_space):
    space = make_space()
    d = np.array([0.3, 1.1, 2.4])
    alpha, h = 0.81, 1e-6
    up = static_kernel_array(space, constants, math.sqrt(alpha + h), d)
    dn = static_kernel_array(space, constants, math.sqrt(alpha - h), d)
    fd = (up - dn) / (2.0 * h)
    got = static_kernel_dalpha_array(space, constants, math.sqrt(alpha), d)
    assert np.allclose(got, fd, rtol=1e-7)


@pytest.mark.parametrize("make_space", [lambda: flat_space(), lambda: hyperbolic_space(0.8)])
def test_d2alpha_kernel_matches_finite_difference(constants, make_space):
    space = make_space()
    d = np.array([0.3, 1.1, 2.4])
    alpha, h = 0.81, 1e-4
    up = static_kernel_dalpha_array(space, constants, math.sqrt(alpha + h), d)
    dn = static_kernel_dalpha_array(space, constants, math.sqrt(alpha - h), d)
    fd = (up - dn) / (2.0 * h)
    got = static_kernel_d2alpha_array(space, constants, math.sqrt(alpha), d)
    assert np.allclose(got, fd, rtol=1e-6)


def test_derivative_kernels_bounded_at_contact(constants, flat):
    # the 1/d singularity cancels in both derivative kernels
    space = hyperbolic_space(0.5)
    for sp in (flat, space):
        tiny = static_kernel_dalpha_array(sp, constants, 1.0, np.array([1e-14]))
        assert math.isfinite(float(tiny[0]))
        tiny2 = static_kernel_d2alpha_array(sp, constants, 1.0, np.array([1e-14]))
        assert math.isfinite(float(tiny2[0]))
    with pytest.raises(InvalidArgumentError):
        static_kernel_dalpha_array(flat, constants, 0.0, np.array([1.0]))
    with pytest.raises(InvalidArgumentError):
        static_kernel_d2alpha_array(flat, constants, -1.0, np.array([1.0]))


def test_bessel_k1_reference_values():
    assert bessel_k1(1.0) == pytest.approx(0.60190723019723457, rel=1e-13)
    assert bessel_k1(2.0) == pytest.approx(0.13986588181652243, rel=1e-13)
    with pytest.raises(InvalidArgumentError):
        bessel_k1(0.0)
    with pytest.raises(InvalidArgumentError):
        bessel_k1(-2.0)


def test_bessel_k1_exponential_cap():
    for z in np.linspace(0.1, 10.0, 34):
        assert bessel_k1(float(z)) < math.exp(-z) * (1.0 + 1.0 / z)
