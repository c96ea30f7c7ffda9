"""Closed-form threshold bounds, spectral-floor disk bound, and the
split finiteness certificate."""

import math

import numpy as np
import pytest

from shellbound import (
    BoundCase,
    InvalidArgumentError,
    KernelBoundConstants,
    NegativeRicci,
    NoConvergenceError,
    NonnegativeRicci,
    OutOfChartError,
    Sphere,
    UnsupportedRegimeError,
    build_surface,
    coupling_bound_diameter,
    coupling_bound_model,
    coupling_from_energy,
    critical_coupling_exact,
    deformation_lower_bound,
    diagonal_lower_envelope,
    finiteness_certificate,
    gersgorin_energy_bound,
    offdiagonal_upper_envelope,
    solve_ground_state,
    space_form_jacobian,
)
from shellbound.bounds import NegativeSectional, PositiveSectional, ZeroSectional
from shellbound.principal import CouplingSpec, pair_integral
from shellbound.oracles import SphereOracleInput, sphere_pair_integral_exact

MH2 = 0.5  # m / hbar^2 at default constants
ROOT_PI = math.sqrt(math.pi)


def _closed_forms(H, K, rho):
    """Zero-energy values of all six curvature regimes, written from scratch."""
    rK, rH = math.sqrt(K), math.sqrt(H)
    rate = rK * (1.0 + 1.0 / ROOT_PI)
    return {
        "NN/zero": MH2 * rho,
        "NN/pos": MH2 / (2.0 * rH) * (rH * rho + math.sin(rH * rho)),
        "NN/neg": 2.0 * MH2 / rH * math.sinh(rH * rho / 2.0),
        "NR/zero": MH2 * math.pi / (1.0 + ROOT_PI) * math.exp(-rK * (1.0 + ROOT_PI) * rho / ROOT_PI),
        "NR/pos": MH2 * (ROOT_PI / 2.0) * (1.0 - math.exp(-rate * rho)) / rate
        * (rho + math.sin(rH * rho) / rH),
        "NR/neg": MH2 * ROOT_PI * (1.0 - math.exp(-(rH + rate) * rho)) / (rH + rate),
    }


def _cases(H, K, rho, nu=0.0):
    return {
        "NN/zero": BoundCase(NonnegativeRicci(), ZeroSectional(), rho, nu),
        "NN/pos": BoundCase(NonnegativeRicci(), PositiveSectional(H), rho, nu),
        "NN/neg": BoundCase(NonnegativeRicci(), NegativeSectional(H), rho, nu),
        "NR/zero": BoundCase(NegativeRicci(K), ZeroSectional(), rho, nu),
        "NR/pos": BoundCase(NegativeRicci(K), PositiveSectional(H), rho, nu),
        "NR/neg": BoundCase(NegativeRicci(K), NegativeSectional(H / 2.0), rho, nu),
    }


def test_model_bounds_zero_energy_closed_forms(constants):
    H, K, rho = 1.0, 1.0, 1.0
    forms = _closed_forms(H, K, rho)
    forms["NR/neg"] = (
        MH2 * ROOT_PI
        * (1.0 - math.exp(-(math.sqrt(H / 2.0) + math.sqrt(K) * (1.0 + 1.0 / ROOT_PI)) * rho))
        / (math.sqrt(H / 2.0) + math.sqrt(K) * (1.0 + 1.0 / ROOT_PI))
    )
    for name, case in _cases(H, K, rho).items():
        got = coupling_bound_model(case, constants)
        assert got == pytest.approx(forms[name], rel=1e-12), name


def test_model_bounds_continuous_at_zero_except_volume_case(constants):
    # five regimes are continuous as nu -> 0; the negative-Ricci flat regime
    # deliberately switches to its zero-energy branch at nu = 0
    H, K, rho = 1.0, 1.0, 1.0
    at0 = _cases(H, K, rho, 0.0)
    tiny = _cases(H, K, rho, 1e-7)
    for name in ("NN/zero", "NN/pos", "NN/neg", "NR/pos", "NR/neg"):
        a = coupling_bound_model(at0[name], constants)
        b = coupling_bound_model(tiny[name], constants)
        assert abs(a - b) / a < 1e-6, name
    jump0 = coupling_bound_model(at0["NR/zero"], constants)
    jump1 = coupling_bound_model(tiny["NR/zero"], constants)
    assert abs(jump0 - jump1) / jump0 > 0.5


def test_model_bound_unit_sphere_value(constants):
    # H = 1, rho = pi/2: (m/2 hbar^2)(pi/2 + 1) = 0.642699...
    case = BoundCase(NonnegativeRicci(), PositiveSectional(1.0), math.pi / 2.0, 0.0)
    assert coupling_bound_model(case, constants) == pytest.approx(
        0.25 * (math.pi / 2.0 + 1.0), rel=1e-14
    )


def test_model_bound_domain_errors(constants):
    with pytest.raises(OutOfChartError):
        coupling_bound_model(
            BoundCase(NonnegativeRicci(), PositiveSectional(1.0), math.pi, 0.0), constants
        )
    with pytest.raises(UnsupportedRegimeError):
        coupling_bound_model(
            BoundCase(NegativeRicci(1.0), NegativeSectional(1.5), 0.5, 0.0), constants
        )


def test_bound_case_validation():
    with pytest.raises(InvalidArgumentError):
        BoundCase("flat", ZeroSectional(), 1.0, 0.0)
    with pytest.raises(InvalidArgumentError):
        BoundCase(NonnegativeRicci(), "zero", 1.0, 0.0)
    with pytest.raises(InvalidArgumentError):
        BoundCase(NonnegativeRicci(), ZeroSectional(), 0.0, 0.0)
    with pytest.raises(InvalidArgumentError):
        BoundCase(NonnegativeRicci(), ZeroSectional(), 1.0, -1.0)
    with pytest.raises(InvalidArgumentError):
        PositiveSectional(0.0)
    with pytest.raises(InvalidArgumentError):
        NegativeSectional(-1.0)
    with pytest.raises(InvalidArgumentError):
        NegativeRicci(0.0)


def test_critical_coupling_richardson(constants, flat, sphere32):
    # P(nu) = 2mR/hbar^2 - O(nu), so the floor error halves with the floor
    e1 = abs(critical_coupling_exact(sphere32, flat, constants, 1e-4) - 1.0)
    e2 = abs(critical_coupling_exact(sphere32, flat, constants, 5e-5) - 1.0)
    assert e1 < 1e-3
    assert e1 / e2 == pytest.approx(2.0, rel=1e-2)
    with pytest.raises(InvalidArgumentError):
        critical_coupling_exact(sphere32, flat, constants, 0.0)
    with pytest.raises(InvalidArgumentError):
        critical_coupling_exact(sphere32, flat, constants, 0.1)


def test_diameter_bound(constants, flat, sphere16, torus16):
    # m * area / (2 pi hbar^2 D) = 0.5 for the unit sphere
    assert coupling_bound_diameter(sphere16, constants, 0.0) == pytest.approx(0.5, rel=1e-14)
    damped = coupling_bound_diameter(sphere16, constants, 1.0)
    assert damped == pytest.approx(0.5 * math.exp(-2.0), rel=1e-14)
    with pytest.raises(InvalidArgumentError):
        coupling_bound_diameter(sphere16, constants, -1.0)
    # both shapes: the floor stays below the exact threshold
    for mesh in (sphere16, torus16):
        exact = critical_coupling_exact(mesh, flat, constants, 1e-4)
        assert coupling_bound_diameter(mesh, constants, 0.0) <= exact


def test_deformation_lower_bound(constants):
    got = deformation_lower_bound(1.0, 1.0, 0.5, constants)
    assert got == pytest.approx(math.sqrt(0.5) / math.sin(0.5), rel=1e-14)
    with pytest.raises(InvalidArgumentError):
        deformation_lower_bound(0.0, 1.0, 0.5, constants)
    with pytest.raises(InvalidArgumentError):
        deformation_lower_bound(1.0, -1.0, 0.5, constants)
    with pytest.raises(InvalidArgumentError):
        deformation_lower_bound(1.0, 1.0, 1.5, constants)
    with pytest.raises(InvalidArgumentError):
        deformation_lower_bound(1.0, 2.0 * math.pi, 0.5, constants)


def test_diagonal_envelope_below_sphere_diagonal(constants):
    nu_star = 1.0
    for nu in (1.2, 1.7, 2.5, 4.0):
        env = diagonal_lower_envelope(1.0, math.pi / 2.0, nu_star, nu, constants)
        diag = sphere_pair_integral_exact(
            SphereOracleInput(R=1.0, nu=nu_star)
        ) - sphere_pair_integral_exact(SphereOracleInput(R=1.0, nu=nu))
        assert 0.0 < env <= diag


def test_diagonal_envelope_below_torus_diagonal(constants, flat, torus16):
    meta = torus16.meta
    nu_star = 1.0
    base = pair_integral(torus16, torus16, flat, constants, nu_star)
    for nu in (1.2, 2.0, 3.5):
        env = diagonal_lower_envelope(meta.H_lower, meta.rho_min, nu_star, nu, constants)
        diag = base - pair_integral(torus16, torus16, flat, constants, nu)
        assert 0.0 < env <= diag


def test_diagonal_envelope_monotone_and_flat_regime(constants):
    vals = [diagonal_lower_envelope(0.0, 1.0, 0.5, nu, constants) for nu in (0.6, 1.0, 2.0, 5.0)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    with pytest.raises(InvalidArgumentError):
        diagonal_lower_envelope(1.0, 0.0, 0.5, 1.0, constants)
    with pytest.raises(InvalidArgumentError):
        diagonal_lower_envelope(1.0, 1.0, 2.0, 1.0, constants)  # nu < nu_star
    with pytest.raises(OutOfChartError):
        diagonal_lower_envelope(4.0, 1.5, 0.5, 1.0, constants)  # tan blowup range


def test_offdiagonal_envelope_caps_pair_integral(constants, flat):
    a = build_surface(Sphere((0.0, 0.0, 0.0), 1.0), order=16)
    b = build_surface(Sphere((4.0, 0.0, 0.0), 1.0), order=16)
    kc = KernelBoundConstants(1.0, 1.0, 1.0)
    prev = math.inf
    for nu in (0.5, 1.0, 2.0):
        p12 = pair_integral(a, b, flat, constants, nu)
        env = offdiagonal_upper_envelope(a.area, b.area, 2.0, nu, constants, kc)
        env_vol = offdiagonal_upper_envelope(a.area, b.area, 2.0, nu, constants, kc, V_M=100.0)
        assert p12 <= env <= env_vol
        assert env < prev  # decreasing in nu
        prev = env
    # at C2 = C3 = 1 and infinite volume the cap is sqrt(A_i A_j) G_nu(s)
    nu, s = 1.0, 2.0
    g = constants.mass / (2.0 * math.pi * constants.hbar**2) * math.exp(-nu * s) / s
    got = offdiagonal_upper_envelope(a.area, b.area, s, nu, constants, kc)
    assert got == pytest.approx(math.sqrt(a.area * b.area) * g, rel=1e-14)
    with pytest.raises(InvalidArgumentError):
        offdiagonal_upper_envelope(a.area, b.area, 0.0, 1.0, constants, kc)
    with pytest.raises(InvalidArgumentError):
        offdiagonal_upper_envelope(a.area, b.area, 2.0, 0.0, constants, kc)


def test_gersgorin_single_surface_exact(constants, flat, sphere16):
    got = gersgorin_energy_bound([sphere16], CouplingSpec.from_nu_stars(1.3), flat, constants)
    assert got == -(1.3**2)


def test_gersgorin_bounds_ground_state(constants, flat, sphere16):
    other = build_surface(Sphere((4.0, 0.0, 0.0), 1.0), order=16)
    spec = CouplingSpec.from_nu_stars(1.0, 1.0)
    e_star = gersgorin_energy_bound([sphere16, other], spec, flat, constants)
    e_gr = solve_ground_state([sphere16, other], spec, flat, constants).energy
    assert e_star <= e_gr + 1e-10
    # for an identical pair the 2x2 disk bound is tight
    assert e_star == pytest.approx(e_gr, abs=1e-8)


def test_gersgorin_touching_spheres(constants, flat):
    a = build_surface(Sphere((0.0, 0.0, 0.0), 1.0), order=12)
    b = build_surface(Sphere((2.0, 0.0, 0.0), 1.0), order=12)
    spec = CouplingSpec.from_nu_stars(1.0, 1.0)
    e_star = gersgorin_energy_bound([a, b], spec, flat, constants)
    e_gr = solve_ground_state([a, b], spec, flat, constants).energy
    assert math.isfinite(e_star)
    assert e_star <= e_gr + 1e-10


def test_gersgorin_validation(constants, flat, sphere16):
    with pytest.raises(InvalidArgumentError):
        gersgorin_energy_bound([sphere16], CouplingSpec.from_lambdas(2.0), flat, constants)
    with pytest.raises(InvalidArgumentError):
        gersgorin_energy_bound([], CouplingSpec(()), flat, constants)
    with pytest.raises(InvalidArgumentError):
        gersgorin_energy_bound([sphere16], CouplingSpec.from_nu_stars(1.0, 1.0), flat, constants)


def test_finiteness_certificate_torus(constants, flat, torus16):
    kc = KernelBoundConstants(1.0, 1.0, 1.0)
    nu_star = 1.0
    base = pair_integral(torus16, torus16, flat, constants, nu_star)
    totals = []
    for nu in (1.5, 2.5, 4.0):
        cert = finiteness_certificate(torus16, flat, constants, kc, math.inf, nu_star, nu)
        diag = base - pair_integral(torus16, torus16, flat, constants, nu)
        assert cert.term_I == 0.0  # infinite ambient volume drops term I
        assert cert.term_II > 0.0
        assert cert.total == cert.term_I + cert.term_II
        assert diag <= cert.total * (1.0 + 1e-12)
        totals.append(cert.total)
    assert all(b > a for a, b in zip(totals, totals[1:]))
    with_vol = finiteness_certificate(torus16, flat, constants, kc, 50.0, nu_star, 2.0)
    assert with_vol.term_I > 0.0


def test_finiteness_certificate_validation(constants, flat, torus16, sphere16):
    kc = KernelBoundConstants(1.0, 1.0, 1.0)
    with pytest.raises(InvalidArgumentError):
        finiteness_certificate(torus16, flat, constants, kc, math.inf, 2.0, 1.0)
    with pytest.raises(InvalidArgumentError):
        # spheres have no negative sectional floor
        finiteness_certificate(sphere16, flat, constants, kc, math.inf, 1.0, 2.0)


def test_space_form_jacobian():
    assert space_form_jacobian(0.0, 0.7) == 0.7
    assert space_form_jacobian(4.0, 0.5) == pytest.approx(math.sin(1.0) / 2.0, rel=1e-15)
    assert space_form_jacobian(-4.0, 0.5) == pytest.approx(math.sinh(1.0) / 2.0, rel=1e-15)
    with pytest.raises(InvalidArgumentError):
        space_form_jacobian(1.0, 0.0)
    with pytest.raises(OutOfChartError):
        space_form_jacobian(1.0, math.pi)
