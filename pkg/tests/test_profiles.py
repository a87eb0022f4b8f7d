"""Profile validity and the endpoint boundary conditions."""

import math

import numpy as np
import pytest
import sympy as sp

from zollkep import jets as J
from zollkep import profiles as P

X = sp.Symbol("x")


def bump_profile(amp=0.05, a=0.1, b=0.4):
    fn = J.scaled(J.antisymmetrize(J.normalized_bump(a, b)), amp)
    return P.DeformationProfile(fn.with_domain(-1.0, 1.0))


def poly_profile():
    # x (1-x^2)^2 = x - 2x^3 + x^5
    return P.DeformationProfile(J.polynomial([0, 1, 0, -2, 0, 1]).with_domain(-1, 1))


def test_validate_zero_profile():
    v = P.validate_profile(P.zero_profile())
    assert v.passed and v.max_odd_violation == 0.0


def test_validate_bump_profile():
    v = P.validate_profile(bump_profile())
    assert v.passed
    assert v.min_besse_coeff > 0.0


def test_validate_even_profile_fails():
    even = P.DeformationProfile(J.polynomial([1, 0, -2, 0, 1]).with_domain(-1, 1))
    v = P.validate_profile(even)
    assert not v.passed
    # max violation approaches 2 f(0) = 2 at the symmetry point
    assert v.max_odd_violation == pytest.approx(2.0, abs=1e-6)


def test_validate_grid_size_precondition():
    with pytest.raises(ValueError):
        P.validate_profile(P.zero_profile(), grid_size=8)


def test_boundary_conditions_zero():
    rep = P.check_boundary_conditions_f(P.zero_profile())
    assert rep.all_passed and all(r == 0 for r in rep.raw)


def test_boundary_conditions_compact_support():
    rep = P.check_boundary_conditions_f(bump_profile(), K=7)
    assert rep.all_passed
    assert all(r == 0 for r in rep.raw)


def test_boundary_conditions_poly_example():
    # passes k=0 (f(1)=f'(1)=0), fails k=1: f'''(1)=48 vs (3/2) f''(1)=12
    f = poly_profile()
    rep = P.check_boundary_conditions_f(f, K=2)
    jet = f.jet(1.0, 3)
    assert abs(jet.coeffs[3] - 48.0) < 1e-9
    assert abs(1.5 * jet.coeffs[2] - 12.0) < 1e-9
    assert rep.passed[0]
    assert not rep.passed[1]
    assert rep.raw[1] == pytest.approx(36.0, abs=1e-9)


def test_boundary_conditions_phi():
    assert P.check_boundary_conditions_phi(P.zero_projective(2.0)).all_passed
    phi2 = P.ProjectiveProfile(J.polynomial([0, 0, 1]), 2.0)
    assert P.check_boundary_conditions_phi(phi2, K=7).all_passed
    phi3 = P.ProjectiveProfile(J.polynomial([0, 0, 0, 1]), 2.0)
    rep = P.check_boundary_conditions_phi(phi3, K=3)
    assert not rep.passed[1]
    assert rep.raw[1] == pytest.approx(6.0, abs=1e-12)


def test_origin_regularity_zero_and_compact():
    rep = P.check_origin_regularity(2.0, P.zero_profile())
    assert all(r == 0 for r in rep.raw)
    # support away from x=1: locally constant near the origin argument
    rep = P.check_origin_regularity(2.0, bump_profile(), K=7)
    assert rep.all_passed


def test_origin_regularity_vs_symbolic():
    # B(rho)^2 with f = x(1-x^2)^2, h=2, full symbolic oracle
    h = 2
    rho = sp.Symbol("rho")
    x = 1 - h * rho
    f_expr = x * (1 - x**2) ** 2
    B2 = (1 + f_expr / (2 - h * rho)) ** 2
    rep = P.check_origin_regularity(float(h), poly_profile(), K=2)
    for k in (0, 1, 2):
        ref = float(sp.diff(B2, rho, 2 * k + 1).subs(rho, 0))
        assert rep.raw[k] == pytest.approx(ref, rel=1e-10, abs=1e-9)
    assert not rep.all_passed


def test_origin_regularity_matches_proof_recursion():
    # at the first failing order the residual equals -h^(2k+1) times the
    # endpoint residual of the deformation condition
    f = poly_profile()
    h = 2.0
    rep_f = P.check_boundary_conditions_f(f, K=1)
    rep_o = P.check_origin_regularity(h, f, K=1)
    assert rep_o.raw[1] == pytest.approx(-2.0 * h**3 * (48.0 / 2 - 3 * 8.0 / 4),
                                         rel=1e-12)
    # factor 2 from the square; -h^3 * residual accounts for the chain rule
    assert rep_o.raw[1] == pytest.approx(-2.0 * h**3 * 0.5 * rep_f.raw[1], rel=1e-12)


def random_mixed_profile(rng):
    """Mixture family for the equivalence test: bumps and polys vanishing at 1."""
    kind = rng.integers(0, 3)
    if kind == 0:
        return P.random_odd_profile(rng)
    if kind == 1:
        c = float(rng.uniform(-0.5, 0.5))
        return P.DeformationProfile(
            J.scaled(J.polynomial([0, 1, 0, -2, 0, 1]), c).with_domain(-1, 1))
    mix = J.sum_of(P.random_odd_profile(rng).fn,
                   J.scaled(J.polynomial([0, 1, 0, -2, 0, 1]),
                            float(rng.uniform(-0.5, 0.5))))
    return P.DeformationProfile(mix.with_domain(-1, 1))


def test_equivalence_boundary_vs_origin():
    # cumulative pass/fail verdicts of the two checks agree at every order
    rng = np.random.default_rng(42)
    for _ in range(50):
        prof = random_mixed_profile(rng)
        h = float(rng.uniform(0.5, 4.0))
        rep_f = P.check_boundary_conditions_f(prof, K=5, tol=1e-6)
        rep_o = P.check_origin_regularity(h, prof, K=5, tol=1e-6)
        for k in range(6):
            assert rep_f.passed_through(k) == rep_o.passed_through(k)


def test_residual0_is_fprime_when_endpoint_zero():
    # oddness ties residual_0 to f'(1) - f(1)/2
    f = bump_profile()
    jet = f.jet(1.0, 1)
    rep = P.check_boundary_conditions_f(f, K=0)
    assert rep.raw[0] == pytest.approx(jet.coeffs[1] - 0.5 * jet.coeffs[0], abs=1e-15)


def test_profile_serialization_roundtrip(tmp_path):
    f = bump_profile()
    path = tmp_path / "f.json"
    P.save_profile(f, path)
    back = P.load_profile(path)
    assert isinstance(back, P.DeformationProfile)
    xs = np.linspace(-1, 1, 17)
    for x in xs:
        assert back.fn(float(x)) == f.fn(float(x))
    phi = P.ProjectiveProfile(J.polynomial([0, 0, 0.25]), 2.0)
    P.save_profile(phi, path)
    back = P.load_profile(path)
    assert isinstance(back, P.ProjectiveProfile)
    assert back.h == 2.0


def test_jet_order_overflow():
    with pytest.raises(Exception):
        P.check_boundary_conditions_f(bump_profile(), K=8)
