"""Return-angle quadrature and Hamiltonian orbit integration."""

import math

import numpy as np
import pytest

from zollkep import jets as J
from zollkep import profiles as P
from zollkep import geometry as G
from zollkep import dynamics as D
from zollkep.errors import DomainError

TWO_PI = 2 * math.pi


def bump_profile(amp=0.05, a=0.1, b=0.5):
    fn = J.scaled(J.antisymmetrize(J.normalized_bump(a, b)), amp)
    return P.DeformationProfile(fn.with_domain(-1.0, 1.0))


def even_perturbed_besse(f=None, alpha=0.1, h=1.0):
    parts = [J.identity(), J.scaled(J.polynomial([1, 0, -1]), alpha)]
    if f is not None:
        parts.insert(1, f.fn)
    return G.BesseProfile(J.sum_of(*parts), h)


# -- Clairaut constant -------------------------------------------------------

def test_clairaut_examples():
    # oracle: turning radii solve h rho^2 - 2 rho + p^2 = 0 and c = sin r there
    for h, p in ((2.0, 0.5), (4.0, 0.25), (1.3, 0.61)):
        rho_min = (1 - math.sqrt(1 - h * p * p)) / h
        c_oracle = math.sqrt(h * rho_min * (2 - h * rho_min))
        assert D.ptheta_to_clairaut(h, p) == pytest.approx(c_oracle, rel=1e-13)
    assert D.ptheta_to_clairaut(2, 0.5) == pytest.approx(math.sqrt(2) / 2, rel=1e-15)
    assert D.ptheta_to_clairaut(4, 0.25) == pytest.approx(0.5, rel=1e-15)


def test_clairaut_limits():
    assert D.ptheta_to_clairaut(1.0, 1 - 1e-9) == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(DomainError):
        D.ptheta_to_clairaut(2.0, 1 / math.sqrt(2))
    with pytest.raises(DomainError):
        D.ptheta_to_clairaut(2.0, 0.0)


# -- quadrature --------------------------------------------------------------

def test_return_angle_round_sphere():
    b0 = G.BesseProfile(J.constant(0.0), 1.0)
    assert abs(D.return_angle_quadrature(b0, 0.7) - TWO_PI) < 1e-12


def test_return_angle_kepler():
    bk = G.BesseProfile(J.identity(), 2.0)
    assert abs(D.return_angle_quadrature(bk, 0.3) - TWO_PI) < 1e-12


def test_return_angle_even_perturbation_closed_form():
    # b = id + alpha (1-s^2): the even part contributes exactly 2 alpha pi c
    bev = even_perturbed_besse()
    for c in (0.3, 0.5, 0.9):
        got = D.return_angle_quadrature(bev, c)
        assert got == pytest.approx(TWO_PI + 0.2 * math.pi * c, abs=1e-12)
        assert abs(got - TWO_PI) > 1e-3


def test_radial_period_quadrature():
    b0 = G.BesseProfile(J.constant(0.0), 1.0)
    assert abs(D.radial_period_quadrature(b0, 0.5) - TWO_PI) < 1e-13
    bk = G.BesseProfile(J.identity(), 2.0)
    assert abs(D.radial_period_quadrature(bk, 0.9) - TWO_PI) < 1e-13
    # closed form for the even perturbation: 2 pi + alpha pi (2 - (1-c^2))
    bev = even_perturbed_besse()
    c = 0.5
    oracle = TWO_PI + 0.1 * math.pi * (2 - (1 - c * c))
    assert D.radial_period_quadrature(bev, c) == pytest.approx(oracle, abs=1e-12)


def test_quadrature_small_c_accuracy():
    b0 = G.BesseProfile(J.constant(0.0), 1.0)
    for c in (0.0205, 0.05, 0.97):
        assert abs(D.return_angle_quadrature(b0, c) - TWO_PI) < 1e-10


def test_parity_implies_zoll_property():
    rng = np.random.default_rng(21)
    for _ in range(5):
        f = P.random_odd_profile(rng, amplitude=0.15)
        bes = G.to_besse(f, 2.0)
        for c in D.default_c_grid(16):
            assert abs(D.return_angle_quadrature(bes, float(c)) - TWO_PI) < 1e-9
            assert abs(D.radial_period_quadrature(bes, float(c)) - TWO_PI) < 1e-9


# -- Hamiltonian vector field -------------------------------------------------

def test_rhs_circular_orbit():
    sys2 = G.RotSystem.kepler(2.0)
    d = D.hamiltonian_rhs(sys2, D.OrbitState(0.5, 0.0, 0.0, 1 / math.sqrt(2)))
    assert d[0] == 0.0
    assert abs(d[2]) < 1e-13


def test_rhs_theta_dot():
    sys1 = G.RotSystem.kepler(1.0)
    d = D.hamiltonian_rhs(sys1, D.OrbitState(1.0, 0.0, 0.0, 0.5))
    assert d[1] == pytest.approx(0.5, rel=1e-15)


def test_rhs_finite_difference_gradient():
    f = bump_profile()
    phi = P.ProjectiveProfile(J.scaled(J.polynomial([0, 0, 1]), 0.25), 2.0)
    sysd = G.RotSystem.build(2.0, f, phi)
    st = D.OrbitState(0.63, 0.2, 0.11, 0.4)
    d = D.hamiltonian_rhs(sysd, st)
    eps = 1e-6

    def H(rho, pr, pth):
        return D.hamiltonian(sysd, D.OrbitState(rho, 0.0, pr, pth))

    drho_fd = (H(st.rho, st.p_rho + eps, st.p_theta)
               - H(st.rho, st.p_rho - eps, st.p_theta)) / (2 * eps)
    dpr_fd = -(H(st.rho + eps, st.p_rho, st.p_theta)
               - H(st.rho - eps, st.p_rho, st.p_theta)) / (2 * eps)
    assert abs(d[0] - drho_fd) < 1e-7
    assert abs(d[2] - dpr_fd) < 1e-7
    assert d[3] == 0.0


# -- orbit integration ---------------------------------------------------------

def test_kepler_orbit_closes():
    sys2 = G.RotSystem.kepler(2.0)
    tr = D.integrate_orbit(sys2, 0.5, 1)
    assert abs(tr.delta_thetas[0] - TWO_PI) < 1e-6
    # physical Kepler period 2 pi h^{-3/2}
    assert tr.perihelion_times[0] == pytest.approx(TWO_PI * 2.0 ** -1.5, rel=1e-9)
    # JM length per radial period is 2 pi / sqrt(h)
    assert tr.jm_lengths[0] == pytest.approx(TWO_PI / math.sqrt(2), rel=1e-9)


def test_circular_limit_rejected():
    with pytest.raises(DomainError):
        D.integrate_orbit(G.RotSystem.kepler(2.0), 1 / math.sqrt(2))


def test_conservation_along_trace():
    f = bump_profile()
    sysd = G.RotSystem.build(2.0, f)
    tr = D.integrate_orbit(sysd, 0.4, 2)
    assert tr.energy_drift < 1e-9
    assert tr.p_theta_drift == 0.0
    assert len(tr.perihelion_times) == 2


def test_deformed_orbit_matches_quadrature():
    f = bump_profile()
    sysd = G.RotSystem.build(2.0, f)
    bes = G.to_besse(f, 2.0)
    for p in (0.3, 0.55):
        tr = D.integrate_orbit(sysd, p, 1)
        c = D.ptheta_to_clairaut(2.0, p)
        dq = D.return_angle_quadrature(bes, c)
        assert abs(tr.delta_thetas[0] - dq) < 1e-5


def test_method_agreement_property():
    rng = np.random.default_rng(31)
    h = 1.4
    f = P.random_odd_profile(rng, amplitude=0.12)
    sysd = G.RotSystem.build(h, f)
    bes = G.to_besse(f, h)
    for c in D.default_c_grid(8):
        tr = D.integrate_orbit(sysd, float(c) / math.sqrt(h), 1)
        dq = D.return_angle_quadrature(bes, float(c))
        assert abs(tr.delta_thetas[0] - dq) < 1e-5
        # normal-form period via sqrt(h) * JM length
        assert abs(math.sqrt(h) * tr.jm_lengths[0] - TWO_PI) < 1e-5


def test_projective_invariance():
    # same geometric orbit for phi = 0 and phi = rho^2/4, compared at
    # matched JM arclength
    f = bump_profile()
    p_theta = 0.35
    tr0 = D.integrate_orbit(G.RotSystem.build(2.0, f), p_theta, 1)
    phi = P.ProjectiveProfile(J.scaled(J.polynomial([0, 0, 1]), 0.25), 2.0)
    tr1 = D.integrate_orbit(G.RotSystem.build(2.0, f, phi), p_theta, 1)
    smax = 0.999 * min(tr0.jm_lengths[0], tr1.jm_lengths[0])
    grid = np.linspace(1e-3, smax, 200)
    pts0 = tr0.sample_at_jm_length(grid)
    pts1 = tr1.sample_at_jm_length(grid)
    assert float(np.max(np.linalg.norm(pts0 - pts1, axis=1))) < 1e-6


# -- scans ---------------------------------------------------------------------

def test_zoll_scan_kepler_quadrature():
    rep = D.zoll_scan(G.RotSystem.kepler(2.0), 32, "quadrature")
    assert rep.is_zoll
    assert rep.max_dtheta_dev < 1e-9 and rep.max_period_dev < 1e-9
    assert rep.status == "complete"
    # grid strictly interior
    assert rep.c_grid.min() > 0.02 and rep.c_grid.max() < 0.98


def test_zoll_scan_even_perturbation_fails():
    rep = D.zoll_scan(even_perturbed_besse(), 16, "quadrature")
    assert not rep.is_zoll
    assert rep.max_dtheta_dev > 1e-3


def test_zoll_scan_odd_profile_without_endpoint_conditions():
    # x(1-x^2)^2 violates the origin-smoothness conditions but the flow on
    # the punctured plane is still Zoll: oddness is what the scan sees
    f = P.DeformationProfile(J.polynomial([0, 1, 0, -2, 0, 1]).with_domain(-1, 1))
    rep = D.zoll_scan(G.to_besse(f, 2.0), 16, "quadrature")
    assert rep.is_zoll
    from zollkep.profiles import check_boundary_conditions_f
    assert not check_boundary_conditions_f(f, K=1).all_passed


def test_zoll_scan_integration_method():
    f = bump_profile()
    rep = D.zoll_scan(G.RotSystem.build(2.0, f), 8, "integration")
    assert rep.is_zoll
    assert rep.energy_drift < 1e-9
    assert rep.p_theta_grid is not None


def test_zoll_scan_grid_precondition():
    with pytest.raises(ValueError):
        D.zoll_scan(G.RotSystem.kepler(2.0), 4, "quadrature")


def test_zoll_scan_reports_sample_failures():
    # a profile whose b cannot be evaluated across the full argument range
    # marks the report failed with the offending samples
    narrow = J.product_of(J.polynomial([0, 1]),
                          J.reciprocal(J.polynomial([1, 0, 0]), (-0.5, 0.5)))
    rep = D.zoll_scan(G.BesseProfile(narrow, 1.0), 8, "quadrature")
    assert rep.failures
    assert rep.status == "failed"
    assert not rep.is_zoll
    assert all(0.02 < c < 0.98 for c, _ in rep.failures)


def test_scaling_jm_length():
    for h in (1.0, 2.0, 5.0):
        rep = D.zoll_scan(G.RotSystem.kepler(h), 8, "quadrature")
        assert np.all(np.abs(rep.jm_length_per_period - TWO_PI / math.sqrt(h)) < 1e-9)
