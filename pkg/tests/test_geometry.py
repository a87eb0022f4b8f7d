"""Charts, the radial kinetic coefficient, and the JM metric."""

import math

import numpy as np
import pytest
import sympy as sp

from zollkep import jets as J
from zollkep import profiles as P
from zollkep import geometry as G
from zollkep.errors import DomainError, InadmissibleProfileError


def bump_profile(amp=0.05):
    fn = J.scaled(J.antisymmetrize(J.normalized_bump(0.1, 0.4)), amp)
    return P.DeformationProfile(fn.with_domain(-1.0, 1.0))


def test_rho_to_r_examples():
    assert G.rho_to_r(2, 0) == 0.0
    assert G.rho_to_r(2, 0.5) == pytest.approx(math.pi / 2, abs=1e-15)
    assert G.rho_to_r(1, 2) == pytest.approx(math.pi, abs=1e-15)
    with pytest.raises(DomainError):
        G.rho_to_r(2, 1.5)


def test_chart_roundtrip():
    rng = np.random.default_rng(5)
    for h in (1.0, 2.0, 5.0):
        for rho in rng.uniform(0, 2 / h, 50):
            assert abs(G.r_to_rho(h, G.rho_to_r(h, float(rho))) - rho) < 1e-14


def test_metric_coeff_B_basic():
    assert G.metric_coeff_B(2.0, P.zero_profile(), 0.7, 3).coeffs == (1.0, 0, 0, 0)
    f = bump_profile()
    # argument 0.8 is outside the profile support
    assert G.metric_coeff_B(2.0, f, 0.1, 2).coeffs == (1.0, 0.0, 0.0)
    # at rho = 1/2, h = 2 the argument is 0 and B = 1 + f(0)/1
    v = f.fn(0.0)
    assert G.metric_coeff_B(2.0, f, 0.5, 0).value == pytest.approx(1.0 + v, rel=1e-14)


def test_metric_coeff_B_hill_boundary_jet():
    # removable 0/0 at rho = 2/h via the shifted division; symbolic oracle
    f = P.DeformationProfile(J.polynomial([0, 1, 0, -2, 0, 1]).with_domain(-1, 1))
    jB = G.metric_coeff_B(2.0, f, 1.0, 3)
    rho = sp.Symbol("rho")
    x = 1 - 2 * rho
    B_sym = 1 + (x * (1 - x**2) ** 2) / (2 - 2 * rho)
    B_sym = sp.simplify(B_sym)
    for k in range(4):
        ref = float(sp.diff(B_sym, rho, k).subs(rho, 1))
        assert jB.coeffs[k] == pytest.approx(ref, rel=1e-12, abs=1e-12)


def test_metric_coeff_B_inadmissible():
    f = P.DeformationProfile(J.scaled(J.antisymmetrize(J.normalized_bump(0.1, 0.9)),
                                      -3.0).with_domain(-1, 1))
    with pytest.raises(InadmissibleProfileError):
        # strong negative deformation drives B <= 0 somewhere
        for rho in np.linspace(0.05, 0.95, 181):
            G.metric_coeff_B(1.99, f, float(rho), 0)


def test_jm_metric_values():
    m = G.jm_metric(2.0, P.zero_profile(), 0.5)
    assert (m.g_rr, m.g_thth) == (2.0, 0.5)
    m = G.jm_metric(1.0, P.zero_profile(), 1.0)
    assert (m.g_rr, m.g_thth) == (1.0, 1.0)
    with pytest.raises(DomainError):
        G.jm_metric(2.0, P.zero_profile(), 1.0)  # Hill boundary degenerate


def test_jm_hill_degeneracy_identity():
    f = bump_profile()
    h = 2.0
    for eps in (1e-2, 1e-4, 1e-7):
        m = G.jm_metric(h, f, 2 / h - eps)
        assert m.g_thth == pytest.approx(h * eps * (2 / h - eps), rel=1e-9)


def test_to_besse():
    assert G.to_besse(P.zero_profile()).b(0.37) == pytest.approx(0.37, abs=1e-15)
    f = bump_profile()
    bes = G.to_besse(f, h=2.0)
    assert bes.b(0.25) == pytest.approx(0.25 + f.fn(0.25), rel=1e-14)
    # b = 0 (round sphere) is admissible even though f = -id is not a valid
    # deformation profile; construction flags nothing
    minus_id = P.DeformationProfile(J.polynomial([0, -1]).with_domain(-1, 1))
    bes0 = G.to_besse(minus_id)
    assert bes0.b(0.3) == pytest.approx(0.0, abs=1e-15)
    # a profile pushing 1 + b below zero is rejected
    bad = P.DeformationProfile(J.polynomial([0, -3]).with_domain(-1, 1))
    with pytest.raises(InadmissibleProfileError):
        G.to_besse(bad)


def test_chart_consistency_property():
    f = bump_profile()
    bes = G.to_besse(f, h=2.0)
    rng = np.random.default_rng(1)
    for rho in rng.uniform(1e-3, 1 - 1e-3, 100):
        r = G.rho_to_r(2.0, float(rho))
        nf = G.besse_metric_sample(bes, r)
        jm = G.jm_metric(2.0, f, float(rho))
        drdrho = 2.0 / math.sin(r)
        assert nf.g_rr * drdrho**2 == pytest.approx(jm.g_rr, rel=1e-12)
        assert nf.g_thth == pytest.approx(jm.g_thth, rel=1e-12)


def test_lagrangian_terms():
    sys2 = G.RotSystem.kepler(2.0)
    lt = G.lagrangian_terms(sys2, 1.0)
    assert (lt.kin_rr, lt.kin_thth, lt.potential) == (1.0, 1.0, 0.0)
    assert G.lagrangian_terms(sys2, 0.5).potential == 1.0
    phi = P.ProjectiveProfile(J.polynomial([0, 0, 1]), 2.0)
    lt = G.lagrangian_terms(G.RotSystem.build(2.0, phi=phi), 0.5)
    assert lt.potential == pytest.approx(math.exp(0.25), rel=1e-14)
    with pytest.raises(DomainError):
        G.lagrangian_terms(sys2, 0.0)


def test_phi_independence_of_jm():
    # the JM metric built from the Lagrangian terms 2 * potential * kinetic
    # is the same for any projective profile
    f = bump_profile()
    phis = [None, P.ProjectiveProfile(J.scaled(J.polynomial([0, 0, 1]), 0.25), 2.0),
            P.ProjectiveProfile(J.polynomial([0.3, 0, -0.1]), 2.0)]
    rng = np.random.default_rng(3)
    rhos = rng.uniform(0.05, 0.95, 25)
    base = None
    for phi in phis:
        sys_ = G.RotSystem.build(2.0, f, phi)
        vals = np.array([[2 * G.lagrangian_terms(sys_, float(r)).potential
                          * G.lagrangian_terms(sys_, float(r)).kin_rr,
                          2 * G.lagrangian_terms(sys_, float(r)).potential
                          * G.lagrangian_terms(sys_, float(r)).kin_thth]
                         for r in rhos])
        if base is None:
            base = vals
        else:
            assert np.allclose(vals, base, rtol=1e-12, atol=1e-14)
    # and jm_metric never reads phi at all
    jm = [G.jm_metric(2.0, f, float(r)).g_rr for r in rhos]
    assert np.allclose(jm, base[:, 0], rtol=1e-12)


def test_rotsystem_invariants():
    sys_ = G.RotSystem.kepler(2.5)
    assert sys_.hill_radius == pytest.approx(0.8)
    with pytest.raises(ValueError):
        G.RotSystem.kepler(-1.0)
