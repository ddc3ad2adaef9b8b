"""Divergence identity, flux limits, area bounds, gradient comparison."""

import json
import math

import numpy as np
import pytest

import kottlerlab as kl
from kottlerlab import AnnulusSpec, RadialProfile, identities
from kottlerlab.errors import DomainError

M_CRIT = kl.M_CRIT
R_CRIT = kl.R_CRIT
FOUR_PI = 4.0 * math.pi


def profile(m, r_max=10.0, genus=2, n=512):
    return RadialProfile.from_model(m, genus=genus, r_max=r_max, n=n)


def annulus(m, m0, r_hi=5.0, genus=2, r_max=10.0):
    prof = profile(m, r_max=r_max, genus=genus)
    r_h = kl.horizon_radius(-1, m)
    return AnnulusSpec(profile=prof, r_lo=r_h * (1 + 1e-6), r_hi=r_hi,
                       comparison_mass=m0)


# ------------------------------------------------------------ flux integral

def test_flux_matched_massless_is_4pi_at_any_radius():
    spec = annulus(0.0, 0.0)
    for R in (1.5, 3.0, 10.0):
        assert abs(kl.flux_integral(spec, R) - FOUR_PI) < 1e-12


def test_flux_matched_critical_is_4pi():
    spec = annulus(M_CRIT, M_CRIT, r_hi=2.0)
    assert abs(kl.flux_integral(spec, 2.0) - FOUR_PI) < 1e-9


def test_flux_mismatched_approaches_4pi():
    m0 = kl.mass_from_surface_gravity(0.5)
    spec = annulus(-0.1, m0, r_max=12.0)
    dev10 = abs(kl.flux_integral(spec, 10.0) - FOUR_PI)
    # the deviation decays like 4(m - m0)/R^3
    expected = FOUR_PI * 4.0 * abs(-0.1 - m0) / 1000.0
    assert dev10 < 2.0 * expected
    assert dev10 > 0.2 * expected


def test_flux_outside_grid_rejected():
    spec = annulus(0.0, 0.0)
    with pytest.raises(DomainError):
        kl.flux_integral(spec, 11.0)


def test_flux_constancy_iff_matched():
    radii = (1.5, 3.0, 10.0)
    spec = annulus(-0.1, -0.1)
    fluxes = [kl.flux_integral(spec, R) for R in radii]
    assert (max(fluxes) - min(fluxes)) / FOUR_PI < 1e-10
    spec2 = annulus(-0.1, kl.mass_from_surface_gravity(0.5))
    fluxes2 = [kl.flux_integral(spec2, R) for R in radii]
    assert (max(fluxes2) - min(fluxes2)) / FOUR_PI > 1e-10


# ------------------------------------------------------------ bulk integral

def test_bulk_matched_vanishes():
    assert abs(kl.bulk_integral(annulus(0.0, 0.0))) < 1e-10
    assert abs(kl.bulk_integral(annulus(-0.15, -0.15))) < 1e-10


def test_bulk_equals_flux_difference_mismatched():
    m0 = kl.mass_from_surface_gravity(0.5)
    spec = annulus(-0.1, m0)
    lhs = kl.flux_integral(spec, 5.0) - kl.flux_integral(spec, spec.r_lo)
    assert abs(kl.bulk_integral(spec) - lhs) < 1e-7


def test_bulk_sign_matches_pointwise_sign():
    """Comparing with a lower mass makes W0 - W pointwise negative here."""
    m, m0 = -0.1, kl.mass_from_surface_gravity(0.5)
    spec = annulus(m, m0)
    model = kl.KottlerModel.create(-1, m)
    pr = kl.PseudoRadialMap(m0)
    r = np.linspace(spec.r_lo, spec.r_hi, 200)
    w = model.sqrt_w(r) ** 2
    w0 = pr.model_gradient_many(model.u(r))
    assert np.all(w0 - w < 0)
    assert kl.bulk_integral(spec) < 0


def test_bulk_against_adaptive_quadrature_oracle():
    """Cross-check one mismatched bulk integral with an independent integrator."""
    from scipy.integrate import quad

    m, m0 = -0.05, -0.15
    spec = annulus(m, m0, r_hi=4.0)
    model = kl.KottlerModel.create(-1, m)
    pr = kl.PseudoRadialMap(m0)

    def density(r):
        u = float(model.u(np.array([r]))[0])
        w = float(model.sqrt_w(np.array([r]))[0]) ** 2
        psi = pr.evaluate(u)
        q = psi**3 + m0
        w0 = (q / psi**2) ** 2
        return psi**4 / q**3 * (w0 - w) * 3.0 * r * r

    oracle, err = quad(density, spec.r_lo, spec.r_hi, limit=200)
    got = kl.bulk_integral(spec) / FOUR_PI
    assert abs(got - oracle) < max(1e-9, 10 * err)


def test_bulk_annulus_outside_grid_rejected():
    prof = profile(-0.1)
    with pytest.raises(DomainError):
        kl.bulk_integral(AnnulusSpec(profile=prof, r_lo=0.5, r_hi=5.0,
                                     comparison_mass=-0.1))


def test_annulus_spec_validation():
    prof = profile(-0.1)
    with pytest.raises(DomainError):
        AnnulusSpec(profile=prof, r_lo=3.0, r_hi=2.0, comparison_mass=-0.1)
    with pytest.raises(DomainError):
        AnnulusSpec(profile=prof, r_lo=1.0, r_hi=2.0, comparison_mass=0.2)
    spec = AnnulusSpec(profile=prof, r_lo=1.0, r_hi=2.0, comparison_mass=-0.1)
    assert spec.quadrature_points == 2048


# ----------------------------------------------------- divergence identity

@pytest.mark.parametrize("m", (0.0, -0.1, M_CRIT))
@pytest.mark.parametrize("m0", (0.0, -0.15, M_CRIT))
def test_divergence_identity_pairs(m, m0):
    rep = kl.divergence_identity_check(annulus(m, m0))
    assert rep.passed
    assert abs(rep.residual) <= 1e-7 * (1 + abs(rep.lhs))


def test_divergence_refinement_gains_factor_eight():
    spec = annulus(-0.1, kl.mass_from_surface_gravity(0.5))
    lhs = kl.flux_integral(spec, 5.0) - kl.flux_integral(spec, spec.r_lo)
    resid = [abs(lhs - kl.bulk_integral(spec, panels=p, nodes=2))
             for p in (8, 16, 32, 64)]
    floor = 1e-12 * (1 + abs(lhs))
    for a, b in zip(resid[:-1], resid[1:]):
        if a <= floor:
            break
        assert a / max(b, 1e-300) >= 8.0


def test_flux_probe_sequence_critical():
    prof = profile(M_CRIT)
    fluxes = kl.flux_probe_sequence(prof, M_CRIT)
    for f in fluxes:
        assert abs(f - FOUR_PI) < 1e-7 * FOUR_PI


# ----------------------------------------------------------- limit and bounds

def test_flux_limit_closed_form():
    prof = profile(0.0, r_max=55.0)
    rep = kl.flux_limit_check(prof, 0.0)
    assert rep.passed
    assert abs(rep.lhs - FOUR_PI) < 1e-10


def test_flux_limit_genus_scaling():
    prof = RadialProfile.from_model(0.0, genus=3, r_max=55.0, n=512)
    rep = kl.flux_limit_check(prof, 0.0)
    assert rep.passed and abs(rep.rhs - 8 * math.pi) < 1e-12


def test_flux_limit_needs_long_profile():
    with pytest.raises(DomainError):
        kl.flux_limit_check(profile(0.0, r_max=20.0), 0.0)


def test_area_bound_check_equality_and_violation():
    for m0 in (0.0, -0.1, M_CRIT):
        rep = kl.area_bound_check(kl.model_horizon_area(m0, 2), 2, m0)
        assert rep.passed and abs(rep.residual) < 1e-9
    bad = kl.area_bound_check(kl.model_horizon_area(-0.1, 2) * 0.99, 2, -0.1)
    assert not bad.passed
    with pytest.raises(DomainError):
        kl.area_bound_check(1.0, 1, -0.1)


def test_mono_check_margins_and_rigidity_flag():
    rep = kl.mono_check(FOUR_PI, 2)
    assert rep.passed and rep.inputs_digest["rigidity_case"]
    rep2 = kl.mono_check(FOUR_PI * 1.5, 2)
    assert rep2.passed and not rep2.inputs_digest["rigidity_case"]
    assert abs(rep2.residual - 2 * math.pi) < 1e-12
    assert not kl.mono_check(FOUR_PI * 0.9, 2).passed


# ------------------------------------------------------- gradient comparison

def test_gradient_comparison_matched_model():
    rep = kl.gradient_comparison(profile(-0.1), -0.1)
    assert rep.passed and rep.lhs <= 1e-8


def test_gradient_comparison_detects_inflation():
    base = profile(-0.1)
    du = base.du.copy()
    i = 300
    du[i] *= 1.005  # inflates W at one sample by ~1%
    bad = RadialProfile.from_arrays("area_radius", base.grid, base.u, base.rho,
                                    -1, 2, du=du, drho=base.drho,
                                    source_kind="ode")
    rep = kl.gradient_comparison(bad, -0.1)
    assert not rep.passed
    assert abs(rep.inputs_digest["sup_location"] - base.grid[i]) < 1e-12


# -------------------------------------------------- asymptotic W difference

def test_asymptotic_w_difference_matched_and_mismatched():
    prof = profile(-0.1, r_max=55.0, n=1024)
    assert kl.asymptotic_w_difference(prof, -0.1, -1.0).passed
    rep = kl.asymptotic_w_difference(prof, kl.mass_from_surface_gravity(0.5), -1.0)
    assert rep.passed
    assert rep.lhs < 0.05


def test_asymptotic_w_difference_rejects_other_curvature():
    prof = profile(-0.1, r_max=55.0)
    with pytest.raises(DomainError):
        kl.asymptotic_w_difference(prof, -0.1, -0.5)


# -------------------------------------------------------------- expansion fit

def test_expansion_fit_massless_matches_taylor():
    # u = sqrt(r^2 - 1) = r - 1/(2r) + O(r^-3)
    a, b, rms = kl.expansion_fit(profile(0.0, r_max=60.0, n=2048))
    assert abs(a - 1.0) < 1e-3
    assert abs(b + 0.5) < 1e-3
    assert rms < 1e-5


def test_expansion_fit_with_mass():
    a, b, rms = kl.expansion_fit(profile(-0.1, r_max=60.0, n=2048))
    assert abs(a - 1.0) < 1e-3
    assert abs(b + 0.5) < 1e-3


def test_expansion_fit_detects_shifted_potential():
    base = profile(-0.1, r_max=60.0, n=2048)
    shifted = RadialProfile.from_arrays(
        "area_radius", base.grid, base.u + 0.5, base.rho, -1, 2,
        du=base.du, drho=base.drho, source_kind="ode")
    _, _, rms = kl.expansion_fit(shifted)
    assert rms > 1e-3


def test_expansion_fit_needs_tail():
    with pytest.raises(DomainError):
        kl.expansion_fit(profile(-0.1, r_max=30.0))


# ----------------------------------------------------------- report records

def test_report_json_roundtrip_and_nan_encoding():
    rep = identities.equality_report("demo", float("nan"), 1.0, 1e-6,
                                     {"note": float("inf")})
    d = rep.to_json_dict()
    assert d["lhs"] == "nan"
    assert d["finite"] is False
    assert d["inputs_digest"]["note"] == "inf"
    text = json.dumps(d, sort_keys=True)
    assert "NaN" not in text and "Infinity" not in text
    rep2 = identities.lower_bound_report("bound", 2.0, 1.0, 0.0)
    d2 = rep2.to_json_dict()
    assert d2["passed"] is True and d2["residual"] == 1.0
    assert d2["inputs_digest"]["orientation"] == "one_sided_lower"
