"""Closed-form model family: horizon roots, surface gravity, areas."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import kottlerlab as kl
from kottlerlab import models
from kottlerlab.errors import DomainError, MassOutOfRange

M_CRIT = kl.M_CRIT
R_CRIT = kl.R_CRIT


def bisect_root(f, a, b, iterations=200):
    """Plain bisection; the independent root oracle for these tests."""
    fa = f(a)
    for _ in range(iterations):
        c = 0.5 * (a + b)
        fc = f(c)
        if fa * fc <= 0:
            b = c
        else:
            a, fa = c, fc
    return 0.5 * (a + b)


# ------------------------------------------------------------- horizon root

def test_horizon_radius_zero_mass_is_one():
    # x^3 - x = 0 forces x = 1 on the admissible branch
    assert kl.horizon_radius(-1, 0.0) == 1.0


def test_horizon_radius_critical_double_root():
    assert kl.horizon_radius(-1, M_CRIT) == R_CRIT
    assert abs(R_CRIT - 0.5773503) < 5e-8


def test_horizon_radius_against_bisection_oracle():
    oracle = bisect_root(lambda x: x**3 - x + 0.2, R_CRIT, 2.0)
    assert abs(kl.horizon_radius(-1, -0.1) - oracle) < 1e-13
    assert abs(oracle - 0.87888506624997283) < 1e-12


@pytest.mark.parametrize("m", [-0.05, -0.15, M_CRIT + 1e-4, 0.3, 1.7])
def test_horizon_radius_solves_the_cubic(m):
    r = kl.horizon_radius(-1, m)
    assert abs(-r + r**3 - 2.0 * m) < 1e-12
    assert r > 0


@pytest.mark.parametrize("kappa,m", [(0, 0.5), (1, 0.5), (1, 2.0)])
def test_horizon_radius_other_curvatures(kappa, m):
    r = kl.horizon_radius(kappa, m)
    assert abs(kappa * r + r**3 - 2.0 * m) < 1e-12 * max(1.0, r**3)


@pytest.mark.parametrize("kappa,m", [(-1, M_CRIT - 1e-3), (-1, -0.5), (0, 0.0),
                                     (0, -1.0), (1, -0.2)])
def test_inadmissible_masses_rejected(kappa, m):
    with pytest.raises(MassOutOfRange):
        kl.horizon_radius(kappa, m)


@settings(max_examples=80, deadline=None)
@given(st.floats(min_value=M_CRIT, max_value=2.0))
def test_root_residual_property(m):
    r = kl.horizon_radius(-1, m)
    assert abs(-r + r**3 - 2.0 * m) < 1e-12 * max(1.0, abs(2 * m))


# ------------------------------------------------------ metric coefficient

def test_metric_coefficient_values():
    model = kl.KottlerModel.create(-1, 0.0)
    assert kl.metric_coefficient(model, 1.0) == 0.0
    assert abs(kl.metric_coefficient(model, 2.0) - 3.0) < 1e-14
    model2 = kl.KottlerModel.create(-1, -0.1)
    assert abs(kl.metric_coefficient(model2, 2.0) - 3.1) < 1e-14


def test_metric_coefficient_below_horizon_rejected():
    model = kl.KottlerModel.create(-1, 0.0)
    with pytest.raises(DomainError):
        kl.metric_coefficient(model, 0.9)


def test_metric_coefficient_matches_naive_form_away_from_horizon():
    model = kl.KottlerModel.create(-1, -0.12)
    r = np.linspace(1.2, 30.0, 200)
    naive = -1.0 + r**2 + 0.24 / r
    assert np.max(np.abs(model.f(r) - naive) / naive) < 1e-14


def test_monotone_coefficient_derivative_positive():
    # f'(r) = 2r + 2m/r^2 > 0 beyond the horizon on the nonpositive branch
    for m in (-0.05, -0.19, M_CRIT + 1e-6):
        r_h = kl.horizon_radius(-1, m)
        r = np.linspace(r_h * (1 + 1e-9), 10.0, 300)
        assert np.all(2 * r + 2 * m / r**2 > 0)


# ------------------------------------------------------------ gradient norm

def test_gradient_norm_values():
    assert abs(kl.gradient_norm_sq(0.0, 1.0) - 1.0) < 1e-14
    assert kl.gradient_norm_sq(M_CRIT, R_CRIT) < 1e-25
    assert abs(kl.gradient_norm_sq(-0.1, 2.0) - 3.900625) < 1e-14


def test_gradient_norm_matches_finite_difference_of_u():
    # |grad u|^2 = f * (du/dr)^2; independent central-difference check
    m = -0.1
    model = kl.KottlerModel.create(-1, m)
    for r in (1.3, 2.0, 5.0):
        h = 1e-6
        du = (model.u(r + h) - model.u(r - h)) / (2 * h)
        w_fd = model.f(r) * du**2
        w = kl.gradient_norm_sq(m, r)
        assert abs(w_fd - w) < 1e-7 * max(1.0, w)


# ---------------------------------------------------------- surface gravity

def test_surface_gravity_values():
    assert kl.surface_gravity(-1, 0.0) == 1.0
    # the snapped double root leaves a consistent ~2e-16 residue, not an exact 0
    assert 0.0 <= kl.surface_gravity(-1, M_CRIT) < 1e-14
    # frozen from the bisection oracle for r_h(-0.1)
    assert abs(kl.surface_gravity(-1, -0.1) - 0.74942499856800708) < 1e-12


def test_surface_gravity_two_formulas_agree():
    for m in (-0.02, -0.1, -0.18):
        r = kl.horizon_radius(-1, m)
        assert abs(kl.surface_gravity(-1, m) - (r**3 + m) / r**2) < 1e-13


def test_degeneracy_iff_cubic_factor_vanishes():
    r = kl.horizon_radius(-1, M_CRIT)
    assert abs(r**3 + M_CRIT) < 1e-15
    model = kl.KottlerModel.create(-1, M_CRIT)
    assert model.horizon.degenerate
    assert not kl.KottlerModel.create(-1, M_CRIT + 1e-4).horizon.degenerate


# ----------------------------------------------------- gravity <-> mass map

def test_mass_from_surface_gravity_endpoints():
    assert kl.mass_from_surface_gravity(1.0) == 0.0
    assert kl.mass_from_surface_gravity(0.0) == M_CRIT


def test_mass_from_surface_gravity_half():
    # closed form vs the bisection-in-mass oracle
    oracle = bisect_root(lambda m: kl.surface_gravity(-1, m) - 0.5, M_CRIT, 0.0)
    got = kl.mass_from_surface_gravity(0.5)
    assert abs(got - oracle) < 1e-12
    assert abs(got - (-0.15766441090111062)) < 1e-13


def test_mass_from_surface_gravity_rejects_outside_unit_interval():
    for k in (-0.1, 1.0001, 2.0):
        with pytest.raises(DomainError):
            kl.mass_from_surface_gravity(k)


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=0.01, max_value=1.0))
def test_bijection_roundtrip_property(k):
    # k -> m -> k; near the degenerate end the k-resolution of a double mass
    # is only sqrt(eps), so the property is asserted away from k = 0
    m = kl.mass_from_surface_gravity(k)
    assert M_CRIT <= m <= 0.0
    assert abs(kl.surface_gravity(-1, m) - k) < 1e-10


def test_mass_roundtrip_on_grid():
    for m in np.linspace(M_CRIT, 0.0, 101):
        k = kl.surface_gravity(-1, m)
        assert abs(kl.mass_from_surface_gravity(k) - m) < 1e-12


def test_surface_gravity_strictly_increasing_in_mass():
    mgrid = np.linspace(M_CRIT, 0.0, 200)
    k = np.array([kl.surface_gravity(-1, m) for m in mgrid])
    assert np.all(np.diff(k) > 0)
    assert k[0] < 1e-14 and k[-1] == 1.0


# ------------------------------------------------------------------- areas

def test_model_horizon_area_values():
    assert abs(kl.model_horizon_area(0.0, 2) - 4 * math.pi) < 1e-13
    assert abs(kl.model_horizon_area(M_CRIT, 2) - 4 * math.pi / 3) < 1e-13
    r = bisect_root(lambda x: x**3 - x + 0.2, R_CRIT, 2.0)
    assert abs(kl.model_horizon_area(-0.1, 3) - 8 * math.pi * r**2) < 1e-10


def test_area_scales_linearly_in_genus():
    vals = [kl.model_horizon_area(-0.1, g) / (g - 1) for g in (2, 3, 5, 9)]
    assert max(vals) - min(vals) < 1e-12


def test_model_horizon_area_rejects_low_genus():
    with pytest.raises(DomainError):
        kl.model_horizon_area(-0.1, 1)
    with pytest.raises(DomainError):
        kl.genus_quotient_area(1)


def test_kappa_zero_model_area_undefined():
    model = kl.KottlerModel.create(0, 0.5)
    assert model.horizon.area is None
    assert model.genus == 1


def test_genus_pairing_enforced():
    with pytest.raises(DomainError):
        kl.KottlerModel.create(-1, 0.0, genus=1)
    with pytest.raises(DomainError):
        kl.KottlerModel.create(1, 0.5, genus=2)


# ------------------------------------------------------- arclength machinery

def test_arclength_against_adaptive_quadrature():
    from scipy.integrate import quad

    model = kl.KottlerModel.create(-1, -0.1)
    r_h = model.horizon.radius
    for r in (1.2, 2.7, 8.0):
        oracle, _ = quad(lambda x: 1.0 / math.sqrt(-1 + x * x + 0.2 / x),
                         r_h, r, points=[r_h], limit=200)
        got = models.arclength_coordinate(model, np.array([r]))[0]
        assert abs(got - oracle) < 1e-9


def test_radius_from_arclength_roundtrip():
    model = kl.KottlerModel.create(-1, kl.mass_from_surface_gravity(0.25))
    s = np.concatenate([[1e-4, 1e-3, 1e-2], np.linspace(0.1, 6.0, 40)])
    r = models.radius_from_arclength(model, s)
    back = models.arclength_coordinate(model, r)
    assert np.max(np.abs(back - s)) < 1e-8


def test_arclength_rejects_degenerate_model():
    model = kl.KottlerModel.create(-1, M_CRIT)
    with pytest.raises(DomainError):
        models.arclength_coordinate(model, np.array([1.0]))
