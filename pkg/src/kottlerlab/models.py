"""Closed-form static vacuum models with cosmological constant -3.

The model family lives on M = [r_h, oo) x Sigma_kappa with

    g = dr (x) dr / f(r) + r^2 g_Sigma,      u = sqrt(f(r)),
    f(r) = kappa + r^2 - 2 m / r,

where Sigma_kappa is a compact surface of constant curvature kappa in
{-1, 0, +1} and r_h is the largest positive root of the horizon cubic
kappa*x + x^3 - 2m = 0.  For kappa = -1 the mass ranges over
m >= m_crit = -1/(3*sqrt(3)); at the critical mass the cubic has a double
root r = 1/sqrt(3) and the horizon degenerates (vanishing surface gravity).
For kappa in {0, +1} only m > 0 is admissible.

Numerical notes
---------------
Near-horizon evaluations of f(r) and r^3 + m suffer catastrophic
cancellation in the naive forms once r - r_h is small.  The module therefore
uses the factored forms

    f(r)    = (r - r_h) * (r^2 + r_h*r + r_h^2 + kappa) / r
    r^3 + m = (r - r_h) * (r^2 + r_h*r + r_h^2) + k * r_h^2

(k the surface gravity), which agree with the naive expressions to round-off
but stay fully accurate through the near-critical regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, DomainError, MassOutOfRange

# Critical parameters of the kappa = -1 branch.
M_CRIT = -1.0 / (3.0 * math.sqrt(3.0))
R_CRIT = 1.0 / math.sqrt(3.0)

# |3 r^2 + kappa| below this at the converged root means the double root.
_DOUBLE_ROOT_SNAP = 1.0e-8
# Surface gravities below this mark a degenerate horizon.
_GRAVITY_FLOOR = 1.0e-15


def _check_mass(kappa: int, m: float) -> None:
    if kappa == -1:
        if m < M_CRIT - 1.0e-13:
            raise MassOutOfRange(
                f"kappa=-1 requires mass >= -1/(3*sqrt(3)) = {M_CRIT:.17g}; got {m:.17g}"
            )
    elif kappa in (0, 1):
        if m <= 0.0:
            raise MassOutOfRange(f"kappa={kappa} requires mass > 0; got {m:.17g}")
    else:
        raise DomainError(f"kappa must be one of -1, 0, +1; got {kappa}")


def horizon_radius(kappa: int, m: float) -> float:
    """Largest positive root of the horizon cubic kappa*x + x^3 - 2m = 0.

    Bracketed Newton with bisection fallback; the bracket lower end sits just
    above cbrt(-m), past the interior minimum of the cubic, so the iteration
    always converges to the outermost root.  At the critical mass the double
    root is detected through |3 r^2 + kappa| and snapped to the closed form
    1/sqrt(3).

    Relative accuracy is 1e-14 away from the critical mass; within ~1e-12 of
    it the root problem itself is ill-conditioned (double root) and the
    returned value is accurate to the O(sqrt(eps)) conditioning limit.
    """
    _check_mass(kappa, m)
    if kappa == -1 and m <= M_CRIT + 1.0e-15:
        return R_CRIT
    if kappa == 0:
        return float(np.cbrt(2.0 * m))

    def p(x: float) -> float:
        return kappa * x + x * x * x - 2.0 * m

    def dp(x: float) -> float:
        return kappa + 3.0 * x * x

    if kappa == -1:
        lo = max(np.cbrt(-m) * (1.0 + 1.0e-9), 1.0e-12) if m < 0.0 else 1.0 - 1.0e-12
        hi = 2.0 + abs(2.0 * m) ** (1.0 / 3.0)
    else:
        lo = 1.0e-12
        hi = (2.0 * m) ** (1.0 / 3.0) + 1.0
    root = _bracketed_newton(p, dp, lo, hi)
    if kappa == -1 and abs(3.0 * root * root + kappa) < _DOUBLE_ROOT_SNAP:
        return R_CRIT
    return root


def _bracketed_newton(p, dp, lo: float, hi: float, max_iter: int = 64) -> float:
    """Newton iteration kept inside a sign-change bracket; bisection fallback.

    Requires p(lo) <= 0 <= p(hi).
    """
    flo = p(lo)
    fhi = p(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo > 0.0 or fhi < 0.0:
        raise ConvergenceFailure(f"root bracket [{lo}, {hi}] carries no sign change")
    x = 0.5 * (lo + hi)
    for _ in range(max_iter):
        fx = p(x)
        if fx == 0.0:
            return x
        if fx < 0.0:
            lo = x
        else:
            hi = x
        if hi - lo <= 2.0 * np.finfo(float).eps * hi:
            return 0.5 * (lo + hi)
        d = dp(x)
        x_new = x - fx / d if d != 0.0 else 0.5 * (lo + hi)
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        if x_new == x:
            return x
        x = x_new
    # Newton budget exhausted: finish with plain bisection, which cannot fail.
    for _ in range(200):
        x = 0.5 * (lo + hi)
        fx = p(x)
        if fx == 0.0 or hi - lo <= 2.0 * np.finfo(float).eps * max(hi, 1.0):
            return x
        if fx < 0.0:
            lo = x
        else:
            hi = x
    return 0.5 * (lo + hi)


def surface_gravity(kappa: int, m: float) -> float:
    """Surface gravity k = (r_h^3 + m)/r_h^2 of the model horizon.

    Evaluated as (3 r_h^2 + kappa)/(2 r_h), which is equivalent through the
    horizon cubic and stays accurate as the horizon degenerates.  At the
    critical mass this returns the round-off residue ~2e-16 of the snapped
    double root rather than an exact zero: every factored near-horizon
    formula in the package is built from (r_h, k) as a consistent pair, and
    zeroing k here would desynchronize them at the degenerate end, where
    mass perturbations are amplified like 1/u.
    """
    r = horizon_radius(kappa, m)
    return (3.0 * r * r + kappa) / (2.0 * r)


def mass_from_surface_gravity(k: float) -> float:
    """The unique mass m0 in [-1/(3*sqrt(3)), 0] whose kappa=-1 model has surface gravity k.

    Closed form: r = (k + sqrt(k^2 + 3))/3, then m0 = (r^3 - r)/2.  Strictly
    increasing in k, inverse of `surface_gravity` on the nonpositive-mass
    branch.  Endpoints are pinned exactly: k=0 -> critical mass, k=1 -> 0.
    """
    if not 0.0 <= k <= 1.0:
        raise DomainError(f"surface gravity must lie in [0, 1]; got {k:.17g}")
    if k == 0.0:
        return M_CRIT
    if k == 1.0:
        return 0.0
    r = (k + math.sqrt(k * k + 3.0)) / 3.0
    return 0.5 * (r * r * r - r)


def metric_coefficient(model: "KottlerModel", r) -> float:
    """f(r) = kappa + r^2 - 2m/r, evaluated in horizon-factored form."""
    r_h = model.horizon.radius
    if np.any(np.asarray(r) < r_h * (1.0 - 1.0e-12)):
        raise DomainError(f"r must be >= horizon radius {r_h:.17g}")
    return _metric_coefficient_raw(r, r_h, model.kappa)


def _metric_coefficient_raw(r, r_h: float, kappa: int):
    quad = r * r + r_h * r + (r_h * r_h + kappa)
    val = (r - r_h) * quad / r
    return np.maximum(val, 0.0) if isinstance(val, np.ndarray) else max(val, 0.0)


def gradient_norm_sq(m: float, r, kappa: int = -1) -> float:
    """W(r) = ((r^3 + m)/r^2)^2, the squared gradient of the static potential.

    At r = r_h this equals the squared surface gravity.
    """
    r_h = horizon_radius(kappa, m)
    if np.any(np.asarray(r) < r_h * (1.0 - 1.0e-12)):
        raise DomainError(f"r must be >= horizon radius {r_h:.17g}")
    k = surface_gravity(kappa, m)
    return _sqrt_w_raw(r, r_h, k) ** 2


def _sqrt_w_raw(r, r_h: float, k: float):
    """(r^3 + m)/r^2 without near-horizon cancellation: uses r^3 + m = (r - r_h)*q3 + k*r_h^2."""
    q3 = r * r + r_h * r + r_h * r_h
    return ((r - r_h) * q3 + k * r_h * r_h) / (r * r)


def genus_quotient_area(genus: int) -> float:
    """Area 4*pi*(genus - 1) of the genus quotient of the hyperbolic plane."""
    if genus < 2:
        raise DomainError(f"genus quotient requires genus >= 2; got {genus}")
    return 4.0 * math.pi * (genus - 1)


def model_horizon_area(m: float, genus: int) -> float:
    """Horizon area 4*pi*r_h^2*(genus-1) of the kappa=-1 model under the genus quotient."""
    if genus < 2:
        raise DomainError(f"genus must be >= 2 for kappa=-1 cross-sections; got {genus}")
    r = horizon_radius(-1, m)
    return 4.0 * math.pi * r * r * (genus - 1)


@dataclass(frozen=True)
class HorizonData:
    """Horizon radius, surface gravity, degeneracy flag, and quotient area.

    ``area`` is None for kappa=0 cross-sections: the flat-torus volume is a
    free normalization and no convention is imposed.
    """

    radius: float
    surface_gravity: float
    degenerate: bool
    area: float | None


@dataclass(frozen=True)
class KottlerModel:
    """One member of the closed-form family, with horizon bookkeeping."""

    kappa: int
    mass: float
    genus: int
    horizon: HorizonData

    @classmethod
    def create(cls, kappa: int, mass: float, genus: int | None = None) -> "KottlerModel":
        _check_mass(kappa, mass)
        if genus is None:
            genus = {-1: 2, 0: 1, 1: 0}[kappa]
        if kappa == -1 and genus < 2:
            raise DomainError("kappa=-1 cross-sections require genus >= 2")
        if kappa == 0 and genus != 1:
            raise DomainError("kappa=0 cross-sections require genus = 1")
        if kappa == 1 and genus != 0:
            raise DomainError("kappa=+1 cross-sections require genus = 0")
        r = horizon_radius(kappa, mass)
        k = surface_gravity(kappa, mass)
        if kappa == -1:
            area = 4.0 * math.pi * r * r * (genus - 1)
        elif kappa == 1:
            area = 4.0 * math.pi * r * r
        else:
            area = None
        return cls(kappa=kappa, mass=mass, genus=genus,
                   horizon=HorizonData(radius=r, surface_gravity=k,
                                       degenerate=(k < _GRAVITY_FLOOR), area=area))

    # Vectorized closed-form evaluators used by profile builders and quadrature.

    def f(self, r):
        return _metric_coefficient_raw(np.asarray(r, dtype=float), self.horizon.radius, self.kappa)

    def u(self, r):
        return np.sqrt(self.f(r))

    def sqrt_w(self, r):
        """|grad u| = (r^3 + m)/r^2 along the model."""
        return _sqrt_w_raw(np.asarray(r, dtype=float), self.horizon.radius,
                           self.horizon.surface_gravity)

    def du_dr(self, r):
        """du/dr = (r + m/r^2)/u; diverges at a nondegenerate horizon."""
        r = np.asarray(r, dtype=float)
        return self.sqrt_w(r) / self.u(r)

    def fprime(self, r):
        """f'(r) = 2r + 2m/r^2 = 2*sqrt_w(r)."""
        return 2.0 * self.sqrt_w(r)


def _arclength_integrand(model: KottlerModel, t):
    """ds/dt in the regularized variable t = sqrt(r - r_h).

    With f = (r - r_h) q2(r)/r this is 2 sqrt(r/q2(r)), smooth through the
    horizon for any nondegenerate model.
    """
    r_h = model.horizon.radius
    rr = r_h + t * t
    q2 = rr * rr + r_h * rr + (r_h * r_h + model.kappa)
    return 2.0 * np.sqrt(rr / q2)


def arclength_coordinate(model: KottlerModel, r, panels_per_unit: int = 4) -> np.ndarray:
    """Proper radial distance s(r) = int_{r_h}^{r} dr'/sqrt(f(r')) along the model.

    Integrated in t = sqrt(r' - r_h), which removes the inverse square root
    at the horizon.  Only defined for nondegenerate models (k > 0): the
    degenerate horizon lies at infinite distance.
    """
    if model.horizon.degenerate:
        raise DomainError("arclength from a degenerate horizon diverges")
    from ._quadrature import nodes_weights

    r = np.atleast_1d(np.asarray(r, dtype=float))
    r_h = model.horizon.radius
    if np.any(r < r_h * (1.0 - 1.0e-12)):
        raise DomainError("radius below horizon")
    out = np.empty_like(r)
    for i, ri in enumerate(r):
        t_max = math.sqrt(max(ri - r_h, 0.0))
        if t_max == 0.0:
            out[i] = 0.0
            continue
        panels = max(8, int(panels_per_unit * t_max) + 1)
        t, w = nodes_weights(0.0, t_max, panels, 32)
        out[i] = float(np.dot(w, _arclength_integrand(model, t)))
    return out


def radius_from_arclength(model: KottlerModel, s, table_intervals: int = 16384) -> np.ndarray:
    """Invert s(r): area radius of the point at proper distance s from the horizon.

    Builds a dense cumulative table of s(t) in the regularized variable
    t = sqrt(r - r_h) (vectorized Gauss panels) and inverts it with a
    monotone cubic; the density makes the inversion accurate to ~1e-12
    absolute in r, including arbitrarily close to the horizon.
    """
    if model.horizon.degenerate:
        raise DomainError("arclength from a degenerate horizon diverges")
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s < 0.0):
        raise DomainError("arclength must be nonnegative")
    s_max = float(np.max(s))
    r_h = model.horizon.radius
    # Bound r(s): s >= integral with the integrand's minimum, so growing r_hi
    # geometrically terminates.
    r_hi = r_h + 1.0
    while arclength_coordinate(model, np.array([r_hi]))[0] < s_max:
        r_hi = r_h + 2.0 * (r_hi - r_h)
    from ._quadrature import _rule
    from scipy.interpolate import PchipInterpolator

    t_edges = np.linspace(0.0, math.sqrt(r_hi - r_h), table_intervals + 1)
    x8, w8 = _rule(8)
    half = 0.5 * np.diff(t_edges)
    mid = 0.5 * (t_edges[:-1] + t_edges[1:])
    tt = mid[:, None] + half[:, None] * x8[None, :]
    panel = (half[:, None] * w8[None, :] * _arclength_integrand(model, tt)).sum(axis=1)
    s_table = np.concatenate([[0.0], np.cumsum(panel)])
    t_of_s = PchipInterpolator(s_table, t_edges)
    t = np.clip(t_of_s(s), 0.0, t_edges[-1])
    return r_h + t * t
