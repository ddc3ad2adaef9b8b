"""Pseudo-radial map: the radius a comparison model assigns to a potential level.

For a comparison mass m0 on the nonpositive branch, psi(u) is the unique root
psi >= r_h(m0) of

    F(u, psi) = u^2 + 1 - psi^2 + 2*m0/psi = 0,

i.e. the area radius at which the kappa=-1 model of mass m0 has potential u.
dF/dpsi = -2*(psi^3 + m0)/psi^2 is strictly negative above the horizon for
m0 > m_crit, so the root is simple and a safeguarded Newton iteration with a
sign-change bracket converges unconditionally.

Numerical notes
---------------
* F is evaluated in the grouped form (u - psi)*(u + psi) + 1 + 2*m0/psi.
  The naive form loses ~ulp(u^2) absolutely, which at u = 1e3 is 1e-10 and
  would swamp the 1e-13 solver tolerance; the grouped form keeps the
  cancellation at O(1) scale and evaluates to ~1e-15 noise at any u.
* At the critical mass the root degenerates (psi^3 + m0 -> 0 as u -> 0) and
  a solve in psi loses the factor Q = psi^3 + m0 to cancellation, with
  relative error growing like eps/u^2.  The critical branch is therefore
  solved in d = psi - r_c via the constant-folded cubic G(d) (see
  `_critical_delta_batch`), which keeps d and Q at full relative precision
  for every u.  The Newton seed near the horizon is the quartic series

      psi = r_c + a1*u + a2*u^2 + a3*u^3 + a4*u^4,
      a1 = 1/sqrt(3), a2 = sqrt(3)/9, a3 = -sqrt(3)/54, a4 = -sqrt(3)/81,

  obtained by matching orders of F in psi - r_c (the quadratic coefficient
  of F there is -3, giving the 1/sqrt(3) slope); the series itself is
  validated against high-precision bisection in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceFailure, DegenerateDerivative, DomainError
from .models import M_CRIT, R_CRIT, horizon_radius

_NEWTON_BUDGET = 64
_POLISH_STEPS = 2

# Degenerate-branch series coefficients (closed forms; see module docstring).
_A1 = 1.0 / math.sqrt(3.0)
_A2 = math.sqrt(3.0) / 9.0
_A3 = -math.sqrt(3.0) / 54.0
_A4 = -math.sqrt(3.0) / 81.0
# Residual surface-gravity constant of the snapped critical model,
# k * r_c^2 with k = (3 r_c^2 - 1)/(2 r_c): the same pairing the factored
# model formulas use, ~6e-17.
_Q_CRIT = (3.0 * R_CRIT * R_CRIT - 1.0) / (2.0 * R_CRIT) * R_CRIT * R_CRIT


@dataclass(frozen=True)
class PseudoRadialMap:
    """Solver for psi_{m0}(u), its derivative, and the model gradient W0(u).

    Immutable after construction; all evaluations are pure and deterministic
    (same input bits produce same output bits).
    """

    m0: float
    solver_tolerance: float = 1.0e-13
    r_m0: float = field(init=False)
    is_critical: bool = field(init=False)

    def __post_init__(self):
        if not M_CRIT - 1.0e-13 <= self.m0 <= 0.0:
            raise DomainError(
                f"comparison mass must lie in [{M_CRIT:.17g}, 0]; got {self.m0:.17g}"
            )
        object.__setattr__(self, "is_critical", self.m0 <= M_CRIT + 1.0e-15)
        object.__setattr__(self, "r_m0", horizon_radius(-1, self.m0))

    # ------------------------------------------------------------------ core

    def _series_delta(self, u):
        """psi - r_c on the degenerate branch, full relative precision near u=0."""
        return u * (_A1 + u * (_A2 + u * (_A3 + u * _A4)))

    def _critical_delta_batch(self, u: np.ndarray) -> np.ndarray:
        """d = psi - r_c on the critical branch, full relative precision at any u.

        The critical member is defined by its snapped horizon radius
        r = R_CRIT, i.e. with mass (r^3 - r)/2; multiplying F by psi then
        cancels every constant term exactly in floating point:

            G(d) = u^2 r + (u^2 + b1) d - 3 r d^2 - d^3,   b1 = 1 - 3 r^2,

        where b1 ~ -2e-16 is the folded round-off of the double root.  G
        evaluates with absolute noise ~eps u^2 while G'(root) ~ -2u, so the
        Newton iterate resolves d itself to relative round-off, which a
        direct solve in psi cannot do once psi^3 + m0 is small.  The same
        convention makes d(u(r)) reproduce r - R_CRIT exactly against the
        horizon-factored model formulas.  Seeded by the quartic series
        (small u) or sqrt(u^2+1) - r_c (large u).
        """
        r = R_CRIT
        b1 = 1.0 - 3.0 * r * r
        eps = float(np.finfo(float).eps)
        lo = np.zeros_like(u)
        hi = np.sqrt(u * u + 1.0 + 2.0 * abs(self.m0)) + 1.0 - r
        d = np.clip(self._series_delta(u), lo, hi)
        big = u > 0.5
        if big.any():
            d = np.where(big, np.clip(np.sqrt(u * u + 1.0) - r, lo, hi), d)
        # below u^2 ~ |b1| the float cubic stops representing the critical
        # branch (its b1 round-off term dominates); the series value is the
        # faithful continuation and d is sub-ulp of r_c there anyway
        tiny = u < 1.0e-8
        active = u > 0.0
        active &= ~tiny
        for _ in range(_NEWTON_BUDGET):
            if not active.any():
                break
            G = u * u * r + (u * u + b1) * d - 3.0 * r * d * d - d ** 3
            scale = u * u * (r + d) + 3.0 * r * d * d + d ** 3
            active &= np.abs(G) > 4.0 * eps * scale
            if not active.any():
                break
            lo = np.where(active & (G > 0.0), d, lo)
            hi = np.where(active & (G < 0.0), d, hi)
            Gp = (u * u + b1) - 6.0 * r * d - 3.0 * d * d
            step = np.where(Gp != 0.0, G / np.where(Gp != 0.0, Gp, 1.0), 0.0)
            d_new = d - step
            outside = (d_new <= lo) | (d_new >= hi) | (Gp == 0.0)
            d_new = np.where(outside, 0.5 * (lo + hi), d_new)
            active &= d_new != d
            d = np.where(active, d_new, d)
        else:
            if active.any():
                raise ConvergenceFailure(
                    "critical-branch Newton exhausted its budget; "
                    "this indicates a bug, not a domain condition"
                )
        for _ in range(_POLISH_STEPS):
            G = u * u * r + (u * u + b1) * d - 3.0 * r * d * d - d ** 3
            Gp = (u * u + b1) - 6.0 * r * d - 3.0 * d * d
            polished = np.clip(
                np.where(Gp != 0.0, d - G / np.where(Gp != 0.0, Gp, 1.0), d),
                0.0, None)
            d = np.where(tiny, d, polished)
        return np.where(u == 0.0, 0.0, d)

    def _stable_F(self, u, psi):
        return (u - psi) * (u + psi) + 1.0 + 2.0 * self.m0 / psi

    def _newton_batch(self, u: np.ndarray) -> np.ndarray:
        m = self.m0
        eps = float(np.finfo(float).eps)
        # |F| at the best representable psi is limited to ~2 psi^2 eps by the
        # quantization of psi itself; stop there when the nominal tolerance
        # is below that floor (large u).
        tol = np.maximum(self.solver_tolerance, 4.0 * eps * (1.0 + u * u))
        lo = np.full_like(u, self.r_m0)
        hi = np.sqrt(u * u + 1.0 + 2.0 * abs(m)) + 1.0
        x = np.clip(np.sqrt(u * u + 1.0), lo, hi)
        active = np.ones(u.shape, dtype=bool)
        for _ in range(_NEWTON_BUDGET):
            if not active.any():
                break
            F = self._stable_F(u, x)
            active &= np.abs(F) > tol
            if not active.any():
                break
            # sign update of the bracket: F decreases in psi
            lo = np.where(active & (F > 0.0), x, lo)
            hi = np.where(active & (F < 0.0), x, hi)
            active &= (hi - lo) > 4.0 * eps * np.maximum(hi, 1.0)
            if not active.any():
                break
            Fp = -2.0 * (x ** 3 + m) / (x * x)
            step = np.where(Fp != 0.0, F / np.where(Fp != 0.0, Fp, 1.0), 0.0)
            x_new = x - step
            outside = (x_new <= lo) | (x_new >= hi) | (Fp == 0.0)
            x_new = np.where(outside, 0.5 * (lo + hi), x_new)
            active &= x_new != x
            x = np.where(active, x_new, x)
        else:
            if active.any():
                raise ConvergenceFailure(
                    "pseudo-radial Newton exhausted its iteration budget; "
                    "this indicates a bug, not a domain condition"
                )
        for _ in range(_POLISH_STEPS):
            F = self._stable_F(u, x)
            Fp = -2.0 * (x ** 3 + m) / (x * x)
            x = np.clip(x - F / Fp, lo, hi)
        return np.maximum(x, self.r_m0)

    def evaluate_many(self, u) -> np.ndarray:
        """Vectorized psi_{m0} over an array of potential values u >= 0."""
        u = np.asarray(u, dtype=float)
        if np.any(u < 0.0):
            raise DomainError("potential values must be nonnegative")
        flat = np.atleast_1d(u).astype(float)
        if self.is_critical:
            psi = R_CRIT + self._critical_delta_batch(flat)
        else:
            psi = self._newton_batch(flat)
        return psi.reshape(u.shape) if u.shape else psi

    def evaluate(self, u: float) -> float:
        """psi with |F(u, psi)| <= max(solver_tolerance, 4 eps (1+u^2)), psi >= r_m0.

        The second term is the quantization floor: between adjacent doubles
        psi, F moves by ~2 psi^2 eps, so no float can do better at large u.
        """
        return float(self.evaluate_many(np.array([float(u)]))[0])

    def cubic_factor_many(self, u, psi=None) -> np.ndarray:
        """Q(u) = psi^3 + m0, evaluated without near-degenerate cancellation.

        On the critical branch below the series switch this is assembled from
        psi - r_c directly, keeping full relative precision as Q -> 0.
        """
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if self.is_critical:
            # assembled from psi - r_c under the snapped-horizon convention
            # (mass = (r_c^3 - r_c)/2), matching the factored model forms;
            # the additive constant is the critical k * r_c^2 residue
            d = self._critical_delta_batch(u) if psi is None \
                else np.atleast_1d(np.asarray(psi, dtype=float)) - R_CRIT
            return d * (3.0 * R_CRIT * R_CRIT + d * (3.0 * R_CRIT + d)) + _Q_CRIT
        if psi is None:
            psi = self.evaluate_many(u)
        psi = np.atleast_1d(np.asarray(psi, dtype=float))
        return psi ** 3 + self.m0

    # ------------------------------------------------------------- operations

    def derivative(self, u: float, at_degenerate_limit: bool = False) -> float:
        """d psi/d u = u * psi^2 / (psi^3 + m0).

        Vanishes at u=0 on the nondegenerate branch.  At the degenerate point
        (u=0, critical mass) the quotient is 0/0 with one-sided limit
        1/sqrt(3); pass ``at_degenerate_limit=True`` to receive the limit,
        otherwise DegenerateDerivative is raised.
        """
        u = float(u)
        if u < 0.0:
            raise DomainError("potential must be nonnegative")
        if self.is_critical and u == 0.0:
            if not at_degenerate_limit:
                raise DegenerateDerivative(
                    "dpsi/du is 0/0 at the degenerate horizon; the limit is 1/sqrt(3)",
                    limit=_A1,
                )
            return _A1
        if u == 0.0:
            return 0.0
        ua = np.array([u])
        psi = float(self.evaluate_many(ua)[0])
        q = float(self.cubic_factor_many(ua)[0])
        return u * psi * psi / q

    def model_gradient_many(self, u) -> np.ndarray:
        """W0(u) = ((psi^3 + m0)/psi^2)^2 over an array of u values."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        psi = self.evaluate_many(u)
        q = self.cubic_factor_many(u, psi)
        return (q / (psi * psi)) ** 2

    def model_gradient(self, u: float) -> float:
        """W0(u); equals the squared surface gravity of the comparison model at u=0."""
        return float(self.model_gradient_many(np.array([float(u)]))[0])

    def identity_residual(self, u: float, psi: float) -> float:
        """u^2 + 1 - psi^2 + 2*m0/psi, in the cancellation-stable grouping."""
        return float(self._stable_F(float(u), float(psi)))

    # ------------------------------------------------- analytic W0 derivatives

    def w0_with_derivatives_many(self, u):
        """(W0, W0', W0'') with respect to u, by the chain rule through psi(u).

        With A = (psi^3+m0)/psi^2 and X = 3 - 2A/psi:
            W0   = A^2,
            W0'  = 2 u X,
            W0'' = 2 X - 12 u^2 (psi - A) / (A psi^2),
        using dpsi/du = u/A.  The u->0 limit on the critical branch
        (A -> sqrt(3) u) gives W0'' -> 6.
        """
        u = np.atleast_1d(np.asarray(u, dtype=float))
        psi = self.evaluate_many(u)
        q = self.cubic_factor_many(u, psi)
        A = q / (psi * psi)
        X = 3.0 - 2.0 * A / psi
        w0 = A * A
        w0p = 2.0 * u * X
        u_over_A = np.where(A > 0.0, u / np.where(A > 0.0, A, 1.0), 0.0)
        if self.is_critical:
            # A ~ sqrt(3)*u on the critical branch, so u/A -> 1/sqrt(3) at u=0
            u_over_A = np.where(u == 0.0, _A1, u_over_A)
        w0pp = 2.0 * X - 12.0 * u * u_over_A * (psi - A) / (psi * psi)
        return w0, w0p, w0pp

    def w0_with_derivatives(self, u: float):
        w0, w0p, w0pp = self.w0_with_derivatives_many(np.array([float(u)]))
        return float(w0[0]), float(w0p[0]), float(w0pp[0])
