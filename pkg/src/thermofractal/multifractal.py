"""Free energy, Legendre rate function, entropy and dimension spectra.

Everything here is a discrete convex transform of one pressure curve.
The central identity used throughout: with E(u) = P(-u) - log deg and
tau(s) = P(-s),

    I(s)      = log deg - inf_t { P(t) + s t }        (Legendre rate)
    tau_hat(a) = inf_t { P(t) + a t } = h_top - I(a)  (entropy spectrum)

where the infimum runs over the strictly convex part of the curve
(t below the transition) together with the plateau kink candidate
(P, t) = (plateau, t0).  Including the kink candidate makes the linear
branch tau_hat(a) = a t0 + plateau_entropy emerge from the same discrete
infimum, so the rectangle and Legendre branches agree at their junction
by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DataError, DomainError
from .maps import SkewProductSpec
from .pressure import PressureCurve

CONVEXITY_SLACK = 1e-6
DEGENERATE_SPAN = 1e-6
DOMAIN_MARGIN = 1e-3     # fractional inset of the open rate-function domain
KINK_BUFFER_STEPS = 2    # grid points dropped next to the transition


@dataclass
class FreeEnergy:
    """E(u) = P(-u) - log deg on the reflected grid, u above -t0."""

    u_grid: np.ndarray
    E_values: np.ndarray
    log_deg: float
    kink_u: Optional[float]       # -t0 when a plateau exists
    kink_E: Optional[float]       # plateau - log deg


@dataclass
class ConjugatePair:
    """Shared candidate set for the discrete Legendre transforms."""

    t_candidates: np.ndarray      # pressure-curve parameters, kink included
    P_candidates: np.ndarray
    log_deg: float
    h_top: float
    plateau_entropy: float
    t0: Optional[float]

    def I(self, s):
        """Rate function I(s) = log deg - inf_t (P(t) + s t), vectorized."""
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        vals = self.P_candidates[None, :] + \
            s_arr[:, None] * self.t_candidates[None, :]
        out = self.log_deg - vals.min(axis=1)
        return float(out[0]) if np.ndim(s) == 0 else out

    def tau_hat(self, a):
        """Entropy spectrum of the level set {lambda = a}."""
        return self.h_top - self.I(a)


def free_energy(curve: PressureCurve, total_degree: Optional[int] = None
                ) -> FreeEnergy:
    """Reflect the pressure curve into the free energy of the max-entropy state."""
    if total_degree is None:
        total_degree = (curve.spec.total_degree
                        if isinstance(curve.spec, SkewProductSpec)
                        else curve.spec.degree)
    log_deg = math.log(total_degree)
    t = curve.t_grid
    P = curve.P_values
    if curve.t0_estimate is not None:
        step = t[1] - t[0]
        keep = t < curve.t0_estimate - KINK_BUFFER_STEPS * step
        t, P = t[keep], P[keep]
        kink_u, kink_E = -curve.t0_estimate, curve.plateau - log_deg
    else:
        kink_u = kink_E = None
    u = -t[::-1]
    E = P[::-1] - log_deg
    d2 = np.diff(E, 2)
    bad = np.nonzero(d2 < -CONVEXITY_SLACK)[0]
    if len(bad):
        raise DataError(
            f"free energy not convex at grid indices {bad.tolist()[:10]}")
    return FreeEnergy(u_grid=u, E_values=E, log_deg=log_deg,
                      kink_u=kink_u, kink_E=kink_E)


def _conjugate_pair(curve: PressureCurve, fe: FreeEnergy) -> ConjugatePair:
    t = -fe.u_grid[::-1]
    P = fe.E_values[::-1] + fe.log_deg
    if fe.kink_u is not None:
        t = np.append(t, -fe.kink_u)
        P = np.append(P, fe.kink_E + fe.log_deg)
    plateau_entropy = curve.plateau if curve.plateau is not None else 0.0
    return ConjugatePair(
        t_candidates=t, P_candidates=P, log_deg=fe.log_deg,
        h_top=curve.h_top, plateau_entropy=plateau_entropy,
        t0=curve.t0_estimate)


@dataclass
class LambdaExtremes:
    lambda_min: float
    lambda_max: float
    lambda_mu0: float
    t_min_used: float             # leftmost parameter behind lambda_max


def lambda_extremes(curve: PressureCurve) -> LambdaExtremes:
    """Central-exponent extremes from the grid slopes of the pressure curve.

    lambda_max is relative to the leftmost computed t (the true supremum
    may need t -> -infinity); the value of t used is reported alongside.
    """
    t, P = curve.t_grid, curve.P_values
    step = t[1] - t[0]
    slopes = -np.diff(P) / step          # lambda on interval midpoints
    if curve.t0_estimate is not None:
        inside = t[:-1] + step <= curve.t0_estimate - KINK_BUFFER_STEPS * step
        lam_min = float(slopes[inside][-1]) if np.any(inside) else float(slopes[0])
    else:
        lam_min = float(slopes[-1])
    lam_max = float(slopes[0])
    i0 = int(np.argmin(np.abs(t)))
    lam_mu0 = float(curve.lambda_c[i0])
    return LambdaExtremes(lambda_min=lam_min, lambda_max=lam_max,
                          lambda_mu0=lam_mu0, t_min_used=float(t[0]))


@dataclass
class RateFunction:
    s_grid: np.ndarray
    I_values: np.ndarray
    lambda_min: float
    lambda_max: float
    lambda_mu0: float
    t0: Optional[float]
    h_top: float
    plateau_entropy: float
    degenerate: bool
    conjugate: ConjugatePair

    def I(self, s):
        return self.conjugate.I(s)


def rate_function(curve: PressureCurve, total_degree: Optional[int] = None,
                  n_points: int = 401) -> RateFunction:
    """Discrete Legendre transform of the free energy over its open domain."""
    fe = free_energy(curve, total_degree)
    pair = _conjugate_pair(curve, fe)
    ext = lambda_extremes(curve)
    span = ext.lambda_max - ext.lambda_min
    degenerate = span < DEGENERATE_SPAN
    if degenerate:
        s_grid = np.array([ext.lambda_mu0])
    else:
        delta = DOMAIN_MARGIN * span
        s_grid = np.linspace(ext.lambda_min + delta,
                             ext.lambda_max - delta, n_points)
    I_vals = pair.I(s_grid)
    return RateFunction(
        s_grid=s_grid, I_values=I_vals,
        lambda_min=ext.lambda_min, lambda_max=ext.lambda_max,
        lambda_mu0=ext.lambda_mu0, t0=curve.t0_estimate,
        h_top=pair.h_top, plateau_entropy=pair.plateau_entropy,
        degenerate=degenerate, conjugate=pair)


@dataclass
class SpectrumResult:
    interval: tuple
    kind: str                     # "entropy" | "hausdorff"
    value: float
    selection_point: float
    formula_branch: str           # "rectangle" | "legendre" | "plateau"


def entropy_spectrum(rate: RateFunction, a: float, b: float) -> SpectrumResult:
    """Topological entropy of the set with Birkhoff exponent in [a, b]."""
    if a > b:
        raise DomainError("need a <= b")
    if a < -1e-9 or b > rate.lambda_max + 1e-9:
        raise DomainError(
            f"[{a}, {b}] outside the admissible exponent range "
            f"[0, {rate.lambda_max}]")
    lam_min, lam_mu0 = rate.lambda_min, rate.lambda_mu0
    if b <= lam_min:
        t0 = rate.t0 if rate.t0 is not None else float("nan")
        value = b * t0 + rate.plateau_entropy
        return SpectrumResult((a, b), "entropy", value, b, "rectangle")
    a_eff = max(a, lam_min)
    if lam_mu0 <= a_eff:
        d = a_eff
    elif lam_mu0 >= b:
        d = b
    else:
        d = lam_mu0
    value = rate.h_top - float(rate.I(d))
    return SpectrumResult((a, b), "entropy", value, d, "legendre")


def tau_hat(rate: RateFunction, a: float) -> float:
    """Discrete infimum of the flipped pressure minus a*s; entropy at level a."""
    if a < -1e-9 or a > rate.lambda_max + 1e-9:
        raise DomainError(f"a = {a} outside [0, {rate.lambda_max}]")
    return float(rate.conjugate.tau_hat(a))


def tau_check(rate: RateFunction, a: float) -> float:
    """tau_hat(a) / a; the Hausdorff-dimension spectrum integrand."""
    if a <= 0:
        raise DomainError(
            "a = 0 is excluded; take the one-sided limit via the plateau "
            "formula (tau_check -> t0 when lambda_min > 0)")
    return tau_hat(rate, a) / a


def hausdorff_spectrum(rate: RateFunction, u: float, v: float,
                       n_points: int = 513) -> SpectrumResult:
    """Hausdorff dimension of the Lyapunov level set, circle maps only."""
    if u > v:
        raise DomainError("need u <= v")
    if u <= 0.0:
        raise DomainError(
            "intervals touching 0 are excluded; query (0+, v] and use the "
            "one-sided limit tau_check -> t0")
    if v > rate.lambda_max + 1e-9:
        raise DomainError(f"v = {v} exceeds lambda_max = {rate.lambda_max}")
    if rate.plateau_entropy > 0:
        raise DomainError(
            "dimension spectrum is defined for circle maps, not skew products")
    a_grid = np.linspace(u, v, n_points)
    vals = rate.conjugate.tau_hat(a_grid) / a_grid
    i = int(np.argmax(vals))
    return SpectrumResult((u, v), "hausdorff", float(vals[i]),
                          float(a_grid[i]), "legendre"
                          if a_grid[i] > rate.lambda_min else "plateau")
