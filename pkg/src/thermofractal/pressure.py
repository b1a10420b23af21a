"""Pressure curves, phase-transition detection and derived quantities.

P(t) is obtained as the log of the leading eigenvalue of the discretized
weighted transfer operator with potential -t log|Df|.  The curve also
carries the central Lyapunov exponent -P'(t) and the variance P''(t) by
central differences, and (for intermittent maps) the transition parameter
where P reaches its theoretical plateau.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import BudgetError, DomainError
from .maps import (BaseEndoSpec, CircleMapSpec, SkewProductSpec,
                   branch_preimage, make_c2_intermittent)
from .transfer import (DiscretizationFactory, build_discretization,
                       leading_eigen)

DEFAULT_T_MIN = -3.0
DEFAULT_T_MAX = 2.0
DEFAULT_STEP = 0.02
DEFAULT_N = 4096
EPS_PLATEAU = 0.02
REFINE_WIDTH = 0.01
PERIODIC_ORBIT_BUDGET = 10 ** 6
SKEW_2D_BUDGET = 10 ** 8


@dataclass
class PressureValue:
    value: float
    converged: bool
    plateau_proximate: bool = False


@dataclass
class PressureCurve:
    t_grid: np.ndarray
    P_values: np.ndarray
    plateau: Optional[float]      # theoretical plateau; None for expanding maps
    t0_estimate: Optional[float]
    lambda_c: np.ndarray          # -P' by central differences
    sigma2: np.ndarray            # P'' by central differences
    N_used: int
    method: str
    convergence_flags: np.ndarray
    spec: object
    h_top: float

    def pressure(self, t: float) -> float:
        if t < self.t_grid[0] - 1e-12 or t > self.t_grid[-1] + 1e-12:
            raise DomainError(
                f"t = {t} outside computed range "
                f"[{self.t_grid[0]}, {self.t_grid[-1]}]")
        return float(np.interp(t, self.t_grid, self.P_values))

    def pressure_clamped(self, t: float) -> float:
        """Raw pressure below the transition, theoretical plateau at/above it."""
        if (self.plateau is not None and self.t0_estimate is not None
                and t >= self.t0_estimate):
            return self.plateau
        return self.pressure(t)

    def check_invariants(self, slack: float = 1e-6):
        """Post-hoc shape checks; returns a list of violation messages."""
        issues = []
        dP = np.diff(self.P_values)
        if np.any(dP > slack):
            issues.append(f"P not non-increasing (max increase {dP.max():.2e})")
        d2 = np.diff(self.P_values, 2)
        if np.any(d2 < -slack):
            issues.append(f"P not convex (min second difference {d2.min():.2e})")
        if self.plateau is not None:
            if np.any(self.P_values < self.plateau - slack):
                issues.append("P dips below the theoretical plateau")
        return issues


def _leading_log_rho(spec, t, N, method, factory, h0=None, nu0=None):
    disc = build_discretization(spec, t, N, method, factory=factory)
    eig = leading_eigen(disc, h0=h0, nu0=nu0)
    return eig, disc.factory


def pressure_at(spec: CircleMapSpec, t: float, N: int = DEFAULT_N,
                method: str = "collocation",
                factory: Optional[DiscretizationFactory] = None
                ) -> PressureValue:
    """log of the leading eigenvalue of the discretized operator at t."""
    if isinstance(spec, SkewProductSpec):
        return PressureValue(skew_pressure(spec, t, N), True)
    eig, _ = _leading_log_rho(spec, t, N, method, factory)
    value = math.log(eig.rho)
    plateau_flag = (spec.has_indifferent_point
                    and value - 0.0 < EPS_PLATEAU)
    return PressureValue(value=value, converged=eig.converged,
                         plateau_proximate=plateau_flag)


def _sweep(spec, t_grid, N, method):
    factory = DiscretizationFactory(spec, N, method)
    P = np.empty(len(t_grid))
    flags = np.empty(len(t_grid), dtype=bool)
    h0 = nu0 = None
    for i, t in enumerate(t_grid):
        eig, factory = _leading_log_rho(spec, t, N, method, factory, h0, nu0)
        P[i] = math.log(eig.rho)
        flags[i] = eig.converged
        h0, nu0 = eig.h, eig.nu
    return P, flags, factory


def _finite_differences(t_grid, P):
    step = t_grid[1] - t_grid[0]
    lam = -np.gradient(P, step)
    sigma2 = np.empty_like(P)
    sigma2[1:-1] = np.diff(P, 2) / step ** 2
    sigma2[0] = sigma2[1]
    sigma2[-1] = sigma2[-2]
    return lam, sigma2


def pressure_curve(spec, t_min: float = DEFAULT_T_MIN,
                   t_max: float = DEFAULT_T_MAX, step: float = DEFAULT_STEP,
                   N: int = DEFAULT_N, method: str = "collocation",
                   detect_t0: bool = True) -> PressureCurve:
    if not (t_min < t_max) or step <= 0:
        raise DomainError("need t_min < t_max and step > 0")
    n_pts = int(round((t_max - t_min) / step)) + 1
    t_grid = t_min + step * np.arange(n_pts)

    if isinstance(spec, SkewProductSpec):
        return _skew_pressure_curve(spec, t_grid, N, method, detect_t0)

    P, flags, _ = _sweep(spec, t_grid, N, method)
    lam, sigma2 = _finite_differences(t_grid, P)
    plateau = 0.0 if spec.has_indifferent_point else None
    curve = PressureCurve(
        t_grid=t_grid, P_values=P, plateau=plateau, t0_estimate=None,
        lambda_c=lam, sigma2=sigma2, N_used=N, method=method,
        convergence_flags=flags, spec=spec, h_top=math.log(spec.degree))
    if detect_t0 and plateau is not None:
        try:
            curve.t0_estimate = detect_transition(curve)
        except DomainError:
            pass
    return curve


def _skew_pressure_curve(skew, t_grid, N, method, detect_t0):
    if not skew.constant_fiber:
        raise DomainError(
            "pressure curves for x-dependent fiber rules require the 2D "
            "solver point by point; use skew_pressure instead")
    log_k = skew.base.entropy
    fiber_curve = pressure_curve(skew.fiber, t_grid[0], t_grid[-1],
                                 t_grid[1] - t_grid[0], N, method,
                                 detect_t0=detect_t0)
    plateau = (log_k if skew.fiber.has_indifferent_point else None)
    return PressureCurve(
        t_grid=fiber_curve.t_grid, P_values=fiber_curve.P_values + log_k,
        plateau=plateau, t0_estimate=fiber_curve.t0_estimate,
        lambda_c=fiber_curve.lambda_c, sigma2=fiber_curve.sigma2,
        N_used=N, method=method, convergence_flags=fiber_curve.convergence_flags,
        spec=skew, h_top=math.log(skew.total_degree))


def detect_transition(curve: PressureCurve, eps_plateau: float = EPS_PLATEAU,
                      refine_width: float = REFINE_WIDTH) -> float:
    """Smallest t where P meets the plateau, refined by bisection."""
    if curve.plateau is None:
        raise DomainError(
            "map has no plateau (uniformly expanding control case); "
            "no transition to detect")
    below = np.nonzero(curve.P_values - curve.plateau < eps_plateau)[0]
    if len(below) == 0:
        raise DomainError(
            "plateau never reached on the computed grid; widen the t range")
    i = int(below[0])
    if i == 0:
        return float(curve.t_grid[0])

    base_spec = curve.spec.fiber if isinstance(curve.spec, SkewProductSpec) \
        else curve.spec
    offset = curve.plateau if isinstance(curve.spec, SkewProductSpec) else 0.0
    factory = DiscretizationFactory(base_spec, curve.N_used, curve.method)
    lo, hi = float(curve.t_grid[i - 1]), float(curve.t_grid[i])
    while hi - lo > refine_width:
        mid = 0.5 * (lo + hi)
        p = pressure_at(base_spec, mid, curve.N_used, curve.method,
                        factory=factory).value + offset
        if p - curve.plateau < eps_plateau:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@dataclass
class SlopeDiagnostic:
    t0: float
    offsets: tuple
    slopes: tuple
    classifier: str               # "kink" | "smooth"
    shape_exponent: float         # fitted gamma in P ~ C (t* - t)^gamma
    limit_slope: float            # extrapolated left derivative at t*


KINK_SLOPE_FLOOR = -0.02
SMOOTH_SHAPE_EXPONENT = 1.2
SHAPE_FIT_BAND = (0.005, 0.12)   # P window used for the power-law fit


def _fit_shape_exponent(t_pts, p_pts, t_hint):
    """Fit P = C (t* - t)^gamma by scanning t* and regressing in log-log.

    Returns (gamma, C, t*).  The scan starts just right of the largest
    sample point; the regression is exact for both the kink (gamma = 1)
    and the differentiable (gamma > 1) approach shapes.
    """
    logp = np.log(p_pts)
    best = None
    t_hi = t_pts.max()
    for t_star in np.linspace(t_hi + 1e-3, t_hint + 0.25, 240):
        x = np.log(t_star - t_pts)
        gamma, logc = np.polyfit(x, logp, 1)
        sse = float(np.sum((logc + gamma * x - logp) ** 2))
        if best is None or sse < best[0]:
            best = (sse, float(gamma), math.exp(logc), float(t_star))
    _, gamma, c, t_star = best
    return gamma, c, t_star


def left_slope_at_transition(curve: PressureCurve,
                             offsets: Sequence[float] = (0.2, 0.1, 0.05)
                             ) -> SlopeDiagnostic:
    """Left slopes at the transition plus a kink/smooth classifier.

    The finite-difference slopes are anchored at the detected transition,
    which sits slightly left of the true one, so their limit cannot be
    read off directly at finite resolution.  The classifier instead fits
    the approach shape P ~ C (t* - t)^gamma on the band where P is well
    above the numerical floor: gamma near 1 means the slopes converge to
    the nonzero value -C (kink); gamma clearly above 1 means they vanish
    at the transition (smooth).
    """
    if curve.t0_estimate is None:
        raise DomainError("transition not detected on this curve")
    t0 = curve.t0_estimate
    offsets = tuple(sorted(offsets, reverse=True))
    base_spec = curve.spec.fiber if isinstance(curve.spec, SkewProductSpec) \
        else curve.spec
    factory = DiscretizationFactory(base_spec, curve.N_used, curve.method)
    p0 = pressure_at(base_spec, t0, curve.N_used, curve.method,
                     factory=factory).value
    slopes = []
    for eps in offsets:
        p = pressure_at(base_spec, t0 - eps, curve.N_used, curve.method,
                        factory=factory).value
        slopes.append((p0 - p) / eps)

    rel = curve.P_values - (curve.plateau if curve.plateau is not None else 0.0)
    band = (rel > SHAPE_FIT_BAND[0]) & (rel < SHAPE_FIT_BAND[1]) \
        & (curve.t_grid < t0)
    if band.sum() < 4:
        raise DomainError(
            "too few grid points in the shape-fit band; refine the t grid")
    gamma, c, t_star = _fit_shape_exponent(
        curve.t_grid[band], rel[band], t0)
    if gamma >= SMOOTH_SHAPE_EXPONENT:
        classifier = "smooth"
        limit_slope = 0.0
    else:
        limit_slope = -c * gamma
        classifier = "kink" if limit_slope <= KINK_SLOPE_FLOOR else "smooth"
    return SlopeDiagnostic(t0=t0, offsets=offsets, slopes=tuple(slopes),
                           classifier=classifier, shape_exponent=gamma,
                           limit_slope=limit_slope)


def periodic_orbit_pressure(spec: CircleMapSpec, t: float, n: int,
                            max_fixed_point_iters: int = 100) -> float:
    """(1/n) log of the orbit sum over fixed points of the n-th iterate.

    Fixed points are enumerated as the attracting points of length-n
    inverse-branch words; the orbit sum is an independent cross-check of
    the operator pressure.
    """
    deg = spec.degree
    if deg ** n > PERIODIC_ORBIT_BUDGET:
        raise BudgetError(
            f"degree^n = {deg ** n} exceeds the periodic-orbit budget")
    count = deg ** n
    # digit m of the word (most significant = position 0 of the itinerary)
    symbols = [(np.arange(count) // deg ** (n - 1 - m)) % deg for m in range(n)]
    y = np.full(count, 0.5)
    for _ in range(max_fixed_point_iters):
        y_prev = y
        for m in range(n - 1, -1, -1):
            y = _apply_inverse_by_symbol(spec, symbols[m], y)
        if np.max(np.abs(y - y_prev)) < 1e-12:
            break
    # final pass accumulating log|Df^n| along the periodic orbit
    log_dfn = np.zeros(count)
    for m in range(n - 1, -1, -1):
        y = _apply_inverse_by_symbol(spec, symbols[m], y)
        for b in range(deg):
            mask = symbols[m] == b
            if np.any(mask):
                log_dfn[mask] += np.log(spec.branches[b].deriv(y[mask]))
    z = np.exp(-t * log_dfn)
    return float(np.log(z.sum()) / n)


def _apply_inverse_by_symbol(spec, sym, y):
    out = np.empty_like(y)
    for b in range(spec.degree):
        mask = sym == b
        if np.any(mask):
            out[mask] = branch_preimage(spec, b, y[mask])
    return np.mod(out, 1.0)


def skew_pressure(skew: SkewProductSpec, t: float, N: int = 128,
                  method: str = "factorized") -> float:
    """Pressure of a skew product; factorized for constant fibers, 2D else."""
    if method == "factorized":
        if not skew.constant_fiber:
            raise DomainError("factorized pressure requires a constant fiber")
        fib = pressure_at(skew.fiber, t, max(N, 1024))
        return skew.base.entropy + fib.value
    if method != "2d":
        raise DomainError(f"unknown skew pressure method {method!r}")
    return _skew_pressure_2d(skew, t, N)


def _skew_pressure_2d(skew: SkewProductSpec, t: float, N: int) -> float:
    """Leading eigenvalue of the joint 2D collocation operator."""
    if N * N * skew.total_degree > SKEW_2D_BUDGET:
        raise BudgetError("2D collocation budget N^2 * total_degree exceeded")
    import scipy.sparse as sp

    k = skew.base.k
    gx = np.arange(N) / N
    gy = np.arange(N) / N

    rows, cols, data = [], [], []
    row_idx = (np.arange(N)[:, None] * N + np.arange(N)[None, :]).ravel()
    for m in range(k):
        xp = (gx + m) / k                       # base preimage branch m
        # x interpolation weights (xp need not sit on the grid)
        posx = xp * N
        jx = np.floor(posx).astype(np.int64)
        fx = posx - jx
        jx = np.mod(jx, N)
        for b in range(skew.fiber_degree):
            if skew.constant_fiber:
                fiber = skew.fiber
                yp = branch_preimage(fiber, b, gy)
                d = fiber.branches[b].deriv(yp)
                yp_full = np.broadcast_to(yp, (N, N))
                d_full = np.broadcast_to(d, (N, N))
            else:
                yp_rows, d_rows = [], []
                for x_val in xp:
                    fiber = skew.fiber_map_at(float(x_val))
                    yy = branch_preimage(fiber, b, gy)
                    yp_rows.append(yy)
                    d_rows.append(fiber.branches[b].deriv(yy))
                yp_full = np.array(yp_rows)
                d_full = np.array(d_rows)
            posy = np.mod(yp_full, 1.0) * N
            jy = np.floor(posy).astype(np.int64)
            fy = posy - jy
            jy = np.mod(jy, N)
            w = np.power(d_full, -t)
            for (cjx, cwx) in ((jx, 1.0 - fx), (np.mod(jx + 1, N), fx)):
                for (cjy, cwy) in ((jy, 1.0 - fy), (np.mod(jy + 1, N), fy)):
                    rows.append(row_idx)
                    cols.append((cjx[:, None] * N + cjy).ravel())
                    data.append((w * cwx[:, None] * cwy).ravel())
    A = sp.csr_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(N * N, N * N))

    v = np.ones(N * N)
    rho_prev = None
    for _ in range(POWER_MAX_ITER_2D):
        w = A.dot(v)
        rho = float(np.dot(v, w) / np.dot(v, v))
        v = w / np.max(np.abs(w))
        if rho_prev is not None and abs(rho - rho_prev) < 1e-10 * max(1.0, rho):
            break
        rho_prev = rho
    return math.log(rho)


POWER_MAX_ITER_2D = 20_000
