"""Exact cylinder enumeration for the measure of maximal entropy.

Length-n words over the branch alphabet get mass deg^(-n) (the Gibbs
property of the null potential, up to bounded density factors that the
(1/n) log rate cannot see).  Birkhoff averages of log|Df| are accumulated
along the inverse-branch pullback, never by forward iteration, so the
word's itinerary is exact.  Constant-slope maps additionally get an
exact integer-combinatorics path with zero enumeration error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import BudgetError, DomainError
from .maps import CircleMapSpec, branch_preimage
from .multifractal import RateFunction

CYLINDER_BUDGET = 10 ** 7
EMPTY_RATE = float("-inf")


@dataclass
class CylinderEnsemble:
    n: int
    degree: int
    birkhoff_avg: np.ndarray      # per word, (1/n) sum of log|Df| on the orbit
    representatives: np.ndarray   # one pullback point per word
    log_weight: float             # log of the common word mass, -n log deg
    anchor: float
    constant_slope: bool
    slopes: Optional[tuple] = None


def default_anchor(spec: CircleMapSpec) -> float:
    """Branch-0 fixed point unless it is indifferent, else its pullback of 1/2.

    An indifferent anchor would drag every pullback toward the neutral
    point and bias the Birkhoff averages.
    """
    fp = float(branch_preimage(spec, 0, np.array([0.0]))[0])
    # branch-0 fixed point solves f(y) = y; for our families it is lo = 0
    if not spec.has_indifferent_point:
        return fp
    return float(branch_preimage(spec, 0, np.array([0.5]))[0])


def enumerate_cylinders(spec: CircleMapSpec, n: int,
                        anchor: Optional[float] = None) -> CylinderEnsemble:
    """All length-n cylinder words with representatives and Birkhoff data."""
    deg = spec.degree
    if deg ** n > CYLINDER_BUDGET:
        raise BudgetError(f"degree^n = {deg ** n} exceeds the cylinder budget")
    if anchor is None:
        anchor = default_anchor(spec)
    z = np.array([anchor], dtype=float)
    s = np.zeros(1)
    for _ in range(n):
        zs, ss = [], []
        for b in range(deg):
            znew = branch_preimage(spec, b, z)
            zs.append(znew)
            ss.append(s + np.log(spec.branches[b].deriv(znew)))
        z = np.concatenate(zs)
        s = np.concatenate(ss)
    constant = spec.family_tag == "piecewise_linear"
    return CylinderEnsemble(
        n=n, degree=deg, birkhoff_avg=s / n, representatives=z,
        log_weight=-n * math.log(deg), anchor=anchor,
        constant_slope=constant,
        slopes=spec.parameters["slopes"] if constant else None)


def _compositions(total, parts):
    """All nonnegative integer vectors of given length summing to total."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def _exact_count_in_interval(n, slopes, a, b):
    """Integer count of words whose symbol-count average lies in [a, b]."""
    logs = [math.log(s) for s in slopes]
    total = 0
    for counts in _compositions(n, len(slopes)):
        avg = sum(c * l for c, l in zip(counts, logs)) / n
        if a <= avg <= b:
            coeff = math.factorial(n)
            for c in counts:
                coeff //= math.factorial(c)
            total += coeff
    return total


def empirical_rate(ens: CylinderEnsemble, a: float, b: float) -> float:
    """(1/n) log of the total mass of words with Birkhoff average in [a, b]."""
    if a > b:
        raise DomainError("need a <= b")
    n = ens.n
    if ens.constant_slope:
        total = _exact_count_in_interval(n, ens.slopes, a, b)
        if total == 0:
            return EMPTY_RATE
        return (_log_int(total) - n * math.log(ens.degree)) / n
    mask = (ens.birkhoff_avg >= a) & (ens.birkhoff_avg <= b)
    count = int(mask.sum())
    if count == 0:
        return EMPTY_RATE
    return (math.log(count) + ens.log_weight) / n


def _log_int(k: int) -> float:
    # exact for any size of integer (math.log overflows above ~2**1023)
    if k < 2 ** 900:
        return math.log(k)
    bits = k.bit_length() - 60
    return math.log(k >> bits) + bits * math.log(2.0)


@dataclass
class RateComparisonRow:
    n: int
    empirical: float
    legendre: float
    gap: float
    observed_range: tuple


@dataclass
class RateComparison:
    rows: list
    extrapolated: float
    legendre: float
    extrapolated_gap: float
    control_case: bool            # degenerate rate function (constant slope map)


def legendre_target(rate: RateFunction, a: float, b: float,
                    n_points: int = 2001) -> float:
    """-inf of I over [a, b] intersected with the rate function's domain."""
    lo = max(a, float(rate.s_grid[0]))
    hi = min(b, float(rate.s_grid[-1]))
    if lo > hi:
        return EMPTY_RATE
    s = np.linspace(lo, hi, n_points)
    return -float(np.min(rate.I(s)))


def compare_rate(spec: CircleMapSpec, n_list: Sequence[int],
                 interval: tuple, rate: RateFunction,
                 anchor: Optional[float] = None) -> RateComparison:
    """Empirical cylinder rates vs the Legendre rate, with a 1/n fit."""
    a, b = interval
    if rate.degenerate:
        target = 0.0 if rate.s_grid[0] >= a and rate.s_grid[0] <= b else EMPTY_RATE
    else:
        target = legendre_target(rate, a, b)
    rows = []
    for n in sorted(n_list):
        ens = enumerate_cylinders(spec, n, anchor=anchor)
        emp = empirical_rate(ens, a, b)
        gap = emp - target if math.isfinite(emp) and math.isfinite(target) \
            else float("nan")
        rows.append(RateComparisonRow(
            n=n, empirical=emp, legendre=target, gap=gap,
            observed_range=(float(ens.birkhoff_avg.min()),
                            float(ens.birkhoff_avg.max()))))
    finite = [(r.n, r.empirical) for r in rows if math.isfinite(r.empirical)]
    if len(finite) >= 2:
        ns = np.array([f[0] for f in finite], dtype=float)
        es = np.array([f[1] for f in finite])
        slope, intercept = np.polyfit(1.0 / ns, es, 1)
        extrapolated = float(intercept)
    elif len(finite) == 1:
        extrapolated = finite[0][1]
    else:
        extrapolated = EMPTY_RATE
    egap = extrapolated - target if math.isfinite(extrapolated) \
        and math.isfinite(target) else float("nan")
    return RateComparison(rows=rows, extrapolated=extrapolated,
                          legendre=target, extrapolated_gap=egap,
                          control_case=rate.degenerate)
