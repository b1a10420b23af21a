"""Full-branch circle map families and skew products over expanding bases.

Circle coordinates live in [0, 1) with arithmetic mod 1.  Every map is
given by an ordered list of monotone branches; each branch carries its
interval [lo, hi), a lifted value function mapping [lo, hi] onto [0, 1]
increasingly, and an analytic derivative.  Branch endpoints belong to the
branch on their right, so preimage counts are deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, NumericalError

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 100


@dataclass(frozen=True)
class Branch:
    """One monotone branch of a full-branch circle map.

    ``value`` maps [lo, hi] onto [0, 1] increasingly (lifted, not mod 1);
    ``deriv`` is its closed-form derivative.  ``inverse``, when given,
    is an exact inverse used instead of Newton iteration.
    """

    lo: float
    hi: float
    value: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    inverse: Optional[Callable[[np.ndarray], np.ndarray]] = None


@dataclass(frozen=True, eq=False)
class CircleMapSpec:
    """A full-branch circle map assembled from monotone branches."""

    family_tag: str  # "mp" | "c2_intermittent" | "piecewise_linear"
    parameters: dict
    degree: int
    branches: tuple
    indifferent_points: tuple
    smoothness_class: str  # "c1p" | "c2"

    @property
    def branch_intervals(self):
        return tuple((b.lo, b.hi) for b in self.branches)

    @property
    def has_indifferent_point(self) -> bool:
        return len(self.indifferent_points) > 0


@dataclass(frozen=True)
class BaseEndoSpec:
    """Linear expanding circle endomorphism x -> k x mod 1."""

    k: int

    def __post_init__(self):
        if self.k < 2:
            raise DomainError(f"base multiplier must be >= 2, got {self.k}")

    @property
    def degree(self) -> int:
        return self.k

    @property
    def lyapunov(self) -> float:
        return math.log(self.k)

    @property
    def entropy(self) -> float:
        return math.log(self.k)


@dataclass(frozen=True)
class C2FiberRule:
    """x-dependent fiber assignment alpha(x) = alpha0 + eps*sin(2 pi x)."""

    alpha0: float
    eps: float

    def __post_init__(self):
        lo, hi = self.alpha0 - abs(self.eps), self.alpha0 + abs(self.eps)
        if lo < 0.0 or hi > 1.0:
            raise DomainError(
                f"fiber rule alpha range [{lo}, {hi}] leaves [0, 1]")

    def alpha(self, x):
        return self.alpha0 + self.eps * np.sin(2.0 * np.pi * np.asarray(x))


@dataclass(frozen=True, eq=False)
class SkewProductSpec:
    """Skew product F(x, y) = (k x mod 1, f_x(y)) over a linear base."""

    base: BaseEndoSpec
    fiber: Optional[CircleMapSpec] = None
    fiber_rule: Optional[C2FiberRule] = None

    def __post_init__(self):
        if (self.fiber is None) == (self.fiber_rule is None):
            raise DomainError("exactly one of fiber / fiber_rule is required")

    @property
    def fiber_degree(self) -> int:
        return self.fiber.degree if self.fiber is not None else 2

    @property
    def total_degree(self) -> int:
        return self.base.degree * self.fiber_degree

    @property
    def entropy_base(self) -> float:
        return self.base.entropy

    @property
    def constant_fiber(self) -> bool:
        return self.fiber is not None

    def fiber_map_at(self, x: float) -> CircleMapSpec:
        if self.fiber is not None:
            return self.fiber
        return make_c2_intermittent(float(self.fiber_rule.alpha(x)))

    @property
    def has_indifferent_point(self) -> bool:
        if self.fiber is not None:
            return self.fiber.has_indifferent_point
        return True  # every c2 fiber has the indifferent point at 0


# ---------------------------------------------------------------------------
# constructors

def make_manneville_pomeau(p: float) -> CircleMapSpec:
    """Two-branch intermittent map x + 2^p x^(1+p) with neutral point 0."""
    if not (0.0 < p < 1.0):
        raise DomainError(f"mp parameter must satisfy 0 < p < 1, got {p}")
    c = 2.0 ** p

    b0 = Branch(
        0.0, 0.5,
        lambda y, c=c, p=p: y + c * np.power(np.abs(y), 1.0 + p),
        lambda y, c=c, p=p: 1.0 + c * (1.0 + p) * np.power(np.abs(y), p),
    )
    b1 = Branch(
        0.5, 1.0,
        lambda y, c=c, p=p: y - c * np.power(np.abs(1.0 - y), 1.0 + p),
        lambda y, c=c, p=p: 1.0 + c * (1.0 + p) * np.power(np.abs(1.0 - y), p),
    )
    return CircleMapSpec(
        family_tag="mp",
        parameters={"p": p},
        degree=2,
        branches=(b0, b1),
        indifferent_points=(0.0,),
        smoothness_class="c1p",
    )


def c2_coefficients(alpha: float):
    """Coefficients (a, b) of the C^2 intermittent polynomial branch."""
    half = 0.5
    b = 1.0 / (half ** (3.0 + alpha)
               - (4.0 + alpha) / (4.0 + 2.0 * alpha) * half ** (2.0 + alpha))
    a = -b * (4.0 + alpha) / (4.0 + 2.0 * alpha)
    return a, b


def make_c2_intermittent(alpha: float) -> CircleMapSpec:
    """C^2 intermittent family y + a y^(3+alpha) + b y^(4+alpha), reflected."""
    if not (0.0 <= alpha <= 1.0):
        raise DomainError(f"c2 parameter must satisfy 0 <= alpha <= 1, got {alpha}")
    a, b = c2_coefficients(alpha)
    e1, e2 = 3.0 + alpha, 4.0 + alpha

    def g(y, a=a, b=b, e1=e1, e2=e2):
        y = np.abs(y)
        return y + a * np.power(y, e1) + b * np.power(y, e2)

    def dg(y, a=a, b=b, e1=e1, e2=e2):
        y = np.abs(y)
        return 1.0 + a * e1 * np.power(y, e1 - 1.0) + b * e2 * np.power(y, e2 - 1.0)

    b0 = Branch(0.0, 0.5, g, dg)
    b1 = Branch(
        0.5, 1.0,
        lambda y, g=g: 1.0 - g(1.0 - y),
        lambda y, dg=dg: dg(1.0 - y),
    )
    return CircleMapSpec(
        family_tag="c2_intermittent",
        parameters={"alpha": alpha, "a": a, "b": b},
        degree=2,
        branches=(b0, b1),
        indifferent_points=(0.0,),
        smoothness_class="c2",
    )


def make_piecewise_linear(slopes: Sequence[float]) -> CircleMapSpec:
    """Full-branch map with constant slope per branch; 1/slopes must tile [0,1)."""
    slopes = [float(s) for s in slopes]
    if any(s <= 1.0 for s in slopes):
        raise DomainError(f"all slopes must exceed 1, got {slopes}")
    total = sum(1.0 / s for s in slopes)
    if abs(total - 1.0) > 1e-12:
        raise DomainError(
            f"branch lengths sum(1/s) = {total!r} must equal 1 within 1e-12")

    branches = []
    lo = 0.0
    for s in slopes:
        hi = lo + 1.0 / s
        branches.append(Branch(
            lo, min(hi, 1.0),
            lambda y, s=s, lo=lo: s * (np.asarray(y) - lo),
            lambda y, s=s: np.full_like(np.asarray(y, dtype=float), s),
            inverse=lambda x, s=s, lo=lo: lo + np.asarray(x) / s,
        ))
        lo = hi
    return CircleMapSpec(
        family_tag="piecewise_linear",
        parameters={"slopes": tuple(slopes)},
        degree=len(slopes),
        branches=tuple(branches),
        indifferent_points=(),
        smoothness_class="c2",
    )


def make_doubling() -> CircleMapSpec:
    return make_piecewise_linear([2.0, 2.0])


def make_skew_product(base: BaseEndoSpec, fiber=None, fiber_rule=None) -> SkewProductSpec:
    skew = SkewProductSpec(base=base, fiber=fiber, fiber_rule=fiber_rule)
    if skew.total_degree <= base.degree:
        raise DomainError("skew product must satisfy deg(F) > deg(g)")
    return skew


# ---------------------------------------------------------------------------
# evaluation

def _branch_index(spec: CircleMapSpec, x: np.ndarray) -> np.ndarray:
    lefts = np.array([b.lo for b in spec.branches])
    idx = np.searchsorted(lefts, x, side="right") - 1
    return np.clip(idx, 0, spec.degree - 1)


def evaluate(spec: CircleMapSpec, x):
    """Map value (mod 1) and one-sided derivative of the active branch."""
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any((x_arr < 0.0) | (x_arr >= 1.0)):
        raise DomainError("circle points must lie in [0, 1)")
    idx = _branch_index(spec, x_arr)
    val = np.empty_like(x_arr)
    der = np.empty_like(x_arr)
    for b, branch in enumerate(spec.branches):
        m = idx == b
        if np.any(m):
            val[m] = branch.value(x_arr[m])
            der[m] = branch.deriv(x_arr[m])
    val = np.mod(val, 1.0)
    val[val >= 1.0] = 0.0  # guard against mod returning 1.0 - eps rounding up
    if np.isscalar(x) or np.asarray(x).ndim == 0:
        return float(val[0]), float(der[0])
    return val, der


def branch_preimage(spec: CircleMapSpec, branch_idx: int, x) -> np.ndarray:
    """Preimage of x under one branch, by safeguarded Newton with bisection.

    The branch value is monotone on [lo, hi] with image [0, 1], so the
    bracket never loses the root.
    """
    branch = spec.branches[branch_idx]
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    if branch.inverse is not None:
        return branch.inverse(x_arr)

    lo = np.full_like(x_arr, branch.lo)
    hi = np.full_like(x_arr, branch.hi)
    y = 0.5 * (lo + hi)
    for _ in range(NEWTON_MAX_ITER):
        r = branch.value(y) - x_arr
        if np.all(np.abs(r) <= NEWTON_TOL):
            return y
        pos = r > 0
        hi = np.where(pos, y, hi)
        lo = np.where(pos, lo, y)
        step = r / branch.deriv(y)
        y_new = y - step
        bad = (y_new <= lo) | (y_new >= hi) | ~np.isfinite(y_new)
        y_new = np.where(bad, 0.5 * (lo + hi), y_new)
        y = y_new
    r = branch.value(y) - x_arr
    if np.all(np.abs(r) <= 1e-10):
        return y
    raise NumericalError(
        f"branch {branch_idx} preimage solver did not converge "
        f"(max residual {np.max(np.abs(r)):.3e})")


def inverse_branches(spec: CircleMapSpec, x):
    """All degree-many preimages of x with their branch derivatives."""
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    out = []
    for b in range(spec.degree):
        y = branch_preimage(spec, b, x_arr)
        d = spec.branches[b].deriv(y)
        if np.isscalar(x) or np.asarray(x).ndim == 0:
            out.append((float(y[0]), float(d[0])))
        else:
            out.append((y, d))
    return out


def circle_distance(x, y):
    d = np.abs(np.asarray(x) - np.asarray(y)) % 1.0
    return np.minimum(d, 1.0 - d)


# ---------------------------------------------------------------------------
# JSON schema

def map_from_json(obj: dict):
    """Build a map spec from its JSON description.

    Schemas: {"type":"mp","p":..}, {"type":"c2","alpha":..},
    {"type":"pwl","slopes":[..]},
    {"type":"skew","base_k":..,"fiber":{..}} and
    {"type":"skew","base_k":..,"fiber_rule":{"family":"c2","alpha0":..,"eps":..}}.
    """
    if not isinstance(obj, dict) or "type" not in obj:
        raise DomainError("map spec must be an object with a 'type' field")
    kind = obj["type"]
    try:
        if kind == "mp":
            return make_manneville_pomeau(float(obj["p"]))
        if kind == "c2":
            return make_c2_intermittent(float(obj["alpha"]))
        if kind == "pwl":
            return make_piecewise_linear([float(s) for s in obj["slopes"]])
        if kind == "skew":
            base = BaseEndoSpec(int(obj["base_k"]))
            if "fiber" in obj:
                return make_skew_product(base, fiber=map_from_json(obj["fiber"]))
            rule = obj["fiber_rule"]
            if rule.get("family") != "c2":
                raise DomainError(
                    f"unsupported fiber rule family {rule.get('family')!r}")
            return make_skew_product(
                base,
                fiber_rule=C2FiberRule(float(rule["alpha0"]), float(rule["eps"])),
            )
    except KeyError as exc:
        raise DomainError(f"map spec missing field {exc}") from exc
    raise DomainError(f"unknown map type {kind!r}")


def map_to_json(spec) -> dict:
    if isinstance(spec, CircleMapSpec):
        if spec.family_tag == "mp":
            return {"type": "mp", "p": spec.parameters["p"]}
        if spec.family_tag == "c2_intermittent":
            return {"type": "c2", "alpha": spec.parameters["alpha"]}
        return {"type": "pwl", "slopes": list(spec.parameters["slopes"])}
    if isinstance(spec, SkewProductSpec):
        out = {"type": "skew", "base_k": spec.base.k}
        if spec.fiber is not None:
            out["fiber"] = map_to_json(spec.fiber)
        else:
            out["fiber_rule"] = {
                "family": "c2",
                "alpha0": spec.fiber_rule.alpha0,
                "eps": spec.fiber_rule.eps,
            }
        return out
    raise DomainError(f"cannot serialize {type(spec).__name__}")
