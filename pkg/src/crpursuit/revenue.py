"""Concave per-slot revenue curves and the input sequences built from them.

A revenue curve g maps a selling quantity v >= 0 to the revenue received in
one time slot.  Admissible curves are concave, non-decreasing and
differentiable on the inventory range, with g(0) = 0 and a positive marginal
revenue at zero (the "base price").  Three parametric families are provided:

    LinearRevenue            g(v) = p * v
    LinearElasticityRevenue  g(v) = (p - alpha * v) * v
    PowerElasticityRevenue   g(v) = (p - alpha * v**beta) * v,  beta >= 1

plus ``UserConcaveRevenue`` for arbitrary callables, which is validated with a
randomized concavity probe at construction.

Every curve answers four numeric queries used by the solvers: point
evaluation, marginal revenue, the maximizer over [0, delta], and two inverse
queries (quantity for a target revenue, quantity range for a target
marginal).  Inverses use closed forms where exact and monotone bisection
otherwise (200 iteration cap, absolute+relative tolerance 1e-9).
"""

from __future__ import annotations

import json
import math
import random
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = [
    "RevenueFunction",
    "LinearRevenue",
    "LinearElasticityRevenue",
    "PowerElasticityRevenue",
    "UserConcaveRevenue",
    "InputSequence",
    "MarginalInterval",
    "UnreachableTargetError",
    "evaluate",
    "derivative",
    "argmax_on",
    "solve_value",
    "solve_marginal",
    "concavity_probe",
    "load_sequence",
    "save_sequence",
    "sequence_to_dict",
    "sequence_from_dict",
    "packed_arrays",
]

#: iteration cap for every bisection in this package
BISECT_MAX_ITER = 200
#: absolute + relative tolerance for inverse queries
SOLVE_TOL = 1e-9


class UnreachableTargetError(ValueError):
    """Raised when a revenue target exceeds the curve maximum on [0, delta]."""


@dataclass(frozen=True)
class MarginalInterval:
    """Closed interval [lo, hi] of quantities where the marginal equals a value.

    For strictly concave curves the interval is a single point; for a linear
    curve queried exactly at its price it is the whole [0, delta] range.
    """

    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    def width(self) -> float:
        return self.hi - self.lo


def _bisect_root(fn: Callable[[float], float], lo: float, hi: float) -> float:
    """Smallest root of a non-increasing-sign predicate on [lo, hi].

    ``fn`` must be monotone non-decreasing; returns the smallest v with
    fn(v) >= 0, assuming fn(lo) <= 0 <= fn(hi).  Runs until the bracket
    collapses in floating point (or the iteration cap).
    """
    if fn(lo) >= 0.0:
        return lo
    for _ in range(BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if fn(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return hi


class RevenueFunction(ABC):
    """One slot's concave revenue curve.

    Subclasses provide :meth:`eval` and :meth:`marginal`; the inverse queries
    have generic bisection implementations that closed-form subclasses
    override.  Instances are immutable after construction and safe to share.
    """

    @abstractmethod
    def eval(self, v: float) -> float:
        """Revenue g(v) for selling quantity v >= 0."""

    @abstractmethod
    def marginal(self, v: float) -> float:
        """Marginal revenue g'(v), non-increasing in v."""

    @property
    def base_price(self) -> float:
        """Marginal revenue at zero quantity; positive for admissible curves."""
        return self.marginal(0.0)

    def argmax_on(self, delta: float) -> float:
        """Smallest maximizer of the curve over [0, delta]."""
        if delta <= 0.0:
            raise ValueError(f"delta must be positive, got {delta}")
        if self.marginal(delta) > 0.0:
            return delta
        # smallest v where the marginal has dropped to zero
        return _bisect_root(lambda v: -self.marginal(v), 0.0, delta)

    def solve_value(self, target: float, delta: float) -> float:
        """Smallest v in [0, delta] with g(v) = target.

        Raises :class:`UnreachableTargetError` if the target exceeds the
        maximum of the curve on [0, delta] beyond tolerance.
        """
        if target < 0.0:
            raise ValueError(f"target revenue must be >= 0, got {target}")
        if target == 0.0:
            return 0.0
        vhat = self.argmax_on(delta)
        gmax = self.eval(vhat)
        if target > gmax:
            if target > gmax + SOLVE_TOL * max(1.0, target):
                raise UnreachableTargetError(
                    f"target {target} exceeds curve maximum {gmax}"
                )
            return vhat
        return _bisect_root(lambda v: self.eval(v) - target, 0.0, vhat)

    def solve_marginal(self, lam: float, delta: float) -> Optional[MarginalInterval]:
        """Quantities in [0, delta] where the marginal equals ``lam``.

        Returns ``None`` when there is no solution, i.e. when the marginal at
        zero is already below ``lam`` or the marginal at ``delta`` is still
        above it.
        """
        if lam < 0.0:
            raise ValueError(f"marginal value must be >= 0, got {lam}")
        if lam > self.marginal(0.0) or lam < self.marginal(delta):
            return None
        # marginal is non-increasing: the solution set is [lo, hi] with
        #   lo = smallest v with g'(v) <= lam,  hi = largest v with g'(v) >= lam
        lo = _bisect_root(lambda v: lam - self.marginal(v), 0.0, delta)
        hi = _largest_at_or_above(self.marginal, lam, lo, delta)
        return MarginalInterval(min(lo, hi), max(lo, hi))


def _largest_at_or_above(
    marginal: Callable[[float], float], lam: float, lo: float, hi: float
) -> float:
    """Largest v in [lo, hi] with marginal(v) >= lam (marginal non-increasing)."""
    if marginal(hi) >= lam:
        return hi
    for _ in range(BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if marginal(mid) >= lam:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class LinearRevenue(RevenueFunction):
    """g(v) = p * v: constant marginal revenue, the classic trading slot."""

    p: float

    def __post_init__(self):
        if self.p <= 0.0:
            raise ValueError(f"price must be positive, got {self.p}")

    def eval(self, v: float) -> float:
        _check_quantity(v)
        return self.p * v

    def marginal(self, v: float) -> float:
        _check_quantity(v)
        return self.p

    def argmax_on(self, delta: float) -> float:
        if delta <= 0.0:
            raise ValueError(f"delta must be positive, got {delta}")
        return delta

    def solve_value(self, target: float, delta: float) -> float:
        if target < 0.0:
            raise ValueError(f"target revenue must be >= 0, got {target}")
        gmax = self.p * delta
        if target > gmax + SOLVE_TOL * max(1.0, target):
            raise UnreachableTargetError(f"target {target} exceeds {gmax}")
        return min(target / self.p, delta)

    def solve_marginal(self, lam: float, delta: float) -> Optional[MarginalInterval]:
        if lam < 0.0:
            raise ValueError(f"marginal value must be >= 0, got {lam}")
        if lam != self.p:
            return None
        return MarginalInterval(0.0, delta)


@dataclass(frozen=True)
class LinearElasticityRevenue(RevenueFunction):
    """g(v) = (p - alpha * v) * v: price drops linearly with quantity sold."""

    p: float
    alpha: float

    def __post_init__(self):
        if self.p <= 0.0:
            raise ValueError(f"base price must be positive, got {self.p}")
        if self.alpha < 0.0:
            raise ValueError(f"elasticity slope must be >= 0, got {self.alpha}")

    def eval(self, v: float) -> float:
        _check_quantity(v)
        return (self.p - self.alpha * v) * v

    def marginal(self, v: float) -> float:
        _check_quantity(v)
        return self.p - 2.0 * self.alpha * v

    def argmax_on(self, delta: float) -> float:
        if delta <= 0.0:
            raise ValueError(f"delta must be positive, got {delta}")
        if self.alpha == 0.0:
            return delta
        return min(self.p / (2.0 * self.alpha), delta)

    def solve_value(self, target: float, delta: float) -> float:
        if target < 0.0:
            raise ValueError(f"target revenue must be >= 0, got {target}")
        if self.alpha == 0.0:
            return LinearRevenue(self.p).solve_value(target, delta)
        vhat = self.argmax_on(delta)
        gmax = self.eval(vhat)
        if target > gmax:
            if target > gmax + SOLVE_TOL * max(1.0, target):
                raise UnreachableTargetError(f"target {target} exceeds {gmax}")
            return vhat
        # smallest root of alpha v^2 - p v + target = 0, in the stable form
        disc = self.p * self.p - 4.0 * self.alpha * target
        return 2.0 * target / (self.p + math.sqrt(max(disc, 0.0)))

    def solve_marginal(self, lam: float, delta: float) -> Optional[MarginalInterval]:
        if lam < 0.0:
            raise ValueError(f"marginal value must be >= 0, got {lam}")
        if self.alpha == 0.0:
            return LinearRevenue(self.p).solve_marginal(lam, delta)
        if lam > self.p or lam < self.marginal(delta):
            return None
        v = (self.p - lam) / (2.0 * self.alpha)
        v = min(max(v, 0.0), delta)
        return MarginalInterval(v, v)


@dataclass(frozen=True)
class PowerElasticityRevenue(RevenueFunction):
    """g(v) = (p - alpha * v**beta) * v: convex elasticity with exponent beta."""

    p: float
    alpha: float
    beta: float

    def __post_init__(self):
        if self.p <= 0.0:
            raise ValueError(f"base price must be positive, got {self.p}")
        if self.alpha < 0.0:
            raise ValueError(f"elasticity coefficient must be >= 0, got {self.alpha}")
        if self.beta < 1.0:
            raise ValueError(f"exponent must be >= 1 for convexity, got {self.beta}")

    def eval(self, v: float) -> float:
        _check_quantity(v)
        return (self.p - self.alpha * v**self.beta) * v

    def marginal(self, v: float) -> float:
        _check_quantity(v)
        return self.p - self.alpha * (self.beta + 1.0) * v**self.beta

    def argmax_on(self, delta: float) -> float:
        if delta <= 0.0:
            raise ValueError(f"delta must be positive, got {delta}")
        if self.alpha == 0.0:
            return delta
        vhat = (self.p / (self.alpha * (self.beta + 1.0))) ** (1.0 / self.beta)
        return min(vhat, delta)

    def solve_marginal(self, lam: float, delta: float) -> Optional[MarginalInterval]:
        if lam < 0.0:
            raise ValueError(f"marginal value must be >= 0, got {lam}")
        if self.alpha == 0.0:
            return LinearRevenue(self.p).solve_marginal(lam, delta)
        if lam > self.p or lam < self.marginal(delta):
            return None
        v = ((self.p - lam) / (self.alpha * (self.beta + 1.0))) ** (1.0 / self.beta)
        v = min(max(v, 0.0), delta)
        return MarginalInterval(v, v)


class UserConcaveRevenue(RevenueFunction):
    """Arbitrary user-supplied curve, validated at construction.

    The constructor probes g(0) = 0, a positive marginal at zero, and chord
    concavity on random triples over [0, delta]; non-concave input fails
    fast.  The inverse queries fall back to the generic bisections.
    """

    def __init__(
        self,
        eval_fn: Callable[[float], float],
        marginal_fn: Callable[[float], float],
        delta: float,
        name: str = "user",
    ):
        if delta <= 0.0:
            raise ValueError(f"delta must be positive, got {delta}")
        if abs(eval_fn(0.0)) > 1e-12:
            raise ValueError("revenue at zero quantity must be 0")
        if marginal_fn(0.0) <= 0.0:
            raise ValueError("base price must be positive")
        self._eval_fn = eval_fn
        self._marginal_fn = marginal_fn
        self._delta = delta
        self.name = name
        problems = concavity_probe(self, delta)
        if problems:
            raise ValueError(f"curve failed concavity probe: {problems[0]}")

    def eval(self, v: float) -> float:
        _check_quantity(v)
        return self._eval_fn(v)

    def marginal(self, v: float) -> float:
        _check_quantity(v)
        return self._marginal_fn(v)

    def __repr__(self):
        return f"UserConcaveRevenue(name={self.name!r}, delta={self._delta})"


def _check_quantity(v: float) -> None:
    if v < 0.0:
        raise ValueError(f"quantity must be >= 0, got {v}")


def concavity_probe(
    f: RevenueFunction, delta: float, trials: int = 200, tol: float = 1e-9, seed: int = 7
) -> list:
    """Check chord-slope monotonicity on random triples over [0, delta].

    For concave g, any 0 <= a < b < c <= delta satisfies
    slope(a, b) >= slope(b, c).  Returns a list of violation descriptions
    (empty when the probe passes).
    """
    rng = random.Random(seed)
    problems = []
    for _ in range(trials):
        a, b, c = sorted(rng.uniform(0.0, delta) for _ in range(3))
        if b - a < 1e-12 * delta or c - b < 1e-12 * delta:
            continue
        left = (f.eval(b) - f.eval(a)) / (b - a)
        right = (f.eval(c) - f.eval(b)) / (c - b)
        if left < right - tol * max(1.0, abs(left), abs(right)):
            problems.append(f"slope({a:.6g},{b:.6g})={left:.6g} < slope({b:.6g},{c:.6g})={right:.6g}")
    return problems


# -- spec-shaped operation surface -------------------------------------------
#
# The module-level operations validate the quantity against the inventory
# bound; the methods above are the unchecked fast primitives.


def evaluate(f: RevenueFunction, v: float, delta: float) -> float:
    """Revenue g(v), with 0 <= v <= delta enforced."""
    _check_domain(v, delta)
    return f.eval(v)


def derivative(f: RevenueFunction, v: float, delta: float) -> float:
    """Marginal revenue g'(v), with 0 <= v <= delta enforced."""
    _check_domain(v, delta)
    return f.marginal(v)


def argmax_on(f: RevenueFunction, delta: float) -> float:
    """Smallest maximizer of g over [0, delta]."""
    return f.argmax_on(delta)


def solve_value(f: RevenueFunction, target: float, delta: float) -> float:
    """Smallest v with g(v) = target, within 1e-9 * max(1, target)."""
    return f.solve_value(target, delta)


def solve_marginal(f: RevenueFunction, lam: float, delta: float) -> Optional[MarginalInterval]:
    """Interval of v in [0, delta] with g'(v) = lam, or None when empty."""
    return f.solve_marginal(lam, delta)


def _check_domain(v: float, delta: float) -> None:
    if v < 0.0 or v > delta:
        raise ValueError(f"quantity {v} outside [0, {delta}]")


# -- input sequences ----------------------------------------------------------


@dataclass(frozen=True)
class InputSequence:
    """Ordered revenue curves plus the problem constants.

    ``delta`` is the total inventory, ``m`` and ``M`` bound every slot's base
    price.  ``theta() = M / m`` is the price-spread ratio driving all
    competitive-ratio formulas.
    """

    functions: tuple
    delta: float
    m: float
    M: float

    def __post_init__(self):
        object.__setattr__(self, "functions", tuple(self.functions))
        if self.delta <= 0.0:
            raise ValueError(f"inventory must be positive, got {self.delta}")
        if not (0.0 < self.m <= self.M):
            raise ValueError(f"need 0 < m <= M, got m={self.m}, M={self.M}")
        slack = 1e-9 * self.M
        for i, f in enumerate(self.functions):
            price = f.base_price
            if price < self.m - slack or price > self.M + slack:
                raise ValueError(
                    f"slot {i + 1} base price {price} outside [{self.m}, {self.M}]"
                )

    def __len__(self) -> int:
        return len(self.functions)

    def __iter__(self):
        return iter(self.functions)

    def theta(self) -> float:
        return self.M / self.m

    def prefix(self, t: int) -> "InputSequence":
        """First t slots with the same problem constants."""
        if not 1 <= t <= len(self.functions):
            raise ValueError(f"prefix length {t} outside [1, {len(self.functions)}]")
        return InputSequence(self.functions[:t], self.delta, self.m, self.M)

    def base_prices(self) -> list:
        return [f.base_price for f in self.functions]


# -- JSON sequence files ------------------------------------------------------

_KIND_NAMES = {"linear": 0, "linear_elastic": 1, "power_elastic": 2}


def _slot_to_dict(f: RevenueFunction) -> dict:
    if isinstance(f, LinearRevenue):
        return {"kind": "linear", "p": f.p}
    if isinstance(f, LinearElasticityRevenue):
        return {"kind": "linear_elastic", "p": f.p, "alpha": f.alpha}
    if isinstance(f, PowerElasticityRevenue):
        return {"kind": "power_elastic", "p": f.p, "alpha": f.alpha, "beta": f.beta}
    raise ValueError(f"cannot serialize revenue curve of type {type(f).__name__}")


def _slot_from_dict(d: dict) -> RevenueFunction:
    if not isinstance(d, dict) or "kind" not in d:
        raise ValueError(f"malformed slot entry: {d!r}")
    kind = d["kind"]
    if kind == "linear":
        return LinearRevenue(p=float(d["p"]))
    if kind == "linear_elastic":
        return LinearElasticityRevenue(p=float(d["p"]), alpha=float(d.get("alpha", 0.0)))
    if kind == "power_elastic":
        return PowerElasticityRevenue(
            p=float(d["p"]), alpha=float(d.get("alpha", 0.0)), beta=float(d.get("beta", 1.0))
        )
    raise ValueError(f"unknown slot kind {kind!r}")


def sequence_to_dict(seq: InputSequence) -> dict:
    return {
        "delta": seq.delta,
        "m": seq.m,
        "M": seq.M,
        "slots": [_slot_to_dict(f) for f in seq.functions],
    }


def sequence_from_dict(d: dict) -> InputSequence:
    for key in ("delta", "m", "M", "slots"):
        if key not in d:
            raise ValueError(f"sequence file missing key {key!r}")
    slots = d["slots"]
    if not isinstance(slots, list) or not slots:
        raise ValueError("sequence file has no slots")
    return InputSequence(
        functions=tuple(_slot_from_dict(s) for s in slots),
        delta=float(d["delta"]),
        m=float(d["m"]),
        M=float(d["M"]),
    )


def save_sequence(seq: InputSequence, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(sequence_to_dict(seq), fh, indent=1)
        fh.write("\n")


def load_sequence(path) -> InputSequence:
    with open(path, "r", encoding="utf-8") as fh:
        return sequence_from_dict(json.load(fh))


def packed_arrays(seq: InputSequence):
    """Struct-of-arrays form for the compiled kernels, or None.

    Returns (kinds, prices, alphas, betas) as numpy arrays when every slot
    belongs to one of the three parametric families; user-supplied curves are
    not packable and force the generic object path.
    """
    n = len(seq.functions)
    kinds = np.empty(n, dtype=np.int8)
    ps = np.empty(n, dtype=np.float64)
    alphas = np.zeros(n, dtype=np.float64)
    betas = np.ones(n, dtype=np.float64)
    for i, f in enumerate(seq.functions):
        if isinstance(f, LinearRevenue):
            kinds[i] = 0
            ps[i] = f.p
        elif isinstance(f, LinearElasticityRevenue):
            kinds[i] = 1
            ps[i] = f.p
            alphas[i] = f.alpha
        elif isinstance(f, PowerElasticityRevenue):
            kinds[i] = 2
            ps[i] = f.p
            alphas[i] = f.alpha
            betas[i] = f.beta
        else:
            return None
    return kinds, ps, alphas, betas
