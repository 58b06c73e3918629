"""Offline optimum of the inventory-constrained revenue problem.

Given the whole sequence, the problem

    max sum_t g_t(v_t)   s.t.  sum_t v_t <= delta,  v_t >= 0

is concave with one coupling constraint, so the optimum is a water-filling
allocation: a single shadow price ``lambda_star`` such that every slot either
sells nothing (base price below the shadow price) or sells to the quantity
where its marginal revenue equals it.  ``solve`` finds the shadow price by
bisection on the allocation-sum curve; ``prefix_solve`` repeats this for every
prefix, warm-starting each bracket at the previous dual (the shadow price can
only rise as more slots compete for the same inventory).

``verify_kkt``, ``increment_bounds_check`` and ``interchange_check`` are
independent structural checks on solver output used throughout the test
suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

from . import _kernels
from .revenue import (
    InputSequence,
    LinearElasticityRevenue,
    LinearRevenue,
    PowerElasticityRevenue,
    RevenueFunction,
    packed_arrays,
)

__all__ = [
    "OfflineSolution",
    "PrefixOptima",
    "PrefixSolver",
    "solve",
    "prefix_solve",
    "verify_kkt",
    "KktReport",
    "increment_bounds_check",
    "IncrementBoundsReport",
    "interchange_check",
    "InterchangeReport",
]

MAX_ITER = 200


@dataclass(frozen=True)
class OfflineSolution:
    """Optimal shadow price, per-slot allocations and total revenue."""

    lambda_star: float
    allocations: tuple
    revenue: float
    active: bool

    def total_allocated(self) -> float:
        return sum(self.allocations)

    def to_dict(self) -> dict:
        return {
            "lambda_star": self.lambda_star,
            "allocations": list(self.allocations),
            "revenue": self.revenue,
        }


@dataclass(frozen=True)
class PrefixOptima:
    """Optimal revenue and dual for every prefix length t = 1..T."""

    eta: tuple
    lambdas: tuple

    def __len__(self) -> int:
        return len(self.eta)


def _effective_linear_price(f: RevenueFunction) -> Optional[float]:
    if isinstance(f, LinearRevenue):
        return f.p
    if isinstance(f, (LinearElasticityRevenue, PowerElasticityRevenue)) and f.alpha == 0.0:
        return f.p
    return None


def _interval_obj(f: RevenueFunction, lam: float, delta: float):
    """Allocation interval (lo, hi, saturated) for one curve at dual lam."""
    if lam > f.base_price:
        return 0.0, 0.0, False
    if lam < f.marginal(delta):
        return delta, delta, True
    iv = f.solve_marginal(lam, delta)
    if iv is None:
        # only reachable through floating-point ties at the interval edges
        return delta, delta, f.marginal(delta) > lam
    return iv.lo, iv.hi, False


def _interval_sums(functions, lam, delta):
    los, his = [], []
    smin = smax = 0.0
    saturated = False
    for f in functions:
        lo, hi, sat = _interval_obj(f, lam, delta)
        los.append(lo)
        his.append(hi)
        smin += lo
        smax += hi
        saturated = saturated or sat
    return smin, smax, saturated, los, his


def _resolve(los, his, delta):
    allocs = list(los)
    r = delta - sum(allocs)
    for i in range(len(allocs)):
        if r <= 0.0:
            break
        room = his[i] - allocs[i]
        if room > 0.0:
            add = min(room, r)
            allocs[i] += add
            r -= add
    if r > 1e-6 * delta:
        raise RuntimeError(f"dual search left {r} inventory unallocated")
    return allocs


def _water_fill_generic(functions, delta, lam_lo, price_bound):
    """Object-path twin of the packed kernel dual search.

    Returns (lam, bracket_lo, allocations).
    """
    smin, smax, sat, los, his = _interval_sums(functions, 0.0, delta)
    if smax <= delta and not sat:
        # inventory exceeds all maximizers: constraint inactive, zero dual
        return 0.0, 0.0, [f.argmax_on(delta) for f in functions]

    lam_hi = max(f.base_price for f in functions)
    smin, smax, sat, los, his = _interval_sums(functions, lam_hi, delta)
    if smin <= delta <= smax:
        return lam_hi, lam_hi, _resolve(los, his, delta)

    lam_l = max(lam_lo, 0.0)
    if lam_l > 0.0:
        if lam_l >= lam_hi:
            lam_l = lam_hi
        else:
            smin, smax, sat, los, his = _interval_sums(functions, lam_l, delta)
            if smax < delta:
                lam_l = 0.0
            elif smin <= delta and not sat:
                return lam_l, lam_l, _resolve(los, his, delta)

    eps = 1e-9 * price_bound
    for _ in range(MAX_ITER):
        if lam_hi - lam_l <= eps:
            break
        mid = 0.5 * (lam_l + lam_hi)
        if mid <= lam_l or mid >= lam_hi:
            break
        smin, smax, sat, los, his = _interval_sums(functions, mid, delta)
        if smin > delta:
            lam_l = mid
        elif smax < delta:
            lam_hi = mid
        elif sat:
            lam_l = mid
        else:
            return mid, mid, _resolve(los, his, delta)

    _, _, _, lo_side, _ = _interval_sums(functions, lam_hi, delta)
    _, _, _, _, hi_side = _interval_sums(functions, lam_l, delta)
    return 0.5 * (lam_l + lam_hi), lam_l, _resolve(lo_side, hi_side, delta)


def _dual_solve_generic(functions, delta, lam_lo, price_bound):
    lam, _, allocs = _water_fill_generic(functions, delta, lam_lo, price_bound)
    revenue = sum(f.eval(v) for f, v in zip(functions, allocs))
    return lam, allocs, revenue


def solve(sequence: InputSequence) -> OfflineSolution:
    """Offline optimal solution over the whole sequence."""
    if len(sequence) == 0:
        raise ValueError("sequence must be non-empty")
    packed = packed_arrays(sequence)
    if packed is not None:
        lam, allocs, revenue = _kernels.dual_solve(
            *packed, sequence.delta, 0.0, sequence.M
        )
    else:
        lam, allocs, revenue = _dual_solve_generic(
            sequence.functions, sequence.delta, 0.0, sequence.M
        )
    total = sum(allocs)
    active = abs(total - sequence.delta) <= 1e-9 * sequence.delta
    return OfflineSolution(
        lambda_star=lam, allocations=tuple(allocs), revenue=revenue, active=active
    )


class PrefixSolver:
    """Incremental prefix optima for slots arriving one at a time.

    ``push`` appends a curve and returns (eta_t, lambda_t) for the extended
    prefix.  The dual bracket is warm-started at the previous certified lower
    bound, and all-linear prefixes short-circuit to the running-maximum
    closed form (inventory times best base price).
    """

    def __init__(self, delta: float, price_bound: float):
        self.delta = delta
        self.price_bound = price_bound
        self.functions: list = []
        self.etas: list = []
        self.lambdas: list = []
        self._warm = 0.0
        self._last_lam = 0.0
        self._all_linear = True
        self._run_max = 0.0

    def push(self, f: RevenueFunction) -> Tuple[float, float]:
        self.functions.append(f)
        price = _effective_linear_price(f)
        if self._all_linear and price is None:
            self._all_linear = False
        if self._all_linear:
            self._run_max = max(self._run_max, price)
            eta = self.delta * self._run_max
            lam = self._run_max
            self._warm = lam
        else:
            lam, self._warm, allocs = _water_fill_generic(
                self.functions, self.delta, self._warm, self.price_bound
            )
            eta = sum(g.eval(v) for g, v in zip(self.functions, allocs))
            lam = max(lam, self._last_lam)
        self.etas.append(eta)
        self.lambdas.append(lam)
        self._last_lam = lam
        return eta, lam


def prefix_solve(sequence: InputSequence) -> PrefixOptima:
    """Optimal revenue and dual for every prefix of the sequence."""
    if len(sequence) == 0:
        raise ValueError("sequence must be non-empty")
    packed = packed_arrays(sequence)
    if packed is not None:
        etas, lams = _kernels.prefix_solve(*packed, sequence.delta, sequence.M)
        return PrefixOptima(eta=tuple(etas), lambdas=tuple(lams))
    solver = PrefixSolver(sequence.delta, sequence.M)
    for f in sequence.functions:
        solver.push(f)
    return PrefixOptima(eta=tuple(solver.etas), lambdas=tuple(solver.lambdas))


# -- structural checks ---------------------------------------------------------


@dataclass(frozen=True)
class KktViolation:
    slot: Optional[int]
    kind: str
    detail: str


@dataclass(frozen=True)
class KktReport:
    passed: bool
    violations: tuple

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "violations": [
                {"slot": v.slot, "kind": v.kind, "detail": v.detail}
                for v in self.violations
            ],
        }


def verify_kkt(sequence: InputSequence, sol: OfflineSolution) -> KktReport:
    """Slot-wise optimality conditions for a solution of this sequence.

    Every slot must either sell nothing with its base price at most the
    shadow price, or sell to a quantity where the marginal equals the shadow
    price; complementary slackness ties a positive shadow price to a fully
    used inventory.  Tolerance 1e-6 * M.
    """
    tol = 1e-6 * sequence.M
    delta = sequence.delta
    lam = sol.lambda_star
    violations: List[KktViolation] = []
    if len(sol.allocations) != len(sequence):
        raise ValueError("solution and sequence lengths differ")
    for t, (f, v) in enumerate(zip(sequence.functions, sol.allocations), start=1):
        if v < -1e-12:
            violations.append(KktViolation(t, "negative", f"allocation {v} < 0"))
        elif v <= 1e-9 * delta:
            if f.base_price > lam + tol:
                violations.append(
                    KktViolation(
                        t,
                        "idle-slot",
                        f"zero allocation but base price {f.base_price} > dual {lam}",
                    )
                )
        else:
            marg = f.marginal(min(v, delta))
            if abs(marg - lam) > tol:
                violations.append(
                    KktViolation(
                        t, "marginal", f"marginal {marg} differs from dual {lam}"
                    )
                )
    total = sol.total_allocated()
    if total > delta + 1e-7:
        violations.append(
            KktViolation(None, "inventory", f"total {total} exceeds inventory {delta}")
        )
    if abs(lam * (delta - total)) > tol * delta:
        violations.append(
            KktViolation(
                None,
                "slackness",
                f"dual {lam} with unused inventory {delta - total}",
            )
        )
    return KktReport(passed=not violations, violations=tuple(violations))


@dataclass(frozen=True)
class IncrementBoundsReport:
    passed: bool
    t: int
    increment: float
    lower: float
    middle: float
    upper: float
    failed: tuple


def increment_bounds_check(sequence: InputSequence, t: int) -> IncrementBoundsReport:
    """Bounds on the optimal-revenue increment when slot t is appended.

    With v the slot-t allocation of the length-t prefix optimum and dual
    values lam_prev, lam_cur of the two prefixes:

        g_t(v) - lam_cur * v  <=  eta_t - eta_prev  <=  g_t(v) - lam_prev * v
                              <=  g_t(vhat_t)
    """
    if not 2 <= t <= len(sequence):
        raise ValueError(f"slot index {t} outside [2, {len(sequence)}]")
    cur = solve(sequence.prefix(t))
    prev = solve(sequence.prefix(t - 1))
    f = sequence.functions[t - 1]
    v = cur.allocations[-1]
    gv = f.eval(v)
    increment = cur.revenue - prev.revenue
    lower = gv - cur.lambda_star * v
    middle = gv - prev.lambda_star * v
    upper = f.eval(f.argmax_on(sequence.delta))
    tol = 1e-6 * max(cur.revenue, 1.0)
    failed = []
    if increment < lower - tol:
        failed.append("increment below profit lower bound")
    if increment > middle + tol:
        failed.append("increment above profit upper bound")
    if middle > upper + tol:
        failed.append("profit bound above slot maximum revenue")
    return IncrementBoundsReport(
        passed=not failed,
        t=t,
        increment=increment,
        lower=lower,
        middle=middle,
        upper=upper,
        failed=tuple(failed),
    )


@dataclass(frozen=True)
class InterchangeReport:
    passed: bool
    tau: int
    original_increment: float
    swapped_increment: float


def interchange_check(sequence: InputSequence, tau: int) -> InterchangeReport:
    """Swapping adjacent slots cannot raise a curve's later contribution.

    The increment slot tau contributes at its original position must be at
    least the increment it contributes after being pushed one slot later.
    """
    if not 1 <= tau <= len(sequence) - 1:
        raise ValueError(f"swap index {tau} outside [1, {len(sequence) - 1}]")
    fns = list(sequence.functions)
    fns[tau - 1], fns[tau] = fns[tau], fns[tau - 1]
    swapped = InputSequence(tuple(fns), sequence.delta, sequence.m, sequence.M)

    eta_orig_tau = solve(sequence.prefix(tau)).revenue
    eta_orig_prev = solve(sequence.prefix(tau - 1)).revenue if tau >= 2 else 0.0
    eta_swap_next = solve(swapped.prefix(tau + 1)).revenue
    eta_swap_tau = solve(swapped.prefix(tau)).revenue

    lhs = eta_orig_tau - eta_orig_prev
    rhs = eta_swap_next - eta_swap_tau
    tol = 1e-6 * max(eta_swap_next, eta_orig_tau, 1.0)
    return InterchangeReport(
        passed=lhs >= rhs - tol,
        tau=tau,
        original_increment=lhs,
        swapped_increment=rhs,
    )
