"""Ratio-pursuit online algorithms and their guaranteed ratio parameters.

CR-Pursuit(pi) sells, at every slot, exactly enough to keep cumulative online
revenue equal to 1/pi of the offline optimum of the slots seen so far: the
slot sale solves g_t(v) = (eta_t - eta_{t-1}) / pi, which is always attainable
because the optimal-revenue increment never exceeds the slot's own maximum
revenue.  Feasibility (total sales within the inventory) is a measured
property of the run, not enforced: exploratory ratios are allowed to breach
so the worst-case inventory curve can be observed, while the guaranteed
parameters returned by ``ratio_one_way``, ``ratio_general`` and
``ratio_elasticity`` never breach.

The adaptive variant (one-way trading only) re-optimizes the pursued ratio at
every new best price: it picks the smallest ratio whose sale, plus the
worst-case future need of a price path rising to M, still fits the remaining
inventory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from . import _kernels
from .offline import PrefixSolver
from .revenue import InputSequence, RevenueFunction, packed_arrays

__all__ = [
    "TraceRow",
    "RatioConstants",
    "PursuitState",
    "pursuit_step",
    "run_pursuit",
    "ratio_one_way",
    "ratio_general",
    "ratio_elasticity",
    "elasticity_c_of_pi",
    "CEstimate",
    "c_constant",
    "AdaptivePursuitState",
    "new_adaptive_state",
    "adaptive_pursuit_step",
    "AdaptiveTraceRow",
    "run_adaptive",
]

#: revenue targets below this fraction of the prefix optimum count as no sale
ZERO_SALE_FLOOR = 1e-15
#: relative slack when flagging inventory breaches (guards exact-at-delta runs)
BREACH_GUARD = 1e-9


@dataclass(frozen=True)
class TraceRow:
    """One slot of a pursuit run, in report-column order.

    ``online_revenue`` and ``inventory_used`` are cumulative through this
    slot; ``slot_revenue`` is the revenue of this slot alone.
    """

    t: int
    base_price: float
    increment: float
    v_bar: float
    slot_revenue: float
    inventory_used: float
    online_revenue: float
    eta_opt: float
    breach: bool


@dataclass(frozen=True)
class RatioConstants:
    """Price spread and family factor behind the general guarantee."""

    theta: float
    c: float

    def __post_init__(self):
        if self.theta < 1.0:
            raise ValueError(f"price spread must be >= 1, got {self.theta}")
        if self.c < 1.0:
            raise ValueError(f"family factor must be >= 1, got {self.c}")

    def pi_upper(self) -> float:
        """Feasible pursued ratio c * (log(theta) + 1)."""
        return ratio_general(self.theta, self.c)


@dataclass
class PursuitState:
    """Running state of CR-Pursuit(pi) over one sequence.

    Single-owner mutable: one run drives one state; independent runs over
    different sequences can execute in parallel without sharing.
    """

    pi: float
    delta: float
    inventory_used: float = 0.0
    online_revenue: float = 0.0
    prev_eta: float = 0.0
    trace: List[TraceRow] = field(default_factory=list)
    breach_time: Optional[int] = None

    def __post_init__(self):
        if self.pi < 1.0:
            raise ValueError(f"pursued ratio must be >= 1, got {self.pi}")
        if self.delta <= 0.0:
            raise ValueError(f"inventory must be positive, got {self.delta}")

    @property
    def feasible(self) -> bool:
        return self.inventory_used <= self.delta * (1.0 + BREACH_GUARD)

    def _record(self, base_price: float, eta: float, increment: float, v: float, rev: float) -> None:
        self.inventory_used += v
        self.online_revenue += rev
        self.prev_eta = eta
        breach = self.inventory_used > self.delta * (1.0 + BREACH_GUARD)
        t = len(self.trace) + 1
        if breach and self.breach_time is None:
            self.breach_time = t
        self.trace.append(
            TraceRow(
                t, base_price, increment, v, rev,
                self.inventory_used, self.online_revenue, eta, breach,
            )
        )


def pursuit_step(state: PursuitState, g_t: RevenueFunction, eta_t: float) -> float:
    """Sell the quantity keeping the revenue ratio at pi after this slot.

    ``eta_t`` is the offline optimum of the prefix ending at this slot; the
    caller supplies it (typically from a :class:`~crpursuit.offline.PrefixSolver`).
    Returns the sale quantity.  Inventory breaches are recorded on the state
    and the run continues.
    """
    increment = eta_t - state.prev_eta
    if increment < 0.0:
        increment = 0.0
    target = increment / state.pi
    floor_scale = eta_t if eta_t > 1.0 else 1.0
    if target <= ZERO_SALE_FLOOR * floor_scale:
        v = 0.0
        rev = 0.0
    else:
        v = g_t.solve_value(target, state.delta)
        rev = g_t.eval(v)
    state._record(g_t.base_price, eta_t, increment, v, rev)
    return v


def run_pursuit(sequence: InputSequence, pi: float) -> PursuitState:
    """Run CR-Pursuit(pi) over the whole sequence and return its state."""
    state = PursuitState(pi=pi, delta=sequence.delta)
    packed = packed_arrays(sequence)
    if packed is not None:
        etas, vbars, revs = _kernels.pursuit_run(
            *packed, sequence.delta, sequence.M, pi
        )
        prev = 0.0
        for f, eta, v, rev in zip(sequence.functions, etas, vbars, revs):
            inc = eta - prev
            state._record(f.base_price, eta, inc if inc > 0.0 else 0.0, v, rev)
            prev = eta
        return state
    solver = PrefixSolver(sequence.delta, sequence.M)
    for f in sequence.functions:
        eta, _ = solver.push(f)
        pursuit_step(state, f, eta)
    return state


# -- guaranteed ratio parameters ----------------------------------------------


def ratio_one_way(theta: float) -> float:
    """Optimal pursued ratio for linear slots: log(theta) + 1."""
    if theta < 1.0:
        raise ValueError(f"price spread must be >= 1, got {theta}")
    return math.log(theta) + 1.0


def ratio_general(theta: float, c: float) -> float:
    """Feasible pursued ratio c * (log(theta) + 1) for a family with factor c."""
    if theta < 1.0:
        raise ValueError(f"price spread must be >= 1, got {theta}")
    if c < 1.0:
        raise ValueError(f"family factor must be >= 1, got {c}")
    return c * (math.log(theta) + 1.0)


def ratio_elasticity(theta: float) -> float:
    """Feasible pursued ratio for convex-elasticity slots.

    (log(theta) + 1)^2 / (log(theta) + 3/4), which stays below
    log(theta) + 4/3 for theta > 1.
    """
    if theta < 1.0:
        raise ValueError(f"price spread must be >= 1, got {theta}")
    log_theta = math.log(theta)
    return (log_theta + 1.0) ** 2 / (log_theta + 0.75)


def elasticity_c_of_pi(pi: float) -> float:
    """Per-step quantity factor 2 / (1 + sqrt(1 - 1/pi)) for elasticity slots."""
    if pi < 1.0:
        raise ValueError(f"ratio must be >= 1, got {pi}")
    return 2.0 / (1.0 + math.sqrt(1.0 - 1.0 / pi))


@dataclass(frozen=True)
class CEstimate:
    """Family factor sup g'(0) / (g(vhat)/vhat); ``exact`` is False when the
    value is a grid supremum, i.e. only a lower bound on the true factor."""

    value: float
    exact: bool


def c_constant(
    family: str,
    delta: float,
    p_range: Tuple[float, float],
    alpha_range: Optional[Tuple[float, float]] = None,
    beta: Optional[float] = None,
    grid_points: int = 32,
) -> CEstimate:
    """Family factor for one of the parametric families over bounded ranges.

    Closed forms exist when some member attains its maximizer inside the
    inventory range: 1 for linear, 2 for linear elasticity, (beta+1)/beta for
    power elasticity.  Otherwise the factor is estimated by a parameter-grid
    supremum (roughly ``grid_points**2`` members) and flagged non-exact.
    """
    if delta <= 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    p_lo, p_hi = p_range
    if not 0.0 < p_lo <= p_hi:
        raise ValueError(f"invalid base-price range {p_range}")
    if family == "linear":
        return CEstimate(1.0, exact=True)
    if family not in ("linear_elastic", "power_elastic"):
        raise ValueError(f"unknown family {family!r}")
    if alpha_range is None:
        raise ValueError(f"{family} requires an alpha range")
    a_lo, a_hi = alpha_range
    if not 0.0 <= a_lo <= a_hi:
        raise ValueError(f"invalid elasticity range {alpha_range}")
    if family == "linear_elastic":
        exponent = 1.0
    else:
        if beta is None or beta < 1.0:
            raise ValueError(f"power_elastic requires beta >= 1, got {beta}")
        exponent = beta
    # interior maximizer reachable: the curvature at a_hi pulls the cheapest
    # member's maximizer inside [0, delta]
    if a_hi > 0.0 and p_lo <= a_hi * (exponent + 1.0) * delta**exponent:
        return CEstimate((exponent + 1.0) / exponent, exact=True)
    best = 1.0
    from .revenue import LinearElasticityRevenue, PowerElasticityRevenue

    for i in range(grid_points):
        p = p_lo + (p_hi - p_lo) * i / max(grid_points - 1, 1)
        for j in range(grid_points):
            a = a_lo + (a_hi - a_lo) * j / max(grid_points - 1, 1)
            if family == "linear_elastic":
                f: RevenueFunction = LinearElasticityRevenue(p=p, alpha=a)
            else:
                f = PowerElasticityRevenue(p=p, alpha=a, beta=exponent)
            vhat = f.argmax_on(delta)
            gmax = f.eval(vhat)
            if gmax > 0.0:
                best = max(best, f.base_price * vhat / gmax)
    return CEstimate(best, exact=False)


# -- adaptive variant (one-way trading only) ------------------------------------


@dataclass
class AdaptivePursuitState:
    """State of the adaptive pursuit: the ratio can only tighten over time."""

    current_pi: float
    best_price_seen: float = 0.0
    inventory_used: float = 0.0
    online_revenue: float = 0.0


def new_adaptive_state(m: float, M: float) -> AdaptivePursuitState:
    """Fresh state starting from the static guaranteed ratio for [m, M]."""
    if not 0.0 < m <= M:
        raise ValueError(f"need 0 < m <= M, got m={m}, M={M}")
    return AdaptivePursuitState(current_pi=ratio_one_way(M / m))


def adaptive_pursuit_step(
    state: AdaptivePursuitState, price: float, delta: float, M: float
) -> Tuple[float, float]:
    """One adaptive step at a linear slot with the given price.

    Prices at or below the best seen sell nothing.  Otherwise the step picks
    the smallest maintainable ratio pi_t in [1, current_pi]: selling
    v = (delta * price / pi_t - online_revenue) / price lifts the revenue to
    1/pi_t of the prefix optimum, and the sale is admissible when

        inventory_used + v + (delta / pi_t) * log(M / price) <= delta,

    the log term being the inventory a critical price path climbing from the
    current price to M would still require.  This admissibility rule is one
    consistent instantiation of the adaptive idea; the sketch it follows does
    not pin down a unique formula.  Returns (pi_t, v_t) and updates the state.
    """
    if price <= 0.0 or price > M * (1.0 + 1e-9):
        raise ValueError(f"price {price} outside (0, {M}]")
    if price <= state.best_price_seen:
        return state.current_pi, 0.0

    slack = delta * 1e-12

    def admissible(pi: float) -> bool:
        v = (delta * price / pi - state.online_revenue) / price
        reserve = (delta / pi) * math.log(M / price) if price < M else 0.0
        return state.inventory_used + v + reserve <= delta + slack

    if admissible(1.0):
        pi_t = 1.0
    elif not admissible(state.current_pi):
        pi_t = state.current_pi  # numerical fallback; always admissible in exact math
    else:
        lo, hi = 1.0, state.current_pi
        while hi - lo > 1e-9:
            mid = 0.5 * (lo + hi)
            if admissible(mid):
                hi = mid
            else:
                lo = mid
        pi_t = hi

    v = (delta * price / pi_t - state.online_revenue) / price
    if v < 0.0:
        v = 0.0
    state.best_price_seen = price
    state.current_pi = pi_t
    state.inventory_used += v
    state.online_revenue += price * v
    return pi_t, v


@dataclass(frozen=True)
class AdaptiveTraceRow:
    t: int
    price: float
    pi: float
    v: float
    inventory_used: float
    online_revenue: float


@dataclass(frozen=True)
class AdaptiveRunResult:
    state: AdaptivePursuitState
    trace: tuple

    @property
    def final_pi(self) -> float:
        return self.state.current_pi

    @property
    def online_revenue(self) -> float:
        return self.state.online_revenue

    @property
    def inventory_used(self) -> float:
        return self.state.inventory_used


def run_adaptive(sequence: InputSequence) -> AdaptiveRunResult:
    """Run the adaptive pursuit over an all-linear sequence."""
    from .offline import _effective_linear_price

    prices = []
    for f in sequence.functions:
        p = _effective_linear_price(f)
        if p is None:
            raise ValueError("adaptive pursuit supports linear slots only")
        prices.append(p)
    state = new_adaptive_state(sequence.m, sequence.M)
    rows = []
    for t, price in enumerate(prices, start=1):
        pi_t, v = adaptive_pursuit_step(state, price, sequence.delta, sequence.M)
        rows.append(
            AdaptiveTraceRow(t, price, pi_t, v, state.inventory_used, state.online_revenue)
        )
    return AdaptiveRunResult(state=state, trace=tuple(rows))
