"""Adversarial input generation and empirical worst-case measurements.

The critical sequence for linear slots is a geometrically spaced strictly
increasing price ladder from m to M; as the ladder is refined, the total
inventory a pursuit run sells approaches delta * (1 + log(theta)) / pi, so
the ladder pins down both the worst case and the optimal ratio empirically.

``stopper`` implements the adversary that certifies the optimality of the
pursuit ratio against ANY deterministic algorithm: it feeds the worst-case
slots one at a time and ends the sequence the moment the algorithm's
cumulative sales drop to or below the pursuit run's, at which point the
algorithm's revenue cannot exceed the pursuit revenue and its ratio is at
least the pursued one.  If the trigger never fires the algorithm outsold the
pursuit run on every prefix, which on a true worst case (where the pursuit
sells the whole inventory) would make the algorithm infeasible.
"""

from __future__ import annotations

import itertools
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .offline import PrefixSolver
from .online import PursuitState, pursuit_step, run_pursuit
from .revenue import (
    InputSequence,
    LinearElasticityRevenue,
    LinearRevenue,
    PowerElasticityRevenue,
    RevenueFunction,
)

__all__ = [
    "CriticalSequenceSpec",
    "critical_sequence",
    "empirical_phi",
    "phi_curve",
    "OnlineAlgorithm",
    "GreedyAlgorithm",
    "ThresholdAlgorithm",
    "CRPursuitAlgorithm",
    "make_baseline",
    "StopperReport",
    "stopper",
    "random_sequence",
    "WorstCaseReport",
    "worst_case_search",
]


@dataclass(frozen=True)
class CriticalSequenceSpec:
    """Parameters of the geometric price ladder."""

    m: float
    M: float
    n: int
    delta: float

    def __post_init__(self):
        if not 0.0 < self.m <= self.M:
            raise ValueError(f"need 0 < m <= M, got m={self.m}, M={self.M}")
        if self.n < 1:
            raise ValueError(f"need at least one step, got {self.n}")
        if self.delta <= 0.0:
            raise ValueError(f"inventory must be positive, got {self.delta}")


def critical_sequence(spec: CriticalSequenceSpec) -> InputSequence:
    """Linear slots at prices m * theta**((i-1)/(n-1)), i = 1..n.

    A single slot at price m when n = 1; all slots at price m when m = M.
    """
    if spec.n == 1 or spec.m == spec.M:
        prices = [spec.m] * spec.n
    else:
        theta = spec.M / spec.m
        prices = [spec.m * theta ** (i / (spec.n - 1)) for i in range(spec.n)]
        prices[-1] = spec.M  # pin the endpoint against pow rounding
    return InputSequence(
        functions=tuple(LinearRevenue(p) for p in prices),
        delta=spec.delta,
        m=spec.m,
        M=spec.M,
    )


def empirical_phi(pi: float, sequence: InputSequence) -> float:
    """Total quantity CR-Pursuit(pi) sells on this sequence, breaches allowed."""
    return run_pursuit(sequence, pi).inventory_used


def phi_curve(pis: Sequence[float], sequence: InputSequence) -> List[Tuple[float, float]]:
    """(pi, total sold) along an ascending ratio grid."""
    pis = list(pis)
    if not pis:
        raise ValueError("ratio grid is empty")
    if any(b <= a for a, b in zip(pis, pis[1:])):
        raise ValueError("ratio grid must be sorted strictly ascending")
    return [(pi, empirical_phi(pi, sequence)) for pi in pis]


# -- deterministic online algorithms for the stopper ---------------------------


class OnlineAlgorithm(ABC):
    """A deterministic online seller driven slot by slot by the stopper."""

    name = "algorithm"

    def begin(self, delta: float, m: float, M: float) -> None:
        """Reset internal state for a fresh run."""
        self.delta = delta
        self.m = m
        self.M = M
        self.remaining = delta

    @abstractmethod
    def step(self, f: RevenueFunction) -> float:
        """Sale quantity for the revealed slot; must respect the budget."""


class GreedyAlgorithm(OnlineAlgorithm):
    """Sells each slot's maximizer immediately, capped by what is left."""

    name = "greedy"

    def step(self, f: RevenueFunction) -> float:
        v = min(f.argmax_on(self.delta), self.remaining)
        self.remaining -= v
        return v


class ThresholdAlgorithm(OnlineAlgorithm):
    """Waits for a base price at or above the threshold, then sells everything."""

    def __init__(self, threshold: float):
        if threshold <= 0.0:
            raise ValueError(f"threshold must be positive, got {threshold}")
        self.threshold = threshold
        self.name = f"threshold:{threshold:.6g}"

    def step(self, f: RevenueFunction) -> float:
        if f.base_price >= self.threshold and self.remaining > 0.0:
            v = self.remaining
            self.remaining = 0.0
            return v
        return 0.0


class CRPursuitAlgorithm(OnlineAlgorithm):
    """The pursuit algorithm itself behind the common driver interface."""

    def __init__(self, pi: float):
        self.pi = pi
        self.name = f"cr-pursuit:{pi:.6g}"

    def begin(self, delta: float, m: float, M: float) -> None:
        super().begin(delta, m, M)
        self._solver = PrefixSolver(delta, M)
        self._state = PursuitState(pi=self.pi, delta=delta)

    def step(self, f: RevenueFunction) -> float:
        eta, _ = self._solver.push(f)
        v = pursuit_step(self._state, f, eta)
        v = min(v, self.remaining)
        self.remaining -= v
        return v


def make_baseline(name: str) -> OnlineAlgorithm:
    """Parse a baseline descriptor: greedy | threshold:<price> | cr-pursuit:<pi>."""
    if name == "greedy":
        return GreedyAlgorithm()
    if name.startswith("threshold:"):
        return ThresholdAlgorithm(float(name.split(":", 1)[1]))
    if name.startswith("cr-pursuit:"):
        return CRPursuitAlgorithm(float(name.split(":", 1)[1]))
    raise ValueError(f"unknown baseline {name!r}")


@dataclass(frozen=True)
class StopperReport:
    """Outcome of driving one algorithm through the stopping adversary."""

    algorithm: str
    stop_time: int
    algorithm_revenue: float
    eta_opt: float
    achieved_ratio: float
    stopped: bool
    budget_violated: bool

    def to_row(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "tau": self.stop_time,
            "alg_revenue": self.algorithm_revenue,
            "eta_opt": self.eta_opt,
            "ratio": self.achieved_ratio,
        }


def stopper(
    algorithm: OnlineAlgorithm, worst_sequence: InputSequence, pi_ref: float
) -> StopperReport:
    """Feed slots until the algorithm's cumulative sales fall to or below the
    reference pursuit run's, then report the ratio it was forced into.

    Ties count as a stop.  When no stop occurs the report covers the full
    horizon with ``stopped=False``: the algorithm stayed ahead of the pursuit
    run's inventory use everywhere, which on an exact worst case certifies it
    infeasible.
    """
    ref = run_pursuit(worst_sequence, pi_ref)
    algorithm.begin(worst_sequence.delta, worst_sequence.m, worst_sequence.M)
    budget_cap = worst_sequence.delta * (1.0 + 1e-9)
    alg_used = 0.0
    alg_revenue = 0.0
    budget_violated = False
    for f, row in zip(worst_sequence.functions, ref.trace):
        a = algorithm.step(f)
        if a < 0.0:
            raise ValueError(f"{algorithm.name} returned a negative sale {a}")
        alg_used += a
        alg_revenue += f.eval(a)
        if alg_used > budget_cap:
            budget_violated = True
        if alg_used <= row.inventory_used:
            ratio = row.eta_opt / alg_revenue if alg_revenue > 0.0 else math.inf
            return StopperReport(
                algorithm=algorithm.name,
                stop_time=row.t,
                algorithm_revenue=alg_revenue,
                eta_opt=row.eta_opt,
                achieved_ratio=ratio,
                stopped=True,
                budget_violated=budget_violated,
            )
    last = ref.trace[-1]
    ratio = last.eta_opt / alg_revenue if alg_revenue > 0.0 else math.inf
    return StopperReport(
        algorithm=algorithm.name,
        stop_time=last.t,
        algorithm_revenue=alg_revenue,
        eta_opt=last.eta_opt,
        achieved_ratio=ratio,
        stopped=False,
        budget_violated=budget_violated,
    )


# -- random instances -----------------------------------------------------------


def random_sequence(
    seed,
    T: int,
    family: str = "linear",
    *,
    delta: float,
    m: float,
    M: float,
    p_range: Optional[Tuple[float, float]] = None,
    alpha_range: Optional[Tuple[float, float]] = None,
    beta_range: Tuple[float, float] = (1.0, 3.0),
) -> InputSequence:
    """Deterministic random sequence for a fixed seed.

    Base prices are uniform on ``p_range`` (default the full [m, M] band);
    elasticity slopes uniform on ``alpha_range`` (default scaled so the
    elasticity matters over the inventory range).
    """
    if T < 1:
        raise ValueError(f"need at least one slot, got T={T}")
    if not 0.0 < m <= M:
        raise ValueError(f"need 0 < m <= M, got m={m}, M={M}")
    if p_range is None:
        p_range = (m, M)
    if not (m <= p_range[0] <= p_range[1] <= M):
        raise ValueError(f"price range {p_range} outside [{m}, {M}]")
    if alpha_range is None:
        alpha_range = (0.0, 2.0 * M / delta)
    if not 0.0 <= alpha_range[0] <= alpha_range[1]:
        raise ValueError(f"invalid elasticity range {alpha_range}")
    if family not in ("linear", "linear_elastic", "power_elastic", "mixed"):
        raise ValueError(f"unknown family {family!r}")
    rng = np.random.default_rng(seed)
    functions: List[RevenueFunction] = []
    for _ in range(T):
        kind = family
        if family == "mixed":
            kind = ("linear", "linear_elastic", "power_elastic")[rng.integers(0, 3)]
        p = float(rng.uniform(p_range[0], p_range[1]))
        if kind == "linear":
            functions.append(LinearRevenue(p))
        elif kind == "linear_elastic":
            functions.append(
                LinearElasticityRevenue(p, float(rng.uniform(*alpha_range)))
            )
        else:
            functions.append(
                PowerElasticityRevenue(
                    p,
                    float(rng.uniform(*alpha_range)),
                    float(rng.uniform(*beta_range)),
                )
            )
    return InputSequence(tuple(functions), delta, m, M)


# -- exhaustive small-horizon worst case ----------------------------------------


@dataclass(frozen=True)
class WorstCaseReport:
    """Maximizer of total pursuit sales over a finite slot grid."""

    sequence: InputSequence
    total_sold: float
    vbars: tuple
    marginals: tuple
    marginals_nondecreasing: bool


def _marginals_sorted(marginals, tol: float = 1e-9) -> bool:
    return all(b >= a - tol for a, b in zip(marginals, marginals[1:]))


def worst_case_search(
    T: int,
    pi: float,
    *,
    delta: float,
    m: float,
    M: float,
    price_grid: Optional[Sequence[float]] = None,
    alpha_grid: Optional[Sequence[float]] = None,
    family: str = "linear",
    max_candidates: int = 10**6,
) -> WorstCaseReport:
    """Exhaustive search for the sequence maximizing total pursuit sales.

    A verification instrument for tiny horizons (T <= 4): enumerates every
    slot combination from the grids, runs the pursuit on each, and returns a
    maximizer, preferring one whose slot marginals at the sale quantities are
    non-decreasing when totals tie.
    """
    if not 1 <= T <= 4:
        raise ValueError(f"horizon must be in [1, 4], got T={T}")
    if price_grid is None:
        theta = M / m
        price_grid = [m * theta ** (k / 4.0) for k in range(5)] if M > m else [m]
    options: List[RevenueFunction] = []
    if family == "linear":
        options = [LinearRevenue(p) for p in price_grid]
    elif family == "linear_elastic":
        if alpha_grid is None:
            raise ValueError("linear_elastic search requires an alpha grid")
        options = [
            LinearElasticityRevenue(p, a)
            for p in price_grid
            for a in alpha_grid
        ]
    else:
        raise ValueError(f"unsupported family {family!r}")
    n_candidates = len(options) ** T
    if n_candidates > max_candidates:
        raise ValueError(
            f"{n_candidates} candidates exceed the cap {max_candidates}"
        )

    best: Optional[WorstCaseReport] = None
    for combo in itertools.product(options, repeat=T):
        seq = InputSequence(combo, delta, m, M)
        state = run_pursuit(seq, pi)
        total = state.inventory_used
        if best is not None:
            tie = abs(total - best.total_sold) <= 1e-12 * max(1.0, best.total_sold)
            if total <= best.total_sold and not tie:
                continue
            if tie and best.marginals_nondecreasing:
                continue
        vbars = tuple(row.v_bar for row in state.trace)
        marginals = tuple(f.marginal(min(v, delta)) for f, v in zip(combo, vbars))
        candidate = WorstCaseReport(
            sequence=seq,
            total_sold=total,
            vbars=vbars,
            marginals=marginals,
            marginals_nondecreasing=_marginals_sorted(marginals),
        )
        if best is None or total > best.total_sold + 1e-12 * max(1.0, best.total_sold):
            best = candidate
        elif candidate.marginals_nondecreasing:
            best = candidate
    assert best is not None
    return best
