"""Acceptance suite: every criterion at its stated tolerance.

Each test prints one ``[ACCEPTANCE] ... PASS/FAIL`` line (visible with
``pytest -s`` or in captured output).  Ensembles are generated once at module
scope and shared between criteria.
"""

import functools
import math

import numpy as np
import pytest

from crpursuit.adversary import (
    CriticalSequenceSpec,
    critical_sequence,
    empirical_phi,
    make_baseline,
    random_sequence,
    stopper,
    worst_case_search,
)
from crpursuit.offline import increment_bounds_check, interchange_check, solve
from crpursuit.online import (
    c_constant,
    ratio_elasticity,
    ratio_general,
    ratio_one_way,
    run_adaptive,
    run_pursuit,
)
from crpursuit.revenue import InputSequence, LinearRevenue
from oracles import brute_force_offline

E = math.e


def criterion(label):
    def wrap(fn):
        @functools.wraps(fn)
        def inner(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"[ACCEPTANCE] {label}: FAIL")
                raise
            print(f"[ACCEPTANCE] {label}: PASS")

        return inner

    return wrap


@pytest.fixture(scope="module")
def critical_1e4():
    return critical_sequence(CriticalSequenceSpec(m=1.0, M=E, n=10**4, delta=1.0))


def _ensemble(seed, family, count=10**4, t_max=50):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        T = int(rng.integers(1, t_max + 1))
        out.append(
            random_sequence(
                int(rng.integers(0, 2**31)), T, family, delta=1.0, m=1.0, M=E
            )
        )
    return out


@pytest.fixture(scope="module")
def elastic_ensemble():
    return _ensemble(101, "linear_elastic")


@pytest.fixture(scope="module")
def linear_ensemble():
    return _ensemble(102, "linear")


@criterion("C1 one-way optimal ratio on the critical ladder")
def test_c1_one_way_optimal_ratio(critical_1e4):
    state = run_pursuit(critical_1e4, 2.0)
    delta = critical_1e4.delta
    assert state.feasible
    assert delta - 2e-4 * delta <= state.inventory_used <= delta
    eta_opt = solve(critical_1e4).revenue
    cr = eta_opt / state.online_revenue
    assert cr == pytest.approx(2.0, abs=1e-6)


@criterion("C2 characteristic equation at the optimal ratio")
def test_c2_characteristic_equation(critical_1e4):
    delta = critical_1e4.delta
    pi_star = ratio_one_way(critical_1e4.theta())
    assert pi_star == pytest.approx(2.0, abs=1e-12)
    assert empirical_phi(pi_star, critical_1e4) == pytest.approx(delta, abs=2e-4 * delta)
    assert empirical_phi(pi_star - 0.1, critical_1e4) > delta
    assert empirical_phi(pi_star + 0.1, critical_1e4) < delta


@criterion("C3 elasticity guarantee over 10^4 random sequences")
def test_c3_elasticity_guarantee(elastic_ensemble):
    pi_bar = ratio_elasticity(E)
    assert pi_bar == pytest.approx(16.0 / 7.0, abs=1e-12)
    for seq in elastic_ensemble:
        state = run_pursuit(seq, pi_bar)
        assert state.inventory_used <= seq.delta * (1.0 + 1e-6)
        cr = solve(seq).revenue / state.online_revenue
        assert cr == pytest.approx(pi_bar, abs=1e-6)


@criterion("C4 general bound with exact family factors")
def test_c4_general_bound(linear_ensemble, elastic_ensemble):
    c_lin = c_constant("linear", 1.0, (1.0, E))
    assert c_lin.value == 1.0 and c_lin.exact
    c_el = c_constant("linear_elastic", 1.0, (1.0, E), alpha_range=(0.0, 2.0 * E))
    assert c_el.value == 2.0 and c_el.exact
    pi_lin = ratio_general(E, c_lin.value)
    pi_el = ratio_general(E, c_el.value)
    for seq in linear_ensemble:
        assert run_pursuit(seq, pi_lin).inventory_used <= seq.delta * (1.0 + 1e-6)
    for seq in elastic_ensemble:
        assert run_pursuit(seq, pi_el).inventory_used <= seq.delta * (1.0 + 1e-6)


@criterion("C5 offline oracle equivalence on 500 random sequences")
def test_c5_offline_oracle_equivalence():
    rng = np.random.default_rng(103)
    for _ in range(500):
        T = int(rng.integers(1, 5))
        family = ("linear", "linear_elastic", "power_elastic", "mixed")[
            int(rng.integers(0, 4))
        ]
        seq = random_sequence(
            int(rng.integers(0, 2**31)), T, family, delta=1.0, m=1.0, M=E
        )
        sol = solve(seq)
        oracle = brute_force_offline(seq)
        assert abs(sol.revenue - oracle) <= 1e-3 * sol.revenue


@criterion("C6 structural invariant suite on 10^3 randomized instances")
def test_c6_structural_invariants():
    rng = np.random.default_rng(104)

    # optimal-revenue increment bounds on 10^3 (sequence, slot) draws
    for _ in range(1000):
        T = int(rng.integers(2, 7))
        seq = random_sequence(
            int(rng.integers(0, 2**31)), T, "mixed", delta=1.0, m=1.0, M=E
        )
        t = int(rng.integers(2, T + 1))
        assert increment_bounds_check(seq, t).passed

    # adjacent-swap diminishing increment on 10^3 draws
    for _ in range(1000):
        T = int(rng.integers(2, 7))
        seq = random_sequence(
            int(rng.integers(0, 2**31)), T, "mixed", delta=1.0, m=1.0, M=E
        )
        tau = int(rng.integers(1, T))
        assert interchange_check(seq, tau).passed

    # per-step quantity, threshold revenue mass, weighted revenue sum
    pi = 2.0
    for i in range(1000):
        family, c = (("linear", 1.0), ("linear_elastic", 2.0))[i % 2]
        T = int(rng.integers(1, 21))
        seq = random_sequence(
            int(rng.integers(0, 2**31)), T, family, delta=1.0, m=1.0, M=E
        )
        state = run_pursuit(seq, pi)
        theta = seq.theta()
        for f, row in zip(seq.functions, state.trace):
            assert row.v_bar <= c * f.eval(row.v_bar) / f.base_price + 1e-9
        for k in range(21):
            p = seq.m * theta ** (k / 20.0)
            mass = sum(
                f.eval(row.v_bar)
                for f, row in zip(seq.functions, state.trace)
                if f.base_price <= p
            )
            assert mass <= p * seq.delta / pi + 1e-7
        weighted = sum(
            f.eval(row.v_bar) / f.base_price
            for f, row in zip(seq.functions, state.trace)
        )
        assert weighted <= (seq.delta / pi) * (math.log(theta) + 1.0) + 1e-7


@criterion("C7 stopping adversary forces both baselines past the bound")
def test_c7_stopper_baselines(critical_1e4):
    threshold = f"threshold:{math.sqrt(E)}"
    for name in ("greedy", threshold):
        report = stopper(make_baseline(name), critical_1e4, 2.0)
        assert report.achieved_ratio >= 2.0 - 0.01, report


@criterion("C8 adaptive pursuit: ratio 1 at the cap, dominates static")
def test_c8_adaptive(critical_1e4):
    # first price at the cap: whole inventory sold at once, ratio exactly 1
    cap_first = InputSequence(
        (LinearRevenue(E), LinearRevenue(1.0), LinearRevenue(2.0)), 1.0, 1.0, E
    )
    result = run_adaptive(cap_first)
    cr = solve(cap_first).revenue / result.online_revenue
    assert cr == pytest.approx(1.0, abs=1e-9)
    assert result.final_pi == 1.0

    # dominance over the tested pool: random linear + critical + the cap case
    rng = np.random.default_rng(105)
    pool = [cap_first, critical_sequence(CriticalSequenceSpec(1.0, E, 1000, 1.0))]
    for _ in range(500):
        T = int(rng.integers(1, 31))
        pool.append(
            random_sequence(
                int(rng.integers(0, 2**31)), T, "linear", delta=1.0, m=1.0, M=E
            )
        )
    for seq in pool:
        pi_star = ratio_one_way(seq.theta())
        adaptive = run_adaptive(seq)
        static = run_pursuit(seq, pi_star)
        assert adaptive.final_pi <= pi_star + 1e-12
        assert adaptive.online_revenue >= static.online_revenue - 1e-7
        assert adaptive.inventory_used <= seq.delta * (1.0 + 1e-9)


@criterion("C9 worst-case maximizers have non-decreasing sale marginals")
def test_c9_worst_case_structure():
    for pi in (1.5, 2.0, 3.0):
        for T in (2, 3):
            report = worst_case_search(T, pi, delta=1.0, m=1.0, M=E)
            assert report.marginals_nondecreasing, report
