"""Pure-Python kernels over packed slot arrays.

Mirror implementation of ``_fastcore.pyx``: same algorithms, same numeric
conventions, selected at import time when the compiled extension is missing
or disabled.  Slots are packed as parallel arrays (kind, p, alpha, beta) with
kind 0 = linear, 1 = linear elasticity, 2 = power elasticity.

The dual search brackets the inventory shadow price and stops either on an
exact interval hit (some slot has a flat marginal at the probe value) or when
the bracket is below eps = 1e-9 * price_bound; allocations are then resolved
earliest-first inside their per-slot intervals so they sum to the inventory
exactly.  A slot is "saturated" at a probe value when its marginal at the
full inventory still exceeds the probe; such probes are treated as too low,
because no optimal dual leaves a marginal strictly above it.
"""

import math

NAME = "python"

MAX_ITER = 200
SOLVE_TOL = 1e-9
ZERO_SALE_FLOOR = 1e-15


def _aslist(x):
    """Plain Python list of builtin scalars from any array-like."""
    try:
        return x.tolist()
    except AttributeError:
        return [float(v) for v in x]


def _eval(kind, p, a, b, v):
    if kind == 0 or a == 0.0:
        return p * v
    if kind == 1:
        return (p - a * v) * v
    return (p - a * v**b) * v


def _marginal(kind, p, a, b, v):
    if kind == 0 or a == 0.0:
        return p
    if kind == 1:
        return p - 2.0 * a * v
    return p - a * (b + 1.0) * v**b


def _vhat(kind, p, a, b, delta):
    if kind == 0 or a == 0.0:
        return delta
    if kind == 1:
        v = p / (2.0 * a)
    else:
        v = (p / (a * (b + 1.0))) ** (1.0 / b)
    return v if v < delta else delta


def _interval(kind, p, a, b, lam, delta):
    """Allocation interval (lo, hi, saturated) at dual value lam.

    lo/hi bound the optimal slot allocation: solutions of marginal == lam
    clipped to [0, delta], the empty-solution cases being allocation 0 (base
    price below lam) or the full-inventory cap (marginal still above lam at
    delta, flagged saturated).
    """
    if lam > p:
        return 0.0, 0.0, False
    if kind == 0 or a == 0.0:
        if lam == p:
            return 0.0, delta, False
        return delta, delta, True
    if kind == 1:
        v = (p - lam) / (2.0 * a)
    else:
        v = ((p - lam) / (a * (b + 1.0))) ** (1.0 / b)
    if v > delta:
        return delta, delta, _marginal(kind, p, a, b, delta) > lam
    return v, v, False


def solve_value_slot(kind, p, a, b, target, delta):
    """Smallest v in [0, delta] with slot revenue equal to target."""
    if target <= 0.0:
        return 0.0
    vh = _vhat(kind, p, a, b, delta)
    gmax = _eval(kind, p, a, b, vh)
    if target > gmax:
        if target > gmax + SOLVE_TOL * max(1.0, target):
            raise ValueError(f"target {target} exceeds slot maximum {gmax}")
        return vh
    if kind == 0 or a == 0.0:
        v = target / p
        return v if v < delta else delta
    if kind == 1:
        disc = p * p - 4.0 * a * target
        if disc < 0.0:
            disc = 0.0
        return 2.0 * target / (p + math.sqrt(disc))
    lo = 0.0
    hi = vh
    for _ in range(MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _eval(kind, p, a, b, mid) < target:
            lo = mid
        else:
            hi = mid
    return hi


def _interval_sums(kinds, ps, alphas, betas, n, lam, delta, los, his):
    smin = 0.0
    smax = 0.0
    saturated = False
    for i in range(n):
        lo, hi, sat = _interval(kinds[i], ps[i], alphas[i], betas[i], lam, delta)
        los[i] = lo
        his[i] = hi
        smin += lo
        smax += hi
        if sat:
            saturated = True
    return smin, smax, saturated


def _resolve(los, his, n, delta):
    """Lower ends raised earliest-first until the allocations sum to delta."""
    allocs = los[:n]
    r = delta - sum(allocs)
    for i in range(n):
        if r <= 0.0:
            break
        room = his[i] - allocs[i]
        if room > 0.0:
            add = room if room < r else r
            allocs[i] += add
            r -= add
    if r > 1e-6 * delta:
        raise RuntimeError(f"dual search left {r} inventory unallocated")
    return allocs


def _water_fill(kinds, ps, alphas, betas, n, delta, lam_lo, price_bound):
    """Dual value and allocations for the first n slots.

    Returns (lam, bracket_lo, allocs).  bracket_lo is a certified lower bound
    on the dual, reusable as a warm start when one more slot is appended.
    """
    los = [0.0] * n
    his = [0.0] * n

    smin0, smax0, sat0 = _interval_sums(kinds, ps, alphas, betas, n, 0.0, delta, los, his)
    if smax0 <= delta and not sat0:
        return 0.0, 0.0, his[:n]

    lam_hi = 0.0
    for i in range(n):
        if ps[i] > lam_hi:
            lam_hi = ps[i]

    smin, smax, sat = _interval_sums(kinds, ps, alphas, betas, n, lam_hi, delta, los, his)
    if smin <= delta <= smax:
        return lam_hi, lam_hi, _resolve(los, his, n, delta)

    lam_l = lam_lo
    if lam_l < 0.0:
        lam_l = 0.0
    if lam_l > 0.0:
        if lam_l >= lam_hi:
            lam_l = lam_hi  # degenerate bracket, resolved by the eps exit below
        else:
            smin, smax, sat = _interval_sums(
                kinds, ps, alphas, betas, n, lam_l, delta, los, his
            )
            if smax < delta:
                lam_l = 0.0  # warm start overshot, restart from scratch
            elif smin <= delta and not sat:
                return lam_l, lam_l, _resolve(los, his, n, delta)

    eps = 1e-9 * price_bound
    for _ in range(MAX_ITER):
        if lam_hi - lam_l <= eps:
            break
        mid = 0.5 * (lam_l + lam_hi)
        if mid <= lam_l or mid >= lam_hi:
            break
        smin, smax, sat = _interval_sums(kinds, ps, alphas, betas, n, mid, delta, los, his)
        if smin > delta:
            lam_l = mid
        elif smax < delta:
            lam_hi = mid
        elif sat:
            lam_l = mid
        else:
            return mid, mid, _resolve(los, his, n, delta)

    # eps exit: true dual is inside [lam_l, lam_hi]; bound each allocation by
    # its interval ends at the two bracket sides and resolve exactly.
    _interval_sums(kinds, ps, alphas, betas, n, lam_hi, delta, los, his)
    lo_side = los[:n]
    _interval_sums(kinds, ps, alphas, betas, n, lam_l, delta, los, his)
    hi_side = his[:n]
    return 0.5 * (lam_l + lam_hi), lam_l, _resolve(lo_side, hi_side, n, delta)


def dual_solve(kinds, ps, alphas, betas, delta, lam_lo, price_bound):
    """Offline optimum of the packed sequence: (lam, allocations, revenue)."""
    kinds = _aslist(kinds)
    ps = _aslist(ps)
    alphas = _aslist(alphas)
    betas = _aslist(betas)
    n = len(kinds)
    lam, _, allocs = _water_fill(kinds, ps, alphas, betas, n, delta, lam_lo, price_bound)
    revenue = 0.0
    for i in range(n):
        revenue += _eval(kinds[i], ps[i], alphas[i], betas[i], allocs[i])
    return lam, allocs, revenue


def prefix_solve(kinds, ps, alphas, betas, delta, price_bound):
    """Optimal revenue and dual for every prefix, warm-starting the bracket.

    All-linear prefixes short-circuit to the running-maximum closed form,
    which the general search reproduces exactly.
    """
    kinds = _aslist(kinds)
    ps = _aslist(ps)
    alphas = _aslist(alphas)
    betas = _aslist(betas)
    n = len(kinds)
    etas = [0.0] * n
    lams = [0.0] * n
    warm = 0.0
    last_lam = 0.0
    all_linear = True
    run_max = 0.0
    for t in range(1, n + 1):
        i = t - 1
        if all_linear and (kinds[i] != 0 and alphas[i] != 0.0):
            all_linear = False
        if all_linear:
            if ps[i] > run_max:
                run_max = ps[i]
            etas[i] = delta * run_max
            lams[i] = run_max
            warm = run_max
            last_lam = run_max
            continue
        lam, warm, allocs = _water_fill(kinds, ps, alphas, betas, t, delta, warm, price_bound)
        eta = 0.0
        for j in range(t):
            eta += _eval(kinds[j], ps[j], alphas[j], betas[j], allocs[j])
        # duals are non-decreasing in t; clamp out bisection-level wiggle
        if lam < last_lam:
            lam = last_lam
        etas[i] = eta
        lams[i] = lam
        last_lam = lam
    return etas, lams


def pursuit_run(kinds, ps, alphas, betas, delta, price_bound, pi):
    """Ratio-pursuit pass: per-slot sales keeping revenue at 1/pi of optimal.

    Returns (etas, vbars, slot_revenues); the inventory constraint is not
    enforced, callers measure the total.
    """
    etas, _ = prefix_solve(kinds, ps, alphas, betas, delta, price_bound)
    kinds = _aslist(kinds)
    ps = _aslist(ps)
    alphas = _aslist(alphas)
    betas = _aslist(betas)
    n = len(kinds)
    vbars = [0.0] * n
    revs = [0.0] * n
    prev = 0.0
    for i in range(n):
        inc = etas[i] - prev
        if inc < 0.0:
            inc = 0.0
        target = inc / pi
        if target <= ZERO_SALE_FLOOR * max(etas[i], 1.0):
            v = 0.0
        else:
            v = solve_value_slot(kinds[i], ps[i], alphas[i], betas[i], target, delta)
        vbars[i] = v
        revs[i] = _eval(kinds[i], ps[i], alphas[i], betas[i], v)
        prev = etas[i]
    return etas, vbars, revs
