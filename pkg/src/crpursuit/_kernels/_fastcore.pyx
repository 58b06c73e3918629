# cython: language_level=3
"""Compiled kernels over packed slot arrays.

Typed twin of ``_purecore.py``; see that module for the algorithm notes.
Slot kinds: 0 = linear, 1 = linear elasticity, 2 = power elasticity.
"""

import numpy as np

from libc.math cimport pow, sqrt

NAME = "cython"

cdef int MAX_ITER = 200
cdef double SOLVE_TOL = 1e-9
cdef double ZERO_SALE_FLOOR = 1e-15


cdef inline double _eval(signed char kind, double p, double a, double b, double v) nogil:
    if kind == 0 or a == 0.0:
        return p * v
    if kind == 1:
        return (p - a * v) * v
    return (p - a * pow(v, b)) * v


cdef inline double _marginal(signed char kind, double p, double a, double b, double v) nogil:
    if kind == 0 or a == 0.0:
        return p
    if kind == 1:
        return p - 2.0 * a * v
    return p - a * (b + 1.0) * pow(v, b)


cdef inline double _vhat(signed char kind, double p, double a, double b, double delta) nogil:
    cdef double v
    if kind == 0 or a == 0.0:
        return delta
    if kind == 1:
        v = p / (2.0 * a)
    else:
        v = pow(p / (a * (b + 1.0)), 1.0 / b)
    return v if v < delta else delta


cdef inline int _interval(signed char kind, double p, double a, double b,
                          double lam, double delta, double* lo, double* hi) nogil:
    """Fill (lo, hi) with the allocation interval at lam; returns 1 when the
    slot is saturated (marginal at delta still above lam)."""
    cdef double v
    if lam > p:
        lo[0] = 0.0
        hi[0] = 0.0
        return 0
    if kind == 0 or a == 0.0:
        if lam == p:
            lo[0] = 0.0
            hi[0] = delta
            return 0
        lo[0] = delta
        hi[0] = delta
        return 1
    if kind == 1:
        v = (p - lam) / (2.0 * a)
    else:
        v = pow((p - lam) / (a * (b + 1.0)), 1.0 / b)
    if v > delta:
        lo[0] = delta
        hi[0] = delta
        return 1 if _marginal(kind, p, a, b, delta) > lam else 0
    lo[0] = v
    hi[0] = v
    return 0


def solve_value_slot(signed char kind, double p, double a, double b,
                     double target, double delta):
    """Smallest v in [0, delta] with slot revenue equal to target."""
    cdef double vh, gmax, lo, hi, mid, cap
    cdef int it
    if target <= 0.0:
        return 0.0
    vh = _vhat(kind, p, a, b, delta)
    gmax = _eval(kind, p, a, b, vh)
    if target > gmax:
        cap = 1.0 if target < 1.0 else target
        if target > gmax + SOLVE_TOL * cap:
            raise ValueError(f"target {target} exceeds slot maximum {gmax}")
        return vh
    if kind == 0 or a == 0.0:
        mid = target / p
        return mid if mid < delta else delta
    if kind == 1:
        mid = p * p - 4.0 * a * target
        if mid < 0.0:
            mid = 0.0
        return 2.0 * target / (p + sqrt(mid))
    lo = 0.0
    hi = vh
    for it in range(MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _eval(kind, p, a, b, mid) < target:
            lo = mid
        else:
            hi = mid
    return hi


cdef int _interval_sums(signed char[::1] kinds, double[::1] ps, double[::1] alphas,
                        double[::1] betas, Py_ssize_t n, double lam, double delta,
                        double[::1] los, double[::1] his,
                        double* smin, double* smax) nogil:
    cdef Py_ssize_t i
    cdef double lo = 0.0, hi = 0.0
    cdef int saturated = 0
    smin[0] = 0.0
    smax[0] = 0.0
    for i in range(n):
        if _interval(kinds[i], ps[i], alphas[i], betas[i], lam, delta, &lo, &hi):
            saturated = 1
        los[i] = lo
        his[i] = hi
        smin[0] += lo
        smax[0] += hi
    return saturated


cdef double _resolve(double[::1] los, double[::1] his, Py_ssize_t n, double delta,
                     double[::1] allocs) nogil:
    """Lower ends raised earliest-first to sum to delta; returns the leftover."""
    cdef Py_ssize_t i
    cdef double r = delta, room, add
    for i in range(n):
        allocs[i] = los[i]
        r -= los[i]
    for i in range(n):
        if r <= 0.0:
            break
        room = his[i] - allocs[i]
        if room > 0.0:
            add = room if room < r else r
            allocs[i] += add
            r -= add
    return r


cdef double _water_fill(signed char[::1] kinds, double[::1] ps, double[::1] alphas,
                        double[::1] betas, Py_ssize_t n, double delta,
                        double lam_lo, double price_bound,
                        double[::1] los, double[::1] his, double[::1] tmp,
                        double[::1] allocs, double* bracket_lo) except? -1.0:
    cdef double smin = 0.0, smax = 0.0, lam_hi, lam_l, eps, mid, leftover
    cdef int sat, it
    cdef Py_ssize_t i

    sat = _interval_sums(kinds, ps, alphas, betas, n, 0.0, delta, los, his, &smin, &smax)
    if smax <= delta and not sat:
        for i in range(n):
            allocs[i] = his[i]
        bracket_lo[0] = 0.0
        return 0.0

    lam_hi = 0.0
    for i in range(n):
        if ps[i] > lam_hi:
            lam_hi = ps[i]

    sat = _interval_sums(kinds, ps, alphas, betas, n, lam_hi, delta, los, his, &smin, &smax)
    if smin <= delta <= smax:
        leftover = _resolve(los, his, n, delta, allocs)
        if leftover > 1e-6 * delta:
            raise RuntimeError(f"dual search left {leftover} inventory unallocated")
        bracket_lo[0] = lam_hi
        return lam_hi

    lam_l = lam_lo
    if lam_l < 0.0:
        lam_l = 0.0
    if lam_l > 0.0:
        if lam_l >= lam_hi:
            lam_l = lam_hi
        else:
            sat = _interval_sums(kinds, ps, alphas, betas, n, lam_l, delta, los, his,
                                 &smin, &smax)
            if smax < delta:
                lam_l = 0.0
            elif smin <= delta and not sat:
                leftover = _resolve(los, his, n, delta, allocs)
                if leftover > 1e-6 * delta:
                    raise RuntimeError(f"dual search left {leftover} inventory unallocated")
                bracket_lo[0] = lam_l
                return lam_l

    eps = 1e-9 * price_bound
    for it in range(MAX_ITER):
        if lam_hi - lam_l <= eps:
            break
        mid = 0.5 * (lam_l + lam_hi)
        if mid <= lam_l or mid >= lam_hi:
            break
        sat = _interval_sums(kinds, ps, alphas, betas, n, mid, delta, los, his, &smin, &smax)
        if smin > delta:
            lam_l = mid
        elif smax < delta:
            lam_hi = mid
        elif sat:
            lam_l = mid
        else:
            leftover = _resolve(los, his, n, delta, allocs)
            if leftover > 1e-6 * delta:
                raise RuntimeError(f"dual search left {leftover} inventory unallocated")
            bracket_lo[0] = mid
            return mid

    _interval_sums(kinds, ps, alphas, betas, n, lam_hi, delta, los, his, &smin, &smax)
    for i in range(n):
        tmp[i] = los[i]
    _interval_sums(kinds, ps, alphas, betas, n, lam_l, delta, los, his, &smin, &smax)
    leftover = _resolve(tmp, his, n, delta, allocs)
    if leftover > 1e-6 * delta:
        raise RuntimeError(f"dual search left {leftover} inventory unallocated")
    bracket_lo[0] = lam_l
    return 0.5 * (lam_l + lam_hi)


def dual_solve(kinds, ps, alphas, betas, double delta, double lam_lo, double price_bound):
    """Offline optimum of the packed sequence: (lam, allocations, revenue)."""
    cdef signed char[::1] k = np.ascontiguousarray(kinds, dtype=np.int8)
    cdef double[::1] pv = np.ascontiguousarray(ps, dtype=np.float64)
    cdef double[::1] av = np.ascontiguousarray(alphas, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(betas, dtype=np.float64)
    cdef Py_ssize_t n = k.shape[0]
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] allocs = out
    cdef double[::1] los = np.zeros(n, dtype=np.float64)
    cdef double[::1] his = np.zeros(n, dtype=np.float64)
    cdef double[::1] tmp = np.zeros(n, dtype=np.float64)
    cdef double bracket = 0.0
    cdef double lam = _water_fill(k, pv, av, bv, n, delta, lam_lo, price_bound,
                                  los, his, tmp, allocs, &bracket)
    cdef double revenue = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        revenue += _eval(k[i], pv[i], av[i], bv[i], allocs[i])
    return lam, out.tolist(), revenue


def prefix_solve(kinds, ps, alphas, betas, double delta, double price_bound):
    """Optimal revenue and dual for every prefix (warm-started brackets)."""
    cdef signed char[::1] k = np.ascontiguousarray(kinds, dtype=np.int8)
    cdef double[::1] pv = np.ascontiguousarray(ps, dtype=np.float64)
    cdef double[::1] av = np.ascontiguousarray(alphas, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(betas, dtype=np.float64)
    cdef Py_ssize_t n = k.shape[0]
    etas_arr = np.zeros(n, dtype=np.float64)
    lams_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] etas = etas_arr
    cdef double[::1] lams = lams_arr
    cdef double[::1] los = np.zeros(n, dtype=np.float64)
    cdef double[::1] his = np.zeros(n, dtype=np.float64)
    cdef double[::1] tmp = np.zeros(n, dtype=np.float64)
    cdef double[::1] allocs = np.zeros(n, dtype=np.float64)
    cdef double warm = 0.0, last_lam = 0.0, run_max = 0.0, lam, eta, bracket
    cdef bint all_linear = True
    cdef Py_ssize_t t, i, j
    for t in range(1, n + 1):
        i = t - 1
        if all_linear and (k[i] != 0 and av[i] != 0.0):
            all_linear = False
        if all_linear:
            if pv[i] > run_max:
                run_max = pv[i]
            etas[i] = delta * run_max
            lams[i] = run_max
            warm = run_max
            last_lam = run_max
            continue
        bracket = 0.0
        lam = _water_fill(k, pv, av, bv, t, delta, warm, price_bound,
                          los, his, tmp, allocs, &bracket)
        warm = bracket
        eta = 0.0
        for j in range(t):
            eta += _eval(k[j], pv[j], av[j], bv[j], allocs[j])
        if lam < last_lam:
            lam = last_lam
        etas[i] = eta
        lams[i] = lam
        last_lam = lam
    return etas_arr.tolist(), lams_arr.tolist()


def pursuit_run(kinds, ps, alphas, betas, double delta, double price_bound, double pi):
    """Ratio-pursuit pass returning (etas, vbars, slot_revenues)."""
    etas, _ = prefix_solve(kinds, ps, alphas, betas, delta, price_bound)
    cdef signed char[::1] k = np.ascontiguousarray(kinds, dtype=np.int8)
    cdef double[::1] pv = np.ascontiguousarray(ps, dtype=np.float64)
    cdef double[::1] av = np.ascontiguousarray(alphas, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(betas, dtype=np.float64)
    cdef Py_ssize_t n = k.shape[0]
    cdef list etas_list = etas
    vbars = [0.0] * n
    revs = [0.0] * n
    cdef double prev = 0.0, inc, target, v, floor_scale, eta_i
    cdef Py_ssize_t i
    for i in range(n):
        eta_i = etas_list[i]
        inc = eta_i - prev
        if inc < 0.0:
            inc = 0.0
        target = inc / pi
        floor_scale = eta_i if eta_i > 1.0 else 1.0
        if target <= ZERO_SALE_FLOOR * floor_scale:
            v = 0.0
        else:
            v = solve_value_slot(k[i], pv[i], av[i], bv[i], target, delta)
        vbars[i] = v
        revs[i] = _eval(k[i], pv[i], av[i], bv[i], v)
        prev = eta_i
    return etas_list, vbars, revs
