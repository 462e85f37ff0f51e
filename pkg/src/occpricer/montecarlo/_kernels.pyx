# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled path kernels.  Same contract as ``_fallback``; GIL released per chunk."""

import numpy as np

from libc.math cimport exp, sqrt, ceil, INFINITY
from libc.stdlib cimport malloc, free
from cpython.pycapsule cimport PyCapsule_GetPointer
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport (random_standard_normal, random_standard_uniform,
                                           random_standard_exponential)

from ..errors import RejectionStall

cdef long MAX_ATTEMPTS = 1000000

# column layout of simulate_grid output
COLUMNS = ("A_low", "A_mid", "A_high", "X_T", "sup", "inf", "q")


cdef struct Side:
    int n
    int is_signed
    const double *cum
    const double *rates
    const double *weights


cdef inline double _side_draw(bitgen_t *bg, Side *s, int *stall) noexcept nogil:
    cdef double u, y, f, env, e
    cdef int j, i
    cdef long attempt
    for attempt in range(MAX_ATTEMPTS):
        u = random_standard_uniform(bg)
        j = 0
        while j < s.n - 1 and u > s.cum[j]:
            j += 1
        y = random_standard_exponential(bg) / s.rates[j]
        if not s.is_signed:
            return y
        f = 0.0
        env = 0.0
        for i in range(s.n):
            e = s.rates[i] * exp(-s.rates[i] * y)
            f += s.weights[i] * e
            env += (s.weights[i] if s.weights[i] > 0 else -s.weights[i]) * e
        if random_standard_uniform(bg) * env <= f:
            return y
    stall[0] = 1
    return 0.0


cdef inline double _jump(bitgen_t *bg, double p_up, Side *up, Side *down, int *stall) noexcept nogil:
    if random_standard_uniform(bg) < p_up:
        return _side_draw(bg, up, stall)
    return -_side_draw(bg, down, stall)


cdef inline void _swap(double *a, long i, long j) noexcept nogil:
    cdef double t = a[i]
    a[i] = a[j]
    a[j] = t


cdef double _select(double *a, long n, long k) noexcept nogil:
    """k-th smallest (0-based) of a[0..n-1]; reorders a."""
    cdef long lo = 0, hi = n - 1, i, j, mid
    cdef double pivot
    while hi > lo:
        mid = lo + (hi - lo) // 2
        # median of three
        if a[mid] < a[lo]:
            _swap(a, mid, lo)
        if a[hi] < a[lo]:
            _swap(a, hi, lo)
        if a[hi] < a[mid]:
            _swap(a, hi, mid)
        pivot = a[mid]
        i = lo
        j = hi
        while i <= j:
            while a[i] < pivot:
                i += 1
            while a[j] > pivot:
                j -= 1
            if i <= j:
                _swap(a, i, j)
                i += 1
                j -= 1
        if k <= j:
            hi = j
        elif k >= i:
            lo = i
        else:
            return a[k]
    return a[k]


cdef Side _make_side(double[::1] cum, double[::1] rates, double[::1] weights, int is_signed):
    cdef Side s
    s.n = rates.shape[0]
    s.is_signed = is_signed
    s.cum = &cum[0] if s.n else NULL
    s.rates = &rates[0] if s.n else NULL
    s.weights = &weights[0] if s.n else NULL
    return s


def simulate_grid(bitgen, double[::1] T, double steps_per_unit, double mu, double sigma, double lam,
                  double p_up, tables, double h, double H, double qfrac, bint antithetic):
    """Occupation times, terminal value, extremes and grid quantile per path."""
    cdef bitgen_t *bg = <bitgen_t *> PyCapsule_GetPointer(bitgen.capsule, "BitGenerator")
    up_cum, up_rates, up_w, up_signed, dn_cum, dn_rates, dn_w, dn_signed = tables
    cdef double[::1] a1 = np.ascontiguousarray(up_cum, dtype=np.float64)
    cdef double[::1] a2 = np.ascontiguousarray(up_rates, dtype=np.float64)
    cdef double[::1] a3 = np.ascontiguousarray(up_w, dtype=np.float64)
    cdef double[::1] b1 = np.ascontiguousarray(dn_cum, dtype=np.float64)
    cdef double[::1] b2 = np.ascontiguousarray(dn_rates, dtype=np.float64)
    cdef double[::1] b3 = np.ascontiguousarray(dn_w, dtype=np.float64)
    cdef Side up = _make_side(a1, a2, a3, up_signed)
    cdef Side down = _make_side(b1, b2, b3, dn_signed)
    cdef long n_paths = T.shape[0]
    out_np = np.zeros((n_paths, 7), dtype=np.float64)
    cdef double[:, ::1] out = out_np
    cdef double dt = 1.0 / steps_per_unit
    cdef long max_steps = 1, p, i, n, k, npair, lanes, lane
    cdef double Tp
    for p in range(n_paths):
        n = <long> ceil(T[p] * steps_per_unit - 1e-9)
        if n > max_steps:
            max_steps = n
    cdef bint want_q = qfrac >= 0.0
    cdef double *buf = NULL
    cdef double *buf2 = NULL
    if want_q:
        buf = <double *> malloc(max_steps * sizeof(double))
        buf2 = <double *> malloc(max_steps * sizeof(double))
        if buf == NULL or buf2 == NULL:
            free(buf)
            free(buf2)
            raise MemoryError()
    cdef int stall = 0
    cdef double x[2]
    cdef double a_lo[2]
    cdef double a_mid[2]
    cdef double a_hi[2]
    cdef double sup[2]
    cdef double inf[2]
    cdef double t, tend, dti, z, drift, vol, next_jump, y
    cdef double *bufs[2]
    bufs[0] = buf
    bufs[1] = buf2
    lanes = 2 if antithetic else 1
    npair = (n_paths + lanes - 1) // lanes
    with nogil:
        for p in range(npair):
            Tp = T[p * lanes]
            n = <long> ceil(Tp * steps_per_unit - 1e-9)
            if n < 1:
                n = 1
            for lane in range(2):
                x[lane] = 0.0
                a_lo[lane] = 0.0
                a_mid[lane] = 0.0
                a_hi[lane] = 0.0
                sup[lane] = 0.0
                inf[lane] = 0.0
            t = 0.0
            next_jump = random_standard_exponential(bg) / lam if lam > 0 else INFINITY
            for i in range(n):
                dti = dt if i < n - 1 else Tp - (n - 1) * dt
                if dti < 0:
                    dti = 0.0
                tend = t + dti
                z = random_standard_normal(bg)
                drift = mu * dti
                vol = sigma * sqrt(dti)
                for lane in range(lanes):
                    if want_q:
                        bufs[lane][i] = x[lane]
                    if x[lane] <= h:
                        a_lo[lane] += dti
                    elif x[lane] >= H:
                        a_hi[lane] += dti
                    else:
                        a_mid[lane] += dti
                    if x[lane] > sup[lane]:
                        sup[lane] = x[lane]
                    if x[lane] < inf[lane]:
                        inf[lane] = x[lane]
                    x[lane] += drift + (vol * z if lane == 0 else -vol * z)
                while next_jump <= tend:
                    y = _jump(bg, p_up, &up, &down, &stall)
                    for lane in range(lanes):
                        x[lane] += y
                    next_jump += random_standard_exponential(bg) / lam
                t = tend
            for lane in range(lanes):
                k = p * lanes + lane
                if k >= n_paths:
                    break
                if x[lane] > sup[lane]:
                    sup[lane] = x[lane]
                if x[lane] < inf[lane]:
                    inf[lane] = x[lane]
                out[k, 0] = a_lo[lane]
                out[k, 1] = a_mid[lane]
                out[k, 2] = a_hi[lane]
                out[k, 3] = x[lane]
                out[k, 4] = sup[lane]
                out[k, 5] = inf[lane]
                if want_q:
                    out[k, 6] = _select(bufs[lane], n, <long> (qfrac * n))
            if stall:
                break
    free(buf)
    free(buf2)
    if stall:
        raise RejectionStall("jump sampler exceeded the rejection attempt cap")
    return out_np


def first_passage(bitgen, long n_paths, double x0, double alpha, double lo, double hi, double dt_max,
                  double mu, double sigma, double lam, double p_up, tables):
    """Exit side (+1 up, -1 down, 0 killed by the Exp(alpha) clock) and exit position."""
    cdef bitgen_t *bg = <bitgen_t *> PyCapsule_GetPointer(bitgen.capsule, "BitGenerator")
    up_cum, up_rates, up_w, up_signed, dn_cum, dn_rates, dn_w, dn_signed = tables
    cdef double[::1] a1 = np.ascontiguousarray(up_cum, dtype=np.float64)
    cdef double[::1] a2 = np.ascontiguousarray(up_rates, dtype=np.float64)
    cdef double[::1] a3 = np.ascontiguousarray(up_w, dtype=np.float64)
    cdef double[::1] b1 = np.ascontiguousarray(dn_cum, dtype=np.float64)
    cdef double[::1] b2 = np.ascontiguousarray(dn_rates, dtype=np.float64)
    cdef double[::1] b3 = np.ascontiguousarray(dn_w, dtype=np.float64)
    cdef Side up = _make_side(a1, a2, a3, up_signed)
    cdef Side down = _make_side(b1, b2, b3, dn_signed)
    side_np = np.zeros(n_paths, dtype=np.int8)
    pos_np = np.zeros(n_paths, dtype=np.float64)
    cdef signed char[::1] side = side_np
    cdef double[::1] pos = pos_np
    cdef long p
    cdef int stall = 0
    cdef double x, xn, t, tn, clock, next_jump, d, s2 = sigma * sigma
    cdef int hit
    with nogil:
        for p in range(n_paths):
            x = x0
            t = 0.0
            clock = random_standard_exponential(bg) / alpha
            next_jump = random_standard_exponential(bg) / lam if lam > 0 else INFINITY
            hit = 0
            while True:
                tn = t + dt_max
                if next_jump < tn:
                    tn = next_jump
                if clock < tn:
                    tn = clock
                d = tn - t
                xn = x + mu * d + sigma * sqrt(d) * random_standard_normal(bg)
                if xn >= hi:
                    hit = 1
                    xn = hi
                elif xn <= lo:
                    hit = -1
                    xn = lo
                elif d > 0:
                    if hi < INFINITY and random_standard_uniform(bg) < exp(-2.0 * (hi - x) * (hi - xn) / (s2 * d)):
                        hit = 1
                        xn = hi
                    elif lo > -INFINITY and random_standard_uniform(bg) < exp(-2.0 * (x - lo) * (xn - lo) / (s2 * d)):
                        hit = -1
                        xn = lo
                if hit != 0:
                    break
                t = tn
                if t >= clock:
                    break
                if t >= next_jump:
                    xn += _jump(bg, p_up, &up, &down, &stall)
                    next_jump += random_standard_exponential(bg) / lam
                    if xn >= hi:
                        hit = 1
                    elif xn <= lo:
                        hit = -1
                    if hit != 0 or stall:
                        break
                x = xn
            side[p] = hit
            pos[p] = xn
            if stall:
                break
    if stall:
        raise RejectionStall("jump sampler exceeded the rejection attempt cap")
    return side_np, pos_np
