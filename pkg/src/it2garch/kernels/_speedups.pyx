# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernel backend.

Byte-for-byte twin of :mod:`it2garch.kernels._reference`: identical
operation order, libm ``exp``/``sqrt``, no FMA contraction (see setup.py),
so results match the reference bit for bit.  Only the inner loops differ:
they run in C.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, sqrt

cnp.import_array()

NAME = "compiled"

cdef double LOG_FLOOR = -746.0


cdef inline void _set_centers(double* sc, double center, double sig_mid, Py_ssize_t m) noexcept nogil:
    cdef Py_ssize_t k
    if m == 1:
        sc[0] = center
        return
    for k in range(m):
        sc[k] = center + 3.0 * sig_mid * (2.0 * k / (m - 1) - 1.0)


cdef struct FuzzyOut:
    double pred
    double out_lo
    double out_hi
    double f_high
    double f_low
    Py_ssize_t sel_l
    Py_ssize_t sel_r
    int floor_hits
    int zero_hit


cdef FuzzyOut _fuzzy_core(const double* xw, double center,
                          double v_low, double v_point, double v_high,
                          const cnp.int64_t* ant, const double* coeffs,
                          Py_ssize_t n_rules, Py_ssize_t w, Py_ssize_t m,
                          double sigma_floor,
                          double* lm_hi, double* lm_lo, double* sc) noexcept nogil:
    cdef FuzzyOut o
    cdef Py_ssize_t j, k, r
    cdef double sig_lo, sig_mid, sig_hi, den_hi, den_lo, d, dd
    cdef double s_h, s_l, best_high, best_low
    cdef double y_l, y_r, raw_u, raw_l
    cdef const cnp.int64_t* arow
    cdef const double* crow

    o.floor_hits = 0
    sig_lo = sqrt(v_low)
    if sig_lo < sigma_floor:
        sig_lo = sigma_floor
        o.floor_hits += 1
    sig_mid = sqrt(v_point)
    if sig_mid < sigma_floor:
        sig_mid = sigma_floor
        o.floor_hits += 1
    sig_hi = sqrt(v_high)
    if sig_hi < sigma_floor:
        sig_hi = sigma_floor
        o.floor_hits += 1

    _set_centers(sc, center, sig_mid, m)
    den_hi = 2.0 * sig_hi * sig_hi
    den_lo = 2.0 * sig_lo * sig_lo
    for j in range(w):
        for k in range(m):
            d = xw[j] - sc[k]
            dd = d * d
            lm_hi[j * m + k] = -dd / den_hi
            lm_lo[j * m + k] = -dd / den_lo

    o.sel_l = 0
    o.sel_r = 0
    best_high = 0.0
    best_low = 0.0
    for r in range(n_rules):
        arow = ant + r * w
        s_h = lm_hi[arow[0]]
        s_l = lm_lo[arow[0]]
        for j in range(1, w):
            s_h += lm_hi[j * m + arow[j]]
            s_l += lm_lo[j * m + arow[j]]
        if s_h < LOG_FLOOR:
            s_h = LOG_FLOOR
        if s_l < LOG_FLOOR:
            s_l = LOG_FLOOR
        if r == 0:
            best_high = s_h
            best_low = s_l
        else:
            if s_h > best_high:
                best_high = s_h
                o.sel_l = r
            if s_l > best_low:
                best_low = s_l
                o.sel_r = r
    o.f_high = exp(best_high)
    o.f_low = exp(best_low)

    crow = coeffs + o.sel_l * (w + 1)
    y_l = crow[0]
    for j in range(w):
        y_l += crow[j + 1] * xw[j]
    crow = coeffs + o.sel_r * (w + 1)
    y_r = crow[0]
    for j in range(w):
        y_r += crow[j + 1] * xw[j]

    raw_u = y_l * o.f_high
    raw_l = y_r * o.f_low
    if raw_l <= raw_u:
        o.out_lo = raw_l
        o.out_hi = raw_u
    else:
        o.out_lo = raw_u
        o.out_hi = raw_l
    o.pred = (o.out_lo + o.out_hi) * 0.5
    o.zero_hit = 1 if o.f_high == 0.0 else 0
    return o


def step_fuzzy(double[::1] xw, double center,
               double v_low, double v_point, double v_high,
               cnp.int64_t[:, ::1] ant, double[:, ::1] coeffs,
               Py_ssize_t m, double sigma_floor):
    """Single fuzzy-inference step from an externally supplied variance triple."""
    cdef Py_ssize_t w = ant.shape[1]
    cdef Py_ssize_t n_rules = ant.shape[0]
    if n_rules == 0:
        raise ValueError("empty rule base")
    lm_hi = np.empty(w * m, dtype=np.float64)
    lm_lo = np.empty(w * m, dtype=np.float64)
    sc = np.empty(m, dtype=np.float64)
    cdef double[::1] mh = lm_hi, ml = lm_lo, msc = sc
    cdef FuzzyOut o = _fuzzy_core(&xw[0], center, v_low, v_point, v_high,
                                  &ant[0, 0], &coeffs[0, 0], n_rules, w, m,
                                  sigma_floor, &mh[0], &ml[0], &msc[0])
    return (o.pred, o.out_lo, o.out_hi, o.sel_l, o.sel_r,
            o.f_high, o.f_low, o.floor_hits, o.zero_hit)


def step_detail(double[::1] xw, double center, double var_prev, double eps_sq,
                cnp.int64_t[:, ::1] ant, double[:, ::1] coeffs, Py_ssize_t m,
                double omega, double alpha, double beta,
                double q_low, double q_high, double sigma_floor):
    """GARCH variance triple plus one fuzzy-inference step."""
    cdef Py_ssize_t w = ant.shape[1]
    cdef Py_ssize_t n_rules = ant.shape[0]
    if n_rules == 0:
        raise ValueError("empty rule base")
    cdef double v_low = omega + alpha * q_low * var_prev + beta * var_prev
    cdef double v_point = omega + alpha * eps_sq * var_prev + beta * var_prev
    cdef double v_high = omega + alpha * q_high * var_prev + beta * var_prev
    if v_low > v_point:
        v_low = v_point
    if v_high < v_point:
        v_high = v_point
    lm_hi = np.empty(w * m, dtype=np.float64)
    lm_lo = np.empty(w * m, dtype=np.float64)
    sc = np.empty(m, dtype=np.float64)
    cdef double[::1] mh = lm_hi, ml = lm_lo, msc = sc
    cdef FuzzyOut o = _fuzzy_core(&xw[0], center, v_low, v_point, v_high,
                                  &ant[0, 0], &coeffs[0, 0], n_rules, w, m,
                                  sigma_floor, &mh[0], &ml[0], &msc[0])
    return (o.pred, o.out_lo, o.out_hi, v_low, v_point, v_high,
            o.sel_l, o.sel_r, o.f_high, o.f_low, o.floor_hits, o.zero_hit)


def replay_train(double[::1] x, Py_ssize_t w, Py_ssize_t m, double[::1] centers,
                 cnp.int64_t[:, ::1] ant, double[:, ::1] coeffs,
                 double omega, double alpha, double beta,
                 double q_low, double q_high,
                 double sigma_floor, double eps0, double var0):
    """Forward pass over the training span with realized residual feedback."""
    cdef Py_ssize_t n_steps = centers.shape[0]
    cdef Py_ssize_t n_rules = ant.shape[0]
    if n_rules == 0:
        raise ValueError("empty rule base")
    preds = np.empty(n_steps, dtype=np.float64)
    lm_hi = np.empty(w * m, dtype=np.float64)
    lm_lo = np.empty(w * m, dtype=np.float64)
    sc = np.empty(m, dtype=np.float64)
    cdef double[::1] out = preds
    cdef double[::1] mh = lm_hi, ml = lm_lo, msc = sc
    cdef double eps = eps0, var = var0
    cdef double e2, v_low, v_point, v_high, sig
    cdef Py_ssize_t i
    cdef long floor_hits = 0, zero_hits = 0
    cdef FuzzyOut o
    with nogil:
        for i in range(n_steps):
            e2 = eps * eps
            v_low = omega + alpha * q_low * var + beta * var
            v_point = omega + alpha * e2 * var + beta * var
            v_high = omega + alpha * q_high * var + beta * var
            if v_low > v_point:
                v_low = v_point
            if v_high < v_point:
                v_high = v_point
            o = _fuzzy_core(&x[i], centers[i], v_low, v_point, v_high,
                            &ant[0, 0], &coeffs[0, 0], n_rules, w, m,
                            sigma_floor, &mh[0], &ml[0], &msc[0])
            floor_hits += o.floor_hits
            zero_hits += o.zero_hit
            sig = sqrt(v_point)
            if sig < sigma_floor:
                sig = sigma_floor
            eps = (x[i + w] - o.pred) / sig
            var = v_point
            out[i] = o.pred
    return preds, int(floor_hits), int(zero_hits), eps, var


def replay_static(double[::1] x, Py_ssize_t w, Py_ssize_t m, double[::1] centers,
                  cnp.int64_t[:, ::1] ant, double[:, ::1] coeffs,
                  double variance, double sigma_floor, double eps0, double var0):
    """Forward pass with the variance track frozen at a constant value."""
    cdef Py_ssize_t n_steps = centers.shape[0]
    cdef Py_ssize_t n_rules = ant.shape[0]
    if n_rules == 0:
        raise ValueError("empty rule base")
    preds = np.empty(n_steps, dtype=np.float64)
    lm_hi = np.empty(w * m, dtype=np.float64)
    lm_lo = np.empty(w * m, dtype=np.float64)
    sc = np.empty(m, dtype=np.float64)
    cdef double[::1] out = preds
    cdef double[::1] mh = lm_hi, ml = lm_lo, msc = sc
    cdef double eps = eps0, sig
    cdef Py_ssize_t i
    cdef long floor_hits = 0, zero_hits = 0
    cdef FuzzyOut o
    with nogil:
        for i in range(n_steps):
            o = _fuzzy_core(&x[i], centers[i], variance, variance, variance,
                            &ant[0, 0], &coeffs[0, 0], n_rules, w, m,
                            sigma_floor, &mh[0], &ml[0], &msc[0])
            floor_hits += o.floor_hits
            zero_hits += o.zero_hit
            sig = sqrt(variance)
            if sig < sigma_floor:
                sig = sigma_floor
            eps = (x[i + w] - o.pred) / sig
            out[i] = o.pred
    return preds, int(floor_hits), int(zero_hits), eps, variance
