"""Pure-Python (numpy) kernel backend.

This is the portable fallback for :mod:`it2garch.kernels._speedups` and the
semantic reference both backends are tested against.  Every arithmetic
expression here is written in the exact evaluation order the compiled kernel
uses: element-wise IEEE-754 operations with scalar ``math.exp``/``math.sqrt``,
so the two backends produce bit-identical results.

Log-firing values are clamped at ``LOG_FLOOR``: anything at or below it
exponentiates to exactly 0.0, making "all firings zero" a genuine tie that
insertion order resolves.
"""

from __future__ import annotations

import math

import numpy as np

NAME = "python"

LOG_FLOOR = -746.0


def _set_centers(out, center, sig_mid, m):
    if m == 1:
        out[0] = center
        return
    for k in range(m):
        out[k] = center + 3.0 * sig_mid * (2.0 * k / (m - 1) - 1.0)


def _fuzzy_core(xw, center, v_low, v_point, v_high, ant, coeffs, m, sigma_floor):
    """Fuzzification through defuzzification for one step.

    Returns (pred, out_lo, out_hi, sel_l, sel_r, f_high, f_low,
    floor_hits, zero_hit).
    """
    floor_hits = 0
    sig_lo = math.sqrt(v_low)
    if sig_lo < sigma_floor:
        sig_lo = sigma_floor
        floor_hits += 1
    sig_mid = math.sqrt(v_point)
    if sig_mid < sigma_floor:
        sig_mid = sigma_floor
        floor_hits += 1
    sig_hi = math.sqrt(v_high)
    if sig_hi < sigma_floor:
        sig_hi = sigma_floor
        floor_hits += 1

    w = ant.shape[1]
    sc = np.empty(m, dtype=np.float64)
    _set_centers(sc, center, sig_mid, m)

    den_hi = 2.0 * sig_hi * sig_hi
    den_lo = 2.0 * sig_lo * sig_lo
    d = xw[:, None] - sc[None, :]
    dd = d * d
    lm_hi = -dd / den_hi
    lm_lo = -dd / den_lo

    log_high = lm_hi[0, ant[:, 0]].copy()
    log_low = lm_lo[0, ant[:, 0]].copy()
    for j in range(1, w):
        log_high += lm_hi[j, ant[:, j]]
        log_low += lm_lo[j, ant[:, j]]
    np.maximum(log_high, LOG_FLOOR, out=log_high)
    np.maximum(log_low, LOG_FLOOR, out=log_low)

    sel_l = int(np.argmax(log_high))
    sel_r = int(np.argmax(log_low))
    f_high = math.exp(float(log_high[sel_l]))
    f_low = math.exp(float(log_low[sel_r]))

    row = coeffs[sel_l]
    y_l = row[0]
    for j in range(w):
        y_l += row[j + 1] * xw[j]
    row = coeffs[sel_r]
    y_r = row[0]
    for j in range(w):
        y_r += row[j + 1] * xw[j]

    raw_u = float(y_l) * f_high
    raw_l = float(y_r) * f_low
    if raw_l <= raw_u:
        out_lo, out_hi = raw_l, raw_u
    else:
        out_lo, out_hi = raw_u, raw_l
    pred = (out_lo + out_hi) * 0.5
    zero_hit = 1 if f_high == 0.0 else 0
    return pred, out_lo, out_hi, sel_l, sel_r, f_high, f_low, floor_hits, zero_hit


def step_fuzzy(xw, center, v_low, v_point, v_high, ant, coeffs, m, sigma_floor):
    """Single fuzzy-inference step from an externally supplied variance triple."""
    return _fuzzy_core(
        np.asarray(xw, dtype=np.float64), float(center),
        float(v_low), float(v_point), float(v_high),
        ant, coeffs, int(m), float(sigma_floor),
    )


def step_detail(xw, center, var_prev, eps_sq, ant, coeffs, m,
                omega, alpha, beta, q_low, q_high, sigma_floor):
    """GARCH variance triple plus one fuzzy-inference step.

    Returns (pred, out_lo, out_hi, v_low, v_point, v_high, sel_l, sel_r,
    f_high, f_low, floor_hits, zero_hit).
    """
    v = float(var_prev)
    e2 = float(eps_sq)
    v_low = omega + alpha * q_low * v + beta * v
    v_point = omega + alpha * e2 * v + beta * v
    v_high = omega + alpha * q_high * v + beta * v
    if v_low > v_point:
        v_low = v_point
    if v_high < v_point:
        v_high = v_point
    (pred, out_lo, out_hi, sel_l, sel_r, f_high, f_low,
     floor_hits, zero_hit) = _fuzzy_core(
        np.asarray(xw, dtype=np.float64), float(center),
        v_low, v_point, v_high, ant, coeffs, int(m), float(sigma_floor),
    )
    return (pred, out_lo, out_hi, v_low, v_point, v_high,
            sel_l, sel_r, f_high, f_low, floor_hits, zero_hit)


class _ReplayScratch:
    """Preallocated buffers plus the per-step fuzzy stage for the replays.

    The element-wise operations run in exactly the order documented in the
    module docstring; only allocation churn is avoided here.
    """

    def __init__(self, x, w, m, ant, coeffs, sigma_floor):
        self.x = np.asarray(x, dtype=np.float64)
        self.w = w
        self.m = m
        self.coeffs = coeffs
        self.sigma_floor = sigma_floor
        r = ant.shape[0]
        self.sc = np.empty(m, dtype=np.float64)
        self.d = np.empty((w, m), dtype=np.float64)
        self.dd = np.empty((w, m), dtype=np.float64)
        self.lm_hi = np.empty((w, m), dtype=np.float64)
        self.lm_lo = np.empty((w, m), dtype=np.float64)
        # flat gather indices: IDX[r, j] = j * m + ant[r, j]
        self.idx = (np.arange(w, dtype=np.int64) * m)[None, :] + ant
        self.gath = np.empty((r, w), dtype=np.float64)
        self.acc_hi = np.empty(r, dtype=np.float64)
        self.acc_lo = np.empty(r, dtype=np.float64)

    def step(self, i, center, v_low, v_point, v_high):
        """Fuzzy stage for step ``i``; returns (pred, floor_hits, zero_hit)."""
        floor_hits = 0
        sigma_floor = self.sigma_floor
        sig_lo = math.sqrt(v_low)
        if sig_lo < sigma_floor:
            sig_lo = sigma_floor
            floor_hits += 1
        sig_mid = math.sqrt(v_point)
        if sig_mid < sigma_floor:
            sig_mid = sigma_floor
            floor_hits += 1
        sig_hi = math.sqrt(v_high)
        if sig_hi < sigma_floor:
            sig_hi = sigma_floor
            floor_hits += 1

        w, m = self.w, self.m
        xw = self.x[i : i + w]
        _set_centers(self.sc, center, sig_mid, m)
        den_hi = 2.0 * sig_hi * sig_hi
        den_lo = 2.0 * sig_lo * sig_lo
        np.subtract(xw[:, None], self.sc[None, :], out=self.d)
        np.multiply(self.d, self.d, out=self.dd)
        np.negative(self.dd, out=self.d)
        np.divide(self.d, den_hi, out=self.lm_hi)
        np.divide(self.d, den_lo, out=self.lm_lo)

        np.take(self.lm_hi.reshape(-1), self.idx, out=self.gath)
        np.copyto(self.acc_hi, self.gath[:, 0])
        for j in range(1, w):
            np.add(self.acc_hi, self.gath[:, j], out=self.acc_hi)
        np.take(self.lm_lo.reshape(-1), self.idx, out=self.gath)
        np.copyto(self.acc_lo, self.gath[:, 0])
        for j in range(1, w):
            np.add(self.acc_lo, self.gath[:, j], out=self.acc_lo)
        np.maximum(self.acc_hi, LOG_FLOOR, out=self.acc_hi)
        np.maximum(self.acc_lo, LOG_FLOOR, out=self.acc_lo)

        sel_l = int(np.argmax(self.acc_hi))
        sel_r = int(np.argmax(self.acc_lo))
        f_high = math.exp(float(self.acc_hi[sel_l]))
        f_low = math.exp(float(self.acc_lo[sel_r]))

        row = self.coeffs[sel_l]
        y_l = row[0]
        for j in range(w):
            y_l += row[j + 1] * xw[j]
        row = self.coeffs[sel_r]
        y_r = row[0]
        for j in range(w):
            y_r += row[j + 1] * xw[j]

        raw_u = float(y_l) * f_high
        raw_l = float(y_r) * f_low
        if raw_l <= raw_u:
            out_lo, out_hi = raw_l, raw_u
        else:
            out_lo, out_hi = raw_u, raw_l
        pred = (out_lo + out_hi) * 0.5
        return pred, floor_hits, (1 if f_high == 0.0 else 0)


def replay_train(x, w, m, centers, ant, coeffs,
                 omega, alpha, beta, q_low, q_high,
                 sigma_floor, eps0, var0):
    """Forward pass over the training span with realized residual feedback.

    Step i forecasts x[i + w] from the window x[i : i + w]; the realized
    standardized residual then drives the next variance update.  Returns
    (predictions, floor_hits, zero_hits, final_eps, final_var).
    """
    scratch = _ReplayScratch(x, w, m, ant, coeffs, sigma_floor)
    x = scratch.x
    n_steps = len(centers)
    preds = np.empty(n_steps, dtype=np.float64)
    eps = float(eps0)
    var = float(var0)
    floor_hits = 0
    zero_hits = 0
    for i in range(n_steps):
        e2 = eps * eps
        v_low = omega + alpha * q_low * var + beta * var
        v_point = omega + alpha * e2 * var + beta * var
        v_high = omega + alpha * q_high * var + beta * var
        if v_low > v_point:
            v_low = v_point
        if v_high < v_point:
            v_high = v_point
        pred, fh, zh = scratch.step(i, float(centers[i]), v_low, v_point, v_high)
        floor_hits += fh
        zero_hits += zh
        sig = math.sqrt(v_point)
        if sig < sigma_floor:
            sig = sigma_floor
        eps = (float(x[i + w]) - pred) / sig
        var = v_point
        preds[i] = pred
    return preds, floor_hits, zero_hits, eps, var


def replay_static(x, w, m, centers, ant, coeffs, variance,
                  sigma_floor, eps0, var0):
    """Forward pass with the variance track frozen at a constant value.

    The fixed-variance baseline's replay: identical fuzzy stage, no GARCH
    recursion.  ``var0`` is accepted for signature parity and ignored.
    Returns (predictions, floor_hits, zero_hits, final_eps, final_var).
    """
    scratch = _ReplayScratch(x, w, m, ant, coeffs, sigma_floor)
    x = scratch.x
    n_steps = len(centers)
    preds = np.empty(n_steps, dtype=np.float64)
    v = float(variance)
    eps = float(eps0)
    floor_hits = 0
    zero_hits = 0
    for i in range(n_steps):
        pred, fh, zh = scratch.step(i, float(centers[i]), v, v, v)
        floor_hits += fh
        zero_hits += zh
        sig = math.sqrt(v)
        if sig < sigma_floor:
            sig = sigma_floor
        eps = (float(x[i + w]) - pred) / sig
        preds[i] = pred
    return preds, floor_hits, zero_hits, eps, v
