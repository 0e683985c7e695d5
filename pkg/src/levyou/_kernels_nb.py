"""Numba scalar kernels for path simulation, value quadrature and wealth.

These mirror the vectorized numpy kernels in ``_kernels_np`` operation by
operation: both consume the counter-based stream defined in ``_rng`` with
identical slot assignments, so a given (seed, path id) produces the same
path on either backend (up to last-ulp libm differences).

The simulation scheme freezes the coefficient functions at the left node of
every step and is otherwise exact in distribution: between consecutive event
times (nodes and jump times) the price decays at the mean-reversion rate
with the exact integrated drift and an exact-variance Gaussian increment;
jumps add ``psi * size`` at their drawn times.  Per-step Poisson jump counts
are inverted from precomputed CDF tables shared by both backends.
"""

import math

import numpy as np

from ._backend import njit
from ._rng import (
    GOLDEN,
    MIX1,
    MIX2,
    PPF_A,
    PPF_B,
    PPF_C,
    PPF_D,
    PPF_E,
    PPF_F,
    SIZE_CONSTANT,
    SIZE_PARETO,
    SIZE_UNIFORM,
    SLOT_GAUSS,
    SLOT_SIZE,
    SLOT_SPACE,
    SLOT_TIME,
)

_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_U11 = np.uint64(11)
_USPACE = np.uint64(SLOT_SPACE)
_INV53 = 2.0**-53
_MAXJ = 1023


@njit(cache=True)
def _mix64(z):
    z = z ^ (z >> _U30)
    z = z * MIX1
    z = z ^ (z >> _U27)
    z = z * MIX2
    z = z ^ (z >> _U31)
    return z


@njit(cache=True)
def _uniform(key, step, slot):
    ctr = np.uint64(step) * _USPACE + np.uint64(slot)
    w = _mix64(key ^ _mix64(ctr * GOLDEN + MIX2))
    return (np.float64(w >> _U11) + 0.5) * _INV53


@njit(cache=True)
def _horner(c, x):
    acc = c[c.shape[0] - 1]
    for i in range(c.shape[0] - 2, -1, -1):
        acc = acc * x + c[i]
    return acc


@njit(cache=True)
def _normal_ppf(p):
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        return q * _horner(PPF_A, r) / _horner(PPF_B, r)
    if q < 0.0:
        r = p
    else:
        r = 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r = r - 1.6
        val = _horner(PPF_C, r) / _horner(PPF_D, r)
    else:
        r = r - 5.0
        val = _horner(PPF_E, r) / _horner(PPF_F, r)
    if q < 0.0:
        return -val
    return val


@njit(cache=True)
def _poisson_count(u, cdf_row):
    j = 0
    while u > cdf_row[j]:
        j += 1
    return j


@njit(cache=True)
def _size_from_uniform(kind, p0, p1, u):
    if kind == SIZE_PARETO:
        return p0 * u ** (-1.0 / p1)
    if kind == SIZE_UNIFORM:
        return p0 + (p1 - p0) * u
    if kind == SIZE_CONSTANT:
        return p0
    return 0.0


@njit(cache=True)
def _decay_drift_std(lam, bc, sig, delta):
    """(decay, drift, std) of the exact transition over a quiet interval."""
    if lam > 0.0:
        ed = math.exp(-lam * delta)
        drift = bc * (-math.expm1(-lam * delta)) / lam
        var = -math.expm1(-2.0 * lam * delta) / (2.0 * lam)
    else:
        ed = 1.0
        drift = bc * delta
        var = delta
    return ed, drift, sig * math.sqrt(var)


@njit(cache=True)
def _interp_flat(vals, row, s1, s2, s):
    """Piecewise-linear table lookup with constant extension."""
    ns = vals.shape[1]
    x = (s - s1) / (s2 - s1)
    if x <= 0.0:
        return vals[row, 0]
    if x >= 1.0:
        return vals[row, ns - 1]
    f = x * (ns - 1)
    j = int(f)
    fr = f - j
    return vals[row, j] * (1.0 - fr) + vals[row, j + 1] * fr


@njit(cache=True)
def _interp_slope(vals, row, s1, s2, slope_lo, slope_hi, s):
    """Piecewise-linear table lookup with linear extension outside."""
    ns = vals.shape[1]
    x = (s - s1) / (s2 - s1)
    if x <= 0.0:
        return vals[row, 0] + slope_lo * (s - s1)
    if x >= 1.0:
        return vals[row, ns - 1] + slope_hi * (s - s2)
    f = x * (ns - 1)
    j = int(f)
    fr = f - j
    return vals[row, j] * (1.0 - fr) + vals[row, j + 1] * fr


@njit(cache=True)
def price_paths(keys, s0, times, b_step, sig_step, psi_step, comp_step,
                lam, cdf, kind, p0, p1):
    """Simulate prices at the grid nodes.

    Returns an (n_paths, n_nodes) array of prices.
    """
    n = keys.shape[0]
    n_steps = times.shape[0] - 1
    out = np.empty((n, n_steps + 1))
    tbuf = np.empty(_MAXJ + 1)
    ybuf = np.empty(_MAXJ + 1)
    for i in range(n):
        key = keys[i]
        s = s0[i]
        out[i, 0] = s
        for k in range(n_steps):
            t_left = times[k]
            dt = times[k + 1] - t_left
            bc = b_step[k] - comp_step[k]
            cnt = _poisson_count(_uniform(key, k, 0), cdf[k])
            for j in range(cnt):
                tbuf[j] = t_left + dt * _uniform(key, k, SLOT_TIME + j)
                ybuf[j] = _size_from_uniform(
                    kind, p0, p1, _uniform(key, k, SLOT_SIZE + j)
                )
            for a in range(1, cnt):
                tv = tbuf[a]
                yv = ybuf[a]
                b2 = a - 1
                while b2 >= 0 and tbuf[b2] > tv:
                    tbuf[b2 + 1] = tbuf[b2]
                    ybuf[b2 + 1] = ybuf[b2]
                    b2 -= 1
                tbuf[b2 + 1] = tv
                ybuf[b2 + 1] = yv
            prev = t_left
            for j in range(cnt):
                ed, drift, std = _decay_drift_std(
                    lam, bc, sig_step[k], tbuf[j] - prev
                )
                g = _normal_ppf(_uniform(key, k, SLOT_GAUSS + j))
                s = s * ed + drift + std * g
                s = s + psi_step[k] * ybuf[j]
                prev = tbuf[j]
            ed, drift, std = _decay_drift_std(
                lam, bc, sig_step[k], times[k + 1] - prev
            )
            g = _normal_ppf(_uniform(key, k, SLOT_GAUSS + cnt))
            s = s * ed + drift + std * g
            out[i, k + 1] = s
    return out


@njit(cache=True)
def value_paths(keys, s0, times, b_step, sig_step, psi_step, comp_step,
                lam, cdf, kind, p0, p1,
                tab_vals, tab_s1, tab_s2, slope_lo, slope_hi):
    """Trapezoid integral of the tabulated running reward along each path.

    The integrand is evaluated from per-node tables (rows of ``tab_vals``
    over the per-node intervals [tab_s1, tab_s2], linearly extended with
    the given slopes).  Jump times are quadrature nodes: both one-sided
    values enter the trapezoid rule.  Returns (integrals, final prices).
    """
    n = keys.shape[0]
    n_steps = times.shape[0] - 1
    integ = np.empty(n)
    fin = np.empty(n)
    tbuf = np.empty(_MAXJ + 1)
    ybuf = np.empty(_MAXJ + 1)
    for i in range(n):
        key = keys[i]
        s = s0[i]
        acc = 0.0
        f_prev = _interp_slope(
            tab_vals, 0, tab_s1[0], tab_s2[0], slope_lo, slope_hi, s
        )
        for k in range(n_steps):
            t_left = times[k]
            dt = times[k + 1] - t_left
            bc = b_step[k] - comp_step[k]
            cnt = _poisson_count(_uniform(key, k, 0), cdf[k])
            for j in range(cnt):
                tbuf[j] = t_left + dt * _uniform(key, k, SLOT_TIME + j)
                ybuf[j] = _size_from_uniform(
                    kind, p0, p1, _uniform(key, k, SLOT_SIZE + j)
                )
            for a in range(1, cnt):
                tv = tbuf[a]
                yv = ybuf[a]
                b2 = a - 1
                while b2 >= 0 and tbuf[b2] > tv:
                    tbuf[b2 + 1] = tbuf[b2]
                    ybuf[b2 + 1] = ybuf[b2]
                    b2 -= 1
                tbuf[b2 + 1] = tv
                ybuf[b2 + 1] = yv
            prev = t_left
            for j in range(cnt):
                delta = tbuf[j] - prev
                ed, drift, std = _decay_drift_std(
                    lam, bc, sig_step[k], delta
                )
                g = _normal_ppf(_uniform(key, k, SLOT_GAUSS + j))
                s = s * ed + drift + std * g
                f_pre = _interp_slope(
                    tab_vals, k, tab_s1[k], tab_s2[k], slope_lo, slope_hi, s
                )
                acc += 0.5 * (f_prev + f_pre) * delta
                s = s + psi_step[k] * ybuf[j]
                f_prev = _interp_slope(
                    tab_vals, k, tab_s1[k], tab_s2[k], slope_lo, slope_hi, s
                )
                prev = tbuf[j]
            delta = times[k + 1] - prev
            ed, drift, std = _decay_drift_std(lam, bc, sig_step[k], delta)
            g = _normal_ppf(_uniform(key, k, SLOT_GAUSS + cnt))
            s = s * ed + drift + std * g
            f_right = _interp_slope(
                tab_vals, k + 1, tab_s1[k + 1], tab_s2[k + 1],
                slope_lo, slope_hi, s
            )
            acc += 0.5 * (f_prev + f_right) * delta
            f_prev = f_right
        integ[i] = acc
        fin[i] = s
    return integ, fin


@njit(cache=True)
def wealth_paths(keys, s0, times, b_step, sig_step, psi_step, comp_step,
                 lam, cdf, kind, p0, p1,
                 pi_vals, pi_s1, pi_s2):
    """Log-wealth of the tabulated strategy along each path.

    The fraction is read from the per-node table at the left node of each
    step and held fixed across the step.  Returns (log-wealth, final
    prices); initial wealth is 1 (log 0).
    """
    n = keys.shape[0]
    n_steps = times.shape[0] - 1
    logw = np.zeros(n)
    fin = np.empty(n)
    tbuf = np.empty(_MAXJ + 1)
    ybuf = np.empty(_MAXJ + 1)
    for i in range(n):
        key = keys[i]
        s = s0[i]
        acc = 0.0
        for k in range(n_steps):
            t_left = times[k]
            dt = times[k + 1] - t_left
            bc = b_step[k] - comp_step[k]
            pi = _interp_flat(pi_vals, k, pi_s1[k], pi_s2[k], s)
            s_left = s
            cnt = _poisson_count(_uniform(key, k, 0), cdf[k])
            for j in range(cnt):
                tbuf[j] = t_left + dt * _uniform(key, k, SLOT_TIME + j)
                ybuf[j] = _size_from_uniform(
                    kind, p0, p1, _uniform(key, k, SLOT_SIZE + j)
                )
            for a in range(1, cnt):
                tv = tbuf[a]
                yv = ybuf[a]
                b2 = a - 1
                while b2 >= 0 and tbuf[b2] > tv:
                    tbuf[b2 + 1] = tbuf[b2]
                    ybuf[b2 + 1] = ybuf[b2]
                    b2 -= 1
                tbuf[b2 + 1] = tv
                ybuf[b2 + 1] = yv
            prev = t_left
            sumy = 0.0
            for j in range(cnt):
                ed, drift, std = _decay_drift_std(
                    lam, bc, sig_step[k], tbuf[j] - prev
                )
                g = _normal_ppf(_uniform(key, k, SLOT_GAUSS + j))
                s = s * ed + drift + std * g
                s = s + psi_step[k] * ybuf[j]
                acc += math.log1p(pi * psi_step[k] * ybuf[j])
                sumy += ybuf[j]
                prev = tbuf[j]
            ed, drift, std = _decay_drift_std(
                lam, bc, sig_step[k], times[k + 1] - prev
            )
            g = _normal_ppf(_uniform(key, k, SLOT_GAUSS + cnt))
            s = s * ed + drift + std * g
            acc += pi * (s - s_left - psi_step[k] * sumy)
            acc -= 0.5 * pi * pi * sig_step[k] * sig_step[k] * dt
        logw[i] = acc
        fin[i] = s
    return logw, fin
