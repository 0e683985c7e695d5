"""Vectorized numpy kernels, twins of the numba scalar kernels.

Same stream, same slot layout, same per-step walk over sorted jump times;
vectorization runs across paths with masks for paths whose jump count is
smaller than the step maximum.  Inactive lanes advance with a zero-length
quiet interval, which is an exact no-op, so the per-path arithmetic is
identical to the scalar backend.
"""

import numpy as np

from . import _rng

_MAXJ = 1023


def _counts(keys, k, cdf_row):
    u = _rng.uniforms(keys, k, _rng.SLOT_COUNT)
    return np.searchsorted(cdf_row, u, side="left")


def _sorted_jumps(keys, k, t_left, dt, cnt, kind, p0, p1):
    """Jump times (sorted ascending, padded with +inf) and matching sizes."""
    kmax = int(cnt.max())
    j = np.arange(kmax)
    tu = _rng.uniforms(keys[:, None], k, _rng.SLOT_TIME + j)
    su = _rng.uniforms(keys[:, None], k, _rng.SLOT_SIZE + j)
    times = t_left + dt * tu
    sizes = _rng.sample_sizes(kind, p0, p1, su)
    dead = j[None, :] >= cnt[:, None]
    times[dead] = np.inf
    order = np.argsort(times, axis=1, kind="stable")
    return (
        np.take_along_axis(times, order, axis=1),
        np.take_along_axis(sizes, order, axis=1),
    )


def _decay_drift_std(lam, bc, sig, delta):
    if lam > 0.0:
        ed = np.exp(-lam * delta)
        drift = bc * (-np.expm1(-lam * delta)) / lam
        var = -np.expm1(-2.0 * lam * delta) / (2.0 * lam)
    else:
        ed = np.ones_like(delta)
        drift = bc * delta
        var = delta
    return ed, drift, sig * np.sqrt(var)


def _interp_flat(vals, row, s1, s2, s):
    ns = vals.shape[1]
    x = (s - s1) / (s2 - s1)
    f = x * (ns - 1)
    j = np.clip(f.astype(np.int64), 0, ns - 2)
    fr = f - j
    mid = vals[row, j] * (1.0 - fr) + vals[row, j + 1] * fr
    return np.where(x <= 0.0, vals[row, 0],
                    np.where(x >= 1.0, vals[row, ns - 1], mid))


def _interp_slope(vals, row, s1, s2, slope_lo, slope_hi, s):
    ns = vals.shape[1]
    x = (s - s1) / (s2 - s1)
    f = x * (ns - 1)
    j = np.clip(f.astype(np.int64), 0, ns - 2)
    fr = f - j
    mid = vals[row, j] * (1.0 - fr) + vals[row, j + 1] * fr
    lo = vals[row, 0] + slope_lo * (s - s1)
    hi = vals[row, ns - 1] + slope_hi * (s - s2)
    return np.where(x <= 0.0, lo, np.where(x >= 1.0, hi, mid))


def _quiet_advance(keys, k, slot, lam, bc, sig, delta, s):
    """Exact transition over a quiet interval of per-path length delta."""
    ed, drift, std = _decay_drift_std(lam, bc, sig, delta)
    g = _rng.normal_ppf(_rng.uniforms(keys, k, slot))
    return s * ed + drift + std * g


def price_paths(keys, s0, times, b_step, sig_step, psi_step, comp_step,
                lam, cdf, kind, p0, p1):
    keys = np.asarray(keys, dtype=np.uint64)
    n = keys.shape[0]
    n_steps = times.shape[0] - 1
    out = np.empty((n, n_steps + 1))
    s = s0.astype(np.float64).copy()
    out[:, 0] = s
    for k in range(n_steps):
        t_left = times[k]
        dt = times[k + 1] - t_left
        bc = b_step[k] - comp_step[k]
        cnt = _counts(keys, k, cdf[k])
        prev = np.full(n, t_left)
        if cnt.max() > 0:
            jt, jy = _sorted_jumps(keys, k, t_left, dt, cnt, kind, p0, p1)
            for j in range(jt.shape[1]):
                active = j < cnt
                tj = np.where(active, jt[:, j], prev)
                s_new = _quiet_advance(
                    keys, k, _rng.SLOT_GAUSS + j, lam, bc, sig_step[k],
                    tj - prev, s
                )
                s = np.where(active, s_new + psi_step[k] * jy[:, j], s)
                prev = tj
        s = _quiet_advance(
            keys, k, _rng.SLOT_GAUSS + cnt, lam, bc, sig_step[k],
            times[k + 1] - prev, s
        )
        out[:, k + 1] = s
    return out


def value_paths(keys, s0, times, b_step, sig_step, psi_step, comp_step,
                lam, cdf, kind, p0, p1,
                tab_vals, tab_s1, tab_s2, slope_lo, slope_hi):
    keys = np.asarray(keys, dtype=np.uint64)
    n = keys.shape[0]
    n_steps = times.shape[0] - 1
    acc = np.zeros(n)
    s = s0.astype(np.float64).copy()
    f_prev = _interp_slope(tab_vals, 0, tab_s1[0], tab_s2[0],
                           slope_lo, slope_hi, s)
    for k in range(n_steps):
        t_left = times[k]
        dt = times[k + 1] - t_left
        bc = b_step[k] - comp_step[k]
        cnt = _counts(keys, k, cdf[k])
        prev = np.full(n, t_left)
        if cnt.max() > 0:
            jt, jy = _sorted_jumps(keys, k, t_left, dt, cnt, kind, p0, p1)
            for j in range(jt.shape[1]):
                active = j < cnt
                tj = np.where(active, jt[:, j], prev)
                delta = tj - prev
                s_new = _quiet_advance(
                    keys, k, _rng.SLOT_GAUSS + j, lam, bc, sig_step[k],
                    delta, s
                )
                f_pre = _interp_slope(tab_vals, k, tab_s1[k], tab_s2[k],
                                      slope_lo, slope_hi, s_new)
                acc += np.where(active, 0.5 * (f_prev + f_pre) * delta, 0.0)
                s_post = s_new + psi_step[k] * jy[:, j]
                f_post = _interp_slope(tab_vals, k, tab_s1[k], tab_s2[k],
                                       slope_lo, slope_hi, s_post)
                s = np.where(active, s_post, s)
                f_prev = np.where(active, f_post, f_prev)
                prev = tj
        delta = times[k + 1] - prev
        s = _quiet_advance(
            keys, k, _rng.SLOT_GAUSS + cnt, lam, bc, sig_step[k], delta, s
        )
        f_right = _interp_slope(tab_vals, k + 1, tab_s1[k + 1], tab_s2[k + 1],
                                slope_lo, slope_hi, s)
        acc += 0.5 * (f_prev + f_right) * delta
        f_prev = f_right
    return acc, s


def wealth_paths(keys, s0, times, b_step, sig_step, psi_step, comp_step,
                 lam, cdf, kind, p0, p1,
                 pi_vals, pi_s1, pi_s2):
    keys = np.asarray(keys, dtype=np.uint64)
    n = keys.shape[0]
    n_steps = times.shape[0] - 1
    acc = np.zeros(n)
    s = s0.astype(np.float64).copy()
    for k in range(n_steps):
        t_left = times[k]
        dt = times[k + 1] - t_left
        bc = b_step[k] - comp_step[k]
        pi = _interp_flat(pi_vals, k, pi_s1[k], pi_s2[k], s)
        s_left = s
        cnt = _counts(keys, k, cdf[k])
        prev = np.full(n, t_left)
        sumy = np.zeros(n)
        if cnt.max() > 0:
            jt, jy = _sorted_jumps(keys, k, t_left, dt, cnt, kind, p0, p1)
            for j in range(jt.shape[1]):
                active = j < cnt
                tj = np.where(active, jt[:, j], prev)
                s_new = _quiet_advance(
                    keys, k, _rng.SLOT_GAUSS + j, lam, bc, sig_step[k],
                    tj - prev, s
                )
                y = jy[:, j]
                s = np.where(active, s_new + psi_step[k] * y, s)
                acc += np.where(
                    active, np.log1p(pi * psi_step[k] * np.where(active, y, 0.0)),
                    0.0,
                )
                sumy += np.where(active, y, 0.0)
                prev = tj
        s = _quiet_advance(
            keys, k, _rng.SLOT_GAUSS + cnt, lam, bc, sig_step[k],
            times[k + 1] - prev, s
        )
        acc += pi * (s - s_left - psi_step[k] * sumy)
        acc -= 0.5 * pi * pi * sig_step[k] * sig_step[k] * dt
    return acc, s
