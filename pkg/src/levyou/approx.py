"""Closed-form approximations of the optimal fraction, with error bounds.

Two approximations are provided, both driven by the drift gap
q = d(t) - lam*s (see :mod:`levyou.strategy`):

* ``merton_fraction`` — the risk-ratio rule q / (sigma^2 + sigma_L^2) with
  sigma_L^2 = psi^2 * (second jump moment): the jump integral is replaced
  by its second-order expansion around a zero fraction.
* ``jump_mean_fraction`` — the jump integrand is linearized around the
  mean jump size mu_F, which turns the stationarity condition into a
  quadratic (or into an explicit ratio when there is no Brownian part).

Both clamp to the fraction interval and report a flag plus the raw
(unclamped) value.  ``merton_error_bound`` and ``jump_mean_error_bound``
give rigorous uniform-in-price bounds on the distance to the exact
fraction, with case-dependent constants; the first needs a finite third
absolute jump moment and reports an infinite bound otherwise.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import BranchError, CaseError, DegenerateError
from .market import CaseTag, classify_case


class ApproxFraction(NamedTuple):
    """An approximate fraction, its clamp flag, and the raw value."""

    value: float
    clamped: bool
    unclamped: float


def _finalize(raw, pi_min, pi_max):
    raw = np.asarray(raw, dtype=np.float64)
    val = np.clip(raw, pi_min, pi_max)
    clamped = (raw < pi_min) | (raw > pi_max) | ~np.isfinite(raw)
    val = np.where(np.isfinite(raw), val, np.nan)
    return val, clamped, raw


# -- risk-ratio approximation ------------------------------------------------


def merton_denominator(market, t):
    """sigma(t)^2 + psi(t)^2 * (second jump moment)."""
    psi = market.psi_at(t)
    sg = market.sigma_at(t)
    return sg * sg + psi * psi * market.jump_second_moment


def merton_fraction_grid(market, t, s_grid, pi_min, pi_max):
    """Risk-ratio fractions for an array of prices.

    Returns (values, clamped, raw) arrays.
    """
    market.validate_interval(pi_min, pi_max)
    denom = merton_denominator(market, t)
    if denom <= 0.0:
        raise DegenerateError(
            "risk-ratio approximation needs sigma^2 + psi^2 * m2 > 0"
        )
    s_grid = np.asarray(s_grid, dtype=np.float64)
    q = market.foc_drift(t) - market.lam * s_grid
    return _finalize(q / denom, pi_min, pi_max)


def merton_fraction(market, t, s, pi_min, pi_max):
    val, clamped, raw = merton_fraction_grid(
        market, t, np.array([s]), pi_min, pi_max
    )
    return ApproxFraction(float(val[0]), bool(clamped[0]), float(raw[0]))


# -- jump-mean approximation ---------------------------------------------


def _jump_mean_params(market, t):
    meas = market.measure
    if not meas.is_finite_activity:
        raise CaseError(
            "the jump-mean approximation needs a finite-activity measure"
        )
    eta = meas.rate
    mu = meas.mean_size if eta > 0.0 else 0.0
    return eta, mu


def jump_mean_drag(market, t, pi):
    """Drag of the mean-size point measure: eta*psi^2*mu^2*pi/(1+pi*psi*mu)."""
    eta, mu = _jump_mean_params(market, t)
    psi = market.psi_at(t)
    return eta * psi * psi * mu * mu * pi / (1.0 + pi * psi * mu)


def _jump_mean_raw(market, t, q):
    """Unclamped jump-mean fractions for an array of drift gaps.

    With a Brownian part the stationarity condition is a quadratic; the
    admissible root is the one keeping 1 + pi*psi*mu_F positive (the pole
    always separates the two roots, so exactly one qualifies).  Without a
    Brownian part the condition is linear in disguise and inverts to an
    explicit ratio, whose pole is handled by the boundary checks upstream.
    """
    eta, mu = _jump_mean_params(market, t)
    psi = market.psi_at(t)
    sg = market.sigma_at(t)
    sg2 = sg * sg
    q = np.asarray(q, dtype=np.float64)
    if mu == 0.0 and sg2 == 0.0:
        raise DegenerateError(
            "jump-mean approximation needs a Brownian part or a nonzero "
            "mean jump size"
        )
    if mu == 0.0 or psi == 0.0:
        # the point measure carries no jump risk: pure risk-ratio in sigma
        return q / sg2
    if sg2 == 0.0:
        denom = psi * mu * (q - eta * psi * mu)
        with np.errstate(divide="ignore", invalid="ignore"):
            return -q / denom
    p1 = mu * psi * q - mu * mu * psi * psi * eta - sg2
    p2 = mu * q * sg2 * psi
    p3 = mu * psi * sg2
    disc = p1 * p1 + 4.0 * p2
    if np.any(disc < 0.0):
        raise BranchError(
            "jump-mean quadratic has no real root (discriminant < 0)"
        )
    sq = np.sqrt(disc)
    r_plus = (p1 + sq) / (2.0 * p3)
    r_minus = (p1 - sq) / (2.0 * p3)
    ok_plus = 1.0 + r_plus * psi * mu > 0.0
    ok_minus = 1.0 + r_minus * psi * mu > 0.0
    if np.any(ok_plus == ok_minus):
        raise BranchError(
            "jump-mean quadratic root selection is ambiguous: the "
            "admissibility condition does not single out one root"
        )
    return np.where(ok_plus, r_plus, r_minus)


def jump_mean_fraction_grid(market, t, s_grid, pi_min, pi_max):
    """Jump-mean fractions for an array of prices.

    The clamp decision is made boundary-first on the approximated
    stationarity slope, so the pole of the pure-jump ratio (prices deep in
    the full-position region) never contaminates the result.

    Returns (values, clamped, raw) arrays.
    """
    market.validate_interval(pi_min, pi_max)
    s_grid = np.asarray(s_grid, dtype=np.float64)
    q = market.foc_drift(t) - market.lam * s_grid
    eta, mu = _jump_mean_params(market, t)
    sg = market.sigma_at(t)
    if mu == 0.0 and sg == 0.0:
        raise DegenerateError(
            "jump-mean approximation needs a Brownian part or a nonzero "
            "mean jump size"
        )
    g_hi = sg * sg * pi_max + jump_mean_drag(market, t, pi_max)
    g_lo = sg * sg * pi_min + jump_mean_drag(market, t, pi_min)
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = _jump_mean_raw(market, t, q)
    val = np.empty_like(q)
    clamped = np.zeros(q.shape, dtype=bool)
    hi = q >= g_hi
    lo = q <= g_lo
    interior = ~(hi | lo)
    val[hi] = pi_max
    val[lo] = pi_min
    clamped[hi | lo] = True
    val[interior] = raw[interior]
    return val, clamped, raw


def jump_mean_fraction(market, t, s, pi_min, pi_max):
    val, clamped, raw = jump_mean_fraction_grid(
        market, t, np.array([s]), pi_min, pi_max
    )
    return ApproxFraction(float(val[0]), bool(clamped[0]), float(raw[0]))


# -- error bounds ------------------------------------------------------------


@dataclass(frozen=True)
class ApproxBound:
    """A uniform-in-price bound on |exact - approximate| fraction."""

    bound_value: float
    constants: dict
    case: CaseTag
    inputs_echo: dict

    @property
    def is_finite(self):
        return math.isfinite(self.bound_value)


def _window_scales(market):
    psi1, psi2 = market.psi_range
    sigma1 = market.sigma_range[0]
    return psi1, psi2, sigma1 * sigma1


def merton_error_bound(market, pi_min, pi_max):
    """Uniform bound on the risk-ratio approximation error.

    Requires a finite third absolute jump moment; otherwise the bound is
    reported as infinity (never raised as an error).
    """
    case = classify_case(market.measure)
    if case is CaseTag.CONTINUOUS:
        raise CaseError(
            "the risk-ratio bound is vacuous without jumps: the "
            "approximation is exact"
        )
    adm, delta = market.validate_interval(pi_min, pi_max)
    psi1, psi2, sigma1_sq = _window_scales(market)
    m, big = market.measure.support()
    sv2 = market.jump_second_moment
    c0 = psi2**3 * max(pi_min * pi_min, pi_max * pi_max) / (
        sigma1_sq + psi2 * psi2 * sv2
    )
    terms = [1.0]
    if case in (CaseTag.TWO_SIDED, CaseTag.POSITIVE) and math.isfinite(big):
        terms.append(delta * psi2 * big)
    if case in (CaseTag.TWO_SIDED, CaseTag.NEGATIVE) and math.isfinite(m):
        terms.append(-delta * psi2 * m)
    c = c0 / min(terms)
    third = market.measure.abs_moment(3)
    bound = c * third if math.isfinite(third) else math.inf
    return ApproxBound(
        bound_value=bound,
        constants={"C0": c0, "C": c},
        case=case,
        inputs_echo={
            "delta": delta, "pi_min": pi_min, "pi_max": pi_max,
            "m": m, "M": big, "psi2": psi2, "sigma1_sq": sigma1_sq,
            "third_moment": third,
        },
    )


def jump_mean_error_bound(market, pi_min, pi_max):
    """Uniform bound on the jump-mean approximation error."""
    case = classify_case(market.measure)
    if case is CaseTag.CONTINUOUS:
        raise CaseError(
            "the jump-mean bound needs a jump component"
        )
    meas = market.measure
    if not meas.is_finite_activity:
        raise CaseError(
            "the jump-mean bound needs a finite-activity measure"
        )
    adm, delta = market.validate_interval(pi_min, pi_max)
    psi1, psi2, sigma1_sq = _window_scales(market)
    m, big = meas.support()
    eta = meas.rate
    mu_f = meas.mean_size
    sigma_f = meas.size_std
    if sigma1_sq == 0.0 and mu_f == 0.0:
        raise DegenerateError(
            "the jump-mean bound needs a Brownian part or a nonzero mean "
            "jump size"
        )
    sq_terms = [1.0]
    lin_terms = [1.0]
    if case in (CaseTag.TWO_SIDED, CaseTag.POSITIVE) and math.isfinite(big):
        x = delta * psi2 * big
        sq_terms.append(1.0 / (x * x))
        lin_terms.append(1.0 / x)
    if case in (CaseTag.TWO_SIDED, CaseTag.NEGATIVE) and math.isfinite(m):
        x = delta * psi2 * abs(m)
        sq_terms.append(1.0 / (x * x))
        lin_terms.append(1.0 / x)
    if len(sq_terms) == 1:
        c1 = 1.0
    else:
        c1 = max(sq_terms) + max(lin_terms)
    if mu_f > 0.0:
        c2 = 1.0 / (1.0 + pi_max * psi2 * mu_f) ** 2
    elif mu_f < 0.0:
        c2 = 1.0 / (1.0 + pi_min * psi1 * mu_f) ** 2
    else:
        c2 = 1.0
    bound = (eta * psi2 * psi2 * c1 * sigma_f) / (
        sigma1_sq + eta * psi2 * psi2 * c2 * mu_f * mu_f
    )
    return ApproxBound(
        bound_value=bound,
        constants={"C1": c1, "C2": c2},
        case=case,
        inputs_echo={
            "delta": delta, "pi_min": pi_min, "pi_max": pi_max,
            "m": m, "M": big, "psi2": psi2, "sigma1_sq": sigma1_sq,
            "mu_F": mu_f, "sigma_F": sigma_f,
        },
    )


# -- kernel tables -------------------------------------------------------


def merton_fraction_table(market, times, pi_min, pi_max, ns=257):
    """Dense table of the risk-ratio strategy for the simulation kernels."""
    from .strategy import fraction_table

    market.validate_interval(pi_min, pi_max)

    def solver(tv, grid):
        val, _, _ = merton_fraction_grid(market, tv, grid, pi_min, pi_max)
        return val

    def bracket(tv):
        denom = merton_denominator(market, tv)
        if market.lam == 0.0 or denom <= 0.0:
            return 0.0, 1.0
        d = market.foc_drift(tv)
        s1 = (d - denom * pi_max) / market.lam
        s2 = (d - denom * pi_min) / market.lam
        return (s1, s2) if s1 < s2 else (s1, s1 + 1.0)

    return fraction_table(market, times, pi_min, pi_max, solver, bracket, ns)


def jump_mean_fraction_table(market, times, pi_min, pi_max, ns=257):
    """Dense table of the jump-mean strategy for the simulation kernels."""
    from .strategy import fraction_table

    market.validate_interval(pi_min, pi_max)

    def solver(tv, grid):
        val, _, _ = jump_mean_fraction_grid(market, tv, grid, pi_min, pi_max)
        return val

    def bracket(tv):
        sg = market.sigma_at(tv)
        g_hi = sg * sg * pi_max + jump_mean_drag(market, tv, pi_max)
        g_lo = sg * sg * pi_min + jump_mean_drag(market, tv, pi_min)
        if market.lam == 0.0:
            return 0.0, 1.0
        d = market.foc_drift(tv)
        s1 = (d - g_hi) / market.lam
        s2 = (d - g_lo) / market.lam
        return (s1, s2) if s1 < s2 else (s1, s1 + 1.0)

    return fraction_table(market, times, pi_min, pi_max, solver, bracket, ns)
