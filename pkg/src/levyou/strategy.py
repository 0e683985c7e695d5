"""Exact optimal trading fraction and its value.

For a fraction pi held at time t with price s, the expected log-wealth
growth rate per unit time is

    growth(pi; t, s) = (d(t) - lam*s) * pi - sigma(t)^2 * pi^2 / 2
                       + integral of [log(1 + pi*psi(t)*y) - pi*psi(t)*y]
                         against the jump measure,

with d the effective mean drift (``MarketCoefficients.foc_drift``).  The
function is strictly concave on the admissible set, and its stationarity
condition is

    q = G(pi),   q = d(t) - lam*s,   G(pi) = sigma^2 * pi + drag(pi),

where G is strictly increasing.  The optimal fraction on an interval
[pi_min, pi_max] is therefore the monotone inverse of G clamped to the
interval; all price dependence enters through the scalar q, which makes
whole-grid solves cheap and the clamping thresholds in price explicit.
"""

import math
from typing import NamedTuple

import numpy as np

from .errors import ConvergenceError, DomainError
from .jumps import NoJumps

BISECT_ITERS = 80
NEWTON_ITERS = 3
RESIDUAL_SLACK = 1e-7


def _drag_at(measure, pis, psi):
    """Vectorized drag; falls back to per-element quadrature."""
    pis = np.asarray(pis, dtype=np.float64)
    try:
        out = np.asarray(measure.drag(pis, psi), dtype=np.float64)
        if out.shape == pis.shape:
            return out
    except (TypeError, ValueError):
        pass
    flat = np.array([measure.drag(float(p), psi) for p in pis.ravel()])
    return flat.reshape(pis.shape)


def _curvature_at(measure, pis, psi):
    """Vectorized drag derivative; falls back to per-element quadrature."""
    pis = np.asarray(pis, dtype=np.float64)
    try:
        out = np.asarray(measure.curvature(pis, psi), dtype=np.float64)
        if out.shape == pis.shape:
            return out
    except (TypeError, ValueError):
        pass
    flat = np.array([measure.curvature(float(p), psi) for p in pis.ravel()])
    return flat.reshape(pis.shape)


def growth_rate(pi, market, t, s):
    """Expected log-wealth growth rate per unit time for fraction ``pi``."""
    psi = market.psi_at(t)
    sg = market.sigma_at(t)
    q = market.foc_drift(t) - market.lam * s
    pi = float(pi)
    return (
        q * pi
        - 0.5 * sg * sg * pi * pi
        + market.measure.log_penalty(pi, psi)
    )


def growth_slope(pi, market, t, s):
    """Derivative of the growth rate with respect to the fraction."""
    psi = market.psi_at(t)
    sg = market.sigma_at(t)
    q = market.foc_drift(t) - market.lam * s
    pi = float(pi)
    return q - sg * sg * pi - market.measure.drag(pi, psi)


class OptimalFraction(NamedTuple):
    """Solution record for one optimal-fraction solve."""

    value: float
    clamped: bool
    iterations: int
    residual: float


def _solve_q(market, t, q, pi_min, pi_max):
    """Invert the stationarity condition for an array of drift gaps ``q``.

    Returns (pi, clamped, iterations, residual) arrays.  ``residual`` is the
    remaining slope q - G(pi); it is zero at clamped points by convention.
    """
    q = np.asarray(q, dtype=np.float64)
    sg = market.sigma_at(t)
    psi = market.psi_at(t)
    sg2 = sg * sg
    meas = market.measure

    def G(p):
        return sg2 * p + _drag_at(meas, p, psi)

    g_hi = float(G(np.array(pi_max)))
    g_lo = float(G(np.array(pi_min)))
    pi = np.empty_like(q)
    clamped = np.zeros(q.shape, dtype=bool)
    hi_mask = q >= g_hi
    lo_mask = q <= g_lo
    pi[hi_mask] = pi_max
    pi[lo_mask] = pi_min
    clamped[hi_mask | lo_mask] = True

    interior = ~(hi_mask | lo_mask)
    iters = 0
    resid = np.zeros_like(q)
    if np.any(interior):
        if g_hi <= g_lo:
            # no stochastic term at all: the growth rate is linear and the
            # optimum sits on a boundary, already handled above
            raise DomainError(
                "stationarity condition is degenerate: the model has no "
                "Brownian or jump risk, so interior optima do not exist"
            )
        qi = q[interior]
        lo = np.full(qi.shape, float(pi_min))
        hi = np.full(qi.shape, float(pi_max))
        width0 = float(pi_max - pi_min)
        target = max(1e-14, 1e-12 * max(1.0, width0))
        for iters in range(1, BISECT_ITERS + 1):
            mid = 0.5 * (lo + hi)
            up = G(mid) < qi
            lo = np.where(up, mid, lo)
            hi = np.where(up, hi, mid)
            if float(np.max(hi - lo)) < target:
                break
        root = 0.5 * (lo + hi)
        # Newton polish with the exact slope of G
        for _ in range(NEWTON_ITERS):
            slope = sg2 + _curvature_at(meas, root, psi)
            step = (qi - G(root)) / np.maximum(slope, 1e-300)
            root = np.clip(root + step, lo, hi)
        r = qi - G(root)
        pi[interior] = root
        resid[interior] = r
        scale = np.maximum(1.0, np.abs(qi))
        if float(np.max(np.abs(r) / scale)) > RESIDUAL_SLACK:
            raise ConvergenceError(
                "optimal-fraction solve did not reach the residual target; "
                f"worst relative residual {float(np.max(np.abs(r) / scale))}"
            )
    return pi, clamped, iters, resid


def optimal_fraction(market, t, s, pi_min, pi_max):
    """Optimal fraction at time ``t`` and price ``s`` on [pi_min, pi_max]."""
    market.validate_interval(pi_min, pi_max)
    q = market.foc_drift(t) - market.lam * s
    pi, clamped, iters, resid = _solve_q(
        market, t, np.array([q]), pi_min, pi_max
    )
    return OptimalFraction(
        value=float(pi[0]),
        clamped=bool(clamped[0]),
        iterations=int(iters),
        residual=float(resid[0]),
    )


def optimal_fraction_grid(market, t, s_grid, pi_min, pi_max):
    """Optimal fractions for an array of prices; returns (pi, clamped)."""
    market.validate_interval(pi_min, pi_max)
    s_grid = np.asarray(s_grid, dtype=np.float64)
    q = market.foc_drift(t) - market.lam * s_grid
    pi, clamped, _, _ = _solve_q(market, t, q, pi_min, pi_max)
    return pi, clamped


def inverse_price(market, t, pi):
    """The price at which ``pi`` is exactly optimal (stationary).

    Solves q = G(pi) for the price inside q = d(t) - lam*s.
    """
    if market.lam == 0.0:
        raise DomainError(
            "the stationary price is undefined without mean reversion"
        )
    sg = market.sigma_at(t)
    psi = market.psi_at(t)
    g = sg * sg * float(pi) + market.measure.drag(float(pi), psi)
    return (market.foc_drift(t) - g) / market.lam


def clamp_thresholds(market, t, pi_min, pi_max):
    """Prices (s_full, s_flat) bracketing the interior region: the optimal
    fraction is pi_max at or below ``s_full`` and pi_min at or above
    ``s_flat``."""
    return inverse_price(market, t, pi_max), inverse_price(market, t, pi_min)


def best_growth(market, t, s, pi_min, pi_max):
    """Optimal growth rate: the growth rate at the optimal fraction."""
    opt = optimal_fraction(market, t, s, pi_min, pi_max)
    return growth_rate(opt.value, market, t, s)


def best_growth_gradient(market, t, s, pi_min, pi_max):
    """(d/dt, d/ds) of the optimal growth rate via the envelope property.

    Only the explicit (t, s) dependence contributes at the optimum:
    d/ds = -lam * pi; d/dt collects the coefficient time-derivatives,
    where the impact-scale term differentiates the jump integral,

        d/dt = d'(t)*pi - sigma*sigma'*pi^2 - psi'*psi*pi^2*tilted(pi),

    with tilted the second-moment transform under the tilted density.
    """
    opt = optimal_fraction(market, t, s, pi_min, pi_max)
    pi = opt.value
    d_dot = market.b_dot_at(t)
    if not market.compensated:
        d_dot += market.psi_dot_at(t) * market.jump_mean_flow
    sg = market.sigma_at(t)
    psi = market.psi_at(t)
    g_t = (
        d_dot * pi
        - sg * market.sigma_dot_at(t) * pi * pi
        - market.psi_dot_at(t) * psi * pi * pi
        * market.measure.tilted_second_moment(pi, psi)
    )
    g_s = -market.lam * pi
    return g_t, g_s


class StrategySurface:
    """Optimal (or approximate) fractions tabulated on a (time, price) grid."""

    def __init__(self, t_grid, s_grid, fractions, clamped, label="exact"):
        self.t_grid = np.asarray(t_grid, dtype=np.float64)
        self.s_grid = np.asarray(s_grid, dtype=np.float64)
        self.fractions = np.asarray(fractions, dtype=np.float64)
        self.clamped = np.asarray(clamped, dtype=bool)
        self.label = label

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write(f"# levyou strategy surface label={self.label}\n")
            fh.write("time,price,fraction,clamped\n")
            for i, tv in enumerate(self.t_grid):
                for j, sv in enumerate(self.s_grid):
                    fh.write(
                        f"{tv:.17g},{sv:.17g},"
                        f"{self.fractions[i, j]:.17g},"
                        f"{int(self.clamped[i, j])}\n"
                    )


def strategy_surface(market, t_grid, s_grid, pi_min, pi_max):
    """Tabulate the exact optimal fraction over a (time, price) grid."""
    market.validate_interval(pi_min, pi_max)
    t_grid = np.asarray(t_grid, dtype=np.float64)
    s_grid = np.asarray(s_grid, dtype=np.float64)
    out = np.empty((len(t_grid), len(s_grid)))
    cl = np.empty((len(t_grid), len(s_grid)), dtype=bool)
    row = None
    for i, tv in enumerate(t_grid):
        if market.is_constant and row is not None:
            out[i], cl[i] = row
            continue
        pi, clamped = optimal_fraction_grid(
            market, float(tv), s_grid, pi_min, pi_max
        )
        out[i], cl[i] = pi, clamped
        row = (pi, clamped)
    return StrategySurface(t_grid, s_grid, out, cl)


# -- dense tables for the simulation kernels --------------------------------


class FractionTable(NamedTuple):
    """Per-node price brackets plus fraction values on a unit grid.

    Row k holds the fraction at prices s1[k] + x * (s2[k] - s1[k]) for x on
    a uniform grid over [0, 1].  Outside the bracket the fraction is
    constant (pi_max below, pi_min above), which the kernels apply exactly.
    """

    values: np.ndarray
    s1: np.ndarray
    s2: np.ndarray


class GrowthTable(NamedTuple):
    """Like :class:`FractionTable` for the optimal growth rate, which is
    exactly linear outside the bracket with the recorded slopes."""

    values: np.ndarray
    s1: np.ndarray
    s2: np.ndarray
    slope_lo: float
    slope_hi: float


def _bracket(market, t, pi_min, pi_max, solver_G=None):
    """Price bracket [s1, s2] outside which the optimum is clamped."""
    s1 = inverse_price(market, t, pi_max)
    s2 = inverse_price(market, t, pi_min)
    if not s1 < s2:
        # degenerate stochastic part; any bracket works, fractions constant
        return s1, s1 + 1.0
    return s1, s2


def fraction_table(market, times, pi_min, pi_max, solver, bracket_fn, ns=257):
    """Tabulate a price-monotone strategy at every time node.

    ``solver(t, s_arr)`` returns fractions; ``bracket_fn(t)`` the price
    bracket outside which the strategy equals pi_max / pi_min exactly.
    """
    times = np.asarray(times, dtype=np.float64)
    nk = len(times)
    x = np.linspace(0.0, 1.0, ns)
    vals = np.empty((nk, ns))
    s1 = np.empty(nk)
    s2 = np.empty(nk)
    prev = None
    for k, tv in enumerate(times):
        if market.is_constant and prev is not None:
            vals[k], s1[k], s2[k] = prev
            continue
        a, b = bracket_fn(float(tv))
        grid = a + x * (b - a)
        vals[k] = solver(float(tv), grid)
        s1[k], s2[k] = a, b
        prev = (vals[k], a, b)
    return FractionTable(values=vals, s1=s1, s2=s2)


def exact_fraction_table(market, times, pi_min, pi_max, ns=257):
    market.validate_interval(pi_min, pi_max)

    def solver(tv, grid):
        pi, _ = optimal_fraction_grid(market, tv, grid, pi_min, pi_max)
        return pi

    def bracket(tv):
        return _bracket(market, tv, pi_min, pi_max)

    return fraction_table(market, times, pi_min, pi_max, solver, bracket, ns)


def constant_fraction_table(times, value):
    """Table for a fraction that ignores the price entirely."""
    times = np.asarray(times, dtype=np.float64)
    nk = len(times)
    return FractionTable(
        values=np.full((nk, 2), float(value)),
        s1=np.zeros(nk),
        s2=np.ones(nk),
    )


def growth_table(market, times, pi_min, pi_max, ns=257):
    """Tabulate the optimal growth rate at every time node.

    Below s1 the optimum is pi_max and the growth rate is exactly linear in
    the price with slope -lam*pi_max (and likewise above s2), so the linear
    extension used by the kernels is exact outside the bracket.
    """
    market.validate_interval(pi_min, pi_max)
    times = np.asarray(times, dtype=np.float64)
    nk = len(times)
    x = np.linspace(0.0, 1.0, ns)
    vals = np.empty((nk, ns))
    s1 = np.empty(nk)
    s2 = np.empty(nk)
    prev = None
    for k, tv in enumerate(times):
        if market.is_constant and prev is not None:
            vals[k], s1[k], s2[k] = prev
            continue
        a, b = _bracket(market, float(tv), pi_min, pi_max)
        grid = a + x * (b - a)
        pi, _ = optimal_fraction_grid(market, float(tv), grid, pi_min, pi_max)
        psi = market.psi_at(float(tv))
        sg = market.sigma_at(float(tv))
        q = market.foc_drift(float(tv)) - market.lam * grid
        pen = np.array(
            [market.measure.log_penalty(float(p), psi) for p in pi]
        )
        vals[k] = q * pi - 0.5 * sg * sg * pi * pi + pen
        s1[k], s2[k] = a, b
        prev = (vals[k], a, b)
    return GrowthTable(
        values=vals,
        s1=s1,
        s2=s2,
        slope_lo=-market.lam * pi_max,
        slope_hi=-market.lam * pi_min,
    )
