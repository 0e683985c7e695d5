"""Monte-Carlo value function, wealth simulation, and consistency checks.

The value estimator averages the pathwise time integral of the optimal
growth rate (trapezoid over the step grid, with the simulated jump
instants as extra quadrature nodes).  The wealth simulator compounds a
tabulated strategy through the per-step stochastic exponential, so the
portfolio stays positive by construction whenever the fraction interval
is admissible.  Runs keyed by the same seed share paths exactly (common
random numbers), which makes strategy comparisons and the nested
consistency check nearly noise-free.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _rng
from ._backend import get_kernels
from .approx import jump_mean_fraction_table, merton_fraction_table
from .errors import ConfigError, DomainError
from .market import SimConfig, build_sim_inputs
from .strategy import (
    constant_fraction_table,
    exact_fraction_table,
    growth_table,
)

STRATEGY_KINDS = ("exact", "merton", "jump_mean", "zero")


class ValueEstimate(NamedTuple):
    """Sample mean and standard error of the pathwise growth integral."""

    g_hat: float
    std_err: float
    n_paths: int
    seed: int


class TowerReport(NamedTuple):
    """Nested-simulation consistency check of the value estimate.

    ``lhs`` is the direct estimate over the full horizon; ``rhs`` restarts
    at the intermediate time from each simulated state.  The shared head
    segment cancels exactly under common random numbers, so ``std_err``
    reflects only the tail-vs-restart noise.
    """

    lhs: float
    rhs: float
    discrepancy: float
    std_err: float
    n_paths: int
    n_inner: int

    @property
    def z_score(self):
        if self.std_err == 0.0:
            return 0.0
        return self.discrepancy / self.std_err


@dataclass
class WealthRun:
    """Terminal log-wealth of one strategy over a bundle of paths."""

    terminal_log_wealth: np.ndarray
    positivity_violations: int
    label: str
    x0: float
    seed: int
    path_offset: int = 0

    @property
    def n_paths(self):
        return self.terminal_log_wealth.shape[0]

    @property
    def mean_log_wealth(self):
        return float(np.mean(self.terminal_log_wealth))

    @property
    def std_err(self):
        n = self.n_paths
        if n < 2:
            return 0.0
        return float(np.std(self.terminal_log_wealth, ddof=1) / math.sqrt(n))

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("# levyou wealth run\n")
            fh.write(
                f"# label={self.label} x0={self.x0:.17g} seed={self.seed} "
                f"path_offset={self.path_offset} "
                f"violations={self.positivity_violations}\n"
            )
            fh.write("path_id,log_terminal_wealth\n")
            for i, w in enumerate(self.terminal_log_wealth):
                fh.write(f"{self.path_offset + i},{w:.17g}\n")

    @classmethod
    def from_csv(cls, path):
        label, x0, seed, offset, viol = "unknown", 1.0, 0, 0, 0
        rows = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if line.startswith("#"):
                    for tok in line[1:].split():
                        if tok.startswith("label="):
                            label = tok[6:]
                        elif tok.startswith("x0="):
                            x0 = float(tok[3:])
                        elif tok.startswith("seed="):
                            seed = int(tok[5:])
                        elif tok.startswith("path_offset="):
                            offset = int(tok[12:])
                        elif tok.startswith("violations="):
                            viol = int(tok[11:])
                    continue
                if not line or line.startswith("path_id"):
                    continue
                pid, w = line.split(",")
                rows.append((int(pid), float(w)))
        if not rows:
            raise ConfigError(f"no data rows in {path}")
        rows.sort()
        return cls(
            terminal_log_wealth=np.array([w for _, w in rows]),
            positivity_violations=viol,
            label=label,
            x0=x0,
            seed=seed,
            path_offset=rows[0][0],
        )


class StrategyScore(NamedTuple):
    """Mean terminal log-wealth of one strategy, plus the paired gap to
    the reference strategy under common random numbers."""

    label: str
    mean_log_wealth: float
    std_err: float
    gap_to_ref: float
    gap_std_err: float


@dataclass
class ComparisonReport:
    """Common-random-number comparison of several strategies."""

    reference: str
    scores: list
    x0: float
    seed: int

    def score(self, label):
        for row in self.scores:
            if row.label == label:
                return row
        raise ConfigError(f"no strategy named {label!r} in the comparison")


@dataclass
class ValueGrid:
    """Value estimates over a (time, price) grid, exportable as CSV."""

    t_values: np.ndarray
    s_values: np.ndarray
    g_hat: np.ndarray
    std_err: np.ndarray
    seed: int

    def csv_text(self):
        lines = ["# levyou value grid", f"# seed={self.seed}",
                 "t,s,g_hat,std_err"]
        for i, tv in enumerate(self.t_values):
            for j, sv in enumerate(self.s_values):
                lines.append(
                    f"{tv:.17g},{sv:.17g},{self.g_hat[i, j]:.17g},"
                    f"{self.std_err[i, j]:.17g}"
                )
        return "\n".join(lines) + "\n"

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write(self.csv_text())


def _path_keys(config):
    return _rng.derive_keys(
        config.seed, config.path_offset + np.arange(config.n_paths)
    )


def _mean_se(samples):
    n = samples.shape[0]
    mean = float(np.mean(samples))
    se = float(np.std(samples, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return mean, se


def strategy_table(market, kind, times, pi_min, pi_max, ns=257):
    """Fraction table for one of the named strategies on a time grid."""
    if kind == "exact":
        return exact_fraction_table(market, times, pi_min, pi_max, ns)
    if kind == "merton":
        return merton_fraction_table(market, times, pi_min, pi_max, ns)
    if kind == "jump_mean":
        return jump_mean_fraction_table(market, times, pi_min, pi_max, ns)
    if kind == "zero":
        return constant_fraction_table(times, 0.0)
    raise ConfigError(
        f"unknown strategy kind {kind!r}; expected one of {STRATEGY_KINDS}"
    )


def estimate_value(market, t, s, T, pi_min, pi_max, config=None,
                   backend=None, table_ns=257):
    """Monte-Carlo estimate of the expected growth integral from (t, s).

    The integrand — the optimal growth rate along the simulated price —
    comes from a per-node table (documented interpolation error decreasing
    in ``table_ns``; the linear extension outside the table bracket is
    exact).  At ``T == t`` the estimate is exactly zero.
    """
    config = config or SimConfig()
    if T < t:
        raise DomainError(f"need T >= t, got t={t}, T={T}")
    if T == t:
        return ValueEstimate(0.0, 0.0, 0, config.seed)
    times, b, sg, ps, comp, cdf, kind, p0, p1 = build_sim_inputs(
        market, t, T, config
    )
    gt = growth_table(market, times, pi_min, pi_max, ns=table_ns)
    keys = _path_keys(config)
    s0 = np.full(config.n_paths, float(s))
    kern = get_kernels(backend)
    acc, _ = kern.value_paths(
        keys, s0, times, b, sg, ps, comp, market.lam, cdf, kind, p0, p1,
        gt.values, gt.s1, gt.s2, gt.slope_lo, gt.slope_hi,
    )
    g_hat, se = _mean_se(acc)
    return ValueEstimate(g_hat, se, config.n_paths, config.seed)


def total_value(market, t, s, x, T, pi_min, pi_max, config=None,
                backend=None, table_ns=257):
    """log(x) plus the estimated growth integral from (t, s)."""
    if not (x > 0.0 and math.isfinite(x)):
        raise DomainError(f"initial wealth must be positive, got {x}")
    est = estimate_value(
        market, t, s, T, pi_min, pi_max, config, backend, table_ns
    )
    return math.log(x) + est.g_hat


def wealth_simulate(market, table, t, s, x, T, config=None, backend=None,
                    label="custom"):
    """Simulate terminal log-wealth under a tabulated strategy.

    ``table`` holds the fraction per (time node, price); the position is
    held over each step and every simulated jump multiplies wealth by its
    own stochastic-exponential factor.  Non-finite terminal values are
    counted as positivity violations (impossible for fractions ranged in
    an admissible interval; reported for auditability).
    """
    config = config or SimConfig()
    if not (x > 0.0 and math.isfinite(x)):
        raise DomainError(f"initial wealth must be positive, got {x}")
    times, b, sg, ps, comp, cdf, kind, p0, p1 = build_sim_inputs(
        market, t, T, config
    )
    if table.values.shape[0] != times.shape[0]:
        raise ConfigError(
            f"strategy table has {table.values.shape[0]} time rows, the "
            f"run needs {times.shape[0]}"
        )
    keys = _path_keys(config)
    s0 = np.full(config.n_paths, float(s))
    kern = get_kernels(backend)
    acc, _ = kern.wealth_paths(
        keys, s0, times, b, sg, ps, comp, market.lam, cdf, kind, p0, p1,
        table.values, table.s1, table.s2,
    )
    bad = int(np.count_nonzero(~np.isfinite(acc)))
    return WealthRun(
        terminal_log_wealth=math.log(x) + acc,
        positivity_violations=bad,
        label=label,
        x0=x,
        seed=config.seed,
        path_offset=config.path_offset,
    )


def compare_strategies(market, t, s, x, T, pi_min, pi_max, config=None,
                       backend=None, kinds=STRATEGY_KINDS, reference="exact",
                       table_ns=257):
    """Paired comparison of strategies on common random numbers.

    Every strategy is driven through identical paths; the per-path gap to
    the reference strategy therefore has far smaller variance than the
    difference of independent runs would.
    """
    config = config or SimConfig()
    if reference not in kinds:
        raise ConfigError(
            f"reference {reference!r} is not among the kinds {kinds}"
        )
    times = np.linspace(t, T, config.n_steps + 1)
    runs = {}
    for kind in kinds:
        table = strategy_table(market, kind, times, pi_min, pi_max, table_ns)
        runs[kind] = wealth_simulate(
            market, table, t, s, x, T, config, backend, label=kind
        )
    ref = runs[reference].terminal_log_wealth
    scores = []
    for kind in kinds:
        w = runs[kind].terminal_log_wealth
        mean, se = _mean_se(w)
        gap, gap_se = _mean_se(ref - w)
        scores.append(StrategyScore(kind, mean, se, gap, gap_se))
    return ComparisonReport(
        reference=reference, scores=scores, x0=x, seed=config.seed
    )


def tower_check(market, t, s, h, T, pi_min, pi_max, config=None,
                backend=None, table_ns=257):
    """Nested-simulation check that restarting at t+h preserves the value.

    The full-horizon integral of each outer path is split at t+h; its tail
    is compared with an inner estimate restarted from the path's state,
    using a child seed per outer path.  The head segment is common to both
    sides and cancels exactly, so the reported discrepancy is the mean of
    (pathwise tail) - (inner estimate), with its standard error.  Inner
    runs use roughly the square root of the outer path count.
    """
    config = config or SimConfig()
    if not (t < t + h <= T):
        raise DomainError(
            f"need t < t+h <= T, got t={t}, h={h}, T={T}"
        )
    t_mid = t + h
    frac = h / (T - t)
    n1 = min(max(1, int(round(config.n_steps * frac))), config.n_steps - 1) \
        if t_mid < T else config.n_steps
    n2 = config.n_steps - n1
    head_times = np.linspace(t, t_mid, n1 + 1)
    if n2 > 0:
        tail_times = np.linspace(t_mid, T, n2 + 1)
        full_times = np.concatenate([head_times, tail_times[1:]])
    else:
        tail_times = None
        full_times = head_times
    kern = get_kernels(backend)
    keys = _path_keys(config)
    s0 = np.full(config.n_paths, float(s))

    inputs_full = build_sim_inputs(market, t, T, config, times=full_times)
    gt_full = growth_table(market, full_times, pi_min, pi_max, ns=table_ns)
    acc_full, _ = kern.value_paths(
        keys, s0, inputs_full[0], inputs_full[1], inputs_full[2],
        inputs_full[3], inputs_full[4], market.lam, inputs_full[5],
        inputs_full[6], inputs_full[7], inputs_full[8],
        gt_full.values, gt_full.s1, gt_full.s2,
        gt_full.slope_lo, gt_full.slope_hi,
    )

    inputs_head = build_sim_inputs(market, t, t_mid, config, times=head_times)
    gt_head = growth_table(market, head_times, pi_min, pi_max, ns=table_ns)
    acc_head, s_mid = kern.value_paths(
        keys, s0, inputs_head[0], inputs_head[1], inputs_head[2],
        inputs_head[3], inputs_head[4], market.lam, inputs_head[5],
        inputs_head[6], inputs_head[7], inputs_head[8],
        gt_head.values, gt_head.s1, gt_head.s2,
        gt_head.slope_lo, gt_head.slope_hi,
    )
    tails = acc_full - acc_head

    n_inner = max(2, math.isqrt(config.n_paths))
    inner = np.zeros(config.n_paths)
    if n2 > 0:
        inputs_tail = build_sim_inputs(
            market, t_mid, T, config, times=tail_times
        )
        gt_tail = growth_table(market, tail_times, pi_min, pi_max,
                               ns=table_ns)
        ids = np.arange(n_inner)
        for i in range(config.n_paths):
            child = _rng.derive_seed(config.seed, config.path_offset + i + 1)
            keys_in = _rng.derive_keys(child, ids)
            s_in = np.full(n_inner, s_mid[i])
            acc_in, _ = kern.value_paths(
                keys_in, s_in, inputs_tail[0], inputs_tail[1],
                inputs_tail[2], inputs_tail[3], inputs_tail[4], market.lam,
                inputs_tail[5], inputs_tail[6], inputs_tail[7],
                inputs_tail[8],
                gt_tail.values, gt_tail.s1, gt_tail.s2,
                gt_tail.slope_lo, gt_tail.slope_hi,
            )
            inner[i] = float(np.mean(acc_in))

    diff = tails - inner
    disc, se = _mean_se(diff)
    lhs, _ = _mean_se(acc_full)
    rhs, _ = _mean_se(acc_head + inner)
    return TowerReport(
        lhs=lhs, rhs=rhs, discrepancy=disc, std_err=se,
        n_paths=config.n_paths, n_inner=n_inner,
    )


def value_grid(market, t_values, s_values, T, pi_min, pi_max, config=None,
               backend=None, table_ns=257):
    """Value estimates over a rectangle of start times and prices.

    Simulation inputs and the growth table are built once per start time
    and shared across prices (the paths differ only in their start state).
    """
    config = config or SimConfig()
    t_values = np.asarray(t_values, dtype=np.float64)
    s_values = np.asarray(s_values, dtype=np.float64)
    g_hat = np.zeros((t_values.shape[0], s_values.shape[0]))
    std_err = np.zeros_like(g_hat)
    kern = get_kernels(backend)
    keys = _path_keys(config)
    for i, tv in enumerate(t_values):
        if not tv <= T:
            raise DomainError(f"start time {tv} is past the horizon {T}")
        if tv == T:
            continue
        times, b, sg, ps, comp, cdf, kind, p0, p1 = build_sim_inputs(
            market, float(tv), T, config
        )
        gt = growth_table(market, times, pi_min, pi_max, ns=table_ns)
        for j, sv in enumerate(s_values):
            s0 = np.full(config.n_paths, float(sv))
            acc, _ = kern.value_paths(
                keys, s0, times, b, sg, ps, comp, market.lam, cdf, kind,
                p0, p1,
                gt.values, gt.s1, gt.s2, gt.slope_lo, gt.slope_hi,
            )
            g_hat[i, j], std_err[i, j] = _mean_se(acc)
    return ValueGrid(
        t_values=t_values, s_values=s_values, g_hat=g_hat, std_err=std_err,
        seed=config.seed,
    )
