"""Market model: mean-reverting price with additive jumps.

The price follows, for u in [t, T],

    dS(u) = -lam * S(u) du + dL(u),

where L is an additive process with local drift b(u), Brownian scale
sigma(u), and jumps of size psi(u) * y arriving according to the jump
measure.  With ``compensated=True`` the stored drift b is the drift of the
compensated decomposition (jump part centered; mean price dynamics driven
by b alone); with ``compensated=False`` b is the raw drift and the mean
dynamics pick up the jump mean flow psi(u) * ∫ y nu(dy) on top of it.

Everything downstream (first-order condition, approximations, simulation)
consistently uses the effective mean drift ``foc_drift``.
"""

import enum
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import _rng
from ._backend import get_kernels
from .errors import AdmissibilityError, CaseError, ConfigError, DomainError
from .jumps import JumpMeasure, NoJumps, _quad


class CaseTag(enum.Enum):
    """Sign pattern of the jump support, which fixes the admissible set."""

    TWO_SIDED = "A"      # m < 0 < M
    POSITIVE = "B"       # 0 <= m <= M, M != 0
    NEGATIVE = "C"       # m <= M <= 0, m != 0
    CONTINUOUS = "D"     # no jumps


def classify_case(measure):
    """Classify a jump measure by the sign pattern of its support."""
    if measure.rate == 0.0:
        return CaseTag.CONTINUOUS
    m, big = measure.support()
    if m < 0.0 < big:
        return CaseTag.TWO_SIDED
    if m >= 0.0:
        return CaseTag.POSITIVE
    return CaseTag.NEGATIVE


@dataclass(frozen=True)
class AdmissibleSet:
    """Open (or half-open) interval of fractions keeping 1 + pi psi y > 0."""

    lo: float
    hi: float
    lo_open: bool
    hi_open: bool
    case: CaseTag

    def contains_interval(self, pi_min, pi_max):
        lo_ok = pi_min > self.lo if self.lo_open else pi_min >= self.lo
        hi_ok = pi_max < self.hi if self.hi_open else pi_max <= self.hi
        return lo_ok and hi_ok

    def boundary_distance(self, pi_min, pi_max):
        """Distance from [pi_min, pi_max] to the finite open endpoints
        (infinity when there is none)."""
        d = math.inf
        if self.lo_open and math.isfinite(self.lo):
            d = min(d, pi_min - self.lo)
        if self.hi_open and math.isfinite(self.hi):
            d = min(d, self.hi - pi_max)
        return d


def admissible_set(measure, psi_max):
    """Admissible fractions for a measure under the worst-case impact scale."""
    case = classify_case(measure)
    if case is CaseTag.CONTINUOUS or psi_max == 0.0:
        return AdmissibleSet(-math.inf, math.inf, True, True,
                             CaseTag.CONTINUOUS if psi_max == 0.0 else case)
    if psi_max < 0.0:
        raise DomainError(f"impact scale must be >= 0, got {psi_max}")
    m, big = measure.support()
    if case is CaseTag.TWO_SIDED:
        # an unbounded jump tail pins that side to a closed endpoint at 0:
        # only the flat position survives arbitrarily large adverse jumps
        lo, lo_open = (
            (-1.0 / (big * psi_max), True) if math.isfinite(big)
            else (0.0, False)
        )
        hi, hi_open = (
            (-1.0 / (m * psi_max), True) if math.isfinite(m)
            else (0.0, False)
        )
        return AdmissibleSet(lo, hi, lo_open, hi_open, case)
    if case is CaseTag.POSITIVE:
        if math.isinf(big):
            return AdmissibleSet(0.0, math.inf, False, True, case)
        return AdmissibleSet(-1.0 / (big * psi_max), math.inf, True, True, case)
    if math.isinf(m):
        return AdmissibleSet(-math.inf, 0.0, True, False, case)
    return AdmissibleSet(-math.inf, -1.0 / (m * psi_max), True, True, case)


def _as_range(value, rng, name):
    """Resolve a coefficient's (min, max) range over the trading window."""
    if callable(value):
        if rng is None:
            raise ConfigError(
                f"{name} is time-varying: an explicit (min, max) range "
                "is required"
            )
        return (float(rng[0]), float(rng[1]))
    v = float(value)
    return (v, v)


@dataclass
class MarketCoefficients:
    """Coefficients of the price model plus the jump measure.

    Parameters
    ----------
    lam : float
        Mean-reversion speed (>= 0).
    b, sigma, psi : float or callable
        Drift, Brownian scale and jump impact scale; constants or functions
        of time.  Time-varying coefficients need explicit ranges.
    measure : JumpMeasure
    compensated : bool
        Interpretation of ``b`` (see module docstring).
    sigma_range, psi_range : (float, float), optional
        Bounds over the trading window for time-varying coefficients.
    b_dot, sigma_dot, psi_dot : callable, optional
        Time derivatives, used by the analytic time-derivative of the
        optimal reward; finite differences are used when absent.
    """

    lam: float
    b: object
    sigma: object
    psi: object
    measure: JumpMeasure
    compensated: bool = True
    sigma_range: tuple = None
    psi_range: tuple = None
    b_dot: object = None
    sigma_dot: object = None
    psi_dot: object = None
    _j1: float = field(init=False, repr=False, default=0.0)
    _j2: float = field(init=False, repr=False, default=0.0)

    def __post_init__(self):
        if self.lam < 0.0 or not math.isfinite(self.lam):
            raise ConfigError(f"mean reversion must be finite and >= 0, "
                              f"got {self.lam}")
        if not isinstance(self.measure, JumpMeasure):
            raise ConfigError("measure must be a JumpMeasure")
        self.sigma_range = _as_range(self.sigma, self.sigma_range, "sigma")
        self.psi_range = _as_range(self.psi, self.psi_range, "psi")
        if self.sigma_range[0] < 0.0:
            raise ConfigError("sigma must be >= 0")
        if self.psi_range[0] < 0.0:
            raise ConfigError("psi must be >= 0")
        j2 = self.measure.moment(2)
        if not math.isfinite(j2):
            raise ConfigError(
                "the jump measure must have a finite second moment"
            )
        self._j2 = j2
        if self.measure.rate > 0.0:
            j1 = self.measure.moment(1) if self.compensated else \
                self.measure.abs_moment(1)
            if not math.isfinite(j1):
                raise ConfigError(
                    "the jump measure must have a finite first moment"
                )
            self._j1 = self.measure.moment(1)
        else:
            self._j1 = 0.0

    # -- pointwise coefficient access -------------------------------------

    def b_at(self, t):
        return float(self.b(t)) if callable(self.b) else float(self.b)

    def sigma_at(self, t):
        return float(self.sigma(t)) if callable(self.sigma) else float(self.sigma)

    def psi_at(self, t):
        return float(self.psi(t)) if callable(self.psi) else float(self.psi)

    def _dot(self, fn, explicit, t, h=1e-6):
        if explicit is not None:
            return float(explicit(t))
        if not callable(fn):
            return 0.0
        return (fn(t + h) - fn(t - h)) / (2.0 * h)

    def b_dot_at(self, t):
        return self._dot(self.b, self.b_dot, t)

    def sigma_dot_at(self, t):
        return self._dot(self.sigma, self.sigma_dot, t)

    def psi_dot_at(self, t):
        return self._dot(self.psi, self.psi_dot, t)

    @property
    def is_constant(self):
        return not (callable(self.b) or callable(self.sigma)
                    or callable(self.psi))

    @property
    def jump_mean_flow(self):
        """∫ y nu(dy), the mean jump flow per unit impact."""
        return self._j1

    @property
    def jump_second_moment(self):
        """∫ y^2 nu(dy)."""
        return self._j2

    def foc_drift(self, t):
        """Drift of the mean price dynamics (and of the first-order
        condition): b(t) itself when compensated, otherwise b(t) plus the
        jump mean flow."""
        d = self.b_at(t)
        if not self.compensated:
            d += self.psi_at(t) * self._j1
        return d

    def admissible(self):
        """Admissible fraction set under the worst-case impact scale."""
        return admissible_set(self.measure, self.psi_range[1])

    def validate_interval(self, pi_min, pi_max):
        """Check [pi_min, pi_max] is a valid fraction interval; return the
        admissible set and the distance to its finite open endpoints."""
        if not (pi_min < pi_max):
            raise AdmissibilityError(
                f"need pi_min < pi_max, got [{pi_min}, {pi_max}]"
            )
        if not (pi_min <= 0.0 <= pi_max):
            raise AdmissibilityError(
                f"the fraction interval must contain 0, got "
                f"[{pi_min}, {pi_max}]"
            )
        adm = self.admissible()
        if not adm.contains_interval(pi_min, pi_max):
            raise AdmissibilityError(
                f"[{pi_min}, {pi_max}] is not inside the admissible set "
                f"({adm.lo}, {adm.hi}) for case {adm.case.value}"
            )
        return adm, adm.boundary_distance(pi_min, pi_max)

    # -- simulation support ------------------------------------------------

    def step_arrays(self, times):
        """Left-node coefficient arrays (b, sigma, psi, compensator flow)
        for the steps of a time grid."""
        lefts = np.asarray(times, dtype=np.float64)[:-1]
        b = np.array([self.b_at(u) for u in lefts])
        sg = np.array([self.sigma_at(u) for u in lefts])
        ps = np.array([self.psi_at(u) for u in lefts])
        comp = ps * self._j1 if self.compensated else np.zeros_like(ps)
        return b, sg, ps, comp


def analytic_mean(market, t, s, T):
    """E[S(T) | S(t) = s], exactly (quadrature for time-varying drift)."""
    if T < t:
        raise DomainError(f"need T >= t, got t={t}, T={T}")
    lam = market.lam
    tau = T - t
    decay = math.exp(-lam * tau)
    if market.is_constant:
        d = market.foc_drift(t)
        flow = d * (-math.expm1(-lam * tau)) / lam if lam > 0 else d * tau
        return s * decay + flow
    return s * decay + _quad(
        lambda v: math.exp(-lam * (T - v)) * market.foc_drift(v), t, T
    )


def analytic_variance(market, t, T):
    """Var[S(T) | S(t)], exactly (quadrature for time-varying coefficients)."""
    if T < t:
        raise DomainError(f"need T >= t, got t={t}, T={T}")
    lam = market.lam
    tau = T - t
    j2 = market.jump_second_moment
    if market.is_constant:
        r = market.sigma_at(t) ** 2 + market.psi_at(t) ** 2 * j2
        if lam > 0:
            return r * (-math.expm1(-2.0 * lam * tau)) / (2.0 * lam)
        return r * tau
    return _quad(
        lambda v: math.exp(-2.0 * lam * (T - v))
        * (market.sigma_at(v) ** 2 + market.psi_at(v) ** 2 * j2),
        t,
        T,
    )


@dataclass
class SimConfig:
    """Monte Carlo run configuration.

    ``path_offset`` shifts the path identifiers, so a run can be split into
    consecutive batches ([0, k), [k, n), ...) that reproduce exactly the
    paths of one big batch — results are independent of the batching.
    """

    n_paths: int = 10_000
    n_steps: int = 96
    seed: int = 20120808
    path_offset: int = 0

    def __post_init__(self):
        if self.n_paths <= 0 or self.n_steps <= 0:
            raise ConfigError("n_paths and n_steps must be positive")


def build_sim_inputs(market, t, T, config, times=None):
    """Time grid, per-step coefficient arrays, Poisson CDF table and jump
    sampler code for a simulation run.

    ``times`` overrides the uniform grid (e.g. to place a node exactly at
    an intermediate conditioning time); it must start at ``t`` and end at
    ``T``.
    """
    if not T > t:
        raise DomainError(f"need T > t, got t={t}, T={T}")
    if times is None:
        times = np.linspace(t, T, config.n_steps + 1)
    else:
        times = np.asarray(times, dtype=np.float64)
    n_steps = times.shape[0] - 1
    b, sg, ps, comp = market.step_arrays(times)
    rate = market.measure.rate
    if not math.isfinite(rate):
        raise CaseError("path simulation needs a finite-activity measure")
    kind, p0, p1 = market.measure.sampler_code()
    rows = [
        _rng.poisson_cdf_table(rate * (times[k + 1] - times[k]))
        for k in range(n_steps)
    ]
    width = max(len(r) for r in rows)
    cdf = np.full((n_steps, width + 1), 2.0)
    for k, r in enumerate(rows):
        cdf[k, : len(r)] = r
    return times, b, sg, ps, comp, cdf, kind, p0, p1


@dataclass
class PathBundle:
    """Simulated prices at the grid nodes of one run."""

    times: np.ndarray
    prices: np.ndarray
    seed: int
    path_offset: int = 0

    @property
    def n_paths(self):
        return self.prices.shape[0]

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("# levyou path bundle\n")
            fh.write(
                f"# seed={self.seed} path_offset={self.path_offset} "
                f"n_paths={self.prices.shape[0]} "
                f"n_steps={self.prices.shape[1] - 1}\n"
            )
            fh.write("path_id,time,price\n")
            for i in range(self.prices.shape[0]):
                pid = self.path_offset + i
                for k in range(self.times.shape[0]):
                    fh.write(
                        f"{pid},{self.times[k]:.17g},{self.prices[i, k]:.17g}\n"
                    )

    @classmethod
    def from_csv(cls, path):
        seed = 0
        offset = 0
        rows = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if line.startswith("#"):
                    for tok in line[1:].split():
                        if tok.startswith("seed="):
                            seed = int(tok[5:])
                        elif tok.startswith("path_offset="):
                            offset = int(tok[12:])
                    continue
                if not line or line.startswith("path_id"):
                    continue
                pid, tv, pv = line.split(",")
                rows.append((int(pid), float(tv), float(pv)))
        if not rows:
            raise ConfigError(f"no data rows in {path}")
        ids = sorted({r[0] for r in rows})
        times = sorted({r[1] for r in rows})
        tindex = {tv: k for k, tv in enumerate(times)}
        pindex = {pid: i for i, pid in enumerate(ids)}
        prices = np.empty((len(ids), len(times)))
        for pid, tv, pv in rows:
            prices[pindex[pid], tindex[tv]] = pv
        return cls(
            times=np.array(times), prices=prices, seed=seed, path_offset=offset
        )


def simulate_paths(market, t, s, T, config, backend=None):
    """Simulate price paths; returns a :class:`PathBundle`.

    Batch-splitting invariance: running this twice with offsets 0 and k (and
    path counts k and n-k) concatenates to exactly the single-run result.
    """
    times, b, sg, ps, comp, cdf, kind, p0, p1 = build_sim_inputs(
        market, t, T, config
    )
    keys = _rng.derive_keys(
        config.seed, config.path_offset + np.arange(config.n_paths)
    )
    s0 = np.full(config.n_paths, float(s))
    kern = get_kernels(backend)
    prices = kern.price_paths(
        keys, s0, times, b, sg, ps, comp, market.lam, cdf, kind, p0, p1
    )
    return PathBundle(
        times=times, prices=prices, seed=config.seed,
        path_offset=config.path_offset,
    )
