"""Jump measures and the integral transforms the optimizer needs.

A jump measure nu is represented through its Lévy density (mass
``rate = nu(R)`` may be infinite).  Four integral transforms of nu appear
throughout the first-order analysis of the log-utility objective; writing
x = pi * psi * y:

``drag_integral``      I(pi)  = ∫ pi psi^2 y^2 / (1 + x) nu(dy)
``log_penalty_integral``P(pi) = ∫ [log(1 + x) - x] nu(dy)
``curvature_integral`` C(pi)  = ∫ psi^2 y^2 / (1 + x)^2 nu(dy)
``tilted_second_moment``T(pi) = ∫ y^2 / (1 + x) nu(dy)

They are related by I = pi psi^2 T and C = dI/dpi, and all require the
fraction to be admissible (1 + x > 0 on the support of nu).

Every transform is computed by adaptive quadrature on the density; for
densities with a non-integrable singularity at the origin the small-jump
region is handled by a second-order Taylor expansion with an explicit
remainder bound, shrinking the region until the bound is negligible.

For Pareto jump sizes the drag admits a closed form in terms of the Gauss
hypergeometric function (``pareto_drag_closed_form``); it is deliberately
kept separate from ``drag_integral`` so the two routes stay independent
cross-checks of each other.
"""

import math

import numpy as np
from scipy.integrate import quad

from . import _rng
from .errors import (
    AdmissibilityError,
    CaseError,
    DomainError,
    QuadratureError,
)
from .hyp2f1 import hyp2f1

QUAD_EPSABS = 1e-12
QUAD_EPSREL = 1e-10
QUAD_LIMIT = 200

#: Target accuracy of the small-jump Taylor remainder, relative to the
#: integral being assembled.
TAYLOR_EPSREL = 1e-11
TAYLOR_EPSABS = 1e-13


def log1p_minus(x):
    """log(1 + x) - x, accurate for small |x| where the direct form cancels."""
    x = np.asarray(x, dtype=np.float64)
    small = np.abs(x) < 1e-3
    xs = np.where(small, x, 0.0)
    series = xs * xs * (
        -0.5
        + xs * (1.0 / 3.0 + xs * (-0.25 + xs * (0.2 + xs * (-1.0 / 6.0 + xs / 7.0))))
    )
    with np.errstate(invalid="ignore", divide="ignore"):
        direct = np.log1p(np.where(small, 0.0, x)) - np.where(small, 0.0, x)
    out = np.where(small, series, direct)
    return float(out) if out.ndim == 0 else out


def _quad(fn, lo, hi):
    """scipy.integrate.quad with this package's tolerances and error policy."""
    res = quad(
        fn,
        lo,
        hi,
        epsabs=QUAD_EPSABS,
        epsrel=QUAD_EPSREL,
        limit=QUAD_LIMIT,
        full_output=1,
    )
    if len(res) > 3:
        raise QuadratureError(
            f"quadrature on ({lo}, {hi}) failed: {res[3].strip()}"
        )
    return res[0]


class JumpMeasure:
    """Base class: a Lévy measure given through its density.

    Subclasses provide ``density``, ``support`` and (when available)
    analytic moments, sampling codes and fast transform routes.

    Parameters
    ----------
    rate : float
        Total mass of the measure (``math.inf`` for infinite activity).
    singular : bool
        Whether the density is non-integrable at the origin.
    """

    def __init__(self, rate, singular=False):
        self.rate = float(rate)
        self._singular = bool(singular)

    # -- interface -------------------------------------------------------

    def density(self, y):
        raise NotImplementedError

    def support(self):
        """(m, M): infimum and supremum of the support (may be infinite)."""
        raise NotImplementedError

    @property
    def is_finite_activity(self):
        return math.isfinite(self.rate)

    def sampler_code(self):
        """(kind, p0, p1) coding the size distribution for the simulators."""
        raise CaseError(
            f"{type(self).__name__} does not support path simulation"
        )

    # -- moments ---------------------------------------------------------

    def moment(self, k):
        """∫ y^k nu(dy); returns math.inf when divergent."""
        return self._moment_by_quadrature(k, absolute=False)

    def abs_moment(self, k):
        """∫ |y|^k nu(dy); returns math.inf when divergent."""
        return self._moment_by_quadrature(k, absolute=True)

    def _moment_by_quadrature(self, k, absolute):
        m, big = self.support()
        pieces = []
        if m < 0.0:
            fn = (lambda y: abs(y) ** k * self.density(y)) if absolute else (
                lambda y: y**k * self.density(y)
            )
            pieces.append(_quad(fn, m, min(big, 0.0)))
        if big > 0.0:
            fn = lambda y: y**k * self.density(y)
            pieces.append(_quad(fn, max(m, 0.0), big))
        return sum(pieces)

    @property
    def mean_size(self):
        """Mean of the size distribution (finite-activity measures only)."""
        if not self.is_finite_activity:
            raise CaseError("mean jump size needs a finite-activity measure")
        if self.rate == 0.0:
            raise CaseError("mean jump size undefined for a zero measure")
        return self.moment(1) / self.rate

    @property
    def size_second_moment(self):
        if not self.is_finite_activity or self.rate == 0.0:
            raise CaseError("size moments need a finite-activity measure")
        return self.moment(2) / self.rate

    @property
    def size_std(self):
        m2 = self.size_second_moment
        mu = self.mean_size
        return math.sqrt(max(m2 - mu * mu, 0.0))

    # -- admissibility ----------------------------------------------------

    def admissible(self, pi, psi=1.0):
        """True when 1 + pi*psi*y > 0 on the whole support."""
        m, big = self.support()
        if self.rate == 0.0:
            return True
        x = pi * psi
        if math.isinf(big):
            if x < 0.0:
                return False
        elif big != 0.0 and 1.0 + x * big <= 0.0:
            return False
        if math.isinf(m):
            if x > 0.0:
                return False
        elif m != 0.0 and 1.0 + x * m <= 0.0:
            return False
        return True

    def _require_admissible(self, pi, psi):
        if not self.admissible(pi, psi):
            raise AdmissibilityError(
                f"fraction {pi} with impact {psi} leaves 1 + pi*psi*y > 0 "
                f"on support {self.support()}"
            )

    # -- structure integrals ----------------------------------------------

    def drag_integral(self, pi, psi=1.0):
        """∫ pi psi^2 y^2/(1 + pi psi y) nu(dy) by quadrature."""
        self._require_admissible(pi, psi)
        if pi == 0.0 or psi == 0.0 or self.rate == 0.0:
            return 0.0
        x = pi * psi

        def g(y):
            return pi * psi * psi * y * y / (1.0 + x * y)

        taylor = (pi * psi * psi, -(pi * pi) * psi**3,
                  2.0 * abs(pi) ** 3 * psi**4)
        return self._integrate(g, taylor, x)

    def log_penalty_integral(self, pi, psi=1.0):
        """∫ [log(1 + pi psi y) - pi psi y] nu(dy) by quadrature."""
        self._require_admissible(pi, psi)
        if pi == 0.0 or psi == 0.0 or self.rate == 0.0:
            return 0.0
        x = pi * psi

        def g(y):
            return log1p_minus(x * y)

        taylor = (-(x * x) / 2.0, x**3 / 3.0, x**4 / 2.0)
        return self._integrate(g, taylor, x)

    def curvature_integral(self, pi, psi=1.0):
        """∫ psi^2 y^2/(1 + pi psi y)^2 nu(dy) by quadrature."""
        self._require_admissible(pi, psi)
        if psi == 0.0 or self.rate == 0.0:
            return 0.0
        x = pi * psi

        def g(y):
            d = 1.0 + x * y
            return psi * psi * y * y / (d * d)

        taylor = (psi * psi, -2.0 * pi * psi**3, 24.0 * pi * pi * psi**4)
        return self._integrate(g, taylor, x)

    def tilted_second_moment(self, pi, psi=1.0):
        """∫ y^2/(1 + pi psi y) nu(dy) by quadrature."""
        self._require_admissible(pi, psi)
        if self.rate == 0.0:
            return 0.0
        x = pi * psi

        def g(y):
            return y * y / (1.0 + x * y)

        taylor = (1.0, -x, 2.0 * x * x)
        return self._integrate(g, taylor, x)

    def _integrate(self, g, taylor, x):
        """Integrate ``g`` against the density over the support.

        ``taylor = (g2, g3, r4)`` gives g(y) = g2 y^2 + g3 y^3 + R(y) with
        |R(y)| <= r4 y^4 valid while |x y| <= 1/2; it is used on a shrinking
        neighborhood of the origin when the density is singular there.
        """
        m, big = self.support()
        fn = lambda y: g(y) * self.density(y)
        if not self._singular:
            if m < 0.0 < big:
                return math.fsum([_quad(fn, m, 0.0), _quad(fn, 0.0, big)])
            return _quad(fn, m, big)
        return self._integrate_singular(fn, taylor, x, m, big)

    def _integrate_singular(self, fn, taylor, x, m, big):
        g2, g3, r4 = taylor
        eps0 = min(1.0, 0.5 / (abs(x) + 1e-300))
        if math.isfinite(big):
            eps0 = min(eps0, big / 2.0) if big > 0 else eps0
        if math.isfinite(m) and m < 0:
            eps0 = min(eps0, -m / 2.0)
        eps = eps0
        for _ in range(60):
            lo_edge = max(m, -eps)
            hi_edge = min(big, eps)
            m2 = m3 = m4 = 0.0
            if hi_edge > 0.0:
                m2 += _quad(lambda y: y * y * self.density(y), 0.0, hi_edge)
                m3 += _quad(lambda y: y**3 * self.density(y), 0.0, hi_edge)
                m4 += _quad(lambda y: y**4 * self.density(y), 0.0, hi_edge)
            if lo_edge < 0.0:
                m2 += _quad(lambda y: y * y * self.density(y), lo_edge, 0.0)
                m3 += _quad(lambda y: y**3 * self.density(y), lo_edge, 0.0)
                m4 += _quad(lambda y: abs(y) ** 4 * self.density(y), lo_edge, 0.0)
            outer = 0.0
            if hi_edge < big:
                outer += _quad(fn, hi_edge, big)
            if lo_edge > m:
                outer += _quad(fn, m, lo_edge)
            total = outer + g2 * m2 + g3 * m3
            bound = r4 * m4
            if bound <= max(TAYLOR_EPSABS, TAYLOR_EPSREL * abs(total)):
                return total
            eps /= 2.0
        raise QuadratureError(
            "small-jump Taylor region failed to reach the remainder target"
        )

    # -- fast routes used by the optimizer --------------------------------

    def drag(self, pi, psi=1.0):
        """Drag transform; subclasses may override with a closed form.

        Accepts scalar or ndarray ``pi``; the default implementation loops
        over the quadrature route.
        """
        pi_arr = np.asarray(pi, dtype=np.float64)
        if pi_arr.ndim == 0:
            return self.drag_integral(float(pi_arr), psi)
        return np.array([self.drag_integral(p, psi) for p in pi_arr])

    def curvature(self, pi, psi=1.0):
        """d(drag)/d(pi); subclasses may override with a closed form."""
        pi_arr = np.asarray(pi, dtype=np.float64)
        if pi_arr.ndim == 0:
            return self.curvature_integral(float(pi_arr), psi)
        return np.array([self.curvature_integral(p, psi) for p in pi_arr])

    def log_penalty(self, pi, psi=1.0):
        """Log penalty transform, ndarray-capable wrapper."""
        pi_arr = np.asarray(pi, dtype=np.float64)
        if pi_arr.ndim == 0:
            return self.log_penalty_integral(float(pi_arr), psi)
        return np.array([self.log_penalty_integral(p, psi) for p in pi_arr])


class NoJumps(JumpMeasure):
    """The zero measure: a purely continuous price."""

    def __init__(self):
        super().__init__(rate=0.0)

    def __repr__(self):
        return "NoJumps()"

    def density(self, y):
        return 0.0

    def support(self):
        return (0.0, 0.0)

    def sampler_code(self):
        return (_rng.SIZE_NONE, 0.0, 0.0)

    def moment(self, k):
        return 0.0

    def abs_moment(self, k):
        return 0.0

    def drag_integral(self, pi, psi=1.0):
        return 0.0

    def log_penalty_integral(self, pi, psi=1.0):
        return 0.0

    def curvature_integral(self, pi, psi=1.0):
        return 0.0

    def tilted_second_moment(self, pi, psi=1.0):
        return 0.0

    def drag(self, pi, psi=1.0):
        pi_arr = np.asarray(pi, dtype=np.float64)
        return 0.0 if pi_arr.ndim == 0 else np.zeros_like(pi_arr)

    def curvature(self, pi, psi=1.0):
        pi_arr = np.asarray(pi, dtype=np.float64)
        return 0.0 if pi_arr.ndim == 0 else np.zeros_like(pi_arr)

    def log_penalty(self, pi, psi=1.0):
        pi_arr = np.asarray(pi, dtype=np.float64)
        return 0.0 if pi_arr.ndim == 0 else np.zeros_like(pi_arr)


class CompoundPoisson(JumpMeasure):
    """Finite-activity measure nu = rate * (size distribution).

    Parameters
    ----------
    rate : float
        Jump intensity (mass of nu).
    size_density : callable
        Probability density of the jump size distribution.
    support : (float, float)
        Support of the size distribution.
    sampler : tuple, optional
        ``(kind, p0, p1)`` size-sampling code understood by the kernels;
        without it the measure cannot be simulated.
    """

    def __init__(self, rate, size_density, support, sampler=None):
        if not (rate >= 0.0 and math.isfinite(rate)):
            raise DomainError(f"jump rate must be finite and >= 0, got {rate}")
        super().__init__(rate=rate)
        self._size_density = size_density
        self._support = (float(support[0]), float(support[1]))
        self._sampler = sampler

    def density(self, y):
        m, big = self._support
        if y < m or y > big:
            return 0.0
        return self.rate * self._size_density(y)

    def support(self):
        return self._support

    def sampler_code(self):
        if self._sampler is None:
            return super().sampler_code()
        return self._sampler


class ParetoJump(CompoundPoisson):
    """Pareto(alpha, scale) jump sizes arriving at a Poisson rate.

    The size density is alpha * scale**alpha / y**(alpha+1) on
    [scale, infinity).  Moments of order k >= alpha are infinite.
    """

    def __init__(self, alpha, scale, rate):
        if alpha <= 1.0:
            raise DomainError(f"Pareto alpha must exceed 1, got {alpha}")
        if scale <= 0.0:
            raise DomainError(f"Pareto scale must be positive, got {scale}")
        self.alpha = float(alpha)
        self.scale = float(scale)
        super().__init__(
            rate=rate,
            size_density=self._pdf,
            support=(scale, math.inf),
            sampler=(_rng.SIZE_PARETO, float(scale), float(alpha)),
        )

    def __repr__(self):
        return (f"ParetoJump(alpha={self.alpha:.10g}, "
                f"scale={self.scale:.10g}, rate={self.rate:.10g})")

    def _pdf(self, y):
        a, z0 = self.alpha, self.scale
        return a * z0**a / y ** (a + 1.0)

    def moment(self, k):
        if k >= self.alpha:
            return math.inf
        return self.rate * self.alpha * self.scale**k / (self.alpha - k)

    def abs_moment(self, k):
        return self.moment(k)

    def drag(self, pi, psi=1.0):
        return pareto_drag_closed_form(pi, self, psi)

    def curvature(self, pi, psi=1.0):
        return pareto_curvature_closed_form(pi, self, psi)


class UniformJump(CompoundPoisson):
    """Uniform(lo, hi) jump sizes arriving at a Poisson rate."""

    def __init__(self, lo, hi, rate):
        if not lo < hi:
            raise DomainError(f"need lo < hi, got [{lo}, {hi}]")
        self.lo = float(lo)
        self.hi = float(hi)
        super().__init__(
            rate=rate,
            size_density=lambda y: 1.0 / (hi - lo),
            support=(lo, hi),
            sampler=(_rng.SIZE_UNIFORM, float(lo), float(hi)),
        )

    def __repr__(self):
        return (f"UniformJump(lo={self.lo:.10g}, hi={self.hi:.10g}, "
                f"rate={self.rate:.10g})")

    def moment(self, k):
        lo, hi = self.lo, self.hi
        return self.rate * (hi ** (k + 1) - lo ** (k + 1)) / ((k + 1) * (hi - lo))

    def abs_moment(self, k):
        lo, hi = self.lo, self.hi
        if lo >= 0.0:
            return self.moment(k)
        if hi <= 0.0:
            return (-1.0) ** k * self.moment(k) if k % 2 else self.moment(k)
        return (
            self.rate
            * (hi ** (k + 1) + abs(lo) ** (k + 1))
            / ((k + 1) * (hi - lo))
        )


class ConstantJump(JumpMeasure):
    """Every jump has the same fixed size, arriving at a Poisson rate.

    The size distribution is a point mass, so all transforms are exact
    closed forms, the size standard deviation is zero, and the mean-size
    linearization of the optimizer is exact.
    """

    def __init__(self, size, rate):
        if size == 0.0 or not math.isfinite(size):
            raise DomainError(
                f"jump size must be finite and nonzero, got {size}"
            )
        if not (rate >= 0.0 and math.isfinite(rate)):
            raise DomainError(f"jump rate must be finite and >= 0, got {rate}")
        super().__init__(rate=rate)
        self.size = float(size)

    def __repr__(self):
        return f"ConstantJump(size={self.size:.10g}, rate={self.rate:.10g})"

    def density(self, y):
        raise DomainError("a point-mass size distribution has no density")

    def support(self):
        return (self.size, self.size)

    def sampler_code(self):
        return (_rng.SIZE_CONSTANT, self.size, 0.0)

    def moment(self, k):
        return self.rate * self.size**k

    def abs_moment(self, k):
        return self.rate * abs(self.size) ** k

    def drag_integral(self, pi, psi=1.0):
        self._require_admissible(pi, psi)
        y = self.size
        return self.rate * pi * psi * psi * y * y / (1.0 + pi * psi * y)

    def curvature_integral(self, pi, psi=1.0):
        self._require_admissible(pi, psi)
        y = self.size
        return self.rate * psi * psi * y * y / (1.0 + pi * psi * y) ** 2

    def log_penalty_integral(self, pi, psi=1.0):
        self._require_admissible(pi, psi)
        return self.rate * log1p_minus(pi * psi * self.size)

    def tilted_second_moment(self, pi, psi=1.0):
        self._require_admissible(pi, psi)
        y = self.size
        return self.rate * y * y / (1.0 + pi * psi * y)

    def drag(self, pi, psi=1.0):
        pi_arr = np.asarray(pi, dtype=np.float64)
        y = self.size
        out = self.rate * pi_arr * psi * psi * y * y / (1.0 + pi_arr * psi * y)
        return float(out) if pi_arr.ndim == 0 else out

    def curvature(self, pi, psi=1.0):
        pi_arr = np.asarray(pi, dtype=np.float64)
        y = self.size
        out = (
            self.rate * psi * psi * y * y / (1.0 + pi_arr * psi * y) ** 2
        )
        return float(out) if pi_arr.ndim == 0 else out


class LevyDensity(JumpMeasure):
    """General (possibly infinite-activity) measure from a Lévy density.

    Parameters
    ----------
    density : callable
        Lévy density, evaluated pointwise away from the origin.
    support : (float, float)
        Support interval.
    small_order : float
        Exponent beta in [0, 2) with density ~ |y|**(-1-beta) near the
        origin; moments of order <= beta are reported as infinite.
    """

    def __init__(self, density, support, small_order):
        super().__init__(rate=math.inf, singular=True)
        if small_order < 0.0:
            raise DomainError(
                "LevyDensity is for origin-singular densities; use "
                "CompoundPoisson for finite activity"
            )
        if small_order >= 2.0:
            raise DomainError(
                "small-jump order must be < 2 for a square-integrable measure"
            )
        self._density = density
        self._support = (float(support[0]), float(support[1]))
        self.small_order = float(small_order)

    def density(self, y):
        m, big = self._support
        if y < m or y > big:
            return 0.0
        return self._density(y)

    def support(self):
        return self._support

    def moment(self, k):
        if k <= self.small_order:
            return math.inf
        return super().moment(k)

    def abs_moment(self, k):
        if k <= self.small_order:
            return math.inf
        return super().abs_moment(k)


def pareto_drag_closed_form(pi, measure, psi=1.0):
    """Drag transform of a Pareto measure via the hypergeometric closed form.

    For sizes Pareto(alpha, z0) at rate eta the drag equals
    psi * eta * mu_F * 2F1(1, alpha - 1; alpha; -1/(pi * psi * z0)) for
    pi > 0 (mu_F is the mean jump size), and 0 at pi = 0; negative
    fractions are inadmissible for this measure.

    ``pi`` may be a scalar or ndarray.
    """
    if not isinstance(measure, ParetoJump):
        raise CaseError("closed-form drag is specific to Pareto jump sizes")
    if psi < 0.0:
        raise DomainError(f"impact scale must be >= 0, got {psi}")
    pi_arr = np.asarray(pi, dtype=np.float64)
    scalar = pi_arr.ndim == 0
    pi_arr = np.atleast_1d(pi_arr)
    if np.any(pi_arr < 0.0):
        raise AdmissibilityError(
            "negative fractions are not admissible for unbounded positive jumps"
        )
    a, z0 = measure.alpha, measure.scale
    mu_f = measure.mean_size
    out = np.zeros_like(pi_arr)
    pos = pi_arr > 0.0
    if psi > 0.0 and np.any(pos):
        z = -1.0 / (pi_arr[pos] * psi * z0)
        out[pos] = psi * measure.rate * mu_f * hyp2f1(1.0, a - 1.0, a, z)
    return float(out[0]) if scalar else out


def pareto_curvature_closed_form(pi, measure, psi=1.0):
    """d(drag)/d(pi) for a Pareto measure, via the hypergeometric form."""
    if not isinstance(measure, ParetoJump):
        raise CaseError("closed-form curvature is specific to Pareto jumps")
    if psi < 0.0:
        raise DomainError(f"impact scale must be >= 0, got {psi}")
    pi_arr = np.asarray(pi, dtype=np.float64)
    scalar = pi_arr.ndim == 0
    pi_arr = np.atleast_1d(pi_arr)
    if np.any(pi_arr < 0.0):
        raise AdmissibilityError(
            "negative fractions are not admissible for unbounded positive jumps"
        )
    a, z0 = measure.alpha, measure.scale
    mu_f = measure.mean_size
    out = np.empty_like(pi_arr)
    pos = pi_arr > 0.0
    out[~pos] = psi * psi * measure.moment(2)
    if psi > 0.0 and np.any(pos):
        p = pi_arr[pos]
        z = -1.0 / (p * psi * z0)
        out[pos] = (
            measure.rate
            * mu_f
            * (a - 1.0)
            / (a * z0)
            * hyp2f1(2.0, a, a + 1.0, z)
            / (p * p)
        )
    elif psi == 0.0:
        out[:] = 0.0
    return float(out[0]) if scalar else out
