"""Warped-product geometry: warping functions, fibers, curvature, growth.

A warped product here is an interval ``I`` (half line, full line, or a
finite segment) crossed with a compact fiber ``F`` of constant scalar
curvature, carrying the metric ``dr^2 + rho(r)^2 g_F``.  This module holds
the warping-function zoo, the manifold description, the closed-form scalar
curvature, smoothness and volume diagnostics, and the decomposition
``rho(r) = r^alpha xi(r)`` used by the growth-based stability theorems.
"""

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.interpolate import CubicSpline

from .errors import (
    DomainError,
    InsufficientDataError,
    PreconditionError,
    QuadratureError,
    SingularPointError,
)

__all__ = [
    "WarpingFunction",
    "PowerWarping",
    "PowerLogWarping",
    "SinhWarping",
    "CoshWarping",
    "LinearWarping",
    "ConstantWarping",
    "SampledWarping",
    "WarpingAsymptotics",
    "FiberSpec",
    "IntervalKind",
    "Interval",
    "WarpedProductSpec",
    "SmoothnessClass",
    "SmoothnessReport",
    "GrowthDecomposition",
    "eval_rho",
    "scalar_curvature",
    "smoothness_check",
    "volume_ball",
    "growth_exponent",
    "theorem_318_condition",
    "sphere_area",
    "log_ratio_sequence",
]

_LOG_TINY = -745.0  # exp() underflows below this


def sphere_area(dim: int, radius: float = 1.0) -> float:
    """Surface area of the round ``dim``-sphere of the given radius."""
    if dim < 1:
        raise ValueError("sphere dimension must be >= 1")
    unit = 2.0 * math.pi ** ((dim + 1) / 2.0) / math.gamma((dim + 1) / 2.0)
    return unit * radius**dim


@dataclass(frozen=True)
class WarpingAsymptotics:
    """Closed-form knowledge about a warping's behaviour as r -> infinity.

    ``None`` means "unknown from closed form"; the classifier then falls
    back to sampling and flags the check as unverified.
    """

    power_envelope: tuple[float, float, float] | None = None  # (alpha, C1, C2), r >= 1
    eventually_convex: bool | None = None  # rho'' > 0 for all large r
    slope_diverges: bool | None = None  # rho' -> infinity
    slope_bound: float | None = None  # sup_r |rho'| when finite
    linear_envelope: tuple[float, float] | None = None  # C1 r <= rho <= C2 r, r >= 1
    xi_bounded: bool | None = None  # xi = rho r^-alpha bounded above and below


class WarpingFunction:
    """Base class for warping functions rho(r).

    Subclasses provide plain evaluations ``value``/``deriv``/``deriv2`` and
    the overflow-safe ratios ``log_value`` (log rho), ``dlog`` (rho'/rho)
    and ``ratio2`` (rho''/rho) used when supports span many decades.
    All evaluations broadcast over numpy arrays.
    """

    kind: str = "abstract"
    is_closed_form: bool = True

    def value(self, r):
        raise NotImplementedError

    def deriv(self, r):
        raise NotImplementedError

    def deriv2(self, r):
        raise NotImplementedError

    def log_value(self, r):
        rho = self.value(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(rho)

    def dlog(self, r):
        return self.deriv(r) / self.value(r)

    def ratio2(self, r):
        return self.deriv2(r) / self.value(r)

    def asymptotics(self) -> WarpingAsymptotics:
        return WarpingAsymptotics()

    def domain_hull(self) -> tuple[float, float] | None:
        """Closed interval outside which evaluation is undefined (sampled only)."""
        return None

    def params(self) -> dict:
        raise NotImplementedError

    def describe(self) -> str:
        items = ", ".join(f"{k}={v}" for k, v in self.params().items() if k != "kind")
        return f"{self.kind}({items})" if items else self.kind


@dataclass(frozen=True)
class PowerWarping(WarpingFunction):
    """rho(r) = coefficient * r**exponent with coefficient > 0, exponent >= 1."""

    coefficient: float = 1.0
    exponent: float = 1.0
    kind = "power"

    def __post_init__(self):
        if self.coefficient <= 0:
            raise ValueError("coefficient must be positive")
        if self.exponent < 1:
            raise ValueError("exponent must be >= 1")

    def value(self, r):
        return self.coefficient * np.power(r, self.exponent)

    def deriv(self, r):
        return self.coefficient * self.exponent * np.power(r, self.exponent - 1)

    def deriv2(self, r):
        a = self.exponent
        return self.coefficient * a * (a - 1) * np.power(r, a - 2)

    def log_value(self, r):
        with np.errstate(divide="ignore", invalid="ignore"):
            return math.log(self.coefficient) + self.exponent * np.log(r)

    def dlog(self, r):
        return self.exponent / np.asarray(r, dtype=float)

    def ratio2(self, r):
        a = self.exponent
        return a * (a - 1) / np.asarray(r, dtype=float) ** 2

    def asymptotics(self):
        a, c = self.exponent, self.coefficient
        return WarpingAsymptotics(
            power_envelope=(a, c, c),
            eventually_convex=a > 1,
            slope_diverges=a > 1,
            slope_bound=(c if a == 1 else None),
            linear_envelope=((c, c) if a == 1 else None),
            xi_bounded=True,
        )

    def params(self):
        return {"kind": self.kind, "coefficient": self.coefficient, "exponent": self.exponent}


@dataclass(frozen=True)
class PowerLogWarping(WarpingFunction):
    """rho(r) = r**exponent * log(r + e)**log_power."""

    exponent: float = 1.0
    log_power: float = 1.0
    kind = "power_log"

    def __post_init__(self):
        if self.exponent < 1:
            raise ValueError("exponent must be >= 1")

    def _pieces(self, r):
        r = np.asarray(r, dtype=float)
        s = r + math.e
        ln = np.log(s)
        return r, s, ln

    def value(self, r):
        r, _, ln = self._pieces(r)
        return np.power(r, self.exponent) * np.power(ln, self.log_power)

    def deriv(self, r):
        a, k = self.exponent, self.log_power
        r, s, ln = self._pieces(r)
        return np.power(r, a - 1) * np.power(ln, k - 1) * (a * ln + k * r / s)

    def deriv2(self, r):
        a, k = self.exponent, self.log_power
        r, s, ln = self._pieces(r)
        term = (
            a * (a - 1) * np.power(r, a - 2) * np.power(ln, k)
            + 2 * a * k * np.power(r, a - 1) * np.power(ln, k - 1) / s
            + k * (k - 1) * np.power(r, a) * np.power(ln, k - 2) / s**2
            - k * np.power(r, a) * np.power(ln, k - 1) / s**2
        )
        return term

    def log_value(self, r):
        r, _, ln = self._pieces(r)
        return self.exponent * np.log(r) + self.log_power * np.log(ln)

    def dlog(self, r):
        r, s, ln = self._pieces(r)
        return self.exponent / r + self.log_power / (s * ln)

    def ratio2(self, r):
        a, k = self.exponent, self.log_power
        r, s, ln = self._pieces(r)
        return (
            a * (a - 1) / r**2
            + 2 * a * k / (r * s * ln)
            + k * (k - 1) / (s * ln) ** 2
            - k / (s**2 * ln)
        )

    def asymptotics(self):
        a, k = self.exponent, self.log_power
        grows = a > 1 or (a == 1 and k > 0)
        return WarpingAsymptotics(
            power_envelope=None,  # log factor breaks two-sided power bounds
            eventually_convex=(True if grows else (False if k <= 0 else None)),
            slope_diverges=grows,
            slope_bound=None,
            linear_envelope=None,
            xi_bounded=(k == 0),
        )

    def params(self):
        return {"kind": self.kind, "exponent": self.exponent, "log_power": self.log_power}


@dataclass(frozen=True)
class SinhWarping(WarpingFunction):
    """rho(r) = sinh(r); positive only for r > 0."""

    kind = "sinh"

    def value(self, r):
        return np.sinh(r)

    def deriv(self, r):
        return np.cosh(r)

    def deriv2(self, r):
        return np.sinh(r)

    def log_value(self, r):
        r = np.asarray(r, dtype=float)
        # log sinh r = r + log(1 - e^{-2r}) - log 2; safe for huge r
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            small = np.log(np.sinh(np.minimum(r, 21.0)))
            return np.where(r > 20.0, r + np.log1p(-np.exp(-2 * r)) - math.log(2), small)

    def dlog(self, r):
        return 1.0 / np.tanh(r)

    def ratio2(self, r):
        return np.ones_like(np.asarray(r, dtype=float))

    def asymptotics(self):
        return WarpingAsymptotics(
            power_envelope=None,
            eventually_convex=True,
            slope_diverges=True,
            slope_bound=None,
            linear_envelope=None,
            xi_bounded=False,
        )

    def params(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class CoshWarping(WarpingFunction):
    """rho(r) = cosh(r); positive on the whole line."""

    kind = "cosh"

    def value(self, r):
        return np.cosh(r)

    def deriv(self, r):
        return np.sinh(r)

    def deriv2(self, r):
        return np.cosh(r)

    def log_value(self, r):
        r = np.asarray(r, dtype=float)
        return np.logaddexp(r, -r) - math.log(2)

    def dlog(self, r):
        return np.tanh(r)

    def ratio2(self, r):
        return np.ones_like(np.asarray(r, dtype=float))

    def asymptotics(self):
        return WarpingAsymptotics(
            power_envelope=None,
            eventually_convex=True,
            slope_diverges=True,
            slope_bound=None,
            linear_envelope=None,
            xi_bounded=False,
        )

    def params(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class LinearWarping(WarpingFunction):
    """rho(r) = slope * r + intercept."""

    slope: float = 1.0
    intercept: float = 0.0
    kind = "linear"

    def value(self, r):
        return self.slope * np.asarray(r, dtype=float) + self.intercept

    def deriv(self, r):
        return np.full_like(np.asarray(r, dtype=float), self.slope)

    def deriv2(self, r):
        return np.zeros_like(np.asarray(r, dtype=float))

    def dlog(self, r):
        return self.slope / self.value(r)

    def ratio2(self, r):
        return np.zeros_like(np.asarray(r, dtype=float))

    def asymptotics(self):
        m, q = self.slope, self.intercept
        env = None
        if m > 0 and m + q > 0:
            env = (min(m, m + q), max(m, m + q))
        return WarpingAsymptotics(
            power_envelope=((1.0, env[0], env[1]) if env else None),
            eventually_convex=False,
            slope_diverges=False,
            slope_bound=abs(m),
            linear_envelope=env,
            xi_bounded=env is not None,
        )

    def params(self):
        return {"kind": self.kind, "slope": self.slope, "intercept": self.intercept}


@dataclass(frozen=True)
class ConstantWarping(WarpingFunction):
    """rho(r) = c > 0 (cylinder over the fiber)."""

    c: float = 1.0
    kind = "constant"

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("constant warping must be positive")

    def value(self, r):
        return np.full_like(np.asarray(r, dtype=float), self.c)

    def deriv(self, r):
        return np.zeros_like(np.asarray(r, dtype=float))

    def deriv2(self, r):
        return np.zeros_like(np.asarray(r, dtype=float))

    def log_value(self, r):
        return np.full_like(np.asarray(r, dtype=float), math.log(self.c))

    def dlog(self, r):
        return np.zeros_like(np.asarray(r, dtype=float))

    def ratio2(self, r):
        return np.zeros_like(np.asarray(r, dtype=float))

    def asymptotics(self):
        return WarpingAsymptotics(
            power_envelope=(0.0, self.c, self.c),
            eventually_convex=False,
            slope_diverges=False,
            slope_bound=0.0,
            linear_envelope=None,
            xi_bounded=True,
        )

    def params(self):
        return {"kind": self.kind, "c": self.c}


class SampledWarping(WarpingFunction):
    """Warping given by samples on a strictly increasing grid.

    Derivatives come from a C^2 cubic interpolant, so second derivatives
    are noisy; hypothesis checks that need rho'' are skipped for this kind.
    """

    kind = "sampled"
    is_closed_form = False

    def __init__(self, grid, values):
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if grid.ndim != 1 or grid.size < 4:
            raise ValueError("sampled warping needs at least 4 grid points")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("sampled grid must be strictly increasing")
        if np.any(values <= 0):
            raise ValueError("sampled warping values must be positive")
        if values.shape != grid.shape:
            raise ValueError("grid and values must have the same length")
        self.grid = grid
        self.values = values
        self._spline = CubicSpline(grid, values)

    def _check(self, r):
        r = np.asarray(r, dtype=float)
        lo, hi = self.grid[0], self.grid[-1]
        if np.any(r < lo) or np.any(r > hi):
            raise DomainError(f"r outside sampled hull [{lo}, {hi}]")
        return r

    def value(self, r):
        return self._spline(self._check(r))

    def deriv(self, r):
        return self._spline(self._check(r), 1)

    def deriv2(self, r):
        return self._spline(self._check(r), 2)

    def log_value(self, r):
        rho = self.value(r)
        if np.any(rho <= 0):
            raise SingularPointError("interpolated warping is non-positive")
        return np.log(rho)

    def domain_hull(self):
        return (float(self.grid[0]), float(self.grid[-1]))

    def asymptotics(self):
        return WarpingAsymptotics()

    def params(self):
        return {"kind": self.kind, "grid": self.grid.tolist(), "values": self.values.tolist()}


@dataclass(frozen=True)
class FiberSpec:
    """Compact fiber with constant scalar curvature.

    ``dim`` is the fiber dimension (n - 1 for an n-dimensional product),
    ``scalar_curvature`` its constant scalar curvature and ``area`` its
    volume.  ``round_sphere_radius`` marks the round-sphere preset, which
    some theorems require.
    """

    dim: int
    scalar_curvature: float
    area: float
    round_sphere_radius: float | None = None

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("fiber dimension must be >= 2 (use the surface constants for n = 2)")
        if self.area <= 0:
            raise ValueError("fiber area must be positive")

    @property
    def total_scalar_curvature(self) -> float:
        return self.scalar_curvature * self.area

    @classmethod
    def round_sphere(cls, dim: int, radius: float = 1.0) -> "FiberSpec":
        """Round sphere S^dim of the given radius."""
        if radius <= 0:
            raise ValueError("sphere radius must be positive")
        s = dim * (dim - 1) / radius**2
        return cls(dim=dim, scalar_curvature=s, area=sphere_area(dim, radius), round_sphere_radius=radius)


class IntervalKind(Enum):
    HALF_LINE = "half_line"
    FULL_LINE = "full_line"
    SEGMENT = "segment"


@dataclass(frozen=True)
class Interval:
    """Base interval of the product: [0, inf), the full line, or [lo, hi]."""

    kind: IntervalKind
    lo: float = 0.0
    hi: float = math.inf

    @classmethod
    def half_line(cls):
        return cls(IntervalKind.HALF_LINE, 0.0, math.inf)

    @classmethod
    def full_line(cls):
        return cls(IntervalKind.FULL_LINE, -math.inf, math.inf)

    @classmethod
    def segment(cls, lo: float, hi: float):
        if not hi > lo:
            raise ValueError("segment needs hi > lo")
        return cls(IntervalKind.SEGMENT, lo, hi)

    def contains_interior(self, r) -> bool:
        r = np.asarray(r, dtype=float)
        if self.kind is IntervalKind.HALF_LINE:
            return bool(np.all(r > 0))
        if self.kind is IntervalKind.FULL_LINE:
            return bool(np.all(np.isfinite(r)))
        return bool(np.all((r > self.lo) & (r < self.hi)))


@dataclass(frozen=True)
class WarpedProductSpec:
    """The manifold under analysis: interval x_rho fiber with dim n."""

    interval: Interval
    n: int
    fiber: FiberSpec
    warping: WarpingFunction

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("n must be >= 3; the surface theory is exposed via its constants only")
        if self.n != self.fiber.dim + 1:
            raise ValueError("n must equal fiber.dim + 1")

    def describe(self) -> str:
        return (
            f"{self.interval.kind.value} x_rho F^{self.fiber.dim} "
            f"(n={self.n}, warping={self.warping.describe()})"
        )


class SmoothnessClass(Enum):
    SMOOTH_BOUNDARYLESS = "smooth_boundaryless"
    HAS_BOUNDARY = "has_boundary"
    SINGULAR_AT_ORIGIN = "singular_at_origin"


@dataclass(frozen=True)
class SmoothnessReport:
    kind: SmoothnessClass
    reason: str | None = None


def _check_interior(spec: WarpedProductSpec, r) -> None:
    if not spec.interval.contains_interior(r):
        raise DomainError(f"r={r} is not interior to {spec.interval.kind.value}")
    hull = spec.warping.domain_hull()
    if hull is not None:
        arr = np.asarray(r, dtype=float)
        if np.any(arr < hull[0]) or np.any(arr > hull[1]):
            raise DomainError(f"r={r} outside sampled hull {hull}")


def eval_rho(spec: WarpedProductSpec, r):
    """Evaluate (rho, rho', rho'') at interior points of the interval."""
    _check_interior(spec, r)
    w = spec.warping
    return w.value(r), w.deriv(r), w.deriv2(r)


def scalar_curvature(spec: WarpedProductSpec, r):
    """Scalar curvature of the product at radius r (constant on fibers).

    Uses the closed form S_F / rho^2 - (n-1) (2 rho''/rho + (n-2) rho'^2/rho^2),
    evaluated through overflow-safe ratios so that huge supports are fine.
    """
    _check_interior(spec, r)
    w = spec.warping
    log_rho = w.log_value(r)
    if np.any(~np.isfinite(log_rho)):
        raise SingularPointError(f"rho(r) <= 0 at r={r}")
    n = spec.n
    inv_rho2 = np.exp(-2.0 * log_rho)
    return (
        spec.fiber.scalar_curvature * inv_rho2
        - (n - 1) * (2.0 * w.ratio2(r) + (n - 2) * w.dlog(r) ** 2)
    )


_SMOOTH_TOL = 1e-9  # absolute, on rho(0) and rho'(0)


def smoothness_check(spec: WarpedProductSpec) -> SmoothnessReport:
    """Classify a half-line or full-line product as smooth / with boundary / singular."""
    kind = spec.interval.kind
    if kind is IntervalKind.SEGMENT:
        raise PreconditionError("smoothness_check applies to half-line or full-line products")
    w = spec.warping
    if kind is IntervalKind.FULL_LINE:
        hull = w.domain_hull()
        lo, hi = hull if hull else (-1e6, 1e6)
        span = max(abs(lo), abs(hi))
        pos = np.geomspace(max(span * 1e-12, 1e-12), span, 400)
        grid = np.concatenate([-pos[::-1], [0.0], pos])
        grid = grid[(grid >= lo) & (grid <= hi)]
        rho = w.value(grid)
        if np.any(rho <= 0):
            bad = float(grid[np.argmin(rho)])
            return SmoothnessReport(SmoothnessClass.SINGULAR_AT_ORIGIN, f"rho <= 0 near r={bad:.6g}")
        return SmoothnessReport(SmoothnessClass.SMOOTH_BOUNDARYLESS)

    hull = w.domain_hull()
    if hull is not None and hull[0] > 0:
        return SmoothnessReport(
            SmoothnessClass.SINGULAR_AT_ORIGIN, "sampled grid does not reach r = 0"
        )
    rho0 = float(w.value(0.0))
    if rho0 > _SMOOTH_TOL:
        return SmoothnessReport(SmoothnessClass.HAS_BOUNDARY, f"rho(0) = {rho0:.6g} > 0")
    if rho0 < -_SMOOTH_TOL:
        return SmoothnessReport(SmoothnessClass.SINGULAR_AT_ORIGIN, f"rho(0) = {rho0:.6g} < 0")
    radius = spec.fiber.round_sphere_radius
    if radius is None:
        return SmoothnessReport(
            SmoothnessClass.SINGULAR_AT_ORIGIN,
            "rho(0) = 0 but the fiber is not a round-sphere preset",
        )
    slope0 = float(w.deriv(0.0))
    if abs(slope0 - 1.0 / radius) > _SMOOTH_TOL:
        return SmoothnessReport(
            SmoothnessClass.SINGULAR_AT_ORIGIN,
            f"cone angle at origin: rho'(0) = {slope0:.6g} != 1/R = {1.0 / radius:.6g}",
        )
    return SmoothnessReport(SmoothnessClass.SMOOTH_BOUNDARYLESS)


def volume_ball(spec: WarpedProductSpec, R: float) -> float:
    """Volume of the r <= R ball: A(F) * integral_0^R rho^{n-1} dr."""
    if spec.interval.kind is not IntervalKind.HALF_LINE:
        raise PreconditionError("volume_ball is defined for half-line products")
    if not R > 0:
        raise PreconditionError("R must be positive")
    hull = spec.warping.domain_hull()
    if hull is not None and (hull[0] > 0 or hull[1] < R):
        raise DomainError(f"[0, {R}] is not inside the sampled hull {hull}")
    n = spec.n
    w = spec.warping

    def integrand(r):
        return float(np.exp((n - 1) * w.log_value(r)))

    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            val, err = quad(integrand, 0.0, R, epsabs=0.0, epsrel=1e-10, limit=200)
        except IntegrationWarning as exc:  # pragma: no cover - defensive
            raise QuadratureError(f"volume quadrature failed: {exc}") from exc
    if not math.isfinite(val):
        raise QuadratureError("volume integrand is not integrable")
    return spec.fiber.area * val


@dataclass(frozen=True)
class GrowthDecomposition:
    """Fitted decomposition rho(r) = r^alpha_hat * xi(r).

    ``alpha_hat`` is the least-squares slope of log rho against log r on a
    geometric grid; ``xi_samples`` tabulates xi on that grid.  xi and its
    logarithmic derivative are evaluated through the warping so that the
    decomposition stays consistent for certificate construction.
    """

    alpha_hat: float
    xi_samples: tuple[tuple[float, float], ...]
    warping: WarpingFunction = field(repr=False)

    def log_xi(self, r):
        return self.warping.log_value(r) - self.alpha_hat * np.log(r)

    def xi(self, r):
        return np.exp(self.log_xi(r))

    def dlog_xi(self, r):
        return self.warping.dlog(r) - self.alpha_hat / np.asarray(r, dtype=float)

    def xi_prime(self, r):
        return self.xi(r) * self.dlog_xi(r)

    def xi_bounds(self) -> tuple[float, float]:
        vals = np.array([x for _, x in self.xi_samples])
        return float(vals.min()), float(vals.max())


def growth_exponent(
    spec: WarpedProductSpec, r_min: float, r_max: float, num_points: int = 64
) -> GrowthDecomposition:
    """Fit the polynomial growth exponent of rho on [r_min, r_max].

    alpha_hat is the OLS slope of log rho vs log r over a geometric grid of
    ``num_points`` samples; xi(r) = rho(r) r^{-alpha_hat}.
    """
    if not (r_max > r_min >= 1.0):
        raise PreconditionError("need r_max > r_min >= 1")
    if num_points < 8:
        raise InsufficientDataError("growth fit needs at least 8 grid points")
    hull = spec.warping.domain_hull()
    if hull is not None and (r_min < hull[0] or r_max > hull[1]):
        raise DomainError(f"fit window outside sampled hull {hull}")
    grid = np.geomspace(r_min, r_max, num_points)
    x = np.log(grid)
    y = np.asarray(spec.warping.log_value(grid), dtype=float)
    if np.any(~np.isfinite(y)):
        raise SingularPointError("rho <= 0 inside the fit window")
    slope, intercept = np.polyfit(x, y, 1)
    xi = np.exp(y - slope * x)
    samples = tuple((float(r), float(v)) for r, v in zip(grid, xi))
    return GrowthDecomposition(alpha_hat=float(slope), xi_samples=samples, warping=spec.warping)


def log_ratio_sequence(dlog_xi, r0: float, t_grid) -> list[tuple[float, float]]:
    """Ratios log T / integral_{r0}^T r (xi'/xi)^2 dr for T in t_grid.

    ``dlog_xi`` is a callable for xi'/xi.  A vanishing denominator is
    reported as +inf.  Shared by the spec-level operation and by tests with
    analytic xi.
    """
    ts = sorted(float(t) for t in t_grid)
    if not ts or ts[0] <= r0:
        raise PreconditionError("T grid must lie above R0")

    def integrand(r):
        return r * float(dlog_xi(r)) ** 2

    out = []
    acc = 0.0
    prev = float(r0)
    for t in ts:
        seg, _ = quad(
            lambda u: integrand(math.exp(u)) * math.exp(u),
            math.log(prev),
            math.log(t),
            epsabs=1e-14,
            epsrel=1e-10,
            limit=200,
        )
        acc += seg
        prev = t
        ratio = math.inf if acc <= 1e-10 else math.log(t) / acc
        out.append((t, ratio))
    return out


def theorem_318_condition(
    spec: WarpedProductSpec,
    r0: float,
    t_grid,
    growth: GrowthDecomposition | None = None,
) -> list[tuple[float, float]]:
    """Tabulate the bounded-oscillation instability ratio for growing T.

    Returns (T, log T / integral_{r0}^T r xi^{-2} xi'^2 dr); the caller
    inspects whether the ratios trend to zero.  xi comes from
    ``growth_exponent`` fitted over [1, max T] unless a decomposition is
    supplied.
    """
    if r0 <= 0:
        raise PreconditionError("R0 must be positive")
    if growth is None:
        growth = growth_exponent(spec, 1.0, max(float(t) for t in t_grid))
    return log_ratio_sequence(growth.dlog_xi, r0, t_grid)
