"""Closed-form stability thresholds and the theorem-applicability classifier.

Every stability/instability constant of the catalog is exposed as an exact
rational where the inputs are integral, so sharpness identities can be
asserted without floating error.  ``classify`` maps a manifold and a
parameter value to the strongest applicable verdict, checking each
theorem's hypotheses explicitly and falling back to numerical certificates
and eigenvalue scans when no theorem applies.
"""

import math
import numbers
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .certificates import InstabilityCertificate, NotFound, SearchBudget, search_instability
from .errors import DomainError, NumericError, PreconditionError
from .geometry import (
    FiberSpec,
    Interval,
    IntervalKind,
    PowerWarping,
    WarpedProductSpec,
    theorem_318_condition,
)
from .spectrum import UnstableOn, geometric_schedule, stability_scan

__all__ = [
    "yamabe_bound",
    "convex_end_bound",
    "growth_threshold",
    "slope_stability_bound",
    "linear_lower_threshold",
    "linear_upper_threshold",
    "cone_rigidity_bound",
    "simons_cone_value",
    "catenoid_value",
    "SURFACE_NONPOSITIVE_CURVATURE_BOUND",
    "SURFACE_SUBEXPONENTIAL_BOUND",
    "surface_growth_bound",
    "h_curve",
    "VerdictStatus",
    "HypothesisCheck",
    "StabilityVerdict",
    "classify",
    "DiagramCell",
    "diagram",
    "power_spec",
]


def _exact(x) -> bool:
    return isinstance(x, (numbers.Integral, Fraction))


def yamabe_bound(n: int):
    """(n-2)/(4(n-1)): L_a is a positive multiple of the conformal operator here."""
    if n < 3:
        raise DomainError("needs n >= 3")
    return Fraction(n - 2, 4 * (n - 1))


def convex_end_bound(n: int):
    """(n-1)/(4n): above this, convex fast-opening ends are unstable."""
    if n < 3:
        raise DomainError("needs n >= 3")
    return Fraction(n - 1, 4 * n)


def growth_threshold(n: int, zeta):
    """Instability threshold for warpings of polynomial growth degree zeta > 1.

    Increasing in zeta, from the Yamabe bound (zeta -> 1) to the convex-end
    bound (zeta -> infinity).
    """
    if n < 3:
        raise DomainError("needs n >= 3")
    if zeta <= 1:
        raise DomainError("growth threshold needs zeta > 1")
    num = (n * zeta - zeta - 1) ** 2
    den = 4 * zeta * (n - 1) * (n * zeta - 2)
    if _exact(zeta):
        return Fraction(num, den)
    return num / den


def slope_stability_bound(n: int, slope: float):
    """(C^2+1)(n-2) / (4 C^2 (n-1)) for |rho'| <= C over sphere fibers."""
    if n < 3:
        raise DomainError("needs n >= 3")
    if slope < 0:
        raise DomainError("slope bound must be nonnegative")
    if slope == 0:
        return math.inf
    num = (slope**2 + 1) * (n - 2)
    den = 4 * slope**2 * (n - 1)
    if _exact(slope):
        return Fraction(num, den)
    return num / den


def linear_lower_threshold(n: int, c1):
    """(n-2) / (4(n-1)(1 - C1^-2)) for a lower linear envelope C1 > 1."""
    if n < 3:
        raise DomainError("needs n >= 3")
    if c1 <= 1:
        raise DomainError("needs C1 > 1")
    if _exact(c1):
        return Fraction(n - 2, 1) / (4 * (n - 1) * (1 - Fraction(1, c1**2)))
    return (n - 2) / (4 * (n - 1) * (1 - c1**-2))


def linear_upper_threshold(n: int, c2):
    """(n-2) / (4(n-1)(1 - C2^-2)) for an upper linear envelope C2 < 1.

    Negative: instability holds for every a below it.
    """
    if n < 3:
        raise DomainError("needs n >= 3")
    if not 0 < c2 < 1:
        raise DomainError("needs 0 < C2 < 1")
    if _exact(c2):
        return Fraction(n - 2, 1) / (4 * (n - 1) * (1 - Fraction(1, Fraction(c2) ** 2)))
    return (n - 2) / (4 * (n - 1) * (1 - c2**-2))


def cone_rigidity_bound(n: int):
    """(n-2)^2/(4(n-1)): an a-stable non-flat minimal cone needs a below this."""
    if n < 3:
        raise DomainError("needs n >= 3")
    return Fraction((n - 2) ** 2, 4 * (n - 1))


def simons_cone_value(m: int):
    """(2m-3)^2/(8(m-1)): the stability value of the Simons cone in R^{2m}."""
    if m < 2:
        raise DomainError("needs m >= 2")
    return Fraction((2 * m - 3) ** 2, 8 * (m - 1))


def catenoid_value(n: int):
    """(n-2)/n: the stability value of the n-dimensional catenoid."""
    if n < 2:
        raise DomainError("needs n >= 2")
    return Fraction(n - 2, n)


# two-dimensional constants (surfaces are otherwise out of scope)
SURFACE_NONPOSITIVE_CURVATURE_BOUND = Fraction(1, 8)
SURFACE_SUBEXPONENTIAL_BOUND = Fraction(1, 4)


def surface_growth_bound(alpha):
    """(alpha-1)/(8 alpha): surface instability bound at area growth R^{alpha+1}."""
    if alpha < 1:
        raise DomainError("needs alpha >= 1")
    if _exact(alpha):
        return Fraction(alpha - 1, 8 * alpha)
    return (alpha - 1) / (8 * alpha)


def h_curve(n: int, zeta_grid) -> list[tuple[float, float]]:
    """Tabulate the growth threshold; raises if the tabulation is not increasing."""
    zetas = [float(z) for z in zeta_grid]
    if any(z <= 1 for z in zetas):
        raise DomainError("zeta grid must lie in (1, inf)")
    if sorted(zetas) != zetas:
        zetas = sorted(zetas)
    vals = [float(growth_threshold(n, z)) for z in zetas]
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise NumericError("growth threshold failed to be increasing on the grid")
    return list(zip(zetas, vals))


class VerdictStatus(Enum):
    STABLE_BY_THEOREM = "stable_by_theorem"
    UNSTABLE_BY_THEOREM = "unstable_by_theorem"
    UNSTABLE_BY_CERTIFICATE = "unstable_by_certificate"
    UNSTABLE_BY_SPECTRUM = "unstable_by_spectrum"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class HypothesisCheck:
    condition: str
    outcome: bool | None  # None = could not be verified
    detail: str = ""


@dataclass(frozen=True)
class StabilityVerdict:
    status: VerdictStatus
    theorem: str | None = None
    certificate: InstabilityCertificate | None = None
    scan_evidence: UnstableOn | None = None
    best_lambda1: float | None = None
    best_rayleigh: float | None = None
    checks: tuple[HypothesisCheck, ...] = ()
    notes: tuple[str, ...] = ()

    @property
    def provenance(self) -> str:
        if self.status in (VerdictStatus.STABLE_BY_THEOREM, VerdictStatus.UNSTABLE_BY_THEOREM):
            return f"theorem {self.theorem}"
        if self.status is VerdictStatus.UNSTABLE_BY_CERTIFICATE:
            fam = self.certificate.family
            return f"certificate {fam['kind']} Q={self.certificate.q_value:.6g}"
        if self.status is VerdictStatus.UNSTABLE_BY_SPECTRUM:
            ev = self.scan_evidence
            return f"lambda1={ev.lam1:.6g} on [{ev.domain[0]:g},{ev.domain[1]:g}]"
        parts = []
        if self.best_lambda1 is not None:
            parts.append(f"min lambda1={self.best_lambda1:.6g}")
        if self.best_rayleigh is not None:
            parts.append(f"min Rayleigh={self.best_rayleigh:.6g}")
        return "undetermined (" + ", ".join(parts) + ")" if parts else "undetermined"


_SAMPLE_GRID = np.geomspace(1e-3, 1e6, 512)


def _sampled_slope_sup(spec: WarpedProductSpec) -> float:
    grid = _SAMPLE_GRID
    hull = spec.warping.domain_hull()
    if hull is not None:
        grid = grid[(grid >= hull[0]) & (grid <= hull[1])]
        if grid.size < 8:
            return math.inf
    return float(np.max(np.abs(spec.warping.deriv(grid))))


def _sampled_convexity(spec: WarpedProductSpec) -> bool:
    grid = _SAMPLE_GRID
    hull = spec.warping.domain_hull()
    if hull is not None:
        grid = grid[(grid >= hull[0]) & (grid <= hull[1])]
    return bool(np.all(spec.warping.deriv2(grid[grid >= 1.0]) > 0))


def classify(
    spec: WarpedProductSpec,
    a: float,
    run_numeric: bool = True,
    budget: SearchBudget | None = None,
    scan_schedule=None,
) -> StabilityVerdict:
    """Strongest applicable verdict for (manifold, a), with provenance.

    Theorems are tried in catalog order (stability first, then instability
    by strength); hypothesis checking combines closed-form knowledge of the
    built-in warping kinds with sampling up to r = 1e6.  Sampled warpings
    skip the theorem layer (their asymptotics are unknowable) and go
    straight to the numeric routes.
    """
    n = spec.n
    fiber = spec.fiber
    asym = spec.warping.asymptotics()
    checks: list[HypothesisCheck] = []
    notes: list[str] = []
    closed_form = spec.warping.is_closed_form
    if not closed_form:
        notes.append("sampled warping: theorem hypotheses unverifiable, numeric routes only")

    def verdict(status, theorem=None, **kw):
        return StabilityVerdict(status=status, theorem=theorem, checks=tuple(checks), notes=tuple(notes), **kw)

    if closed_form:
        # stability: nonnegative fiber curvature up to the Yamabe bound
        ya = float(yamabe_bound(n))
        ok = fiber.scalar_curvature >= 0 and 0 <= a <= ya
        checks.append(
            HypothesisCheck("3.1: S_F >= 0 and 0 <= a <= (n-2)/(4(n-1))", ok, f"bound={ya:.6g}")
        )
        if ok:
            return verdict(VerdictStatus.STABLE_BY_THEOREM, "3.1")

        # stability: bounded slope over round spheres
        if fiber.round_sphere_radius is not None and a >= 0:
            slope = asym.slope_bound
            sampled = False
            if slope is None and asym.slope_diverges is not True:
                slope = _sampled_slope_sup(spec)
                sampled = True
            if slope is not None and math.isfinite(slope):
                bound = float(slope_stability_bound(n, slope)) if slope > 0 else math.inf
                ok = a <= bound
                detail = f"C={slope:.6g}{' (sampled)' if sampled else ''}, bound={bound:.6g}"
                checks.append(HypothesisCheck("3.4b: |rho'| <= C and a <= slope bound", ok, detail))
                if ok and sampled:
                    notes.append("slope bound estimated by sampling, not proven")
                if ok:
                    return verdict(VerdictStatus.STABLE_BY_THEOREM, "3.4b")

        # instability: eventual convexity with diverging slope or S(F) <= 0
        ke = float(convex_end_bound(n))
        convex = asym.eventually_convex
        if convex is None:
            convex = _sampled_convexity(spec)
            if convex:
                notes.append("eventual convexity verified by sampling only")
        slope_div = asym.slope_diverges
        total_nonpos = fiber.total_scalar_curvature <= 0
        hyp = bool(convex and (slope_div or total_nonpos))
        checks.append(
            HypothesisCheck(
                "3.3/3.4: rho'' > 0 eventually and (rho' -> inf or S(F) <= 0)",
                hyp,
                f"convex={convex}, slope_diverges={slope_div}, S(F)<=0={total_nonpos}",
            )
        )
        if hyp and a > ke:
            thm = "3.3" if spec.interval.kind is IntervalKind.HALF_LINE else "3.4"
            return verdict(VerdictStatus.UNSTABLE_BY_THEOREM, thm)

        # instability: two-sided power envelope of degree alpha > 1
        if asym.power_envelope is not None:
            alpha, c1, c2 = asym.power_envelope
            if alpha > 1 and c1 > 0 and c2 >= c1:
                thr = float(growth_threshold(n, alpha))
                ok = a > thr
                checks.append(
                    HypothesisCheck(
                        "3.5: C1 r^alpha <= rho <= C2 r^alpha (alpha > 1) and a > h(n, alpha)",
                        ok,
                        f"alpha={alpha:g}, h={thr:.6g}",
                    )
                )
                if ok:
                    return verdict(VerdictStatus.UNSTABLE_BY_THEOREM, "3.5")

        # instability: bounded oscillating xi with vanishing log-ratio
        if asym.xi_bounded and a > float(yamabe_bound(n)):
            try:
                ratios = theorem_318_condition(spec, 1.0, [1e2, 1e3, 1e4, 1e5, 1e6])
                vals = [v for _, v in ratios]
                trend = all(b <= a_ for a_, b in zip(vals, vals[1:])) and vals[-1] < 0.05
            except Exception:
                trend = False
            checks.append(
                HypothesisCheck(
                    "3.7: bounded xi and log T / int r (xi'/xi)^2 -> 0",
                    trend,
                    "ratio trend sampled up to 1e6",
                )
            )
            if trend:
                notes.append("3.7 ratio trend verified numerically, not proven")
                return verdict(VerdictStatus.UNSTABLE_BY_THEOREM, "3.7")

        # instability: linear envelopes (sphere fibers)
        if asym.linear_envelope is not None and fiber.round_sphere_radius is not None:
            c1, c2 = asym.linear_envelope
            if c1 > 1:
                thr = float(linear_lower_threshold(n, c1))
                ok = a > thr
                checks.append(
                    HypothesisCheck("3.8: C1 > 1 and a > linear threshold", ok, f"C1={c1:g}, thr={thr:.6g}")
                )
                if ok:
                    return verdict(VerdictStatus.UNSTABLE_BY_THEOREM, "3.8")
            if c2 < 1:
                thr = float(linear_upper_threshold(n, c2))
                ok = a < thr
                checks.append(
                    HypothesisCheck("3.9: C2 < 1 and a < linear threshold", ok, f"C2={c2:g}, thr={thr:.6g}")
                )
                if ok:
                    return verdict(VerdictStatus.UNSTABLE_BY_THEOREM, "3.9")

    if not run_numeric:
        return verdict(VerdictStatus.UNDETERMINED)

    found = search_instability(spec, a, budget=budget or SearchBudget())
    if isinstance(found, InstabilityCertificate):
        return verdict(VerdictStatus.UNSTABLE_BY_CERTIFICATE, certificate=found)
    best_rayleigh = found.best_rayleigh if isinstance(found, NotFound) else None

    schedule = scan_schedule or geometric_schedule(1.0, max_doublings=10)
    scan = stability_scan(spec, a, schedule)
    if isinstance(scan, UnstableOn):
        return verdict(VerdictStatus.UNSTABLE_BY_SPECTRUM, scan_evidence=scan)
    return verdict(
        VerdictStatus.UNDETERMINED,
        best_lambda1=scan.min_lam1,
        best_rayleigh=best_rayleigh,
    )


@dataclass(frozen=True)
class DiagramCell:
    alpha: float
    a: float
    verdict: str  # stable | unstable | uncertain
    stable_by: tuple[str, ...]
    unstable_by: tuple[str, ...]


def diagram(n: int, a_grid, alpha_grid, fiber_radius: float = 1.0) -> list[DiagramCell]:
    """Theorem-catalog verdicts over a (power exponent, a) grid.

    Each cell of the family rho = r^alpha over the round sphere is marked
    stable / unstable / uncertain purely from the theorem catalog; numeric
    confirmation of unstable cells is a separate step.  Any cell the
    theorems do not cover is honestly marked uncertain.
    """
    ya = float(yamabe_bound(n))
    ke = float(convex_end_bound(n))
    cells = []
    for alpha in alpha_grid:
        alpha = float(alpha)
        if alpha < 1:
            raise PreconditionError("power exponents must satisfy alpha >= 1")
        h_val = float(growth_threshold(n, alpha)) if alpha > 1 else None
        slope_bound = float(slope_stability_bound(n, 1.0)) if alpha == 1 else None
        for a in a_grid:
            a = float(a)
            stable_by = []
            unstable_by = []
            if 0 <= a <= ya:
                stable_by.append("3.1")
            if alpha == 1 and 0 <= a <= slope_bound:
                stable_by.append("3.4b")
            if alpha > 1:
                if a > ke:
                    unstable_by.append("3.3")
                if h_val is not None and a > h_val:
                    unstable_by.append("3.5")
            if stable_by and unstable_by:
                raise NumericError(
                    f"catalog inconsistency at (alpha={alpha}, a={a}): {stable_by} vs {unstable_by}"
                )
            verdict = "stable" if stable_by else ("unstable" if unstable_by else "uncertain")
            cells.append(
                DiagramCell(
                    alpha=alpha,
                    a=a,
                    verdict=verdict,
                    stable_by=tuple(stable_by),
                    unstable_by=tuple(unstable_by),
                )
            )
    return cells


def power_spec(n: int, alpha: float, coefficient: float = 1.0, fiber_radius: float = 1.0) -> WarpedProductSpec:
    """Convenience builder for the diagram family rho = c r^alpha over a sphere."""
    return WarpedProductSpec(
        interval=Interval.half_line(),
        n=n,
        fiber=FiberSpec.round_sphere(n - 1, fiber_radius),
        warping=PowerWarping(coefficient, alpha),
    )
