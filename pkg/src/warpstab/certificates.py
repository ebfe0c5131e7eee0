"""Instability certificates from explicit destabilizing test functions.

Two families of compactly supported radial functions are built in closed
form: a square-root-over-rho profile between two radii tied together by
rho(T) = 2 rho(R) (effective against convex, fast-growing warpings), and a
power-law profile spread over [R, R^beta] (effective against polynomial
growth).  A single function with a negative quadratic form certifies
instability; the grid search over family parameters is deterministic, and
every certificate records enough data to be rebuilt and re-verified.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import FamilyInapplicableError, PreconditionError
from .geometry import GrowthDecomposition, WarpedProductSpec, growth_exponent
from .quadform import (
    DEFAULT_QUADRATURE,
    ADecomposition,
    Piece,
    ProductTerm,
    QuadratureSpec,
    RadialTestFunction,
    a_decomposition,
    quad_form_ibp,
)

__all__ = [
    "SearchBudget",
    "InstabilityCertificate",
    "NotFound",
    "build_f_QR",
    "build_f_Rbeta",
    "reflected_warping",
    "CandidateEvaluation",
    "iter_candidates",
    "search_instability",
    "certificate_from_record",
]

# widest support representable without underflowing piece coefficients
_MAX_LOG_SUPPORT = 700.0

DEFAULT_BETAS = (1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0)
DEFAULT_RADII = (10.0, 100.0, 1000.0)
DEFAULT_Q_VALUES = (1.0, 10.0, 100.0)


@dataclass(frozen=True)
class SearchBudget:
    """Deterministic parameter grids scanned by ``search_instability``."""

    q_values: tuple[float, ...] = DEFAULT_Q_VALUES
    r_values: tuple[float, ...] = DEFAULT_RADII
    betas: tuple[float, ...] = DEFAULT_BETAS

    @classmethod
    def extended(cls) -> "SearchBudget":
        """Wider grid for thin stability margins (used by diagram confirmation)."""
        return cls(
            r_values=(10.0, 100.0, 1000.0, 1e4),
            betas=DEFAULT_BETAS + (24.0, 32.0, 48.0, 64.0),
        )


@dataclass(frozen=True)
class InstabilityCertificate:
    """A reproducible witness Q_a(f) < 0.

    ``family`` carries the family kind plus every parameter needed to
    rebuild the test function; re-evaluating the integrated-by-parts form
    on the rebuilt function must reproduce ``q_value`` to 1e-7 relative.
    """

    a: float
    family: dict
    q_value: float
    rayleigh: float
    mass: float

    def to_record(self, manifold: dict | None = None) -> dict:
        rec = {
            "type": "instability_certificate",
            "a": self.a,
            "family": self.family,
            "q_value": self.q_value,
            "rayleigh": self.rayleigh,
            "mass": self.mass,
        }
        if manifold is not None:
            rec["manifold"] = manifold
        return rec

    def to_json(self, manifold: dict | None = None) -> str:
        return json.dumps(self.to_record(manifold), sort_keys=True)


@dataclass(frozen=True)
class NotFound:
    """Search result when no candidate went negative."""

    best_q: float
    best_rayleigh: float
    candidates_tried: int
    skipped: tuple[str, ...] = ()


def reflected_warping(warping):
    """Mirror rho(r) -> rho(-r) so the negative end of a full line reuses
    the positive-end machinery."""
    from .geometry import SampledWarping, WarpingFunction

    class _Reflected(WarpingFunction):
        kind = f"reflected({warping.kind})"
        is_closed_form = warping.is_closed_form

        def value(self, r):
            return warping.value(-np.asarray(r, dtype=float))

        def deriv(self, r):
            return -warping.deriv(-np.asarray(r, dtype=float))

        def deriv2(self, r):
            return warping.deriv2(-np.asarray(r, dtype=float))

        def log_value(self, r):
            return warping.log_value(-np.asarray(r, dtype=float))

        def dlog(self, r):
            return -warping.dlog(-np.asarray(r, dtype=float))

        def ratio2(self, r):
            return warping.ratio2(-np.asarray(r, dtype=float))

        def domain_hull(self):
            hull = warping.domain_hull()
            if hull is None:
                return None
            return (-hull[1], -hull[0])

        def params(self):
            return {"kind": self.kind, "inner": warping.params()}

    return _Reflected()


def _solve_doubling_radius(spec: WarpedProductSpec, R: float) -> float:
    """Find T > R with rho(T) = 2 rho(R), by bracketed root finding on log rho."""
    w = spec.warping
    target = float(w.log_value(R)) + math.log(2.0)

    def g(t):
        return float(w.log_value(t)) - target

    hull = spec.warping.domain_hull()
    cap = hull[1] if hull is not None else 2.0**40 * R
    hi = min(2.0 * R, cap)
    while g(hi) < 0.0:
        if hi >= cap:
            raise FamilyInapplicableError(
                "rho never doubles beyond R; the doubling-radius family does not apply"
            )
        hi = min(hi * 2.0, cap)
    t = brentq(g, R, hi, rtol=1e-12)
    return float(t)


def build_f_QR(spec: WarpedProductSpec, Q: float, R: float) -> RadialTestFunction:
    """Five-piece profile sqrt(r) / rho^{(n-1)/2} between Q and R, closed off
    at T where rho(T) = 2 rho(R)."""
    if not (0 < Q < R):
        raise PreconditionError("need 0 < Q < R")
    w = spec.warping
    if float(w.deriv(R)) <= 0:
        raise FamilyInapplicableError("rho must be increasing beyond Q")
    n = spec.n
    t_radius = _solve_doubling_radius(spec, R)
    p = -(n - 1) / 2.0
    # continuity constant: piece 3 equals piece 4 at R
    u = 0.5 * math.log(R) + p * float(w.log_value(R))
    v = 0.5 * math.log(t_radius) + p * float(w.log_value(t_radius))
    if v >= u:
        raise FamilyInapplicableError("outer ramp cannot reach zero (rho grows too slowly)")
    c_cont = 1.0 / (1.0 - math.exp(v - u))
    log_c = math.log(c_cont)
    sq = math.sqrt(Q)
    pieces = (
        Piece(Q / 2.0, Q, (ProductTerm((-sq, 2.0 / sq), 0.0, p, 0.0, 0.0),)),
        Piece(Q, R, (ProductTerm((1.0,), 0.5, p, 0.0, 0.0),)),
        Piece(
            R,
            t_radius,
            (
                ProductTerm((1.0,), 0.5, p, 0.0, log_c),
                ProductTerm((-1.0,), 0.0, 0.0, 0.0, log_c + v),
            ),
        ),
    )
    return RadialTestFunction(pieces, label=f"f_QR(Q={Q:g},R={R:g})")


def build_f_Rbeta(
    spec: WarpedProductSpec,
    R: float,
    beta: float,
    variant: str = "A",
    a: float | None = None,
    growth: GrowthDecomposition | None = None,
    printed_mixing: bool = True,
) -> RadialTestFunction:
    """Power-law profile r^{-(n alpha - alpha - 1)/2} xi^e on [R, R^beta].

    Variant "A" uses the xi exponent e = -2 a (n-1) (requires ``a``);
    variant "B" uses e = -(n-1)/2.  With ``printed_mixing`` the inner ramp
    carries the constant factor xi(R)^e while the other pieces use xi(r)^e;
    continuity holds either way.
    """
    if not (R > 1.0 and beta > 1.0):
        raise PreconditionError("need R > 1 and beta > 1")
    if beta * math.log(R) > _MAX_LOG_SUPPORT:
        raise FamilyInapplicableError("support R^beta exceeds the floating-point range")
    if growth is None:
        growth = growth_exponent(spec, 1.0, max(1000.0, R))
    n = spec.n
    alpha = growth.alpha_hat
    if variant == "A":
        if a is None:
            raise PreconditionError("variant A needs the stability parameter a for its xi exponent")
        e = -2.0 * a * (n - 1)
    elif variant == "B":
        e = -(n - 1) / 2.0
    else:
        raise PreconditionError("variant must be 'A' or 'B'")

    core_pow = -(n * alpha - alpha - 1.0) / 2.0
    r_top = math.exp(beta * math.log(R))
    sigma1 = core_pow * math.log(R)
    sigma3 = beta * core_pow * math.log(R)
    log_xi_r = float(growth.log_xi(R))

    if printed_mixing:
        ramp_terms = (ProductTerm((-1.0, 2.0 / R), 0.0, 0.0, 0.0, sigma1 + e * log_xi_r),)
    else:
        ramp_terms = (ProductTerm((-1.0, 2.0 / R), 0.0, 0.0, e, sigma1),)
    pieces = (
        Piece(R / 2.0, R, ramp_terms),
        Piece(R, r_top, (ProductTerm((1.0,), core_pow, 0.0, e, 0.0),)),
        Piece(
            r_top,
            1.5 * r_top,
            (ProductTerm((3.0, -2.0 / r_top), 0.0, 0.0, e, sigma3),),
        ),
    )
    return RadialTestFunction(
        pieces,
        alpha_hat=alpha,
        label=f"f_Rbeta(R={R:g},beta={beta:g},{variant})",
    )


@dataclass
class CandidateEvaluation:
    """One grid candidate with its affine decomposition Q_a = q0 + a g."""

    family: dict
    function: RadialTestFunction = field(repr=False)
    decomposition: ADecomposition

    def q_at(self, a: float) -> float:
        return self.decomposition.q_at(a)

    @property
    def mass(self) -> float:
        return self.decomposition.mass


def _build_candidate(spec, family: dict, growth, quad) -> CandidateEvaluation | None:
    kind = family["kind"]
    if "alpha_hat" in family:
        # replayed certificates pin the recorded growth exponent exactly
        growth = GrowthDecomposition(float(family["alpha_hat"]), (), spec.warping)
    if kind == "kawai":
        f = build_f_QR(spec, family["Q"], family["R"])
    elif kind in ("poly_a", "poly_b"):
        f = build_f_Rbeta(
            spec,
            family["R"],
            family["beta"],
            variant=("A" if kind == "poly_a" else "B"),
            a=family.get("a"),
            growth=growth,
            printed_mixing=family.get("printed_mixing", True),
        )
    else:
        raise PreconditionError(f"unknown family kind {kind!r}")
    dec = a_decomposition(spec, f, quad)
    if not (math.isfinite(dec.q0) and math.isfinite(dec.g) and dec.mass > 0):
        return None
    return CandidateEvaluation(family=family, function=f, decomposition=dec)


def iter_candidates(spec, a: float, families, budget: SearchBudget, quad: QuadratureSpec):
    """Yield family parameter dictionaries in deterministic grid order."""
    for fam in families:
        if fam == "kawai":
            for q in budget.q_values:
                for r in budget.r_values:
                    if q < r:
                        yield {"kind": "kawai", "Q": q, "R": r}
        elif fam in ("poly_a", "poly_b"):
            for r in budget.r_values:
                for beta in budget.betas:
                    d = {"kind": fam, "R": r, "beta": beta}
                    if fam == "poly_a":
                        d["a"] = a
                    yield d
        else:
            raise PreconditionError(f"unknown family {fam!r}")


def search_instability(
    spec: WarpedProductSpec,
    a: float,
    families=("kawai", "poly_a", "poly_b"),
    budget: SearchBudget | None = None,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
    growth: GrowthDecomposition | None = None,
) -> InstabilityCertificate | NotFound:
    """Scan the family grids for Q_a(f) < 0; first hit in grid order wins.

    The negativity threshold is -1e-8 times the magnitude of the terms
    entering the form, so quadrature noise cannot masquerade as a
    certificate.  Because Q_a is affine in a with q0 >= 0, any certificate
    found at a0 > 0 has g < 0 and certifies every a > a0 as well.
    """
    budget = budget or SearchBudget()
    if growth is None and any(f in ("poly_a", "poly_b") for f in families):
        hull = spec.warping.domain_hull()
        top = min(1000.0, hull[1]) if hull else 1000.0
        growth = growth_exponent(spec, 1.0, top)

    best_q = math.inf
    best_rayleigh = math.inf
    tried = 0
    skipped: list[str] = []
    for family in iter_candidates(spec, a, families, budget, quad):
        if family["kind"] in ("poly_a", "poly_b") and growth is not None:
            family = {**family, "alpha_hat": growth.alpha_hat}
        try:
            cand = _build_candidate(spec, family, growth, quad)
        except (FamilyInapplicableError, PreconditionError) as exc:
            skipped.append(f"{family}: {exc}")
            continue
        if cand is None:
            skipped.append(f"{family}: numerically degenerate")
            continue
        tried += 1
        q_val = cand.q_at(a)
        quotient = q_val / cand.mass
        best_q = min(best_q, q_val)
        best_rayleigh = min(best_rayleigh, quotient)
        floor = 1e-8 * max(1.0, cand.decomposition.noise_scale(a))
        if q_val < -floor:
            verified = quad_form_ibp(spec, a, cand.function, quad)
            if not math.isclose(verified, q_val, rel_tol=1e-7, abs_tol=1e-12 * cand.mass):
                skipped.append(f"{family}: re-verification mismatch {verified} vs {q_val}")
                continue
            if verified >= 0:
                continue
            return InstabilityCertificate(
                a=a,
                family=dict(family),
                q_value=verified,
                rayleigh=verified / cand.mass,
                mass=cand.mass,
            )
    return NotFound(
        best_q=best_q,
        best_rayleigh=best_rayleigh,
        candidates_tried=tried,
        skipped=tuple(skipped),
    )


def certificate_from_record(spec: WarpedProductSpec, record: dict,
                            quad: QuadratureSpec = DEFAULT_QUADRATURE) -> tuple[float, float]:
    """Rebuild the certificate function from a record and re-evaluate Q.

    Returns (recomputed Q, recorded Q); callers check the 1e-7 relative
    reproduction tolerance.
    """
    family = record["family"]
    a = record["a"]
    cand = _build_candidate(spec, family, None, quad)
    if cand is None:
        raise PreconditionError("recorded certificate is numerically degenerate on rebuild")
    return quad_form_ibp(spec, a, cand.function, quad), float(record["q_value"])
