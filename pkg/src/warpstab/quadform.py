"""Radial stability quadratic forms on warped products.

For a compactly supported radial function f the form
``Q_a(f) = integral_M (|grad f|^2 + a S f^2)`` reduces to one-dimensional
integrals against the weight rho^{n-1}.  Two independent routes are
implemented: the direct form (curvature under the integral) and the
integrated-by-parts form (first derivatives of rho only).  Their agreement
is the package's built-in self check.

Test functions are piecewise products ``poly(r) * r^s * rho(r)^p * xi(r)^q``
(per piece, possibly summed), stored with a per-term logarithmic scale so
that certificate functions whose supports span dozens of decades evaluate
without overflow or underflow.
"""

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.integrate import quad_vec

from .errors import PreconditionError, QuadratureError
from .geometry import IntervalKind, WarpedProductSpec

__all__ = [
    "QuadratureSpec",
    "ProductTerm",
    "Piece",
    "RadialTestFunction",
    "ADecomposition",
    "hat_function",
    "bump_function",
    "validate_test_function",
    "quad_form_direct",
    "quad_form_ibp",
    "rayleigh_quotient",
    "a_decomposition",
    "norm_squared",
]

_LOG_TINY = -745.0
_CLAMP_EPS = 1e-6


@dataclass(frozen=True)
class QuadratureSpec:
    """Adaptive quadrature controls (interval splitting, fixed rule per panel)."""

    rel_tol: float = 1e-10
    max_depth: int = 40

    def __post_init__(self):
        if self.rel_tol <= 0:
            raise ValueError("tolerance must be positive")

    @property
    def subdivision_limit(self) -> int:
        return max(64, 50 * self.max_depth)


DEFAULT_QUADRATURE = QuadratureSpec()


@dataclass(frozen=True)
class ProductTerm:
    """One summand poly(r) * exp(log_scale) * r^r_pow * rho^rho_pow * xi^xi_pow."""

    coeffs: tuple[float, ...]
    r_pow: float = 0.0
    rho_pow: float = 0.0
    xi_pow: float = 0.0
    log_scale: float = 0.0


@dataclass(frozen=True)
class Piece:
    """Closed-form segment of a radial test function on [lo, hi]."""

    lo: float
    hi: float
    terms: tuple[ProductTerm, ...]


def product_piece(lo, hi, coeffs, r_pow=0.0, rho_pow=0.0, xi_pow=0.0, log_scale=0.0) -> Piece:
    return Piece(lo, hi, (ProductTerm(tuple(float(c) for c in coeffs), r_pow, rho_pow, xi_pow, log_scale),))


class _TermEval:
    """Effective exponents of one term after folding xi into (r, rho) powers."""

    __slots__ = ("coeffs", "dcoeffs", "er", "ep", "log_scale")

    def __init__(self, term: ProductTerm, alpha_hat: float | None):
        if term.xi_pow != 0.0 and alpha_hat is None:
            raise PreconditionError("test function uses xi powers but has no growth exponent")
        a = alpha_hat or 0.0
        self.coeffs = np.asarray(term.coeffs, dtype=float)
        self.dcoeffs = npoly.polyder(self.coeffs) if len(term.coeffs) > 1 else np.zeros(1)
        self.er = term.r_pow - a * term.xi_pow
        self.ep = term.rho_pow + term.xi_pow
        self.log_scale = term.log_scale


@dataclass(frozen=True)
class RadialTestFunction:
    """Compactly supported piecewise radial function with analytic derivative.

    ``alpha_hat`` is the growth exponent backing any xi powers; pieces must
    be contiguous and the function must satisfy the boundary conditions of
    the interval it is used on (checked by ``validate_test_function``).
    """

    pieces: tuple[Piece, ...]
    alpha_hat: float | None = None
    label: str = ""

    @property
    def support(self) -> tuple[float, float]:
        return (self.pieces[0].lo, self.pieces[-1].hi)

    def _evals(self):
        return [[_TermEval(t, self.alpha_hat) for t in p.terms] for p in self.pieces]

    def _eval_piece(self, spec: WarpedProductSpec, evals, r):
        """Return (F, G, Lref) with f = F e^Lref, f' = G e^Lref at scalar r."""
        w = spec.warping
        r = float(r)
        need_log_r = any(t.er != 0.0 for t in evals)
        need_log_rho = any(t.ep != 0.0 for t in evals)
        if need_log_r and r < 0:
            raise PreconditionError("pieces with r^s factors require r >= 0")
        ln_r = math.log(r) if (need_log_r and r > 0) else (-math.inf if need_log_r else 0.0)
        ln_rho = float(w.log_value(r)) if need_log_rho else 0.0
        dlog_rho = float(w.dlog(r)) if need_log_rho else 0.0
        ls = []
        for t in evals:
            ls.append(t.log_scale + t.er * ln_r + t.ep * ln_rho)
        lref = max(ls)
        if not math.isfinite(lref):
            return 0.0, 0.0, -math.inf
        f = 0.0
        g = 0.0
        for t, l in zip(evals, ls):
            p = float(npoly.polyval(r, t.coeffs))
            dp = float(npoly.polyval(r, t.dcoeffs))
            dl = (t.er / r if t.er != 0.0 else 0.0) + t.ep * dlog_rho
            scale = math.exp(l - lref)
            f += p * scale
            g += (dp + p * dl) * scale
        return f, g, lref

    def _locate(self, r: float) -> int | None:
        for i, p in enumerate(self.pieces):
            if p.lo <= r <= p.hi:
                return i
        return None

    def value(self, spec: WarpedProductSpec, r):
        """Evaluate f (zero outside the support)."""
        evals = self._evals()
        rs = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.zeros_like(rs)
        for j, rj in enumerate(rs):
            i = self._locate(float(rj))
            if i is None:
                continue
            f, _, lref = self._eval_piece(spec, evals[i], rj)
            out[j] = f * math.exp(lref) if lref > _LOG_TINY else 0.0
        return out if np.ndim(r) else float(out[0])

    def deriv(self, spec: WarpedProductSpec, r):
        """Evaluate f' piecewise (zero outside the support)."""
        evals = self._evals()
        rs = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.zeros_like(rs)
        for j, rj in enumerate(rs):
            i = self._locate(float(rj))
            if i is None:
                continue
            _, g, lref = self._eval_piece(spec, evals[i], rj)
            out[j] = g * math.exp(lref) if lref > _LOG_TINY else 0.0
        return out if np.ndim(r) else float(out[0])

    def scaled(self, c: float) -> "RadialTestFunction":
        """Return c * f (for homogeneity checks)."""
        if c == 0:
            raise ValueError("scaling by zero would produce the zero function")
        sign_flip = c < 0
        ls = math.log(abs(c))
        new_pieces = []
        for p in self.pieces:
            terms = tuple(
                replace(
                    t,
                    coeffs=tuple((-x if sign_flip else x) for x in t.coeffs),
                    log_scale=t.log_scale + ls,
                )
                for t in p.terms
            )
            new_pieces.append(Piece(p.lo, p.hi, terms))
        return RadialTestFunction(tuple(new_pieces), self.alpha_hat, self.label)


def hat_function(b: float, c: float, peak: float = 1.0) -> RadialTestFunction:
    """Piecewise-linear hat supported on [b, c] with the given peak at the midpoint."""
    if not c > b:
        raise ValueError("need c > b")
    m = 0.5 * (b + c)
    s = peak / (m - b)
    up = product_piece(b, m, (-s * b, s))
    down = product_piece(m, c, (s * c, -s))
    return RadialTestFunction((up, down), label=f"hat[{b},{c}]")


def bump_function(b: float, c: float, peak: float = 1.0) -> RadialTestFunction:
    """C^1 bump (r-b)^2 (c-r)^2, normalized to the given peak."""
    if not c > b:
        raise ValueError("need c > b")
    base = npoly.polymul((-b, 1.0), (c, -1.0))
    poly = npoly.polymul(base, base) * (peak / ((c - b) / 2.0) ** 4)
    return RadialTestFunction((product_piece(b, c, tuple(poly)),), label=f"bump[{b},{c}]")


def _sample_points(piece: Piece) -> np.ndarray:
    lo, hi = piece.lo, piece.hi
    if lo > 0 and hi / lo > 10:
        return np.geomspace(max(lo, 1e-300), hi, 9)[1:-1]
    return np.linspace(lo, hi, 9)[1:-1]


def validate_test_function(spec: WarpedProductSpec, f: RadialTestFunction) -> RadialTestFunction:
    """Check ordering, continuity, boundary zeros, and non-triviality.

    Returns the function (possibly with its support clamped away from an
    origin where the rho^{n-3} weight would not be integrable).
    """
    pieces = f.pieces
    if not pieces:
        raise PreconditionError("test function has no pieces")
    for p in pieces:
        if not p.hi > p.lo:
            raise PreconditionError("piece with empty interior")
    for left, right in zip(pieces, pieces[1:]):
        if abs(right.lo - left.hi) > 1e-9 * max(1.0, abs(left.hi)):
            raise PreconditionError("pieces are not contiguous")

    lo, hi = f.support
    ik = spec.interval.kind
    if ik is IntervalKind.HALF_LINE and lo < 0:
        raise PreconditionError("support extends below r = 0")
    if ik is IntervalKind.SEGMENT and (lo < spec.interval.lo - 1e-12 or hi > spec.interval.hi + 1e-12):
        raise PreconditionError("support is not inside the segment")
    hull = spec.warping.domain_hull()
    if hull is not None and (lo < hull[0] - 1e-12 or hi > hull[1] + 1e-12):
        raise PreconditionError("support is not inside the sampled hull")

    # origin clamp: only needed if the rho^{n-3} weight fails to be integrable
    if ik is IntervalKind.HALF_LINE and lo == 0.0 and spec.n >= 3:
        k_local = float(1e-8 * spec.warping.dlog(1e-8))
        if k_local * (spec.n - 3) <= -1.0:
            warnings.warn(
                "rho^{n-3} is not integrable at the origin; clamping support to "
                f"[{_CLAMP_EPS}, {hi}]",
                stacklevel=2,
            )
            clamped = [Piece(max(p.lo, _CLAMP_EPS), p.hi, p.terms) for p in pieces if p.hi > _CLAMP_EPS]
            f = RadialTestFunction(tuple(clamped), f.alpha_hat, f.label)
            pieces = f.pieces
            lo = pieces[0].lo

    samples = []
    for p in pieces:
        pts = _sample_points(p)
        samples.append(np.max(np.abs(f.value(spec, pts))))
    fmax = float(max(samples))
    if fmax == 0.0:
        raise PreconditionError("test function is identically zero")

    for left, right in zip(pieces, pieces[1:]):
        r = left.hi
        vl = _piece_value_at(spec, f, left, r)
        vr = _piece_value_at(spec, f, right, right.lo)
        if abs(vl - vr) > 1e-9 * max(abs(vl), abs(vr)) and max(abs(vl), abs(vr)) > 1e-12 * fmax:
            raise PreconditionError(f"discontinuity at r={r}: {vl} vs {vr}")

    need_left_zero = (
        ik is IntervalKind.FULL_LINE
        or ik is IntervalKind.SEGMENT
        or (ik is IntervalKind.HALF_LINE and lo > 0)
    )
    if need_left_zero and abs(_piece_value_at(spec, f, pieces[0], lo)) > 1e-9 * fmax:
        raise PreconditionError("f must vanish at the lower end of its support")
    if abs(_piece_value_at(spec, f, pieces[-1], hi)) > 1e-9 * fmax:
        raise PreconditionError("f must vanish at the upper end of its support")
    return f


def _piece_value_at(spec, f: RadialTestFunction, piece: Piece, r: float) -> float:
    evals = [_TermEval(t, f.alpha_hat) for t in piece.terms]
    v, _, lref = f._eval_piece(spec, evals, r)
    return v * math.exp(lref) if lref > _LOG_TINY else 0.0


def _integrate_piece(fn, lo: float, hi: float, quad: QuadratureSpec, n_out: int) -> np.ndarray:
    """Adaptive quadrature of a vector integrand, log-substituted on wide pieces."""
    if hi <= lo:
        return np.zeros(n_out)
    if lo > 0 and hi / lo > 10.0:
        a, b = math.log(lo), math.log(hi)

        def g(u):
            r = math.exp(u)
            return fn(r) * r

        res, err = quad_vec(g, a, b, epsrel=quad.rel_tol, epsabs=1e-250, limit=quad.subdivision_limit)
    else:
        res, err = quad_vec(fn, lo, hi, epsrel=quad.rel_tol, epsabs=1e-250, limit=quad.subdivision_limit)
    if not np.all(np.isfinite(res)):
        raise QuadratureError(f"non-integrable singularity on [{lo}, {hi}]")
    return res


def _ibp_integrals(spec: WarpedProductSpec, f: RadialTestFunction, quad: QuadratureSpec) -> np.ndarray:
    """Return (I1, I2, I3, I4, mass) without the fiber area factor.

    I1 = int f'^2 rho^{n-1};  I2 = int (rho'/rho)^2 f^2 rho^{n-1};
    I3 = int (rho'/rho) f f' rho^{n-1};  I4 = int f^2 rho^{n-3};
    mass = int f^2 rho^{n-1}.
    """
    n = spec.n
    w = spec.warping
    evals = f._evals()
    total = np.zeros(5)
    for piece, ev in zip(f.pieces, evals):

        def fn(r, ev=ev):
            F, G, lref = f._eval_piece(spec, ev, r)
            ln_rho = float(w.log_value(r))
            e = 2.0 * lref + (n - 1) * ln_rho
            if e < _LOG_TINY or not math.isfinite(e):
                return np.zeros(5)
            base = math.exp(e)
            dl = float(w.dlog(r))
            i4 = F * F * math.exp(e - 2.0 * ln_rho) if e - 2.0 * ln_rho > _LOG_TINY else 0.0
            return np.array(
                [G * G * base, dl * dl * F * F * base, dl * F * G * base, i4, F * F * base]
            )

        total += _integrate_piece(fn, piece.lo, piece.hi, quad, 5)
    return total


def _direct_integrals(spec: WarpedProductSpec, a: float, f: RadialTestFunction, quad: QuadratureSpec) -> np.ndarray:
    """Return (int (f'^2 + a S f^2) rho^{n-1}, mass) without the area factor."""
    n = spec.n
    w = spec.warping
    s_f = spec.fiber.scalar_curvature
    evals = f._evals()
    total = np.zeros(2)
    for piece, ev in zip(f.pieces, evals):

        def fn(r, ev=ev):
            F, G, lref = f._eval_piece(spec, ev, r)
            ln_rho = float(w.log_value(r))
            e = 2.0 * lref + (n - 1) * ln_rho
            if e < _LOG_TINY or not math.isfinite(e):
                return np.zeros(2)
            base = math.exp(e)
            s_m = s_f * math.exp(-2.0 * ln_rho) - (n - 1) * (
                2.0 * float(w.ratio2(r)) + (n - 2) * float(w.dlog(r)) ** 2
            )
            return np.array([(G * G + a * s_m * F * F) * base, F * F * base])

        total += _integrate_piece(fn, piece.lo, piece.hi, quad, 2)
    return total


def _check_boundary_terms(spec: WarpedProductSpec, f: RadialTestFunction) -> None:
    """The integrated-by-parts route needs rho^{n-2} f to vanish at both ends."""
    w = spec.warping
    lo, hi = f.support
    for r, piece in ((lo, f.pieces[0]), (hi, f.pieces[-1])):
        fv = _piece_value_at(spec, f, piece, r)
        pts = _sample_points(piece)
        piece_scale = float(np.max(np.abs(f.value(spec, pts)))) or 1.0
        if abs(fv) <= 1e-9 * piece_scale:
            continue
        # nonvanishing f is fine only where rho itself vanishes (smooth origin)
        if r == 0.0 and not math.isfinite(float(w.log_value(0.0))):
            continue
        raise PreconditionError(
            f"boundary term rho^(n-2) f does not vanish at r={r} (f={fv:.3g})"
        )


def quad_form_direct(
    spec: WarpedProductSpec,
    a: float,
    f: RadialTestFunction,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """Q_a(f) = A(F) * int (f'^2 + a S_M f^2) rho^{n-1} dr."""
    f = validate_test_function(spec, f)
    vals = _direct_integrals(spec, a, f, quad)
    return spec.fiber.area * float(vals[0])


def quad_form_ibp(
    spec: WarpedProductSpec,
    a: float,
    f: RadialTestFunction,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """Q_a(f) through the integrated-by-parts route (rho' only, no rho'')."""
    f = validate_test_function(spec, f)
    _check_boundary_terms(spec, f)
    i1, i2, i3, i4, _ = _ibp_integrals(spec, f, quad)
    n = spec.n
    area = spec.fiber.area
    return area * i1 + a * (
        area * ((n - 1) * (n - 2) * i2 + 4 * (n - 1) * i3)
        + spec.fiber.total_scalar_curvature * i4
    )


@dataclass(frozen=True)
class ADecomposition:
    """Affine split Q_a(f) = q0 + a * g; q0 is the pure gradient energy."""

    q0: float
    g: float
    mass: float  # A(F) * int f^2 rho^{n-1}, for normalization
    g_abs: float = 0.0  # sum of |a-linear term| magnitudes, for noise floors

    def q_at(self, a: float) -> float:
        return self.q0 + a * self.g

    def noise_scale(self, a: float) -> float:
        """Magnitude scale of the terms entering Q_a; quadrature noise in the
        computed form is a small relative fraction of this."""
        return self.q0 + abs(a) * self.g_abs

    @property
    def a_star(self) -> float | None:
        """Critical parameter where the form turns negative (None if g >= 0)."""
        if self.g < 0:
            return -self.q0 / self.g
        return None


def a_decomposition(
    spec: WarpedProductSpec,
    f: RadialTestFunction,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> ADecomposition:
    """Split Q_a(f) into its a-independent and a-linear parts."""
    f = validate_test_function(spec, f)
    _check_boundary_terms(spec, f)
    i1, i2, i3, i4, mass = _ibp_integrals(spec, f, quad)
    n = spec.n
    area = spec.fiber.area
    g = area * ((n - 1) * (n - 2) * i2 + 4 * (n - 1) * i3) + spec.fiber.total_scalar_curvature * i4
    g_abs = area * ((n - 1) * (n - 2) * abs(i2) + 4 * (n - 1) * abs(i3)) + abs(
        spec.fiber.total_scalar_curvature * i4
    )
    return ADecomposition(q0=area * i1, g=float(g), mass=area * float(mass), g_abs=float(g_abs))


def norm_squared(
    spec: WarpedProductSpec,
    f: RadialTestFunction,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """A(F) * int f^2 rho^{n-1} dr."""
    f = validate_test_function(spec, f)
    vals = _ibp_integrals(spec, f, quad)
    return spec.fiber.area * float(vals[4])


def rayleigh_quotient(
    spec: WarpedProductSpec,
    a: float,
    f: RadialTestFunction,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """Q_a(f) / ||f||^2; an upper bound for the first eigenvalue on any
    domain containing the support of f."""
    dec = a_decomposition(spec, f, quad)
    if dec.mass <= 0:
        raise QuadratureError("vanishing norm in Rayleigh quotient")
    return dec.q_at(a) / dec.mass
