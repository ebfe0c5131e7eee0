"""Minimal-cone stability: the reduced radial quadratic form and its slope.

A minimal cone in Euclidean space is the warped product [0, inf) x_r F
with F minimal in the sphere.  After factoring out the fiber integral of
|A_F|^{(a+1)/a}, a-stability of a non-flat cone forces nonnegativity of a
one-dimensional integral in pure powers of r.  With the standard cutoff
profile the [1, R] bulk contributes exactly ((n-2)^2/4 - a(n-1)) log R
while both ends are R-independent constants, so the sign of that slope
coefficient decides large-R behaviour; it vanishes precisely at the
rigidity bound (n-2)^2/(4(n-1)).
"""

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.integrate import quad

from .errors import PreconditionError
from .thresholds import cone_rigidity_bound, simons_cone_value

__all__ = [
    "ConeSpec",
    "ConeTestFunction",
    "cone_test_function",
    "cone_quadform",
    "slope_coefficient",
    "SimonsReference",
    "simons_reference",
    "slope_estimate",
]


@dataclass(frozen=True)
class ConeSpec:
    """Cone C^n in R^{n+1}; the fiber's second-fundamental-form integral is
    an abstract positive constant (it factors out of the reduced form)."""

    n: int
    fiber_norm_integral: float | None = None

    def __post_init__(self):
        if self.n < 3:
            raise PreconditionError("cone dimension must be >= 3")
        if self.fiber_norm_integral is not None and self.fiber_norm_integral <= 0:
            raise PreconditionError("the fiber norm integral is positive for non-flat cones")


@dataclass(frozen=True)
class ConeTestFunction:
    """Five-piece cutoff profile for the reduced cone form.

    Pieces: 0 on [0, 1/2]; the ramp 2r - 1 on [1/2, 1]; the power
    r^{(-na+3a+1)/(2a)} on [1, R]; a linear ramp down on [R, 2R]; 0 beyond.
    The printed middle ramp reads "2r", which is discontinuous at both
    ends; Lipschitz test functions force the 2r - 1 form used here.
    """

    n: int
    a: float
    R: float

    def __post_init__(self):
        if self.R <= 1:
            raise PreconditionError("cutoff radius must exceed 1")

    @property
    def core_power(self) -> float:
        n, a = self.n, self.a
        return (-n * a + 3 * a + 1) / (2 * a)

    def pieces(self) -> list[tuple[float, float, tuple[float, ...], float]]:
        """(lo, hi, poly coefficients, power mu) with phi = poly(r) * r^mu."""
        p = self.core_power
        R = self.R
        rp = R**p
        return [
            (0.5, 1.0, (-1.0, 2.0), 0.0),
            (1.0, R, (1.0,), p),
            (R, 2.0 * R, (2.0 * rp, -rp / R), 0.0),
        ]

    def value(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for lo, hi, coeffs, mu in self.pieces():
            m = (r >= lo) & (r <= hi)
            if np.any(m):
                out[m] = npoly.polyval(r[m], coeffs) * np.power(r[m], mu)
        return out


def cone_test_function(cone: ConeSpec, a: float, R: float) -> ConeTestFunction:
    if a < 1.0:
        raise PreconditionError("the cone reduction requires a >= 1")
    return ConeTestFunction(n=cone.n, a=a, R=R)


def slope_coefficient(n: int, a: float) -> float:
    """Coefficient of log R in the bulk of the cone form:
    -na + a + n^2/4 - n + 1 = (n-2)^2/4 - a(n-1); zero at the rigidity bound."""
    return (n - 2) ** 2 / 4.0 - a * (n - 1)


def _form_coefficients(n: int, a: float) -> tuple[tuple[float, float], ...]:
    """((coefficient, r exponent), ...) for the phi^2, phi phi', phi'^2 terms."""
    c2 = -(8 * a**3 + 3 * a**2 - 2 * a - 1) / (4 * a**2)
    c1 = (2 * a**2 - a - 1) / a
    return (
        (c2, n - 4.0 - 1.0 / a),
        (c1, n - 3.0 - 1.0 / a),
        (1.0, n - 2.0 - 1.0 / a),
    )


def _power_integral(c: float, q: float, lo: float, hi: float) -> float:
    """Exact integral of c * r^q over [lo, hi] (log form at q = -1)."""
    if c == 0.0:
        return 0.0
    if abs(q + 1.0) < 1e-9:
        return c * math.log(hi / lo)
    e = q + 1.0
    return c * (hi**e - lo**e) / e


def cone_quadform(
    cone: ConeSpec, a: float, phi: ConeTestFunction, method: str = "exact"
) -> float:
    """Evaluate the reduced cone form on phi.

    Negativity certifies that the cone cannot be a-stable unless flat.
    ``method="exact"`` integrates the piecewise powers in closed form;
    ``method="quad"`` uses adaptive quadrature (cross-check route).
    """
    if a < 1.0:
        raise PreconditionError("the cone reduction requires a >= 1")
    if phi.n != cone.n or phi.a != a:
        raise PreconditionError("test function was built for different (n, a)")
    terms = _form_coefficients(cone.n, a)

    if method == "quad":
        total = 0.0
        for lo, hi, coeffs, mu in phi.pieces():
            dcoeffs = npoly.polyder(np.asarray(coeffs)) if len(coeffs) > 1 else np.zeros(1)

            def integrand(r):
                p = float(npoly.polyval(r, coeffs))
                dp = float(npoly.polyval(r, dcoeffs))
                v = p * r**mu
                dv = (dp + mu * p / r) * r**mu
                (c2, e2), (c1, e1), (c0, e0) = terms
                return c2 * r**e2 * v * v + c1 * r**e1 * v * dv + c0 * r**e0 * dv * dv

            val, _ = quad(integrand, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=400)
            total += val
        return total
    if method != "exact":
        raise ValueError("method must be 'exact' or 'quad'")

    total = 0.0
    for lo, hi, coeffs, mu in phi.pieces():
        poly = np.asarray(coeffs, dtype=float)
        dpoly = npoly.polyder(poly) if len(coeffs) > 1 else np.zeros(1)
        # phi^2, phi phi', phi'^2 as polynomials times powers of r
        sq = npoly.polymul(poly, poly)  # * r^{2mu}
        cross_a = npoly.polymul(poly, dpoly)  # * r^{2mu}
        cross_b = sq * mu  # * r^{2mu - 1}
        dsq_a = npoly.polymul(dpoly, dpoly)  # * r^{2mu}
        dsq_b = 2.0 * mu * npoly.polymul(poly, dpoly)  # * r^{2mu - 1}
        dsq_c = mu * mu * sq  # * r^{2mu - 2}
        (c2, e2), (c1, e1), (c0, e0) = terms
        groups = (
            (c2, e2, ((sq, 0.0),)),
            (c1, e1, ((cross_a, 0.0), (cross_b, -1.0))),
            (c0, e0, ((dsq_a, 0.0), (dsq_b, -1.0), (dsq_c, -2.0))),
        )
        for cg, eg, parts in groups:
            for pcoeffs, shift in parts:
                for k, ck in enumerate(np.atleast_1d(pcoeffs)):
                    total += _power_integral(cg * float(ck), eg + 2 * mu + shift + k, lo, hi)
    return total


def slope_estimate(cone: ConeSpec, a: float, r_values) -> float:
    """Finite-difference log-R slope of the cone form over an R sweep.

    The end contributions are R-independent, so successive differences over
    a decade recover the slope coefficient.
    """
    rs = sorted(float(r) for r in r_values)
    if len(rs) < 2:
        raise PreconditionError("need at least two cutoff radii")
    qs = [cone_quadform(cone, a, cone_test_function(cone, a, r)) for r in rs]
    slopes = [
        (q2 - q1) / (math.log(r2) - math.log(r1))
        for (q1, r1), (q2, r2) in zip(zip(qs, rs), zip(qs[1:], rs[1:]))
    ]
    return float(np.mean(slopes))


@dataclass(frozen=True)
class SimonsReference:
    """Catalog entry for the Simons cone over S^{m-1} x S^{m-1} in R^{2m}."""

    m: int
    stability_value: object  # exact Fraction
    ambient_dim: int
    is_minimal_stable: bool  # stable as a minimal hypersurface iff 2m >= 8
    rigidity_bound: object  # cone_rigidity_bound(2m - 1), equal as rationals


def simons_reference(m: int) -> SimonsReference:
    if m < 2:
        raise PreconditionError("needs m >= 2")
    value = simons_cone_value(m)
    return SimonsReference(
        m=m,
        stability_value=value,
        ambient_dim=2 * m,
        is_minimal_stable=value >= 1,
        rigidity_bound=cone_rigidity_bound(2 * m - 1),
    )
