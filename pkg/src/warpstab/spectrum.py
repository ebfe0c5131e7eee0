"""First Dirichlet eigenvalue of the radial reduction of Delta - a S.

On a truncated domain [b, c] the radial operator acts as
``u -> -(rho^{n-1} u')' / rho^{n-1} + a S u``; its first eigenvalue is
positive on every bounded domain iff the manifold is a-stable.  The pencil
is assembled with second-order centered differences (stiffness weights at
cell midpoints, lumped mass), reduced to a symmetric tridiagonal problem,
and solved by bisection on Sturm-sequence inertia counts with inverse
iteration for the eigenvector (LAPACK stebz/stein).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal, eigvalsh_tridiagonal

from .errors import AssemblyError, NumericError, PreconditionError
from .geometry import (
    IntervalKind,
    SmoothnessClass,
    WarpedProductSpec,
    scalar_curvature,
    smoothness_check,
)

__all__ = [
    "Discretization",
    "Pencil",
    "EigenResult",
    "UnstableOn",
    "NoNegativeFound",
    "assemble",
    "first_eigenvalue",
    "geometric_schedule",
    "stability_scan",
]


@dataclass(frozen=True)
class Discretization:
    """Uniform grid on [lo, hi] with num_nodes nodes including the endpoints.

    lo = 0 is allowed only on a smooth boundaryless half-line product; the
    origin then carries a zero-flux regularity condition instead of a
    Dirichlet one.
    """

    lo: float
    hi: float
    num_nodes: int = 256

    def __post_init__(self):
        if self.num_nodes < 16:
            raise PreconditionError("need at least 16 grid nodes")
        if not self.hi > self.lo:
            raise PreconditionError("need hi > lo")

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / (self.num_nodes - 1)

    def nodes(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.num_nodes)

    def refined(self) -> "Discretization":
        return Discretization(self.lo, self.hi, 2 * self.num_nodes - 1)


@dataclass(frozen=True)
class Pencil:
    """Generalized symmetric tridiagonal pencil (A, B) after boundary elimination."""

    diag: np.ndarray
    offdiag: np.ndarray
    mass: np.ndarray
    nodes: np.ndarray  # unknown locations (boundary rows removed)
    origin_neumann: bool

    def apply_stiffness(self, v: np.ndarray) -> np.ndarray:
        out = self.diag * v
        out[:-1] += self.offdiag * v[1:]
        out[1:] += self.offdiag * v[:-1]
        return out


def _weights(spec: WarpedProductSpec, r: np.ndarray) -> np.ndarray:
    w = np.exp((spec.n - 1) * np.asarray(spec.warping.log_value(r), dtype=float))
    return w


def assemble(spec: WarpedProductSpec, a: float, disc: Discretization) -> Pencil:
    """Assemble stiffness + potential and lumped mass for the radial pencil."""
    ik = spec.interval.kind
    if ik is IntervalKind.SEGMENT:
        if disc.lo < spec.interval.lo - 1e-12 or disc.hi > spec.interval.hi + 1e-12:
            raise PreconditionError("discretization domain is not inside the segment")
    origin_neumann = False
    if disc.lo == 0.0 and ik is IntervalKind.HALF_LINE:
        report = smoothness_check(spec)
        if report.kind is not SmoothnessClass.SMOOTH_BOUNDARYLESS:
            raise PreconditionError(
                f"lo = 0 needs a smooth boundaryless product ({report.kind.value}: {report.reason})"
            )
        origin_neumann = True

    r = disc.nodes()
    h = disc.step
    mid = 0.5 * (r[:-1] + r[1:])
    w_mid = _weights(spec, mid)
    if np.any(~np.isfinite(w_mid)) or np.any(w_mid <= 0):
        raise AssemblyError("non-positive cell weight rho^{n-1}")

    if origin_neumann:
        # unknowns: nodes 0 .. N-2 (Dirichlet only at hi); half cell at the origin
        unknown = r[:-1].copy()
        pot_pts = unknown.copy()
        pot_pts[0] = 0.25 * h  # potential / mass sampled inside the half cell
        mass = np.empty_like(unknown)
        mass[1:] = h * _weights(spec, unknown[1:])
        mass[0] = 0.5 * h * float(_weights(spec, np.array([0.25 * h]))[0])
        diag = np.empty_like(unknown)
        diag[0] = w_mid[0] / h
        diag[1:] = (w_mid[:-1] + w_mid[1:])[: len(unknown) - 1] / h
        offdiag = -w_mid[: len(unknown) - 1] / h
    else:
        unknown = r[1:-1].copy()
        pot_pts = unknown
        mass = h * _weights(spec, unknown)
        diag = (w_mid[:-1] + w_mid[1:]) / h
        offdiag = -w_mid[1:-1] / h

    if np.any(mass <= 0) or np.any(~np.isfinite(mass)):
        raise AssemblyError("non-positive lumped mass")
    s_vals = np.asarray(scalar_curvature(spec, pot_pts), dtype=float)
    diag = diag + a * s_vals * mass
    return Pencil(diag=diag, offdiag=offdiag, mass=mass, nodes=unknown, origin_neumann=origin_neumann)


@dataclass(frozen=True)
class EigenResult:
    """First eigenvalue with eigenvector and convergence metadata."""

    lam1: float
    eigenvector: np.ndarray
    nodes: np.ndarray
    residual: float
    lam1_fine: float | None = None
    lam1_richardson: float | None = None

    @property
    def doubling_delta(self) -> float | None:
        if self.lam1_fine is None:
            return None
        return abs(self.lam1 - self.lam1_fine)


def _solve_pencil(pencil: Pencil, want_vector: bool) -> tuple[float, np.ndarray | None]:
    inv_sqrt = 1.0 / np.sqrt(pencil.mass)
    d = pencil.diag * inv_sqrt**2
    e = pencil.offdiag * inv_sqrt[:-1] * inv_sqrt[1:]
    try:
        if want_vector:
            vals, vecs = eigh_tridiagonal(d, e, select="i", select_range=(0, 0), lapack_driver="stebz")
            lam = float(vals[0])
            vec = vecs[:, 0] * inv_sqrt
            return lam, vec
        vals = eigvalsh_tridiagonal(d, e, select="i", select_range=(0, 0), lapack_driver="stebz")
        return float(vals[0]), None
    except Exception as exc:  # pragma: no cover - LAPACK failures are rare
        raise NumericError(f"tridiagonal eigensolve failed: {exc}") from exc


def first_eigenvalue(
    spec: WarpedProductSpec,
    a: float,
    disc: Discretization,
    compute_fine: bool = True,
) -> EigenResult:
    """Smallest eigenvalue of the assembled pencil, with a grid-doubling check."""
    pencil = assemble(spec, a, disc)
    lam, vec = _solve_pencil(pencil, want_vector=True)

    resid_vec = pencil.apply_stiffness(vec) - lam * pencil.mass * vec
    denom = float(np.linalg.norm(pencil.mass * vec))
    residual = float(np.linalg.norm(resid_vec)) / denom if denom > 0 else math.inf
    if residual > 1e-8 * (abs(lam) + 1.0):
        raise NumericError(f"eigen residual {residual:.3g} too large for lam1={lam:.6g}")

    # first eigenfunction must be single-signed
    vmax = vec[np.argmax(np.abs(vec))]
    vec = vec * math.copysign(1.0, vmax)
    if np.any(vec < -1e-8 * np.max(np.abs(vec))):
        raise NumericError("first eigenvector changes sign; solver returned a higher mode")

    lam_fine = None
    lam_rich = None
    if compute_fine:
        fine = assemble(spec, a, disc.refined())
        lam_fine, _ = _solve_pencil(fine, want_vector=False)
        lam_rich = lam_fine + (lam_fine - lam) / 3.0  # second-order extrapolation
    return EigenResult(
        lam1=lam,
        eigenvector=vec,
        nodes=pencil.nodes,
        residual=residual,
        lam1_fine=lam_fine,
        lam1_richardson=lam_rich,
    )


@dataclass(frozen=True)
class UnstableOn:
    domain: tuple[float, float]
    lam1: float
    num_nodes: int
    rows: tuple[tuple[float, float, int, float], ...] = ()  # (lo, hi, nodes, lam1)


@dataclass(frozen=True)
class NoNegativeFound:
    min_lam1: float
    at_domain: tuple[float, float]
    domains_scanned: int
    rows: tuple[tuple[float, float, int, float], ...] = ()


def geometric_schedule(
    lo: float = 1.0,
    max_doublings: int = 20,
    nodes_per_unit: float = 32.0,
    min_nodes: int = 256,
    max_nodes: int = 2**18,
) -> list[Discretization]:
    """Default scan schedule: domains [lo, lo * 2^k] with N tied to the length."""
    out = []
    for k in range(1, max_doublings + 1):
        hi = lo * 2.0**k
        n = int(min(max_nodes, max(min_nodes, round((hi - lo) * nodes_per_unit))))
        out.append(Discretization(lo, hi, n))
    return out


def stability_scan(spec: WarpedProductSpec, a: float, schedule=None):
    """Scan growing domains for a negative first eigenvalue.

    Returns ``UnstableOn`` at the first domain whose lam1 drops below the
    potential-scaled tolerance, else ``NoNegativeFound`` with the infimum
    observed (an upper-bound witness only, never a stability proof).
    """
    if schedule is None:
        schedule = geometric_schedule()
    best = math.inf
    best_dom = None
    rows = []
    for disc in schedule:
        res = first_eigenvalue(spec, a, disc, compute_fine=False)
        rows.append((disc.lo, disc.hi, disc.num_nodes, res.lam1))
        pot = np.abs(a * scalar_curvature(spec, res.nodes))
        tol_neg = 1e-8 * max(1.0, float(np.max(pot)) * (disc.hi - disc.lo))
        if res.lam1 < -tol_neg:
            return UnstableOn(
                domain=(disc.lo, disc.hi),
                lam1=res.lam1,
                num_nodes=disc.num_nodes,
                rows=tuple(rows),
            )
        if res.lam1 < best:
            best = res.lam1
            best_dom = (disc.lo, disc.hi)
    return NoNegativeFound(
        min_lam1=best, at_domain=best_dom, domains_scanned=len(rows), rows=tuple(rows)
    )
