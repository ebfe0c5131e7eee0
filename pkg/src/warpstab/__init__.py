"""Stability of the operators Delta - a*S on warped products and minimal cones.

The package decides, by closed-form theorem checking and by numerics,
whether the scalar-curvature Schrodinger operator is stable on a warped
product I x_rho F, produces machine-checkable instability certificates,
computes first Dirichlet eigenvalues of the radial reduction, and
reproduces the stability thresholds and the (growth, a) stability diagram
as data.
"""

__version__ = "0.1.0"

from .certificates import (
    InstabilityCertificate,
    NotFound,
    SearchBudget,
    build_f_QR,
    build_f_Rbeta,
    search_instability,
)
from .cones import (
    ConeSpec,
    ConeTestFunction,
    cone_quadform,
    cone_test_function,
    simons_reference,
    slope_coefficient,
    slope_estimate,
)
from .errors import (
    AssemblyError,
    ConfigError,
    DomainError,
    FamilyInapplicableError,
    InsufficientDataError,
    NumericError,
    PreconditionError,
    QuadratureError,
    SingularPointError,
    WarpStabError,
)
from .geometry import (
    ConstantWarping,
    CoshWarping,
    FiberSpec,
    GrowthDecomposition,
    Interval,
    IntervalKind,
    LinearWarping,
    PowerLogWarping,
    PowerWarping,
    SampledWarping,
    SinhWarping,
    SmoothnessClass,
    WarpedProductSpec,
    WarpingFunction,
    eval_rho,
    growth_exponent,
    scalar_curvature,
    smoothness_check,
    sphere_area,
    theorem_318_condition,
    volume_ball,
)
from .quadform import (
    QuadratureSpec,
    RadialTestFunction,
    a_decomposition,
    bump_function,
    hat_function,
    norm_squared,
    quad_form_direct,
    quad_form_ibp,
    rayleigh_quotient,
)
from .spectrum import (
    Discretization,
    EigenResult,
    NoNegativeFound,
    UnstableOn,
    assemble,
    first_eigenvalue,
    geometric_schedule,
    stability_scan,
)
from .thresholds import (
    StabilityVerdict,
    VerdictStatus,
    catenoid_value,
    classify,
    cone_rigidity_bound,
    convex_end_bound,
    diagram,
    growth_threshold,
    h_curve,
    linear_lower_threshold,
    linear_upper_threshold,
    power_spec,
    simons_cone_value,
    slope_stability_bound,
    surface_growth_bound,
    yamabe_bound,
)
