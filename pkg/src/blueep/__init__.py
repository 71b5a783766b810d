"""Exceptional points of a blue-detuned three-mode optomechanical system.

The effective non-Hermitian Hamiltonian of two cavities coupled through a
shared mechanical resonator has a cubic characteristic polynomial; its
discriminant locates second- and third-order exceptional points. The
modules cover the cubic itself, the physical model, the
pseudo-Hermitian parameter sets, EP location, sweeps and phase diagrams,
classical stability, and a command-line interface.
"""

from .com_model import (
    DEFAULT_OMEGA_B,
    EffectiveHamiltonian,
    PhysicalParams,
    ReducedParams,
    build_h_eff,
    char_cubic,
    reduce,
    rwa_validity,
    spectrum,
    steady_state,
)
from .complex_poly import (
    CubicCoefficients,
    DiscriminantReport,
    cubic_discriminant,
    poly_roots_oracle,
    solve_cubic,
)
from .ep_locator import (
    Ep3Criticals,
    EpKind,
    Tolerances,
    classify_point,
    ep3_criticals,
    find_ep2,
    lambda_ep3,
    line_family,
)
from .errors import (
    BlueEPError,
    Ep3InfeasibleEtaError,
    InfeasibleCouplingError,
    InfeasibleError,
    InfeasibleLambdaError,
    InvalidInputError,
    NotApplicableError,
    NumericFailureError,
    UndefinedLambdaError,
)
from .pseudo_hermitian import (
    MrRegime,
    enforce_ph,
    enforce_ph_balanced,
    is_pseudo_hermitian,
    min_coupling,
    mr_regime,
    ph_residuals,
)
from .stability import build_drift_matrix, char_coeffs, routh_hurwitz, stability_report
from .sweep import AxisSpec, broken_ph_sweep, eigen_sweep, min_gap, phase_diagram

__version__ = "0.1.0"

__all__ = [
    "AxisSpec",
    "BlueEPError",
    "CubicCoefficients",
    "DEFAULT_OMEGA_B",
    "DiscriminantReport",
    "EffectiveHamiltonian",
    "Ep3Criticals",
    "Ep3InfeasibleEtaError",
    "EpKind",
    "InfeasibleCouplingError",
    "InfeasibleError",
    "InfeasibleLambdaError",
    "InvalidInputError",
    "MrRegime",
    "NotApplicableError",
    "NumericFailureError",
    "PhysicalParams",
    "ReducedParams",
    "Tolerances",
    "UndefinedLambdaError",
    "broken_ph_sweep",
    "build_drift_matrix",
    "build_h_eff",
    "char_coeffs",
    "char_cubic",
    "classify_point",
    "cubic_discriminant",
    "eigen_sweep",
    "enforce_ph",
    "enforce_ph_balanced",
    "ep3_criticals",
    "find_ep2",
    "is_pseudo_hermitian",
    "lambda_ep3",
    "line_family",
    "min_coupling",
    "min_gap",
    "mr_regime",
    "ph_residuals",
    "phase_diagram",
    "poly_roots_oracle",
    "reduce",
    "routh_hurwitz",
    "rwa_validity",
    "solve_cubic",
    "spectrum",
    "stability_report",
    "steady_state",
    "__version__",
]
