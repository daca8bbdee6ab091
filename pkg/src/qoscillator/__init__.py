"""q-deformed harmonic oscillators of Macfarlane and Dubna type.

Spectra, ladder operators built from imaginary shifts, q-Hermite functions,
normalized eigenfunctions with their inner product, and residual suites for
the defining difference conditions.
"""

from .analytic import AnalyticMap, GaussianSuperposition, RedundantFactorSpec
from .core import (
    DeformationParams,
    Kind,
    energy,
    energy_via_recursion,
    log_normalization,
    macfarlane_bounds,
    make_params,
    normalization,
    params_from_q,
    q_binomial,
    spacing_ratio,
    spectrum,
)
from .errors import (
    ConfigurationError,
    ConvergenceError,
    DomainError,
    PoleError,
    QOscError,
    RangeError,
    ResourceGuardError,
    SingularOperatorError,
)
from .hermite import Convention, hermite
from .operators import LadderContext, apply_hamiltonian, apply_lowering, apply_raising, apply_T
from .states import OscillatorModel, QuadratureSpec, eigenfunction, gram_matrix, inner_product
from .verify import ResidualReport, verification_suite

__version__ = "0.1.0"

__all__ = [
    "AnalyticMap",
    "GaussianSuperposition",
    "RedundantFactorSpec",
    "DeformationParams",
    "Kind",
    "energy",
    "energy_via_recursion",
    "log_normalization",
    "macfarlane_bounds",
    "make_params",
    "normalization",
    "params_from_q",
    "q_binomial",
    "spacing_ratio",
    "spectrum",
    "ConfigurationError",
    "ConvergenceError",
    "DomainError",
    "PoleError",
    "QOscError",
    "RangeError",
    "ResourceGuardError",
    "SingularOperatorError",
    "Convention",
    "hermite",
    "LadderContext",
    "apply_hamiltonian",
    "apply_lowering",
    "apply_raising",
    "apply_T",
    "OscillatorModel",
    "QuadratureSpec",
    "eigenfunction",
    "gram_matrix",
    "inner_product",
    "ResidualReport",
    "verification_suite",
]
