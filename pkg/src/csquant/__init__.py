"""Coherent-state quantization toolkit.

Truncated Fock-space operators, coherent-state and s-ordered quantization,
Gaussian-smoothed potentials, spectra of the resulting Hamiltonians and
diatomic isotope-shift bookkeeping.
"""

from .fock import (
    FockOperator,
    PhaseSpaceScales,
    TruncationSpec,
    coherent_vector,
    displacement,
    hermitian_eigensystem,
    ladder_ops,
    number_op,
    parity_op,
    position_momentum,
)
from .quantize import (
    Polynomial,
    QuadratureRule,
    RadialAngular,
    cs_quantize_polynomial,
    cs_quantize_quadrature,
    integral_quantize,
    lower_symbol,
    povm_positivity_check,
    quantizer_kernel,
)

__version__ = "0.1.0"

__all__ = [
    "FockOperator",
    "PhaseSpaceScales",
    "TruncationSpec",
    "coherent_vector",
    "displacement",
    "hermitian_eigensystem",
    "ladder_ops",
    "number_op",
    "parity_op",
    "position_momentum",
    "Polynomial",
    "QuadratureRule",
    "RadialAngular",
    "cs_quantize_polynomial",
    "cs_quantize_quadrature",
    "integral_quantize",
    "lower_symbol",
    "povm_positivity_check",
    "quantizer_kernel",
    "__version__",
]
