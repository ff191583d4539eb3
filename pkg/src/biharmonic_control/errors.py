"""Exception types raised across the package.

Every error carries a short machine-readable ``code`` used by the CLI when it
emits error JSON.
"""


class BiharmonicError(Exception):
    code = "error"


class NonNegativeGamma(BiharmonicError, ValueError):
    code = "non_negative_gamma"


class NonPositiveLength(BiharmonicError, ValueError):
    code = "non_positive_length"


class LambdaBelowSpectralFloor(BiharmonicError, ValueError):
    code = "lambda_below_spectral_floor"


class NonPositiveEigenvalue(BiharmonicError, ValueError):
    code = "non_positive_eigenvalue"


class InsufficientModes(BiharmonicError, ValueError):
    code = "insufficient_modes"


class GridTooCoarse(BiharmonicError, ValueError):
    code = "grid_too_coarse"


class DimensionMismatch(BiharmonicError, ValueError):
    code = "dimension_mismatch"


class StepTooLarge(BiharmonicError, ValueError):
    code = "step_too_large"


class QuadratureUnderResolved(BiharmonicError, ValueError):
    code = "quadrature_under_resolved"


class UnresolvedSignConvention(BiharmonicError, RuntimeError):
    code = "unresolved_sign_convention"


class NotResonantPair(BiharmonicError, ValueError):
    code = "not_resonant_pair"


class NotResonant(BiharmonicError, ValueError):
    code = "not_resonant"


class ResonantParameters(BiharmonicError, ValueError):
    code = "resonant_parameters"


class SingularGram(BiharmonicError, ArithmeticError):
    """Moment system cannot be solved because the Gram matrix is singular.

    ``incompatibility`` is the relative least-squares residual of the right-hand
    side, i.e. how far ``d`` is from the range of ``G``.
    """

    code = "singular_gram"

    def __init__(self, message, incompatibility=None):
        super().__init__(message)
        self.incompatibility = incompatibility


class ConfigError(BiharmonicError, ValueError):
    code = "invalid_config"
