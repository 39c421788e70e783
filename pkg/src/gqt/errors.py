"""Exception types raised across the package."""


class GqtError(Exception):
    """Base class for package errors."""


class DimensionMismatch(GqtError, ValueError):
    """Operand shapes are incompatible."""


class ConvergenceFailure(GqtError, ArithmeticError):
    """An underlying factorization did not converge."""


class NotPositiveDefinite(GqtError, ArithmeticError):
    """A Cholesky pivot was not strictly positive."""


class RankOutOfRange(GqtError, ValueError):
    """A requested truncation rank is outside the admissible range."""


class ConfigError(GqtError, ValueError):
    """Solver or run configuration is inconsistent."""


class NonFinite(GqtError, ArithmeticError):
    """A NaN or infinity appeared in an iterate."""


class ZeroReference(GqtError, ValueError):
    """Relative error requested against an all-zero reference."""


class FrameTooSmall(GqtError, ValueError):
    """A frame is smaller than the SSIM window."""


class ImpureTensor(GqtError, ValueError):
    """A quaternion tensor expected to be pure has a real part."""


class Malformed(GqtError, ValueError):
    """A binary file is truncated or has the wrong header."""


class InconsistentFrameSizes(GqtError, ValueError):
    """Frames in a directory do not share one size."""


class DimensionTooSmall(GqtError, ValueError):
    """A dimension is below the minimum an operator needs."""
