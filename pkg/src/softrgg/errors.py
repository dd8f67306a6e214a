"""Exception hierarchy shared by all softrgg modules."""


class SoftRGGError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameterError(SoftRGGError, ValueError):
    pass


class InfeasibleTargetError(SoftRGGError, ValueError):
    """A requested mean degree cannot be reached by any link range."""


class ModeMismatchError(SoftRGGError, ValueError):
    """Operation requested on a boundary mode it is not defined for."""


class AssumptionViolatedError(SoftRGGError, ValueError):
    """The connection function does not satisfy the analytic assumptions."""


class UnsupportedFamilyError(SoftRGGError, TypeError):
    pass


class UnsupportedRegimeError(SoftRGGError, ValueError):
    pass


class DegenerateInputError(SoftRGGError, ValueError):
    pass


class ConvergenceError(SoftRGGError, ArithmeticError):
    pass
