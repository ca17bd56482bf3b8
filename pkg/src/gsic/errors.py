"""Exception hierarchy shared by the solvers and the CLI."""


class GsicError(Exception):
    """Base class for all errors raised by this package."""


class InfeasibleTargetSIR(GsicError):
    """A group's target SIR is not below 1/nu."""


class NonPositivePathLoss(GsicError, ValueError):
    pass


class NonConvergence(GsicError):
    """An iterative routine hit its iteration cap.

    ``estimate`` carries the best value reached so far.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class InfeasibleSystem(GsicError):
    pass


class SingularSystem(GsicError):
    pass


class RecursionInfeasible(GsicError):
    """The closed-form recursion has a nonpositive denominator or Gamma."""

    def __init__(self, message, denominator=None):
        super().__init__(message)
        self.denominator = denominator


class TooManyGroups(GsicError):
    pass


class AllInfeasible(GsicError):
    pass


class DegenerateGroup(GsicError):
    """``alpha_j * Lambda_j >= 1``: the group cannot meet its target alone."""


class ParseError(GsicError):
    pass


class ValidationError(GsicError):
    def __init__(self, message, path=None):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
