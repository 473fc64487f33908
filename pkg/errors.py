"""
Exception hierarchy for TiltStress

Library code raises these; only the command line layer turns them into exit
codes (InvalidInput -> 2, InfeasibleProblem -> 3, anything else -> 1).
"""


class TiltStressError(Exception):
    """Base class for every library error"""


class InvalidInput(TiltStressError, ValueError):
    """A precondition on user-supplied data or parameters failed"""


class InvalidDistribution(InvalidInput):
    pass


class InvalidParameter(InvalidInput):
    pass


class NonPositiveEps(InvalidInput):
    pass


class MismatchedSupport(InvalidInput):
    pass


class SupportTooLarge(InvalidInput):
    pass


class NotAbsolutelyContinuous(InvalidInput):
    pass


class InfeasibleProblem(TiltStressError):
    """The inputs are valid but the requested quantity does not exist"""


class FlatThreshold(InfeasibleProblem):
    """F(a) is 0 or 1, so no tilt at a changes the law"""


class NoBoundary(InfeasibleProblem):
    pass


class TargetUnreachable(InfeasibleProblem):
    pass


class NumericalFailure(TiltStressError):
    pass


class DepletionUnderflow(NumericalFailure):
    """exp(-1/lambda) underflowed to 0 while 0 < F(a) < 1"""


class BracketFailure(NumericalFailure):
    pass
