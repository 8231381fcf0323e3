"""Exception types raised across the package."""


class DualwallError(Exception):
    """Base class for all package errors."""


class NonIntegerCoefficient(DualwallError, ValueError):
    """A linear or quadratic coefficient survived expansion as a fraction."""


class LabelCollision(DualwallError, ValueError):
    pass


class LengthMismatch(DualwallError, ValueError):
    pass


class DomainMismatch(DualwallError, ValueError):
    pass


class KindMismatch(DualwallError, ValueError):
    pass


class ParseError(DualwallError, ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class InvalidK(DualwallError, ValueError):
    pass


class NotAValidVector(DualwallError, ValueError):
    pass


class OutOfRange(DualwallError, ValueError):
    pass


class UnsupportedCombination(DualwallError, ValueError):
    pass


class InconsistentDimensions(DualwallError, ValueError):
    pass


class DimensionMismatch(DualwallError, ValueError):
    pass


class UnsupportedTarget(DualwallError, ValueError):
    pass


class NonSquare(DualwallError, ValueError):
    pass


class TooFewNodes(DualwallError, ValueError):
    pass


class GuestLargerThanHost(DualwallError, ValueError):
    pass


class LeftLargerThanRight(DualwallError, ValueError):
    pass


class DegenerateQ(DualwallError, ValueError):
    pass


class TooLarge(DualwallError, ValueError):
    pass
