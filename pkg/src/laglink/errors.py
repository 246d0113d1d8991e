"""Exception types raised across the package."""


class LaglinkError(Exception):
    """Base class for every error raised by laglink."""


# geometry
class NonFiniteInput(LaglinkError, ValueError):
    pass


class OpenCurve(LaglinkError, ValueError):
    pass


class NotImmersed(LaglinkError, ValueError):
    pass


class PointOnCurve(LaglinkError, ValueError):
    pass


class DegenerateFrame(LaglinkError, ValueError):
    pass


class NonPositiveRadius(LaglinkError, ValueError):
    pass


# movies and constructions
class MovieInvalid(LaglinkError, ValueError):
    pass


class ClosureDefectExceeded(LaglinkError, ValueError):
    pass


class BadParams(LaglinkError, ValueError):
    pass


class AlphaTooSmall(BadParams):
    pass


class DeltaTooSmall(BadParams):
    pass


class BadHeight(LaglinkError, ValueError):
    pass


# lattice
class NoMaslovTwoClass(LaglinkError, ValueError):
    pass


class NoPositiveArea(LaglinkError, ValueError):
    pass


class Monotone(LaglinkError, ValueError):
    pass


class NonMonotoneInput(LaglinkError, ValueError):
    pass


class NonPositive(LaglinkError, ValueError):
    pass


class OrderViolation(LaglinkError, ValueError):
    pass


# linking
class NonTransversalCrossing(LaglinkError, ValueError):
    pass


class LoopTouchesTorus(LaglinkError, ValueError):
    pass


class OutOfValidityBox(LaglinkError, ValueError):
    pass


# buildings
class NoPunctures(LaglinkError, ValueError):
    pass


class NotAPlane(LaglinkError, ValueError):
    pass


class CoverInconsistent(LaglinkError, ValueError):
    """An impossible branched cover. ``rule`` names the check that failed."""

    def __init__(self, message: str, rule: str = "cover-riemann-hurwitz"):
        super().__init__(message)
        self.rule = rule


class MatchingInvalid(LaglinkError, ValueError):
    def __init__(self, message: str, rule: str = "orbit-matching"):
        super().__init__(message)
        self.rule = rule


class NonPositiveArea(LaglinkError, ValueError):
    pass


class SchemaError(LaglinkError, ValueError):
    """Malformed input document (JSON/CSV)."""
