"""Exception hierarchy.

Every error raised by the library derives from :class:`ReflabError`. The three
intermediate classes map onto CLI exit codes: input validation (2), numeric
failures such as a hypothesis of a limit theorem not holding (3), and failed
property checks that should be impossible (4).
"""


class ReflabError(Exception):
    exit_code = 1


class ValidationError(ReflabError, ValueError):
    exit_code = 2


class NumericError(ReflabError, ArithmeticError):
    exit_code = 3


class PropertyViolation(ReflabError):
    exit_code = 4


# algebra
class DegreeZero(ValidationError):
    pass


class ZeroConstantTerm(ValidationError):
    pass


class NotSquarefree(ValidationError):
    pass


class NoRealDominantRoot(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class BoundaryIndeterminate(NumericError):
    pass


# mahler / filter
class ZeroPolynomial(ValidationError):
    pass


class ScheduleTooShort(ValidationError):
    pass


class UnsupportedDimension(ValidationError):
    pass


class NoExactCoordinates(ValidationError):
    pass


class NotIndependentBasis(ValidationError):
    pass


# refinable
class GridTooSmall(ValidationError):
    pass


class ZeroHit(NumericError):
    def __init__(self, k, value=0.0):
        super().__init__(f"|fhat(alpha*lambda^k)| vanished numerically at k={k} (|fhat|={value:.3g})")
        self.k = k
        self.value = value


# orbit
class NotPV(ValidationError):
    pass


class ZeroVector(ValidationError):
    pass


class ZeroOnCycle(NumericError):
    def __init__(self, state):
        super().__init__(f"trigonometric polynomial vanishes on cycle state {state}")
        self.state = state


# quasilattice
class NotUnit(ValidationError):
    pass


class TooFewPoints(ValidationError):
    pass


class BoundaryAmbiguous(NumericError):
    pass


class WindowTooLarge(ValidationError):
    pass


class NoWitness(PropertyViolation):
    pass


class TranslationOutsideXi(PropertyViolation):
    def __init__(self, index, coords, conjugates):
        super().__init__(
            f"translation {index} with coordinates {list(coords)} is not in the "
            f"contracted quasilattice (conjugates {conjugates})"
        )
        self.index = index
        self.coords = tuple(coords)
