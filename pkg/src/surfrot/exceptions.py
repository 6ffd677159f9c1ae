"""Exception hierarchy shared by all modules."""


class SurfRotError(Exception):
    """Base class for every error raised by the package."""


class GeometryError(SurfRotError, ValueError):
    pass


class OutsideDisk(GeometryError):
    """A point does not lie strictly inside the unit disk."""


class DegenerateEndpoints(GeometryError):
    """The two inputs of a geodesic coincide."""


class NotLoxodromic(GeometryError):
    pass


class NumericalOverflow(SurfRotError, ArithmeticError):
    """A value left the range representable by the scaled isometry."""


class GenusTooSmall(SurfRotError, ValueError):
    pass


class ReductionStalled(SurfRotError, RuntimeError):
    pass


class DimensionMismatch(SurfRotError, ValueError):
    pass


class BudgetExceeded(SurfRotError, RuntimeError):
    pass


class CatalogInsufficient(SurfRotError, RuntimeError):
    pass


class StepBlowup(SurfRotError, ArithmeticError):
    """An integrator stage left the disk; the step size is too large."""


class UnknownScenario(SurfRotError, KeyError):
    pass


class NoEscape(SurfRotError, ValueError):
    """The orbit does not move away from its seed fast enough."""


class CoincidentLimits(SurfRotError, ValueError):
    pass


class DegenerateSlope(SurfRotError, ValueError):
    pass


class ConfigInvalid(SurfRotError, ValueError):
    pass


class EmitRefused(SurfRotError, ValueError):
    """A report contains a value that cannot be emitted faithfully (NaN or infinity)."""
