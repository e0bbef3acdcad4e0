"""Exception hierarchy shared by all modules."""


class TopSimpError(Exception):
    """Base class for every error raised by this package."""


class ComplexError(TopSimpError, ValueError):
    """Invalid cell complex input."""


class NonManifoldEdge(ComplexError):
    pass


class DegenerateTriangle(ComplexError):
    pass


class SizeOverflow(ComplexError):
    pass


class NotClosedSurface(ComplexError):
    pass


class NonManifoldComplex(ComplexError):
    """Raised by the pipeline when the input is not a combinatorial surface."""


class MissingVertexValue(TopSimpError, ValueError):
    pass


class MissingCellValue(TopSimpError, ValueError):
    pass


class InconsistentInput(TopSimpError, ValueError):
    """The function and the gradient field violate the consistency inequalities."""


class NotCritical(TopSimpError, ValueError):
    pass


class WrongDimension(TopSimpError, ValueError):
    pass


class NonUniquePath(TopSimpError, ValueError):
    pass


class CycleDetected(TopSimpError, ValueError):
    """The matching contains a closed V-path, so it is not a gradient field."""


class InternalInvariantViolation(TopSimpError, RuntimeError):
    pass


class UnmatchableInfinities(TopSimpError, ValueError):
    """Essential point counts differ, the bottleneck distance is infinite."""


class Infeasible(TopSimpError, ValueError):
    """Box and order constraints admit no common solution."""


class ParseError(TopSimpError, ValueError):
    pass
