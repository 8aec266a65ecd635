"""Exception hierarchy shared by every module.

The CLI maps :class:`InvalidInputError` to exit code 2 and
:class:`NumericalError` to exit code 3.
"""


class NVScatterError(Exception):
    """Base class for all toolkit errors."""


class InvalidInputError(NVScatterError, ValueError):
    """A precondition on user-supplied input failed."""


class BoundaryLeakError(InvalidInputError):
    """A sampled field is not small enough on the boundary ring of the box."""


class DegenerateFitError(InvalidInputError):
    """Too few significant radial shells to fit a decay rate."""


class OffShellError(InvalidInputError):
    """A momentum or torus point is off the energy shell / unit circle."""


class AnnulusError(InvalidInputError):
    """The far-field fitting annulus overlaps the potential's support."""


class NumericalError(NVScatterError, RuntimeError):
    """Solver conditioning or time-stepping instability."""


class SingularSystemError(NumericalError):
    pass


class InstabilityError(NumericalError):
    pass
