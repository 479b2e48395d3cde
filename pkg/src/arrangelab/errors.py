"""Exception types shared across the package."""


class InvalidInput(ValueError):
    """Input violates a documented precondition (non-finite, wrong shape, bad range)."""


class DegeneratePair(ValueError):
    """Two sphere points are (anti)parallel within tolerance; they span no plane."""

    def __init__(self, message, indices=None):
        super().__init__(message)
        self.indices = indices


class ConvergenceFailure(RuntimeError):
    """An iterative solve hit its iteration cap before reaching tolerance."""


class UnsupportedDimension(ValueError):
    """Operation is only valid for quadrics in >= 3 variables (m >= 3)."""


class DegeneratePencil(ValueError):
    """The two quadratic forms are proportional; the pencil is a single point."""


class Timeout(RuntimeError):
    """A draw-until-coverage loop exceeded its draw budget (reported, not fatal)."""

    def __init__(self, message, draws=None):
        super().__init__(message)
        self.draws = draws
