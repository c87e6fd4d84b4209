"""Exception hierarchy shared by all polycond modules."""


class PolycondError(Exception):
    """Base class for every error raised by polycond."""


class InputError(PolycondError):
    """Bad user data: shapes, symmetry, non-finite entries, malformed files."""


class NumericalError(PolycondError):
    """An iterative routine failed to converge or tripped a safety cap."""


class SymmetryError(InputError):
    pass


class NotPSDError(InputError):
    pass


class ConvergenceError(NumericalError):
    pass


class CyclingError(NumericalError):
    """Simplex pivot cap exceeded."""


class LExplosionError(NumericalError):
    """Backtracking kept doubling the smoothness estimate past its cap."""


class InfeasiblePointError(InputError):
    """A point that should lie in conv(A) does not."""


class SizeError(InputError):
    pass


class DegeneratePolytopeError(InputError):
    """Fewer than two distinct atoms."""


class InsufficientDataError(InputError):
    pass


class NoDataError(PolycondError):
    """Every sample was excluded, so no estimate can be formed."""


class StaleMinimizerError(InputError):
    """The supplied minimizer fails first-order optimality."""


class ObjectiveError(NumericalError):
    pass


class DataError(InputError):
    """Inconsistent inputs to a verification routine."""


class ProblemError(InputError):
    """Problem file failed to parse or validate; message names the field."""
