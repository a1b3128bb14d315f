"""Exception types shared across the package."""


class KpcmError(Exception):
    """Base class for package errors."""


class ScalarModeError(KpcmError, TypeError):
    """Exact and approximate scalars were mixed in one operation."""


class EmptySeriesError(KpcmError):
    """A derivative consumed the last known coefficient of a series."""


class TruncationExhaustedError(KpcmError):
    """An operator product has no degrees left that are fully determined."""


class VolterraShapeError(KpcmError):
    """Operator is not of the form 1 + w_1 D^-1 + w_2 D^-2 + ..."""


class WindowIndeterminateError(KpcmError):
    """A rank decision touches the window boundary; enlarge the window."""


class BigCellError(KpcmError):
    """Subspace is not transversal to the negative half (big-cell test failed)."""


class LaxPoleError(KpcmError):
    """A flowed subspace left the big cell; the induced Lax operator has a pole.

    Carries ``order``, the jet order at which transversality first fails.
    """

    def __init__(self, message, order=None):
        super().__init__(message)
        self.order = order


class CollisionError(KpcmError):
    """Matrix has repeated eigenvalues; the coordinate chart breaks down."""


class CalibrationError(KpcmError):
    """No admissible normalization constants were found."""


class LatticePointError(KpcmError):
    """Evaluation point is (numerically) on the period lattice."""
