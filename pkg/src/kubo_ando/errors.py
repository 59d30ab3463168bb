"""Exception hierarchy shared by every module of the package."""


class KuboAndoError(Exception):
    """Base class for all errors raised by this package."""


class InputError(KuboAndoError, ValueError):
    """Malformed, mis-shaped or out-of-class input."""


class DomainError(KuboAndoError, ValueError):
    """A scalar function was asked for a value outside its domain."""


class BoundaryAmbiguityError(InputError):
    """An interval endpoint sits on (or too close to) an eigenvalue or node."""


class PreconditionError(KuboAndoError, ValueError):
    """An operation was called outside the regime where it is valid."""


class ConvergenceError(KuboAndoError, ArithmeticError):
    """An iterative limit failed to settle.

    ``iterates`` holds the last two iterates for diagnosis.
    """

    def __init__(self, message, iterates=()):
        super().__init__(message)
        self.iterates = tuple(iterates)


class InconsistencyError(KuboAndoError):
    """Two representations that must agree (e.g. a function and its measure) do not."""


class SearchFailureError(KuboAndoError):
    """The witness grid was exhausted. Carries the scan table in ``table``."""

    def __init__(self, message, table=()):
        super().__init__(message)
        self.table = list(table)


class TheoremViolationError(KuboAndoError):
    """The two sides of the order-determination equivalence disagreed.

    The underlying statement is a theorem, so this always signals a numerical
    or configuration defect rather than a counterexample.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
