"""Error taxonomy shared by all constructions and checkers.

Every exception carries the offending residual (or rank data) so a caller can
log what was measured, not just that something failed.
"""


class QgwError(Exception):
    """Base class for all workbench errors."""


class DimensionError(QgwError):
    """Shapes of inputs are inconsistent."""


class NumericError(QgwError):
    """A numerical precondition failed (not PSD, not Hermitian, singular)."""


class FaithfulnessError(QgwError):
    """A state or representation required to be faithful is not."""


class PreconditionError(QgwError):
    """A structural precondition failed (not an algebra, no bicyclic vector,
    unlinked data, ...)."""


class MembershipError(QgwError):
    """An element required to lie in a subspace or algebra does not."""


class NotWellDefinedError(QgwError):
    """An operator does not descend to a quotient, or a defining linear
    system has no (unique) solution."""


class InvalidFactorizationError(QgwError):
    """A candidate set of intertwiners fails the factorization axioms."""


class InternalInconsistencyError(QgwError):
    """Two independently certified criteria that a theorem makes equivalent
    disagreed numerically.  Always a bug or an out-of-tolerance input."""


class FormatError(QgwError):
    """A serialized object does not follow its declared layout.  The message
    names the offending path inside the document."""
