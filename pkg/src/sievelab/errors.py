"""Exception hierarchy shared across the package.

Exit-code contract for the CLI: PreconditionError family -> 1,
CapacityError -> 2, usage problems -> 64.
"""


class SievelabError(Exception):
    """Base class for all errors raised deliberately by this package."""


class PreconditionError(SievelabError):
    """An argument or configuration violates a documented precondition."""


class CapacityError(SievelabError):
    """The request exceeds an implementation cap (memory, table size, ...)."""


class NumericError(SievelabError):
    """A numerical routine failed to reach its requested accuracy."""


class UnsupportedCaseError(SievelabError):
    """Input is structurally valid but outside the implemented scope."""
