"""Exception types shared across the package."""


class GaborCSError(Exception):
    """Base class for all package errors."""


class InvalidInputError(GaborCSError, ValueError):
    """Malformed input: wrong length, empty vector, non-Hermitian matrix."""


class DomainError(GaborCSError, ValueError):
    """Parameters outside the domain where an operation is defined."""


class ResourceError(GaborCSError, MemoryError):
    """Requested object would exceed a configured size cap."""


class CertificateUnavailableError(GaborCSError, ArithmeticError):
    """The Gram submatrix of a support is singular."""


class NotRepresentableError(GaborCSError, ValueError):
    """No exact sparse fit exists within the requested sparsity."""


class BoundOverflowError(GaborCSError, OverflowError):
    """A bound evaluated in the log domain does not fit a double."""
