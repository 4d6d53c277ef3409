"""Exception types raised across the package."""


class DomainError(ValueError):
    """A scalar parameter lies outside its admissible range."""


class InvalidState(ValueError):
    """A matrix is not a valid two-qubit density matrix within tolerance."""


class NotXState(ValueError):
    """A density matrix has weight outside its diagonal and anti-diagonal."""


class NonConvergence(RuntimeError):
    """The QR eigenvalue iteration hit its iteration cap."""
