"""Exception types raised across the package."""


class FIChainError(Exception):
    """Base class for all package errors."""


class DomainError(FIChainError, ValueError):
    """Input outside the domain where the requested quantity exists."""


class NoCriticalPointError(DomainError):
    """The prepotential ascent diverged: the potential has no minimum in the chamber."""


class ConvergenceError(FIChainError, RuntimeError):
    """An iterative method stopped before reaching its tolerance."""


class CapExceededError(FIChainError, RuntimeError):
    """A configured size cap (states, levels, matrix dimension) would be exceeded."""


class VerificationError(FIChainError):
    """Two independent computations that must agree did not."""
