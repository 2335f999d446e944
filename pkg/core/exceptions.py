# core/exceptions.py


class JensenError(Exception):
    """Base class for every error raised by the core library."""


class InputError(JensenError, ValueError):
    """Malformed values: wrong lengths, n < 2, weights not summing to 1, negative modulus argument."""


class DomainError(JensenError, ValueError):
    """A point, barycenter or derivative request falls outside a function's domain."""


class PreconditionError(JensenError):
    """A theorem's hypotheses fail for the given instance."""

    def __init__(self, message, violations=None):
        super().__init__(message)
        self.violations = list(violations or [])

    def __str__(self):
        base = super().__str__()
        if not self.violations:
            return base
        return f"{base}: {'; '.join(self.violations)}"


class CertificationError(PreconditionError):
    """An (f, phi) pair failed uniform-convexity certification where one was required."""
