"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside the domain of a special function or law."""


class ConvergenceError(RuntimeError):
    """An iterative numerical routine failed to converge."""


class DegenerateLawError(ValueError):
    """The near-zero cascade law is undefined because m_G == m_g."""
