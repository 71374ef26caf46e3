"""Typed errors shared across the library."""


class DegenerateGradientError(ArithmeticError):
    """Gradient (or pairwise gradient difference) norm fell below the tolerance.

    Raised instead of dividing by a near-zero norm. Callers may catch this
    and mark the attack as failed.
    """


class OracleNotFoundError(RuntimeError):
    """Brute-force oracle found no adversarial point within its search budget."""


class ConfigError(ValueError):
    """Invalid experiment configuration (bad field, missing file, duplicate label)."""
