"""Exception types that the command line maps to distinct exit codes."""

__all__ = ["NumericalError"]


class NumericalError(RuntimeError):
    """Computation failed for numerical reasons (singularity, non-convergence)."""
