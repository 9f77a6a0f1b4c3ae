"""Package exceptions."""


class SolverError(RuntimeError):
    """A numerical operation failed in a way that is not a usage error."""
