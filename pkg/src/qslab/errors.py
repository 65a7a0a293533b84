"""Exception types shared across the package, mapped to CLI exit codes."""


class ConfigError(ValueError):
    """Invalid run configuration (exit code 2)."""


class InvariantViolation(RuntimeError):
    """A runtime invariant failed during a simulation (exit code 3)."""


class ConvergenceError(RuntimeError):
    """An iterative linear solve did not converge (exit code 4)."""
