"""Exception types shared across the package."""


class LatticeError(ValueError):
    """Invalid code distance, address or lattice mismatch."""


class InvariantViolation(RuntimeError):
    """An internal consistency check failed (e.g. non-empty residual syndrome)."""


class MalformedMessage(ValueError):
    """A compressed syndrome message failed validation."""


class SolverLimitError(ValueError):
    """A solver was asked for an instance outside its supported size."""
