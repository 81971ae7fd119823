__all__ = ["DimensionError", "HermiticityError", "UnitarityError", "DensityMatrixError",
           "BranchCutError", "ConvergenceError", "SegmentationError", "GroupError",
           "CommutationError", "ConfigError"]

from typing import Optional


class DimensionError(ValueError):
    """Raised for non-square inputs, mismatched or non-divisible dimensions,
    and registers larger than the supported dimension cap."""


class HermiticityError(ValueError):
    """Raised when an operator expected to be Hermitian is not."""


class UnitarityError(ValueError):
    """Raised when an operator expected to be unitary is not."""


class DensityMatrixError(ValueError):
    """Raised when a matrix is not a valid density matrix."""


class BranchCutError(ValueError):
    """
    Raised by `unitary_log` when an eigenphase sits on (or within tolerance of) the
    branch cut at ±π. Outside the Magnus convergence disk the error phase has no
    meaningful principal value.

    Attributes:
        phase: The offending eigenphase, if known.
        diagnostic: T·J for the run that produced the unitary, if known.
        m: The cycle count of the run that produced the unitary, if known.
    """

    def __init__(self, message: str, phase: Optional[float] = None,
                 diagnostic: Optional[float] = None, m: Optional[int] = None) -> None:
        super().__init__(message)
        self.phase = phase
        self.diagnostic = diagnostic
        self.m = m


class ConvergenceError(ValueError):
    """Raised for inputs outside the Magnus convergence domain (h·T ≥ 1 or T·J ≥ π)."""


class SegmentationError(ValueError):
    """Raised when the segments of a switched Hamiltonian overlap, leave gaps or have
    non-positive duration."""


class GroupError(ValueError):
    """Raised when a pulse sequence does not close up to the identity or a group name
    is not known."""


class CommutationError(ValueError):
    """Raised when the pulse generators do not commute with the control Hamiltonian
    and the scenario asks to fail on it."""


class ConfigError(ValueError):
    """Raised for unreadable or invalid scenario, sweep or constants files."""
