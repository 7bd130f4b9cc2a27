"""Exception hierarchy shared by all hamshift modules."""


class HamshiftError(Exception):
    """Base class for every error raised by hamshift."""


class ShapeError(HamshiftError, ValueError):
    """Input has the wrong dimensions or contains non-finite entries."""


class EigenError(HamshiftError):
    """Eigensolver failed or returned eigenpairs with unacceptable residual."""


class ImaginaryAxisError(HamshiftError):
    """Eigenvalues on (or numerically near) the imaginary axis."""


class StructureError(HamshiftError):
    """Matrix violates the Hamiltonian structure (J H symmetric)."""


class SolverError(HamshiftError):
    """Stabilizing solution could not be extracted reliably."""


class AssumptionError(HamshiftError):
    """Stabilizability/detectability or definiteness precondition failed."""


class AdmissibilityError(HamshiftError, ValueError):
    """Shift magnitude or eigenpair outside the admissible range."""


class NoAdmissibleEigenvalueError(HamshiftError):
    """No eigenvalue of the Hamiltonian qualifies for the requested shift."""


class SamplingError(HamshiftError):
    """Repeated sampling failed to produce an acceptable shift magnitude."""
