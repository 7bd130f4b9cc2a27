"""Disguise algebraic Riccati equations by Hamiltonian eigenvalue shifts.

The stabilizing solution of ``A^T X + X A + Q - X D X = 0`` is determined by
the stable invariant subspace of ``H = [[A, -D], [-Q, -A^T]]``.  Moving
eigenvalues of ``H`` with structured rank-two updates changes ``A``, ``Q``
and ``D`` but leaves that subspace, and hence the solution, intact.
"""

from .are import (
    AreProblem,
    HamiltonianMatrix,
    StabilizingSolution,
    build_hamiltonian,
    check_assumptions,
    residual,
    solve_stabilizing,
    split_hamiltonian,
)
from .bench import (
    BenchmarkSpec,
    LqrProblem,
    are_to_lqr_realization,
    case_study,
    generate_benchmark,
    lqr_to_are,
)
from .exceptions import (
    AdmissibilityError,
    AssumptionError,
    HamshiftError,
    NoAdmissibleEigenvalueError,
)
from .privacy import (
    PrivacyReport,
    ambiguity_pair,
    attack_simulate,
    confusion_member,
    privacy_measures,
)
from .realizability import algorithm2, fg_matrices, prop1_verdict, prop2_window
from .shift import (
    ShiftPlan,
    ShiftRecord,
    ShiftWindow,
    complex_shift,
    perturb,
    rado_oracle,
    real_shift,
)

__version__ = "0.1.0"

__all__ = [
    "AreProblem", "HamiltonianMatrix", "StabilizingSolution", "build_hamiltonian",
    "check_assumptions", "residual", "solve_stabilizing", "split_hamiltonian",
    "BenchmarkSpec", "LqrProblem", "are_to_lqr_realization", "case_study",
    "generate_benchmark", "lqr_to_are", "AdmissibilityError", "AssumptionError",
    "HamshiftError", "NoAdmissibleEigenvalueError", "PrivacyReport", "ambiguity_pair",
    "attack_simulate", "confusion_member", "privacy_measures", "algorithm2",
    "fg_matrices", "prop1_verdict", "prop2_window", "ShiftPlan", "ShiftRecord",
    "ShiftWindow", "complex_shift", "perturb", "rado_oracle", "real_shift",
]
