"""Continuous-time algebraic Riccati equations and their Hamiltonian matrices.

The equation handled throughout is

    A^T X + X A + Q - X D X = 0

with ``Q`` and ``D`` symmetric.  Its Hamiltonian is
``H = [[A, -D], [-Q, -A^T]]``, and the stabilizing solution is read off the
stable invariant subspace of ``H``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as spla

from .exceptions import ImaginaryAxisError, ShapeError, SolverError, StructureError
from .numerics import as_matrix, ordered_stable_schur, symmetrize

#: relative J-symmetry defect tolerated when wrapping a matrix as Hamiltonian
STRUCTURE_TOL = 1e-8
#: condition number of the upper Schur block beyond which extraction fails
MAX_U11_COND = 1e12

__all__ = [
    "AreProblem",
    "HamiltonianMatrix",
    "StabilizingSolution",
    "AssumptionReport",
    "symplectic_unit",
    "structure_defect",
    "build_hamiltonian",
    "split_hamiltonian",
    "solve_stabilizing",
    "check_assumptions",
    "residual",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class AreProblem:
    """Coefficient triple ``(A, Q, D)``; ``Q`` and ``D`` are symmetrized on ingest."""

    A: np.ndarray
    Q: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        A = as_matrix(self.A, "A", square=True)
        n = A.shape[0]
        Q = as_matrix(self.Q, "Q", square=True)
        D = as_matrix(self.D, "D", square=True)
        for name, M in (("Q", Q), ("D", D)):
            if M.shape != (n, n):
                raise ShapeError(f"{name} has shape {M.shape}, expected {(n, n)}")
        object.__setattr__(self, "A", _frozen(A))
        object.__setattr__(self, "Q", _frozen(symmetrize(Q)))
        object.__setattr__(self, "D", _frozen(symmetrize(D)))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def blocks(self):
        return self.A, self.Q, self.D


def symplectic_unit(n: int) -> np.ndarray:
    """``J = [[0, I_n], [-I_n, 0]]``."""
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    return J


def structure_defect(H: np.ndarray) -> float:
    """``||(J H)^T - J H||_F / ||H||_F`` (0 for the zero matrix)."""
    n = H.shape[0] // 2
    # J H without forming J
    JH = np.vstack([H[n:], -H[:n]])
    scale = np.linalg.norm(H)
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(JH.T - JH) / scale)


@dataclass(frozen=True)
class HamiltonianMatrix:
    """A ``2n x 2n`` real matrix certified to satisfy ``(J H)^T = J H``."""

    H: np.ndarray
    defect: float = field(init=False)

    def __post_init__(self):
        H = as_matrix(self.H, "H", square=True)
        if H.shape[0] % 2:
            raise ShapeError(f"Hamiltonian must have even order, got {H.shape[0]}")
        d = structure_defect(H)
        if d > STRUCTURE_TOL:
            raise StructureError(f"Hamiltonian structure defect {d:.3e} exceeds {STRUCTURE_TOL}")
        object.__setattr__(self, "H", _frozen(H))
        object.__setattr__(self, "defect", d)

    @property
    def n(self) -> int:
        return self.H.shape[0] // 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.H))


def build_hamiltonian(p: AreProblem) -> HamiltonianMatrix:
    A, Q, D = p.blocks()
    return HamiltonianMatrix(np.block([[A, -D], [-Q, -A.T]]))


def split_hamiltonian(h: HamiltonianMatrix, tol: float = STRUCTURE_TOL) -> AreProblem:
    """Read ``(A, Q, D)`` back off the blocks of ``h``.

    ``Q`` and ``D`` are symmetrized; the ``(2, 2)`` block must equal
    ``-A^T`` to within ``tol * ||H||``.
    """
    H = h.H
    n = h.n
    A = H[:n, :n]
    mismatch = np.linalg.norm(H[n:, n:] + A.T)
    if mismatch > tol * max(np.linalg.norm(H), 1.0):
        raise StructureError(f"(2,2) block differs from -A^T by {mismatch:.3e}")
    return AreProblem(A.copy(), -H[n:, :n], -H[:n, n:])


def residual(p: AreProblem, X) -> float:
    """Frobenius norm of ``A^T X + X A + Q - X D X``."""
    X = as_matrix(X, "X", square=True)
    if X.shape != (p.n, p.n):
        raise ShapeError(f"X has shape {X.shape}, expected {(p.n, p.n)}")
    A, Q, D = p.blocks()
    return float(np.linalg.norm(A.T @ X + X @ A + Q - X @ D @ X))


@dataclass(frozen=True)
class StabilizingSolution:
    P: np.ndarray
    closed_loop: np.ndarray
    residual: float

    @property
    def is_stabilizing(self) -> bool:
        return bool(np.all(self.closed_loop.real < 0))


def solve_stabilizing(p: AreProblem) -> StabilizingSolution:
    """Stabilizing solution via the ordered real Schur form of the Hamiltonian.

    ``P = U21 U11^{-1}`` where ``[U11; U21]`` spans the stable invariant
    subspace of ``H``.

    Raises
    ------
    ImaginaryAxisError
        ``H`` has eigenvalues on the imaginary axis (stabilizability or
        detectability fails).
    SolverError
        The stable subspace has the wrong dimension or ``U11`` is numerically
        singular.
    """
    n = p.n
    H = build_hamiltonian(p).H
    U, _, k = ordered_stable_schur(H)
    if k != n:
        raise ImaginaryAxisError(f"stable subspace has dimension {k}, expected {n}")
    U11 = U[:n, :n]
    U21 = U[n:, :n]
    cond = np.linalg.cond(U11)
    if not np.isfinite(cond) or cond > MAX_U11_COND:
        raise SolverError(f"stable subspace basis is ill conditioned (cond {cond:.3e})")
    P = spla.solve(U11.T, U21.T, check_finite=False).T
    P = symmetrize(P)
    closed = spla.eigvals(p.A - p.D @ P)
    res = residual(p, P)
    P.setflags(write=False)
    return StabilizingSolution(P, closed, res)


@dataclass(frozen=True)
class AssumptionReport:
    """PBH verdicts with the smallest tested singular values as margins."""

    stabilizable: bool
    detectable: bool
    stabilizability_margin: float
    detectability_margin: float

    @property
    def ok(self) -> bool:
        return self.stabilizable and self.detectable


def _pbh_margin(M: np.ndarray, R: np.ndarray, modes, rank_tol: float) -> tuple[bool, float]:
    n = M.shape[0]
    ok = True
    margin = np.inf
    for lam in modes:
        W = np.hstack([M - lam * np.eye(n), R])
        s = spla.svdvals(W, check_finite=False)
        margin = min(margin, float(s[n - 1]))
        if s[n - 1] <= rank_tol * max(s[0], 1.0):
            ok = False
    return ok, margin


def check_assumptions(p: AreProblem, rank_tol: float = 1e-10) -> AssumptionReport:
    """PBH rank tests over the modes of ``A`` with nonnegative real part.

    Stabilizability of ``(A, D)``: ``rank [A - lam I, D] = n``.
    Detectability of ``(Q, A)``: ``rank [A^T - conj(lam) I, Q] = n``.
    """
    A, Q, D = p.blocks()
    w = spla.eigvals(A)
    scale = max(np.linalg.norm(A), 1.0)
    unstable = w[w.real >= -1e-12 * scale]
    stab, m1 = _pbh_margin(A, D, unstable, rank_tol)
    det, m2 = _pbh_margin(A.T, Q, np.conj(unstable), rank_tol)
    return AssumptionReport(stab, det, m1, m2)
