"""Dense real linear-algebra kernel.

Thin, validated wrappers around LAPACK (via scipy) that the rest of the
package consumes: right eigenpairs with real/complex classification, an
ordered real Schur form with the stable block first, numeric kernels and
symmetric eigenvalue extremes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as spla
from scipy.optimize import linear_sum_assignment

from .exceptions import EigenError, ImaginaryAxisError, ShapeError

EPS = np.finfo(float).eps

#: relative tolerance deciding that an eigenvalue is real
IMAG_TOL = 1e-9
#: relative tolerance separating zero from nonzero symmetric eigenvalues
ZERO_TOL = 1e-10
#: eigenvalues with |Re| below this times ||M|| count as imaginary-axis
AXIS_TOL = 1e-10
#: largest imaginary part discarded when materializing a real eigenvector
REAL_VECTOR_TOL = 1e-8

__all__ = [
    "EigenPair",
    "KernelBasis",
    "SymExtremes",
    "as_matrix",
    "eig_all",
    "ordered_stable_schur",
    "kernel_basis",
    "sym_eig_extremes",
    "symmetrize",
    "is_psd",
    "min_eig",
    "matched_spectrum_distance",
    "residual_tolerance",
]


def as_matrix(M, name: str = "matrix", square: bool = False) -> np.ndarray:
    """Return ``M`` as a finite 2-D float array, raising :class:`ShapeError` otherwise."""
    try:
        arr = np.array(M, dtype=float, ndmin=2, copy=True)
    except (ValueError, TypeError) as exc:
        raise ShapeError(f"{name} is not a numeric matrix: {exc}") from exc
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ShapeError(f"{name} contains NaN or Inf entries")
    if square and arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {arr.shape}")
    return arr


def symmetrize(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def residual_tolerance(order: int) -> float:
    """Relative residual bound accepted for computed eigenpairs."""
    return 1e3 * EPS * max(order, 1)


@dataclass(frozen=True)
class EigenPair:
    """Eigenvalue with a unit-norm eigenvector.

    ``vector`` is a real array when ``is_real`` is set, complex otherwise.
    """

    value: complex
    vector: np.ndarray
    side: str = "right"
    is_real: bool = False

    @property
    def real_value(self) -> float:
        return float(np.real(self.value))

    def residual(self, M: np.ndarray) -> float:
        v = self.vector
        if self.side == "right":
            return float(np.linalg.norm(M @ v - self.value * v))
        return float(np.linalg.norm(v @ M - self.value * v))


@dataclass(frozen=True)
class KernelBasis:
    basis: np.ndarray
    rank_tol: float
    rank: int

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True)
class SymExtremes:
    """Signed and nonzero eigenvalue extremes of a symmetric matrix.

    The nonzero extremes are ``None`` when every eigenvalue is numerically zero.
    """

    lam_min: float
    lam_max: float
    nonzero_min: Optional[float]
    nonzero_max: Optional[float]


def _realify(v: np.ndarray) -> Optional[np.ndarray]:
    # rotate so the largest entry is real, then drop the imaginary part
    k = int(np.argmax(np.abs(v)))
    phase = v[k] / abs(v[k])
    w = v / phase
    if np.linalg.norm(w.imag) > REAL_VECTOR_TOL:
        return None
    w = w.real
    return w / np.linalg.norm(w)


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    return -v if v[k] < 0 else v


def _refine(M: np.ndarray, pair: EigenPair) -> EigenPair:
    # LAPACK occasionally returns a poor vector (badly scaled input); take
    # the smallest right singular vector of M - lam I instead
    lam = pair.value.real if pair.is_real else pair.value
    _, _, Vh = spla.svd(M - lam * np.eye(M.shape[0]))
    v = Vh[-1].conj()
    if pair.is_real:
        rv = _realify(v)
        if rv is not None:
            return EigenPair(pair.value, _canonical_sign(rv), "right", True)
    return EigenPair(pair.value, v / np.linalg.norm(v), "right", False)


def eig_all(M) -> list[EigenPair]:
    """All right eigenpairs of a real square matrix.

    Eigenvalues with ``|Im| <= IMAG_TOL * (1 + |lambda|)`` whose eigenvector
    admits a real representative are returned as real pairs with a real,
    sign-normalized unit vector (largest-magnitude entry positive).  Complex
    eigenvalues come in conjugate pairs, as LAPACK delivers them.

    Raises
    ------
    ShapeError
        ``M`` is not square or not finite.
    EigenError
        LAPACK did not converge, or a returned pair fails the residual check.
    """
    M = as_matrix(M, "M", square=True)
    n = M.shape[0]
    try:
        w, V = spla.eig(M, check_finite=False)
    except spla.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise EigenError(f"eigensolver did not converge: {exc}") from exc

    scale = max(np.linalg.norm(M), 1.0)
    tol = residual_tolerance(n) * scale
    pairs = []
    for lam, v in zip(w, V.T):
        v = v / np.linalg.norm(v)
        is_real = abs(lam.imag) <= IMAG_TOL * (1.0 + abs(lam))
        if is_real:
            rv = _realify(v)
            if rv is None:
                # numerically a close complex pair; keep it complex
                is_real = False
            else:
                lam = complex(lam.real, 0.0)
                v = _canonical_sign(rv)
        pair = EigenPair(complex(lam), v, "right", is_real)
        res = pair.residual(M)
        if res > tol:
            pair = _refine(M, pair)
            res = pair.residual(M)
        if res > tol:
            raise EigenError(
                f"eigenpair residual {res:.3e} exceeds {tol:.3e} for eigenvalue {lam}"
            )
        pairs.append(pair)
    return pairs


def ordered_stable_schur(M) -> tuple[np.ndarray, np.ndarray, int]:
    """Real Schur form ``M = U T U^T`` with the open-left-half-plane block first.

    Returns ``(U, T, k)`` where ``k`` is the number of stable eigenvalues, so
    ``U[:, :k]`` spans the stable invariant subspace.

    Raises
    ------
    ImaginaryAxisError
        Some eigenvalue has ``|Re| <= AXIS_TOL * ||M||``.
    """
    M = as_matrix(M, "M", square=True)
    scale = max(np.linalg.norm(M), 1.0)
    w = spla.eigvals(M, check_finite=False)
    near = np.abs(w.real) <= AXIS_TOL * scale
    if np.any(near):
        raise ImaginaryAxisError(
            f"{int(near.sum())} eigenvalue(s) on or near the imaginary axis, e.g. {w[near][0]}"
        )
    T, U, k = spla.schur(M, output="real", sort="lhp", check_finite=False)
    return U, T, int(k)


def kernel_basis(M, rank_tol: float = ZERO_TOL) -> KernelBasis:
    """Orthonormal basis of the numeric null space of ``M``.

    Singular values below ``rank_tol * sigma_max`` are treated as zero.
    """
    M = as_matrix(M, "M")
    cols = M.shape[1]
    s = spla.svdvals(M, check_finite=False)
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        return KernelBasis(np.eye(cols), rank_tol, 0)
    basis = spla.null_space(M, rcond=rank_tol, check_finite=False)
    return KernelBasis(basis, rank_tol, cols - basis.shape[1])


def sym_eig_extremes(S, zero_tol: float = ZERO_TOL, sym_tol: float = 1e-8) -> SymExtremes:
    S = as_matrix(S, "S", square=True)
    scale = np.linalg.norm(S)
    if np.linalg.norm(S - S.T) > sym_tol * max(scale, 1.0):
        raise ShapeError("matrix is not symmetric within tolerance")
    lam = spla.eigvalsh(symmetrize(S), check_finite=False)
    top = np.max(np.abs(lam))
    nz = lam[np.abs(lam) > zero_tol * top] if top > 0 else lam[:0]
    return SymExtremes(
        float(lam[0]),
        float(lam[-1]),
        float(nz[0]) if nz.size else None,
        float(nz[-1]) if nz.size else None,
    )


def min_eig(S) -> float:
    return float(spla.eigvalsh(symmetrize(np.asarray(S, dtype=float)), subset_by_index=[0, 0])[0])


def is_psd(S, tol: float = 1e-10) -> bool:
    """``True`` if ``lambda_min(S) >= -tol * max(1, ||S||_2)``."""
    S = symmetrize(np.asarray(S, dtype=float))
    if S.size == 0:
        return True
    lam = spla.eigvalsh(S, check_finite=False)
    return bool(lam[0] >= -tol * max(1.0, np.max(np.abs(lam))))


def matched_spectrum_distance(a, b) -> float:
    """Largest distance after optimally pairing two eigenvalue multisets."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size != b.size:
        raise ShapeError(f"spectra have different sizes {a.size} and {b.size}")
    if a.size == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())
