"""Structured eigenvalue shifts of Hamiltonian matrices.

A real shift moves the pair ``{lam, -lam}`` of a negative real eigenvalue to
``{lam + delta, -lam - delta}`` by the rank-two update
``H + delta * (v p^T - q q^T)`` with ``q = J v`` and ``p = (J + I) v``.  A
complex shift moves the real parts of a quadruple ``{mu, -mu, conj(mu),
-conj(mu)}`` by ``delta``.  Both updates keep the Hamiltonian structure and,
as long as the shifted eigenvalues stay on their side of the imaginary axis,
keep the stable invariant subspace of ``H`` and therefore the stabilizing
Riccati solution.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np
import scipy.linalg as spla

from .are import HamiltonianMatrix, build_hamiltonian, split_hamiltonian
from .exceptions import (
    AdmissibilityError,
    NoAdmissibleEigenvalueError,
    SamplingError,
    ShapeError,
)
from .numerics import EigenPair, eig_all, residual_tolerance

#: |v_j^T J v_-j| must exceed this times ||v_j|| ||v_-j||
THETA_TOL = 1e-8
#: eigenvalues closer than this (relative to ||H||) are treated as one multiple eigenvalue
SEPARATION_TOL = 1e-6
#: per-block change below this (relative to max(1, ||H||)) counts as "unchanged"
CHANGE_TOL = 1e-12

__all__ = [
    "ShiftRecord",
    "ShiftWindow",
    "ShiftPlan",
    "apply_J",
    "pq_vectors_real",
    "shift_direction",
    "real_shift",
    "complex_shift",
    "negative_real_pairs",
    "complex_candidates",
    "sample_delta",
    "iter_shifts",
    "perturb",
    "rado_oracle",
    "predict_real_shift_spectrum",
    "predict_complex_shift_spectrum",
]


def apply_J(v: np.ndarray) -> np.ndarray:
    """``J v`` for ``J = [[0, I], [-I, 0]]`` without forming ``J``."""
    n = v.shape[0] // 2
    return np.concatenate([v[n:], -v[:n]])


def pq_vectors_real(v) -> tuple[np.ndarray, np.ndarray]:
    """Return ``p = (J + I) v`` and ``q = J v`` for a unit vector ``v``."""
    v = np.asarray(v)
    if v.ndim != 1 or v.shape[0] % 2:
        raise ShapeError("v must be a vector of even length")
    if abs(np.linalg.norm(v) - 1.0) > 1e-10:
        raise AdmissibilityError(f"v must have unit norm, got {np.linalg.norm(v):.15g}")
    q = apply_J(v)
    return q + v, q


def shift_direction(v) -> np.ndarray:
    """The rank-two update direction ``v p^T - q q^T``."""
    p, q = pq_vectors_real(v)
    return np.outer(v, p) - np.outer(q, q)


def _check_pair(H: np.ndarray, pair: EigenPair, what: str) -> None:
    tol = 10 * residual_tolerance(H.shape[0]) * max(np.linalg.norm(H), 1.0)
    res = pair.residual(H)
    if res > tol:
        raise AdmissibilityError(f"{what} residual {res:.3e} exceeds {tol:.3e}")


def real_shift(h: HamiltonianMatrix, pair: EigenPair, delta: float) -> HamiltonianMatrix:
    """Shift a negative real eigenvalue of ``h`` by ``delta``.

    ``delta = 0`` is accepted and returns an identical matrix.

    Raises
    ------
    AdmissibilityError
        ``pair`` is not a real negative right eigenpair with unit real
        vector, or ``delta >= -lambda``.
    """
    if not pair.is_real or np.iscomplexobj(pair.vector):
        raise AdmissibilityError("real_shift needs a real eigenpair with a real vector")
    lam = pair.real_value
    if not lam < 0:
        raise AdmissibilityError(f"eigenvalue {lam} is not negative")
    if not delta < -lam:
        raise AdmissibilityError(f"delta={delta} violates delta < -lambda = {-lam}")
    _check_pair(h.H, pair, "eigenpair")
    return HamiltonianMatrix(h.H + delta * shift_direction(pair.vector))


def _theta(v_plus: np.ndarray, v_minus: np.ndarray) -> complex:
    s = v_plus @ apply_J(v_minus)
    if abs(s) <= THETA_TOL * np.linalg.norm(v_plus) * np.linalg.norm(v_minus):
        raise AdmissibilityError(f"v_j^T J v_-j = {s} is numerically zero")
    return 1.0 / s


def complex_direction(v_plus: np.ndarray, v_minus: np.ndarray) -> np.ndarray:
    """``2 Re(v_j p_j^T + v_-j q_j^T)`` with ``p_j = theta J v_-j``, ``q_j = theta J v_j``."""
    theta = _theta(v_plus, v_minus)
    p = theta * apply_J(v_minus)
    q = theta * apply_J(v_plus)
    return 2.0 * np.real(np.outer(v_plus, p) + np.outer(v_minus, q))


def complex_shift(
    h: HamiltonianMatrix,
    pair_plus: EigenPair,
    pair_minus: EigenPair,
    delta: float,
    spectrum: Optional[np.ndarray] = None,
) -> HamiltonianMatrix:
    """Shift the real parts of the quadruple around ``mu = pair_plus.value`` by ``delta``.

    ``pair_minus`` must be a right eigenpair for ``-mu``.  ``spectrum`` may
    pass precomputed eigenvalues of ``h`` for the multiplicity check.
    """
    H = h.H
    mu = complex(pair_plus.value)
    scale = max(np.linalg.norm(H), 1.0)
    if abs(mu.imag) <= 1e-9 * (1 + abs(mu)):
        raise AdmissibilityError(f"eigenvalue {mu} is not complex")
    if mu.real == 0.0:
        raise AdmissibilityError("purely imaginary eigenvalue cannot be shifted")
    if abs(complex(pair_minus.value) + mu) > SEPARATION_TOL * scale:
        raise AdmissibilityError(f"pair_minus eigenvalue {pair_minus.value} is not -mu")
    if not delta / mu.real > -1:
        raise AdmissibilityError(f"delta/Re(mu) = {delta / mu.real} must exceed -1")
    _check_pair(H, pair_plus, "pair_plus")
    _check_pair(H, pair_minus, "pair_minus")
    w = spla.eigvals(H) if spectrum is None else np.asarray(spectrum)
    for target in (mu, -mu):
        close = int(np.sum(np.abs(w - target) <= SEPARATION_TOL * scale))
        if close > 1:
            raise AdmissibilityError(f"eigenvalue {target} has multiplicity > 1")
    E = complex_direction(np.asarray(pair_plus.vector), np.asarray(pair_minus.vector))
    return HamiltonianMatrix(H + delta * E)


@dataclass(frozen=True)
class ShiftRecord:
    """One applied shift; these are the secrets of the disguise."""

    kind: str
    eigenvalue: complex
    delta: float
    vectors: tuple
    index: int

    def __post_init__(self):
        lam = complex(self.eigenvalue)
        if self.delta == 0:
            raise AdmissibilityError("a recorded shift must be nontrivial")
        if self.kind == "real":
            if lam.imag != 0 or not lam.real < 0:
                raise AdmissibilityError(f"real shift needs a negative real eigenvalue, got {lam}")
            if not self.delta < -lam.real:
                raise AdmissibilityError("real shift violates delta < -lambda")
        elif self.kind == "complex":
            if not self.delta / lam.real > -1:
                raise AdmissibilityError("complex shift violates delta/Re(mu) > -1")
        else:
            raise ValueError(f"unknown shift kind {self.kind!r}")

    @property
    def new_eigenvalue(self) -> complex:
        return complex(self.eigenvalue) + self.delta


@dataclass(frozen=True)
class ShiftWindow:
    """Sampling parameters for shift magnitudes.

    For an eigenvalue of modulus ``r`` (real part modulus for complex
    shifts) the magnitude is drawn from ``(margin r, (1 - margin) r)`` or,
    with probability ``1 - positive_fraction``, from
    ``(-negative_scale r, -margin r)``.  With ``monotone`` set, a draw is
    rejected when it would shrink the distance of any of ``A``, ``D``,
    ``Q`` from the unshifted blocks.
    """

    margin: float = 0.05
    negative_scale: float = 1.0
    collision_tol: float = 1e-6
    kinds: str = "real"
    max_resample: int = 50
    positive_fraction: float = 0.5
    monotone: bool = False

    def __post_init__(self):
        if not 0 < self.margin < 0.5:
            raise ValueError("margin must lie in (0, 0.5)")
        if self.negative_scale <= self.margin:
            raise ValueError("negative_scale must exceed margin")
        if self.kinds not in ("real", "complex", "mixed"):
            raise ValueError("kinds must be 'real', 'complex' or 'mixed'")
        if not 0.0 <= self.positive_fraction <= 1.0:
            raise ValueError("positive_fraction must lie in [0, 1]")


@dataclass(frozen=True)
class ShiftPlan:
    records: tuple = ()
    seed: Optional[int] = None
    window: ShiftWindow = field(default_factory=ShiftWindow)

    def __len__(self):
        return len(self.records)


def sample_delta(rng: np.random.Generator, magnitude: float, window: ShiftWindow) -> float:
    if rng.random() < window.positive_fraction:
        return float(rng.uniform(window.margin * magnitude, (1 - window.margin) * magnitude))
    return -float(rng.uniform(window.margin * magnitude, window.negative_scale * magnitude))


def negative_real_pairs(h: HamiltonianMatrix, pairs=None) -> list[EigenPair]:
    """Negative real eigenpairs sorted ascending by eigenvalue."""
    pairs = eig_all(h.H) if pairs is None else pairs
    neg = [pr for pr in pairs if pr.is_real and pr.real_value < 0]
    return sorted(neg, key=lambda pr: pr.real_value)


def complex_candidates(h: HamiltonianMatrix, pairs=None) -> list[tuple[EigenPair, EigenPair]]:
    """``(mu, -mu)`` right eigenpairs with ``Re mu < 0 < Im mu``, sorted by ``Re mu``."""
    pairs = eig_all(h.H) if pairs is None else pairs
    cplx = [pr for pr in pairs if not pr.is_real]
    out = []
    for pr in cplx:
        mu = pr.value
        if mu.real < 0 and mu.imag > 0:
            partner = min(cplx, key=lambda o: abs(o.value + mu))
            out.append((pr, partner))
    return sorted(out, key=lambda c: c[0].value.real)


def _touched(value: complex, touched: list, tol: float) -> bool:
    return any(abs(value - t) <= tol for t in touched)


def _collides(new_values, old_values, spectrum: np.ndarray, tol: float) -> bool:
    others = list(spectrum)
    for old in old_values:
        k = int(np.argmin(np.abs(np.asarray(others) - old)))
        others.pop(k)
    others = np.asarray(others)
    if others.size == 0:
        return False
    return any(np.min(np.abs(others - nv)) <= tol for nv in new_values)


def _blocks_change(E: np.ndarray, delta: float, scale: float) -> bool:
    n = E.shape[0] // 2
    tol = CHANGE_TOL * max(scale, 1.0)
    blocks = (E[:n, :n], E[:n, n:], E[n:, :n])
    return all(abs(delta) * np.max(np.abs(b)) > tol for b in blocks)


def _block_gaps(H, h0: HamiltonianMatrix) -> np.ndarray:
    n = h0.n
    E = np.asarray(H) - h0.H
    return np.array([
        np.linalg.norm(E[:n, :n]), np.linalg.norm(E[:n, n:]), np.linalg.norm(E[n:, :n])
    ])


def _grows(shifted, h0: HamiltonianMatrix, gaps: np.ndarray) -> bool:
    H = shifted.H if isinstance(shifted, HamiltonianMatrix) else shifted
    return bool(np.all(_block_gaps(H, h0) >= gaps))


def iter_shifts(
    h: HamiltonianMatrix,
    window: ShiftWindow = ShiftWindow(),
    seed: Optional[int] = 0,
) -> Iterator[tuple[HamiltonianMatrix, ShiftRecord]]:
    """Yield ``(H_j, record_j)`` for successive random shifts of ``h``.

    Each step recomputes the eigenpairs of the current matrix, picks an
    eigenvalue (or quadruple) that has not been shifted before and samples
    a magnitude from ``window``.  The resulting matrix is re-assembled from
    its blocks so that it is exactly Hamiltonian.

    Raises
    ------
    NoAdmissibleEigenvalueError
        When no untouched eigenvalue of the requested kind remains.
    SamplingError
        When ``window.max_resample`` draws all collide with the spectrum.
    """
    rng = np.random.default_rng(seed)
    current = h
    touched: list[complex] = []
    gaps = np.zeros(3)
    while True:
        H = current.H
        scale = max(np.linalg.norm(H), 1.0)
        match_tol = 1e-2 * window.collision_tol * scale
        pairs = eig_all(H)
        spectrum = np.array([pr.value for pr in pairs])
        pool = []
        if window.kinds in ("real", "mixed"):
            reals = negative_real_pairs(current, pairs)
            pool += [
                ("real", i, pr) for i, pr in enumerate(reals)
                if not _touched(pr.value, touched, match_tol)
            ]
        if window.kinds in ("complex", "mixed"):
            cands = complex_candidates(current, pairs)
            pool += [
                ("complex", i, c) for i, c in enumerate(cands)
                if not _touched(c[0].value, touched, match_tol)
            ]
        if not pool:
            raise NoAdmissibleEigenvalueError(
                f"no unshifted {window.kinds} eigenvalue left after {len(touched) // 2} shifts"
            )

        for _ in range(window.max_resample):
            if not pool:
                raise NoAdmissibleEigenvalueError("every candidate leaves some block unchanged")
            kind, index, cand = pool[int(rng.integers(len(pool)))]
            if kind == "real":
                lam = cand.value
                delta = sample_delta(rng, abs(lam.real), window)
                old = [lam, -lam]
                new = [lam + delta, -lam - delta]
                E = shift_direction(cand.vector)
            else:
                mu = cand[0].value
                delta = sample_delta(rng, abs(mu.real), window)
                old = [mu, np.conj(mu), -mu, -np.conj(mu)]
                new = [mu + delta, np.conj(mu) + delta, -mu - delta, -np.conj(mu) - delta]
            if _collides(new, old, spectrum, window.collision_tol * scale):
                continue
            if kind == "real":
                if not _blocks_change(E, delta, scale):
                    pool = [c for c in pool if c[2] is not cand]
                    continue
                shifted = real_shift(current, cand, delta)
                if window.monotone and not _grows(shifted, h, gaps):
                    continue
                vectors = (np.array(cand.vector),)
                record = ShiftRecord("real", complex(lam.real, 0.0), delta, vectors, index)
                touched += [lam + delta, -lam - delta]
            else:
                E = complex_direction(cand[0].vector, cand[1].vector)
                if not _blocks_change(E, delta, scale):
                    pool = [c for c in pool if c[2] is not cand]
                    continue
                shifted = complex_shift(current, cand[0], cand[1], delta, spectrum)
                if window.monotone and not _grows(shifted, h, gaps):
                    continue
                vectors = (np.array(cand[0].vector), np.array(cand[1].vector))
                record = ShiftRecord("complex", complex(mu), delta, vectors, index)
                touched += [mu + delta, np.conj(mu) + delta, -mu - delta, -np.conj(mu) - delta]
            break
        else:
            raise SamplingError(f"no collision-free shift after {window.max_resample} draws")

        current = build_hamiltonian(split_hamiltonian(shifted))
        gaps = _block_gaps(current.H, h)
        yield current, record


def perturb(
    h: HamiltonianMatrix,
    k: int,
    window: ShiftWindow = ShiftWindow(),
    seed: Optional[int] = 0,
) -> tuple[HamiltonianMatrix, ShiftPlan]:
    """Apply ``k`` random shifts to ``h``; deterministic in ``(h, k, window, seed)``.

    Returns the disguised Hamiltonian and the plan of applied shifts.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k == 0:
        return h, ShiftPlan((), seed, window)
    records = []
    current = h
    steps = iter_shifts(h, window, seed)
    for _ in range(k):
        current, rec = next(steps)
        records.append(rec)
    steps.close()
    diff = current.H - h.H
    if not _blocks_change(diff, 1.0, np.linalg.norm(h.H)):
        raise SamplingError("shifts cancelled out in some coefficient block")
    return current, ShiftPlan(tuple(records), seed, window)


def rado_oracle(L, M, lambdas, N, spectrum=None) -> np.ndarray:
    """Spectrum of ``L + M N`` predicted from eigenvectors of ``L``.

    ``M`` holds right eigenvectors of ``L`` for ``lambdas`` as columns.  The
    prediction is ``eig(diag(lambdas) + N M)`` together with the eigenvalues
    of ``L`` not in ``lambdas``.  ``spectrum`` overrides the eigenvalues of
    ``L`` used for the second part (for chaining predictions).
    """
    L = np.atleast_2d(np.asarray(L))
    M = np.asarray(M)
    if M.ndim == 1:
        M = M[:, None]
    N = np.atleast_2d(np.asarray(N))
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=complex))
    if M.shape[1] != lambdas.size or N.shape != (M.shape[1], L.shape[0]):
        raise ShapeError("inconsistent shapes for L, M, lambdas, N")
    s = np.linalg.svd(M, compute_uv=False)
    if s[-1] <= 1e-10 * s[0]:
        raise AdmissibilityError("eigenvector matrix M is rank deficient")
    scale = max(np.linalg.norm(L), 1.0)
    res = np.linalg.norm(L @ M - M * lambdas[None, :])
    if res > 1e-8 * scale * np.linalg.norm(M):
        raise AdmissibilityError(f"columns of M are not eigenvectors (residual {res:.3e})")
    inner = np.linalg.eigvals(np.diag(lambdas) + N @ M)
    rest = list(np.linalg.eigvals(L) if spectrum is None else np.asarray(spectrum, dtype=complex))
    for lam in lambdas:
        k = int(np.argmin(np.abs(np.asarray(rest) - lam)))
        rest.pop(k)
    return np.concatenate([inner, np.asarray(rest, dtype=complex)])


def predict_real_shift_spectrum(H, pair: EigenPair, delta: float) -> np.ndarray:
    """Spectrum after a real shift, via two Rado steps (right then left update)."""
    H = np.asarray(H)
    v = pair.vector
    p, q = pq_vectors_real(v)
    lam = pair.real_value
    # right eigenvector update moves lam
    L1 = H + delta * np.outer(v, p)
    first = rado_oracle(H, v, [lam], delta * p[None, :])
    # q^T is a left eigenvector of L1 for -lam; apply the oracle to L1^T
    return rado_oracle(L1.T, q, [-lam], -delta * q[None, :], spectrum=first)


def predict_complex_shift_spectrum(H, pair_plus: EigenPair, pair_minus: EigenPair, delta: float) -> np.ndarray:
    H = np.asarray(H)
    vp = np.asarray(pair_plus.vector)
    vm = np.asarray(pair_minus.vector)
    theta = _theta(vp, vm)
    p = theta * apply_J(vm)
    q = theta * apply_J(vp)
    M = np.column_stack([vp, vm, vp.conj(), vm.conj()])
    N = delta * np.vstack([p, q, p.conj(), q.conj()])
    mu = complex(pair_plus.value)
    lams = [mu, -mu, np.conj(mu), -np.conj(mu)]
    return rado_oracle(H, M, lams, N)
