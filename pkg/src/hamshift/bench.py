"""LQR instances, their Riccati equations, and the disguise case study."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as spla
from scipy.stats import ortho_group

from .are import (
    AreProblem,
    build_hamiltonian,
    check_assumptions,
    solve_stabilizing,
    split_hamiltonian,
)
from .exceptions import AssumptionError, HamshiftError, NoAdmissibleEigenvalueError, SamplingError, ShapeError
from .numerics import as_matrix, is_psd, symmetrize
from .privacy import privacy_measures
from .realizability import algorithm2
from .shift import ShiftPlan, ShiftWindow, iter_shifts, negative_real_pairs

__all__ = [
    "LqrProblem",
    "BenchmarkSpec",
    "CaseStudy",
    "lqr_to_are",
    "are_to_lqr_realization",
    "generate_benchmark",
    "case_study",
    "trajectory_csv",
]


@dataclass(frozen=True)
class LqrProblem:
    """``dx/dt = A x + B u``, ``y = C x`` with input weight ``R > 0``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        A = as_matrix(self.A, "A", square=True)
        n = A.shape[0]
        B = np.array(self.B, dtype=float).reshape(n, -1) if np.size(self.B) else np.zeros((n, 0))
        C = np.array(self.C, dtype=float).reshape(-1, n) if np.size(self.C) else np.zeros((0, n))
        m = B.shape[1]
        R = np.array(self.R, dtype=float).reshape(m, m) if m else np.zeros((0, 0))
        for name, M in (("B", B), ("C", C), ("R", R)):
            if not np.all(np.isfinite(M)):
                raise ShapeError(f"{name} contains NaN or Inf entries")
        if m:
            if np.linalg.norm(R - R.T) > 1e-10 * max(np.linalg.norm(R), 1.0):
                raise ShapeError("R must be symmetric")
            if spla.eigvalsh(symmetrize(R))[0] <= 0:
                raise ShapeError("R must be positive definite")
        for name, M in (("A", A), ("B", B), ("C", C), ("R", R)):
            M.setflags(write=False)
            object.__setattr__(self, name, M)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]


def lqr_to_are(lqr: LqrProblem) -> AreProblem:
    """``Q = C^T C`` and ``D = B R^{-1} B^T``."""
    n = lqr.n
    if lqr.m:
        cond = np.linalg.cond(lqr.R)
        if cond > 1e12:
            raise ShapeError(f"R is numerically singular (cond {cond:.3e})")
        D = lqr.B @ spla.solve(lqr.R, lqr.B.T, assume_a="pos")
    else:
        D = np.zeros((n, n))
    Q = lqr.C.T @ lqr.C if lqr.p else np.zeros((n, n))
    return AreProblem(lqr.A, Q, D)


def _psd_factor(S: np.ndarray, rank_tol: float = 1e-10) -> np.ndarray:
    """``F`` with ``F F^T = S`` and one column per numerically nonzero eigenvalue."""
    lam, U = spla.eigh(symmetrize(S))
    top = np.max(np.abs(lam)) if lam.size else 0.0
    keep = lam > rank_tol * top if top > 0 else np.zeros_like(lam, dtype=bool)
    lam = np.clip(lam[keep], 0.0, None)
    return U[:, keep] * np.sqrt(lam)[None, :]


def are_to_lqr_realization(p: AreProblem, tol: float = 1e-8) -> LqrProblem:
    """A dummy LQR problem whose Riccati equation is ``p``.

    ``R = I_m`` with ``m = rank D``, ``B B^T = D`` and ``C^T C = Q`` from
    eigen-factorizations.

    Raises
    ------
    AssumptionError
        ``Q`` or ``D`` is not positive semidefinite within ``tol``.
    """
    if not is_psd(p.D, tol) or not is_psd(p.Q, tol):
        raise AssumptionError("Q and D must be positive semidefinite to realize an LQR problem")
    B = _psd_factor(p.D)
    C = _psd_factor(p.Q).T
    return LqrProblem(p.A.copy(), B, C, np.eye(B.shape[1]))


@dataclass(frozen=True)
class BenchmarkSpec:
    """Seeded synthetic LQR instance.

    ``A = T diag-blocks T^{-1}`` with a fraction ``real_fraction`` of real
    eigenvalues, a fraction ``unstable_fraction`` of them in the right half
    plane, and ``T`` of condition number about ``t_cond``.
    ``realizable_block > 0`` embeds a decoupled, fully actuated and
    observed subsystem of that size (hidden by random orthogonal changes of
    state, input and output coordinates); its closed-loop eigenvectors then
    lie in the ranges of ``Q`` and ``D``.
    """

    n: int
    m: int
    p: int
    seed: int = 0
    unstable_fraction: float = 0.1
    real_fraction: float = 0.8
    t_cond: float = 3.0
    input_scale: float = 1.0
    realizable_block: int = 0
    max_tries: int = 50

    def __post_init__(self):
        if min(self.n, self.m, self.p) < 1:
            raise ValueError("n, m, p must be positive")
        if self.m > self.n or self.p > self.n:
            raise ValueError("need n >= m and n >= p")
        if not 0 <= self.realizable_block <= self.n:
            raise ValueError("realizable_block must lie in [0, n]")
        s = self.realizable_block
        if 0 < s < self.n and (s >= self.m or s >= self.p):
            raise ValueError("a proper realizable_block needs fewer states than inputs and outputs")


def _spectrum_blocks(rng, n: int, real_fraction: float, unstable_fraction: float) -> np.ndarray:
    n_real = int(round(real_fraction * n))
    if (n - n_real) % 2:
        n_real += 1 if n_real < n else -1
    n_cplx = (n - n_real) // 2
    L = np.zeros((n, n))
    if n_real:
        # evenly spread magnitudes keep real eigenvalues well separated
        mags = np.linspace(0.1, 1.0, n_real) + rng.uniform(-0.2, 0.2, n_real) * 0.9 / max(n_real, 2)
        signs = -np.ones(n_real)
        n_unst = int(round(unstable_fraction * n_real))
        signs[rng.permutation(n_real)[:n_unst]] = 1.0
        L[np.arange(n_real), np.arange(n_real)] = rng.permutation(signs * mags)
    for j in range(n_cplx):
        a = -rng.uniform(0.1, 1.0)
        if rng.random() < unstable_fraction:
            a = -a
        b = rng.uniform(0.2, 1.0)
        k = n_real + 2 * j
        L[k:k + 2, k:k + 2] = [[a, b], [-b, a]]
    return L


def _random_system(rng, n: int, m: int, p: int, spec: BenchmarkSpec):
    L = _spectrum_blocks(rng, n, spec.real_fraction, spec.unstable_fraction)
    U = ortho_group.rvs(n, random_state=rng) if n > 1 else np.ones((1, 1))
    V = ortho_group.rvs(n, random_state=rng) if n > 1 else np.ones((1, 1))
    s = np.geomspace(1.0, spec.t_cond, n)
    T = U @ np.diag(s) @ V.T
    A = T @ L @ np.linalg.inv(T)
    B = spec.input_scale * rng.standard_normal((n, m)) / np.sqrt(max(m, 1))
    C = rng.standard_normal((p, n)) / np.sqrt(max(p, 1))
    return A, B, C


def _orthogonal(rng, k: int) -> np.ndarray:
    return ortho_group.rvs(k, random_state=rng) if k > 1 else np.ones((1, 1))


def generate_benchmark(spec: BenchmarkSpec) -> LqrProblem:
    """Deterministic (per ``spec.seed``) instance passing the PBH assumption checks.

    Raises
    ------
    HamshiftError
        No acceptable instance within ``spec.max_tries`` draws.
    """
    rng = np.random.default_rng(spec.seed)
    n, m, p, s = spec.n, spec.m, spec.p, spec.realizable_block
    for _ in range(spec.max_tries):
        if 0 < s < n:
            A1, B1, C1 = _random_system(rng, s, s, s, spec)
            A2, B2, C2 = _random_system(rng, n - s, m - s, p - s, spec)
            A = spla.block_diag(A1, A2)
            B = spla.block_diag(B1, B2)
            C = spla.block_diag(C1, C2)
            W = _orthogonal(rng, n)
            A = W @ A @ W.T
            B = W @ B @ _orthogonal(rng, m)
            C = _orthogonal(rng, p) @ C @ W.T
        else:
            A, B, C = _random_system(rng, n, m, p, spec)
        lqr = LqrProblem(A, B, C, np.eye(m))
        are = lqr_to_are(lqr)
        if not check_assumptions(are).ok:
            continue
        try:
            solve_stabilizing(are)
        except HamshiftError:
            continue
        return lqr
    raise HamshiftError(f"no admissible benchmark instance after {spec.max_tries} tries")


@dataclass(frozen=True)
class CaseStudy:
    """Privacy measures per iteration plus end-to-end checks.

    ``rows[0]`` is the unmodified instance (iteration 0).
    """

    mode: str
    rows: tuple
    requested: int
    available: int
    solution_rel_error: float
    closed_loop_stable: bool
    plan: Optional[ShiftPlan] = None
    final: Optional[AreProblem] = None

    def table(self) -> list[tuple]:
        return [(r.iteration, r.rel_change_A, r.rel_change_D, r.rel_change_Q) for r in self.rows]


def case_study(
    spec: BenchmarkSpec,
    shifts: int,
    mode: str = "problem1",
    window: ShiftWindow = ShiftWindow(),
    seed: Optional[int] = None,
    lqr: Optional[LqrProblem] = None,
) -> CaseStudy:
    """Disguise a benchmark instance step by step and record the measures.

    ``problem1`` draws random real shifts of distinct eigenvalues (capped by
    the number available); ``problem2`` applies the semidefiniteness
    preserving shift repeatedly.  ``seed`` defaults to ``spec.seed``.
    """
    if mode not in ("problem1", "problem2"):
        raise ValueError("mode must be 'problem1' or 'problem2'")
    if shifts < 0:
        raise ValueError("shifts must be nonnegative")
    seed = spec.seed if seed is None else seed
    lqr = generate_benchmark(spec) if lqr is None else lqr
    original = lqr_to_are(lqr)
    h = build_hamiltonian(original)
    available = len(negative_real_pairs(h))
    rows = [privacy_measures(original, original, ShiftPlan((), seed, window), iteration=0)]
    records = []
    current = original
    if mode == "problem1":
        steps = iter_shifts(h, window, seed)
        for it in range(1, min(shifts, available) + 1):
            try:
                hj, rec = next(steps)
            except (NoAdmissibleEigenvalueError, SamplingError):
                break
            records.append(rec)
            current = split_hamiltonian(hj)
            plan = ShiftPlan(tuple(records), seed, window)
            rows.append(privacy_measures(original, current, plan, iteration=it))
        steps.close()
    else:
        for it in range(1, shifts + 1):
            try:
                res = algorithm2(current, seed=seed + it - 1, window=window, check=(it == 1))
            except NoAdmissibleEigenvalueError:
                break
            records.append(res.record)
            current = res.problem
            plan = ShiftPlan(tuple(records), seed, window)
            rows.append(privacy_measures(original, current, plan, iteration=it))
    P = solve_stabilizing(original).P
    Pt = solve_stabilizing(current).P
    err = float(np.linalg.norm(Pt - P) / max(np.linalg.norm(P), 1e-300))
    stable = bool(np.all(np.linalg.eigvals(original.A - original.D @ Pt).real < 0))
    return CaseStudy(
        mode, tuple(rows), shifts, available, err, stable,
        ShiftPlan(tuple(records), seed, window), current,
    )


def trajectory_csv(study: CaseStudy) -> str:
    """CSV text with columns ``iteration,relA,relD,relQ``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["iteration", "relA", "relD", "relQ"])
    for it, a, d, q in study.table():
        w.writerow([it] + ["" if x is None else repr(x) for x in (a, d, q)])
    return buf.getvalue()
