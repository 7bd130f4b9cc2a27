"""Shifts that keep ``Q`` and ``D`` positive semidefinite.

A real shift with eigenvector ``v = (v_u, v_l)`` changes the coefficient
blocks as ``D -> D + delta F`` and ``Q -> Q + delta G`` with

    F = q_u q_l^T - v_u p_l^T,    G = q_l q_u^T - v_l p_u^T.

Both are symmetric with rank at most two.  Their sign can be decided from
six inner products each (no eigendecomposition), and when ``F`` is
indefinite a bounded window for ``delta`` still keeps ``D + delta F``
semidefinite provided ``ker D`` lies in ``ker F``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .are import (
    AreProblem,
    build_hamiltonian,
    check_assumptions,
    split_hamiltonian,
)
from .exceptions import AssumptionError, NoAdmissibleEigenvalueError
from .numerics import EigenPair, is_psd, kernel_basis, min_eig, sym_eig_extremes
from .shift import ShiftRecord, ShiftWindow, negative_real_pairs, pq_vectors_real, real_shift

#: absolute tolerance on the sign tests (the scalars are O(1) for unit v)
SIGN_TOL = 1e-12
#: relative tolerance for ker(S) being contained in ker(T)
KERNEL_TOL = 1e-9
#: psd threshold on the disguised blocks, relative to their norm
PSD_TOL = 1e-8

__all__ = [
    "FgPair",
    "RealizabilityWindow",
    "Prop1Scalars",
    "Algorithm2Result",
    "fg_matrices",
    "sign_scalars",
    "prop1_verdict",
    "prop2_window",
    "algorithm2",
]


@dataclass(frozen=True)
class FgPair:
    F: np.ndarray
    G: np.ndarray
    v_u: np.ndarray
    v_l: np.ndarray
    p_u: np.ndarray
    p_l: np.ndarray
    q_u: np.ndarray
    q_l: np.ndarray


def fg_matrices(v) -> FgPair:
    v = np.asarray(v, dtype=float)
    p, q = pq_vectors_real(v)
    n = v.shape[0] // 2
    v_u, v_l = v[:n], v[n:]
    p_u, p_l = p[:n], p[n:]
    q_u, q_l = q[:n], q[n:]
    F = np.outer(q_u, q_l) - np.outer(v_u, p_l)
    G = np.outer(q_l, q_u) - np.outer(v_l, p_u)
    return FgPair(F, G, v_u, v_l, p_u, p_l, q_u, q_l)


@dataclass(frozen=True)
class Prop1Scalars:
    """Inner products deciding the sign of one rank-two block.

    For ``F`` (``a = u``, ``b = l``) and for ``G`` (``a = l``, ``b = u``):
    ``alpha_aa = q_a.q_a``, ``beta_aa = v_a.q_a``, ``gamma = q_a.p_b``,
    ``alpha_ab = q_a.q_b``, ``beta_ab = v_a.q_b``, ``delta = v_a.p_b`` and
    ``xi = v_a.v_a``.
    """

    alpha_aa: float
    beta_aa: float
    gamma: float
    alpha_ab: float
    beta_ab: float
    delta: float
    xi: float

    @property
    def discriminant_factor(self) -> float:
        return self.alpha_ab * self.delta - self.gamma * self.beta_ab

    @property
    def leading(self) -> float:
        return self.alpha_aa * self.alpha_ab - self.beta_aa * self.gamma

    @property
    def trailing(self) -> float:
        return self.beta_aa * self.beta_ab - self.xi * self.delta

    def verdict(self, tol: float = SIGN_TOL) -> str:
        if self.discriminant_factor > tol:
            return "inconclusive"
        lead = self.leading
        if abs(lead) <= tol:
            # the quadratic form degenerates to trailing * k2^2
            return "nsd" if self.trailing < -tol else "psd"
        return "psd" if lead > 0 else "nsd"


def _scalars(q_a, v_a, p_b, q_b) -> Prop1Scalars:
    return Prop1Scalars(
        float(q_a @ q_a),
        float(v_a @ q_a),
        float(q_a @ p_b),
        float(q_a @ q_b),
        float(v_a @ q_b),
        float(v_a @ p_b),
        float(v_a @ v_a),
    )


def sign_scalars(fg: FgPair) -> tuple[Prop1Scalars, Prop1Scalars]:
    """The sign-test scalars for ``F`` and for ``G``."""
    return (
        _scalars(fg.q_u, fg.v_u, fg.p_l, fg.q_l),
        _scalars(fg.q_l, fg.v_l, fg.p_u, fg.q_u),
    )


def prop1_verdict(fg: FgPair) -> dict:
    """Decide ``psd`` / ``nsd`` / ``inconclusive`` for ``F`` and ``G`` from inner products.

    The verdict is one-sided: ``psd`` guarantees ``F >= 0`` and ``nsd``
    guarantees ``F <= 0``; ``inconclusive`` makes no claim.
    """
    sf, sg = sign_scalars(fg)
    return {"F": sf.verdict(), "G": sg.verdict()}


def prop2_window(S, T, rank_tol: float = 1e-10) -> Optional[tuple[float, float]]:
    """Closed interval of ``delta`` keeping ``S + delta T`` psd, or ``None``.

    Needs ``ker S`` inside ``ker T``; returns ``None`` when that fails.  The
    bounds use the smallest nonzero eigenvalue of ``S`` and the signed
    extreme eigenvalues of ``T``; a side on which ``T`` cannot push ``S``
    indefinite is infinite.

    Raises
    ------
    AssumptionError
        ``S`` is not positive semidefinite.
    """
    S = np.asarray(S, dtype=float)
    T = np.asarray(T, dtype=float)
    if not is_psd(S):
        raise AssumptionError("S must be positive semidefinite")
    t_norm = np.linalg.norm(T, 2) if T.size else 0.0
    ker = kernel_basis(S, rank_tol)
    if ker.dim and np.linalg.norm(T @ ker.basis, 2) > KERNEL_TOL * max(t_norm, 1.0):
        return None
    if t_norm == 0.0:
        return (-np.inf, np.inf)
    s_ext = sym_eig_extremes(S, rank_tol)
    t_ext = sym_eig_extremes(T)
    mu = s_ext.nonzero_min
    if mu is None:
        # S = 0 with ker(S) = everything inside ker(T) forces T = 0
        return (-np.inf, np.inf)
    t_tol = 1e-12 * t_norm
    lower = -mu / t_ext.lam_max if t_ext.lam_max > t_tol else -np.inf
    upper = -mu / t_ext.lam_min if t_ext.lam_min < -t_tol else np.inf
    return (lower, upper)


@dataclass(frozen=True)
class RealizabilityWindow:
    """Admissible open interval for ``delta`` and the rule that produced it.

    ``branch`` is ``prop1-psd``, ``prop1-nsd`` or ``prop2-kernel``.
    """

    lower: float
    upper: float
    branch: str
    index: int

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"empty window ({self.lower}, {self.upper})")

    def __contains__(self, x) -> bool:
        return self.lower < x < self.upper


@dataclass(frozen=True)
class Algorithm2Result:
    problem: AreProblem
    record: ShiftRecord
    window: RealizabilityWindow
    pair: EigenPair


def _sample_in(rng, lo: float, hi: float, margin: float) -> Optional[float]:
    # lo <= 0 <= hi; stay away from 0 and from both endpoints
    sides = [s for s in (lo, hi) if abs(s) > 0]
    if not sides:
        return None
    end = sides[int(rng.integers(len(sides)))]
    return float(np.sign(end) * rng.uniform(margin * abs(end), (1 - margin) * abs(end)))


def algorithm2(
    p: AreProblem,
    seed: Optional[int] = 0,
    window: ShiftWindow = ShiftWindow(),
    check: bool = True,
) -> Algorithm2Result:
    """One semidefiniteness-preserving real shift of ``p``.

    Candidates are the negative real eigenvalues of the Hamiltonian in
    increasing ``|lambda|`` order.  For each, the sign test on ``F`` and
    ``G`` is tried first (both psd: ``delta`` in ``(0, -lambda)``; both
    nsd: ``delta < 0``); otherwise, if ``ker D`` is inside ``ker F`` and
    ``ker Q`` inside ``ker G``, ``delta`` is drawn from the intersection of
    the two semidefiniteness windows with ``delta < -lambda``.  The first
    candidate that passes is used.

    Raises
    ------
    AssumptionError
        ``Q`` or ``D`` is not psd, or stabilizability/detectability fails
        (only when ``check`` is set).
    NoAdmissibleEigenvalueError
        Every candidate eigenvalue fails both tests.
    """
    if not (is_psd(p.Q) and is_psd(p.D)):
        raise AssumptionError("Q and D must be positive semidefinite")
    if check:
        rep = check_assumptions(p)
        if not rep.ok:
            raise AssumptionError(f"stabilizable={rep.stabilizable}, detectable={rep.detectable}")
    rng = np.random.default_rng(seed)
    h = build_hamiltonian(p)
    cands = sorted(negative_real_pairs(h), key=lambda pr: abs(pr.real_value))
    m = window.margin
    for index, pair in enumerate(cands):
        lam = pair.real_value
        r = abs(lam)
        fg = fg_matrices(pair.vector)
        if np.max(np.abs(fg.F)) == 0 or np.max(np.abs(fg.G)) == 0:
            continue
        verdict = prop1_verdict(fg)
        delta = None
        if verdict["F"] == "psd" and verdict["G"] == "psd":
            win = RealizabilityWindow(0.0, r, "prop1-psd", index)
            delta = float(rng.uniform(m * r, (1 - m) * r))
        elif verdict["F"] == "nsd" and verdict["G"] == "nsd":
            win = RealizabilityWindow(-np.inf, 0.0, "prop1-nsd", index)
            delta = -float(rng.uniform(m * r, window.negative_scale * r))
        else:
            wf = prop2_window(p.D, fg.F)
            wg = prop2_window(p.Q, fg.G) if wf is not None else None
            if wf is None or wg is None:
                continue
            lo = max(wf[0], wg[0])
            hi = min(r, wf[1], wg[1])
            if not lo < hi:
                continue
            win = RealizabilityWindow(lo, hi, "prop2-kernel", index)
            delta = _sample_in(rng, max(lo, -window.negative_scale * r), hi, m)
            if delta is None:
                continue
        shifted = split_hamiltonian(real_shift(h, pair, delta))
        if min_eig(shifted.Q) < -PSD_TOL * max(1.0, np.linalg.norm(shifted.Q, 2)):
            continue
        if min_eig(shifted.D) < -PSD_TOL * max(1.0, np.linalg.norm(shifted.D, 2)):
            continue
        record = ShiftRecord("real", complex(lam, 0.0), delta, (np.array(pair.vector),), index)
        return Algorithm2Result(shifted, record, win, pair)
    raise NoAdmissibleEigenvalueError(
        f"none of {len(cands)} negative real eigenvalues admits a realizable shift"
    )
