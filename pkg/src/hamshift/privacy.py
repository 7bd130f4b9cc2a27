"""How much a disguised Riccati equation reveals.

Relative coefficient changes serve as privacy measures.  An honest but
curious solver that knows the mechanism but not its secrets must guess
which negative real eigenvalues were shifted (an ordered index sequence)
and by how much (one scalar per shift).  Undoing a guess ``(i, gamma)`` on
a Hamiltonian ``H_j`` gives ``H_j - gamma f(i, H_j)`` where ``f(i, H)`` is
the rank-two shift direction built from the i-th negative real eigenpair
of ``H`` (ascending order).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .are import AreProblem, HamiltonianMatrix, build_hamiltonian, split_hamiltonian
from .exceptions import AdmissibilityError, ShapeError
from .numerics import EigenPair
from .shift import ShiftPlan, negative_real_pairs, real_shift

#: relative tolerance to recognise an eigenvalue already restored by an earlier level
RESTORED_TOL = 1e-7
#: reconstruction distance (relative to ||H_true||) that counts as recovery
RECOVERY_TOL = 1e-6

__all__ = [
    "PrivacyReport",
    "ConfusionCandidate",
    "AttackAttempt",
    "AttackReport",
    "rel_change",
    "ambiguity_pair",
    "privacy_measures",
    "confusion_member",
    "true_reverse_sequence",
    "golden_section",
    "attack_simulate",
]


def rel_change(X, X_mod) -> Optional[float]:
    """``||X_mod - X||_F / ||X||_F``, or ``None`` when ``X`` is zero."""
    X = np.asarray(X, dtype=float)
    den = np.linalg.norm(X)
    if den == 0.0:
        return None
    return float(np.linalg.norm(np.asarray(X_mod, dtype=float) - X) / den)


def ambiguity_pair(r: int, k: int) -> tuple[int, int]:
    """``(r! / (r - k)!, k)``: index sequences to guess and scalars to find."""
    return math.perm(r, k), k


@dataclass(frozen=True)
class PrivacyReport:
    rel_change_A: Optional[float]
    rel_change_D: Optional[float]
    rel_change_Q: Optional[float]
    shifts: int
    negative_real_count: int
    ambiguity: tuple
    iteration: Optional[int] = None

    def as_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "rel_change_A": self.rel_change_A,
            "rel_change_D": self.rel_change_D,
            "rel_change_Q": self.rel_change_Q,
            "shifts": self.shifts,
            "negative_real_count": self.negative_real_count,
            "ambiguity": [self.ambiguity[0], self.ambiguity[1]],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PrivacyReport":
        return cls(
            d["rel_change_A"],
            d["rel_change_D"],
            d["rel_change_Q"],
            int(d["shifts"]),
            int(d["negative_real_count"]),
            (int(d["ambiguity"][0]), int(d["ambiguity"][1])),
            d.get("iteration"),
        )


def privacy_measures(
    original: AreProblem,
    modified: AreProblem,
    plan: Optional[ShiftPlan] = None,
    iteration: Optional[int] = None,
) -> PrivacyReport:
    """Relative changes of ``A``, ``D``, ``Q`` and the ambiguity pair.

    ``r`` counts the negative real eigenvalues of the disguised Hamiltonian
    and ``k`` the real shifts in ``plan``.
    """
    if original.n != modified.n:
        raise ShapeError("original and modified problems differ in order")
    k = 0 if plan is None else sum(1 for rec in plan.records if rec.kind == "real")
    r = len(negative_real_pairs(build_hamiltonian(modified)))
    return PrivacyReport(
        rel_change(original.A, modified.A),
        rel_change(original.D, modified.D),
        rel_change(original.Q, modified.Q),
        0 if plan is None else len(plan.records),
        r,
        ambiguity_pair(r, k),
        iteration,
    )


@dataclass(frozen=True)
class ConfusionCandidate:
    indices: tuple
    gammas: tuple
    hamiltonian: HamiltonianMatrix


def _available(pairs: list[EigenPair], restored: list[float], tol: float) -> list[EigenPair]:
    out = []
    for pr in pairs:
        if not any(abs(pr.real_value - x) <= tol for x in restored):
            out.append(pr)
    return out


def _undo_step(h: HamiltonianMatrix, index: int, gamma: float, restored: list[float]):
    scale = max(h.norm(), 1.0)
    avail = _available(negative_real_pairs(h), restored, RESTORED_TOL * scale)
    if not 0 <= index < len(avail):
        raise AdmissibilityError(f"index {index} out of range for {len(avail)} candidates")
    pair = avail[index]
    lam = pair.real_value
    if not gamma > lam:
        raise AdmissibilityError(f"gamma={gamma} must exceed lambda={lam}")
    out = real_shift(h, pair, -gamma)
    return build_hamiltonian(split_hamiltonian(out)), lam - gamma


def confusion_member(
    h_tilde: HamiltonianMatrix,
    indices: Sequence[int],
    gammas: Sequence[float],
) -> ConfusionCandidate:
    """Apply the reverse construction ``H_{j+1} = H_j - gamma_j f(i_j, H_j)``.

    At level ``j`` the index ranges over the negative real eigenvalues of
    ``H_j`` that earlier levels did not produce, so level ``j`` offers
    ``r - j`` choices.  ``gamma_j = 0`` is admissible.
    """
    if len(indices) != len(gammas):
        raise ValueError("indices and gammas must have equal length")
    current = h_tilde
    restored: list[float] = []
    for i, g in zip(indices, gammas):
        current, val = _undo_step(current, int(i), float(g), restored)
        restored.append(val)
    return ConfusionCandidate(tuple(int(i) for i in indices), tuple(float(g) for g in gammas), current)


def true_reverse_sequence(h_tilde: HamiltonianMatrix, plan: ShiftPlan) -> tuple[list[int], list[float]]:
    """Index/magnitude sequence that undoes ``plan`` exactly (real shifts only)."""
    if any(rec.kind != "real" for rec in plan.records):
        raise ValueError("reverse sequences are defined for real shifts only")
    current = h_tilde
    restored: list[float] = []
    indices, gammas = [], []
    for rec in reversed(plan.records):
        scale = max(current.norm(), 1.0)
        avail = _available(negative_real_pairs(current), restored, RESTORED_TOL * scale)
        target = rec.new_eigenvalue.real
        i = int(np.argmin([abs(pr.real_value - target) for pr in avail]))
        indices.append(i)
        gammas.append(rec.delta)
        current, val = _undo_step(current, i, rec.delta, restored)
        restored.append(val)
    return indices, gammas


def golden_section(f, lo: float, hi: float, xtol: float = 1e-12, maxiter: int = 200) -> tuple[float, float]:
    """Minimize a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))``."""
    invphi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(maxiter):
        if abs(b - a) <= xtol * max(1.0, abs(a) + abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = (a + b) / 2
    return x, f(x)


@dataclass(frozen=True)
class AttackAttempt:
    indices: tuple
    gammas: tuple
    distance: float


@dataclass(frozen=True)
class AttackReport:
    """Outcome of a brute-force reconstruction attempt.

    ``distance`` values are ``||candidate - H_true||_F / ||H_true||_F``.
    """

    r: int
    k: int
    total_sequences: int
    attempts: tuple = ()
    exhausted_budget: bool = False
    recovery_tol: float = RECOVERY_TOL

    @property
    def best(self) -> Optional[AttackAttempt]:
        return min(self.attempts, key=lambda a: a.distance) if self.attempts else None

    @property
    def recovered(self) -> list:
        return [a for a in self.attempts if a.distance <= self.recovery_tol]

    @property
    def unique_recovery(self) -> bool:
        return len(self.recovered) == 1

    def as_dict(self) -> dict:
        return {
            "r": self.r,
            "k": self.k,
            "total_sequences": self.total_sequences,
            "exhausted_budget": self.exhausted_budget,
            "unique_recovery": self.unique_recovery,
            "attempts": [
                {"indices": list(a.indices), "gammas": list(a.gammas), "distance": a.distance}
                for a in self.attempts
            ],
        }


def _fit_gammas(h_tilde, h_true, indices, upper, sweeps, xtol):
    target = h_true.H
    tnorm = max(np.linalg.norm(target), 1e-300)
    k = len(indices)
    gammas = [0.0] * k

    def dist(gs):
        try:
            cand = confusion_member(h_tilde, indices, gs).hamiltonian
        except AdmissibilityError:
            return np.inf
        return float(np.linalg.norm(cand.H - target) / tnorm)

    best = dist(gammas)
    for _ in range(sweeps if k > 1 else 1):
        for j in range(k):
            # feasibility bound needs the eigenvalue chosen at level j
            prefix = confusion_member(h_tilde, indices[:j], gammas[:j]).hamiltonian
            scale = max(prefix.norm(), 1.0)
            restored = _restored_values(h_tilde, indices[:j], gammas[:j])
            avail = _available(negative_real_pairs(prefix), restored, RESTORED_TOL * scale)
            lam = avail[indices[j]].real_value
            lo = lam + 1e-12 * scale

            def f(g, j=j):
                trial = list(gammas)
                trial[j] = g
                return dist(trial)

            g, val = golden_section(f, lo, upper, xtol)
            if val <= best:
                gammas[j], best = g, val
    return tuple(gammas), best


def _restored_values(h_tilde, indices, gammas):
    current = h_tilde
    restored: list[float] = []
    for i, g in zip(indices, gammas):
        current, val = _undo_step(current, int(i), float(g), restored)
        restored.append(val)
    return restored


def attack_simulate(
    h_tilde: HamiltonianMatrix,
    h_true: HamiltonianMatrix,
    k: int,
    budget: Optional[int] = None,
    seed: Optional[int] = None,
    sweeps: int = 3,
    xtol: float = 1e-12,
) -> AttackReport:
    """Enumerate index sequences and fit magnitudes against ``h_true``.

    ``h_true`` plays the scoring oracle only.  Sequences are visited in
    lexicographic order (or a seeded random order when ``seed`` is given) up
    to ``budget``; each gets its magnitudes fitted by golden-section search
    per level, sweeping the levels ``sweeps`` times when ``k > 1``.
    """
    r = len(negative_real_pairs(h_tilde))
    total = math.perm(r, k)
    if budget is not None and budget <= 0:
        return AttackReport(r, k, total, (), total > 0)
    seqs = list(itertools.product(*[range(r - j) for j in range(k)])) if k <= r else []
    if seed is not None:
        order = np.random.default_rng(seed).permutation(len(seqs))
        seqs = [seqs[i] for i in order]
    limit = len(seqs) if budget is None else min(budget, len(seqs))
    upper = 2.0 * h_tilde.norm() + 1.0
    attempts = []
    for seq in seqs[:limit]:
        gammas, d = _fit_gammas(h_tilde, h_true, seq, upper, sweeps, xtol)
        attempts.append(AttackAttempt(tuple(seq), gammas, d))
    attempts.sort(key=lambda a: a.indices)
    return AttackReport(r, k, total, tuple(attempts), limit < len(seqs))
