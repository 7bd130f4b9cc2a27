import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamshift.are import AreProblem, build_hamiltonian, split_hamiltonian, structure_defect
from hamshift.exceptions import AdmissibilityError, ShapeError
from hamshift.privacy import (
    PrivacyReport,
    ambiguity_pair,
    attack_simulate,
    confusion_member,
    golden_section,
    privacy_measures,
    rel_change,
    true_reverse_sequence,
)
from hamshift.shift import ShiftWindow, negative_real_pairs, perturb

from conftest import random_problem, real_spectrum_problem


def disguised(rng, n, k, min_neg_real, seed=0):
    p = random_problem(rng, n, min_neg_real=min_neg_real)
    h = build_hamiltonian(p)
    h_tilde, plan = perturb(h, k, ShiftWindow(), seed)
    return p, h, h_tilde, plan


def test_rel_change():
    assert rel_change(np.eye(2), np.eye(2)) == 0
    assert rel_change(np.eye(2), 2 * np.eye(2)) == pytest.approx(1.0)
    assert rel_change(np.zeros((2, 2)), np.eye(2)) is None


def test_ambiguity_pair():
    assert ambiguity_pair(10, 3) == (720, 3)
    assert ambiguity_pair(6, 2) == (30, 2)
    assert ambiguity_pair(3, 0) == (1, 0)
    big = ambiguity_pair(60, 20)[0]
    assert big == math.factorial(60) // math.factorial(40)
    assert isinstance(big, int)


def test_measures_identical(rng):
    p = random_problem(rng, 4)
    rep = privacy_measures(p, p)
    assert (rep.rel_change_A, rep.rel_change_D, rep.rel_change_Q) == (0, 0, 0)
    assert rep.shifts == 0 and rep.ambiguity[1] == 0


def test_measures_zero_block():
    z = np.zeros((1, 1))
    p = AreProblem([[-1.0]], z, [[1.0]])
    t = AreProblem([[-1.0]], [[0.5]], [[1.0]])
    rep = privacy_measures(p, t)
    assert rep.rel_change_Q is None and rep.rel_change_A == 0


def test_measures_shape_mismatch(scalar):
    with pytest.raises(ShapeError):
        privacy_measures(scalar, AreProblem(np.eye(2), np.eye(2), np.eye(2)))


def test_measures_after_shift(rng):
    p, h, h_tilde, plan = disguised(rng, 6, 2, 2)
    rep = privacy_measures(p, split_hamiltonian(h_tilde), plan, iteration=2)
    for x in (rep.rel_change_A, rep.rel_change_D, rep.rel_change_Q):
        assert x > 1e-12
    r = len(negative_real_pairs(h_tilde))
    assert rep.negative_real_count == r
    assert rep.ambiguity == (math.perm(r, 2), 2)
    assert PrivacyReport.from_dict(rep.as_dict()) == rep


def test_confusion_zero_gammas(rng):
    _, _, h_tilde, _ = disguised(rng, 5, 2, 2)
    for idx in ([0], [1, 0], [0, 0, 0]):
        c = confusion_member(h_tilde, idx, [0.0] * len(idx))
        assert np.allclose(c.hamiltonian.H, h_tilde.H, atol=1e-13)


def test_confusion_exact_reconstruction(rng):
    for k in (1, 2, 3):
        p, h, h_tilde, plan = disguised(rng, 8, k, k, seed=k)
        idx, gam = true_reverse_sequence(h_tilde, plan)
        c = confusion_member(h_tilde, idx, gam)
        assert np.linalg.norm(c.hamiltonian.H - h.H) <= 1e-9 * h.norm()
        assert structure_defect(c.hamiltonian.H) <= 1e-10


def test_confusion_wrong_index(rng):
    hits = 0
    for trial in range(5):
        _, h, h_tilde, plan = disguised(rng, 5, 1, 2, seed=trial)
        (true_i,), _ = true_reverse_sequence(h_tilde, plan)
        r = len(negative_real_pairs(h_tilde))
        for i in range(r):
            if i == true_i:
                continue
            lam = negative_real_pairs(h_tilde)[i].real_value
            for g in (0.3 * lam, -0.3 * lam):
                c = confusion_member(h_tilde, [i], [g])
                assert np.linalg.norm(c.hamiltonian.H - h.H) > 1e-3 * h.norm()
                hits += 1
    assert hits > 0


def test_confusion_errors(rng):
    _, _, h_tilde, _ = disguised(rng, 4, 1, 1)
    r = len(negative_real_pairs(h_tilde))
    with pytest.raises(AdmissibilityError):
        confusion_member(h_tilde, [r], [0.0])
    lam = negative_real_pairs(h_tilde)[0].real_value
    with pytest.raises(AdmissibilityError):
        confusion_member(h_tilde, [0], [lam])
    with pytest.raises(ValueError):
        confusion_member(h_tilde, [0], [])


def test_nesting(rng):
    # zeroing a suffix of magnitudes lands in the smaller set
    _, _, h_tilde, plan = disguised(rng, 7, 3, 3, seed=4)
    idx, gam = true_reverse_sequence(h_tilde, plan)
    for j in range(len(idx) + 1):
        full = confusion_member(h_tilde, idx, list(gam[:j]) + [0.0] * (len(idx) - j))
        short = confusion_member(h_tilde, idx[:j], gam[:j])
        assert np.allclose(full.hamiltonian.H, short.hamiltonian.H, atol=1e-12 * h_tilde.norm())


def test_golden_section():
    x, fx = golden_section(lambda t: (t - 0.3) ** 2, -1.0, 2.0, xtol=1e-12)
    assert x == pytest.approx(0.3, abs=1e-6) and fx < 1e-12


def test_attack_k1_r2():
    h = build_hamiltonian(real_spectrum_problem(np.random.default_rng(3), 2))
    h_tilde, plan = perturb(h, 1, ShiftWindow(), 1)
    rep = attack_simulate(h_tilde, h, 1)
    assert rep.r == 2 and rep.total_sequences == 2 and len(rep.attempts) == 2
    (true_i,), _ = true_reverse_sequence(h_tilde, plan)
    d = {a.indices: a.distance for a in rep.attempts}
    assert d[(true_i,)] <= 1e-6
    assert d[(1 - true_i,)] > 1e-3
    assert rep.unique_recovery
    assert rep.best.indices == (true_i,)


def test_attack_budget_zero(rng):
    _, h, h_tilde, _ = disguised(rng, 4, 1, 1)
    rep = attack_simulate(h_tilde, h, 1, budget=0)
    assert rep.attempts == () and rep.exhausted_budget and rep.best is None


def test_attack_enumeration_count(rng):
    h = build_hamiltonian(real_spectrum_problem(rng, 6))
    h_tilde, plan = perturb(h, 2, ShiftWindow(), 0)
    assert len(negative_real_pairs(h_tilde)) == 6
    rep = attack_simulate(h_tilde, h, 2, sweeps=1, xtol=1e-4)
    assert rep.total_sequences == 30 == ambiguity_pair(6, 2)[0]
    assert len(rep.attempts) == 30
    assert len({a.indices for a in rep.attempts}) == 30
    part = attack_simulate(h_tilde, h, 2, budget=5, seed=1, sweeps=1, xtol=1e-4)
    assert len(part.attempts) == 5 and part.exhausted_budget


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**16))
def test_reverse_feasibility(seed):
    r = np.random.default_rng(seed)
    _, _, h_tilde, plan = disguised(r, 4, 1, 1, seed=seed)
    idx, gam = true_reverse_sequence(h_tilde, plan)
    lam = negative_real_pairs(h_tilde)[idx[0]].real_value
    assert gam[0] > lam
