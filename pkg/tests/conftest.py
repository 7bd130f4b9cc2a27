import sys

import numpy as np
import pytest
from scipy.stats import ortho_group

from hamshift.are import AreProblem, build_hamiltonian, check_assumptions, solve_stabilizing
from hamshift.exceptions import HamshiftError
from hamshift.shift import negative_real_pairs

# (A, Q, D) = (1, 1, 1): H = [[1, -1], [-1, -1]], eigenvalues +-sqrt(2)
SQRT2 = np.sqrt(2.0)
SCALAR_P = 1.0 + SQRT2


def random_problem(rng, n, m=None, p=None, min_neg_real=0, tries=200):
    """Random stabilizable/detectable ARE with ``D = B B^T``, ``Q = C^T C``."""
    m = n if m is None else m
    p = n if p is None else p
    for _ in range(tries):
        A = rng.standard_normal((n, n)) / np.sqrt(n)
        B = rng.standard_normal((n, m)) / np.sqrt(m)
        C = rng.standard_normal((p, n)) / np.sqrt(p)
        prob = AreProblem(A, C.T @ C, B @ B.T)
        if not check_assumptions(prob).ok:
            continue
        try:
            solve_stabilizing(prob)
        except HamshiftError:
            continue
        if len(negative_real_pairs(build_hamiltonian(prob))) < min_neg_real:
            continue
        return prob
    raise RuntimeError("could not draw a suitable random problem")


def real_spectrum_problem(rng, n, coupling=0.05):
    """Problem whose Hamiltonian has ``n`` well separated negative real eigenvalues.

    Decoupled modes give ``+-sqrt(a^2 + q d)``; a small coupling term keeps
    them real while making the instance generic.
    """
    for _ in range(100):
        W = ortho_group.rvs(n, random_state=rng) if n > 1 else np.ones((1, 1))
        a = -np.linspace(0.5, 2.0, n) + rng.uniform(-0.1, 0.1, n)
        q = rng.uniform(0.5, 1.5, n)
        d = rng.uniform(0.5, 1.5, n)
        A = W @ np.diag(a) @ W.T + coupling * rng.standard_normal((n, n))
        prob = AreProblem(A, W @ np.diag(q) @ W.T, W @ np.diag(d) @ W.T)
        if len(negative_real_pairs(build_hamiltonian(prob))) == n and check_assumptions(prob).ok:
            return prob
    raise RuntimeError("could not draw a real-spectrum problem")


@pytest.fixture
def scalar():
    return AreProblem([[1.0]], [[1.0]], [[1.0]])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance")
    for num in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[num])
