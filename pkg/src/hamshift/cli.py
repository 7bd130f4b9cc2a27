"""Command-line interface: ``hamshift disguise | solve | verify | analyze | bench``.

Exit codes
----------
0  success
2  bad input (unreadable/malformed file, invalid flags, trivial request)
3  stabilizability/detectability or definiteness assumption failed
4  no admissible eigenvalue for the requested shifts
5  numerical failure (eigensolver, Schur extraction, sampling)
6  verification failed
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .are import build_hamiltonian, check_assumptions, residual, solve_stabilizing, split_hamiltonian
from .bench import BenchmarkSpec, are_to_lqr_realization, case_study, trajectory_csv
from .exceptions import (
    AssumptionError,
    HamshiftError,
    NoAdmissibleEigenvalueError,
    ShapeError,
)
from .formats import dumps, load_problem, problem_to_json, report_from_json, report_to_json
from .privacy import ambiguity_pair, attack_simulate, privacy_measures
from .realizability import algorithm2
from .shift import ShiftPlan, ShiftWindow, perturb

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_ASSUMPTION = 3
EXIT_NO_EIGENVALUE = 4
EXIT_NUMERIC = 5
EXIT_VERIFY = 6

SEED_ENV = "HAMSHIFT_SEED"
#: relative solution mismatch accepted by ``verify``
MATCH_TOL = 1e-8


class UsageError(HamshiftError):
    pass


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None


def _write(path, text: str) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _verify_block(original, P) -> dict:
    ref = solve_stabilizing(original).P
    closed = np.linalg.eigvals(original.A - original.D @ P)
    return {
        "residual": residual(original, P),
        "closed_loop_stable": bool(np.all(closed.real < 0)),
        "solution_match": bool(np.linalg.norm(P - ref) <= MATCH_TOL * max(np.linalg.norm(ref), 1e-300)),
    }


def cmd_disguise(args) -> int:
    if args.shifts < 1:
        raise UsageError("trivial request: --shifts must be at least 1")
    seed = _default_seed() if args.seed is None else args.seed
    prob = load_problem(args.input)
    original = prob.are
    rep = check_assumptions(original)
    if not rep.ok:
        raise AssumptionError(f"stabilizable={rep.stabilizable}, detectable={rep.detectable}")
    window = ShiftWindow(margin=args.margin, kinds=args.kinds, monotone=args.monotone)
    if args.mode == "problem1":
        h_tilde, plan = perturb(build_hamiltonian(original), args.shifts, window, seed)
        disguised = split_hamiltonian(h_tilde)
        records = plan.records
        lqr = None
    else:
        current, records = original, []
        for j in range(args.shifts):
            res = algorithm2(current, seed=seed + j, window=window, check=(j == 0))
            current = res.problem
            records.append(res.record)
        disguised = current
        plan = ShiftPlan(tuple(records), seed, window)
        lqr = are_to_lqr_realization(disguised)
    _write(args.out, problem_to_json(are=disguised, lqr=lqr))
    verify = None
    if not args.no_verify:
        verify = _verify_block(original, solve_stabilizing(disguised).P)
    report = report_to_json(
        args.mode, seed, records, privacy_measures(original, disguised, plan), verify, args.keep_secrets
    )
    if args.secrets_out:
        _write(args.secrets_out, report)
    return EXIT_OK


def cmd_solve(args) -> int:
    prob = load_problem(args.input)
    sol = solve_stabilizing(prob.are)
    doc = {
        "P": [[float(x) for x in row] for row in sol.P],
        "residual": sol.residual,
        "closed_loop_spectrum": [[float(z.real), float(z.imag)] for z in sol.closed_loop],
    }
    _write(args.out, dumps(doc))
    return EXIT_OK


def cmd_verify(args) -> int:
    original = load_problem(args.original).are
    sol = json.loads(Path(args.solution).read_text())
    P = np.array(sol["P"], dtype=float).reshape(original.n, original.n)
    closed = np.linalg.eigvals(original.A - original.D @ P)
    res = residual(original, P)
    scale = 1.0 + np.linalg.norm(P) ** 2
    doc = {
        "residual": res,
        "residual_ok": bool(res <= MATCH_TOL * scale),
        "closed_loop_stable": bool(np.all(closed.real < 0)),
        "solution_match": None,
    }
    if args.disguised:
        disguised = load_problem(args.disguised).are
        if disguised.n != original.n:
            raise ShapeError("original and disguised problems differ in order")
        doc["disguised_residual"] = residual(disguised, P)
    if args.secrets:
        report_from_json(Path(args.secrets).read_text())
        ref = solve_stabilizing(original).P
        err = float(np.linalg.norm(P - ref) / max(np.linalg.norm(ref), 1e-300))
        doc["solution_match"] = bool(err <= MATCH_TOL)
        doc["solution_rel_error"] = err
    doc["passed"] = bool(
        doc["residual_ok"] and doc["closed_loop_stable"] and doc["solution_match"] is not False
    )
    _write(args.out, dumps(doc))
    return EXIT_OK if doc["passed"] else EXIT_VERIFY


def cmd_analyze(args) -> int:
    original = load_problem(args.original).are
    disguised = load_problem(args.disguised).are
    if original.n != disguised.n:
        raise ShapeError("original and disguised problems differ in order")
    plan = None
    k = args.k
    if args.secrets:
        rep = report_from_json(Path(args.secrets).read_text())
        plan = ShiftPlan(tuple(rep["shifts"]), rep["seed"])
        if k is None:
            k = sum(1 for r in plan.records if r.kind == "real")
    if plan is None and k is not None:
        # ambiguity pair needs the shift count; without secrets take it from --k
        pm = privacy_measures(original, disguised, None)
        pm = replace(pm, shifts=k, ambiguity=ambiguity_pair(pm.negative_real_count, k))
    else:
        pm = privacy_measures(original, disguised, plan)
    doc = {"privacy": pm.as_dict()}
    if args.attack:
        att = attack_simulate(
            build_hamiltonian(disguised), build_hamiltonian(original), k or 1,
            budget=args.budget, seed=args.attack_seed,
        )
        doc["attack"] = att.as_dict()
    _write(args.out, dumps(doc))
    return EXIT_OK


def cmd_bench(args) -> int:
    seed = _default_seed() if args.seed is None else args.seed
    spec = BenchmarkSpec(args.n, args.m, args.p, seed=seed, realizable_block=args.realizable_block)
    study = case_study(spec, args.shifts, args.mode, ShiftWindow(margin=args.margin, monotone=args.monotone))
    csv_text = trajectory_csv(study)
    if args.csv or not args.json:
        _write(args.csv, csv_text)
    if args.json:
        doc = {
            "mode": study.mode,
            "seed": seed,
            "n": spec.n, "m": spec.m, "p": spec.p,
            "requested": study.requested,
            "available": study.available,
            "rows": [r.as_dict() for r in study.rows],
            "verify": {
                "solution_rel_error": study.solution_rel_error,
                "closed_loop_stable": study.closed_loop_stable,
            },
        }
        _write(args.json, dumps(doc))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hamshift",
        description="Disguise algebraic Riccati equations by Hamiltonian eigenvalue shifts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("disguise", help="produce a disguised ARE and a secrets report")
    p.add_argument("input")
    p.add_argument("--mode", choices=["problem1", "problem2"], default="problem1",
                   help="problem2 keeps Q and D positive semidefinite")
    p.add_argument("--shifts", type=int, default=1, help="number of eigenvalue shifts")
    p.add_argument("--seed", type=int, default=None, help=f"RNG seed (default: ${SEED_ENV} or 0)")
    p.add_argument("--margin", type=float, default=0.05, help="relative distance kept from window ends")
    p.add_argument("--kinds", choices=["real", "complex", "mixed"], default="real")
    p.add_argument("--monotone", action="store_true", help="reject shifts that shrink any coefficient change")
    p.add_argument("--out", default="-", help="disguised problem file (default: stdout)")
    p.add_argument("--secrets-out", default=None, help="where to write the secrets report")
    p.add_argument("--keep-secrets", action="store_true", help="include eigenvectors in the secrets report")
    p.add_argument("--no-verify", action="store_true", help="skip the local solution check")
    p.set_defaults(func=cmd_disguise)

    p = sub.add_parser("solve", help="solve an ARE file for its stabilizing solution")
    p.add_argument("input")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check a returned solution against the original ARE")
    p.add_argument("original")
    p.add_argument("solution")
    p.add_argument("--disguised", default=None, help="also report the residual on this file")
    p.add_argument("--secrets", default=None, help="secrets report; enables the exact match check")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("analyze", help="privacy measures and optional attack simulation")
    p.add_argument("original")
    p.add_argument("disguised")
    p.add_argument("--secrets", default=None)
    p.add_argument("--k", type=int, default=None, help="assumed number of shifts")
    p.add_argument("--attack", action="store_true", help="simulate the brute-force reconstruction")
    p.add_argument("--budget", type=int, default=None, help="max index sequences to try")
    p.add_argument("--attack-seed", type=int, default=None, help="visit sequences in a seeded random order")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("bench", help="run the case study on a synthetic LQR benchmark")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--p", type=int, default=10)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--shifts", type=int, default=9)
    p.add_argument("--mode", choices=["problem1", "problem2"], default="problem1")
    p.add_argument("--margin", type=float, default=0.05)
    p.add_argument("--realizable-block", type=int, default=0,
                   help="size of a fully actuated and observed subsystem")
    p.add_argument("--monotone", action="store_true", help="reject shifts that shrink any coefficient change")
    p.add_argument("--csv", default=None, help="CSV table path (default: stdout)")
    p.add_argument("--json", default=None, help="also write the full JSON report")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ShapeError, FileNotFoundError, ValueError) as exc:
        print(f"hamshift: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except AssumptionError as exc:
        print(f"hamshift: assumption failed: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except NoAdmissibleEigenvalueError as exc:
        print(f"hamshift: no admissible eigenvalue: {exc}", file=sys.stderr)
        return EXIT_NO_EIGENVALUE
    except HamshiftError as exc:
        print(f"hamshift: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
