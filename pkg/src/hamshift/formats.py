"""JSON problem, solution and report files.

Problem files hold either ``{"are": {"A", "Q", "D"}}`` or
``{"lqr": {"A", "B", "C", "R"}}`` (a disguised problem2 output carries
both) with optional ``"meta"``.  Matrices are row-major lists of lists.
Floats are written with ``repr``, which round-trips exactly.
"""

from __future__ import annotations

import json
import math
import re
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .are import AreProblem
from .bench import LqrProblem, lqr_to_are
from .exceptions import HamshiftError, ShapeError
from .privacy import PrivacyReport
from .shift import ShiftRecord

__all__ = [
    "ProblemFileError",
    "ProblemFile",
    "parse_problem",
    "load_problem",
    "problem_to_json",
    "record_to_dict",
    "record_from_dict",
    "report_to_json",
    "report_from_json",
    "dumps",
]


class ProblemFileError(ShapeError):
    """Malformed problem file; the message carries ``source:line``."""


class ProblemFile:
    """Parsed problem file.

    ``are`` is always populated (derived from ``lqr`` when only that is given).
    """

    def __init__(self, are: AreProblem, lqr: Optional[LqrProblem] = None, meta: Optional[dict] = None):
        self.are = are
        self.lqr = lqr
        self.meta = meta or {}


def _line_of(text: str, key: str, start: int = 0) -> int:
    m = re.compile(r'"%s"\s*:' % re.escape(key)).search(text, start)
    pos = m.start() if m else start
    return text.count("\n", 0, pos) + 1


def _reject_constant(name):
    raise ValueError(f"non-finite number {name} is not allowed")


def _matrix(text: str, source: str, section: str, key: str, value, offset: int) -> np.ndarray:
    line = _line_of(text, key, offset)
    where = f"{source}:{line}"
    if not isinstance(value, list):
        raise ProblemFileError(f"{where}: {section}.{key} must be a list of rows")
    if len(value) == 0:
        return np.zeros((0, 0))
    if not all(isinstance(row, list) for row in value):
        raise ProblemFileError(f"{where}: {section}.{key} must be a list of rows")
    width = len(value[0])
    for i, row in enumerate(value):
        if len(row) != width:
            raise ProblemFileError(
                f"{where}: {section}.{key} row {i} has {len(row)} entries, expected {width}"
            )
        for j, x in enumerate(row):
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise ProblemFileError(f"{where}: {section}.{key}[{i}][{j}] is not a number")
            if not math.isfinite(x):
                raise ProblemFileError(f"{where}: {section}.{key}[{i}][{j}] is not finite")
    return np.array(value, dtype=float).reshape(len(value), width)


def parse_problem(text: str, source: str = "<input>") -> ProblemFile:
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"{source}:{exc.lineno}: {exc.msg}") from exc
    except ValueError as exc:
        # parse_constant: locate the offending token
        m = re.search(r"\b(NaN|-?Infinity)\b", text)
        line = text.count("\n", 0, m.start()) + 1 if m else 1
        raise ProblemFileError(f"{source}:{line}: {exc}") from exc
    if not isinstance(doc, dict) or not ({"are", "lqr"} & set(doc)):
        raise ProblemFileError(f"{source}:1: expected an object with an 'are' or 'lqr' section")

    lqr = None
    are = None
    try:
        if "lqr" in doc:
            sec = doc["lqr"]
            off = text.find('"lqr"')
            mats = {k: _matrix(text, source, "lqr", k, sec.get(k), off) for k in ("A", "B", "C", "R")}
            lqr = LqrProblem(mats["A"], mats["B"], mats["C"], mats["R"])
        if "are" in doc:
            sec = doc["are"]
            off = text.find('"are"')
            mats = {k: _matrix(text, source, "are", k, sec.get(k), off) for k in ("A", "Q", "D")}
            are = AreProblem(mats["A"], mats["Q"], mats["D"])
        else:
            are = lqr_to_are(lqr)
    except ProblemFileError:
        raise
    except (ShapeError, AttributeError, ValueError) as exc:
        sec_name = "are" if "are" in doc else "lqr"
        raise ProblemFileError(f"{source}:{_line_of(text, sec_name)}: {exc}") from exc
    meta = doc.get("meta") if isinstance(doc.get("meta"), dict) else {}
    return ProblemFile(are, lqr, meta)


def load_problem(path: Union[str, Path]) -> ProblemFile:
    path = Path(path)
    return parse_problem(path.read_text(), str(path))


def _rows(M) -> list:
    return [[float(x) for x in row] for row in np.asarray(M, dtype=float)]


# a numbers-only array laid out over several lines; string values never hold a
# raw newline, so this cannot match inside one
_NUMERIC_ARRAY = re.compile(r"\[\n[-+0-9.eE,\s]*?\]")


def _one_line(m: re.Match) -> str:
    return "[" + ", ".join(t.strip() for t in m.group(0)[1:-1].split(",")) + "]"


def dumps(doc) -> str:
    """Deterministic JSON text with each matrix row on one line."""
    text = json.dumps(doc, indent=1, sort_keys=True, allow_nan=False)
    return _NUMERIC_ARRAY.sub(_one_line, text) + "\n"


def problem_to_json(
    are: Optional[AreProblem] = None,
    lqr: Optional[LqrProblem] = None,
    meta: Optional[dict] = None,
) -> str:
    doc: dict = {}
    if are is not None:
        doc["are"] = {"A": _rows(are.A), "Q": _rows(are.Q), "D": _rows(are.D)}
    if lqr is not None:
        doc["lqr"] = {"A": _rows(lqr.A), "B": _rows(lqr.B), "C": _rows(lqr.C), "R": _rows(lqr.R)}
    if meta:
        doc["meta"] = meta
    if not doc:
        raise HamshiftError("nothing to serialize")
    return dumps(doc)


def _cvec(v) -> dict:
    v = np.asarray(v)
    return {"re": [float(x) for x in v.real], "im": [float(x) for x in np.imag(v)]}


def record_to_dict(rec: ShiftRecord, keep_secrets: bool = False) -> dict:
    lam = complex(rec.eigenvalue)
    d = {
        "kind": rec.kind,
        "eigenvalue": [lam.real, lam.imag],
        "delta": float(rec.delta),
        "index": int(rec.index),
    }
    if keep_secrets:
        d["vectors"] = [_cvec(v) for v in rec.vectors]
    return d


def record_from_dict(d: dict) -> ShiftRecord:
    vecs = []
    for v in d.get("vectors", []):
        re_, im_ = np.array(v["re"], dtype=float), np.array(v["im"], dtype=float)
        vecs.append(re_ if not np.any(im_) else re_ + 1j * im_)
    lam = complex(d["eigenvalue"][0], d["eigenvalue"][1])
    return ShiftRecord(d["kind"], lam, float(d["delta"]), tuple(vecs), int(d["index"]))


def report_to_json(
    mode: str,
    seed: Optional[int],
    records,
    privacy: Optional[PrivacyReport],
    verify: Optional[dict],
    keep_secrets: bool = False,
) -> str:
    doc = {
        "mode": mode,
        "seed": seed,
        "shifts": [record_to_dict(r, keep_secrets) for r in records],
        "privacy": privacy.as_dict() if privacy is not None else None,
        "verify": verify,
    }
    return dumps(doc)


def report_from_json(text: str) -> dict:
    """Inverse of :func:`report_to_json`; shift records and privacy are rebuilt."""
    doc = json.loads(text)
    return {
        "mode": doc["mode"],
        "seed": doc["seed"],
        "shifts": [record_from_dict(d) for d in doc["shifts"]],
        "privacy": PrivacyReport.from_dict(doc["privacy"]) if doc.get("privacy") else None,
        "verify": doc.get("verify"),
    }
