"""JSON documents and CSV trajectories.

Complex numbers are ``[re, im]`` pairs and matrices row-major nested lists.
JSON output has sorted keys and shortest round-trip float text so equal
inputs give byte-identical files.
"""
from __future__ import annotations

import csv
import io
import json
from typing import Any, Iterable, Sequence

import numpy as np

from . import lattice as lt
from .engine import KINDS, CoefficientSystem, CompatibilityReport
from .errors import SchemaError
from .floquet import FloquetDecomposition
from .hicks import HicksConstantParams, HicksPeriodicParams


# -- scalars and matrices ---------------------------------------------------

def real_to_json(x) -> float:
    return float(x) + 0.0  # folds -0.0 into 0.0


def complex_to_json(z) -> list[float]:
    z = complex(z)
    return [real_to_json(z.real), real_to_json(z.imag)]


def matrix_to_json(M) -> list:
    return [[complex_to_json(z) for z in row] for row in np.asarray(M)]


def parse_complex(v) -> complex:
    if isinstance(v, bool):
        raise SchemaError(f"not a number: {v!r}")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        return complex(v[0], v[1])
    raise SchemaError(f"expected a number or an [re, im] pair, got {v!r}")


def parse_matrix(v, n: int | None = None) -> np.ndarray:
    if not isinstance(v, list) or not v or not all(isinstance(r, list) for r in v):
        raise SchemaError("matrix must be a non-empty list of rows")
    rows = [[parse_complex(z) for z in r] for r in v]
    size = len(rows)
    if any(len(r) != size for r in rows):
        raise SchemaError("matrix must be square")
    if n is not None and size != n:
        raise SchemaError(f"expected a {n}x{n} matrix, got {size}x{size}")
    return lt.as_matrix(rows)


def _int_list(v, name: str) -> tuple[int, ...]:
    if not isinstance(v, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in v):
        raise SchemaError(f"{name} must be a list of integers")
    return tuple(v)


def _require(doc: dict, *keys: str) -> None:
    if not isinstance(doc, dict):
        raise SchemaError("document must be a JSON object")
    missing = [k for k in keys if k not in doc]
    if missing:
        raise SchemaError(f"missing field(s): {', '.join(missing)}")


# -- system documents -------------------------------------------------------

def load_system(doc: dict) -> CoefficientSystem:
    """System document: ``m, n, t0, kind, periods, coefficients``."""
    _require(doc, "m", "n", "kind", "coefficients")
    m, n, kind = doc["m"], doc["n"], doc["kind"]
    if not isinstance(m, int) or m < 1 or not isinstance(n, int) or n < 1:
        raise SchemaError("m and n must be positive integers")
    if kind not in KINDS or kind == "hicks":
        raise SchemaError(f"unsupported system kind {kind!r}")
    t0 = _int_list(doc.get("t0", [0] * m), "t0")
    if len(t0) != m:
        raise SchemaError("t0 must have m entries")
    entries = doc["coefficients"]
    if not isinstance(entries, list):
        raise SchemaError("coefficients must be a list")
    table = {}
    for e in entries:
        _require(e, "alpha", "matrix")
        alpha = e["alpha"]
        if not isinstance(alpha, int) or not 1 <= alpha <= m:
            raise SchemaError(f"alpha must be an axis in 1..{m}")
        offset = _int_list(e.get("offset", [0] * m), "offset")
        if len(offset) != m:
            raise SchemaError("offset must have m entries")
        key = (alpha, offset)
        if key in table:
            raise SchemaError(f"duplicate coefficient entry {key}")
        table[key] = parse_matrix(e["matrix"], n)
    try:
        if kind == "constant":
            mats = []
            for a in range(1, m + 1):
                found = [M for (alpha, _), M in table.items() if alpha == a]
                if len(found) != 1:
                    raise SchemaError(f"constant system needs exactly one matrix for axis {a}")
                mats.append(found[0])
            return CoefficientSystem.constant(mats, t0)
        if kind == "multi_periodic_table":
            _require(doc, "periods")
            return CoefficientSystem.multi_periodic(table, _int_list(doc["periods"], "periods"), t0)
        if "extent" in doc:
            extent = _int_list(doc["extent"], "extent")
        else:
            extent = tuple(max(o[i] for _, o in table) for i in range(m)) if table else (0,) * m
        return CoefficientSystem.window(table, extent, t0)
    except SchemaError:
        raise
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def dump_system(sys: CoefficientSystem) -> dict:
    doc: dict[str, Any] = {"m": sys.m, "n": sys.n, "t0": list(sys.t0), "kind": sys.kind}
    if sys.kind == "constant":
        coeffs = [{"alpha": a, "offset": [0] * sys.m, "matrix": matrix_to_json(M)}
                  for a, M in enumerate(sys.matrices, 1)]
    elif sys.kind in ("multi_periodic_table", "whole_lattice_table_window"):
        coeffs = [{"alpha": a, "offset": list(o), "matrix": matrix_to_json(M)}
                  for (a, o), M in sorted(sys.table.items())]
    else:
        raise ValueError(f"systems of kind {sys.kind!r} have no table document")
    if sys.periods is not None:
        doc["periods"] = list(sys.periods.periods)
    if sys.extent is not None:
        doc["extent"] = list(sys.extent)
    doc["coefficients"] = coeffs
    return doc


def is_hicks_doc(doc) -> bool:
    return isinstance(doc, dict) and ("gamma" in doc or "f" in doc)


def load_hicks(doc: dict):
    """Hicks model document, constant or periodic."""
    _require(doc, "kind")
    try:
        if doc["kind"] == "constant":
            _require(doc, "gamma", "alpha")
            return HicksConstantParams(parse_complex(doc["gamma"]), parse_complex(doc["alpha"]))
        if doc["kind"] == "periodic":
            _require(doc, "T", "f_minus1", "f", "g")
            f = [parse_complex(v) for v in doc["f"]]
            g = [parse_complex(v) for v in doc["g"]]
            if len(f) != doc["T"] or len(g) != doc["T"]:
                raise SchemaError("f and g must each hold T values")
            return HicksPeriodicParams(parse_complex(doc["f_minus1"]), tuple(f), tuple(g))
    except SchemaError:
        raise
    except (TypeError, ValueError) as exc:
        raise SchemaError(str(exc)) from exc
    raise SchemaError(f"unknown Hicks model kind {doc['kind']!r}")


def dump_hicks(p) -> dict:
    if isinstance(p, HicksConstantParams):
        return {"kind": "constant", "gamma": complex_to_json(p.gamma), "alpha": complex_to_json(p.alpha)}
    return {"kind": "periodic", "T": p.T, "f_minus1": complex_to_json(p.f_minus1),
            "f": [complex_to_json(v) for v in p.f], "g": [complex_to_json(v) for v in p.g]}


def load_synth(doc: dict):
    """Generator document: ``periods, t0, P`` (offset/matrix list) and ``B`` (m matrices)."""
    _require(doc, "periods", "P", "B")
    periods = _int_list(doc["periods"], "periods")
    m = len(periods)
    t0 = _int_list(doc.get("t0", [0] * m), "t0")
    if not isinstance(doc["P"], list) or not isinstance(doc["B"], list):
        raise SchemaError("P and B must be lists")
    P = {}
    for e in doc["P"]:
        _require(e, "offset", "matrix")
        P[_int_list(e["offset"], "offset")] = parse_matrix(e["matrix"])
    B = [parse_matrix(b) for b in doc["B"]]
    return P, periods, B, t0


# -- result documents -------------------------------------------------------

def offset_key(offset: Sequence[int]) -> str:
    return ",".join(str(x) for x in offset)


def report_to_json(rep: CompatibilityReport) -> dict:
    return {
        "ok": rep.ok,
        "max_residual": real_to_json(rep.max_residual),
        "points_checked": rep.points_checked,
        "violations": [{"t": list(v.t), "alpha": v.alpha, "beta": v.beta, "residual": real_to_json(v.residual)}
                       for v in rep.violations],
    }


def decomposition_to_json(dec: FloquetDecomposition) -> dict:
    mono = {str(k): matrix_to_json(M) for k, M in dec.monodromy.matrices.items()}
    mults = {str(k): [complex_to_json(z) for z in v] for k, v in dec.multipliers().items()}
    return {
        "mode": dec.mode,
        "t0": list(dec.t0),
        "T": list(dec.periods),
        "B": [matrix_to_json(B) for B in dec.B],
        "P_table": {offset_key(o): matrix_to_json(P) for o, P in dec.P_table.items()},
        "monodromy": mono,
        "multipliers": mults,
        "residuals": {k: real_to_json(v) for k, v in dec.residuals.items()},
    }


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def trajectory_csv(rows: Iterable[tuple[Sequence[int], Sequence[complex]]], m: int,
                   names: Sequence[str]) -> str:
    """CSV with header ``t1..tm`` then ``Re_<name>, Im_<name>`` per component."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = [f"t{i}" for i in range(1, m + 1)]
    for name in names:
        header += [f"Re_{name}", f"Im_{name}"]
    w.writerow(header)
    for t, values in rows:
        row = [str(x) for x in t]
        for z in values:
            z = complex(z)
            row += [repr(real_to_json(z.real)), repr(real_to_json(z.imag))]
        w.writerow(row)
    return buf.getvalue()
