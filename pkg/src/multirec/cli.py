"""Command-line front end.

Exit codes: 0 success, 1 malformed input, 2 mathematical precondition
violated (singular coefficient, incompatible system, ...), 3 unsupported
root extraction.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import documents as doc_io
from .engine import TOL_COMPAT, check_compatibility, transition, trajectory, synthesize_compatible
from .errors import (IncompatibleSystemError, PreconditionError,
                     RootExtractionUnsupported, SchemaError)
from .floquet import TOL_FLOQUET, decompose_multi, decompose_periodic, floquet_multipliers, monodromy_multi
from .hicks import (HicksConstantParams, HicksPeriodicParams, hicks_multipliers,
                    hicks_system, hicks_trajectory)

log = logging.getLogger("multirec")

COMMANDS = ("check", "evolve", "transition", "floquet", "multipliers",
            "hicks-evolve", "hicks-multipliers", "synth")

EXIT_OK, EXIT_INPUT, EXIT_MATH, EXIT_UNSUPPORTED = 0, 1, 2, 3


@dataclass
class RunConfig:
    command: str
    input_path: str
    output_path: str | None = None
    t: tuple[int, ...] | None = None
    s: tuple[int, ...] | None = None
    x0: tuple[complex, ...] | None = None
    box: tuple[int, ...] | None = None
    period: tuple[int, ...] | None = None
    m: int | None = None
    tol: float | None = None
    seed: int = 0
    format: str = "csv"


def parse_ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise SchemaError(f"expected comma-separated integers, got {text!r}") from None


def parse_vector(text: str) -> tuple[complex, ...]:
    """Either JSON (numbers or ``[re, im]`` pairs) or comma-separated Python complex literals."""
    text = text.strip()
    if text.startswith("["):
        try:
            values = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"bad vector {text!r}: {exc}") from None
        if not isinstance(values, list):
            raise SchemaError("vector must be a JSON list")
        return tuple(doc_io.parse_complex(v) for v in values)
    try:
        return tuple(complex(x.strip().replace(" ", "")) for x in text.split(","))
    except ValueError:
        raise SchemaError(f"bad vector {text!r}") from None


def _read(path: str):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from None


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output_path:
        Path(cfg.output_path).write_text(text, encoding="utf-8", newline="")
    else:
        sys.stdout.write(text)


def _axes(cfg: RunConfig, doc) -> int:
    for v in (cfg.box, cfg.t, cfg.s, cfg.period):
        if v is not None:
            return len(v)
    if cfg.m is not None:
        return cfg.m
    return int(doc.get("m", 2))


def _load_hicks(doc):
    p = doc_io.load_hicks(doc)
    if isinstance(p, HicksPeriodicParams) and p.hypothesis_violations:
        log.warning("f(k) + g(k) is 0 or 1 at k in %s; the model assumes otherwise",
                    list(p.hypothesis_violations))
    return p


def _hicks_periodic(p) -> HicksPeriodicParams:
    if isinstance(p, HicksConstantParams):
        return HicksPeriodicParams.from_constant(p.gamma, p.alpha)
    return p


def _load(cfg: RunConfig):
    """System (and Hicks params, when the input is a Hicks model) from the input document."""
    doc = _read(cfg.input_path)
    if doc_io.is_hicks_doc(doc):
        p = _load_hicks(doc)
        return hicks_system(_hicks_periodic(p), _axes(cfg, doc)), p
    return doc_io.load_system(doc), None


def _require_compatible(system) -> None:
    rep = check_compatibility(system)
    if not rep.ok:
        v = rep.violations[0]
        raise IncompatibleSystemError(
            f"compatibility fails at t={v.t} for axes ({v.alpha},{v.beta}), residual {v.residual:.3g}")


def _need(value, flag: str):
    if value is None:
        raise SchemaError(f"{flag} is required for this command")
    return value


def _state_names(system, params) -> list[str]:
    if params is not None:
        return ["Y", "C"]
    return [f"x{i}" for i in range(1, system.n + 1)]


def _rows_json(rows, names) -> str:
    return doc_io.dumps([{"t": list(t), "x": {nm: doc_io.complex_to_json(z) for nm, z in zip(names, v)}}
                         for t, v in rows])


def _cmd_check(cfg):
    system, _ = _load(cfg)
    rep = check_compatibility(system, cfg.box, cfg.tol or TOL_COMPAT)
    _emit(cfg, doc_io.dumps(doc_io.report_to_json(rep)))
    return EXIT_OK if rep.ok else EXIT_MATH


def _cmd_evolve(cfg):
    system, params = _load(cfg)
    box = _need(cfg.box, "--box")
    x0 = _need(cfg.x0, "--x0")
    if len(box) != system.m:
        raise SchemaError(f"--box needs {system.m} extents")
    if len(x0) != system.n:
        raise SchemaError(f"--x0 needs {system.n} entries")
    _require_compatible(system)
    rows = trajectory(system, x0, box)
    names = _state_names(system, params)
    if cfg.format == "json":
        _emit(cfg, _rows_json(rows, names))
    else:
        _emit(cfg, doc_io.trajectory_csv(rows, system.m, names))
    return EXIT_OK


def _cmd_transition(cfg):
    system, _ = _load(cfg)
    t = _need(cfg.t, "--t")
    s = cfg.s if cfg.s is not None else system.t0
    _require_compatible(system)
    M = transition(system, t, s)
    _emit(cfg, doc_io.dumps({"t": list(t), "s": list(s), "matrix": doc_io.matrix_to_json(M)}))
    return EXIT_OK


def _cmd_floquet(cfg):
    system, _ = _load(cfg)
    _require_compatible(system)
    tol = cfg.tol or TOL_FLOQUET
    if cfg.period is not None:
        dec = decompose_periodic(system, cfg.period, seed=cfg.seed, tol=tol)
    else:
        dec = decompose_multi(system, seed=cfg.seed, tol=tol)
    _emit(cfg, doc_io.dumps(doc_io.decomposition_to_json(dec)))
    return EXIT_OK


def _cmd_multipliers(cfg):
    system, params = _load(cfg)
    _require_compatible(system)
    mono = monodromy_multi(system)
    out = {
        "T": list(mono.periods),
        "monodromy": {str(a): doc_io.matrix_to_json(C) for a, C in mono.matrices.items()},
        "multipliers": {str(a): [doc_io.complex_to_json(z) for z in floquet_multipliers(C)]
                        for a, C in mono.matrices.items()},
    }
    if params is not None:
        hm = hicks_multipliers(_hicks_periodic(params))
        out["det_identity_residual"] = doc_io.real_to_json(hm.det_identity_residual)
    _emit(cfg, doc_io.dumps(out))
    return EXIT_OK


def _cmd_hicks_evolve(cfg):
    p = _load_hicks(_read(cfg.input_path))
    box = cfg.box if cfg.box is not None else _need(cfg.t, "--box or --t")
    x0 = _need(cfg.x0, "--x0")
    if len(x0) != 2:
        raise SchemaError("--x0 needs two entries (Y0, C0)")
    if cfg.box is None:
        rows = hicks_trajectory(p, x0, box)[-1:]
    else:
        rows = hicks_trajectory(p, x0, box)
    negative = [t for t, st in rows if not st.nonnegative]
    if negative:
        log.warning("income or consumption leaves the non-negative reals at %d of %d points (first at t=%s)",
                    len(negative), len(rows), negative[0])
    plain = [(t, (st.Y, st.C)) for t, st in rows]
    if cfg.format == "json":
        _emit(cfg, _rows_json(plain, ["Y", "C"]))
    else:
        _emit(cfg, doc_io.trajectory_csv(plain, len(box), ["Y", "C"]))
    return EXIT_OK


def _cmd_hicks_multipliers(cfg):
    p = _hicks_periodic(_load_hicks(_read(cfg.input_path)))
    hm = hicks_multipliers(p)
    _emit(cfg, doc_io.dumps({
        "T": p.T,
        "multipliers": [doc_io.complex_to_json(hm.lambda1), doc_io.complex_to_json(hm.lambda2)],
        "trace": doc_io.complex_to_json(hm.trace),
        "det_direct": doc_io.complex_to_json(hm.det_direct),
        "det_identity": doc_io.complex_to_json(hm.det_identity),
        "det_identity_residual": doc_io.real_to_json(hm.det_identity_residual),
    }))
    return EXIT_OK


def _cmd_synth(cfg):
    P, periods, B, t0 = doc_io.load_synth(_read(cfg.input_path))
    try:
        system = synthesize_compatible(P, periods, B, t0)
    except PreconditionError:
        raise
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc
    _emit(cfg, doc_io.dumps(doc_io.dump_system(system)))
    return EXIT_OK


_DISPATCH = {
    "check": _cmd_check,
    "evolve": _cmd_evolve,
    "transition": _cmd_transition,
    "floquet": _cmd_floquet,
    "multipliers": _cmd_multipliers,
    "hicks-evolve": _cmd_hicks_evolve,
    "hicks-multipliers": _cmd_hicks_multipliers,
    "synth": _cmd_synth,
}


def run(cfg: RunConfig) -> int:
    """Execute one command; returns the process exit status."""
    try:
        return _DISPATCH[cfg.command](cfg)
    except RootExtractionUnsupported as exc:
        log.error("unsupported: %s", exc)
        return EXIT_UNSUPPORTED
    except SchemaError as exc:
        log.error("malformed input: %s", exc)
        return EXIT_INPUT
    except PreconditionError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_MATH
    except ValueError as exc:
        log.error("invalid input: %s", exc)
        return EXIT_INPUT


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which would collide with EXIT_MATH
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="multirec",
                     description="Multitime linear recurrences, Floquet factorizations "
                                 "and the multitime Samuelson-Hicks model.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--input", required=True, help="system, Hicks model or generator JSON document")
    parser.add_argument("--output", help="output file (default: stdout)")
    parser.add_argument("--t", help="target lattice point, e.g. 2,3")
    parser.add_argument("--s", help="source lattice point for `transition` (default: t0)")
    parser.add_argument("--x0", help="initial state: 1,0 or 1+2j,0 or [[1,0],[0,1]]")
    parser.add_argument("--box", help="non-negative box extents from t0, e.g. 3,3")
    parser.add_argument("--period", help="single shift period for `floquet` (default: per-axis periods)")
    parser.add_argument("--m", type=int, help="number of axes for Hicks models (default: from other flags, else 2)")
    parser.add_argument("--tol", type=float, help="tolerance override")
    parser.add_argument("--seed", type=int, help="seed for root extraction (default: $MULTIREC_SEED or 0)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv", help="trajectory output format")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    seed = args.seed if args.seed is not None else int(os.environ.get("MULTIREC_SEED", "0"))
    box = parse_ints(args.box) if args.box else None
    if box is not None and any(e < 0 for e in box):
        raise SchemaError("--box extents must be non-negative")
    return RunConfig(
        command=args.command,
        input_path=args.input,
        output_path=args.output,
        t=parse_ints(args.t) if args.t else None,
        s=parse_ints(args.s) if args.s else None,
        x0=parse_vector(args.x0) if args.x0 else None,
        box=box,
        period=parse_ints(args.period) if args.period else None,
        m=args.m,
        tol=args.tol,
        seed=seed,
        format=args.format,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        cfg = config_from_args(args)
    except (SchemaError, ValueError) as exc:
        log.error("malformed arguments: %s", exc)
        return EXIT_INPUT
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
