"""Command-line front end: problem files in, deterministic reports out.

A problem file is a strict JSON document:

    {"version": "1", "task": "<subcommand>", "payload": {...}, "options": {...}}

Unknown fields anywhere in the document are rejected with a JSON-pointer
path. Reports serialize with a fixed field order and shortest round-trip
floats, so identical inputs produce byte-identical bytes on disk.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__, backend
from .bilateral import (
    PiecewiseSymbol,
    bilateral_frame_number,
    fiber_frame_bounds,
    minimality_check,
)
from .corona import corona_infimum, unilateral_frame_number
from .errors import (
    ComputeError,
    OrbitFramesError,
    ParseError,
    SchemaError,
)
from .hardy import (
    AnalyticMatrixFunction,
    blaschke_from_zeros,
    make_grid,
    matrix_symbol_from_json,
    pair_to_complex,
)
from .modelspace import model_space_diagonal, model_space_truncated
from .orbits import OrbitSystem, frame_bounds, rank_one_classifier
from .similarity import similarity_verify

TASKS = (
    "frame-bounds",
    "corona-check",
    "model-space",
    "similarity",
    "frame-number",
    "bilateral-frame",
    "bilateral-number",
    "rank-one",
)

# option keys each task accepts in the problem file / on the command line
TASK_OPTIONS = {
    "frame-bounds": ("frame_tol",),
    "corona-check": ("grid_radial", "grid_angular", "threshold", "refine"),
    "model-space": ("order",),
    "similarity": ("order", "kernel_tol"),
    "frame-number": ("grid_radial", "grid_angular", "threshold"),
    "bilateral-frame": (),
    "bilateral-number": (),
    "rank-one": ("frame_tol",),
}

OPTION_DEFAULTS = {
    "frame_tol": None,  # relative 1e-9 inside the frame report
    "grid_radial": 64,
    "grid_angular": 256,
    "threshold": 1e-6,
    "refine": True,
    "order": None,
    "kernel_tol": 1e-7,
}

INT_OPTIONS = {"grid_radial", "grid_angular", "order"}
FLOAT_OPTIONS = {"frame_tol", "threshold", "kernel_tol"}
BOOL_OPTIONS = {"refine"}


# ---------------------------------------------------------------------------
# strict schema walking


def _fail(pointer: str, why: str):
    raise SchemaError(f"{pointer or '/'}: {why}")


def _expect_object(value, pointer, required, optional=()):
    if not isinstance(value, dict):
        _fail(pointer, "expected an object")
    for key in required:
        if key not in value:
            _fail(pointer, f"missing required field '{key}'")
    allowed = set(required) | set(optional)
    for key in value:
        if key not in allowed:
            _fail(f"{pointer}/{key}", "unknown field")
    return value


def _expect_number(value, pointer) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(pointer, "expected a number")
    if not math.isfinite(value):
        _fail(pointer, "number must be finite")
    return float(value)


def _expect_pair(value, pointer) -> complex:
    if not isinstance(value, list) or len(value) != 2:
        _fail(pointer, "expected a [re, im] pair")
    return complex(_expect_number(value[0], f"{pointer}/0"),
                   _expect_number(value[1], f"{pointer}/1"))


def _expect_complex_matrix(value, pointer) -> np.ndarray:
    if not isinstance(value, list) or not value:
        _fail(pointer, "expected a non-empty list of rows")
    rows = []
    width = None
    for i, row in enumerate(value):
        if not isinstance(row, list) or not row:
            _fail(f"{pointer}/{i}", "expected a non-empty row")
        if width is None:
            width = len(row)
        elif len(row) != width:
            _fail(f"{pointer}/{i}", f"row length {len(row)} != {width}")
        rows.append([_expect_pair(v, f"{pointer}/{i}/{j}")
                     for j, v in enumerate(row)])
    return np.array(rows, dtype=np.complex128)


def _expect_complex_vector(value, pointer) -> np.ndarray:
    if not isinstance(value, list) or not value:
        _fail(pointer, "expected a non-empty list of [re, im] pairs")
    return np.array([_expect_pair(v, f"{pointer}/{i}")
                     for i, v in enumerate(value)], dtype=np.complex128)


def _expect_poly(value, pointer, allow_empty=False):
    # an empty coefficient list is the canonical zero polynomial
    if not isinstance(value, list) or (not value and not allow_empty):
        _fail(pointer, "expected a non-empty coefficient list")
    for i, v in enumerate(value):
        _expect_pair(v, f"{pointer}/{i}")


def _expect_matrix_symbol(value, pointer) -> AnalyticMatrixFunction:
    if not isinstance(value, list) or not value:
        _fail(pointer, "expected a non-empty list of rows")
    width = None
    for i, row in enumerate(value):
        if not isinstance(row, list) or not row:
            _fail(f"{pointer}/{i}", "expected a non-empty row")
        if width is None:
            width = len(row)
        elif len(row) != width:
            _fail(f"{pointer}/{i}", f"row length {len(row)} != {width}")
        for j, entry in enumerate(row):
            ep = f"{pointer}/{i}/{j}"
            _expect_object(entry, ep, required=("num",), optional=("den",))
            _expect_poly(entry["num"], f"{ep}/num", allow_empty=True)
            if "den" in entry:
                _expect_poly(entry["den"], f"{ep}/den")
    filled = [[{"num": e["num"], "den": e.get("den", [[1.0, 0.0]])}
               for e in row] for row in value]
    try:
        return matrix_symbol_from_json(filled)
    except OrbitFramesError as exc:
        _fail(pointer, f"invalid rational data ({exc})")


def _expect_piecewise(value, pointer) -> PiecewiseSymbol:
    _expect_object(value, pointer, required=("m", "pieces"))
    m = value["m"]
    if isinstance(m, bool) or not isinstance(m, int) or m < 1:
        _fail(f"{pointer}/m", "expected a positive integer")
    pieces = value["pieces"]
    if not isinstance(pieces, list) or not pieces:
        _fail(f"{pointer}/pieces", "expected a non-empty list")
    parsed = []
    for i, piece in enumerate(pieces):
        pp = f"{pointer}/pieces/{i}"
        _expect_object(piece, pp, required=("arc", "matrix"))
        arc = piece["arc"]
        if not isinstance(arc, list) or len(arc) != 2:
            _fail(f"{pp}/arc", "expected [start, end]")
        s = _expect_number(arc[0], f"{pp}/arc/0")
        e = _expect_number(arc[1], f"{pp}/arc/1")
        mat = _expect_complex_matrix(piece["matrix"], f"{pp}/matrix")
        parsed.append(((s, e), mat))
    try:
        return PiecewiseSymbol(m, parsed)
    except (ValueError, OrbitFramesError) as exc:
        _fail(pointer, str(exc))


# ---------------------------------------------------------------------------
# problem file loading


def load_problem(path: str, task: str):
    """Parse and validate a problem file for the given task."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ComputeError(f"cannot read problem file: {exc}")
    try:
        doc = json.loads(raw.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise ParseError(f"problem file is not UTF-8: {exc}")
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"line {exc.lineno}, column {exc.colno}: {exc.msg}")
    _expect_object(doc, "", required=("version", "task", "payload"),
                   optional=("options",))
    if doc["version"] != "1":
        _fail("/version", f"unsupported version {doc['version']!r}")
    if doc["task"] not in TASKS:
        _fail("/task", f"unknown task {doc['task']!r}")
    if doc["task"] != task:
        _fail("/task", f"problem file is for task '{doc['task']}', "
                       f"invoked as '{task}'")
    options = _parse_options(doc.get("options", {}), task)
    digest = hashlib.sha256(raw).hexdigest()
    return doc["payload"], options, digest


def _parse_options(value, task: str) -> dict:
    _expect_object(value, "/options", required=(),
                   optional=TASK_OPTIONS[task])
    out = {}
    for key in TASK_OPTIONS[task]:
        if key not in value:
            continue
        v = value[key]
        pointer = f"/options/{key}"
        if key in BOOL_OPTIONS:
            if not isinstance(v, bool):
                _fail(pointer, "expected a boolean")
            out[key] = v
        elif key in INT_OPTIONS:
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                _fail(pointer, "expected a positive integer")
            out[key] = v
        else:
            val = _expect_number(v, pointer)
            if val <= 0:
                _fail(pointer, "expected a positive number")
            out[key] = val
    return out


def resolve_options(task: str, file_options: dict, args) -> dict:
    """Defaults, overridden by the problem file, overridden by flags."""
    flag_map = {
        "grid_radial": args.grid_radial,
        "grid_angular": args.grid_angular,
        "order": args.order,
        "kernel_tol": args.kernel_tol,
        "frame_tol": args.frame_tol,
    }
    out = {}
    for key in TASK_OPTIONS[task]:
        val = OPTION_DEFAULTS[key]
        if key in file_options:
            val = file_options[key]
        if flag_map.get(key) is not None:
            val = flag_map[key]
        out[key] = val
    return out


# ---------------------------------------------------------------------------
# task runners: payload -> (result dict, verdict, corona certificate or None)


def _run_frame_bounds(payload, options):
    _expect_object(payload, "/payload", required=("T", "G"))
    T = _expect_complex_matrix(payload["T"], "/payload/T")
    G = _expect_complex_matrix(payload["G"], "/payload/G")
    try:
        sys_ = OrbitSystem(T, G)
    except ValueError as exc:
        _fail("/payload", str(exc))
    report = frame_bounds(sys_, frame_tol=options["frame_tol"])
    return report.to_json_dict(), bool(report.is_frame), None


def _run_corona_check(payload, options):
    _expect_object(payload, "/payload", required=("F", "theta"))
    F = _expect_matrix_symbol(payload["F"], "/payload/F")
    theta = _expect_matrix_symbol(payload["theta"], "/payload/theta")
    grid = make_grid(options["grid_radial"], options["grid_angular"])
    cert = corona_infimum(F, theta, grid, threshold=options["threshold"],
                          refine=options["refine"])
    return cert.to_json_dict(), bool(cert.passed), cert


def _run_model_space(payload, options):
    _expect_object(payload, "/payload", required=(),
                   optional=("theta", "diagonal_zeros"))
    has_theta = "theta" in payload
    has_zeros = "diagonal_zeros" in payload
    if has_theta == has_zeros:
        _fail("/payload", "provide exactly one of 'theta', 'diagonal_zeros'")
    if has_theta:
        theta = _expect_matrix_symbol(payload["theta"], "/payload/theta")
        space = model_space_truncated(theta, N=options["order"])
    else:
        zeros = payload["diagonal_zeros"]
        if not isinstance(zeros, list) or not zeros:
            _fail("/payload/diagonal_zeros", "expected a list of zero lists")
        blocks = []
        for i, zl in enumerate(zeros):
            pointer = f"/payload/diagonal_zeros/{i}"
            if not isinstance(zl, list) or not zl:
                _fail(pointer, "expected a non-empty list of [re, im] pairs")
            vals = [_expect_pair(z, f"{pointer}/{j}")
                    for j, z in enumerate(zl)]
            blocks.append(blaschke_from_zeros(vals))
        space = model_space_diagonal(blocks, N=options["order"])
    return space.to_json_dict(), None, None


def _run_similarity(payload, options):
    _expect_object(payload, "/payload", required=("T", "G"))
    T = _expect_complex_matrix(payload["T"], "/payload/T")
    G = _expect_complex_matrix(payload["G"], "/payload/G")
    res = similarity_verify(T, G, N=options["order"],
                            kernel_tol=options["kernel_tol"])
    verdict = bool((not res.advisory) and res.intertwine_residual <= 1e-6)
    return res.to_json_dict(), verdict, None


def _run_frame_number(payload, options):
    _expect_object(payload, "/payload", required=("theta",))
    theta = _expect_matrix_symbol(payload["theta"], "/payload/theta")
    res = unilateral_frame_number(theta,
                                  n_radial=options["grid_radial"],
                                  n_angular=options["grid_angular"],
                                  threshold=options["threshold"])
    verdict = bool(res.F_constructed is not None
                   and res.construction_certificate is not None
                   and res.construction_certificate.passed)
    return res.to_json_dict(), verdict, None


def _run_bilateral_frame(payload, options):
    _expect_object(payload, "/payload", required=("G", "sigma"))
    G = _expect_piecewise(payload["G"], "/payload/G")
    sigma = _expect_piecewise(payload["sigma"], "/payload/sigma")
    report = fiber_frame_bounds(G, sigma)
    return report.to_json_dict(), bool(report.is_frame), None


def _run_bilateral_number(payload, options):
    _expect_object(payload, "/payload", required=("sigma",))
    sigma = _expect_piecewise(payload["sigma"], "/payload/sigma")
    p, gens = bilateral_frame_number(sigma)
    result = {"p": int(p), "generators": gens.to_json_dict()}
    if p >= 1:
        minimal = bool(minimality_check(sigma, p))
        result["minimal"] = minimal
        result["fiber_report"] = fiber_frame_bounds(gens, sigma).to_json_dict()
        verdict = minimal
    else:
        result["minimal"] = None
        result["fiber_report"] = None
        verdict = False  # degenerate: the subspace is {0}
    return result, verdict, None


def _run_rank_one(payload, options):
    _expect_object(payload, "/payload", required=("f", "g", "X"))
    f = _expect_complex_vector(payload["f"], "/payload/f")
    g = _expect_complex_vector(payload["g"], "/payload/g")
    X = _expect_complex_matrix(payload["X"], "/payload/X")
    report = rank_one_classifier(f, g, X, frame_tol=options["frame_tol"])
    return report.to_json_dict(), bool(report.is_frame), None


RUNNERS = {
    "frame-bounds": _run_frame_bounds,
    "corona-check": _run_corona_check,
    "model-space": _run_model_space,
    "similarity": _run_similarity,
    "frame-number": _run_frame_number,
    "bilateral-frame": _run_bilateral_frame,
    "bilateral-number": _run_bilateral_number,
    "rank-one": _run_rank_one,
}

# result keys holding bulky numeric matrices, dropped under --no-matrices
MATRIX_KEYS = {
    "model-space": ("basis", "shift_matrix"),
    "similarity": ("synthesis", "coinvariant_basis", "similarity_map",
                   "compressed_shift"),
}


# ---------------------------------------------------------------------------
# report assembly and output


def _sanitize(value):
    """Make a result tree strict-JSON safe: non-finite floats become None."""
    if isinstance(value, dict):
        return {k: _sanitize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_sanitize(v) for v in value]
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, (np.floating, np.integer)):
        return _sanitize(value.item())
    return value


def build_report(task: str, digest: str, options: dict, result: dict,
                 verdict, no_matrices: bool) -> dict:
    if no_matrices:
        for key in MATRIX_KEYS.get(task, ()):
            result.pop(key, None)
    shown_options = dict(options)
    shown_options["no_matrices"] = bool(no_matrices)
    return {
        "tool": "orbitframes",
        "version": __version__,
        "task": task,
        "input_digest": digest,
        "options": _sanitize(shown_options),
        "result": _sanitize(result),
        "verdict": verdict,
    }


def render_report(report: dict) -> str:
    return json.dumps(report, ensure_ascii=False, allow_nan=False,
                      indent=2) + "\n"


def _atomic_write(path: str, data: str):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def report_path_for(problem_path: str) -> str:
    base, _ = os.path.splitext(problem_path)
    return base + ".report.json"


def write_grid_csv(path: str, cert):
    lines = ["re,im,lambda_min"]
    for z, lam in zip(cert.grid.points, cert.lambda_values):
        lines.append(f"{float(z.real)!r},{float(z.imag)!r},{float(lam)!r}")
    _atomic_write(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orbitframes",
        description="Frame analysis of operator orbits and circle symbols.")
    parser.add_argument("--version", action="version",
                        version=f"orbitframes {__version__}")
    sub = parser.add_subparsers(dest="task", required=True)
    for task in TASKS:
        p = sub.add_parser(task, help=f"run a {task} problem file")
        p.add_argument("problem", help="path to the problem JSON file")
        p.add_argument("--grid-radial", type=int, default=None,
                       dest="grid_radial", help="radial grid count")
        p.add_argument("--grid-angular", type=int, default=None,
                       dest="grid_angular", help="angular grid count")
        p.add_argument("--order", type=int, default=None,
                       help="truncation order")
        p.add_argument("--kernel-tol", type=float, default=None,
                       dest="kernel_tol", help="relative kernel tolerance")
        p.add_argument("--frame-tol", type=float, default=None,
                       dest="frame_tol", help="frame verdict tolerance")
        p.add_argument("--strict", action="store_true",
                       help="exit 2 when the mathematical verdict is negative")
        p.add_argument("--no-matrices", action="store_true",
                       dest="no_matrices",
                       help="omit bulky matrices from the report")
        p.add_argument("--dump-grid", default=None, metavar="PATH",
                       dest="dump_grid",
                       help="write per-grid-point lambda_min CSV "
                            "(corona-check only)")
        p.add_argument("--out", default=None, metavar="PATH",
                       help="report output path "
                            "(default: <problem>.report.json)")
    return parser


def run(args) -> int:
    task = args.task
    if args.dump_grid and task != "corona-check":
        raise ComputeError("--dump-grid requires the corona-check task")
    payload, file_options, digest = load_problem(args.problem, task)
    options = resolve_options(task, file_options, args)
    try:
        result, verdict, cert = RUNNERS[task](payload, options)
    except SchemaError:
        raise
    except OrbitFramesError as exc:
        raise ComputeError(f"{type(exc).__name__}: {exc}")
    report = build_report(task, digest, options, result, verdict,
                          args.no_matrices)
    text = render_report(report)
    out_path = args.out or report_path_for(args.problem)
    _atomic_write(out_path, text)
    if args.dump_grid and cert is not None:
        write_grid_csv(args.dump_grid, cert)
    sys.stdout.write(text)
    if args.strict and verdict is False:
        return 2
    return 0


def main(argv=None) -> int:
    backend.apply_thread_cap()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except ParseError as exc:
        print(f"error: ParseError: {exc}", file=sys.stderr)
        return 1
    except SchemaError as exc:
        print(f"error: SchemaError: {exc}", file=sys.stderr)
        return 1
    except ComputeError as exc:
        print(f"error: ComputeError: {exc}", file=sys.stderr)
        return 1
    except OrbitFramesError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
