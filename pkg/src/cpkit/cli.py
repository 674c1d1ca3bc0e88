"""Command-line front end.

    cpkit check <file> [--basis standard|gellmann|<path>] [--tol 1e-9]
    cpkit convert <file> --to {choi,gks,kraus,superop} [--basis ...]
    cpkit compare <file>
    cpkit expand <file> [--t-max 0.1] [--samples 5]

Channel files hold ``{"kind", "dim", "payload", "basis"}`` with matrices as
nested lists of ``[re, im]`` pairs; model files hold ``{"n", "m", "h_s",
"h_e", "h_se", "env_state_index"}``.  Reports go to stdout as JSON (numbers
with 17 significant digits) unless ``--pretty`` is given.  Exit codes: 0 for
success / CPTP, 1 for valid input that fails the check, 2 for input errors.
"""

import argparse
import hashlib
import json
import math
import os
import sys
from typing import Any, List, Optional

import numpy as np

from cpkit import channels
from cpkit.bases import OperatorBasis, gellmann_basis, standard_basis
from cpkit.channels import GksMatrix, KrausSet, SuperOp
from cpkit.errors import CPKitError, NotCompletelyPositive
from cpkit.linalg import HERMITIAN_TOL, herm_eig, hermiticity_defect
from cpkit.opensys import OpenSystemModel, expansion, verify_expansion

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
KINDS = ("kraus", "superop", "choi", "gks")


class InputError(Exception):
    """Malformed input file; the message carries the offending field path."""


# -- JSON encoding ----------------------------------------------------------


def _format_number(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def canonical_dumps(obj: Any) -> str:
    """JSON text with every float rendered to 17 significant digits."""
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, float, np.integer, np.floating)):
        return _format_number(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(k))}: {canonical_dumps(v)}" for k, v in obj.items())
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(canonical_dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def encode_matrix(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def decode_matrix(data, path: str, shape: Optional[tuple] = None) -> np.ndarray:
    if not isinstance(data, list) or not data:
        raise InputError(f"{path}: expected a non-empty list of rows")
    rows = []
    width = None
    for i, row in enumerate(data):
        if not isinstance(row, list):
            raise InputError(f"{path}[{i}]: expected a list of [re, im] pairs")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise InputError(f"{path}[{i}]: ragged matrix, row has {len(row)} entries, expected {width}")
        vals = []
        for j, entry in enumerate(row):
            ok = (
                isinstance(entry, list)
                and len(entry) == 2
                and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in entry)
            )
            if not ok:
                raise InputError(f"{path}[{i}][{j}]: expected an [re, im] pair of numbers")
            vals.append(complex(entry[0], entry[1]))
        rows.append(vals)
    m = np.array(rows, dtype=complex)
    if shape is not None and m.shape != shape:
        raise InputError(f"{path}: expected shape {shape[0]}x{shape[1]}, got {m.shape[0]}x{m.shape[1]}")
    return m


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None


def _require(doc: dict, key: str, path: str = ""):
    if not isinstance(doc, dict) or key not in doc:
        raise InputError(f"{path}{key}: missing field")
    return doc[key]


def _positive_int(value, field: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise InputError(f"{field}: expected a positive integer")
    return value


# -- bases, channels, models ------------------------------------------------


def basis_from_json(doc, n: int, field: str) -> OperatorBasis:
    elems = _require(doc, "elements", f"{field}.")
    if not isinstance(elems, list):
        raise InputError(f"{field}.elements: expected a list of matrices")
    mats = [decode_matrix(e, f"{field}.elements[{a}]", (n, n)) for a, e in enumerate(elems)]
    try:
        return OperatorBasis(np.array(mats), "custom")
    except CPKitError as exc:
        raise InputError(f"{field}: {exc}") from None


def resolve_basis(choice, n: int, field: str = "basis") -> OperatorBasis:
    if choice == "standard":
        return standard_basis(n)
    if choice == "gellmann":
        return gellmann_basis(n)
    if isinstance(choice, dict):
        return basis_from_json(choice, n, field)
    if isinstance(choice, str):
        doc = _load_json(choice)
        dim = _require(doc, "dim", f"{choice}: ")
        if dim != n:
            raise InputError(f"{choice}: basis dim {dim} does not match channel dim {n}")
        return basis_from_json(doc, n, choice)
    raise InputError(f"{field}: expected 'standard', 'gellmann' or a custom basis")


def basis_to_json(f: OperatorBasis):
    if f.label in ("standard", "gellmann"):
        return f.label
    return {"elements": [encode_matrix(x) for x in f.elements]}


def load_channel(path: str) -> SuperOp:
    doc = _load_json(path)
    kind = _require(doc, "kind")
    if kind not in KINDS:
        raise InputError(f"kind: expected one of {', '.join(KINDS)}, got {kind!r}")
    n = _positive_int(_require(doc, "dim"), "dim")
    payload = _require(doc, "payload")
    if kind == "kraus":
        if not isinstance(payload, list) or not payload:
            raise InputError("payload: expected a non-empty list of Kraus matrices")
        ops = [decode_matrix(a, f"payload[{i}]", (n, n)) for i, a in enumerate(payload)]
        return channels.superop_from_kraus(KrausSet(tuple(ops)))
    m = decode_matrix(payload, "payload", (n * n, n * n))
    if kind == "superop":
        return SuperOp(m)
    if kind == "choi":
        return channels.choi_inverse(GksMatrix(m, standard_basis(n)))
    basis = resolve_basis(_require(doc, "basis"), n)
    return channels.gks_inverse(GksMatrix(m, basis))


def channel_doc(kind: str, n: int, payload, basis=None) -> dict:
    doc = {"kind": kind, "dim": n, "payload": payload}
    if basis is not None:
        doc["basis"] = basis
    return doc


def load_model(path: str) -> OpenSystemModel:
    doc = _load_json(path)
    n = _positive_int(_require(doc, "n"), "n")
    m = _positive_int(_require(doc, "m"), "m")
    h_s = decode_matrix(_require(doc, "h_s"), "h_s", (n, n))
    h_e = decode_matrix(_require(doc, "h_e"), "h_e", (m, m))
    h_se = decode_matrix(_require(doc, "h_se"), "h_se", (n * m, n * m))
    env = doc.get("env_state_index", 0)
    if not isinstance(env, int) or isinstance(env, bool):
        raise InputError("env_state_index: expected an integer")
    for name, arr in (("h_s", h_s), ("h_e", h_e), ("h_se", h_se)):
        if hermiticity_defect(arr) > 1e-10:
            raise InputError(f"{name}: matrix is not Hermitian")
    try:
        return OpenSystemModel(n, m, h_s, h_e, h_se, env)
    except CPKitError as exc:
        raise InputError(str(exc)) from None


# -- reports ----------------------------------------------------------------


def _chop(x: float, eps: float = 1e-14) -> float:
    return 0.0 if abs(x) < eps else float(x)


def matrix_hash(m: np.ndarray) -> str:
    """Short digest of a matrix rounded to 12 decimals (sign of zero normalised)."""
    r = np.round(np.asarray(m, dtype=complex), 12) + 0.0
    text = canonical_dumps(encode_matrix(r + 0.0 + 0.0j))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _spectrum_row(name: str, m: np.ndarray, tol: float) -> dict:
    hermitian = hermiticity_defect(m) <= tol
    row = {"name": name, "hash": matrix_hash(m), "hermitian": bool(hermitian)}
    if hermitian:
        eig = [_chop(x) for x in herm_eig(m, tol=tol).eigenvalues]
        row["eigenvalues"] = eig
        row["psd"] = bool(eig[-1] >= -tol)
    else:
        row["eigenvalues"] = None
        row["psd"] = False
    return row


def compare_rows(s: SuperOp, tol: float) -> List[dict]:
    n = s.dim
    std, gm = standard_basis(n), gellmann_basis(n)
    return [
        _spectrum_row("choi", channels.choi(s).g, tol),
        _spectrum_row("gks/pauli", channels.gks(s, gm).g, tol),
        _spectrum_row("dpj", channels.dpj(s, std), tol),
        _spectrum_row("pskh/standard", channels.pskh(s, std), tol),
        _spectrum_row("pskh/pauli", channels.pskh(s, gm), tol),
        _spectrum_row("fc", channels.fc(s, std), tol),
    ]


def _emit(report: dict, pretty: bool, table=None):
    if pretty and table is not None:
        print(table)
    elif pretty:
        print(json.dumps(json.loads(canonical_dumps(report)), indent=2))
    else:
        print(canonical_dumps(report))


def _default_tol() -> float:
    env = os.environ.get("CPKIT_TOL")
    if env is None:
        return HERMITIAN_TOL
    try:
        return float(env)
    except ValueError:
        raise InputError(f"CPKIT_TOL: not a number: {env!r}") from None


def cmd_check(args) -> int:
    s = load_channel(args.file)
    tol = args.tol if args.tol is not None else _default_tol()
    f = resolve_basis(args.basis, s.dim, "--basis")
    g = channels.gks(s, f)
    verdict = channels.check_gks(g, tol)
    report = {
        "basis": f.label,
        "hermiticity_preserving": verdict.hermiticity_preserving,
        "trace_preserving": verdict.trace_preserving,
        "completely_positive": verdict.completely_positive,
        "min_eigenvalue": _chop(verdict.min_eigenvalue),
    }
    if verdict.completely_positive:
        report["kraus_rank"] = len(channels.kraus_from_gks(g, tol))
    table = "\n".join(f"{k:24s} {v}" for k, v in report.items())
    _emit(report, args.pretty, table)
    return EXIT_OK if verdict.completely_positive and verdict.trace_preserving else EXIT_FAIL


def cmd_convert(args) -> int:
    s = load_channel(args.file)
    n = s.dim
    tol = _default_tol()
    if args.to == "superop":
        doc = channel_doc("superop", n, encode_matrix(s.matrix))
    elif args.to == "choi":
        doc = channel_doc("choi", n, encode_matrix(channels.choi(s).g), "standard")
    else:
        f = resolve_basis(args.basis, n, "--basis")
        g = channels.gks(s, f)
        if args.to == "gks":
            doc = channel_doc("gks", n, encode_matrix(g.g), basis_to_json(f))
        else:
            kraus = channels.kraus_from_gks(g, tol)
            doc = channel_doc("kraus", n, [encode_matrix(a) for a in kraus])
    _emit(doc, args.pretty)
    return EXIT_OK


def cmd_compare(args) -> int:
    s = load_channel(args.file)
    if not 2 <= s.dim <= 4:
        raise InputError(f"dim: compare supports dimensions 2..4, got {s.dim}")
    tol = _default_tol()
    rows = compare_rows(s, tol)
    report = {"dim": s.dim, "rows": rows}
    lines = [f"{'isomorphism':14s} {'hash':16s} {'psd':5s} eigenvalues"]
    for r in rows:
        eig = "(not Hermitian)" if r["eigenvalues"] is None else " ".join(f"{x:+.6f}" for x in r["eigenvalues"])
        lines.append(f"{r['name']:14s} {r['hash']:16s} {str(r['psd']):5s} {eig}")
    _emit(report, args.pretty, "\n".join(lines))
    return EXIT_OK


def cmd_expand(args) -> int:
    model = load_model(args.file)
    if not 0 < args.t_max <= 1:
        raise InputError("--t-max: must lie in (0, 1]")
    if args.samples < 1:
        raise InputError("--samples: must be positive")
    f = gellmann_basis(model.n)
    exp = expansion(model, f)
    ts = [args.t_max / 2**i for i in range(args.samples)]
    rep = verify_expansion(model, f, ts, exp)
    provenance = [["analytic" if a else "numeric" for a in row] for row in exp.g2_analytic]
    report = {
        "n": model.n,
        "m": model.m,
        "basis": f.label,
        "g0": encode_matrix(exp.g0),
        "g1": encode_matrix(exp.g1),
        "g2": encode_matrix(exp.g2),
        "g2_provenance": provenance,
        "samples": [
            {
                "t": s.t,
                "deviation_submatrix": s.deviation_submatrix,
                "deviation_full": s.deviation_full,
                "first_order_deviation": s.first_order_deviation,
                "min_eigenvalue_exact": _chop(s.min_eig_exact),
                "min_eigenvalue_truncated": _chop(s.min_eig_truncated),
            }
            for s in rep.samples
        ],
        "exponent": rep.exponent,
        "cubic_constant": rep.cubic_constant,
        "g2_submatrix_min_eigenvalue": _chop(rep.g2_sub_min_eigenvalue),
        "eps1_dominant": _chop(rep.eps1_dominant),
        "eps1_max_abs": _chop(rep.eps1_max_abs),
        "eps2_min": _chop(rep.eps2_min),
        "checks": {
            "exponent": rep.exponent_ok,
            "g2_submatrix_psd": rep.g2_psd,
            "perturbation": rep.perturbation_ok,
            "exact_psd": rep.exact_psd,
            "truncated_psd": rep.truncated_psd,
        },
        "passed": rep.passed,
    }
    lines = [
        f"N={model.n} M={model.m} basis={f.label}",
        f"{'t':>10s} {'dev(a,b>=1)':>12s} {'min eig g(t)':>13s} {'min eig poly':>13s}",
    ]
    for s in rep.samples:
        lines.append(f"{s.t:10.5f} {s.deviation_submatrix:12.3e} {s.min_eig_exact:13.3e} {s.min_eig_truncated:13.3e}")
    exponent = "n/a (residual at roundoff)" if rep.exponent is None else f"{rep.exponent:.3f}"
    lines += [
        f"log-log exponent        {exponent}",
        f"g2 submatrix min eig    {rep.g2_sub_min_eigenvalue:.3e}",
        f"eps1 (max |.|)          {rep.eps1_max_abs:.3e}",
        f"eps2 (min)              {rep.eps2_min:.3e}",
        f"passed                  {rep.passed}",
    ]
    _emit(report, args.pretty, "\n".join(lines))
    return EXIT_OK if rep.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cpkit", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("file")
        p.add_argument("--pretty", action="store_true", help="human-readable output")

    p = sub.add_parser("check", help="CP / TP / Hermiticity verdicts")
    common(p)
    p.add_argument("--basis", default="standard")
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("convert", help="convert between representations")
    common(p)
    p.add_argument("--to", required=True, choices=["choi", "gks", "kraus", "superop"])
    p.add_argument("--basis", default="gellmann")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("compare", help="compare the matrix isomorphisms")
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("expand", help="short-time GKS expansion of an open system")
    common(p)
    p.add_argument("--t-max", type=float, default=0.1)
    p.add_argument("--samples", type=int, default=5)
    p.set_defaults(func=cmd_expand)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NotCompletelyPositive as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except CPKitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
