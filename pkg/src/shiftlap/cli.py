"""Command-line front end.

Exit codes: 0 success, 1 verification failure or non-convergence,
2 usage or parse error, 3 size cap exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import continuum, decimation, oracle
from .errors import ConvergenceError, ForbiddenEigenvalueError, SizeCapError
from .operator import assemble
from .symbolic import Point, default_size_cap, enumerate_level_set

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3

DEFAULT_VERIFY_TOL = 1e-8


class UsageError(Exception):
    pass


def _dump_json(obj) -> str:
    # repr-based float output is the shortest string that round-trips exactly.
    return json.dumps(obj, separators=(",", ":")) + "\n"


def _csv(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def cmd_points(args) -> tuple[str, int]:
    ls = enumerate_level_set(args.N, args.m, args.size_cap)
    fmt = args.format or "text"
    if fmt == "json":
        return _dump_json({"N": args.N, "m": args.m, "points": [{"label": p.label(), "level": p.level} for p in ls]}), 0
    if fmt == "csv":
        return _csv([["label", "level"]] + [[p.label(), p.level] for p in ls]), 0
    return "".join(p.label() + "\n" for p in ls), 0


def cmd_matrix(args) -> tuple[str, int]:
    H = assemble(args.N, args.m, args.size_cap)
    if (args.format or "csv") == "json":
        return _dump_json(H.to_dict()), 0
    return H.to_csv(), 0


def spectrum_payload(N: int, m: int) -> dict:
    entries = decimation.dirichlet_spectrum(N, m)
    return {
        "N": N,
        "m": m,
        "entries": [e.to_dict() for e in entries],
        "total_multiplicity": sum(e.multiplicity for e in entries),
    }


def cmd_spectrum(args) -> tuple[str, int]:
    payload = spectrum_payload(args.N, args.m)
    if (args.format or "json") == "csv":
        rows = [["value", "multiplicity", "base", "born_at", "betas"]]
        for e in payload["entries"]:
            a = e["address"]
            rows.append([repr(e["value"]), e["multiplicity"], a["base"], a["born_at"], a["betas"]])
        return _csv(rows), 0
    return _dump_json(payload), 0


def cmd_basis(args) -> tuple[str, int]:
    pairs = decimation.dirichlet_eigenbasis(args.N, args.m)
    if (args.format or "json") == "csv":
        labels = [p.label() for p in enumerate_level_set(args.N, args.m)]
        rows = [["value", "base", "born_at", "betas", "k"] + labels]
        for pr in pairs:
            a = pr.address
            for k, f in enumerate(pr.functions):
                rows.append([repr(pr.value), a.base.value, a.born_at, a.betas, k] + [repr(float(v)) for v in f.values])
        return _csv(rows), 0
    payload = {
        "N": args.N,
        "m": args.m,
        "pairs": [
            {
                "value": pr.value,
                "multiplicity": pr.multiplicity,
                "address": pr.address.to_dict(),
                "functions": [[float(v) for v in f.values] for f in pr.functions],
            }
            for pr in pairs
        ],
    }
    return _dump_json(payload), 0


def verify_one(N: int, m: int, tol: float, cluster_tol: float | None, size_cap: int | None, corrupt: bool = False) -> dict:
    predicted = decimation.dirichlet_spectrum(N, m)
    if corrupt:
        e = predicted[0]
        predicted[0] = decimation.SpectrumEntry(e.value, e.multiplicity + 1, e.address)
    H = assemble(N, m, size_cap)
    spec = oracle.dirichlet_oracle(H, cluster_tol=cluster_tol)
    report = oracle.spectrum_compare(predicted, spec, tol)
    return {"N": N, "m": m, **report.to_dict()}


def _parse_sweep(text: str) -> list[tuple[int, int]]:
    out = []
    for item in text.split(","):
        try:
            n, m = item.split(":")
            out.append((int(n), int(m)))
        except ValueError:
            raise UsageError(f"bad sweep item {item!r}; expected N:m") from None
    return out


def cmd_verify(args) -> tuple[str, int]:
    tol = DEFAULT_VERIFY_TOL if args.tol is None else args.tol
    if args.sweep:
        reports = [verify_one(n, m, tol, args.cluster_tol, args.size_cap, args.corrupt) for n, m in _parse_sweep(args.sweep)]
        ok = all(r["passed"] for r in reports)
        return _dump_json(reports), 0 if ok else 1
    if args.N is None or args.m is None:
        raise UsageError("verify needs --N and --m (or --sweep)")
    report = verify_one(args.N, args.m, tol, args.cluster_tol, args.size_cap, args.corrupt)
    return _dump_json(report), 0 if report["passed"] else 1


def cmd_limit(args) -> tuple[str, int]:
    tol = continuum.DEFAULT_LIMIT_TOL if args.tol is None else args.tol
    try:
        lam0 = continuum.lam0_for_base(args.base, args.N)
    except ValueError:
        raise UsageError(f"--base must be 1, N, 0 or a number, got {args.base!r}") from None
    trace = continuum.renormalized_limit(args.N, lam0, args.m0, tol, args.max_m)
    code = 0 if trace.converged else 1
    if (args.format or "json") == "csv":
        return trace.to_csv(), code
    return _dump_json(trace.to_dict()), code


def cmd_extend(args) -> tuple[str, int]:
    try:
        p = Point.parse(args.point, args.N)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None
    if p.level > args.m_max:
        raise UsageError(f"point level {p.level} exceeds --m-max {args.m_max}")
    f = continuum.ExtendedEigenfunction.from_one_basis(args.N, args.eta, args.base_symbol)
    value = continuum.evaluate_at(f, p)
    if (args.format or "text") == "json":
        return _dump_json(
            {"N": args.N, "eta": args.eta, "base_symbol": args.base_symbol, "point": p.label(), "value": value}
        ), 0
    return repr(value) + "\n", 0


def _positive_float(s: str) -> float:
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--N", type=int, help="number of symbols")
    common.add_argument("--m", type=int, help="level")
    common.add_argument("--tol", type=_positive_float, default=None,
                        help="comparison tolerance (verify: 1e-8) or convergence tolerance (limit: 1e-12)")
    common.add_argument("--cluster-tol", type=_positive_float, default=None,
                        help="oracle clustering tolerance (default 1e-6 * max(1, |lambda|max))")
    common.add_argument("--size-cap", type=int, default=None,
                        help="maximum |V_m| (default 200000, or $SHIFTLAP_SIZE_CAP)")
    common.add_argument("--format", choices=["text", "json", "csv"], default=None)
    common.add_argument("--out", type=Path, default=None, help="write output here instead of stdout")

    parser = argparse.ArgumentParser(prog="shiftlap", description="Difference operators and spectral decimation on the full one-sided shift.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("points", parents=[common], help="list V_m in canonical order").set_defaults(func=cmd_points, need=("N", "m"))
    sub.add_parser("matrix", parents=[common], help="dump H_m").set_defaults(func=cmd_matrix, need=("N", "m"))
    sub.add_parser("spectrum", parents=[common], help="Dirichlet spectrum by decimation").set_defaults(
        func=cmd_spectrum, need=("N", "m"))
    sub.add_parser("basis", parents=[common], help="explicit Dirichlet eigenbasis").set_defaults(
        func=cmd_basis, need=("N", "m"))

    p = sub.add_parser("verify", parents=[common], help="compare decimation against the Jacobi oracle")
    p.add_argument("--sweep", default=None, help="comma-separated N:m pairs, e.g. 3:1,3:2,4:2")
    p.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify, need=())

    p = sub.add_parser("limit", parents=[common], help="trace N^{m+1} lambda_m along the minus branch")
    p.add_argument("--base", default="1", help="starting eigenvalue: 1, N, 0 or a number")
    p.add_argument("--m0", type=int, default=1)
    p.add_argument("--max-m", type=int, default=None)
    p.set_defaults(func=cmd_limit, need=("N",))

    p = sub.add_parser("extend", parents=[common], help="evaluate an extended lambda=1 eigenfunction at a point")
    p.add_argument("--eta", type=int, required=True)
    p.add_argument("--base-symbol", type=int, required=True)
    p.add_argument("--point", required=True, help="point label, e.g. 1-2-2.1")
    p.add_argument("--m-max", type=int, default=200, help="largest accepted point level")
    p.set_defaults(func=cmd_extend, need=("N",))
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    missing = [f"--{k}" for k in args.need if getattr(args, k) is None]
    if missing:
        parser.error(f"{args.command} requires {' '.join(missing)}")
    if args.size_cap is None:
        try:
            args.size_cap = default_size_cap()
        except ValueError as exc:
            parser.error(str(exc))
    try:
        text, code = args.func(args)
    except SizeCapError as exc:
        print(f"shiftlap: size cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (UsageError, ValueError, ForbiddenEigenvalueError) as exc:
        print(f"shiftlap {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"shiftlap {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if args.out is not None:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
