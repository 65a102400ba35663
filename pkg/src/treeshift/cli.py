"""Command-line front end.

Subcommands: generate a counterexample artifact, verify an artifact file,
query dense definedness of a power, emit a verification report, and dump
series partial sums as CSV for external plotting.

Exit codes: 0 success, 1 failed verification, 2 usage error, 3 missing
certificate.  Persisted numbers are exact rational strings or interval
pairs; decimals appear only in human-readable summaries (marked ~) and in
CSV rendering columns.
"""

import argparse
import json
import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

from .construct import (
    CounterexampleRequest,
    artifact_from_json_dict,
    generate,
    verify,
)
from .errors import NoCertificateError, SupNotWitnessedError, TreeshiftError
from .rationals import rat_to_decimal, rat_to_str
from .series import LINEAR_Q, MIXED_Q, SequenceSpec
from .shift import glowne_power_check
from .tree import INF, Window


def _parse_kappa(text: str):
    return INF if text in ("inf", "infinity") else int(text)


def _parse_q(text: str) -> SequenceSpec:
    if text == "linear":
        return LINEAR_Q
    if text == "mixed":
        return MIXED_Q
    raise argparse.ArgumentTypeError(f"unknown q family: {text!r} (use linear|mixed)")


def _window_args(parser):
    parser.add_argument("--max-trunk", type=int, default=None)
    parser.add_argument("--max-branch", type=int, default=None)
    parser.add_argument("--max-depth", type=int, default=None)


def _window_from(args, base: Window) -> Window:
    return Window(
        base.max_trunk if args.max_trunk is None else args.max_trunk,
        base.max_branch if args.max_branch is None else args.max_branch,
        base.max_depth if args.max_depth is None else args.max_depth,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treeshift",
        description=(
            "Construct and verify subnormal weighted shifts on directed trees "
            "whose n-th power is densely defined while the (n+1)-th is not."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="run the counterexample pipeline")
    g.add_argument("--n", type=int, required=True, help="target power (S^n dense, S^(n+1) not)")
    g.add_argument("--kappa", type=_parse_kappa, default=0, help="trunk length (int or 'inf')")
    g.add_argument("--q", type=_parse_q, default=LINEAR_Q, help="base sequence: linear|mixed")
    g.add_argument("--width", type=Fraction, default=None, help="series enclosure width target")
    g.add_argument("--threshold", type=Fraction, default=None, help="divergence witness threshold")
    _window_args(g)
    g.add_argument("--out", type=Path, required=True)

    v = sub.add_parser("verify", help="re-run all certificate checks on an artifact")
    v.add_argument("artifact", type=Path)
    _window_args(v)

    d = sub.add_parser("domain-check", help="dense definedness of S^power")
    d.add_argument("artifact", type=Path)
    d.add_argument("--power", type=int, required=True)

    r = sub.add_parser("report", help="emit a verification report")
    r.add_argument("artifact", type=Path)
    r.add_argument("--format", choices=("json", "csv"), default="json")
    r.add_argument("--out", type=Path, default=None)

    p = sub.add_parser("partial-sums", help="CSV of series terms and partial sums")
    p.add_argument("artifact", type=Path)
    p.add_argument("--exponent", type=int, required=True, help="exponent l of sum alpha_i q_i^l")
    p.add_argument("--count", type=int, default=200, help="number of rows")
    p.add_argument("--out", type=Path, required=True)
    return parser


def _load_doc(path: Path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _cmd_generate(args) -> int:
    base = CounterexampleRequest(n=args.n, kappa=args.kappa, q=args.q)
    cert = base.cert
    if args.width is not None:
        cert = replace(cert, series_width=args.width)
    if args.threshold is not None:
        cert = replace(cert, divergence_threshold=args.threshold)
    request = CounterexampleRequest(
        n=args.n,
        kappa=args.kappa,
        q=args.q,
        cert=cert,
        window=_window_from(args, base.window),
    )
    artifact = generate(request)
    args.out.write_text(artifact.to_json(), encoding="utf-8")
    nd = artifact.certificates["nd"]
    c_mid = rat_to_decimal(artifact.c.mid(), 8)
    print(f"wrote {args.out}")
    print(f"  c ~ {c_mid}, nd({args.n}) {nd[args.n].verdict}, nd({args.n + 1}) {nd[args.n + 1].verdict}")
    return 0


def _cmd_verify(args) -> int:
    doc = _load_doc(args.artifact)
    stored = Window(**doc["window"])
    window = _window_from(args, stored)
    report = verify(doc, window=window)
    for record in report.records:
        print(record.line())
    print(f"verification {'PASSED' if report.passed else 'FAILED'}")
    return 0 if report.passed else 1


def _cmd_domain_check(args) -> int:
    doc = _load_doc(args.artifact)
    artifact = artifact_from_json_dict(doc)
    cert = glowne_power_check(artifact, args.power)
    print(json.dumps(cert.to_json(), sort_keys=True, indent=1))
    verdict = "densely defined" if cert.in_domain else "NOT densely defined"
    print(f"S^{args.power} is {verdict}")
    return 0


def _cmd_report(args) -> int:
    doc = _load_doc(args.artifact)
    report = verify(doc)
    certs = doc["certificates"]
    if args.format == "json":
        payload = {
            "passed": report.passed,
            "cc_max_residual": certs["cc"]["max_residual"],
            "cc_algebra_bound": certs["cc"]["algebra_bound"],
            "h_positive_on_support": certs["cc"]["h_positive_on_support"],
            "consist6_max_residual": certs["consist6"]["max_residual"],
            "consist6_residuals": dict(report.consist6_by_vertex),
            "checks": [
                {
                    "name": r.name,
                    "passed": r.passed,
                    "vertex": r.vertex,
                    "residual": r.residual,
                    "detail": r.detail,
                }
                for r in report.records
            ],
        }
        text = json.dumps(payload, sort_keys=True, indent=1) + "\n"
    else:
        lines = ["name,passed,vertex,residual,detail"]
        for r in report.records:
            lines.append(
                f"{r.name},{int(r.passed)},{r.vertex or ''},{r.residual or ''},{r.detail}"
            )
        text = "\n".join(lines) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    return 0 if report.passed else 1


def _cmd_partial_sums(args) -> int:
    doc = _load_doc(args.artifact)
    artifact = artifact_from_json_dict(doc)
    alpha = artifact.alpha
    lines = ["index,term,partial_sum,term_exact,partial_sum_exact"]
    total = Fraction(0)
    for i in range(1, args.count + 1):
        term = alpha.value(i) * alpha.q.value(i) ** args.exponent
        total += term
        lines.append(
            f"{i},{rat_to_decimal(term)},{rat_to_decimal(total)},"
            f"{rat_to_str(term)},{rat_to_str(total)}"
        )
    args.out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(
        f"wrote {args.out} (series sum_i alpha_i*q_i^{args.exponent}; multiply by the "
        f"normalization constant c in {interval_note(artifact)} for the weighted series)"
    )
    return 0


def interval_note(artifact) -> str:
    return f"[{rat_to_decimal(artifact.c.lo, 8)}, {rat_to_decimal(artifact.c.hi, 8)}]"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "generate": _cmd_generate,
        "verify": _cmd_verify,
        "domain-check": _cmd_domain_check,
        "report": _cmd_report,
        "partial-sums": _cmd_partial_sums,
    }
    try:
        return handlers[args.command](args)
    except (NoCertificateError, SupNotWitnessedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TreeshiftError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
