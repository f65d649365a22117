"""Command line front end: bound, certify, verify, gen.

Exit codes: 0 success, 2 boundary failure (no strict certificate at the
requested precision), 3 solver failure (numeric solve did not converge),
1 any other error.  --batch treats the input as a directory of .json
files, or as JSON lines with one polynomial per line, and fans the work
out over a bounded process pool.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence

from .certify import BoundaryFailure, Certificate, exact_sobs, verify_certificate
from .cover import CoverInfeasible
from .generate import POLY_CLASSES, random_instance
from .polyring import SparsePoly, format_rational, poly_dumps, poly_loads
from .socp import SolverFailure, UncoveredSupport, lower_bound

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BOUNDARY = 2
EXIT_SOLVER = 3


@dataclass
class RunReport:
    """Machine-readable outcome of one CLI work item."""

    command: str
    status: str
    xi: Optional[float] = None
    exact_xi: Optional[str] = None
    iterations: Optional[int] = None
    num_triples: Optional[int] = None
    certificate_bits: Optional[int] = None
    reason: str = ""
    phases: Dict[str, float] = field(default_factory=dict)

    def dumps(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    def lines(self) -> List[str]:
        out = [f"status={self.status}"]
        if self.xi is not None:
            out.append(f"xi={self.xi:.12g}")
        if self.exact_xi is not None:
            out.append(f"exact_xi={self.exact_xi}")
        if self.iterations is not None:
            out.append(f"iterations={self.iterations}")
        if self.num_triples is not None:
            out.append(f"num_triples={self.num_triples}")
        if self.certificate_bits is not None:
            out.append(f"certificate_bits={self.certificate_bits}")
        if self.reason:
            out.append(f"reason={self.reason}")
        for name, seconds in self.phases.items():
            out.append(f"time_{name}={seconds:.3f}")
        return out


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _batch_items(path: str) -> List[str]:
    """Batch work items: every .json file of a directory, or JSON lines."""
    if path != "-" and os.path.isdir(path):
        names = sorted(fn for fn in os.listdir(path) if fn.endswith(".json"))
        return [_read_text(os.path.join(path, fn)) for fn in names]
    return [ln for ln in _read_text(path).splitlines() if ln.strip()]


def _bound_work(text: str, delta: float, odd_mode: bool, dump: Optional[str]) -> RunReport:
    report = RunReport(command="bound", status="ok")
    t0 = time.perf_counter()
    poly = poly_loads(text)
    report.phases["parse"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    try:
        result = lower_bound(poly, delta=delta, odd_mode=odd_mode)
    except SolverFailure as err:
        report.status, report.reason = "solver-failure", str(err)
        return report
    except (CoverInfeasible, UncoveredSupport) as err:
        report.status, report.reason = "error", str(err)
        return report
    report.phases["solve"] = time.perf_counter() - t0
    report.xi = result.xi
    if result.solution is not None:
        report.iterations = result.solution.iterations
    if result.plan is not None:
        report.num_triples = result.plan.num_triples
    if dump and result.problem is not None:
        with open(dump, "w", encoding="utf-8") as handle:
            handle.write(result.problem.to_json())
    return report


def _certify_work(
    text: str,
    xi: Optional[str],
    delta_socp: float,
    delta_round: float,
    margin: float,
    odd_mode: bool,
) -> tuple:
    report = RunReport(command="certify", status="ok")
    t0 = time.perf_counter()
    poly = poly_loads(text)
    report.phases["parse"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    try:
        cert = exact_sobs(
            poly,
            xi=xi,
            delta_socp=delta_socp,
            delta_round=delta_round,
            margin=margin,
            odd_mode=odd_mode,
        )
    except BoundaryFailure as err:
        report.status, report.reason = "boundary-failure", str(err)
        return report, None
    except SolverFailure as err:
        report.status, report.reason = "solver-failure", str(err)
        return report, None
    except (CoverInfeasible, UncoveredSupport, ValueError) as err:
        report.status, report.reason = "error", str(err)
        return report, None
    report.phases["certify"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    check = verify_certificate(poly, cert)
    report.phases["verify"] = time.perf_counter() - t0
    if not check.ok:
        report.status, report.reason = "error", f"self-check failed: {check.reason}"
        return report, None
    report.xi = float(cert.xi)
    report.exact_xi = format_rational(cert.xi)
    report.num_triples = len(cert.triples)
    report.certificate_bits = cert.bit_size
    return report, cert


def _status_exit(status: str) -> int:
    return {
        "ok": EXIT_OK,
        "boundary-failure": EXIT_BOUNDARY,
        "solver-failure": EXIT_SOLVER,
    }.get(status, EXIT_ERROR)


def _emit_report(report: RunReport, as_json: bool) -> None:
    if as_json:
        print(report.dumps())
    else:
        for line in report.lines():
            print(line)


def _batch_bound(args) -> int:
    lines = _batch_items(args.input)
    worker_args = [(ln, args.delta_socp, args.odd_mode, None) for ln in lines]
    worst = EXIT_OK
    with ProcessPoolExecutor() as pool:
        for report in pool.map(_bound_work, *zip(*worker_args)):
            print(report.dumps())
            worst = max(worst, _status_exit(report.status))
    return worst


def _batch_certify(args) -> int:
    lines = _batch_items(args.input)
    worker_args = [
        (ln, args.xi, args.delta_socp, args.delta_round, args.margin, args.odd_mode)
        for ln in lines
    ]
    worst = EXIT_OK
    with ProcessPoolExecutor() as pool:
        for report, cert in pool.map(_certify_work, *zip(*worker_args)):
            if cert is not None:
                payload = asdict(report)
                payload["certificate"] = cert.to_json()
                print(json.dumps(payload, sort_keys=True))
            else:
                print(report.dumps())
            worst = max(worst, _status_exit(report.status))
    return worst


def _cmd_bound(args) -> int:
    if args.batch:
        return _batch_bound(args)
    report = _bound_work(_read_text(args.input), args.delta_socp, args.odd_mode, args.dump_socp)
    _emit_report(report, args.json)
    return _status_exit(report.status)


def _cmd_certify(args) -> int:
    if args.batch:
        return _batch_certify(args)
    report, cert = _certify_work(
        _read_text(args.input),
        args.xi,
        args.delta_socp,
        args.delta_round,
        args.margin,
        args.odd_mode,
    )
    if cert is not None:
        text = cert.dumps()
        if args.output:
            with open(args.output, "w", encoding="utf-8") as handle:
                handle.write(text)
        if args.json:
            payload = asdict(report)
            payload["certificate"] = cert.to_json()
            print(json.dumps(payload, sort_keys=True))
        else:
            if not args.output:
                print(text)
            for line in report.lines():
                print(line, file=sys.stderr)
    else:
        _emit_report(report, args.json)
    return _status_exit(report.status)


def _cmd_verify(args) -> int:
    poly = poly_loads(_read_text(args.input))
    cert = Certificate.loads(_read_text(args.certificate))
    result = verify_certificate(poly, cert)
    if args.json:
        print(json.dumps({"ok": result.ok, "reason": result.reason}, sort_keys=True))
    else:
        print(f"ok={'true' if result.ok else 'false'}")
        print(f"reason={result.reason}")
    return EXIT_OK if result.ok else EXIT_ERROR


def _cmd_gen(args) -> int:
    for i in range(args.count):
        seed = None if args.seed is None else args.seed + i
        inst = random_instance(
            n=args.n,
            degree=args.degree,
            terms=args.terms,
            poly_class=args.poly_class,
            interior=args.interior,
            seed=seed,
        )
        if args.json:
            meta = {
                "n": inst.n,
                "degree": inst.degree,
                "poly_class": inst.poly_class,
                "interior": inst.interior,
                "seed": inst.seed,
            }
            print(json.dumps({"poly": json.loads(poly_dumps(inst.poly)), "meta": meta}))
        else:
            print(poly_dumps(inst.poly))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="soncert",
        description="Lower bounds and exact rational certificates for sparse polynomials.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    bound = sub.add_parser("bound", help="compute the conic lower bound")
    bound.add_argument("input", help="polynomial JSON file, or - for stdin")
    bound.add_argument("--delta-socp", type=float, default=1e-8, help="solver accuracy")
    bound.add_argument("--odd-mode", action="store_true", help="odd-denominator mediated sets")
    bound.add_argument("--dump-socp", metavar="PATH", help="write the standard form as JSON")
    bound.add_argument("--json", action="store_true", help="machine-readable report")
    bound.add_argument("--batch", action="store_true", help="input is a directory of .json files or JSON lines")
    bound.set_defaults(func=_cmd_bound)

    certify = sub.add_parser("certify", help="produce an exact rational certificate")
    certify.add_argument("input", help="polynomial JSON file, or - for stdin")
    certify.add_argument("--xi", help="certify this exact rational bound instead of solving for one")
    certify.add_argument("--delta-socp", type=float, default=1e-8, help="solver accuracy")
    certify.add_argument("--delta-round", type=float, default=1e-5, help="rounding precision")
    certify.add_argument("--margin", type=float, default=1e-4, help="backoff below the numeric bound")
    certify.add_argument("--odd-mode", action="store_true", help="odd-denominator mediated sets")
    certify.add_argument("-o", "--output", metavar="PATH", help="write the certificate here")
    certify.add_argument("--json", action="store_true", help="machine-readable report")
    certify.add_argument("--batch", action="store_true", help="input is a directory of .json files or JSON lines")
    certify.set_defaults(func=_cmd_certify)

    verify = sub.add_parser("verify", help="check a certificate exactly")
    verify.add_argument("input", help="polynomial JSON file, or - for stdin")
    verify.add_argument("certificate", help="certificate JSON file")
    verify.add_argument("--json", action="store_true", help="machine-readable report")
    verify.set_defaults(func=_cmd_verify)

    gen = sub.add_parser("gen", help="generate benchmark instances")
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--n", type=int, default=2, help="number of variables")
    gen.add_argument("--degree", type=int, default=8)
    gen.add_argument("--terms", type=int, default=12, help="term budget")
    gen.add_argument("--poly-class", choices=POLY_CLASSES, default="standard-simplex")
    gen.add_argument("--interior", action="store_true", help="add a unit constant for slack")
    gen.add_argument("--count", type=int, default=1)
    gen.add_argument("--json", action="store_true", help="wrap each instance with metadata")
    gen.set_defaults(func=_cmd_gen)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
