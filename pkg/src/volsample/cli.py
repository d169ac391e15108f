"""Command-line interface.

Exit codes: 0 ok, 2 unreadable input, 3 malformed input, 4 usage error,
5 rank deficiency, 6 enumeration limit exceeded.

Sample points are numbered from 1 in all command output.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Optional

from . import __version__
from .errors import VolsampleError
from .generators import generate
from .io import load_instance, read_spec, write_instance
from .measure import total_l2_norm_squared
from .samplers import METHODS, SamplerConfig
from .schmidt import schmidt_decompose, tail_width
from .selection import STRATEGIES, make_certificate, select
from .verify import DEFAULT_MAX_ENUM, DEFAULT_TOL, verify_instance
from .volumes import expected_projection_error, expected_volume

EXIT_OK, EXIT_IO, EXIT_PARSE, EXIT_USAGE, EXIT_RANK, EXIT_BLOWUP = 0, 2, 3, 4, 5, 6


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunReport:
    command: str
    instance: dict
    seed: Optional[int] = None
    summary: dict = field(default_factory=dict)
    results: list = field(default_factory=list)
    wall_time: Optional[float] = None

    def to_dict(self) -> dict:
        out = {
            "command": self.command,
            "instance": self.instance,
            "seed": self.seed,
            "summary": self.summary,
            "results": self.results,
        }
        if self.wall_time is not None:
            out["wall_time"] = self.wall_time
        return out


def _encode(obj: Any) -> str:
    """JSON with floats written to 17 significant digits."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"non-finite number {obj!r} in report")
        text = format(obj, ".17g")
        return text if any(c in text for c in ".en") else text + ".0"
    if isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    if hasattr(obj, "item"):
        return _encode(obj.item())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _k_list(text: str) -> list[int]:
    try:
        ks = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}")
    if not ks or any(k < 0 for k in ks):
        raise argparse.ArgumentTypeError("k values must be nonnegative integers")
    return ks


def _seed(text: str) -> int:
    try:
        seed = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}")
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return seed


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _load(args):
    if args.spec:
        spec = read_spec(args.spec)
        f = generate(spec)
        return f, {"source": "spec", "spec": json.loads(spec.to_json()), "m": f.m, "n": f.n}
    if not args.values:
        raise UsageError("one of --values or --spec is required")
    f = load_instance(args.values, args.weights)
    return f, {"source": "csv", "values": args.values, "weights": args.weights, "m": f.m, "n": f.n}


def _one_based(indices) -> list[int]:
    return [int(i) + 1 for i in indices]


def cmd_decompose(args) -> RunReport:
    f, instance = _load(args)
    d = schmidt_decompose(f, args.rank_tol)
    ks = args.k if args.k is not None else list(range(d.rank + 1))
    return RunReport(
        command="decompose",
        instance=instance,
        summary={
            "sigma": d.sigma.tolist(),
            "rank": d.rank,
            "total_l2_norm_squared": total_l2_norm_squared(f),
        },
        results=[{"k": k, "tail_width": tail_width(d, k)} for k in ks],
    )


def cmd_select(args) -> RunReport:
    if args.draws < 1:
        raise UsageError("--draws must be >= 1")
    f, instance = _load(args)
    d = schmidt_decompose(f)
    config = SamplerConfig(seed=args.seed, method=args.method, mcmc_steps=args.mcmc_steps)
    strategies = args.strategy.split(",")
    for s in strategies:
        if s not in STRATEGIES:
            raise UsageError(f"unknown strategy {s!r}; expected one of {', '.join(STRATEGIES)}")
    scale = total_l2_norm_squared(f)
    results = []
    for k in args.k or [1]:
        tail2 = tail_width(d, k) ** 2
        entry = {
            "k": k,
            "analytic": {
                "tail_width": math.sqrt(tail2),
                "expected_squared_error": expected_projection_error(d, k) if k <= d.rank else None,
                "expected_volume": expected_volume(d, k) if k >= 1 else None,
            },
            "selections": [],
        }
        for strategy in strategies:
            res = select(f, k, strategy, config, args.draws, args.max_enum, d)
            cert = make_certificate(k, tail2, res, scale)
            sel = res.to_dict()
            sel["indices"] = _one_based(res.indices)
            cert_d = cert.to_dict()
            cert_d["indices"] = _one_based(cert.indices)
            entry["selections"].append({"result": sel, "certificate": cert_d})
        results.append(entry)
    return RunReport("select", instance, seed=args.seed, results=results)


def cmd_verify(args) -> RunReport:
    f, instance = _load(args)
    checks = verify_instance(
        f,
        args.k or [1],
        tol=args.tol,
        max_enum=args.max_enum,
        gram_scale=1.0 + 1e-6 if args.corrupt_gram else 1.0,
    )
    passed = all(c.passed for c in checks)
    return RunReport(
        "verify",
        instance,
        summary={"passed": passed, "tolerance": args.tol},
        results=[c.to_dict() for c in checks],
    )


def cmd_generate(args) -> RunReport:
    spec = read_spec(args.spec)
    f = generate(spec)
    write_instance(f, args.out_values, args.out_weights)
    return RunReport(
        "generate",
        {"source": "spec", "spec": json.loads(spec.to_json()), "m": f.m, "n": f.n},
        summary={"values": args.out_values, "weights": args.out_weights},
    )


def _print_text(report: RunReport, out) -> None:
    inst = report.instance
    print(f"instance: {inst.get('m')} x {inst.get('n')} ({inst['source']})", file=out)
    for key, value in report.summary.items():
        print(f"{key}: {value}", file=out)
    if report.command == "decompose":
        for r in report.results:
            print(f"d_{r['k']} = {r['tail_width']:.17g}", file=out)
    elif report.command == "select":
        for r in report.results:
            a = r["analytic"]
            print(f"k = {r['k']}: d_k = {a['tail_width']:.6g}, expected error = {a['expected_squared_error']}", file=out)
            for s in r["selections"]:
                res, cert = s["result"], s["certificate"]
                print(
                    f"  {res['method']:<15} indices {res['indices']}  error {res['squared_error']:.6g}"
                    f"  prefactor^2 {cert['prefactor_squared']}  {'ok' if cert['satisfied'] else 'VIOLATED'}",
                    file=out,
                )
    elif report.command == "verify":
        for c in report.results:
            status = "skip" if c["skipped"] else ("pass" if c["passed"] else "FAIL")
            print(f"  [{status}] k={c['k']} {c['name']:<17} max rel dev {c['max_rel_dev']:.3e} {c['detail']}", file=out)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="volsample", description="Volume sampling for sample-based subspace approximation.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def instance_args(p):
        p.add_argument("--values", metavar="PATH", help="value matrix CSV (rows = coordinates, columns = points)")
        p.add_argument("--weights", metavar="PATH", help="single-column weights CSV (default: all 1)")
        p.add_argument("--spec", metavar="PATH", help="instance spec JSON instead of CSV input")
        p.add_argument("--json", action="store_true", help="print a JSON report")
        p.add_argument("--timing", action="store_true", help="include wall time in the report")

    p = sub.add_parser("decompose", help="weighted singular values and tail widths")
    instance_args(p)
    p.add_argument("--k", type=_k_list, help="comma-separated k values (default 0..rank)")
    p.add_argument("--rank-tol", type=float, default=1e-12, help="relative rank tolerance")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("select", help="select k sample points and certify the error bound")
    instance_args(p)
    p.add_argument("--k", type=_k_list, default=[1])
    p.add_argument("--strategy", default="exhaustive", help=f"comma-separated from {', '.join(STRATEGIES)}")
    p.add_argument("--draws", type=int, default=16, help="draws for volume-best-of")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--method", choices=METHODS, default="kdpp")
    p.add_argument("--mcmc-steps", type=_positive, default=None)
    p.add_argument("--max-enum", type=_positive, default=10**6)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("verify", help="check the volume identities by brute force")
    instance_args(p)
    p.add_argument("--k", type=_k_list, default=[1])
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--max-enum", type=_positive, default=DEFAULT_MAX_ENUM)
    p.add_argument("--corrupt-gram", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("generate", help="write an instance from a spec JSON to CSV files")
    p.add_argument("--spec", metavar="PATH", required=True)
    p.add_argument("--out-values", metavar="PATH", required=True)
    p.add_argument("--out-weights", metavar="PATH")
    p.add_argument("--json", action="store_true")
    p.add_argument("--timing", action="store_true")
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    start = time.perf_counter()
    try:
        report = args.func(args)
    except UsageError as exc:
        print(f"volsample: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VolsampleError as exc:
        print(f"volsample: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    if args.timing:
        report.wall_time = time.perf_counter() - start
    if args.json:
        print(_encode(report.to_dict()))
    else:
        _print_text(report, sys.stdout)
    if report.command == "verify" and not report.summary["passed"]:
        return 1
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
