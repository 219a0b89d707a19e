"""``comwit`` command line.

Exit codes are a stable contract: 0 success, 1 bad input, 2 a reproduce
check failed (a FLAG or FAIL where none was expected), 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Optional, Sequence

from . import __version__, statezoo
from .commonsearch import common_edge_witness, common_npt_witness, common_schmidt_witness, lambda_scan
from .opcore import DensityState
from .productopt import min_product_expectation, min_ratio_product
from .reproduce import TARGETS, RunConfig, to_jsonable, run_reproduce
from .textio import dumps, io_roundtrip, read_operator
from .witnesscore import (
    edge_witness,
    schmidt_witness,
    validate_witness,
    w1_witness,
    witness_from_npt_eigvec,
)

EXIT_OK, EXIT_INPUT, EXIT_CHECK, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    # usage errors must not collide with the check-failure exit code
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _params(items: Sequence[str]) -> dict:
    out = {}
    for item in items or ():
        key, sep, val = item.partition("=")
        if not sep:
            raise ValueError(f"parameter {item!r} is not of the form key=value")
        vals = [float(v) for v in val.split(",")]
        out[key.strip()] = vals if len(vals) > 1 or key.strip() == "coeffs" else vals[0]
    return out


FAMILIES = {
    "max-entangled": lambda p: statezoo.max_entangled(int(p.get("d", 3))),
    "pure": lambda p: statezoo.pure_bipartite(p["coeffs"]),
    "phi": lambda p: statezoo.phi_state(p["a"], p["b"]),
    "chi": lambda p: statezoo.chi_state(p["t"]),
    "two-level": lambda p: statezoo.two_level_pure(p["beta"]),
    "tau": lambda p: statezoo.tau(p["b"], p.get("s", 0.0)),
    "delta-tri": lambda p: statezoo.delta_tri(p["a"], p["b"], p["c"]),
    "horodecki": lambda p: statezoo.horodecki_alpha(p["alpha"]),
    "isotropic": lambda p: statezoo.isotropic(p["alpha"], int(p.get("d", 3))),
}


def _state_from_file(path: str) -> DensityState:
    return DensityState(read_operator(path), label=path)


def _emit(text: str, output: Optional[str]):
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _common_json(res) -> dict:
    return {
        "method": res.method,
        "found": res.found,
        "evidence": list(res.evidence),
        "intersection_dim": res.intersection_dim,
        "flags": list(res.flags),
        "witness": None if res.witness is None else dumps(res.witness.op),
        "validation": None if res.validation is None else res.validation.to_json(),
        "bound": None if res.bound is None else res.bound.to_json(),
    }


def _checks_csv(checks) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "status", "expected", "detail"])
    for c in checks:
        w.writerow([c["name"], c["status"], c["expected"], c["detail"]])
    return buf.getvalue()


# --- subcommands -----------------------------------------------------------------


def cmd_state(args) -> int:
    rho = FAMILIES[args.family](_params(args.params))
    _emit(dumps(rho.op), args.output)
    return EXIT_OK


def cmd_witness(args) -> int:
    if args.kind == "pt-eigvec":
        W = witness_from_npt_eigvec(_state_from_file(args.state), args.subsystem)
    elif args.kind == "edge":
        Q = read_operator(args.Q) if args.Q else None
        W = edge_witness(read_operator(args.P), Q, args.eps, args.subsystem)
    elif args.kind == "w1":
        W = w1_witness(read_operator(args.Q), read_operator(args.P), args.k, args.subsystem)
    else:
        W = schmidt_witness(args.m, args.k_class)
    _emit(dumps(W.op), args.output)
    return EXIT_OK


def cmd_validate(args) -> int:
    rep = validate_witness(read_operator(args.op), args.restarts, args.seed)
    _emit(_json(rep.to_json()), args.output)
    return EXIT_OK


def cmd_eps0(args) -> int:
    res = min_product_expectation(read_operator(args.op), args.restarts, args.seed, workers=args.workers)
    _emit(_json(res.to_json()), args.output)
    return EXIT_OK


def cmd_k0(args) -> int:
    res = min_ratio_product(read_operator(args.num), read_operator(args.den),
                            restarts=args.restarts, seed=args.seed, workers=args.workers)
    _emit(_json(res.to_json()), args.output)
    return EXIT_OK


def cmd_common(args) -> int:
    states = [_state_from_file(p) for p in args.states]
    if args.method == "schmidt":
        res = common_schmidt_witness(states, k=args.k_class)
    else:
        if len(states) != 2:
            raise ValueError(f"common {args.method} takes exactly two states, got {len(states)}")
        if args.method == "npt":
            res = common_npt_witness(states[0], states[1], args.subsystem)
        else:
            res = common_edge_witness(states[0], states[1], args.subsystem, offset=args.offset,
                                      paper_mode=args.paper_mode, restarts=args.restarts, seed=args.seed)
    if args.format == "matrix-text":
        if res.witness is None:
            raise ValueError(f"no common witness found ({res.method}; flags {list(res.flags)})")
        _emit(dumps(res.witness.op), args.output)
    else:
        _emit(_json(_common_json(res)), args.output)
    return EXIT_OK


def cmd_scan(args) -> int:
    rho1 = statezoo.horodecki_alpha(args.alpha)
    if args.family == "case1":
        rho2 = statezoo.two_level_pure(args.beta)
        params = {"alpha": args.alpha, "beta": args.beta}
    else:
        rho2 = statezoo.horodecki_alpha(args.gamma)
        params = {"alpha": args.alpha, "gamma": args.gamma}
    W = read_operator(args.witness) if args.witness else None
    scan = lambda_scan(rho1, rho2, args.grid, subsystem=args.subsystem, witness=W, params=params)
    text = _json(scan.to_json()) if args.format == "json" else scan.to_csv()
    _emit(text, args.output)
    return EXIT_OK


def cmd_reproduce(args) -> int:
    cfg = RunConfig(seed=args.seed, restarts=args.restarts, grid=args.grid,
                    paper_mode=args.paper_mode, output=args.output, format=args.format)
    rep = run_reproduce(args.target, cfg)
    body = rep.to_json()
    if args.format == "json":
        text = json.dumps(body, indent=2, sort_keys=True) + "\n"
    elif args.format == "csv":
        scan = rep.results.get("scan")
        text = scan.to_csv() if scan is not None else _checks_csv(rep.checks)
    else:
        op = rep.results.get("witness")
        if op is None:
            raise ValueError(f"target {args.target} has no witness matrix to dump")
        text = dumps(op)
    _emit(text, args.output)
    for c in rep.checks:
        print(f"{c['status']:4s} {args.target}:{c['name']}  {c['detail']}", file=sys.stderr)
    return EXIT_OK if rep.ok else EXIT_CHECK


def cmd_io(args) -> int:
    op = io_roundtrip(args.path)
    _emit(dumps(op), args.output)
    return EXIT_OK


# --- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--restarts", type=int, default=64)
    common.add_argument("--grid", type=int, default=101)
    common.add_argument("--paper-mode", action="store_true")
    common.add_argument("--format", choices=("json", "csv", "matrix-text"), default=None)
    common.add_argument("--output", "-o", default=None)

    p = _Parser(prog="comwit", description="Common entanglement witnesses for pairs of states.")
    p.add_argument("--version", action="version", version=f"comwit {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("state", parents=[common], help="emit a state from the built-in families")
    s.add_argument("family", choices=sorted(FAMILIES))
    s.add_argument("--params", nargs="*", default=[], metavar="KEY=VALUE")
    s.set_defaults(func=cmd_state)

    w = sub.add_parser("witness", parents=[common], help="construct a witness operator")
    w.add_argument("kind", choices=("pt-eigvec", "edge", "w1", "schmidt"))
    w.add_argument("--state", help="state file (pt-eigvec)")
    w.add_argument("--P", help="PSD operator file")
    w.add_argument("--Q", help="PSD operator file")
    w.add_argument("--eps", type=float, default=0.0)
    w.add_argument("--k", type=float, default=None, help="offset k (w1)")
    w.add_argument("--m", type=int, default=3, help="local dimension (schmidt)")
    w.add_argument("--class", dest="k_class", type=int, default=2, help="Schmidt class (schmidt)")
    w.add_argument("--subsystem", type=int, default=0)
    w.set_defaults(func=cmd_witness)

    v = sub.add_parser("validate", parents=[common], help="minimize a witness over product vectors")
    v.add_argument("--op", required=True)
    v.set_defaults(func=cmd_validate)

    e = sub.add_parser("eps0", parents=[common], help="estimate the admissible offset of an edge witness")
    e.add_argument("--op", required=True)
    e.add_argument("--workers", type=int, default=1)
    e.set_defaults(func=cmd_eps0)

    k = sub.add_parser("k0", parents=[common], help="estimate the admissible offset of a ratio form")
    k.add_argument("--num", required=True)
    k.add_argument("--den", required=True)
    k.add_argument("--workers", type=int, default=1)
    k.set_defaults(func=cmd_k0)

    c = sub.add_parser("common", parents=[common], help="search for a common witness")
    c.add_argument("method", choices=("npt", "edge", "schmidt"))
    c.add_argument("states", nargs="+", help="state files")
    c.add_argument("--subsystem", type=int, default=0)
    c.add_argument("--offset", type=float, default=None)
    c.add_argument("--class", dest="k_class", type=int, default=None)
    c.set_defaults(func=cmd_common)

    sc = sub.add_parser("scan", parents=[common], help="classify mixtures along a segment")
    sc.add_argument("family", choices=("case1", "case2"))
    sc.add_argument("--alpha", type=float, default=3.5)
    sc.add_argument("--beta", type=float, default=0.5)
    sc.add_argument("--gamma", type=float, default=4.5)
    sc.add_argument("--subsystem", type=int, default=1)
    sc.add_argument("--witness", default=None, help="optional witness file traced along the segment")
    sc.set_defaults(func=cmd_scan)

    r = sub.add_parser("reproduce", parents=[common], help="rebuild a worked example and audit it")
    r.add_argument("target", choices=TARGETS)
    r.set_defaults(func=cmd_reproduce)

    i = sub.add_parser("io", parents=[common], help="parse and re-serialize a matrix file")
    i.add_argument("path")
    i.set_defaults(func=cmd_io)
    return p


_DEFAULT_FORMAT = {"scan": "csv", "reproduce": "json", "common": "json"}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = _DEFAULT_FORMAT.get(args.command, "matrix-text")
    if args.command == "witness":
        if args.kind == "w1" and args.k is None:
            parser.error("witness w1 needs --k")
        if args.kind == "pt-eigvec" and not args.state:
            parser.error("witness pt-eigvec needs --state")
        if args.kind in ("edge", "w1") and not (args.P and (args.Q or args.kind == "edge")):
            parser.error(f"witness {args.kind} needs --P and --Q")
    try:
        return args.func(args)
    except OSError as exc:
        print(f"comwit: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError, IndexError) as exc:
        print(f"comwit: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
