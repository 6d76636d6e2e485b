"""Command-line front end.

Every command prints one JSON report (sorted keys) on stdout, or a plain
text rendering with --pretty.  Exit codes: 0 ok, 2 input error, 3 negative
result (criterion or reduction failure), 4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import hypergeom as hg
from .ffalg import INF_POINT
from .padic import DigitProfile, PAdicRat, binom_mod_p, check_prime, lucas, parse_rational
from .projsys import RankOneProjSys, compile_oracle, compile_system, group_of_diagonal, group_of_windows
from .stratmod import (
    RankOneSymbol,
    StratModule,
    check_iterative,
    dual,
    e_alpha,
    format_point,
    from_symbol,
    kummer_pullback,
    local_exponents,
    parse_point,
    tensor,
    trivial_module,
)

EXIT_OK, EXIT_INPUT, EXIT_NEGATIVE, EXIT_INTERNAL = 0, 2, 3, 4


class InputError(ValueError):
    pass


class NegativeResult(Exception):
    """Carries a complete report whose outcome is an expected failure."""

    def __init__(self, report):
        super().__init__("negative result")
        self.report = report


class InvariantError(Exception):
    pass


def default_order(p: int, power: int) -> int:
    env = os.environ.get("STRATUS_DEFAULT_ORDER")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise InputError(f"STRATUS_DEFAULT_ORDER must be an integer, got {env!r}") from None
        if n < 1:
            raise InputError("STRATUS_DEFAULT_ORDER must be positive")
        return n
    return p**power


def _prime(text) -> int:
    try:
        return check_prime(int(text))
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from None


def _padic(text, p) -> PAdicRat:
    try:
        return PAdicRat(parse_rational(text), p)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _order(args, p, power):
    n = args.order if args.order is not None else default_order(p, power)
    if n < 1:
        raise InputError("order must be positive")
    return n


# -- lucas / digits -----------------------------------------------------------


def cmd_lucas(args) -> dict:
    p = _prime(args.p)
    alpha = _padic(args.alpha, p)
    if args.n < 0:
        raise InputError("n must be nonnegative")
    out = {"p": p, "alpha": str(alpha.value), "n": args.n, "residue": binom_mod_p(alpha, args.n)}
    if alpha.is_integer():
        out["integer_check"] = lucas(int(alpha.value), args.n, p)
    return out


def cmd_digits(args) -> dict:
    p = _prime(args.p)
    alpha = _padic(args.alpha, p)
    k = args.k_max
    if k < 1:
        raise InputError("k-max must be positive")
    return {"p": p, "alpha": str(alpha.value), "digits": alpha.digits(k),
            "truncations": [alpha.truncation(i) for i in range(1, k + 1)],
            "profile": str(alpha.profile())}


# -- hypergeometric -----------------------------------------------------------


def cmd_hg(args) -> dict:
    p = _prime(args.p)
    h = hg.HGParams(p, _padic(args.alpha, p), _padic(args.beta, p), _padic(args.gamma, p))
    N = _order(args, p, 2)
    n_max = args.precision if args.precision is not None else p**3
    wanted = {m for m in ("criterion", "valuations", "reduce", "verify") if getattr(args, m)}
    if not wanted:
        wanted = {"criterion", "valuations", "reduce", "verify"}
    full = hg.hypergeometric_report(h, N, n_max)
    report = {"params": full["params"]}
    if "criterion" in wanted:
        report["criterion"] = full["criterion"]
        report["correction_bound"] = full["correction_bound"]
    if "valuations" in wanted:
        report["valuations"] = full["valuations"]
        report["second_valuations"] = full["second_valuations"]
    if wanted & {"reduce", "verify"}:
        report["reduction"] = full["reduction"]
        report["exponents"] = full["exponents"]
        red = full["reduction"]
        if red["ok"] and not red["iterative"]:
            raise InvariantError("reduced module fails the iterativity check")
    if "verify" in wanted and full["reduction"]["ok"]:
        M = hg.hypergeometric_module(h, N)
        prec = max(p**3, N + 2)
        report["verification"] = hg.reduced_solution_check(h, M, prec).to_json()
    negative = ("criterion" in report and not report["criterion"]["holds"]) or (
        "reduction" in report and not report["reduction"]["ok"])
    if negative:
        raise NegativeResult(report)
    return report


# -- modules ------------------------------------------------------------------


class Built:
    """A module plus its exact exponents where the construction determines them."""

    def __init__(self, module: StratModule, exponents: dict | None):
        self.module = module
        self.exponents = exponents


def _read_json(ref: str):
    try:
        if ref == "-":
            return json.load(sys.stdin)
        with open(ref) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read module JSON {ref!r}: {exc}") from None


def build_module(spec: str, p: int, N: int) -> Built:
    """e:ALPHA, symbol:C=ALPHA,..., trivial[:RANK], or @FILE / - for module JSON."""
    spec = spec.strip()
    try:
        if spec.startswith("e:"):
            a = PAdicRat(parse_rational(spec[2:]), p)
            return Built(e_alpha(a, N, p), {0: [a.value], INF_POINT: [-a.value]})
        if spec.startswith("symbol:"):
            factors = []
            for part in spec[7:].split(","):
                c, _, a = part.partition("=")
                factors.append((int(c), parse_rational(a)))
            sym = RankOneSymbol(p, tuple(factors))
            exps = {c: [a.value] for c, a in sym.factors}
            exps[INF_POINT] = [-sym.exponent_sum().value]
            return Built(from_symbol(sym, N), exps)
        if spec == "trivial" or spec.startswith("trivial:"):
            rank = int(spec[8:]) if ":" in spec else 1
            return Built(trivial_module(p, N, rank), {})
        if spec == "-" or spec.startswith("@"):
            M = StratModule.from_json(_read_json(spec if spec == "-" else spec[1:]))
            if M.p != p:
                raise InputError(f"module is over p={M.p}, expected {p}")
            return Built(M, None)
    except InputError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"bad module spec {spec!r}: {exc}") from None
    raise InputError(f"unknown module spec {spec!r}")


def _exponent_block(M: StratModule, points, exact):
    out = {}
    for pt in points:
        key = format_point(pt)
        try:
            rep = local_exponents(M, pt)
        except ValueError as exc:
            out[key] = {"error": str(exc)}
            continue
        entry = rep.to_json()
        if exact is not None and pt in exact:
            vals = exact[pt]
            entry["exact"] = [str(v) for v in vals]
            if not rep.matches(vals):
                raise InvariantError(f"exponent digits at {key} disagree with {entry['exact']}")
        out[key] = entry
    return out


def _group(M: StratModule, exact, exps_json):
    if exact is not None and M.rank == 1:
        vals = [v for vs in exact.values() for v in vs]
        return group_of_diagonal(vals, M.p).to_json()
    windows = [w for e in exps_json.values() if "digits" in e for w in e["digits"]]
    return group_of_windows(windows, M.p, bound=max(1, min(len(w) for w in windows) // 2)
                            if windows else 1).to_json()


def _module_report(b: Built) -> dict:
    M = b.module
    pts = sorted(M.singularities | {0, INF_POINT}, key=lambda x: (x == INF_POINT, str(x)))
    exps = _exponent_block(M, pts, b.exponents)
    report = {"module": M.to_json(), "iterative": check_iterative(M).to_json(),
              "exponents": exps, "group": _group(M, b.exponents, exps)}
    if not report["iterative"]["ok"]:
        report["error"] = {"code": "not-iterative", "message": "module fails the iterativity check"}
        raise NegativeResult(report)
    if StratModule.from_json(json.loads(json.dumps(report["module"]))) != M:
        raise InvariantError("module JSON does not round trip")
    return report


def cmd_module(args) -> dict:
    p = _prime(args.p)
    N = _order(args, p, 3)
    op = args.op
    if op == "e-alpha":
        b = build_module(f"e:{args.spec[0]}", p, N) if args.spec else None
        if b is None:
            raise InputError("e-alpha needs an exponent")
        return _module_report(b)
    if op == "symbol":
        if not args.spec:
            raise InputError("symbol needs factors C=ALPHA")
        return _module_report(build_module("symbol:" + ",".join(args.spec), p, N))
    specs = [build_module(s, p, N) for s in args.spec]
    if op == "tensor":
        if len(specs) != 2:
            raise InputError("tensor needs two module specs")
        a, b = specs
        M = tensor(a.module, b.module)
        exact = None
        if a.exponents is not None and b.exponents is not None and a.module.rank == b.module.rank == 1:
            keys = set(a.exponents) | set(b.exponents)
            exact = {k: [a.exponents.get(k, [0])[0] + b.exponents.get(k, [0])[0]] for k in keys}
        return _module_report(Built(M, exact))
    if len(specs) != 1:
        raise InputError(f"{op} needs one module spec")
    (a,) = specs
    if op == "dual":
        exact = None if a.exponents is None else {k: [-v for v in vs] for k, vs in a.exponents.items()}
        return _module_report(Built(dual(a.module), exact))
    if op == "pullback":
        e = args.degree
        try:
            M = kummer_pullback(a.module, e)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        exact = None
        if a.exponents is not None and set(a.exponents) <= {0, INF_POINT}:
            exact = {k: [e * v for v in vs] for k, vs in a.exponents.items()}
        return _module_report(Built(M, exact))
    if op == "exponents":
        try:
            pts = [parse_point(x, p) for x in args.point] if args.point else None
        except ValueError as exc:
            raise InputError(str(exc)) from None
        M = a.module
        if pts is None:
            pts = sorted(M.singularities | {0, INF_POINT}, key=lambda x: (x == INF_POINT, str(x)))
        return {"exponents": _exponent_block(M, pts, a.exponents)}
    if op == "check":
        rep = check_iterative(a.module)
        report = {"iterative": rep.to_json()}
        if not rep.ok:
            raise NegativeResult(report)
        return report
    raise InputError(f"unknown module operation {op!r}")


# -- projective systems -------------------------------------------------------


def cmd_projsys(args) -> dict:
    p = _prime(args.p)
    N = _order(args, p, 3)
    try:
        sys_ = RankOneProjSys(p, DigitProfile.parse(args.bits))
    except ValueError as exc:
        raise InputError(str(exc)) from None
    alpha = sys_.alpha().value
    report = {"p": p, "bits": str(sys_.bits), "alpha": str(alpha), "exponent": str(-alpha)}
    do_all = not (args.compile or args.group)
    if args.compile or do_all:
        M = compile_system(sys_, N)
        if not M.same_matrices(compile_oracle(sys_, N)):
            raise InvariantError("compiled module disagrees with the truncation oracle")
        report["module"] = M.to_json()
        report["exponents"] = _exponent_block(M, [0], {0: [-alpha]})
    if args.group or do_all:
        report["group"] = group_of_diagonal([-alpha], p).to_json()
    return report


# -- output -------------------------------------------------------------------


def render_pretty(obj, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k in sorted(obj):
            v = obj[k]
            if _is_table(v):
                lines.append(f"{pad}{k}:")
                lines.extend(f"{pad}  " + "  ".join(_flat(x).rjust(6) for x in row) for row in v)
            elif isinstance(v, (dict, list)) and v and not _is_flat(v):
                lines.append(f"{pad}{k}:")
                lines.append(render_pretty(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_flat(v)}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, (dict, list)) and not _is_flat(v):
                lines.append(f"{pad}-")
                lines.append(render_pretty(v, indent + 1))
            else:
                lines.append(f"{pad}- {_flat(v)}")
    else:
        lines.append(f"{pad}{_flat(obj)}")
    return "\n".join(lines)


def _is_table(v) -> bool:
    return (isinstance(v, list) and len(v) > 4
            and all(isinstance(r, list) and len(r) == len(v[0]) <= 4 for r in v)
            and all(not isinstance(x, (list, dict)) for r in v for x in r))


def _is_flat(v) -> bool:
    if isinstance(v, list):
        return all(not isinstance(x, dict) and (not isinstance(x, list) or _is_flat(x)) for x in v)
    return False


def _flat(v) -> str:
    if isinstance(v, list):
        return "[" + ", ".join(_flat(x) for x in v) + "]"
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "no"
    return str(v)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ": "), indent=1)


# -- parser and dispatch ------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="pretty", action="store_false", default=argparse.SUPPRESS,
                     help="JSON output (default)")
    fmt.add_argument("--pretty", dest="pretty", action="store_true", default=argparse.SUPPRESS,
                     help="human-readable output")
    common.add_argument("--order", type=int, default=None, help="order bound N")
    common.add_argument("--precision", type=int, default=None,
                        help="valuation table length (hg)")

    parser = argparse.ArgumentParser(prog="stratus", parents=[common], allow_abbrev=False,
                                     description="Stratified modules in characteristic p.")
    parser.add_argument("--sweep", metavar="FILE",
                        help="run a JSON array of parameter sets, keyed by input hash")
    parser.add_argument("--workers", type=int, default=None, help="sweep parallelism")
    sub = parser.add_subparsers(dest="command")

    s = sub.add_parser("lucas", parents=[common], allow_abbrev=False, help="C(alpha, n) mod p")
    s.add_argument("--p", required=True)
    s.add_argument("--alpha", required=True)
    s.add_argument("--n", type=int, required=True)
    s.set_defaults(func=cmd_lucas)

    s = sub.add_parser("digits", parents=[common], allow_abbrev=False, help="p-adic digits of a rational")
    s.add_argument("--p", required=True)
    s.add_argument("--alpha", required=True)
    s.add_argument("--k-max", type=int, default=8)
    s.set_defaults(func=cmd_digits)

    s = sub.add_parser("hg", parents=[common], allow_abbrev=False, help="hypergeometric criterion and reduction")
    s.add_argument("--p", required=True)
    s.add_argument("--alpha", required=True)
    s.add_argument("--beta", required=True)
    s.add_argument("--gamma", required=True)
    for name in ("criterion", "valuations", "reduce", "verify"):
        s.add_argument(f"--{name}", action="store_true")
    s.set_defaults(func=cmd_hg)

    s = sub.add_parser("module", parents=[common], allow_abbrev=False, help="stratified module operations")
    s.add_argument("op", choices=["e-alpha", "symbol", "tensor", "dual", "pullback",
                                  "exponents", "check"])
    s.add_argument("spec", nargs="*",
                   help="e:ALPHA, symbol:C=ALPHA,..., trivial[:RANK], @FILE or - "
                        "(for e-alpha an exponent, for symbol C=ALPHA factors)")
    s.add_argument("--p", required=True)
    s.add_argument("--degree", "-e", type=int, default=2, help="Kummer pullback degree")
    s.add_argument("--point", action="append", help="point for exponents (repeatable)")
    s.set_defaults(func=cmd_module)

    s = sub.add_parser("projsys", parents=[common], allow_abbrev=False, help="rank-one projective systems")
    s.add_argument("--p", required=True)
    s.add_argument("--bits", required=True, help='bit profile such as "[101](0)"')
    s.add_argument("--compile", action="store_true")
    s.add_argument("--group", action="store_true")
    s.set_defaults(func=cmd_projsys)
    return parser


_VALUE_OPTIONS = ("--alpha", "--beta", "--gamma", "--bits")


def _glue_values(argv):
    """Attach values such as -1/2 to their option so they are not read as flags."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_OPTIONS:
            val = next(it, None)
            out.append(tok if val is None else f"{tok}={val}")
        else:
            out.append(tok)
    return out


def run(argv) -> tuple[int, dict]:
    """Parse and execute one command; returns (exit code, report)."""
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(_glue_values(argv))
        if extra and getattr(args, "command", None) == "module":
            args.spec = list(args.spec) + extra
        elif extra:
            parser.error(f"unrecognized arguments: {' '.join(extra)}")
    except SystemExit as exc:
        return EXIT_INPUT, {"error": {"code": "usage", "message": f"invalid arguments (status {exc.code})"}}
    if getattr(args, "func", None) is None:
        return EXIT_INPUT, {"error": {"code": "usage", "message": "no command given"}}
    try:
        return EXIT_OK, args.func(args)
    except NegativeResult as exc:
        report = dict(exc.report)
        report.setdefault("error", {"code": "negative", "message": "criterion or reduction failed"})
        return EXIT_NEGATIVE, report
    except (InputError, ValueError) as exc:
        return EXIT_INPUT, {"error": {"code": "input", "message": str(exc)}}
    except (InvariantError, AssertionError, ArithmeticError) as exc:
        return EXIT_INTERNAL, {"error": {"code": "invariant", "message": str(exc)}}


def sweep_key(entry) -> str:
    return hashlib.sha256(json.dumps(entry, sort_keys=True).encode()).hexdigest()[:16]


def entry_argv(entry) -> list[str]:
    """{"command": "hg", "p": 3, "alpha": "1/2", "flags": ["criterion"]} -> argv."""
    if isinstance(entry, list):
        return [str(x) for x in entry]
    if not isinstance(entry, dict) or "command" not in entry:
        raise InputError("sweep entries must be argv lists or objects with a 'command'")
    argv = [entry["command"]]
    if "op" in entry:
        argv.append(entry["op"])
    argv += [str(x) for x in entry.get("spec", [])]
    for k in sorted(entry):
        if k in ("command", "op", "spec", "flags"):
            continue
        argv += [f"--{k.replace('_', '-')}", str(entry[k])]
    argv += [f"--{f}" for f in entry.get("flags", [])]
    return argv


def _sweep_one(entry):
    try:
        argv = entry_argv(entry)
    except InputError as exc:
        return EXIT_INPUT, {"error": {"code": "input", "message": str(exc)}}
    return run(argv)


def run_sweep(path: str, workers: int | None) -> tuple[int, dict]:
    try:
        with open(path) as fh:
            entries = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        return EXIT_INPUT, {"error": {"code": "input", "message": f"cannot read sweep file: {exc}"}}
    if not isinstance(entries, list):
        return EXIT_INPUT, {"error": {"code": "input", "message": "sweep file must hold a JSON array"}}
    if workers is None:
        workers = min(4, os.cpu_count() or 1)
    if workers > 1 and len(entries) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_one, entries))
    else:
        results = [_sweep_one(e) for e in entries]
    out = {}
    worst = EXIT_OK
    for entry, (code, report) in zip(entries, results):
        out[sweep_key(entry)] = {"input": entry, "exit": code, "report": report}
        if code in (EXIT_INPUT, EXIT_INTERNAL):
            worst = max(worst, code)
    return worst, {"results": out}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    pre = build_parser()
    pretty = "--pretty" in argv
    if "--sweep" in argv:
        try:
            args, _ = pre.parse_known_args(argv)
            code, report = run_sweep(args.sweep, args.workers)
        except SystemExit:
            code, report = EXIT_INPUT, {"error": {"code": "usage", "message": "invalid arguments"}}
    else:
        code, report = run(argv)
    print(render_pretty(report) if pretty else dumps(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
