"""Command-line entry point: ``sosdw verify|evaluate|tables|bench|export``.

Exit codes: 0 success, 1 an identity failed, 2 usage or domain error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from contextlib import contextmanager

import numpy as np

from . import enumeration as en
from . import kernels, verify
from .errors import DomainError, PoleError, ResourceError, SosdwError
from .partition import EVALUATORS, sample_params, z_free_fermion, z_laurent, z_root_of_unity
from .states import DEFAULT_STATE_CAP, a_n, export_jsonl, states_array
from .theta import ThetaContext

SCHEMA = "sosdw/1"
METHODS = ("brute", "weightfn", "ik", "factored", "rootN", "laurent", "freefermion")
EXACT_SUITES = ("states", "det", "three-colour", "probabilities", "two-enumeration", "moments",
                "limit-det")


class UsageError(Exception):
    pass


def _complex(text):
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--out", metavar="FILE")
    common.add_argument("--state-cap", type=_positive, default=DEFAULT_STATE_CAP)
    common.add_argument("--no-timing", action="store_true", help="omit runtimes for byte-stable output")

    ap = argparse.ArgumentParser(prog="sosdw", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run identity suites")
    v.add_argument("--suite", action="append", metavar="NAME",
                   help="suite name or 'all' (repeatable); default all")
    v.add_argument("--n-max", type=_positive, default=3)
    v.add_argument("--trials", type=_positive, default=20)
    v.add_argument("--p", type=_complex)
    v.add_argument("--eta", type=_complex)
    v.add_argument("--exact", action="store_true", help="run only the exact suites")
    v.add_argument("--list", action="store_true", help="list suite names and exit")

    e = sub.add_parser("evaluate", parents=[common], help="evaluate the partition function")
    e.add_argument("--n", type=_positive, required=True)
    e.add_argument("--method", choices=METHODS, default="factored")
    e.add_argument("--p", type=_complex)
    e.add_argument("--eta", type=_complex)
    e.add_argument("--root-of-unity", type=_positive, metavar="N")
    e.add_argument("--exact", action="store_true",
                   help="exact state sum at p = 0, q = omega as a polynomial over Z[omega]")

    t = sub.add_parser("tables", parents=[common], help="A_n, C_n, K_i, p_i tables")
    t.add_argument("--n-max", type=_positive, default=10)
    t.add_argument("--exact", action="store_true", help="cross-check K_i by enumeration")

    b = sub.add_parser("bench", parents=[common], help="time each method at fixed parameters")
    b.add_argument("--n-max", type=_positive, default=6)
    b.add_argument("--trials", type=_positive, default=20)
    b.add_argument("--p", type=_complex)
    b.add_argument("--eta", type=_complex)

    x = sub.add_parser("export", parents=[common], help="states as JSON lines or exact identities")
    x.add_argument("what", choices=("states", "identities"))
    x.add_argument("--n", type=_positive)
    x.add_argument("--n-max", type=_positive, default=4)
    return ap


# ---------------------------------------------------------------------------
# output helpers


@contextmanager
def _sink(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as fp:
            yield fp


def _dump_json(obj, fp):
    fp.write(json.dumps({"schema": SCHEMA, **obj}, indent=2, sort_keys=True) + "\n")


def _cx(z):
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _fmt_err(v):
    return "-" if v is None else f"{v:.2e}"


# ---------------------------------------------------------------------------
# subcommands


def cmd_verify(args):
    if args.list:
        print("\n".join(verify.SUITE_NAMES))
        return 0
    names = args.suite or ["all"]
    for nm in names:
        if nm != "all" and nm not in verify.SUITES:
            raise UsageError(f"unknown suite {nm!r}; try --list")
    if args.exact:
        names = [nm for nm in (verify.SUITE_NAMES if "all" in names else names) if nm in EXACT_SUITES]
        if not names:
            raise UsageError("--exact selects no suites")
    if args.format == "csv":
        raise UsageError("verify supports text or json output")
    cfg = verify.VerifyConfig(n_max=args.n_max, seed=args.seed, trials=args.trials,
                              state_cap=args.state_cap, p=args.p, eta=args.eta)
    if args.p is not None or args.eta is not None:
        _context(args)  # validate early
    records = verify.run(names, cfg)
    passed = all(r.passed for r in records)
    timing = not args.no_timing
    with _sink(args.out) as fp:
        if args.format == "json":
            _dump_json({
                "command": "verify",
                "config": {"suites": list(names), "n_max": args.n_max, "seed": args.seed,
                           "trials": args.trials, "state_cap": args.state_cap,
                           "backend": kernels.backend()},
                "records": [r.as_dict(timing) for r in records],
                "families": len({r.suite for r in records}),
                "passed": passed,
            }, fp)
        else:
            for r in records:
                line = (f"{'PASS' if r.passed else 'FAIL'}  {r.suite:<15} "
                        f"n={'-' if r.n is None else r.n:<3} {r.identity:<42} "
                        f"{r.mode:<7} err={_fmt_err(r.max_rel_err)}")
                if timing:
                    line += f"  {r.runtime:.3f}s"
                fp.write(line + "\n")
            fam = len({r.suite for r in records})
            bad = sum(not r.passed for r in records)
            fp.write(f"{len(records)} checks in {fam} identity families, {bad} failed\n")
    return 0 if passed else 1


def _context(args, default_p=0.2 + 0.1j, default_eta=0.27 + 0.02j):
    return ThetaContext(p=default_p if args.p is None else args.p,
                        eta=default_eta if args.eta is None else args.eta)


def evaluate_record(method, n, ctx, rng, root=None):
    """Draw parameters from ``rng`` and evaluate with ``method``."""
    if method == "laurent":
        params = verify.sample_laurent_params(n, ctx, rng)
    else:
        params = sample_params(n, ctx, rng)
    t0 = time.perf_counter()
    if method in EVALUATORS:
        value = EVALUATORS[method](params, ctx)
        kind = "Z"
    elif method == "rootN":
        value = z_root_of_unity(params, root, ctx)
        kind = "Zt"
    elif method == "laurent":
        value = z_laurent(params, ctx, K=40)
        kind = "Zt"
    else:
        value = z_free_fermion(params, ctx)
        kind = "Zt"
    runtime = time.perf_counter() - t0
    return {"method": method, "n": n, "quantity": kind,
            "params": {"p": _cx(ctx.p), "eta": _cx(ctx.eta), **params.as_dict()},
            "value": _cx(value), "runtime": runtime}


def cmd_evaluate(args):
    n = args.n
    if args.exact:
        P = en.exact_state_sum_omega(n, cap=args.state_cap)
        num, den = en.dynamical_enumerate(n, exact=True)
        rec = {"command": "evaluate", "method": "exact", "n": n,
               "state_sum": {"numerator": P.to_pairs(), "denominator": f"(1 - L^3)^{n * n}"},
               "closed_form": {"numerator": num.to_pairs(), "denominator": den.to_pairs()},
               "ring": "Z[omega]", "variable": "L = q^lambda"}
        with _sink(args.out) as fp:
            _dump_json(rec, fp)
        return 0
    method = args.method
    root = args.root_of_unity
    if method == "rootN":
        if root is None:
            raise UsageError("--method rootN needs --root-of-unity N")
        if args.eta is not None and abs(args.eta - 1 / root) > 1e-12:
            raise UsageError("--eta conflicts with --root-of-unity")
        ctx = _context(args, default_eta=1 / root)
    elif method == "freefermion":
        if args.eta is not None and abs(args.eta - 0.5) > 1e-12:
            raise UsageError("free-fermion needs eta = 1/2 (q = -1)")
        ctx = _context(args, default_eta=0.5)
    elif method == "laurent":
        ctx = _context(args, default_p=0.05)
    else:
        if root is not None:
            ctx = _context(args, default_eta=1 / root)
        else:
            ctx = _context(args)
    if method in ("brute",) and n > args.state_cap:
        raise ResourceError(f"n = {n} exceeds state cap {args.state_cap}")
    rng = np.random.default_rng(args.seed)
    rec = evaluate_record(method, n, ctx, rng, root)
    if args.no_timing:
        rec.pop("runtime")
    with _sink(args.out) as fp:
        if args.format == "json":
            _dump_json({"command": "evaluate", **rec}, fp)
        else:
            v = rec["value"]
            fp.write(f"{rec['method']} n={n} {rec['quantity']} = {v['re']:.15g} {v['im']:+.15g}j\n")
    return 0


def cmd_tables(args):
    rows = en.colour_table_rows(range(1, args.n_max + 1))
    if args.exact:
        for n in range(1, min(args.n_max, args.state_cap, 6) + 1):
            enum = en.colour_probabilities_enumerated(n, args.state_cap)
            if tuple(rows[n - 1][3:6]) != enum.K:
                raise SosdwError(f"closed form and enumeration disagree at n = {n}")
    with _sink(args.out) as fp:
        if args.format == "json":
            _dump_json({"command": "tables",
                        "rows": [dict(zip(en.TABLE_HEADER, r)) for r in rows]}, fp)
        elif args.format == "csv":
            fp.write(en.colour_table_csv(range(1, args.n_max + 1)))
        else:
            widths = [4, 12, 12, 14, 14, 14, 22, 22, 22]
            fp.write("".join(f"{h:>{w}}" for h, w in zip(en.TABLE_HEADER, widths)) + "\n")
            for r in rows:
                fp.write("".join(f"{str(c):>{w}}" for c, w in zip(r, widths)) + "\n")
    return 0


def bench_records(n_max, trials, ctx, seed, state_cap=DEFAULT_STATE_CAP):
    """Best-of-``trials`` wall clock per method and n at one fixed point per n."""
    out = []
    for n in range(1, n_max + 1):
        rng = np.random.default_rng([seed, n])
        params = sample_params(n, ctx, rng)
        for method, fn in EVALUATORS.items():
            if method == "brute" and n > state_cap:
                continue
            if method == "weightfn" and n > 8:
                continue
            value = fn(params, ctx)  # warm-up (jit and caches)
            best = np.inf
            for _ in range(trials):
                t0 = time.perf_counter()
                fn(params, ctx)
                best = min(best, time.perf_counter() - t0)
            terms = {"brute": a_n(n), "weightfn": int(np.prod(np.arange(1, n + 1))),
                     "ik": 2 ** n, "factored": 2 ** n}[method]
            out.append({"n": n, "method": method, "terms": terms, "seconds": best,
                        "value": _cx(value)})
    return out


def cmd_bench(args):
    ctx = _context(args)
    recs = bench_records(args.n_max, args.trials, ctx, args.seed, args.state_cap)
    counts = {n: len(states_array(n, args.state_cap)) for n in range(1, min(args.n_max, args.state_cap) + 1)}
    if args.no_timing:
        for r in recs:
            r.pop("seconds")
    with _sink(args.out) as fp:
        if args.format == "json":
            _dump_json({"command": "bench", "backend": kernels.backend(),
                        "state_counts": {str(k): v for k, v in counts.items()},
                        "records": recs}, fp)
        elif args.format == "csv":
            fp.write("n,method,terms" + ("" if args.no_timing else ",seconds") + "\n")
            for r in recs:
                fp.write(f"{r['n']},{r['method']},{r['terms']}"
                         + ("" if args.no_timing else f",{r['seconds']:.6e}") + "\n")
        else:
            fp.write(f"backend: {kernels.backend()}\n")
            for r in recs:
                sec = "" if args.no_timing else f"{r['seconds'] * 1e6:12.1f} us"
                fp.write(f"n={r['n']}  {r['method']:<9} terms={r['terms']:<8}{sec}\n")
    return 0


def cmd_export(args):
    with _sink(args.out) as fp:
        if args.what == "states":
            if args.n is None:
                raise UsageError("export states needs --n")
            export_jsonl(args.n, fp, cap=args.state_cap)
            return 0
        ids = []
        for n in range(1, args.n_max + 1):
            for name, fn in (("dynamical enumeration at q = omega", en.dynamical_enumeration_identity),
                             ("three-colouring generating function", en.three_colour_identity)):
                lhs, rhs = fn(n, cap=min(args.state_cap, en.EXACT_CAP))
                ids.append({"identity": name, "n": n, "ring": "Z[omega]", "holds": lhs == rhs,
                            "lhs": lhs.to_pairs(), "rhs": rhs.to_pairs()})
            lhs, rhs = en.two_enumeration(n, cap=min(args.state_cap, en.EXACT_CAP))
            ids.append({"identity": "dynamical 2-enumeration", "n": n, "ring": "Z[i]",
                        "holds": lhs == rhs, "lhs": lhs.to_pairs(), "rhs": rhs.to_pairs()})
        _dump_json({"command": "export", "identities": ids}, fp)
    return 0 if all(r["holds"] for r in ids) else 1


COMMANDS = {"verify": cmd_verify, "evaluate": cmd_evaluate, "tables": cmd_tables,
            "bench": cmd_bench, "export": cmd_export}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        verify.worker_count()
        return COMMANDS[args.command](args)
    except (UsageError, ValueError, DomainError, PoleError, ResourceError, KeyError) as exc:
        print(f"sosdw: error: {exc}", file=sys.stderr)
        return 2
    except SosdwError as exc:
        print(f"sosdw: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
