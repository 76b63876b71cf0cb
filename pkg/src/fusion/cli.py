"""Command-line driver.

    fusion check FILE [flags]     exit 0 safe, 1 unsafe, 2 unknown or error
    fusion stats FILE [flags]     constraint and VC statistics
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time

from . import __version__
from .congen import CongenError
from . import driver as D
from . import elim as E
from . import sexp
from . import smtback as B
from .lang import ElabError, ParseError

EXIT_SAFE, EXIT_UNSAFE, EXIT_ERROR = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fusion", description=__doc__.splitlines()[0] if __doc__ else None)
    ap.add_argument("--version", action="version", version=f"fusion {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True)
    for name, help_ in (("check", "verify a program"), ("stats", "report constraint statistics")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("file")
        p.add_argument("--eliminate", choices=["all", "cuts", "none"], default="cuts",
                       help="eliminate every kvar, all but cuts (default), or none")
        p.add_argument("--no-scope", action="store_true",
                       help="compute solutions from the whole constraint (exponential)")
        p.add_argument("--scrape-quals", action="store_true",
                       help="use atomic predicates of signatures as qualifiers")
        p.add_argument("--qualifiers", metavar="FILE", help="qualifier file")
        p.add_argument("--smt", metavar="PATH", help="solver binary (default: $FUSION_SMT or z3)")
        p.add_argument("--timeout", metavar="MS", type=int, default=10_000,
                       help="per-query solver timeout in milliseconds")
        p.add_argument("--jobs", type=int, default=1, help="parallel solver processes")
        p.add_argument("--dump-constraints", metavar="FILE",
                       help="write the generated constraint as s-expressions ('-' for stdout)")
        p.add_argument("--dump-vc", metavar="FILE",
                       help="write the post-elimination VC as SMT-LIB2 ('-' for stdout)")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--cut-toplevel", choices=["on", "off"], default="on",
                       help="treat kvars of signature holes as cuts (default on)")
        p.add_argument("-v", "--verbose", action="store_true")
    return ap


def options_from(args) -> D.Options:
    quals = D.load_qualifiers(args.qualifiers) if args.qualifiers else []
    return D.Options(
        eliminate=args.eliminate, scoped=not args.no_scope,
        cut_toplevel=args.cut_toplevel == "on", scrape_quals=args.scrape_quals,
        qualifiers=quals, smt=args.smt, timeout_ms=args.timeout, jobs=args.jobs)


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def failure_json(f: D.Failure) -> dict:
    tag = f.clause.tag
    return {
        "line": tag.line if tag else None,
        "col": tag.col if tag else None,
        "what": tag.what if tag else "",
        "reason": f.reason,
        "clause": str(f.clause),
        "model": f.model,
    }


def error_json(kind: str, msg: str, line=None, col=None) -> dict:
    return {"status": "error", "kind": kind, "message": msg, "line": line, "col": col}


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="fusion: %(message)s")
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20_000))

    def fail(kind: str, msg: str, line=None, col=None) -> int:
        if args.json:
            print(json.dumps(error_json(kind, msg, line, col), indent=2))
        else:
            where = f"{args.file}:{line}:{col}: " if line else f"{args.file}: "
            print(f"{where}{kind} error: {msg}", file=sys.stderr)
        return EXIT_ERROR

    try:
        with open(args.file, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        return fail("io", exc.strerror or str(exc))
    try:
        opts = options_from(args)
        rep = D.Report(D.UNKNOWN)
        prep = D.prepare(text, opts)
        rep.stats.generated_kvars = prep.generated_kvars
        if args.dump_constraints:
            _write(args.dump_constraints, sexp.dump_constraint(prep.constraint))
        t0 = time.perf_counter()
        D.sat(prep.constraint, prep.quals, opts, prep.toplevel, prep.module.uninterps, report=rep)
        rep.stats.seconds = time.perf_counter() - t0
    except OSError as exc:
        return fail("io", str(exc))
    except ParseError as exc:
        return fail("syntax", exc.msg, exc.line, exc.col)
    except ElabError as exc:
        line, col = exc.pos if exc.pos else (None, None)
        return fail("type", exc.msg, line, col)
    except CongenError as exc:
        return fail("type", str(exc))
    except E.CyclicError as exc:
        return fail("cyclic", str(exc))
    except B.EmitError as exc:
        return fail("smt", str(exc))

    if args.dump_vc and rep.vc is not None:
        _write(args.dump_vc, B.emit_smtlib(rep.vc, rep.uninterps))

    code = {D.SAFE: EXIT_SAFE, D.UNSAFE: EXIT_UNSAFE}.get(rep.status, EXIT_ERROR)
    if args.cmd == "stats":
        return _stats(args, rep, code)
    if args.json:
        print(json.dumps({
            "status": rep.status,
            "failures": [failure_json(f) for f in rep.failures],
            "messages": rep.messages,
            "stats": rep.stats.as_dict(),
        }, indent=2))
        return code
    if rep.status == D.SAFE:
        print(f"{args.file}: SAFE")
    elif rep.status == D.UNSAFE:
        print(f"{args.file}: UNSAFE")
    else:
        print(f"{args.file}: UNKNOWN")
    for f in rep.failures:
        tag = f.clause.tag
        loc = f"{args.file}:{tag.line}:{tag.col}" if tag else args.file
        what = f" ({tag.what})" if tag and tag.what else ""
        print(f"  {loc}: {f.reason}{what}")
        shown = {k: v for k, v in f.model.items() if k.isidentifier()}
        if shown:
            print("    counterexample: " + ", ".join(f"{k} = {v}" for k, v in sorted(shown.items())))
    for m in rep.messages:
        print(f"  note: {m}")
    return code


def _stats(args, rep: D.Report, code: int) -> int:
    st = rep.stats.as_dict()
    st["status"] = rep.status
    if args.json:
        print(json.dumps(st, indent=2))
    else:
        width = max(len(k) for k in st)
        for k, v in st.items():
            if isinstance(v, float):
                v = f"{v:.3f}"
            print(f"{k:<{width}}  {v}")
    return code


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
