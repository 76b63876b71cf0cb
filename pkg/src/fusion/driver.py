"""The checking pipeline: source text to a verdict with diagnostics and statistics."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from . import congen
from . import constraints as C
from . import elim as E
from . import fixpoint as F
from . import logic as L
from . import smtback as B
from .lang import build_module, parse_program, parse_qualifiers, prelude_program

SAFE, UNSAFE, UNKNOWN = "safe", "unsafe", "unknown"


@dataclass
class Options:
    eliminate: str = "cuts"          # all | cuts | none
    scoped: bool = True
    cut_toplevel: bool = True
    scrape_quals: bool = False
    qualifiers: list = field(default_factory=list)
    smt: str | None = None
    timeout_ms: int = 10_000
    jobs: int = 1
    fuse: int = E.FUSE
    simplify: bool = True


@dataclass
class Failure:
    clause: C.FlatClause
    reason: str
    model: dict = field(default_factory=dict)

    @property
    def tag(self):
        return self.clause.tag


@dataclass
class Stats:
    kvars: int = 0
    generated_kvars: int = 0
    cuts: int = 0
    eliminated: int = 0
    flat_clauses: int = 0
    vc_atoms: int = 0
    smt_queries: int = 0
    qualifiers: int = 0
    fixpoint_iterations: int = 0
    seconds: float = 0.0
    fuse_tripped: bool = False

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class Report:
    status: str
    failures: list = field(default_factory=list)
    messages: list = field(default_factory=list)
    stats: Stats = field(default_factory=Stats)
    constraint: C.Constraint | None = None
    vc: C.Constraint | None = None
    solution: dict = field(default_factory=dict)
    uninterps: dict = field(default_factory=dict)


@dataclass
class Prepared:
    constraint: C.Constraint
    toplevel: set
    generated_kvars: int
    module: object
    quals: list


def prepare(text: str, opts: Options) -> Prepared:
    mod = build_module(prelude_program(), parse_program(text))
    gen = congen.generate(mod)
    c = gen.constraint
    if opts.simplify:
        c, _ = E.simplify_kvars(c, gen.toplevel)
    quals = [F.Qualifier.of(q) for q in mod.quals] + list(opts.qualifiers)
    if opts.scrape_quals:
        user = {n: t for n, t in gen.sigs.items() if n not in mod.prims}
        quals += F.scrape_qualifiers(user)
    return Prepared(c, set(gen.toplevel), len(gen.kvars), mod, quals)


def choose_cuts(c: C.Constraint, toplevel, opts: Options) -> set:
    if opts.eliminate == "none":
        return set(c.kvs)
    if opts.eliminate == "all":
        cut = C.cut_vars(c)
        if cut:
            names = ", ".join(sorted(k.name for k in cut))
            raise E.CyclicError(f"cyclic refinement variables ({names}) cannot all be eliminated")
        return set()
    forced = toplevel if opts.cut_toplevel else ()
    return C.cut_vars(c, forced)


def sat(c: C.Constraint, quals, opts: Options, toplevel=(), uninterps=None,
        solver: B.Solver | None = None, report: Report | None = None) -> Report:
    rep = report or Report(UNKNOWN)
    rep.uninterps = dict(uninterps or {})
    st = rep.stats
    st.kvars = len(c.kvs)
    st.flat_clauses = len(C.flatten(c))
    st.qualifiers = len(quals)
    rep.constraint = c
    cut = choose_cuts(c, set(toplevel), opts)
    st.cuts = len(cut)
    order = E.elimination_order(c, c.kvs - cut)
    try:
        vc = E.elim(order, c, scoped=opts.scoped, fuse=opts.fuse)
    except E.FuseError as exc:
        st.fuse_tripped = True
        st.vc_atoms = exc.atoms
        rep.status = UNKNOWN
        rep.messages.append(str(exc))
        return rep
    st.eliminated = len(order)
    st.vc_atoms = E.atom_count(vc)
    rep.vc = vc
    own = solver is None
    solver = solver or B.Solver(opts.smt, opts.timeout_ms, opts.jobs, uninterps)
    try:
        cs = C.flatten(vc)
        if not vc.kvs:
            results = solver.check_many([C.clause_formula(fc) for fc in cs])
            for fc, r in zip(cs, results):
                _record(rep, fc, r)
        else:
            fx = F.solve(cs, quals, solver, uninterps)
            st.fixpoint_iterations = fx.iterations
            rep.solution = fx.sigma
            for fc, r in fx.failed + fx.unknown:
                _record(rep, fc, r)
        if any(isinstance(f.reason, str) and f.reason == "invalid" for f in rep.failures):
            rep.status = UNSAFE
        elif rep.failures:
            rep.status = UNKNOWN
        else:
            rep.status = SAFE
    finally:
        st.smt_queries += solver.queries
        if own:
            solver.close()
    return rep


def _record(rep: Report, fc: C.FlatClause, r) -> None:
    if isinstance(r, B.Invalid):
        rep.failures.append(Failure(fc, "invalid", r.witness))
    elif isinstance(r, B.Unknown):
        rep.failures.append(Failure(fc, f"unknown: {r.reason}"))
        rep.messages.append(f"solver could not decide a clause: {r.reason}")


def check_source(text: str, opts: Options | None = None, solver: B.Solver | None = None) -> Report:
    opts = opts or Options()
    t0 = time.perf_counter()
    prep = prepare(text, opts)
    rep = Report(UNKNOWN)
    rep.stats.generated_kvars = prep.generated_kvars
    sat(prep.constraint, prep.quals, opts, prep.toplevel, prep.module.uninterps, solver, rep)
    rep.stats.seconds = time.perf_counter() - t0
    return rep


def load_qualifiers(path: str) -> list:
    with open(path, encoding="utf-8") as fh:
        return [F.Qualifier.of(q) for q in parse_qualifiers(fh.read())]


def let_chain(n: int) -> str:
    """The let-chain program: n identity calls threaded through lets."""
    lines = ["chain :: Nat -> Nat", "chain x0 ="]
    for i in range(1, n + 1):
        kw = "let" if i == 1 else "   "
        lines.append(f"  {kw} x{i} = id x{i - 1}")
    lines.append(f"  in x{n}")
    return "\n".join(lines) + "\n"
