"""SMT-LIB2 emission and validity checking through an external solver process."""

from __future__ import annotations

import logging
import os
import queue
import re
import select
import shutil
import subprocess
import threading
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from . import constraints as C
from . import logic as L
from .logic import Term

log = logging.getLogger(__name__)

LOGIC = "QF_UFLIA"
SENTINEL = "fusion-query-done"


class EmitError(Exception):
    pass


@dataclass(frozen=True)
class Valid:
    def __bool__(self):
        return True


@dataclass(frozen=True)
class Invalid:
    model: str = ""
    witness: dict = field(default_factory=dict, compare=False)

    def __bool__(self):
        return False


@dataclass(frozen=True)
class Unknown:
    reason: str = ""

    def __bool__(self):
        return False


Result = Valid | Invalid | Unknown


# ---------------------------------------------------------------------------
# Emission


def constraint_formula(c: C.Constraint) -> Term:
    """The closed formula a constraint stands for."""
    if isinstance(c, C.Head):
        return c.pred
    if isinstance(c, C.Conj):
        return L.And(*(constraint_formula(p) for p in c.parts))
    return L.Forall(c.var, c.sort, L.Implies(c.hyp, constraint_formula(c.body)))


def symbol(name: str) -> str:
    return f"|{name}|"


def sort_name(s: L.Sort) -> str:
    return s.name


_OPS = {"+": "+", "-": "-", "*": "*", "neg": "-", "=": "=", "!=": "distinct",
        "<": "<", "<=": "<=", ">": ">", ">=": ">=", "and": "and", "or": "or",
        "not": "not", "=>": "=>", "<=>": "="}


class Emitter:
    """Turns a closed formula into an `(assert (not F))` script body.

    Universals in goal position become fresh constants (after hypothesis
    existentials have been skolemized into such universals).  Subterms used
    more than once are bound once with `let`.
    """

    def __init__(self, uninterps: dict | None = None, kvars_uninterpreted: bool = False,
                 goal_quantifiers: bool = False):
        self.uninterps = dict(uninterps or {})
        self.kvars_uninterpreted = kvars_uninterpreted
        self.goal_quantifiers = goal_quantifiers
        self.quantified = False

    def script(self, f: Term, model: bool = False) -> str:
        decls, body = self.query(f)
        logic = "UFLIA" if self.quantified else LOGIC
        lines = [f"(set-logic {logic})", "(declare-sort Unit 0)"]
        lines += decls
        lines.append(f"(assert (not {body}))")
        lines.append("(check-sat)")
        if model:
            lines.append("(get-model)")
        return "\n".join(lines) + "\n"

    def query(self, f: Term) -> tuple[list[str], str]:
        """Declarations and the formula text (without the negation)."""
        f = L.skolemize_hypotheses(f, keep_goal_exists=self.goal_quantifiers)
        consts: dict[str, L.Sort] = {}
        f = self._open(f, consts)
        self.quantified = _has_quantifier(f)
        decls = []
        for name, sig in sorted(self.uninterps.items()):
            if isinstance(sig, L.FunSig) and _uses_fn(f, name):
                args = " ".join(sort_name(s) for s in sig.args)
                decls.append(f"(declare-fun {symbol(name)} ({args}) {sort_name(sig.result)})")
        kvs = sorted(L.kvars(f), key=C.kv_key)
        if kvs and not self.kvars_uninterpreted:
            raise EmitError(f"unsolved refinement variable {kvs[0].name} in a VC")
        for k in kvs:
            args = " ".join(sort_name(s) for _, s in k.params)
            decls.append(f"(declare-fun {symbol(k.name)} ({args}) Bool)")
        free = L.free_vars(f)
        missing = free - consts.keys()
        if missing:
            raise EmitError(f"free variables in VC: {', '.join(sorted(missing))}")
        for name in sorted(consts):
            decls.append(f"(declare-const {symbol(name)} {sort_name(consts[name])})")
        return decls, self._shared(f)

    def _open(self, f: Term, consts: dict) -> Term:
        """Strip goal-position universals, renaming each to a unique constant."""
        taken = set(L.names_in(f))

        def go(t: Term) -> Term:
            while isinstance(t, L.Forall):
                name = t.var
                if name in consts:
                    i = 1
                    while f"{t.var}#{i}" in consts or f"{t.var}#{i}" in taken:
                        i += 1
                    name = f"{t.var}#{i}"
                consts[name] = t.sort
                t = L.subst(t.body, {t.var: name}) if name != t.var else t.body
            if isinstance(t, L.Op) and t.op in ("and", "or"):
                return L.Op(t.op, (go(a) for a in t.args))
            if isinstance(t, L.Op) and t.op == "=>":
                return L.Op("=>", (t.args[0], go(t.args[1])))
            return t

        return go(f)

    def _shared(self, f: Term) -> str:
        counts: Counter = Counter()
        order: list[Term] = []
        seen: set[int] = set()

        def visit(t: Term):
            stack = [(t, False)]
            while stack:
                n, done = stack.pop()
                if done:
                    order.append(n)
                    continue
                counts[id(n)] += 1
                if id(n) in seen:
                    continue
                seen.add(id(n))
                stack.append((n, True))
                for ch in reversed(L.children(n)):
                    stack.append((ch, False))

        visit(f)
        names: dict[int, str] = {}
        binds: list[tuple[str, str]] = []
        for n in order:  # post-order: children before parents
            if self.quantified and L.free_vars(n) - L.free_vars(f):
                continue  # mentions a bound variable; a let outside would capture it
            if n is not f and counts[id(n)] > 1 and not L.is_atom(n) and _compound(n):
                text = self._term(n, names)
                nm = f"?s{len(binds)}"
                binds.append((nm, text))
                names[id(n)] = nm
        out = self._term(f, names)
        for nm, text in reversed(binds):
            out = f"(let (({nm} {text})) {out})"
        return out

    def _term(self, t: Term, names: dict) -> str:
        hit = names.get(id(t))
        if hit is not None:
            return hit
        if isinstance(t, L.BoolConst):
            return "true" if t.value else "false"
        if isinstance(t, L.IntConst):
            return str(t.value) if t.value >= 0 else f"(- {-t.value})"
        if isinstance(t, L.Var):
            return symbol(t.name)
        if isinstance(t, L.UApp):
            if not t.args:
                return symbol(t.fn)
            return f"({symbol(t.fn)} {' '.join(self._term(a, names) for a in t.args)})"
        if isinstance(t, L.KApp):
            if not self.kvars_uninterpreted:
                raise EmitError(f"unsupported atom {L.show(t)}")
            if not t.args:
                return symbol(t.kvar.name)
            return f"({symbol(t.kvar.name)} {' '.join(symbol(a) for a in t.args)})"
        if isinstance(t, (L.Exists, L.Forall)):
            q = "exists" if isinstance(t, L.Exists) else "forall"
            return f"({q} (({symbol(t.var)} {sort_name(t.sort)})) {self._term(t.body, names)})"
        if isinstance(t, L.Op):
            op = _OPS.get(t.op)
            if op is None:
                raise EmitError(f"unsupported operator {t.op} in {L.show(t)}")
            return f"({op} {' '.join(self._term(a, names) for a in t.args)})"
        raise EmitError(f"unsupported atom {L.show(t)}")


def _has_quantifier(t: Term) -> bool:
    stack, seen = [t], set()
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        if isinstance(n, (L.Exists, L.Forall)):
            return True
        stack.extend(L.children(n))
    return False


def _compound(t: Term) -> bool:
    return isinstance(t, (L.Op, L.UApp, L.KApp))


def _uses_fn(t: Term, name: str) -> bool:
    stack, seen = [t], set()
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        if isinstance(n, L.UApp) and n.fn == name:
            return True
        stack.extend(L.children(n))
    return False


def emit_smtlib(vc, uninterps: dict | None = None, kvars_uninterpreted: bool = False,
                goal_quantifiers: bool = False) -> str:
    """An SMT-LIB2 script whose answer is unsat exactly when ``vc`` is valid."""
    f = constraint_formula(vc) if isinstance(vc, (C.Head, C.Conj, C.Bind)) else vc
    return Emitter(uninterps, kvars_uninterpreted, goal_quantifiers).script(f)


# ---------------------------------------------------------------------------
# Solver processes


def find_solver(path: str | None = None) -> str | None:
    return path or os.environ.get("FUSION_SMT") or shutil.which("z3")


_MODEL_RE = re.compile(r"\(define-fun\s+(\|[^|]*\||\S+)\s+\(\)\s+(\w+)\s+(\(- \d+\)|[^\s()]+)\)")


def parse_model(text: str) -> dict:
    out = {}
    for name, _sort, value in _MODEL_RE.findall(text):
        name = name.strip("|")
        if value.startswith("(- "):
            value = "-" + value[3:-1]
        out[name] = value
    return out


class SolverProcess:
    """One long-lived solver; each query is framed by push/pop."""

    def __init__(self, binary: str, timeout_ms: int = 10_000):
        self.binary = binary
        self.timeout_ms = timeout_ms
        self.proc: subprocess.Popen | None = None
        self.queries = 0
        self._buf = b""

    def start(self) -> None:
        self.proc = subprocess.Popen(
            [self.binary, "-in", "-smt2"], stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            stderr=subprocess.PIPE, bufsize=0)
        self._buf = b""
        # no set-logic: the solver picks one per query, so quantified goals are accepted
        self._send("(set-option :print-success false)\n(set-option :produce-models true)\n"
                   "(declare-sort Unit 0)\n")

    def close(self) -> None:
        if self.proc is not None:
            try:
                self.proc.stdin.write(b"(exit)\n")
                self.proc.stdin.flush()
                self.proc.wait(timeout=1)
            except Exception:
                self.proc.kill()
            self.proc = None

    def _send(self, text: str) -> None:
        self.proc.stdin.write(text.encode())
        self.proc.stdin.flush()

    def _read_until_sentinel(self, deadline: float) -> list[str]:
        fd = self.proc.stdout.fileno()
        while True:
            lines = self._buf.split(b"\n")
            for i, ln in enumerate(lines[:-1]):
                if ln.strip() == SENTINEL.encode():
                    self._buf = b"\n".join(lines[i + 1:])
                    return [x.decode(errors="replace") for x in lines[:i]]
            left = deadline - time.monotonic()
            if left <= 0:
                raise TimeoutError
            ready, _, _ = select.select([fd], [], [], left)
            if not ready:
                raise TimeoutError
            chunk = os.read(fd, 65536)
            if not chunk:
                raise BrokenPipeError("solver exited")
            self._buf += chunk

    def check(self, decls: list[str], body: str, model: bool = True) -> Result:
        if self.proc is None or self.proc.poll() is not None:
            self.start()
        self.queries += 1
        script = ["(push 1)", f"(set-option :timeout {int(self.timeout_ms)})", *decls,
                  f"(assert (not {body}))", "(check-sat)", f'(echo "{SENTINEL}")']
        deadline = time.monotonic() + self.timeout_ms / 1000 + 5
        try:
            self._send("\n".join(script) + "\n")
            out = self._read_until_sentinel(deadline)
            answer = next((ln.strip() for ln in out if ln.strip()), "")
            result: Result
            if answer == "unsat":
                result = Valid()
            elif answer == "sat":
                text = ""
                if model:
                    self._send(f'(get-model)\n(echo "{SENTINEL}")\n')
                    text = "\n".join(self._read_until_sentinel(deadline))
                result = Invalid(text, parse_model(text))
            else:
                result = Unknown(answer or "no answer")
            self._send("(pop 1)\n")
            return result
        except TimeoutError:
            self._restart()
            return Unknown("timeout")
        except (BrokenPipeError, OSError) as exc:
            err = self._stderr()
            self._restart()
            return Unknown(f"solver failure: {exc} {err}".strip())

    def _stderr(self) -> str:
        try:
            if self.proc and self.proc.poll() is not None:
                return self.proc.stderr.read().decode(errors="replace")
        except Exception:
            pass
        return ""

    def _restart(self) -> None:
        if self.proc is not None:
            self.proc.kill()
            self.proc.wait()
        self.proc = None


class Solver:
    """A pool of solver processes with exclusive checkout."""

    def __init__(self, binary: str | None = None, timeout_ms: int = 10_000, jobs: int = 1,
                 uninterps: dict | None = None):
        self.binary = find_solver(binary)
        self.timeout_ms = timeout_ms
        self.jobs = max(1, jobs)
        self.uninterps = dict(uninterps or {})
        self._pool: queue.Queue = queue.Queue()
        self._all: list[SolverProcess] = []
        self._lock = threading.Lock()
        self.queries = 0

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def close(self) -> None:
        for p in self._all:
            p.close()
        self._all.clear()

    def _checkout(self) -> SolverProcess:
        try:
            return self._pool.get_nowait()
        except queue.Empty:
            with self._lock:
                if len(self._all) < self.jobs:
                    p = SolverProcess(self.binary, self.timeout_ms)
                    self._all.append(p)
                    return p
            return self._pool.get()

    def check_valid(self, vc, kvars_uninterpreted: bool = False, model: bool = True,
                    goal_quantifiers: bool = False) -> Result:
        if self.binary is None or not (os.path.exists(self.binary) or shutil.which(self.binary)):
            return Unknown(f"SMT solver not found ({self.binary or 'z3'}); use --smt or FUSION_SMT")
        f = constraint_formula(vc) if isinstance(vc, (C.Head, C.Conj, C.Bind)) else vc
        if f is L.TRUE:
            return Valid()
        decls, body = Emitter(self.uninterps, kvars_uninterpreted, goal_quantifiers).query(f)
        p = self._checkout()
        p.timeout_ms = self.timeout_ms
        try:
            with self._lock:
                self.queries += 1
            return p.check(decls, body, model)
        finally:
            self._pool.put(p)

    def check_many(self, vcs: Iterable, **kw) -> list[Result]:
        vcs = list(vcs)
        if self.jobs == 1 or len(vcs) < 2:
            return [self.check_valid(v, **kw) for v in vcs]
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(self.jobs) as ex:
            return list(ex.map(lambda v: self.check_valid(v, **kw), vcs))


def check_valid(vc, binary: str | None = None, timeout_ms: int = 10_000,
                uninterps: dict | None = None) -> Result:
    with Solver(binary, timeout_ms, uninterps=uninterps) as s:
        return s.check_valid(vc)
