"""Refinement predicates: hash-consed terms, sorts, substitution and sort checking.

Terms are interned on construction, so two structurally equal terms are the
same Python object.  Equality and hashing are therefore O(1), substitution
can be memoised per node, and solutions substituted at many sites stay
shared as a DAG.
"""

from __future__ import annotations

import itertools
import threading
import weakref
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping


# ---------------------------------------------------------------------------
# Sorts


@dataclass(frozen=True)
class Sort:
    name: str

    def __str__(self) -> str:
        return self.name


INT = Sort("Int")
BOOL = Sort("Bool")
UNIT = Sort("Unit")

BASE_SORTS = {"Int": INT, "Bool": BOOL, "Unit": UNIT}


@dataclass(frozen=True)
class FunSig:
    """Signature of an uninterpreted function symbol."""

    args: tuple[Sort, ...]
    result: Sort

    def __str__(self) -> str:
        return " -> ".join(str(s) for s in (*self.args, self.result))


@dataclass(frozen=True)
class KVar:
    """A refinement variable with an ordered, sorted parameter list."""

    name: str
    params: tuple[tuple[str, Sort], ...]

    @property
    def arity(self) -> int:
        return len(self.params)

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(p for p, _ in self.params)

    def __str__(self) -> str:
        return self.name


class SortError(Exception):
    pass


class CaptureError(Exception):
    pass


class SkolemError(Exception):
    """An existential sits in a goal position; the solver pipeline is broken."""


# ---------------------------------------------------------------------------
# Hash-consed terms

_TABLE: "weakref.WeakValueDictionary[tuple, Term]" = weakref.WeakValueDictionary()
_LOCK = threading.Lock()


def _intern(cls, key: tuple, fields: dict):
    full = (cls, *key)
    with _LOCK:
        node = _TABLE.get(full)
        if node is None:
            node = object.__new__(cls)
            for name, value in fields.items():
                object.__setattr__(node, name, value)
            object.__setattr__(node, "_fv", None)
            object.__setattr__(node, "_atoms", None)
            object.__setattr__(node, "_kv", None)
            _TABLE[full] = node
    return node


class Term:
    __slots__ = ("_fv", "_atoms", "_kv", "__weakref__")

    def __setattr__(self, name, value):
        raise AttributeError("terms are immutable")

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self

    def __str__(self) -> str:
        return show(self)

    def __repr__(self) -> str:
        return f"<{show(self)}>"


class Var(Term):
    __slots__ = ("name",)

    def __new__(cls, name: str):
        return _intern(cls, (name,), {"name": name})


class IntConst(Term):
    __slots__ = ("value",)

    def __new__(cls, value: int):
        value = int(value)
        return _intern(cls, (value,), {"value": value})


class BoolConst(Term):
    __slots__ = ("value",)

    def __new__(cls, value: bool):
        value = bool(value)
        return _intern(cls, (value,), {"value": value})


class Op(Term):
    """Interpreted operator application (arithmetic, comparison, connective)."""

    __slots__ = ("op", "args")

    def __new__(cls, op: str, args: Iterable[Term]):
        args = tuple(args)
        return _intern(cls, (op, args), {"op": op, "args": args})


class UApp(Term):
    """Application of an uninterpreted function symbol."""

    __slots__ = ("fn", "args")

    def __new__(cls, fn: str, args: Iterable[Term]):
        args = tuple(args)
        return _intern(cls, (fn, args), {"fn": fn, "args": args})


class KApp(Term):
    """Refinement variable application k(y1, ..., yn); arguments are variables."""

    __slots__ = ("kvar", "args")

    def __new__(cls, kvar: KVar, args: Iterable[str]):
        args = tuple(args)
        if len(args) != kvar.arity:
            raise ValueError(f"{kvar.name} has arity {kvar.arity}, applied to {len(args)} arguments")
        return _intern(cls, (kvar, args), {"kvar": kvar, "args": args})


class Exists(Term):
    __slots__ = ("var", "sort", "body")

    def __new__(cls, var: str, sort: Sort, body: Term):
        return _intern(cls, (var, sort, body), {"var": var, "sort": sort, "body": body})


class Forall(Term):
    """Universal quantifier; only appears in VC formulas handed to the SMT layer."""

    __slots__ = ("var", "sort", "body")

    def __new__(cls, var: str, sort: Sort, body: Term):
        return _intern(cls, (var, sort, body), {"var": var, "sort": sort, "body": body})


TRUE = BoolConst(True)
FALSE = BoolConst(False)

ARITH_OPS = {"+", "-", "*", "neg"}
CMP_OPS = {"=", "!=", "<", "<=", ">", ">="}
BOOL_OPS = {"and", "or", "not", "=>", "<=>"}


# Smart constructors.  The only simplification performed is constant folding.

def And(*parts: Term) -> Term:
    out: list[Term] = []
    for p in parts:
        if p is TRUE:
            continue
        if p is FALSE:
            return FALSE
        if isinstance(p, Op) and p.op == "and":
            out.extend(p.args)
        else:
            out.append(p)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return Op("and", out)


def Or(*parts: Term) -> Term:
    out: list[Term] = []
    for p in parts:
        if p is FALSE:
            continue
        if p is TRUE:
            return TRUE
        if isinstance(p, Op) and p.op == "or":
            out.extend(p.args)
        else:
            out.append(p)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return Op("or", out)


def Not(p: Term) -> Term:
    if p is TRUE:
        return FALSE
    if p is FALSE:
        return TRUE
    return Op("not", (p,))


def Implies(p: Term, q: Term) -> Term:
    if p is FALSE or q is TRUE:
        return TRUE
    if p is TRUE:
        return q
    return Op("=>", (p, q))


def Iff(p: Term, q: Term) -> Term:
    return Op("<=>", (p, q))


def Eq(a: Term, b: Term) -> Term:
    return Op("=", (a, b))


def Ex(var: str, sort: Sort, body: Term) -> Term:
    if body is FALSE or body is TRUE:
        return body
    return Exists(var, sort, body)


def All(var: str, sort: Sort, body: Term) -> Term:
    if body is TRUE:
        return TRUE
    return Forall(var, sort, body)


def v(name: str) -> Var:
    return Var(name)


def lit(n: int) -> IntConst:
    return IntConst(n)


def conjuncts(p: Term) -> list[Term]:
    if p is TRUE:
        return []
    if isinstance(p, Op) and p.op == "and":
        return list(p.args)
    return [p]


# ---------------------------------------------------------------------------
# Traversals


def children(t: Term) -> tuple[Term, ...]:
    if isinstance(t, (Op, UApp)):
        return t.args
    if isinstance(t, (Exists, Forall)):
        return (t.body,)
    return ()


def free_vars(t: Term) -> frozenset[str]:
    """Free term variables; quantifiers bind, k-application arguments count."""
    fv = t._fv
    if fv is not None:
        return fv
    if isinstance(t, Var):
        fv = frozenset((t.name,))
    elif isinstance(t, KApp):
        fv = frozenset(t.args)
    elif isinstance(t, (Exists, Forall)):
        fv = free_vars(t.body) - {t.var}
    elif isinstance(t, (Op, UApp)):
        fv = frozenset().union(*(free_vars(a) for a in t.args))
    else:
        fv = frozenset()
    object.__setattr__(t, "_fv", fv)
    return fv


def kvars(t: Term) -> frozenset[KVar]:
    ks = t._kv
    if ks is not None:
        return ks
    if isinstance(t, KApp):
        ks = frozenset((t.kvar,))
    else:
        ks = frozenset().union(*(kvars(c) for c in children(t))) if children(t) else frozenset()
    object.__setattr__(t, "_kv", ks)
    return ks


def has_kvar(t: Term, k: KVar | None = None) -> bool:
    ks = kvars(t)
    return bool(ks) if k is None else k in ks


def is_atom(t: Term) -> bool:
    if isinstance(t, (KApp, Var, UApp)):
        return True
    return isinstance(t, Op) and t.op in CMP_OPS


def atom_count(t: Term) -> int:
    """Number of atomic predicates in ``t`` counted as a tree (sharing expanded)."""
    n = t._atoms
    if n is not None:
        return n
    if is_atom(t):
        n = 1
    elif isinstance(t, Op) and t.op in BOOL_OPS:
        n = sum(atom_count(a) for a in t.args)
    elif isinstance(t, (Exists, Forall)):
        n = atom_count(t.body)
    else:
        n = 0
    object.__setattr__(t, "_atoms", n)
    return n


def names_in(t: Term) -> set[str]:
    """Every variable name occurring in ``t``, free or bound."""
    seen: set[int] = set()
    out: set[str] = set()
    stack = [t]
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        if isinstance(n, Var):
            out.add(n.name)
        elif isinstance(n, KApp):
            out.update(n.args)
        elif isinstance(n, (Exists, Forall)):
            out.add(n.var)
        stack.extend(children(n))
    return out


class NameSupply:
    """Monotone fresh-name counter.  Generated names contain ``$``, which the
    surface lexer rejects, so they never capture user names."""

    def __init__(self, prefix: str = "$"):
        self._counter = itertools.count()
        self._lock = threading.Lock()
        self.prefix = prefix

    def fresh(self, base: str = "t") -> str:
        base = base.split("$")[0] or "t"
        with self._lock:
            n = next(self._counter)
        return f"{base}{self.prefix}{n}"


_BINDER_SUPPLY = NameSupply()


def subst(t: Term, mapping: Mapping[str, str]) -> Term:
    """Simultaneous capture-avoiding renaming of free variables."""
    mapping = {a: b for a, b in mapping.items() if a != b}
    if not mapping:
        return t
    memo: dict[tuple[int, frozenset], Term] = {}
    return _subst(t, mapping, memo)


def _subst(t: Term, m: Mapping[str, str], memo) -> Term:
    fv = free_vars(t)
    relevant = {a: b for a, b in m.items() if a in fv}
    if not relevant:
        return t
    key = (id(t), frozenset(relevant.items()))
    hit = memo.get(key)
    if hit is not None:
        return hit
    if isinstance(t, Var):
        out: Term = Var(relevant[t.name])
    elif isinstance(t, KApp):
        out = KApp(t.kvar, (relevant.get(a, a) for a in t.args))
    elif isinstance(t, Op):
        out = Op(t.op, (_subst(a, relevant, memo) for a in t.args))
    elif isinstance(t, UApp):
        out = UApp(t.fn, (_subst(a, relevant, memo) for a in t.args))
    elif isinstance(t, (Exists, Forall)):
        inner = dict(relevant)
        inner.pop(t.var, None)
        var, body = t.var, t.body
        if var in inner.values():
            # the binder would capture an incoming name: alpha-rename it first
            avoid = names_in(body) | set(inner.values()) | set(inner)
            new = _BINDER_SUPPLY.fresh(var)
            while new in avoid:
                new = _BINDER_SUPPLY.fresh(var)
            body = _subst(body, {var: new}, memo)
            var = new
        out = type(t)(var, t.sort, _subst(body, inner, memo))
    else:
        out = t
    memo[key] = out
    return out


def rename_free(t: Term, old: str, new: str) -> Term:
    return subst(t, {old: new})


# ---------------------------------------------------------------------------
# Sort checking

SortEnv = Mapping[str, "Sort | FunSig"]


def sort_of(env: SortEnv, t: Term) -> Sort:
    """Sort of ``t`` under ``env``; raises SortError on any clash."""
    if isinstance(t, IntConst):
        return INT
    if isinstance(t, BoolConst):
        return BOOL
    if isinstance(t, Var):
        s = env.get(t.name)
        if s is None:
            raise SortError(f"unbound variable {t.name}")
        if isinstance(s, FunSig):
            raise SortError(f"{t.name} is a function; refinements are first-order")
        return s
    if isinstance(t, KApp):
        raise SortError(f"k-application {show(t)} is not a refinement")
    if isinstance(t, UApp):
        sig = env.get(t.fn)
        if not isinstance(sig, FunSig):
            raise SortError(f"unknown function {t.fn}")
        if len(sig.args) != len(t.args):
            raise SortError(f"{t.fn} expects {len(sig.args)} arguments")
        for want, a in zip(sig.args, t.args):
            got = sort_of(env, a)
            if got != want:
                raise SortError(f"argument {show(a)} of {t.fn} has sort {got}, expected {want}")
        return sig.result
    if isinstance(t, (Exists, Forall)):
        inner = dict(env)
        inner[t.var] = t.sort
        _expect(inner, t.body, BOOL)
        return BOOL
    if isinstance(t, Op):
        op, args = t.op, t.args
        if op in ARITH_OPS:
            for a in args:
                _expect(env, a, INT)
            if op == "*" and sum(not isinstance(a, IntConst) for a in args) > 1:
                raise SortError(f"nonlinear product {show(t)}")
            return INT
        if op in ("=", "!="):
            left, right = sort_of(env, args[0]), sort_of(env, args[1])
            if left != right:
                raise SortError(f"{show(t)} compares {left} with {right}")
            return BOOL
        if op in CMP_OPS:
            for a in args:
                _expect(env, a, INT)
            return BOOL
        if op in BOOL_OPS:
            for a in args:
                _expect(env, a, BOOL)
            return BOOL
    raise SortError(f"unsupported term {t!r}")


def _expect(env: SortEnv, t: Term, want: Sort) -> None:
    got = sort_of(env, t)
    if got != want:
        raise SortError(f"{show(t)} has sort {got}, expected {want}")


def well_sorted(env: SortEnv, p: Term) -> bool:
    try:
        return sort_of(env, p) == BOOL
    except SortError:
        return False


def sort_diagnostic(env: SortEnv, p: Term) -> str | None:
    """The first sort error in ``p``, or None when it is a well-sorted predicate."""
    try:
        s = sort_of(env, p)
    except SortError as exc:
        return str(exc)
    return None if s == BOOL else f"{show(p)} has sort {s}, expected Bool"


# ---------------------------------------------------------------------------
# Evaluation over finite models (testing and boolean constraint checking)


def evaluate(t: Term, val: Mapping[str, object], kinterp: Mapping[KVar, Callable] | None = None):
    """Evaluate a term under a valuation.  Quantifiers range over Bool or Unit."""
    if isinstance(t, BoolConst) or isinstance(t, IntConst):
        return t.value
    if isinstance(t, Var):
        return val[t.name]
    if isinstance(t, KApp):
        if kinterp is None or t.kvar not in kinterp:
            raise KeyError(f"no interpretation for {t.kvar.name}")
        return bool(kinterp[t.kvar](*(val[a] for a in t.args)))
    if isinstance(t, (Exists, Forall)):
        domain = _finite_domain(t.sort)
        results = (evaluate(t.body, {**val, t.var: d}, kinterp) for d in domain)
        return any(results) if isinstance(t, Exists) else all(results)
    if isinstance(t, Op):
        op = t.op
        if op == "and":
            return all(evaluate(a, val, kinterp) for a in t.args)
        if op == "or":
            return any(evaluate(a, val, kinterp) for a in t.args)
        a = [evaluate(x, val, kinterp) for x in t.args]
        if op == "not":
            return not a[0]
        if op == "=>":
            return (not a[0]) or a[1]
        if op in ("<=>", "="):
            return a[0] == a[1]
        if op == "!=":
            return a[0] != a[1]
        if op == "<":
            return a[0] < a[1]
        if op == "<=":
            return a[0] <= a[1]
        if op == ">":
            return a[0] > a[1]
        if op == ">=":
            return a[0] >= a[1]
        if op == "+":
            return sum(a)
        if op == "-":
            return a[0] - a[1]
        if op == "*":
            return a[0] * a[1]
        if op == "neg":
            return -a[0]
    raise ValueError(f"cannot evaluate {t!r}")


def _finite_domain(s: Sort):
    if s == BOOL:
        return (False, True)
    if s == UNIT:
        return ((),)
    raise ValueError(f"sort {s} is not finite")


# ---------------------------------------------------------------------------
# Skolemization


def skolemize_hypotheses(f: Term, avoid: Iterable[str] = (), keep_goal_exists: bool = False) -> Term:
    """Replace existentials in negative positions by fresh universals.

    Each fresh variable is quantified at the boundary where the formula enters
    negative polarity (the antecedent of an implication or a negation), which
    keeps validity unchanged.  An existential in a goal position raises
    SkolemError unless ``keep_goal_exists`` is set, in which case it is left
    in place for a solver with quantifier support.
    """
    used = names_in(f) | set(avoid)
    counter = itertools.count(1)

    def fresh(base: str) -> str:
        while True:
            name = f"{base.split('!')[0]}!{next(counter)}"
            if name not in used:
                used.add(name)
                return name

    def pos(t: Term) -> Term:
        if isinstance(t, Forall):
            return Forall(t.var, t.sort, pos(t.body))
        if isinstance(t, Exists):
            if keep_goal_exists:
                return t
            raise SkolemError(f"existential in goal position: {show(t)}")
        if isinstance(t, Op):
            if t.op in ("and", "or"):
                return Op(t.op, (pos(a) for a in t.args))
            if t.op == "=>":
                out: list[tuple[str, Sort]] = []
                hyp = neg(t.args[0], out)
                return _wrap_forall(out, Op("=>", (hyp, pos(t.args[1]))))
            if t.op == "not":
                out = []
                body = neg(t.args[0], out)
                return _wrap_forall(out, Op("not", (body,)))
            _check_quantifier_free(t)
        return t

    def neg(t: Term, out: list[tuple[str, Sort]]) -> Term:
        if isinstance(t, Exists):
            z = fresh(t.var)
            out.append((z, t.sort))
            return neg(subst(t.body, {t.var: z}), out)
        if isinstance(t, Forall):
            raise SkolemError(f"universal in hypothesis position: {show(t)}")
        if isinstance(t, Op):
            if t.op in ("and", "or"):
                return Op(t.op, (neg(a, out) for a in t.args))
            if t.op == "=>":
                return Op("=>", (pos_inner(t.args[0]), neg(t.args[1], out)))
            if t.op == "not":
                return Op("not", (pos_inner(t.args[0]),))
            _check_quantifier_free(t)
        return t

    def pos_inner(t: Term) -> Term:
        # positive position nested inside a hypothesis: quantifiers are not allowed
        _check_quantifier_free(t)
        return t

    return pos(f)


def _wrap_forall(binders: list[tuple[str, Sort]], body: Term) -> Term:
    for name, sort in reversed(binders):
        body = Forall(name, sort, body)
    return body


def _check_quantifier_free(t: Term) -> None:
    stack = [t]
    seen: set[int] = set()
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        if isinstance(n, (Exists, Forall)):
            raise SkolemError(f"quantifier under mixed polarity: {show(n)}")
        stack.extend(children(n))


# ---------------------------------------------------------------------------
# Printing

_PREC = {"<=>": 1, "=>": 2, "or": 3, "and": 4, "not": 5,
         "=": 6, "!=": 6, "<": 6, "<=": 6, ">": 6, ">=": 6,
         "+": 7, "-": 7, "*": 8, "neg": 9}
_SYM = {"and": "&&", "or": "||", "=>": "=>", "<=>": "<=>"}


def show(t: Term) -> str:
    return _show(t, 0)


def _show(t: Term, ctx: int) -> str:
    if isinstance(t, BoolConst):
        return "true" if t.value else "false"
    if isinstance(t, IntConst):
        return str(t.value) if t.value >= 0 or ctx < 9 else f"({t.value})"
    if isinstance(t, Var):
        return t.name
    if isinstance(t, KApp):
        return f"{t.kvar.name}({', '.join(t.args)})"
    if isinstance(t, UApp):
        return f"{t.fn}({', '.join(_show(a, 0) for a in t.args)})"
    if isinstance(t, (Exists, Forall)):
        q = "exists" if isinstance(t, Exists) else "forall"
        s = f"{q} {t.var}:{t.sort}. {_show(t.body, 0)}"
        return f"({s})" if ctx > 0 else s
    if isinstance(t, Op):
        p = _PREC[t.op]
        if t.op == "not":
            s = f"!{_show(t.args[0], p + 1)}"
        elif t.op == "neg":
            s = f"-{_show(t.args[0], p + 1)}"
        elif t.op in ("and", "or"):
            s = f" {_SYM[t.op]} ".join(_show(a, p + 1) for a in t.args)
        elif t.op in ("=>", "<=>"):
            s = f"{_show(t.args[0], p + 1)} {_SYM[t.op]} {_show(t.args[1], p)}"
        elif t.op in CMP_OPS:
            s = f"{_show(t.args[0], p + 1)} {t.op} {_show(t.args[1], p + 1)}"
        else:
            s = f"{_show(t.args[0], p)} {t.op} {_show(t.args[1], p + 1)}"
        return f"({s})" if p < ctx or (p == ctx and p <= 6) else s
    return repr(t)
