"""S-expression dump and parse of constraints.

    (kvar k0 ((z$1 Int) (z$v Int)))          declaration, one per variable
    (forall ((x Int) pred) constraint)       binder with hypothesis
    (and c1 c2 ...)                          conjunction, (and) is true
    pred                                     goal

Predicates use prefix operators: (+ a b) (- a b) (* a b) (neg a) (= a b)
(!= a b) (< a b) (<= a b) (> a b) (>= a b) (and ..) (or ..) (not p) (=> p q)
(<=> p q) (exists ((x Int)) p) (kapp k x1 .. xn) (app f t1 .. tn).
"""

from __future__ import annotations

import re

from . import constraints as C
from . import logic as L


class SexpError(Exception):
    pass


_TOKEN = re.compile(r"\s*(?:(;[^\n]*)|(\()|(\))|([^\s()]+))")


def read_all(text: str) -> list:
    out: list = []
    stack: list[list] = [out]
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip():
                raise SexpError(f"bad input at offset {pos}")
            break
        pos = m.end()
        comment, lp, rp, atom = m.groups()
        if comment:
            continue
        if lp:
            stack.append([])
        elif rp:
            if len(stack) == 1:
                raise SexpError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        elif atom:
            stack[-1].append(atom)
    if len(stack) != 1:
        raise SexpError("unbalanced '('")
    return out


def write(x) -> str:
    if isinstance(x, list):
        return "(" + " ".join(write(a) for a in x) + ")"
    return str(x)


# ---------------------------------------------------------------------------
# Predicates

def pred_to(t: L.Term):
    if isinstance(t, L.BoolConst):
        return "true" if t.value else "false"
    if isinstance(t, L.IntConst):
        return str(t.value)
    if isinstance(t, L.Var):
        return t.name
    if isinstance(t, L.KApp):
        return ["kapp", t.kvar.name, *t.args]
    if isinstance(t, L.UApp):
        return ["app", t.fn, *(pred_to(a) for a in t.args)]
    if isinstance(t, (L.Exists, L.Forall)):
        q = "exists" if isinstance(t, L.Exists) else "forall"
        return [q, [[t.var, t.sort.name]], pred_to(t.body)]
    if isinstance(t, L.Op):
        return [t.op, *(pred_to(a) for a in t.args)]
    raise SexpError(f"cannot write {t!r}")


def _sort(name: str) -> L.Sort:
    return L.BASE_SORTS.get(name) or L.Sort(name)


def pred_from(x, kvars: dict) -> L.Term:
    if isinstance(x, str):
        if x == "true":
            return L.TRUE
        if x == "false":
            return L.FALSE
        if re.fullmatch(r"-?\d+", x):
            return L.IntConst(int(x))
        return L.Var(x)
    if not x:
        raise SexpError("empty predicate")
    head, *rest = x
    if head == "kapp":
        if rest[0] not in kvars:
            raise SexpError(f"undeclared kvar {rest[0]}")
        return L.KApp(kvars[rest[0]], tuple(rest[1:]))
    if head == "app":
        return L.UApp(rest[0], tuple(pred_from(a, kvars) for a in rest[1:]))
    if head in ("exists", "forall"):
        (var, sort), = rest[0]
        cls = L.Exists if head == "exists" else L.Forall
        return cls(var, _sort(sort), pred_from(rest[1], kvars))
    if head in L.ARITH_OPS | L.CMP_OPS | L.BOOL_OPS:
        return L.Op(head, tuple(pred_from(a, kvars) for a in rest))
    raise SexpError(f"unknown operator {head}")


# ---------------------------------------------------------------------------
# Constraints

def constraint_to(c: C.Constraint):
    if isinstance(c, C.Head):
        return pred_to(c.pred)
    if isinstance(c, C.Conj):
        return ["and", *(constraint_to(p) for p in c.parts)]
    return ["forall", [[c.var, c.sort.name], pred_to(c.hyp)], constraint_to(c.body)]


def _pretty(x, indent: int = 0) -> str:
    flat = write(x)
    if len(flat) + indent <= 100 or not isinstance(x, list):
        return " " * indent + flat
    if x[0] == "forall":
        return (" " * indent + f"(forall {write(x[1])}\n" + _pretty(x[2], indent + 2) + ")")
    if x[0] == "and":
        inner = "\n".join(_pretty(a, indent + 2) for a in x[1:])
        return " " * indent + "(and\n" + inner + ")"
    return " " * indent + flat


def dump_constraint(c: C.Constraint) -> str:
    lines = []
    for k in sorted(c.kvs, key=C.kv_key):
        params = " ".join(f"({x} {s.name})" for x, s in k.params)
        lines.append(f"(kvar {k.name} ({params}))")
    lines.append(_pretty(constraint_to(c)))
    return "\n".join(lines) + "\n"


def constraint_from(x, kvars: dict) -> C.Constraint:
    if isinstance(x, list) and x and x[0] == "and":
        return C.Conj(tuple(constraint_from(a, kvars) for a in x[1:]))
    if isinstance(x, list) and x and x[0] == "forall" and len(x) == 3 \
            and isinstance(x[1], list) and len(x[1]) == 2 and isinstance(x[1][0], list):
        (var, sort), hyp = x[1]
        return C.Bind(var, _sort(sort), pred_from(hyp, kvars), constraint_from(x[2], kvars))
    return C.Head(pred_from(x, kvars))


def parse_constraints(text: str) -> C.Constraint:
    """Read a dump back.  Several top-level constraints are conjoined."""
    kvars: dict = {}
    parts = []
    for x in read_all(text):
        if isinstance(x, list) and x and x[0] == "kvar":
            name, params = x[1], x[2]
            kvars[name] = L.KVar(name, tuple((p, _sort(s)) for p, s in params))
        else:
            parts.append(constraint_from(x, kvars))
    if len(parts) == 1:
        return parts[0]
    return C.Conj(tuple(parts))
