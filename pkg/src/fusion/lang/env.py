"""Typing environments."""

from __future__ import annotations

from dataclasses import dataclass, field

from .. import logic as L
from . import syntax as S


@dataclass(frozen=True)
class Entry:
    name: str
    type: object  # RType
    guarded: bool = True


@dataclass(frozen=True)
class TypeEnv:
    """Ordered bindings; lookup honours shadowing by recency.

    ``guarded`` marks binders whose refinement appears as a hypothesis of the
    constraint being generated.  Only those may be mentioned by templates.
    """

    entries: tuple = ()
    tvars: frozenset = frozenset()
    _index: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self._index is None:
            object.__setattr__(self, "_index", {e.name: e for e in self.entries})

    def extend(self, name: str, t, guarded: bool = True) -> "TypeEnv":
        es = tuple(e for e in self.entries if e.name != name) + (Entry(name, t, guarded),)
        return TypeEnv(es, self.tvars)

    def with_tvar(self, a: str) -> "TypeEnv":
        return TypeEnv(self.entries, self.tvars | {a})

    def lookup(self, name: str):
        e = self._index.get(name)
        return None if e is None else e.type

    def entry(self, name: str):
        return self._index.get(name)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def names(self) -> list[str]:
        return [e.name for e in self.entries]

    def base_binders(self) -> list[tuple[str, L.Sort]]:
        """Guarded binders of base sort, outermost first."""
        return [(e.name, e.type.sort) for e in self.entries
                if e.guarded and isinstance(e.type, S.RBase)]

    def sort_env(self, uninterps=None) -> dict:
        env = dict(uninterps or {})
        for e in self.entries:
            if isinstance(e.type, S.RBase):
                env[e.name] = e.type.sort
            elif isinstance(e.type, S.RFun):
                env[e.name] = L.FunSig((), L.UNIT)
        return env
