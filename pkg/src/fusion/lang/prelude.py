"""The bundled prelude of primitive signatures and constant typing."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

from .. import logic as L
from . import syntax as S
from .env import TypeEnv
from .parser import parse_program


@lru_cache(maxsize=1)
def prelude_source() -> str:
    return resources.files(__package__).joinpath("prelude.lf").read_text(encoding="utf-8")


@lru_cache(maxsize=1)
def prelude_program() -> S.Program:
    return parse_program(prelude_source())


def load_prelude() -> TypeEnv:
    from .elaborate import build_module

    mod = build_module(prelude_program())
    env = TypeEnv()
    for name, t in mod.prims.items():
        env = env.extend(name, t, guarded=False)
    return env


def const_type(c) -> S.RType:
    """The singleton type of a literal constant."""
    if isinstance(c, bool):
        p = L.v("v") if c else L.Not(L.v("v"))
        return S.RBase("v", L.BOOL, p)
    if c == ():
        return S.RBase("v", L.UNIT, L.TRUE)
    return S.RBase("v", L.INT, L.Eq(L.v("v"), L.lit(c)))
