"""Surface language: syntax, parser, elaboration, ANF and the prelude."""

from .anf import anf_normalize, is_anf
from .elaborate import ElabError, Module, build_module
from .env import TypeEnv
from .parser import ParseError, parse_expr, parse_program, parse_qualifiers, parse_type
from .prelude import const_type, load_prelude, prelude_program
from .syntax import shape

__all__ = [
    "ElabError", "Module", "ParseError", "TypeEnv", "anf_normalize", "build_module",
    "const_type", "is_anf", "load_prelude", "parse_expr", "parse_program",
    "parse_qualifiers", "parse_type", "prelude_program", "shape",
]
