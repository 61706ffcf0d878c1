"""Frontend for the Lustre/CoCoSpec subset."""

from __future__ import annotations

from pathlib import Path

from .ast import Program
from .elaborate import ElaborationError, Instance, elaborate, elaborate_main, instantiate
from .lexer import LustreError, ParseError
from .parser import parse, parse_expr
from .printer import pretty_print
from .typecheck import LustreTypeError, TypedProgram, typecheck


def load(text: str) -> TypedProgram:
    return typecheck(parse(text))


def load_file(path: str | Path) -> TypedProgram:
    return load(Path(path).read_text(encoding="utf-8"))


__all__ = ["ElaborationError", "Instance", "LustreError", "LustreTypeError", "ParseError", "Program",
           "TypedProgram", "elaborate", "elaborate_main", "instantiate", "load", "load_file", "parse",
           "parse_expr", "pretty_print", "typecheck"]
