"""Syntax tree for scenario files.

Nodes are frozen dataclasses; source positions are excluded from equality so
that a parse -> print -> parse round trip compares structure only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True)
class Pos:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


NOPOS = Pos(0, 0)


def _pos():
    return field(default=NOPOS, compare=False, repr=False)


# --- expressions ------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    text: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Const:
    name: str  # "i" | "pi" | "omega"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Ref:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple["Expr", ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Binary:
    op: str  # + - * / ^ (x)
    left: "Expr"
    right: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class ListLit:
    items: tuple["Expr", ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Dyad:
    ket: str
    bra: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Proj:
    name: str
    pos: Pos = _pos()


Expr = Union[Num, Const, Ref, Call, Unary, Binary, ListLit, Dyad, Proj]


# --- declarations -----------------------------------------------------------


@dataclass(frozen=True)
class SpaceDecl:
    name: str
    dim: Optional[int] = None
    factors: tuple[str, ...] = ()
    pos: Pos = _pos()


@dataclass(frozen=True)
class KetDecl:
    name: str
    space: str
    expr: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class OperatorDecl:
    kind: str  # "operator" | "isometry"
    name: str
    source: str
    target: str  # equal to source for square operators declared with "on"
    expr: Expr
    square: bool = True
    pos: Pos = _pos()


@dataclass(frozen=True)
class ModelEntry:
    label: str
    exprs: tuple[Expr, ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class ModelDecl:
    name: str
    kind: str  # projective | isometry | kraus | luders | preparation
    entries: tuple[ModelEntry, ...]
    isometry: Optional[Expr] = None
    pointer_states: tuple[Expr, ...] = ()
    pos: Pos = _pos()


@dataclass(frozen=True)
class Item:
    label: Optional[str]  # None: label inferred from the expression
    expr: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class SetSlot:
    factors: tuple[tuple[Item, ...], ...]  # more than one factor: tensor product of sets
    pos: Pos = _pos()


@dataclass(frozen=True)
class LinkedSlotNode:
    bound: tuple[tuple[str, tuple[Item, ...]], ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class PointerSlot:
    pos: Pos = _pos()


SlotNode = Union[SetSlot, LinkedSlotNode, PointerSlot]


@dataclass(frozen=True)
class Initial:
    state: Optional[str] = None  # "[name]"
    mixture: tuple[tuple[Expr, str], ...] = ()  # mix { weight: name, ... }
    pos: Pos = _pos()


@dataclass(frozen=True)
class FamilyDecl:
    name: str
    model: Optional[str]
    space: Optional[str]
    initial: Initial
    slots: tuple[SlotNode, ...]
    evolve: tuple[Expr, ...] = ()
    times: tuple[str, ...] = ()
    pos: Pos = _pos()


@dataclass(frozen=True)
class Matcher:
    """Label matcher: a label, ``*``, a set of alternatives, or a per-factor tuple."""

    kind: str  # "label" | "any" | "set" | "tuple"
    label: str = ""
    parts: tuple["Matcher", ...] = ()
    pos: Pos = _pos()


@dataclass(frozen=True)
class QueryDecl:
    kind: str
    qid: Optional[str]
    target: str  # family or model name
    second: Optional[str] = None  # second model (noncontextuality)
    keep: tuple[str, ...] = ()
    target_pattern: tuple[tuple[str, Matcher], ...] = ()
    given_pattern: tuple[tuple[str, Matcher], ...] = ()
    initial: Optional[Initial] = None
    groups: tuple[tuple[str, tuple[str, ...]], ...] = ()
    probes: tuple[str, ...] = ()
    pos: Pos = _pos()


Statement = Union[SpaceDecl, KetDecl, OperatorDecl, ModelDecl, FamilyDecl, QueryDecl]


@dataclass(frozen=True)
class Program:
    statements: tuple[Statement, ...]
