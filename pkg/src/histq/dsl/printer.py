"""Canonical text form of a scenario syntax tree.

``parse_program(format_program(p)) == p`` for every tree the parser produces.
"""

from __future__ import annotations

from . import ast as A
from .parser import NAME_RE, RESERVED

_ADD, _MUL, _UNARY, _POW, _ATOM = 1, 2, 3, 4, 5


def _prec(e) -> int:
    if isinstance(e, A.Binary):
        if e.op in "+-":
            return _ADD
        return _POW if e.op == "^" else _MUL
    if isinstance(e, A.Unary):
        return _UNARY
    return _ATOM


def format_label(label: str) -> str:
    if NAME_RE.fullmatch(label) and label not in RESERVED:
        return label
    escaped = label.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def format_expr(e, need: int = _ADD) -> str:
    if isinstance(e, A.Num):
        text = e.text
    elif isinstance(e, (A.Const, A.Ref)):
        text = e.name
    elif isinstance(e, A.Call):
        text = f"{e.func}({', '.join(format_expr(a) for a in e.args)})"
    elif isinstance(e, A.ListLit):
        text = f"[{', '.join(format_expr(a) for a in e.items)}]"
    elif isinstance(e, A.Dyad):
        text = f"|{e.ket}><{e.bra}|"
    elif isinstance(e, A.Proj):
        text = f"[{e.name}]"
    elif isinstance(e, A.Unary):
        text = e.op + format_expr(e.operand, _UNARY)
    elif isinstance(e, A.Binary):
        if e.op == "^":
            text = f"{format_expr(e.left, _ATOM)}^{format_expr(e.right, _UNARY)}"
        else:
            level = _prec(e)
            text = f"{format_expr(e.left, level)} {e.op} {format_expr(e.right, level + 1)}"
    else:
        raise TypeError(f"not an expression node: {e!r}")
    return f"({text})" if _prec(e) < need else text


def _items(items) -> str:
    parts = []
    for it in items:
        body = format_expr(it.expr)
        parts.append(body if it.label is None else f"{format_label(it.label)}: {body}")
    return "{" + ", ".join(parts) + "}"


def _initial(init: A.Initial) -> str:
    if init.state is not None:
        return f"[{init.state}]"
    return "mix {" + ", ".join(f"{format_expr(w)}: {name}" for w, name in init.mixture) + "}"


def _slot(slot) -> str:
    if isinstance(slot, A.PointerSlot):
        return "pointer"
    if isinstance(slot, A.LinkedSlotNode):
        return "linked {" + ", ".join(f"{format_label(k)}: {_items(v)}" for k, v in slot.bound) + "}"
    return " (x) ".join(_items(f) for f in slot.factors)


def format_matcher(m: A.Matcher) -> str:
    if m.kind == "any":
        return "*"
    if m.kind == "label":
        return format_label(m.label)
    if m.kind == "set":
        return "{" + ", ".join(format_label(p.label) for p in m.parts) + "}"
    return "&".join(format_matcher(p) for p in m.parts)


def _pattern(pattern) -> str:
    return "(" + ", ".join(f"{format_label(t)}: {format_matcher(m)}" for t, m in pattern) + ")"


def _labels(labels) -> str:
    return "(" + ", ".join(format_label(t) for t in labels) + ")"


def format_statement(s) -> str:
    if isinstance(s, A.SpaceDecl):
        if s.factors:
            return f"space {s.name} = {' (x) '.join(s.factors)}"
        return f"space {s.name} dim {s.dim}"
    if isinstance(s, A.KetDecl):
        return f"ket {s.name} in {s.space} = {format_expr(s.expr)}"
    if isinstance(s, A.OperatorDecl):
        where = f"on {s.source}" if s.square else f"from {s.source} to {s.target}"
        return f"{s.kind} {s.name} {where} = {format_expr(s.expr)}"
    if isinstance(s, A.ModelDecl):
        return _model(s)
    if isinstance(s, A.FamilyDecl):
        where = f" on {s.model}" if s.model is not None else f" in {s.space}" if s.space is not None else ""
        text = f"family {s.name}{where} = {_initial(s.initial)}"
        text += "".join(f" (.) {_slot(slot)}" for slot in s.slots)
        if s.evolve:
            text += " evolve (" + ", ".join(format_expr(e) for e in s.evolve) + ")"
        if s.times:
            text += " at " + _labels(s.times)
        return text
    if isinstance(s, A.QueryDecl):
        return _query(s)
    raise TypeError(f"not a statement node: {s!r}")


def _model(s: A.ModelDecl) -> str:
    entries = []
    for e in s.entries:
        label = format_label(e.label)
        if s.kind == "projective":
            body = f"{format_expr(e.exprs[0])} -> {format_expr(e.exprs[1])}"
            if len(e.exprs) > 2:
                body += f" pointer {format_expr(e.exprs[2])}"
        elif s.kind == "preparation":
            body = f"{format_expr(e.exprs[0])} weight {format_expr(e.exprs[1])}"
        else:
            body = format_expr(e.exprs[0])
        entries.append(f"  {label}: {body}")
    head = f"model {s.name} = {s.kind}"
    if s.kind == "isometry":
        head += f" {format_expr(s.isometry)} pointers"
    text = head + " {\n" + ",\n".join(entries) + "\n}"
    if s.pointer_states:
        text += " pointer_states {" + ", ".join(format_expr(p) for p in s.pointer_states) + "}"
    return text


def _query(q: A.QueryDecl) -> str:
    text = "query "
    if q.qid is not None:
        text += f"{q.qid}: "
    text += f"{q.kind} {q.target}"
    if q.kind == "probabilities" and q.keep:
        text += " keep " + _labels(q.keep)
    elif q.kind == "conditional":
        text += f" target {_pattern(q.target_pattern)} given {_pattern(q.given_pattern)}"
    elif q.kind == "inference":
        text += f" state {_initial(q.initial)}"
    elif q.kind == "noncontextuality":
        groups = ", ".join(f"{format_label(g)}: {{{', '.join(map(format_label, m))}}}" for g, m in q.groups)
        text += f", {q.second} groups {{{groups}}} probes {{{', '.join(q.probes)}}}"
    return text


def format_program(program: A.Program) -> str:
    return "".join(format_statement(s) + "\n" for s in program.statements)
