"""Canonical pretty-printer; ``parse_query(print_query(ast)) == ast``."""

from __future__ import annotations

from .ast import And, Compare, Exists, FilterExpr, Not, NotExists, Or, QueryAst, TriplePattern


def print_pattern(p: TriplePattern) -> str:
    return f"{p.subject.render()} {p.predicate.render()} {p.object.render()} ."


def print_expr(e: FilterExpr) -> str:
    if isinstance(e, Exists):
        return f"EXISTS({e.term.render()})"
    if isinstance(e, NotExists):
        return f"NOT EXISTS({e.term.render()})"
    if isinstance(e, And):
        return f"({print_expr(e.left)} && {print_expr(e.right)})"
    if isinstance(e, Or):
        return f"({print_expr(e.left)} || {print_expr(e.right)})"
    if isinstance(e, Not):
        return f"!{print_expr(e.operand)}"
    if isinstance(e, Compare):
        return f"{e.lhs.render()} {e.op} {e.rhs.render()}"
    raise TypeError(f"not a filter expression: {e!r}")


def print_query(ast: QueryAst) -> str:
    head = "*" if ast.projection is None else " ".join("?" + v for v in ast.projection)
    lines = [f"SELECT {head}", "WHERE {"]
    lines += ["  " + print_pattern(p) for p in ast.patterns]
    for block in ast.optional_blocks:
        inner = " ".join(print_pattern(p) for p in block)
        lines.append(f"  OPTIONAL {{ {inner} }}")
    if ast.filter is not None:
        expr = print_expr(ast.filter)
        lines.append(f"  FILTER({expr})")
    lines.append("}")
    mods = ast.modifiers
    if mods.order_by is not None:
        direction = "DESC" if mods.order_by.descending else "ASC"
        lines.append(f"ORDER BY {direction}(?{mods.order_by.variable})")
    if mods.limit is not None:
        lines.append(f"LIMIT {mods.limit}")
    if mods.offset is not None:
        lines.append(f"OFFSET {mods.offset}")
    return "\n".join(lines)
