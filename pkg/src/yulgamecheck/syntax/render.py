"""Re-render an object tree as Yul source; parse(render(o)) equals o."""

from __future__ import annotations

from .nodes import (
    Assignment,
    Block,
    Break,
    Continue,
    Expression,
    ExpressionStatement,
    ForLoop,
    FunctionCall,
    FunctionDefinition,
    Identifier,
    If,
    Leave,
    Literal,
    Statement,
    Switch,
    VariableDeclaration,
    YulObject,
)

INDENT = "    "

_STRING_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t", "\r": "\\r"}


def render(obj: YulObject) -> str:
    return "\n".join(_render_object(obj, 0)) + "\n"


def _escape(text: str) -> str:
    out = []
    for c in text:
        if c in _STRING_ESCAPES:
            out.append(_STRING_ESCAPES[c])
        elif ord(c) < 0x20:
            out.append(f"\\x{ord(c):02x}")
        else:
            out.append(c)
    return "".join(out)


def _render_object(obj: YulObject, depth: int) -> list[str]:
    pad = INDENT * depth
    lines = [f'{pad}object "{_escape(obj.name)}" {{']
    lines.append(f"{pad}{INDENT}code ")
    lines.extend(_render_block(obj.code, depth + 1))
    for sub in obj.subobjects:
        lines.extend(_render_object(sub, depth + 1))
    for name, payload in obj.data_segments:
        lines.append(f'{pad}{INDENT}data "{_escape(name)}" hex"{payload.hex()}"')
    lines.append(f"{pad}}}")
    return lines


def _render_block(block: Block, depth: int) -> list[str]:
    pad = INDENT * depth
    if not block.statements:
        return [f"{pad}{{ }}"]
    lines = [f"{pad}{{"]
    for stmt in block.statements:
        lines.extend(_render_statement(stmt, depth + 1))
    lines.append(f"{pad}}}")
    return lines


def _render_statement(stmt: Statement, depth: int) -> list[str]:
    pad = INDENT * depth
    if isinstance(stmt, Block):
        return _render_block(stmt, depth)
    if isinstance(stmt, VariableDeclaration):
        names = ", ".join(stmt.names)
        if stmt.value is None:
            return [f"{pad}let {names}"]
        return [f"{pad}let {names} := {render_expression(stmt.value)}"]
    if isinstance(stmt, Assignment):
        return [f"{pad}{', '.join(stmt.names)} := {render_expression(stmt.value)}"]
    if isinstance(stmt, ExpressionStatement):
        return [f"{pad}{render_expression(stmt.expression)}"]
    if isinstance(stmt, If):
        lines = [f"{pad}if {render_expression(stmt.condition)}"]
        lines.extend(_render_block(stmt.body, depth))
        return lines
    if isinstance(stmt, Switch):
        lines = [f"{pad}switch {render_expression(stmt.expression)}"]
        for case in stmt.cases:
            lines.append(f"{pad}case {render_expression(case.value)}")
            lines.extend(_render_block(case.body, depth))
        if stmt.default is not None:
            lines.append(f"{pad}default")
            lines.extend(_render_block(stmt.default, depth))
        return lines
    if isinstance(stmt, ForLoop):
        lines = [f"{pad}for"]
        lines.extend(_render_block(stmt.init, depth))
        lines.append(f"{pad}{render_expression(stmt.condition)}")
        lines.extend(_render_block(stmt.post, depth))
        lines.extend(_render_block(stmt.body, depth))
        return lines
    if isinstance(stmt, FunctionDefinition):
        signature = f"{pad}function {stmt.name}({', '.join(stmt.parameters)})"
        if stmt.returns:
            signature += f" -> {', '.join(stmt.returns)}"
        return [signature] + _render_block(stmt.body, depth)
    if isinstance(stmt, Break):
        return [f"{pad}break"]
    if isinstance(stmt, Continue):
        return [f"{pad}continue"]
    if isinstance(stmt, Leave):
        return [f"{pad}leave"]
    raise TypeError(f"unknown statement node: {stmt!r}")


def render_expression(expr: Expression) -> str:
    if isinstance(expr, Literal):
        if expr.text is not None:
            return f'"{_escape(expr.text)}"'
        return hex(expr.value) if expr.value >= 1 << 64 else str(expr.value)
    if isinstance(expr, Identifier):
        return expr.name
    if isinstance(expr, FunctionCall):
        return f"{expr.name}({', '.join(render_expression(a) for a in expr.args)})"
    raise TypeError(f"unknown expression node: {expr!r}")
