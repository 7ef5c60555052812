"""Yul-to-Yul passes run before analysis: hook-to-opcode injection, library
link planning, and the optional legacy (unchecked arithmetic) rewrite.

All passes are pure: they return new trees and never mutate their input.
Hook matching is by substring on the mangled Yul function names because the
compiler mangles Solidity identifiers unpredictably across versions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .dialect import SIGNATURES
from .errors import HookArityError, LinkError
from .syntax.nodes import (
    Assignment,
    Block,
    Expression,
    ExpressionStatement,
    ForLoop,
    FunctionCall,
    FunctionDefinition,
    Identifier,
    If,
    Literal,
    Statement,
    Switch,
    SwitchCase,
    VariableDeclaration,
    YulObject,
)

HOOK_TABLE = {
    "__yult__assert": "ASSERT",
    "__yult__printHex": "PRINT_hex",
    "__yult__print_signed": "PRINT_signed",
    "__yult__print": "PRINT",
    "__yult__reveal_uint": "REVEAL_UINT",
    "__yult__reveal_addr": "REVEAL_ADDR",
    "__yult__ext_fund": "EXT_FUND",
    "__yult__impersonate_call": "IMPERSONATECALL",
}

# longest key first so __yult__print does not capture __yult__print_signed
_HOOKS_BY_LENGTH = sorted(HOOK_TABLE, key=len, reverse=True)

CHECKED_FAMILIES = {
    "checked_add_": "add",
    "checked_sub_": "sub",
    "checked_mul_": "mul",
    "checked_div_": "div",
    "checked_exp_": "exp",
}


@dataclass
class LinkPlan:
    """Library objects the engine must deploy before the top-level constructor."""

    entries: list[tuple[str, str]] = field(default_factory=list)  # (library_id, object name)


def _hook_opcode(callee: str) -> str | None:
    for key in _HOOKS_BY_LENGTH:
        if key in callee:
            return HOOK_TABLE[key]
    return None


# -- generic structural rewrite -------------------------------------------------


def _map_expression(expr: Expression, call_fn) -> Expression:
    if isinstance(expr, FunctionCall):
        args = tuple(_map_expression(a, call_fn) for a in expr.args)
        return call_fn(expr.name, args)
    return expr


def _map_statement(stmt: Statement, call_fn, def_fn) -> Statement:
    if isinstance(stmt, Block):
        return _map_block(stmt, call_fn, def_fn)
    if isinstance(stmt, VariableDeclaration):
        if stmt.value is None:
            return stmt
        return VariableDeclaration(stmt.names, _map_expression(stmt.value, call_fn))
    if isinstance(stmt, Assignment):
        return Assignment(stmt.names, _map_expression(stmt.value, call_fn))
    if isinstance(stmt, ExpressionStatement):
        return ExpressionStatement(_map_expression(stmt.expression, call_fn))
    if isinstance(stmt, If):
        return If(_map_expression(stmt.condition, call_fn), _map_block(stmt.body, call_fn, def_fn))
    if isinstance(stmt, Switch):
        return Switch(
            _map_expression(stmt.expression, call_fn),
            tuple(SwitchCase(c.value, _map_block(c.body, call_fn, def_fn)) for c in stmt.cases),
            None if stmt.default is None else _map_block(stmt.default, call_fn, def_fn),
        )
    if isinstance(stmt, ForLoop):
        return ForLoop(
            _map_block(stmt.init, call_fn, def_fn),
            _map_expression(stmt.condition, call_fn),
            _map_block(stmt.post, call_fn, def_fn),
            _map_block(stmt.body, call_fn, def_fn),
        )
    if isinstance(stmt, FunctionDefinition):
        rewritten = FunctionDefinition(
            stmt.name, stmt.parameters, stmt.returns, _map_block(stmt.body, call_fn, def_fn)
        )
        return def_fn(rewritten)
    return stmt  # break / continue / leave


def _map_block(block: Block, call_fn, def_fn) -> Block:
    return Block(tuple(_map_statement(s, call_fn, def_fn) for s in block.statements))


def _map_object(obj: YulObject, call_fn, def_fn) -> YulObject:
    return YulObject(
        name=obj.name,
        code=_map_block(obj.code, call_fn, def_fn),
        subobjects=[_map_object(sub, call_fn, def_fn) for sub in obj.subobjects],
        data_segments=list(obj.data_segments),
        object_id=obj.object_id,
    )


# -- pass 1: hook injection -------------------------------------------------------


def inject_hooks(root: YulObject) -> YulObject:
    """Rewrite every call to a hook into its custom opcode; the dead hook
    function definitions stay behind (harmless)."""

    def rewrite_call(name: str, args) -> FunctionCall:
        opcode = _hook_opcode(name)
        if opcode is None:
            return FunctionCall(name, args)
        expected = SIGNATURES[opcode][0]
        if len(args) != expected:
            raise HookArityError(
                f"hook call {name!r} has {len(args)} argument(s); "
                f"{opcode} requires {expected}"
            )
        return FunctionCall(opcode, args)

    return _map_object(root, rewrite_call, lambda fn: fn)


# -- pass 2: library link planning --------------------------------------------------


def _collect_linkersymbols(obj: YulObject) -> list[str]:
    found: list[str] = []

    def visit_call(name: str, args) -> FunctionCall:
        if name == "linkersymbol" and args and isinstance(args[0], Literal) and args[0].text is not None:
            if args[0].text not in found:
                found.append(args[0].text)
        return FunctionCall(name, args)

    _map_object(obj, visit_call, lambda fn: fn)
    return found


def link_libraries(root: YulObject) -> tuple[YulObject, LinkPlan]:
    """Produce the deployment plan for every linkersymbol in the tree.

    The library id's segment after the last ':' is matched against object
    names of the form `<Name>_<counter>` (the compiler's convention).  The
    tree itself is untouched; deployment is the engine's job.
    """
    plan = LinkPlan()
    names = {obj.name for obj in root.walk()}
    for library_id in _collect_linkersymbols(root):
        short = library_id.rsplit(":", 1)[-1]
        pattern = re.compile(rf"^{re.escape(short)}_\d+$")
        matches = [n for n in names if n == short or pattern.match(n)]
        if not matches:
            raise LinkError(f"no object in the tree implements library {library_id!r}")
        if len(matches) > 1:
            raise LinkError(
                f"library {library_id!r} matches several objects: {sorted(matches)}"
            )
        plan.entries.append((library_id, matches[0]))
    return root, plan


# -- pass 3: legacy mode (strip compiler overflow checks) -----------------------------


def _wrapping_opcode(fn_name: str) -> str | None:
    for prefix, opcode in CHECKED_FAMILIES.items():
        if fn_name.startswith(prefix):
            if opcode == "div" and "_t_int" in fn_name:
                return "sdiv"
            return opcode
    return None


def _zero_divisor_guard(fn: FunctionDefinition) -> If:
    """Keep the original `if iszero(y)` revert path when present (it carries
    the compiler's panic helper); otherwise synthesise a bare revert."""
    divisor = fn.parameters[1]
    for stmt in fn.body.statements:
        if (
            isinstance(stmt, If)
            and isinstance(stmt.condition, FunctionCall)
            and stmt.condition.name == "iszero"
            and len(stmt.condition.args) == 1
            and stmt.condition.args[0] == Identifier(divisor)
        ):
            return stmt
    revert = ExpressionStatement(FunctionCall("revert", (Literal(0), Literal(0))))
    return If(FunctionCall("iszero", (Identifier(divisor),)), Block((revert,)))


def strip_checked_arithmetic(root: YulObject) -> YulObject:
    """Replace checked_{add,sub,mul,div,exp}_* bodies with the wrapping
    opcode over their parameters; call sites and panic helpers are untouched."""

    def rewrite_def(fn: FunctionDefinition) -> FunctionDefinition:
        opcode = _wrapping_opcode(fn.name)
        if opcode is None or len(fn.parameters) != 2 or len(fn.returns) != 1:
            return fn
        operation = Assignment(
            (fn.returns[0],),
            FunctionCall(opcode, (Identifier(fn.parameters[0]), Identifier(fn.parameters[1]))),
        )
        if opcode in ("div", "sdiv"):
            body = Block((_zero_divisor_guard(fn), operation))
        else:
            body = Block((operation,))
        return FunctionDefinition(fn.name, fn.parameters, fn.returns, body)

    return _map_object(root, FunctionCall, rewrite_def)
