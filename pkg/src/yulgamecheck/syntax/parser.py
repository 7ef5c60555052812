"""Recursive-descent parser for Yul objects (Solidity compiler layout)."""

from __future__ import annotations

from ..errors import YulSyntaxError
from .lexer import Lexer, Token
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
    SwitchCase,
    VariableDeclaration,
    YulObject,
)

WORD_LIMIT = 1 << 256


def parse_object(text: str) -> YulObject:
    """Parse one top-level Yul object from source text."""
    return Parser(text).parse_top_level()


def string_literal_word(value: str, line: int = 0, col: int = 0) -> int:
    """Yul string literals are left-aligned into a 32-byte word."""
    raw = value.encode("utf-8", errors="surrogateescape")
    if len(raw) > 32:
        raise YulSyntaxError("string literal wider than 32 bytes", line, col)
    return int.from_bytes(raw.ljust(32, b"\0"), "big")


class Parser:
    def __init__(self, text: str):
        self.tokens = Lexer(text).tokens()
        self.pos = 0
        # (kind, ...) context stack validating break/continue/leave placement
        self.context: list[str] = []

    # -- token plumbing -----------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, message: str, tok: Token | None = None) -> YulSyntaxError:
        tok = tok or self.peek()
        return YulSyntaxError(message, tok.line, tok.column)

    def expect(self, kind: str, value: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (value is not None and tok.value != value):
            want = value or kind
            got = tok.value or tok.kind
            raise self.error(f"expected {want!r}, found {got!r}")
        return self.next()

    def at_punct(self, value: str) -> bool:
        tok = self.peek()
        return tok.kind == "punct" and tok.value == value

    def at_keyword(self, value: str) -> bool:
        tok = self.peek()
        return tok.kind == "keyword" and tok.value == value

    # -- objects ------------------------------------------------------------

    def parse_top_level(self) -> YulObject:
        obj = self.parse_one_object()
        self.expect("eof")
        return obj

    def parse_one_object(self) -> YulObject:
        self.expect("keyword", "object")
        name = self.expect("string").value
        self.expect("punct", "{")
        self.expect("keyword", "code")
        code = self.parse_block()
        subobjects = []
        data_segments = []
        while not self.at_punct("}"):
            if self.at_keyword("object"):
                subobjects.append(self.parse_one_object())
            elif self.at_keyword("data"):
                self.next()
                seg_name = self.expect("string").value
                payload = self.peek()
                if payload.kind == "hexstring":
                    self.next()
                    data_segments.append((seg_name, bytes.fromhex(payload.value)))
                elif payload.kind == "string":
                    self.next()
                    data_segments.append((seg_name, payload.value.encode("utf-8")))
                else:
                    raise self.error("expected string or hex string after data name")
            else:
                raise self.error("expected 'object', 'data' or '}'")
        self.expect("punct", "}")
        return YulObject(name=name, code=code, subobjects=subobjects, data_segments=data_segments)

    # -- statements ---------------------------------------------------------

    def parse_block(self) -> Block:
        self.expect("punct", "{")
        statements = []
        while not self.at_punct("}"):
            statements.append(self.parse_statement())
        self.expect("punct", "}")
        return Block(tuple(statements))

    def parse_statement(self) -> Statement:
        tok = self.peek()
        if tok.kind == "punct" and tok.value == "{":
            return self.parse_block()
        if tok.kind == "keyword":
            handler = {
                "let": self.parse_variable_declaration,
                "if": self.parse_if,
                "switch": self.parse_switch,
                "for": self.parse_for,
                "function": self.parse_function_definition,
            }.get(tok.value)
            if handler is not None:
                return handler()
            if tok.value == "break":
                if "loop-body" not in self.context:
                    raise self.error("'break' outside of a for-loop body")
                self.next()
                return Break()
            if tok.value == "continue":
                if "loop-body" not in self.context:
                    raise self.error("'continue' outside of a for-loop body")
                self.next()
                return Continue()
            if tok.value == "leave":
                if "function" not in self.context:
                    raise self.error("'leave' outside of a function body")
                self.next()
                return Leave()
            if tok.value in ("true", "false"):
                return self.parse_assign_or_expression()
            raise self.error(f"unexpected keyword {tok.value!r}")
        if tok.kind in ("ident", "number", "string"):
            return self.parse_assign_or_expression()
        raise self.error(f"unexpected token {tok.value or tok.kind!r}")

    def parse_variable_declaration(self) -> VariableDeclaration:
        self.expect("keyword", "let")
        names = self.parse_typed_name_list()
        value = None
        if self.at_punct(":="):
            self.next()
            value = self.parse_expression()
        return VariableDeclaration(names, value)

    def parse_assign_or_expression(self) -> Statement:
        tok = self.peek()
        expr = self.parse_expression()
        if self.at_punct(",") or self.at_punct(":="):
            names = [self._expr_as_target(expr, tok)]
            while self.at_punct(","):
                self.next()
                names.append(self.expect("ident").value)
            self.expect("punct", ":=")
            value = self.parse_expression()
            return Assignment(tuple(names), value)
        return ExpressionStatement(expr)

    def _expr_as_target(self, expr: Expression, tok: Token) -> str:
        if not isinstance(expr, Identifier):
            raise self.error("assignment target must be an identifier", tok)
        return expr.name

    def parse_if(self) -> If:
        self.expect("keyword", "if")
        condition = self.parse_expression()
        return If(condition, self.parse_block())

    def parse_switch(self) -> Switch:
        self.expect("keyword", "switch")
        expression = self.parse_expression()
        cases = []
        default = None
        seen = set()
        while self.at_keyword("case"):
            tok = self.next()
            literal = self.parse_literal()
            if literal.value in seen:
                raise self.error("duplicate switch case value", tok)
            seen.add(literal.value)
            cases.append(SwitchCase(literal, self.parse_block()))
        if self.at_keyword("default"):
            self.next()
            default = self.parse_block()
        if not cases and default is None:
            raise self.error("switch requires at least one case or a default")
        return Switch(expression, tuple(cases), default)

    def parse_for(self) -> ForLoop:
        self.expect("keyword", "for")
        self.context.append("loop-header")
        init = self.parse_block()
        condition = self.parse_expression()
        post_block = self.parse_block()
        self.context.pop()
        self.context.append("loop-body")
        body = self.parse_block()
        self.context.pop()
        return ForLoop(init, condition, post_block, body)

    def parse_function_definition(self) -> FunctionDefinition:
        self.expect("keyword", "function")
        name = self.expect("ident").value
        self.expect("punct", "(")
        parameters = ()
        if not self.at_punct(")"):
            parameters = self.parse_typed_name_list()
        self.expect("punct", ")")
        returns = ()
        if self.at_punct("->"):
            self.next()
            returns = self.parse_typed_name_list()
        # function bodies form a fresh context: no break/continue capture
        saved, self.context = self.context, ["function"]
        body = self.parse_block()
        self.context = saved
        return FunctionDefinition(name, parameters, returns, body)

    def parse_typed_name_list(self) -> tuple[str, ...]:
        names = [self._typed_name()]
        while self.at_punct(","):
            self.next()
            names.append(self._typed_name())
        return tuple(names)

    def _typed_name(self) -> str:
        name = self.expect("ident").value
        if self.at_punct(":"):  # EVM dialect has only u256; discard the type
            self.next()
            self.expect("ident")
        return name

    # -- expressions --------------------------------------------------------

    def parse_expression(self) -> Expression:
        tok = self.peek()
        if tok.kind == "ident":
            self.next()
            if self.at_punct("("):
                return self._finish_call(tok.value)
            return Identifier(tok.value)
        return self.parse_literal()

    def _finish_call(self, name: str) -> FunctionCall:
        self.expect("punct", "(")
        args = []
        if not self.at_punct(")"):
            args.append(self.parse_expression())
            while self.at_punct(","):
                self.next()
                args.append(self.parse_expression())
        self.expect("punct", ")")
        return FunctionCall(name, tuple(args))

    def parse_literal(self) -> Literal:
        tok = self.peek()
        if tok.kind == "number":
            self.next()
            value = int(tok.value, 16) if tok.value[:2].lower() == "0x" else int(tok.value)
            if value >= WORD_LIMIT:
                raise self.error("literal wider than 32 bytes", tok)
            literal = Literal(value)
        elif tok.kind == "string":
            self.next()
            literal = Literal(string_literal_word(tok.value, tok.line, tok.column), tok.value)
        elif tok.kind == "keyword" and tok.value in ("true", "false"):
            self.next()
            literal = Literal(1 if tok.value == "true" else 0)
        elif tok.kind == "hexstring":
            raise self.error("hex string literals are only allowed in data segments", tok)
        else:
            raise self.error(f"expected a literal, found {tok.value or tok.kind!r}")
        if self.at_punct(":"):  # typed literal, type discarded
            self.next()
            self.expect("ident")
        return literal
