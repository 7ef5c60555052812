"""Tokenizer for Yul source text.

Comments (`//`, `/* */`, doc comments carrying `@use-src`) are discarded.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import YulSyntaxError

KEYWORDS = {
    "object",
    "code",
    "data",
    "function",
    "let",
    "if",
    "switch",
    "case",
    "default",
    "for",
    "break",
    "continue",
    "leave",
    "true",
    "false",
}

PUNCT = {"{", "}", "(", ")", ",", ":=", "->", ":"}

_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_$")
_IDENT_CONT = _IDENT_START | set("0123456789.")

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "\\": "\\", '"': '"', "'": "'"}


@dataclass(frozen=True)
class Token:
    kind: str  # ident | keyword | number | string | hexstring | punct | eof
    value: str
    line: int
    column: int


class Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def error(self, message: str) -> YulSyntaxError:
        return YulSyntaxError(message, self.line, self.col)

    def _advance(self, n: int = 1):
        for _ in range(n):
            if self.pos < len(self.text) and self.text[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def _skip_trivia(self):
        text = self.text
        while self.pos < len(text):
            c = text[self.pos]
            if c in " \t\r\n":
                self._advance()
            elif text.startswith("//", self.pos):
                while self.pos < len(text) and text[self.pos] != "\n":
                    self._advance()
            elif text.startswith("/*", self.pos):
                start_line, start_col = self.line, self.col
                self._advance(2)
                while not text.startswith("*/", self.pos):
                    if self.pos >= len(text):
                        raise YulSyntaxError(
                            "unterminated block comment", start_line, start_col
                        )
                    self._advance()
                self._advance(2)
            else:
                return

    def _lex_string(self) -> str:
        quote = self.text[self.pos]
        self._advance()
        out = []
        while True:
            if self.pos >= len(self.text):
                raise self.error("unterminated string literal")
            c = self.text[self.pos]
            if c == quote:
                self._advance()
                return "".join(out)
            if c == "\n":
                raise self.error("newline in string literal")
            if c == "\\":
                self._advance()
                if self.pos >= len(self.text):
                    raise self.error("unterminated escape sequence")
                e = self.text[self.pos]
                if e in _ESCAPES:
                    out.append(_ESCAPES[e])
                    self._advance()
                elif e == "x":
                    self._advance()
                    hexed = self.text[self.pos : self.pos + 2]
                    if len(hexed) < 2 or any(h not in "0123456789abcdefABCDEF" for h in hexed):
                        raise self.error("bad \\x escape")
                    out.append(chr(int(hexed, 16)))
                    self._advance(2)
                else:
                    raise self.error(f"unknown escape '\\{e}'")
            else:
                out.append(c)
                self._advance()

    def tokens(self) -> list[Token]:
        out = []
        text = self.text
        while True:
            self._skip_trivia()
            line, col = self.line, self.col
            if self.pos >= len(text):
                out.append(Token("eof", "", line, col))
                return out
            c = text[self.pos]
            if text.startswith("hex\"", self.pos) or text.startswith("hex'", self.pos):
                self._advance(3)
                raw = self._lex_string()
                compact = raw.replace("_", "")
                if len(compact) % 2 != 0 or any(
                    h not in "0123456789abcdefABCDEF" for h in compact
                ):
                    raise YulSyntaxError("malformed hex string", line, col)
                out.append(Token("hexstring", compact.lower(), line, col))
            elif c in _IDENT_START:
                start = self.pos
                while self.pos < len(text) and text[self.pos] in _IDENT_CONT:
                    self._advance()
                word = text[start : self.pos]
                kind = "keyword" if word in KEYWORDS else "ident"
                out.append(Token(kind, word, line, col))
            elif c.isdigit():
                start = self.pos
                if text.startswith("0x", self.pos) or text.startswith("0X", self.pos):
                    self._advance(2)
                    while self.pos < len(text) and text[self.pos] in "0123456789abcdefABCDEF":
                        self._advance()
                    if self.pos == start + 2:
                        raise YulSyntaxError("malformed hex number", line, col)
                else:
                    while self.pos < len(text) and text[self.pos].isdigit():
                        self._advance()
                out.append(Token("number", text[start : self.pos], line, col))
            elif c in "\"'":
                value = self._lex_string()
                out.append(Token("string", value, line, col))
            elif text.startswith(":=", self.pos):
                self._advance(2)
                out.append(Token("punct", ":=", line, col))
            elif text.startswith("->", self.pos):
                self._advance(2)
                out.append(Token("punct", "->", line, col))
            elif c in "{}(),:":
                self._advance()
                out.append(Token("punct", c, line, col))
            else:
                raise YulSyntaxError(f"unexpected character {c!r}", line, col)
