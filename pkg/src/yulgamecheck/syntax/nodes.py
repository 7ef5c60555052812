"""AST node types for EVM-dialect Yul.

Nodes are frozen dataclasses so parsed trees can be shared freely between
game branches; statement lists are stored as tuples for the same reason.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True)
class Literal:
    """A literal normalised to its 256-bit word value.

    ``text`` keeps the original string for string literals; object opcodes
    (datasize, dataoffset, linkersymbol, ...) need the name, not the word.
    """

    value: int
    text: Optional[str] = None


@dataclass(frozen=True)
class Identifier:
    name: str


@dataclass(frozen=True)
class FunctionCall:
    name: str
    args: tuple["Expression", ...]


Expression = Union[Literal, Identifier, FunctionCall]


@dataclass(frozen=True)
class Block:
    statements: tuple["Statement", ...]


@dataclass(frozen=True)
class VariableDeclaration:
    names: tuple[str, ...]
    value: Optional[Expression]  # None binds zeroes


@dataclass(frozen=True)
class Assignment:
    names: tuple[str, ...]
    value: Expression


@dataclass(frozen=True)
class ExpressionStatement:
    expression: Expression


@dataclass(frozen=True)
class If:
    condition: Expression
    body: Block


@dataclass(frozen=True)
class SwitchCase:
    value: Literal
    body: Block


@dataclass(frozen=True)
class Switch:
    expression: Expression
    cases: tuple[SwitchCase, ...]
    default: Optional[Block]


@dataclass(frozen=True)
class ForLoop:
    init: Block
    condition: Expression
    post: Block
    body: Block


@dataclass(frozen=True)
class FunctionDefinition:
    name: str
    parameters: tuple[str, ...]
    returns: tuple[str, ...]
    body: Block


@dataclass(frozen=True)
class Break:
    pass


@dataclass(frozen=True)
class Continue:
    pass


@dataclass(frozen=True)
class Leave:
    pass


Statement = Union[
    Block,
    VariableDeclaration,
    Assignment,
    ExpressionStatement,
    If,
    Switch,
    ForLoop,
    FunctionDefinition,
    Break,
    Continue,
    Leave,
]


@dataclass
class YulObject:
    """A named, ID-bearing tree of code blocks and nested objects.

    ``object_id`` is 0 until the tree is indexed (see objects.index_objects).
    """

    name: str
    code: Block
    subobjects: list["YulObject"] = field(default_factory=list)
    data_segments: list[tuple[str, bytes]] = field(default_factory=list)
    object_id: int = 0

    def walk(self):
        """Yield this object and all descendants, preorder."""
        yield self
        for sub in self.subobjects:
            yield from sub.walk()

    def structurally_equal(self, other: "YulObject") -> bool:
        """Tree equality ignoring assigned IDs."""
        return (
            self.name == other.name
            and self.code == other.code
            and self.data_segments == other.data_segments
            and len(self.subobjects) == len(other.subobjects)
            and all(
                a.structurally_equal(b)
                for a, b in zip(self.subobjects, other.subobjects)
            )
        )
