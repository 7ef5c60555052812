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
from .objects import ObjectTable, index_objects
from .parser import parse_object, string_literal_word
from .render import render, render_expression

__all__ = [
    "Assignment",
    "Block",
    "Break",
    "Continue",
    "Expression",
    "ExpressionStatement",
    "ForLoop",
    "FunctionCall",
    "FunctionDefinition",
    "Identifier",
    "If",
    "Leave",
    "Literal",
    "ObjectTable",
    "Statement",
    "Switch",
    "SwitchCase",
    "VariableDeclaration",
    "YulObject",
    "index_objects",
    "parse_object",
    "render",
    "render_expression",
    "string_literal_word",
]
