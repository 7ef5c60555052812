"""Exception types shared across the checker."""


class InputError(Exception):
    """A problem with user-supplied files or flags (exit code 2)."""


class YulSyntaxError(InputError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class AbiError(InputError):
    """Malformed or unsupported ABI input."""


class LinkError(InputError):
    """A linkersymbol could not be resolved to an object in the tree."""


class HookArityError(InputError):
    """A hook call site does not match the arity of its custom opcode."""


class UnsupportedOpcodeError(InputError):
    """The program uses an opcode outside the supported EVM dialect."""


class EvalFault(Exception):
    """Internal interpreter inconsistency (bad scoping, arity, unknown name).

    Indicates malformed Yul that slipped past the parser, or a checker bug;
    surfaced to the user as an input error.
    """
