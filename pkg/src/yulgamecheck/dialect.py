"""Semantics of the EVM-dialect builtins, the Yul object opcodes and the
custom analysis opcodes, with precise gas charging.

``exec_opcode`` never mutates the world on a Stuck outcome (control-passing
opcodes only describe the pending call/create); the game engine applies all
cross-frame effects when it turns the event into a move.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from . import gas
from .errors import EvalFault, UnsupportedOpcodeError
from .state import Memory, MemoryBudgetExceeded, WorldState
from .words import (
    WORD_MASK,
    from_signed,
    to_address,
    to_signed,
    word_bytes,
    wrap,
)


@dataclass
class CallContext:
    self_address: int
    caller: int
    origin: int
    callvalue: int
    calldata: bytes
    gas_remaining: int
    code_object: int
    code_address: int
    memory: Memory
    returndata: bytes = b""
    is_static: bool = False
    is_constructor: bool = False

    def copy(self) -> "CallContext":
        dup = CallContext(
            self_address=self.self_address,
            caller=self.caller,
            origin=self.origin,
            callvalue=self.callvalue,
            calldata=self.calldata,
            gas_remaining=self.gas_remaining,
            code_object=self.code_object,
            code_address=self.code_address,
            memory=self.memory.copy(),
            returndata=self.returndata,
            is_static=self.is_static,
            is_constructor=self.is_constructor,
        )
        return dup


@dataclass(frozen=True)
class StrArg:
    """A string-literal argument: carries both the name and its word value."""

    text: str
    value: int


Arg = Union[int, StrArg]


def as_word(arg: Arg) -> int:
    return arg.value if isinstance(arg, StrArg) else arg


def as_name(arg: Arg, op: str) -> str:
    if not isinstance(arg, StrArg):
        raise EvalFault(f"{op} requires a literal string argument")
    return arg.text


# -- control events (Stuck payloads) -----------------------------------------


@dataclass
class CallEvent:
    kind: str  # call | staticcall | delegatecall | impersonate
    target: int
    value: int
    input_data: bytes
    out_offset: int
    out_size: int
    child_gas: int  # forwarded to the callee (includes any stipend)
    charged_gas: int  # what the caller paid for the forwarded portion
    sender: Optional[int] = None  # impersonate only


@dataclass
class CreateEvent:
    kind: str  # create | create2
    value: int
    init_data: bytes
    salt: Optional[int] = None
    child_gas: int = 0


@dataclass
class RevealEvent:
    kind: str  # uint | addr
    value: int


@dataclass
class AssertEvent:
    pass


ControlEvent = Union[CallEvent, CreateEvent, RevealEvent, AssertEvent]


# -- outcomes -----------------------------------------------------------------

STOP = "stop"
RETURN = "return"
REVERT = "revert"
OUT_OF_GAS = "out-of-gas"


@dataclass
class Values:
    values: list[int]


@dataclass
class Stuck:
    event: ControlEvent


@dataclass
class Halt:
    kind: str
    data: bytes = b""
    reason: str = ""


OpOutcome = Union[Values, Stuck, Halt]


# (arity, result count) per opcode
SIGNATURES: dict[str, tuple[int, int]] = {
    "add": (2, 1), "sub": (2, 1), "mul": (2, 1), "div": (2, 1), "sdiv": (2, 1),
    "mod": (2, 1), "smod": (2, 1), "addmod": (3, 1), "mulmod": (3, 1),
    "exp": (2, 1), "signextend": (2, 1),
    "lt": (2, 1), "gt": (2, 1), "slt": (2, 1), "sgt": (2, 1), "eq": (2, 1),
    "iszero": (1, 1),
    "and": (2, 1), "or": (2, 1), "xor": (2, 1), "not": (1, 1),
    "byte": (2, 1), "shl": (2, 1), "shr": (2, 1), "sar": (2, 1),
    "keccak256": (2, 1),
    "mload": (1, 1), "mstore": (2, 0), "mstore8": (2, 0), "msize": (0, 1),
    "sload": (1, 1), "sstore": (2, 0),
    "caller": (0, 1), "callvalue": (0, 1), "calldataload": (1, 1),
    "calldatasize": (0, 1), "calldatacopy": (3, 0),
    "returndatasize": (0, 1), "returndatacopy": (3, 0),
    "address": (0, 1), "balance": (1, 1), "selfbalance": (0, 1),
    "origin": (0, 1), "gas": (0, 1), "gasprice": (0, 1),
    "extcodesize": (1, 1), "extcodehash": (1, 1),
    "timestamp": (0, 1), "number": (0, 1), "chainid": (0, 1),
    "coinbase": (0, 1), "basefee": (0, 1), "gaslimit": (0, 1),
    "prevrandao": (0, 1), "difficulty": (0, 1), "blockhash": (1, 1),
    "stop": (0, 0), "return": (2, 0), "revert": (2, 0), "pop": (1, 0),
    "log0": (2, 0), "log1": (3, 0), "log2": (4, 0), "log3": (5, 0), "log4": (6, 0),
    "call": (7, 1), "staticcall": (6, 1), "delegatecall": (6, 1),
    "create": (3, 1), "create2": (4, 1),
    "datasize": (1, 1), "dataoffset": (1, 1), "datacopy": (3, 0),
    "codecopy": (3, 0), "codesize": (0, 1),
    "setimmutable": (3, 0), "loadimmutable": (1, 1),
    "linkersymbol": (1, 1), "memoryguard": (1, 1),
    "ASSERT": (1, 0), "REVEAL_UINT": (1, 0), "REVEAL_ADDR": (1, 0),
    "EXT_FUND": (2, 0),
    "PRINT": (1, 0), "PRINT_signed": (1, 0), "PRINT_hex": (1, 0),
    "IMPERSONATECALL": (8, 1),
}

UNSUPPORTED = {
    "invalid": "'invalid' is not part of the supported dialect",
    "selfdestruct": "'selfdestruct' is omitted from the supported dialect",
    "extcodecopy": "'extcodecopy' has no meaning without bytecode",
    "tload": "transient storage is not implemented",
    "tstore": "transient storage is not implemented",
    "mcopy": "'mcopy' (Cancun) is not implemented",
    "pc": "'pc' is not available in Yul",
}

STATIC_FORBIDDEN = {"sstore", "log0", "log1", "log2", "log3", "log4",
                    "create", "create2", "EXT_FUND", "setimmutable"}

# value results are wrapped to 256 bits centrally
_PURE = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: 0 if b == 0 else a // b,
    "mod": lambda a, b: 0 if b == 0 else a % b,
    "addmod": lambda a, b, n: 0 if n == 0 else (a + b) % n,
    "mulmod": lambda a, b, n: 0 if n == 0 else (a * b) % n,
    "exp": lambda a, b: pow(a, b, 1 << 256),
    "lt": lambda a, b: int(a < b),
    "gt": lambda a, b: int(a > b),
    "slt": lambda a, b: int(to_signed(a) < to_signed(b)),
    "sgt": lambda a, b: int(to_signed(a) > to_signed(b)),
    "eq": lambda a, b: int(a == b),
    "iszero": lambda a: int(a == 0),
    "and": lambda a, b: a & b,
    "or": lambda a, b: a | b,
    "xor": lambda a, b: a ^ b,
    "not": lambda a: ~a,
    "byte": lambda i, x: 0 if i >= 32 else (x >> (8 * (31 - i))) & 0xFF,
    "shl": lambda s, v: 0 if s >= 256 else v << s,
    "shr": lambda s, v: 0 if s >= 256 else v >> s,
}


def sdiv(a: int, b: int) -> int:
    sa, sb = to_signed(a), to_signed(b)
    if sb == 0:
        return 0
    q = abs(sa) // abs(sb)
    return from_signed(-q if (sa < 0) != (sb < 0) else q)


def smod(a: int, b: int) -> int:
    sa, sb = to_signed(a), to_signed(b)
    if sb == 0:
        return 0
    r = abs(sa) % abs(sb)
    return from_signed(-r if sa < 0 else r)


def signextend(b: int, x: int) -> int:
    if b > 31:
        return x
    sign_bit = 1 << (8 * b + 7)
    mask = (sign_bit << 1) - 1
    return (x | ~mask) & WORD_MASK if x & sign_bit else x & mask


def sar(shift: int, v: int) -> int:
    s = to_signed(v)
    if shift >= 256:
        return 0 if s >= 0 else WORD_MASK
    return from_signed(s >> shift)


_PURE["sdiv"] = sdiv
_PURE["smod"] = smod
_PURE["signextend"] = signextend
_PURE["sar"] = sar


def charge_gas(ctx: CallContext, amount: int, touches=()) -> bool:
    """Deduct ``amount`` plus memory expansion; on shortfall gas drops to 0.

    Expansion is recorded on the memory only when the charge succeeds.
    """
    try:
        cost = amount + gas.expansion_cost(ctx.memory, touches)
    except MemoryBudgetExceeded:
        ctx.gas_remaining = 0
        return False
    if ctx.gas_remaining < cost:
        ctx.gas_remaining = 0
        return False
    ctx.gas_remaining -= cost
    try:
        for offset, size in touches:
            ctx.memory.expand(offset, size)
    except MemoryBudgetExceeded:
        ctx.gas_remaining = 0
        return False
    return True


def opcode_gas(name: str, args: list[int]) -> int:
    """Base plus data-dependent cost for the generic (non-call) opcodes."""
    cost = gas.BASE_COST[name]
    if name == "exp":
        cost += gas.exp_dynamic_cost(args[1])
    elif name == "keccak256":
        cost += gas.keccak_dynamic_cost(args[1])
    elif name in ("calldatacopy", "returndatacopy", "codecopy", "datacopy"):
        cost += gas.copy_dynamic_cost(args[2])
    elif name.startswith("log"):
        cost += gas.log_dynamic_cost(int(name[3]), args[1])
    return cost


def _memory_touches(name: str, args: list[int]):
    if name == "mload":
        return ((args[0], 32),)
    if name == "mstore":
        return ((args[0], 32),)
    if name == "mstore8":
        return ((args[0], 1),)
    if name == "keccak256" or name in ("return", "revert") or name.startswith("log"):
        return ((args[0], args[1]),)
    if name in ("calldatacopy", "returndatacopy", "codecopy", "datacopy"):
        return ((args[0], args[2]),)
    return ()


def _oog(ctx: CallContext, reason: str = "out of gas") -> Halt:
    ctx.gas_remaining = 0
    return Halt(OUT_OF_GAS, reason=reason)


def _calldata_slice(data: bytes, offset: int, size: int) -> bytes:
    if size == 0:
        return b""
    if offset >= len(data):
        return b"\0" * size
    chunk = data[offset : offset + size]
    return chunk + b"\0" * (size - len(chunk))


def _effective_code(ctx: CallContext) -> bytes:
    """Model code layout: the 32-byte object ID, with constructor arguments
    appended in constructor frames (mirrors how solc reads them)."""
    code = word_bytes(ctx.code_object)
    if ctx.is_constructor:
        code += ctx.calldata
    return code


def _emit(world: WorldState, line: str) -> None:
    sink = world.print_sink
    if sink is None:
        print(line, flush=True)
    else:
        sink(line)


def exec_opcode(name: str, args: list[Arg], ctx: CallContext, world: WorldState) -> OpOutcome:
    """Execute one builtin; charges gas first (pre-charged Halt on shortfall)."""
    if name in UNSUPPORTED:
        raise UnsupportedOpcodeError(UNSUPPORTED[name])
    signature = SIGNATURES.get(name)
    if signature is None:
        raise EvalFault(f"unknown opcode {name!r}")
    if len(args) != signature[0]:
        raise EvalFault(
            f"{name} expects {signature[0]} argument(s), got {len(args)}"
        )
    if ctx.is_static and name in STATIC_FORBIDDEN:
        return _oog(ctx, f"{name} inside a static call context")

    if name in ("call", "staticcall", "delegatecall", "IMPERSONATECALL"):
        return _exec_call(name, args, ctx, world)
    if name in ("create", "create2"):
        return _exec_create(name, args, ctx, world)

    words = [as_word(a) for a in args]
    if not charge_gas(ctx, opcode_gas(name, words), _memory_touches(name, words)):
        return _oog(ctx)

    pure = _PURE.get(name)
    if pure is not None:
        return Values([wrap(pure(*words))])

    handler = _STATEFUL[name]
    return handler(args, words, ctx, world)


# -- stateful / environment handlers ------------------------------------------


def _op_keccak256(args, words, ctx, world):
    payload = ctx.memory.read(words[0], words[1])
    return Values([world.oracle.digest(payload)])


def _op_mload(args, words, ctx, world):
    return Values([ctx.memory.read_word(words[0])])


def _op_mstore(args, words, ctx, world):
    ctx.memory.write_word(words[0], words[1])
    return Values([])


def _op_mstore8(args, words, ctx, world):
    ctx.memory.write_byte(words[0], words[1])
    return Values([])


def _op_msize(args, words, ctx, world):
    return Values([ctx.memory.size])


def _op_sload(args, words, ctx, world):
    acct = world.peek_account(ctx.self_address)
    return Values([acct.storage.get(words[0], 0) if acct else 0])


def _op_sstore(args, words, ctx, world):
    key, value = words
    acct = world.account(ctx.self_address)
    current = acct.storage.get(key, 0)
    if not charge_gas(ctx, gas.sstore_cost(current, value)):
        return _oog(ctx)
    if value == 0:
        acct.storage.pop(key, None)
    else:
        acct.storage[key] = value
    return Values([])


def _op_calldataload(args, words, ctx, world):
    return Values([int.from_bytes(_calldata_slice(ctx.calldata, words[0], 32), "big")])


def _op_calldatacopy(args, words, ctx, world):
    ctx.memory.write(words[0], _calldata_slice(ctx.calldata, words[1], words[2]))
    return Values([])


def _op_returndatacopy(args, words, ctx, world):
    dst, src, size = words
    if src + size > len(ctx.returndata):
        return _oog(ctx, "returndatacopy out of bounds")
    ctx.memory.write(dst, ctx.returndata[src : src + size])
    return Values([])


def _op_codecopy(args, words, ctx, world):
    dst, src, size = words
    table = world.objects
    referenced = table.object_for_id(src) if table else None
    if referenced is not None:
        payload = _calldata_slice(word_bytes(referenced.object_id), 0, size)
    else:
        data = table.data_for_id(src) if table else None
        if data is not None:
            payload = _calldata_slice(data, 0, size)
        else:
            payload = _calldata_slice(_effective_code(ctx), src, size)
    ctx.memory.write(dst, payload)
    return Values([])


def _op_codesize(args, words, ctx, world):
    return Values([len(_effective_code(ctx))])


def _op_datasize(args, words, ctx, world):
    name = as_name(args[0], "datasize")
    table = world.objects
    if name in table.by_name:
        return Values([32])
    owner = table.object_for_id(ctx.code_object)
    resolved = table.resolve_data_name(owner, name) if owner else None
    if resolved is None:
        raise EvalFault(f"datasize: unknown object or data segment {name!r}")
    return Values([resolved[1]])


def _op_dataoffset(args, words, ctx, world):
    name = as_name(args[0], "dataoffset")
    table = world.objects
    obj = table.by_name.get(name)
    if obj is not None:
        return Values([obj.object_id])
    owner = table.object_for_id(ctx.code_object)
    resolved = table.resolve_data_name(owner, name) if owner else None
    if resolved is None:
        raise EvalFault(f"dataoffset: unknown object or data segment {name!r}")
    return Values([resolved[0]])


def _op_linkersymbol(args, words, ctx, world):
    library_id = as_name(args[0], "linkersymbol")
    address = world.link_table.get(library_id)
    if address is None:
        raise EvalFault(f"unresolved linkersymbol {library_id!r}")
    return Values([address])


def _op_setimmutable(args, words, ctx, world):
    name = as_name(args[1], "setimmutable")
    world.account(ctx.self_address).immutables[name] = words[2]
    return Values([])


def _op_loadimmutable(args, words, ctx, world):
    name = as_name(args[0], "loadimmutable")
    acct = world.peek_account(ctx.code_address)
    if acct is None or name not in acct.immutables:
        raise EvalFault(f"loadimmutable: {name!r} was never set on the code owner")
    return Values([acct.immutables[name]])


def _op_balance(args, words, ctx, world):
    return Values([world.balance(words[0])])


def _op_extcodesize(args, words, ctx, world):
    address = to_address(words[0])
    acct = world.peek_account(address)
    if acct is not None and acct.code is not None:
        return Values([1])
    # Opponent addresses must look like contracts (isContract guards)
    return Values([1 if world.addresses.is_opponent(address) else 0])


def _op_extcodehash(args, words, ctx, world):
    acct = world.peek_account(words[0])
    if acct is None or acct.code is None:
        return Values([0])
    return Values([world.oracle.digest(word_bytes(acct.code))])


def _op_ext_fund(args, words, ctx, world):
    world.account(words[0]).balance += words[1]
    return Values([])


def _op_assert(args, words, ctx, world):
    return Stuck(AssertEvent()) if words[0] == 0 else Values([])


def _op_reveal_uint(args, words, ctx, world):
    return Stuck(RevealEvent("uint", words[0]))


def _op_reveal_addr(args, words, ctx, world):
    return Stuck(RevealEvent("addr", to_address(words[0])))


def _op_print(args, words, ctx, world):
    _emit(world, str(words[0]))
    return Values([])


def _op_print_signed(args, words, ctx, world):
    _emit(world, str(to_signed(words[0])))
    return Values([])


def _op_print_hex(args, words, ctx, world):
    _emit(world, hex(words[0]))
    return Values([])


def _op_return(args, words, ctx, world):
    return Halt(RETURN, ctx.memory.read(words[0], words[1]))


def _op_revert(args, words, ctx, world):
    return Halt(REVERT, ctx.memory.read(words[0], words[1]))


_STATEFUL = {
    "keccak256": _op_keccak256,
    "mload": _op_mload,
    "mstore": _op_mstore,
    "mstore8": _op_mstore8,
    "msize": _op_msize,
    "sload": _op_sload,
    "sstore": _op_sstore,
    "caller": lambda a, w, ctx, world: Values([ctx.caller]),
    "callvalue": lambda a, w, ctx, world: Values([ctx.callvalue]),
    "calldataload": _op_calldataload,
    "calldatasize": lambda a, w, ctx, world: Values([len(ctx.calldata)]),
    "calldatacopy": _op_calldatacopy,
    "returndatasize": lambda a, w, ctx, world: Values([len(ctx.returndata)]),
    "returndatacopy": _op_returndatacopy,
    "address": lambda a, w, ctx, world: Values([ctx.self_address]),
    "balance": _op_balance,
    "selfbalance": lambda a, w, ctx, world: Values([world.balance(ctx.self_address)]),
    "origin": lambda a, w, ctx, world: Values([ctx.origin]),
    "gas": lambda a, w, ctx, world: Values([ctx.gas_remaining]),
    "gasprice": lambda a, w, ctx, world: Values([0]),
    "extcodesize": _op_extcodesize,
    "extcodehash": _op_extcodehash,
    "timestamp": lambda a, w, ctx, world: Values([world.time]),
    "number": lambda a, w, ctx, world: Values([1]),
    "chainid": lambda a, w, ctx, world: Values([1]),
    "coinbase": lambda a, w, ctx, world: Values([0]),
    "basefee": lambda a, w, ctx, world: Values([0]),
    "gaslimit": lambda a, w, ctx, world: Values([0]),
    "prevrandao": lambda a, w, ctx, world: Values([0]),
    "difficulty": lambda a, w, ctx, world: Values([0]),
    "blockhash": lambda a, w, ctx, world: Values([0]),
    "stop": lambda a, w, ctx, world: Halt(STOP),
    "return": _op_return,
    "revert": _op_revert,
    "pop": lambda a, w, ctx, world: Values([]),
    "log0": lambda a, w, ctx, world: Values([]),
    "log1": lambda a, w, ctx, world: Values([]),
    "log2": lambda a, w, ctx, world: Values([]),
    "log3": lambda a, w, ctx, world: Values([]),
    "log4": lambda a, w, ctx, world: Values([]),
    "datasize": _op_datasize,
    "dataoffset": _op_dataoffset,
    "datacopy": _op_codecopy,
    "codecopy": _op_codecopy,
    "codesize": _op_codesize,
    "setimmutable": _op_setimmutable,
    "loadimmutable": _op_loadimmutable,
    "linkersymbol": _op_linkersymbol,
    "memoryguard": lambda a, w, ctx, world: Values([w[0]]),
    "ASSERT": _op_assert,
    "REVEAL_UINT": _op_reveal_uint,
    "REVEAL_ADDR": _op_reveal_addr,
    "EXT_FUND": _op_ext_fund,
    "PRINT": _op_print,
    "PRINT_signed": _op_print_signed,
    "PRINT_hex": _op_print_hex,
}


# -- call / create ------------------------------------------------------------


def _exec_call(name: str, args: list[Arg], ctx: CallContext, world: WorldState) -> OpOutcome:
    words = [as_word(a) for a in args]
    if name == "call":
        gas_req, target, value, in_off, in_size, out_off, out_size = words
        kind, sender = "call", None
    elif name == "staticcall":
        gas_req, target, in_off, in_size, out_off, out_size = words
        value, kind, sender = 0, "staticcall", None
    elif name == "delegatecall":
        gas_req, target, in_off, in_size, out_off, out_size = words
        value, kind, sender = 0, "delegatecall", None
    else:  # IMPERSONATECALL: call plus trailing msg.sender override
        gas_req, target, value, in_off, in_size, out_off, out_size, sender = words
        kind = "impersonate"
        sender = to_address(sender)

    if ctx.is_static and value > 0:
        return _oog(ctx, "value transfer inside a static call context")

    target = to_address(target)
    extra = gas.BASE_COST["call"]
    if value > 0:
        extra += gas.GAS_CALL_VALUE
        acct = world.peek_account(target)
        if kind in ("call", "impersonate") and (acct is None or acct.is_empty()):
            extra += gas.GAS_NEW_ACCOUNT

    touches = ((in_off, in_size), (out_off, out_size))
    try:
        expansion = gas.expansion_cost(ctx.memory, touches)
    except MemoryBudgetExceeded:
        return _oog(ctx, "memory limit")
    if ctx.gas_remaining < extra + expansion:
        return _oog(ctx)
    available = ctx.gas_remaining - extra - expansion
    cap = min(gas_req, available - available // 64)
    if not charge_gas(ctx, extra + cap, touches):
        return _oog(ctx)

    child_gas = cap + (gas.GAS_CALL_STIPEND if value > 0 else 0)
    input_data = ctx.memory.read(in_off, in_size)
    return Stuck(
        CallEvent(kind, target, value, input_data, out_off, out_size, child_gas, cap, sender)
    )


def _exec_create(name: str, args: list[Arg], ctx: CallContext, world: WorldState) -> OpOutcome:
    words = [as_word(a) for a in args]
    if name == "create":
        value, offset, size = words
        salt = None
    else:
        value, offset, size, salt = words

    cost = gas.GAS_CREATE + gas.init_code_cost(size)
    if name == "create2":
        cost += gas.keccak_dynamic_cost(size)
    touches = ((offset, size),)
    try:
        expansion = gas.expansion_cost(ctx.memory, touches)
    except MemoryBudgetExceeded:
        return _oog(ctx, "memory limit")
    if ctx.gas_remaining < cost + expansion:
        return _oog(ctx)
    available = ctx.gas_remaining - cost - expansion
    forwarded = available - available // 64
    if not charge_gas(ctx, cost + forwarded, touches):
        return _oog(ctx)

    init_data = ctx.memory.read(offset, size)
    return Stuck(
        CreateEvent("create" if salt is None else "create2", value, init_data, salt, forwarded)
    )
