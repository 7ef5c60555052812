"""Per-opcode gas charging, Shanghai-era constants.

Structured Yul control flow has no JUMP/PUSH traffic and account accesses
are charged at the warm rate (no access lists), so totals under-approximate
mainnet costs.  Charges never increase gas; memory expansion follows the
quadratic schedule over the new high-water mark.
"""

from __future__ import annotations

GAS_ZERO = 0
GAS_BASE = 2
GAS_VERY_LOW = 3
GAS_LOW = 5
GAS_MID = 8
GAS_HIGH = 10
GAS_EXPONENTIATION = 10
GAS_EXPONENTIATION_PER_BYTE = 50
GAS_KECCAK256 = 30
GAS_KECCAK256_WORD = 6
GAS_COPY_PER_WORD = 3
GAS_BLOCK_HASH = 20
GAS_WARM_ACCESS = 100
GAS_STORAGE_SET = 20000
GAS_STORAGE_UPDATE = 2900  # 5000 minus the cold-sload component
GAS_LOG = 375
GAS_LOG_TOPIC = 375
GAS_LOG_DATA = 8
GAS_CREATE = 32000
GAS_INIT_CODE_WORD = 2
GAS_CALL_VALUE = 9000
GAS_NEW_ACCOUNT = 25000
GAS_CALL_STIPEND = 2300
GAS_SELF_BALANCE = 5

BASE_COST = {
    # arithmetic
    "add": GAS_VERY_LOW,
    "sub": GAS_VERY_LOW,
    "mul": GAS_LOW,
    "div": GAS_LOW,
    "sdiv": GAS_LOW,
    "mod": GAS_LOW,
    "smod": GAS_LOW,
    "addmod": GAS_MID,
    "mulmod": GAS_MID,
    "exp": GAS_EXPONENTIATION,  # plus per-byte cost
    "signextend": GAS_LOW,
    # comparison
    "lt": GAS_VERY_LOW,
    "gt": GAS_VERY_LOW,
    "slt": GAS_VERY_LOW,
    "sgt": GAS_VERY_LOW,
    "eq": GAS_VERY_LOW,
    "iszero": GAS_VERY_LOW,
    # bitwise
    "and": GAS_VERY_LOW,
    "or": GAS_VERY_LOW,
    "xor": GAS_VERY_LOW,
    "not": GAS_VERY_LOW,
    "byte": GAS_VERY_LOW,
    "shl": GAS_VERY_LOW,
    "shr": GAS_VERY_LOW,
    "sar": GAS_VERY_LOW,
    # keccak (plus word + expansion costs)
    "keccak256": GAS_KECCAK256,
    # memory (plus expansion)
    "mload": GAS_VERY_LOW,
    "mstore": GAS_VERY_LOW,
    "mstore8": GAS_VERY_LOW,
    "msize": GAS_BASE,
    # storage (sstore cost is entirely value-dependent, see sstore_cost)
    "sload": GAS_WARM_ACCESS,
    "sstore": 0,
    # message environment
    "caller": GAS_BASE,
    "callvalue": GAS_BASE,
    "calldataload": GAS_VERY_LOW,
    "calldatasize": GAS_BASE,
    "calldatacopy": GAS_VERY_LOW,
    "returndatasize": GAS_BASE,
    "returndatacopy": GAS_VERY_LOW,
    "address": GAS_BASE,
    "balance": GAS_WARM_ACCESS,
    "selfbalance": GAS_SELF_BALANCE,
    "origin": GAS_BASE,
    "gas": GAS_BASE,
    "gasprice": GAS_BASE,
    "extcodesize": GAS_WARM_ACCESS,
    "extcodehash": GAS_WARM_ACCESS,
    # block
    "timestamp": GAS_BASE,
    "number": GAS_BASE,
    "chainid": GAS_BASE,
    "coinbase": GAS_BASE,
    "basefee": GAS_BASE,
    "gaslimit": GAS_BASE,
    "prevrandao": GAS_BASE,
    "difficulty": GAS_BASE,
    "blockhash": GAS_BLOCK_HASH,
    # control flow / system
    "stop": GAS_ZERO,
    "return": GAS_ZERO,  # plus expansion
    "revert": GAS_ZERO,  # plus expansion
    "pop": GAS_BASE,
    "log0": GAS_LOG,
    "log1": GAS_LOG,
    "log2": GAS_LOG,
    "log3": GAS_LOG,
    "log4": GAS_LOG,
    "call": GAS_WARM_ACCESS,
    "staticcall": GAS_WARM_ACCESS,
    "delegatecall": GAS_WARM_ACCESS,
    "create": GAS_CREATE,
    "create2": GAS_CREATE,
    # Yul object opcodes: constants materialise like a push
    "datasize": GAS_VERY_LOW,
    "dataoffset": GAS_VERY_LOW,
    "datacopy": GAS_VERY_LOW,
    "codecopy": GAS_VERY_LOW,
    "codesize": GAS_BASE,
    "setimmutable": GAS_VERY_LOW,
    "loadimmutable": GAS_VERY_LOW,
    "linkersymbol": GAS_VERY_LOW,
    "memoryguard": GAS_ZERO,
    # analysis opcodes never perturb gas accounting
    "ASSERT": GAS_ZERO,
    "REVEAL_UINT": GAS_ZERO,
    "REVEAL_ADDR": GAS_ZERO,
    "EXT_FUND": GAS_ZERO,
    "PRINT": GAS_ZERO,
    "PRINT_signed": GAS_ZERO,
    "PRINT_hex": GAS_ZERO,
    "IMPERSONATECALL": GAS_WARM_ACCESS,
}


def memory_cost(words: int) -> int:
    return GAS_VERY_LOW * words + words * words // 512


def expansion_cost(memory, touches) -> int:
    """Quadratic cost of growing memory to cover all (offset, size) touches."""
    need = memory.words
    for offset, size in touches:
        need = max(need, memory.words_needed(offset, size))
    if need <= memory.words:
        return 0
    return memory_cost(need) - memory_cost(memory.words)


def words_for(size: int) -> int:
    return (size + 31) // 32


# the helpers below are the *dynamic* components, added on top of BASE_COST


def exp_dynamic_cost(exponent: int) -> int:
    return GAS_EXPONENTIATION_PER_BYTE * byte_length(exponent)


def byte_length(value: int) -> int:
    return (value.bit_length() + 7) // 8


def sstore_cost(current: int, new: int) -> int:
    if new == current:
        return GAS_WARM_ACCESS
    if current == 0 and new != 0:
        return GAS_STORAGE_SET
    return GAS_STORAGE_UPDATE


def log_dynamic_cost(topics: int, size: int) -> int:
    return GAS_LOG_TOPIC * topics + GAS_LOG_DATA * size


def copy_dynamic_cost(size: int) -> int:
    return GAS_COPY_PER_WORD * words_for(size)


def keccak_dynamic_cost(size: int) -> int:
    return GAS_KECCAK256_WORD * words_for(size)


def init_code_cost(size: int) -> int:
    return GAS_INIT_CODE_WORD * words_for(size)
