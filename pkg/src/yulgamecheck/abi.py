"""Compiler ABI JSON parsing, selector derivation, call encoding/decoding,
and combinatorial argument enumeration from the Opponent's domains.

Selectors use the genuine Keccak-256: compiler-emitted dispatchers compare
``shr(224, calldataload(0))`` against hard-coded real selector constants, so
the synthetic runtime oracle would make every call miss its case.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from typing import Optional

from .domains import Domains
from .errors import AbiError
from .keccak256 import keccak256
from .words import to_address

WORD = 32


@dataclass(frozen=True)
class AbiType:
    kind: str  # uint | address | bool | bytesN | bytes | string | array
    bits: int = 0  # uintN width
    size: int = 0  # bytesN width
    element: Optional["AbiType"] = None
    length: int = 0

    def canonical(self) -> str:
        if self.kind == "uint":
            return f"uint{self.bits}"
        if self.kind == "bytesN":
            return f"bytes{self.size}"
        if self.kind == "array":
            return f"{self.element.canonical()}[{self.length}]"
        return self.kind

    @property
    def is_dynamic(self) -> bool:
        return self.kind in ("bytes", "string")

    @property
    def head_words(self) -> int:
        if self.is_dynamic:
            return 1
        if self.kind == "array":
            return self.length
        return 1


UINT256 = AbiType("uint", bits=256)
BYTES32 = AbiType("bytesN", size=32)
SUPPORTED_ARRAYS = {
    "uint256[2]": AbiType("array", element=UINT256, length=2),
    "bytes32[2]": AbiType("array", element=BYTES32, length=2),
}


class UnsupportedType(Exception):
    pass


def parse_type(name: str) -> AbiType:
    name = name.strip()
    if name in SUPPORTED_ARRAYS:
        return SUPPORTED_ARRAYS[name]
    if name in ("uint", "int"):
        name += "256"
    if name == "address":
        return AbiType("address")
    if name == "bool":
        return AbiType("bool")
    if name == "string":
        return AbiType("string")
    if name == "bytes":
        return AbiType("bytes")
    m = re.fullmatch(r"uint(\d+)", name)
    if m:
        bits = int(m.group(1))
        if bits % 8 != 0 or not 8 <= bits <= 256:
            raise UnsupportedType(name)
        return AbiType("uint", bits=bits)
    m = re.fullmatch(r"bytes(\d+)", name)
    if m:
        size = int(m.group(1))
        if not 1 <= size <= 32:
            raise UnsupportedType(name)
        return AbiType("bytesN", size=size)
    raise UnsupportedType(name)


@dataclass
class AbiFunction:
    name: str
    inputs: tuple[AbiType, ...]
    outputs: Optional[tuple[AbiType, ...]]  # None: outputs undecodable
    state_mutability: str
    selector: bytes
    canonical_signature: str
    call_bound_override: Optional[int] = None

    @property
    def is_payable(self) -> bool:
        return self.state_mutability == "payable"

    @property
    def is_view(self) -> bool:
        return self.state_mutability in ("view", "pure")

    def call_bound(self, default: int) -> int:
        if self.call_bound_override is not None:
            return self.call_bound_override
        return 0 if self.is_view else default


def selector(signature: str) -> bytes:
    """First 4 bytes of the genuine Keccak-256 of the ASCII signature."""
    return keccak256(signature.encode("ascii"))[:4]


@dataclass
class ExploreAbi:
    contracts: dict[str, list[AbiFunction]] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def functions_for_object(self, object_name: str) -> list[AbiFunction]:
        return self.contracts.get(contract_name_of(object_name), [])

    def all_functions(self):
        for functions in self.contracts.values():
            yield from functions

    def restrict(self, keep: list[str]) -> None:
        """Prune to `Contract.sig(...)` entries; a `=N` suffix overrides the
        per-function call bound (the way to re-enable a view function)."""
        wanted: dict[tuple[str, str], Optional[int]] = {}
        for item in keep:
            spec, bound = item, None
            if "=" in item:
                spec, bound_text = item.rsplit("=", 1)
                bound = int(bound_text, 0)
            if "." not in spec:
                raise AbiError(f"--only expects Contract.signature, got {item!r}")
            contract, signature = spec.split(".", 1)
            wanted[(contract.strip(), signature.strip())] = bound
        pruned: dict[str, list[AbiFunction]] = {}
        matched = set()
        for contract, functions in self.contracts.items():
            for fn in functions:
                key = (contract, fn.canonical_signature)
                if key in wanted:
                    matched.add(key)
                    if wanted[key] is not None:
                        fn.call_bound_override = wanted[key]
                    pruned.setdefault(contract, []).append(fn)
        missing = set(wanted) - matched
        if missing:
            names = ", ".join(f"{c}.{s}" for c, s in sorted(missing))
            raise AbiError(f"--only entries match nothing in the ABI: {names}")
        self.contracts = pruned


_OBJECT_NAME = re.compile(r"^(.*?)_\d+(_deployed)?$")


def contract_name_of(object_name: str) -> str:
    m = _OBJECT_NAME.match(object_name)
    return m.group(1) if m else object_name


def parse_abi(json_text: str) -> ExploreAbi:
    try:
        doc = json.loads(json_text)
    except json.JSONDecodeError as exc:
        raise AbiError(f"malformed ABI JSON: {exc}") from exc

    explore = ExploreAbi()
    if isinstance(doc, list):
        explore.contracts[""] = _parse_contract("", doc, explore.warnings)
    elif isinstance(doc, dict) and "contracts" in doc:
        # solc --combined-json abi layout: keys are "path/file.sol:Name"
        for qualified, body in doc["contracts"].items():
            entries = body.get("abi", []) if isinstance(body, dict) else body
            if isinstance(entries, str):
                entries = json.loads(entries)
            name = qualified.rsplit(":", 1)[-1]
            explore.contracts[name] = _parse_contract(name, entries, explore.warnings)
    elif isinstance(doc, dict):
        for name, entries in doc.items():
            if isinstance(entries, str):
                entries = json.loads(entries)
            explore.contracts[name] = _parse_contract(name, entries, explore.warnings)
    else:
        raise AbiError("ABI JSON must be a list or an object")
    return explore


def _parse_contract(contract: str, entries, warnings: list[str]) -> list[AbiFunction]:
    if not isinstance(entries, list):
        raise AbiError(f"ABI for {contract or '<anonymous>'} must be a list of entries")
    functions: list[AbiFunction] = []
    seen: set[str] = set()
    label = contract or "<anonymous>"
    for entry in entries:
        kind = entry.get("type", "function")
        if kind in ("constructor", "event", "error"):
            continue
        if kind in ("fallback", "receive"):
            mutability = entry.get("stateMutability", "payable" if kind == "receive" else "nonpayable")
            sig = f"{kind}()"
            if sig in seen:
                raise AbiError(f"duplicate {sig} entry in {label}")
            seen.add(sig)
            functions.append(AbiFunction(kind, (), (), mutability, b"", sig))
            continue
        if kind != "function":
            warnings.append(f"{label}: skipping unknown ABI entry type {kind!r}")
            continue
        name = entry.get("name")
        if not name:
            raise AbiError(f"function entry without a name in {label}")
        try:
            inputs = tuple(parse_type(p["type"]) for p in entry.get("inputs", []))
        except UnsupportedType as exc:
            warnings.append(f"{label}.{name}: unsupported input type {exc}; function excluded")
            continue
        outputs: Optional[tuple[AbiType, ...]]
        try:
            outputs = tuple(parse_type(p["type"]) for p in entry.get("outputs", []))
        except UnsupportedType:
            outputs = None  # keep callable; returns render as raw bytes
        signature = f"{name}({','.join(t.canonical() for t in inputs)})"
        if signature in seen:
            raise AbiError(f"duplicate signature {signature} in {label}")
        seen.add(signature)
        mutability = entry.get("stateMutability", "nonpayable")
        functions.append(
            AbiFunction(name, inputs, outputs, mutability, selector(signature), signature)
        )
    return functions


# -- encoding ------------------------------------------------------------------


def _encode_word(value: int) -> bytes:
    return value.to_bytes(WORD, "big")


def _check_range(abi_type: AbiType, value: int) -> None:
    limit = 1 << (abi_type.bits if abi_type.kind == "uint" else 8 * abi_type.size)
    if not 0 <= value < limit:
        raise AbiError(f"value {value} out of range for {abi_type.canonical()}")


def encode_value_head(abi_type: AbiType, value) -> bytes:
    if abi_type.kind == "uint":
        _check_range(abi_type, value)
        return _encode_word(value)
    if abi_type.kind == "address":
        return _encode_word(to_address(value))
    if abi_type.kind == "bool":
        return _encode_word(1 if value else 0)
    if abi_type.kind == "bytesN":
        _check_range(abi_type, value)
        return value.to_bytes(abi_type.size, "big").ljust(WORD, b"\0")
    if abi_type.kind == "array":
        return b"".join(encode_value_head(abi_type.element, v) for v in value)
    raise AbiError(f"{abi_type.canonical()} has no static head")


def _encode_dynamic(abi_type: AbiType, value) -> bytes:
    payload = value.encode("utf-8") if abi_type.kind == "string" else bytes(value)
    padded_len = (len(payload) + WORD - 1) // WORD * WORD
    return _encode_word(len(payload)) + payload.ljust(padded_len, b"\0")


def encode_arguments(types: tuple[AbiType, ...], args) -> bytes:
    if len(types) != len(args):
        raise AbiError(f"expected {len(types)} argument(s), got {len(args)}")
    head_size = sum(t.head_words for t in types) * WORD
    heads, tails = [], []
    tail_offset = head_size
    for abi_type, value in zip(types, args):
        if abi_type.is_dynamic:
            heads.append(_encode_word(tail_offset))
            tail = _encode_dynamic(abi_type, value)
            tails.append(tail)
            tail_offset += len(tail)
        else:
            heads.append(encode_value_head(abi_type, value))
    return b"".join(heads) + b"".join(tails)


def encode_call(fn: AbiFunction, args) -> bytes:
    """selector ++ head/tail ABI encoding (empty calldata for fallback/receive)."""
    if fn.selector == b"":
        return b""
    return fn.selector + encode_arguments(fn.inputs, args)


# -- decoding ------------------------------------------------------------------


@dataclass(frozen=True)
class RawReturn:
    """Marker for return data that did not decode against the ABI types."""

    data: bytes


def decode_return(types: Optional[tuple[AbiType, ...]], data: bytes):
    """Best-effort decode; malformed or untyped data comes back raw."""
    if types is None:
        return [RawReturn(data)] if data else []
    try:
        return _decode(types, data)
    except (AbiError, ValueError, OverflowError):
        return [RawReturn(data)]


def _decode(types: tuple[AbiType, ...], data: bytes):
    values = []
    offset = 0
    for abi_type in types:
        if abi_type.is_dynamic:
            pointer = _read_word(data, offset)
            length = _read_word(data, pointer)
            payload = data[pointer + WORD : pointer + WORD + length]
            if len(payload) != length:
                raise AbiError("dynamic payload out of bounds")
            values.append(payload.decode("utf-8", "replace") if abi_type.kind == "string" else payload)
            offset += WORD
        elif abi_type.kind == "array":
            element_values = []
            for _ in range(abi_type.length):
                element_values.append(_decode_static(abi_type.element, data, offset))
                offset += WORD
            values.append(tuple(element_values))
        else:
            values.append(_decode_static(abi_type, data, offset))
            offset += WORD
    return values


def _read_word(data: bytes, offset: int) -> int:
    chunk = data[offset : offset + WORD]
    if len(chunk) != WORD:
        raise AbiError("truncated word")
    return int.from_bytes(chunk, "big")


def _decode_static(abi_type: AbiType, data: bytes, offset: int):
    word = _read_word(data, offset)
    if abi_type.kind == "address":
        return to_address(word)
    if abi_type.kind == "bool":
        return int(word != 0)
    if abi_type.kind == "bytesN":
        return word >> (8 * (WORD - abi_type.size))
    return word


# -- argument enumeration --------------------------------------------------------


def candidate_values(abi_type: AbiType, domains: Domains, addresses=()):
    """Per-position candidate list; oversized domain values are filtered out,
    never truncated (truncation would synthesise unknown values)."""
    if abi_type.kind == "uint":
        limit = 1 << abi_type.bits
        return [v for v in domains.uint_bytes32 if v < limit]
    if abi_type.kind == "bytesN":
        limit = 1 << (8 * abi_type.size)
        return [v for v in domains.uint_bytes32 if v < limit]
    if abi_type.kind == "address":
        seen: dict[int, None] = {}
        for value in itertools.chain(domains.address, addresses):
            seen.setdefault(to_address(value))
        return list(seen)
    if abi_type.kind == "bool":
        return [0, 1]
    if abi_type.kind == "string":
        return list(domains.strings)
    if abi_type.kind == "bytes":
        return list(domains.bytes_values)
    if abi_type.kind == "array":
        return [(1, 1)]
    raise AbiError(f"cannot enumerate {abi_type.canonical()}")


def enumerate_args(fn: AbiFunction, domains: Domains, addresses=()):
    """Cartesian product of per-position candidates, leftmost varying slowest."""
    if not fn.inputs:
        return [()]
    pools = [candidate_values(t, domains, addresses) for t in fn.inputs]
    return list(itertools.product(*pools))


def render_value(abi_type: Optional[AbiType], value) -> str:
    """Trace rendering for a decoded/enumerated value."""
    if isinstance(value, RawReturn):
        return "0x" + value.data.hex()
    if abi_type is not None:
        if abi_type.kind == "address":
            return hex(to_address(value))
        if abi_type.kind == "bool":
            return "true" if value else "false"
        if abi_type.kind == "bytesN":
            return "0x" + value.to_bytes(abi_type.size, "big").hex()
        if abi_type.kind == "array":
            return "[" + ", ".join(render_value(abi_type.element, v) for v in value) + "]"
    if isinstance(value, bytes):
        return "0x" + value.hex()
    if isinstance(value, str):
        return f'"{value}"'
    if isinstance(value, tuple):
        return "[" + ", ".join(render_value(None, v) for v in value) + "]"
    if isinstance(value, int):
        return hex(value) if value >= 1 << 64 else str(value)
    return repr(value)
