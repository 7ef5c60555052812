"""Mutable world state: accounts, storage, memory, time, the hash oracle.

WorldState values follow a single-writer discipline; ``snapshot`` produces
independent copies for depth-first backtracking.  The keccak oracle is the
one deliberately shared structure: hashes must be identical across game
branches and across runs, so it lives outside the snapshot.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Optional

from .errors import EvalFault
from .words import WORD_MASK, to_address

DEFAULT_ORACLE_SEED = 0x59554C47414D45434845434B  # ASCII "YULGAMECHECK"

# pragmatic resource guard; far below what the default gas budget permits
MEMORY_BYTE_LIMIT = 128 * 1024 * 1024


class KeccakOracle:
    """Injective stand-in for Keccak-256 over runtime byte sequences.

    Each fresh input draws a word from a PRF keyed by (seed, input), so
    results are independent of call order and identical across runs;
    collisions and zero draws re-draw with a bumped counter.  The reverse
    map is what makes the no-collision guarantee constructive.
    """

    def __init__(self, seed: int = DEFAULT_ORACLE_SEED):
        self.seed = seed
        self.forward: dict[bytes, int] = {}
        self.reverse: dict[int, bytes] = {}

    def digest(self, data: bytes) -> int:
        data = bytes(data)
        known = self.forward.get(data)
        if known is not None:
            return known
        attempt = 0
        seed_bytes = self.seed.to_bytes(32, "big", signed=False)
        while True:
            material = hashlib.sha256(
                seed_bytes + attempt.to_bytes(8, "big") + data
            ).digest()
            candidate = int.from_bytes(material, "big")
            if candidate != 0 and candidate not in self.reverse:
                break
            attempt += 1
        self.forward[data] = candidate
        self.reverse[candidate] = data
        return candidate

    def preimage(self, word: int) -> Optional[bytes]:
        return self.reverse.get(word)


class Memory:
    """Byte-indexable message memory with a 32-byte-granular high-water mark."""

    __slots__ = ("data", "words")

    def __init__(self):
        self.data = bytearray()
        self.words = 0

    @property
    def size(self) -> int:
        return self.words * 32

    def words_needed(self, offset: int, length: int) -> int:
        """High-water mark (in words) after touching [offset, offset+length)."""
        if length == 0:
            return self.words
        return max(self.words, (offset + length + 31) // 32)

    def expand(self, offset: int, length: int) -> None:
        need = self.words_needed(offset, length)
        if need > self.words:
            if need * 32 > MEMORY_BYTE_LIMIT:
                raise MemoryBudgetExceeded(need * 32)
            self.data.extend(b"\0" * (need * 32 - len(self.data)))
            self.words = need

    def read(self, offset: int, length: int) -> bytes:
        if length == 0:
            return b""
        self.expand(offset, length)
        return bytes(self.data[offset : offset + length])

    def write(self, offset: int, payload: bytes) -> None:
        if not payload:
            return
        self.expand(offset, len(payload))
        self.data[offset : offset + len(payload)] = payload

    def read_word(self, offset: int) -> int:
        return int.from_bytes(self.read(offset, 32), "big")

    def write_word(self, offset: int, value: int) -> None:
        self.write(offset, (value & WORD_MASK).to_bytes(32, "big"))

    def write_byte(self, offset: int, value: int) -> None:
        self.write(offset, bytes([value & 0xFF]))

    def copy(self) -> "Memory":
        dup = Memory()
        dup.data = bytearray(self.data)
        dup.words = self.words
        return dup


class MemoryBudgetExceeded(Exception):
    """Raised when an expansion passes the model's memory cap; treated as
    gas exhaustion by the dialect."""

    def __init__(self, requested: int):
        super().__init__(f"memory expansion to {requested} bytes exceeds model limit")
        self.requested = requested


@dataclass
class Account:
    balance: int = 0
    storage: dict[int, int] = field(default_factory=dict)
    code: Optional[int] = None  # object ID; Opponent accounts stay codeless
    immutables: dict[str, int] = field(default_factory=dict)

    def copy(self) -> "Account":
        return Account(self.balance, dict(self.storage), self.code, dict(self.immutables))

    def is_empty(self) -> bool:
        return self.balance == 0 and self.code is None and not self.storage


@dataclass
class InsufficientBalance:
    """Signal for the implicit assertion: a sender cannot cover a transfer."""

    sender: int
    balance: int
    amount: int


@dataclass
class AddressBook:
    """Ordered Proponent/Opponent address sets (order drives enumeration)."""

    proponent: list[int] = field(default_factory=list)
    opponent: list[int] = field(default_factory=list)

    def add_proponent(self, address: int) -> None:
        if address not in self.proponent:
            self.proponent.append(address)

    def is_opponent(self, address: int) -> bool:
        return address in self.opponent

    def copy(self) -> "AddressBook":
        return AddressBook(list(self.proponent), list(self.opponent))


class WorldState:
    """Accounts, link table and block time, plus shared run-wide structures.

    ``oracle``, ``objects`` and ``print_sink`` are shared across snapshots
    by design; everything else copies by value.
    """

    def __init__(self, oracle: KeccakOracle, objects=None):
        self.accounts: dict[int, Account] = {}
        self.link_table: dict[str, int] = {}
        self.time: int = 0
        self.oracle = oracle
        self.objects = objects  # ObjectTable, set once at startup
        self.addresses = AddressBook()
        self.print_sink = None  # callable(str) or None -> stdout

    def account(self, address: int) -> Account:
        """Fetch-or-create: absent accounts behave as zeroed accounts."""
        address = to_address(address)
        acct = self.accounts.get(address)
        if acct is None:
            acct = Account()
            self.accounts[address] = acct
        return acct

    def peek_account(self, address: int) -> Optional[Account]:
        return self.accounts.get(to_address(address))

    def balance(self, address: int) -> int:
        acct = self.accounts.get(to_address(address))
        return acct.balance if acct else 0

    def transfer(self, sender: int, recipient: int, amount: int):
        """Move wei; returns InsufficientBalance instead of raising so the
        engine can turn it into the implicit-assertion violation."""
        sender = to_address(sender)
        recipient = to_address(recipient)
        held = self.balance(sender)
        if held < amount:
            return InsufficientBalance(sender, held, amount)
        if amount == 0:
            return None
        self.account(sender).balance = held - amount
        self.account(recipient).balance += amount
        return None

    def advance_time(self, delta: int) -> None:
        if delta <= 0:
            raise EvalFault("time must advance by a positive delta")
        if self.time + delta > WORD_MASK:
            raise EvalFault("block time overflow")
        self.time += delta

    def total_balance(self) -> int:
        return sum(acct.balance for acct in self.accounts.values())

    def snapshot(self) -> "WorldState":
        dup = WorldState(self.oracle, self.objects)
        dup.accounts = {addr: acct.copy() for addr, acct in self.accounts.items()}
        dup.link_table = dict(self.link_table)
        dup.time = self.time
        dup.addresses = self.addresses.copy()
        dup.print_sink = self.print_sink
        return dup

    def __eq__(self, other) -> bool:
        if not isinstance(other, WorldState):
            return NotImplemented
        return (
            {a: (c.balance, c.storage, c.code, c.immutables) for a, c in self.accounts.items()}
            == {a: (c.balance, c.storage, c.code, c.immutables) for a, c in other.accounts.items()}
            and self.link_table == other.link_table
            and self.time == other.time
        )
