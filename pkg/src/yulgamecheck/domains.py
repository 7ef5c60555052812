"""Opponent knowledge sets (o-domains).

uint/bytes32 and address are dynamic (grow within a trace as the code under
analysis leaks values); bool, string and bytes are fixed.  Ordered lists keep
enumeration deterministic; growth is rolled back on backtracking because
Domains is copied with the game configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .words import to_address


@dataclass
class Domains:
    uint_bytes32: list[int] = field(default_factory=list)
    address: list[int] = field(default_factory=list)
    strings: list[str] = field(default_factory=lambda: [""])
    bytes_values: list[bytes] = field(default_factory=lambda: [b""])

    def add_uint(self, value: int) -> bool:
        if value not in self.uint_bytes32:
            self.uint_bytes32.append(value)
            return True
        return False

    def add_address(self, value: int) -> bool:
        value = to_address(value)
        if value not in self.address:
            self.address.append(value)
            return True
        return False

    def copy(self) -> "Domains":
        return Domains(
            list(self.uint_bytes32),
            list(self.address),
            list(self.strings),
            list(self.bytes_values),
        )
