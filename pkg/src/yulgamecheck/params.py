"""Analysis configuration record and its defaults."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

ETHER = 10**18
DAY = 86400


@dataclass
class Params:
    # opponent call settings
    call_bound: int = 2
    stack_bound: int = 3
    opponent_address_count: int = 1
    opponent_balance: int = 10 * ETHER
    opponent_spending: int = 1000
    uint256_domain: tuple[int, ...] = (0, 1, 1000)
    address_domain: tuple[int, ...] = ()
    opponent_return_values: bool = False
    # opponent time settings
    wait_time: int = 7 * DAY
    no_waiting: bool = False
    wait_first: bool = False
    max_wait: int = 22 * DAY
    # deployment transaction settings
    deploy_gas: int = 30000 * ETHER
    deploy_address: int = 0x0102030405060708090A
    deploy_value: int = 123456789 * ETHER
    # pipeline and output settings
    legacy_mode: bool = False
    only: tuple[str, ...] = ()
    deadline: Optional[float] = None  # wall-clock seconds
    json_output: bool = False
    seed: Optional[int] = None  # keccak oracle seed override

    @property
    def waiting_enabled(self) -> bool:
        return not self.no_waiting and self.wait_time > 0
