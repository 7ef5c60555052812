"""Game configurations, the move kinds, opponent knowledge growth, bounds,
and exhaustive depth-first exploration with backtracking.

Exploration is sequential and deterministic: moves are enumerated in a fixed
(caller, target, function, tuple, value) order, branch points copy the whole
configuration, and single-successor configurations advance in place.
"""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from . import evaluator
from .abi import AbiFunction, ExploreAbi, RawReturn, decode_return, encode_call, enumerate_args, render_value
from .dialect import CallContext, CallEvent, CreateEvent, RevealEvent
from .domains import Domains
from .errors import InputError
from .evaluator import (
    AssertViolation,
    HaltedReturn,
    HaltedStop,
    OutOfGas,
    Reverted,
    StuckOn,
)
from .params import Params
from .preprocess import LinkPlan
from .state import InsufficientBalance, KeccakOracle, Memory, WorldState
from .syntax.nodes import YulObject
from .syntax.objects import index_objects
from .words import format_address, format_word, word_bytes

ASSERTION_MESSAGE = "[ASSERTION VIOLATION]"
CREATE_ADDRESS_BASE = 0xA0 << 152  # 0xa000...0000, low bits are a counter


def opponent_address(index: int) -> int:
    """Opponent addresses are the ASCII words OP_ADDRESS_<i>."""
    return int.from_bytes(f"OP_ADDRESS_{index}".encode("ascii"), "big")


ORIGIN_ADDRESS = int.from_bytes(b"EXT_ORIGIN", "big")


# -- moves ---------------------------------------------------------------------


@dataclass(frozen=True)
class DeployMove:
    object_name: str
    address: int


@dataclass(frozen=True)
class OCallMove:
    caller: int
    target: int
    target_name: str
    signature: str
    args: tuple
    value: int
    fn: AbiFunction = field(compare=False, repr=False, default=None)


@dataclass(frozen=True)
class POCallMove:
    caller: int
    target: int
    kind: str  # call | staticcall | delegatecall | impersonate


@dataclass(frozen=True)
class PPCallMove:
    kind: str
    caller: int
    target: int
    target_name: str
    signature: Optional[str]
    args: tuple
    value: int
    fn: AbiFunction = field(compare=False, repr=False, default=None)


@dataclass(frozen=True)
class CreateMove:
    kind: str  # create | create2
    object_name: str
    address: int
    value: int


@dataclass(frozen=True)
class ORetMove:
    data: bytes


@dataclass(frozen=True)
class PORetMove:
    values: tuple


@dataclass(frozen=True)
class PPRetMove:
    values: tuple


@dataclass(frozen=True)
class OWaitMove:
    pass


@dataclass(frozen=True)
class InternalMove:
    pass


Move = Union[
    DeployMove, OCallMove, POCallMove, PPCallMove, CreateMove,
    ORetMove, PORetMove, PPRetMove, OWaitMove, InternalMove,
]


# -- frames and configurations ----------------------------------------------------


@dataclass
class ProponentFrame:
    kind: str  # deploy | library | ocall | ppcall | create
    ctx: CallContext
    block: object = None  # code to run; None once running
    result: object = None  # RunResult after the first internal move
    origin_move: Optional[Move] = None
    created_address: Optional[int] = None

    def copy(self) -> "ProponentFrame":
        ctx = self.ctx.copy()
        result = self.result
        if isinstance(result, StuckOn):
            result = StuckOn(result.event, result.machine.copy(ctx), result.n_results)
        return ProponentFrame(
            kind=self.kind,
            ctx=ctx,
            block=self.block,
            result=result,
            origin_move=self.origin_move,
            created_address=self.created_address,
        )


@dataclass
class OpponentFrame:
    origin: Optional[int]  # transaction origin; None at the top level

    def copy(self) -> "OpponentFrame":
        return OpponentFrame(self.origin)


Frame = Union[ProponentFrame, OpponentFrame]


@dataclass
class GameConfig:
    stack: list[Frame]
    world: WorldState
    domains: Domains
    counters: dict[tuple[int, str], int]
    total_wait: int
    trace: list[Move]

    def copy(self) -> "GameConfig":
        return GameConfig(
            stack=[frame.copy() for frame in self.stack],
            world=self.world.snapshot(),
            domains=self.domains.copy(),
            counters=dict(self.counters),
            total_wait=self.total_wait,
            trace=list(self.trace),
        )

    def open_ocalls(self) -> int:
        return sum(
            1
            for frame in self.stack
            if isinstance(frame, ProponentFrame) and frame.kind == "ocall"
        )


# -- verdicts ------------------------------------------------------------------


@dataclass
class ExploreStats:
    configurations: int = 0
    traces: int = 0
    moves: int = 0
    o_calls: int = 0
    first_transaction_o_calls: int = 0
    max_open_ocalls: int = 0


@dataclass
class Violation:
    message: str
    trace: list[Move]
    opponents: list[int]


@dataclass
class ExhaustedWithinBounds:
    stats: ExploreStats


@dataclass
class TimedOut:
    stats: ExploreStats


Verdict = Union[Violation, ExhaustedWithinBounds, TimedOut]


class _DeadlineReached(Exception):
    pass


class _ViolationFound(Exception):
    def __init__(self, violation: Violation):
        self.violation = violation


# -- the engine ----------------------------------------------------------------


class GameEngine:
    def __init__(
        self,
        root: YulObject,
        params: Params,
        abi: ExploreAbi,
        link_plan: Optional[LinkPlan] = None,
        oracle: Optional[KeccakOracle] = None,
        print_sink: Optional[Callable[[str], None]] = None,
    ):
        self.root = root
        self.params = params
        self.abi = abi
        self.link_plan = link_plan or LinkPlan()
        self.oracle = oracle or KeccakOracle(
            params.seed if params.seed is not None else KeccakOracle().seed
        )
        self.objects = index_objects(root, self.oracle)
        self.print_sink = print_sink
        self.stats = ExploreStats()
        self.opponents = [
            opponent_address(i) for i in range(params.opponent_address_count)
        ]
        self._deadline: Optional[float] = None
        self._reported_delegatecalls: set[tuple[int, int]] = set()
        self._warned_empty_enumeration: set[str] = set()
        # test/instrumentation hooks
        self.on_move: Optional[Callable[[GameConfig, Move], None]] = None
        self.trace_sink: Optional[Callable[[GameConfig], None]] = None

    # -- setup ------------------------------------------------------------

    def initial_config(self) -> GameConfig:
        params = self.params
        world = WorldState(self.oracle, self.objects)
        world.print_sink = self.print_sink
        for address in self.opponents:
            world.addresses.opponent.append(address)
            world.account(address).balance = params.opponent_balance
        world.account(ORIGIN_ADDRESS).balance = params.deploy_value

        domains = Domains(list(params.uint256_domain), list(params.address_domain))

        config = GameConfig(
            stack=[], world=world, domains=domains, counters={}, total_wait=0, trace=[]
        )
        for library_id, object_name in self.link_plan.entries:
            address = self._deploy_library(config, object_name)
            world.link_table[library_id] = address

        deploy_address = params.deploy_address
        occupied = world.peek_account(deploy_address)
        if occupied is not None and occupied.code is not None:
            raise InputError(
                f"deploy address {format_address(deploy_address)} is already occupied"
            )
        failed = world.transfer(ORIGIN_ADDRESS, deploy_address, params.deploy_value)
        assert failed is None
        ctx = CallContext(
            self_address=deploy_address,
            caller=ORIGIN_ADDRESS,
            origin=ORIGIN_ADDRESS,
            callvalue=params.deploy_value,
            calldata=b"",
            gas_remaining=params.deploy_gas,
            code_object=self.root.object_id,
            code_address=deploy_address,
            memory=Memory(),
            is_constructor=True,
        )
        config.stack.append(
            ProponentFrame(
                kind="deploy",
                ctx=ctx,
                block=self.root.code,
                created_address=deploy_address,
            )
        )
        return config

    def _deploy_library(self, config: GameConfig, object_name: str) -> int:
        world = config.world
        obj = self.objects.by_name[object_name]
        address = self._fresh_address(world)
        ctx = CallContext(
            self_address=address,
            caller=ORIGIN_ADDRESS,
            origin=ORIGIN_ADDRESS,
            callvalue=0,
            calldata=b"",
            gas_remaining=self.params.deploy_gas,
            code_object=obj.object_id,
            code_address=address,
            memory=Memory(),
            is_constructor=True,
        )
        frame = ProponentFrame(kind="library", ctx=ctx, block=obj.code, created_address=address)
        try:
            self._run_frame(config, frame)
        except _ViolationFound as found:
            raise InputError(
                f"library constructor {object_name!r} failed: {found.violation.message}"
            ) from None
        if not isinstance(frame.result, HaltedReturn):
            raise InputError(
                f"library constructor {object_name!r} did not return deployed code"
            )
        deployed = self._install_code(world, address, frame.result.data)
        if deployed is None:
            raise InputError(
                f"library constructor {object_name!r} returned an unknown object ID"
            )
        world.addresses.add_proponent(address)
        return address

    def _fresh_address(self, world: WorldState) -> int:
        counter = 1
        while True:
            address = CREATE_ADDRESS_BASE | counter
            if (
                address not in world.accounts
                and address not in world.addresses.proponent
                and address not in world.addresses.opponent
            ):
                return address
            counter += 1

    def _install_code(self, world: WorldState, address: int, data: bytes):
        """Returned constructor data names the deployed object by its ID."""
        if len(data) != 32:
            return None
        obj = self.objects.object_for_id(int.from_bytes(data, "big"))
        if obj is None:
            return None
        world.account(address).code = obj.object_id
        return obj

    # -- move enumeration ---------------------------------------------------

    def enumerate_moves(self, config: GameConfig) -> list[Move]:
        top = config.stack[-1] if config.stack else None
        if top is None:
            return []
        if isinstance(top, ProponentFrame):
            return self._proponent_moves(config, top)
        return self._opponent_moves(config)

    def _proponent_moves(self, config: GameConfig, frame: ProponentFrame) -> list[Move]:
        world = config.world
        if frame.result is None:
            return [InternalMove()]
        result = frame.result
        if isinstance(result, StuckOn):
            event = result.event
            if isinstance(event, CallEvent):
                sender = event.sender if event.kind == "impersonate" else frame.ctx.self_address
                if world.addresses.is_opponent(event.target):
                    return [POCallMove(sender, event.target, event.kind)]
                account = world.peek_account(event.target)
                assert account is not None and account.code is not None, (
                    "calls to codeless accounts settle inside the internal move"
                )
                return [self._pp_call_move(event, sender, world)]
            assert isinstance(event, CreateEvent)
            obj = self.objects.object_for_id(int.from_bytes(event.init_data[:32], "big"))
            return [
                CreateMove(event.kind, obj.name, self._fresh_address(world), event.value)
            ]
        if isinstance(result, (HaltedStop, HaltedReturn)):
            data = result.data if isinstance(result, HaltedReturn) else b""
            if len(config.stack) == 1:
                # end of the top-level constructor: the one deploy move
                obj = None
                if len(data) == 32:
                    obj = self.objects.object_for_id(int.from_bytes(data, "big"))
                name = obj.name if obj is not None else "<none>"
                return [DeployMove(name, frame.created_address)]
            parent = config.stack[-2]
            if isinstance(parent, OpponentFrame):
                return [PORetMove(self._decode_frame_output(frame, data))]
            if frame.kind == "create":
                # the parent's create expression evaluates to the new address
                return [PPRetMove((frame.created_address,))]
            return [PPRetMove(self._decode_frame_output(frame, data))]
        # Reverted or OutOfGas: the branch terminates without a move
        assert isinstance(result, (Reverted, OutOfGas))
        return []

    def _pp_call_move(self, event: CallEvent, sender: int, world: WorldState) -> PPCallMove:
        account = world.peek_account(event.target)
        obj = self.objects.object_for_id(account.code)
        fn = self._function_by_selector(obj.name, event.input_data)
        if fn is not None:
            args = tuple(decode_return(fn.inputs, event.input_data[4:]))
            signature = fn.canonical_signature
        elif event.input_data:
            args = (RawReturn(event.input_data),)
            signature = "0x" + event.input_data[:4].hex()
        else:
            args = ()
            signature = "fallback()"
        return PPCallMove(
            kind=event.kind,
            caller=sender,
            target=event.target,
            target_name=obj.name,
            signature=signature,
            args=args,
            value=event.value,
            fn=fn,
        )

    def _function_by_selector(self, object_name: str, calldata: bytes) -> Optional[AbiFunction]:
        if len(calldata) < 4:
            return None
        for fn in self.abi.functions_for_object(object_name):
            if fn.selector == calldata[:4]:
                return fn
        return None

    def _decode_frame_output(self, frame: ProponentFrame, data: bytes) -> tuple:
        if not data:
            return ()
        move = frame.origin_move
        fn = getattr(move, "fn", None) if move is not None else None
        if fn is not None:
            return tuple(decode_return(fn.outputs, data))
        if len(data) % 32 == 0:
            return tuple(
                int.from_bytes(data[i : i + 32], "big") for i in range(0, len(data), 32)
            )
        return (RawReturn(data),)

    def _opponent_moves(self, config: GameConfig) -> list[Move]:
        params = self.params
        moves: list[Move] = []
        sole_frame = len(config.stack) == 1

        if sole_frame:
            wait_allowed = (
                params.waiting_enabled
                and config.total_wait + params.wait_time <= params.max_wait
            )
            if wait_allowed and params.wait_first:
                moves.append(OWaitMove())

        moves.extend(self._o_call_moves(config))

        if not sole_frame:
            moves.extend(self._o_ret_moves(config))
        elif params.waiting_enabled and not params.wait_first:
            if config.total_wait + params.wait_time <= params.max_wait:
                moves.append(OWaitMove())
        return moves

    def _o_call_moves(self, config: GameConfig) -> list[Move]:
        params = self.params
        world = config.world
        if config.open_ocalls() >= params.stack_bound:
            return []
        known_addresses = world.addresses.proponent + world.addresses.opponent
        moves: list[Move] = []
        for caller in world.addresses.opponent:
            caller_balance = world.balance(caller)
            for target in world.addresses.proponent:
                account = world.peek_account(target)
                if account is None or account.code is None:
                    continue
                obj = self.objects.object_for_id(account.code)
                if obj is None:
                    continue
                for fn in self.abi.functions_for_object(obj.name):
                    bound = fn.call_bound(params.call_bound)
                    if config.counters.get((target, fn.canonical_signature), 0) >= bound:
                        continue
                    if fn.is_payable and params.opponent_spending > 0:
                        values = (0, params.opponent_spending)
                    else:
                        values = (0,)
                    tuples = enumerate_args(fn, config.domains, known_addresses)
                    if not tuples and fn.canonical_signature not in self._warned_empty_enumeration:
                        self._warned_empty_enumeration.add(fn.canonical_signature)
                        print(
                            f"warning: no argument tuples for {fn.canonical_signature} "
                            "(a domain is empty); the function is never called",
                            file=sys.stderr,
                        )
                    for args in tuples:
                        for value in values:
                            if value > caller_balance:
                                continue
                            moves.append(
                                OCallMove(
                                    caller=caller,
                                    target=target,
                                    target_name=obj.name,
                                    signature=fn.canonical_signature,
                                    args=args,
                                    value=value,
                                    fn=fn,
                                )
                            )
        return moves

    def _o_ret_moves(self, config: GameConfig) -> list[Move]:
        parent = config.stack[-2]
        assert isinstance(parent, ProponentFrame) and isinstance(parent.result, StuckOn)
        event = parent.result.event
        assert isinstance(event, CallEvent)
        if not self.params.opponent_return_values:
            return [ORetMove(b"\0" * event.out_size)]
        # opponent-chosen returns: typed tuples when the selector is known
        fn = self._any_function_by_selector(event.input_data)
        options: list[bytes] = [b""]
        if fn is not None and fn.outputs:
            for values in enumerate_args(
                _outputs_as_inputs(fn), config.domains,
                config.world.addresses.proponent + config.world.addresses.opponent,
            ):
                encoded = _encode_outputs(fn.outputs, values)
                if encoded not in options:
                    options.append(encoded)
        else:
            for word in config.domains.uint_bytes32:
                options.append(word_bytes(word))
        return [ORetMove(data) for data in options]

    def _any_function_by_selector(self, calldata: bytes) -> Optional[AbiFunction]:
        if len(calldata) < 4:
            return None
        for fn in self.abi.all_functions():
            if fn.selector == calldata[:4]:
                return fn
        return None

    # -- move application ---------------------------------------------------

    def apply_move(self, config: GameConfig, move: Move) -> Optional[Violation]:
        self.stats.moves += 1
        try:
            if isinstance(move, InternalMove):
                self._apply_internal(config)
            elif isinstance(move, OCallMove):
                self._apply_o_call(config, move)
            elif isinstance(move, POCallMove):
                self._apply_po_call(config, move)
            elif isinstance(move, PPCallMove):
                self._apply_pp_call(config, move)
            elif isinstance(move, CreateMove):
                self._apply_create(config, move)
            elif isinstance(move, ORetMove):
                self._apply_o_ret(config, move)
            elif isinstance(move, PORetMove):
                self._apply_po_ret(config, move)
            elif isinstance(move, PPRetMove):
                self._apply_pp_ret(config, move)
            elif isinstance(move, OWaitMove):
                config.world.advance_time(self.params.wait_time)
                config.total_wait += self.params.wait_time
                config.trace.append(move)
            elif isinstance(move, DeployMove):
                self._apply_deploy(config, move)
            else:
                raise AssertionError(f"unknown move {move!r}")
        except _ViolationFound as found:
            return found.violation
        if self.on_move is not None:
            self.on_move(config, move)
        return None

    def _violation(self, config: GameConfig, message: str):
        raise _ViolationFound(Violation(message, list(config.trace), list(self.opponents)))

    def _insufficient(self, config: GameConfig, failure: InsufficientBalance):
        self._violation(
            config,
            f"sender {format_address(failure.sender)} has insufficient balance "
            f"({failure.balance}) to transfer {failure.amount}",
        )

    def _transfer_or_violation(self, config: GameConfig, sender: int, to: int, amount: int) -> bool:
        """True when the transfer went through; False when it failed for a
        non-Proponent sender (the call fails like in the EVM).  A Proponent
        sender coming up short is the implicit-assertion violation."""
        failure = config.world.transfer(sender, to, amount)
        if failure is None:
            return True
        if sender in config.world.addresses.proponent:
            self._insufficient(config, failure)
        return False

    def _step_check(self):
        if self._deadline is not None and time.monotonic() >= self._deadline:
            raise _DeadlineReached()

    def _run_frame(self, config: GameConfig, frame: ProponentFrame) -> None:
        """Run the frame's code block to its next rest point."""
        result = evaluator.run(frame.block, frame.ctx, config.world, self._step_check)
        frame.block = None
        self._settle(config, frame, result)

    def _resume_frame(self, config: GameConfig, frame: ProponentFrame, values, returndata) -> None:
        result = evaluator.resume(
            frame.result, values, returndata, frame.ctx, config.world, self._step_check
        )
        self._settle(config, frame, result)

    def _settle(self, config: GameConfig, frame: ProponentFrame, result) -> None:
        """Absorb reveals, trivial calls to codeless addresses, and malformed
        creates; stores the first result the game must branch on."""
        while True:
            if isinstance(result, AssertViolation):
                self._violation(config, ASSERTION_MESSAGE)
            if isinstance(result, StuckOn):
                event = result.event
                if isinstance(event, RevealEvent):
                    if event.kind == "addr":
                        config.domains.add_address(event.value)
                    else:
                        config.domains.add_uint(event.value)
                    result = evaluator.resume(
                        result, [], None, frame.ctx, config.world, self._step_check
                    )
                    continue
                if isinstance(event, CallEvent) and self._is_trivial_call(config, event):
                    sender = (
                        event.sender if event.kind == "impersonate" else frame.ctx.self_address
                    )
                    ok = True
                    if event.value and event.kind != "delegatecall":
                        ok = self._transfer_or_violation(
                            config, sender, event.target, event.value
                        )
                    frame.ctx.gas_remaining += event.charged_gas if ok else 0
                    result = evaluator.resume(
                        result, [1 if ok else 0], b"", frame.ctx, config.world, self._step_check
                    )
                    continue
                if isinstance(event, CreateEvent) and (
                    len(event.init_data) < 32
                    or self.objects.object_for_id(
                        int.from_bytes(event.init_data[:32], "big")
                    )
                    is None
                ):
                    # create region does not name an object: the create fails
                    frame.ctx.gas_remaining += event.child_gas
                    result = evaluator.resume(
                        result, [0], b"", frame.ctx, config.world, self._step_check
                    )
                    continue
            frame.result = result
            return

    def _is_trivial_call(self, config: GameConfig, event: CallEvent) -> bool:
        """A call to a codeless non-Opponent address has no code to run; it
        settles as a plain transfer plus success."""
        if config.world.addresses.is_opponent(event.target):
            return False
        account = config.world.peek_account(event.target)
        return account is None or account.code is None

    def _apply_internal(self, config: GameConfig):
        frame = config.stack[-1]
        assert isinstance(frame, ProponentFrame)
        self._run_frame(config, frame)

    def _transaction_origin(self, config: GameConfig, caller: int) -> int:
        top = config.stack[-1]
        assert isinstance(top, OpponentFrame)
        return caller if top.origin is None else top.origin

    def _apply_o_call(self, config: GameConfig, move: OCallMove):
        world = config.world
        if not any(isinstance(m, (OCallMove, OWaitMove)) for m in config.trace):
            self.stats.first_transaction_o_calls += 1
        self.stats.o_calls += 1
        config.trace.append(move)
        key = (move.target, move.signature)
        config.counters[key] = config.counters.get(key, 0) + 1
        failure = world.transfer(move.caller, move.target, move.value)
        assert failure is None, "o-call values are pre-filtered by caller balance"
        account = world.peek_account(move.target)
        obj = self.objects.object_for_id(account.code)
        ctx = CallContext(
            self_address=move.target,
            caller=move.caller,
            origin=self._transaction_origin(config, move.caller),
            callvalue=move.value,
            calldata=encode_call(move.fn, move.args),
            gas_remaining=self.params.deploy_gas,
            code_object=obj.object_id,
            code_address=move.target,
            memory=Memory(),
        )
        config.stack.append(ProponentFrame(kind="ocall", ctx=ctx, block=obj.code, origin_move=move))
        self.stats.max_open_ocalls = max(self.stats.max_open_ocalls, config.open_ocalls())

    def _grow_domains_from_calldata(self, config: GameConfig, payload: bytes):
        """Word-aligned argument values enter the uint domain; address-shaped
        words that name a known account also enter the address domain."""
        if len(payload) % 32 == 4:
            payload = payload[4:]  # strip the selector
        world = config.world
        for i in range(0, len(payload) - len(payload) % 32, 32):
            word = int.from_bytes(payload[i : i + 32], "big")
            config.domains.add_uint(word)
            if word < (1 << 160) and (
                word in world.accounts
                or word in world.addresses.proponent
                or word in world.addresses.opponent
            ):
                config.domains.add_address(word)

    def _apply_po_call(self, config: GameConfig, move: POCallMove):
        frame = config.stack[-1]
        assert isinstance(frame, ProponentFrame) and isinstance(frame.result, StuckOn)
        event = frame.result.event
        if event.value and event.kind != "delegatecall":
            if not self._transfer_or_violation(config, move.caller, event.target, event.value):
                # non-Proponent sender came up short: the call itself fails
                self._resume_frame(config, frame, [0], b"")
                return
        if event.kind == "delegatecall":
            self._report_delegatecall(move.caller, event.target)
        config.trace.append(move)
        self._grow_domains_from_calldata(config, event.input_data)
        config.stack.append(OpponentFrame(origin=frame.ctx.origin))

    def _report_delegatecall(self, caller: int, target: int):
        key = (caller, target)
        if key in self._reported_delegatecalls:
            return
        self._reported_delegatecalls.add(key)
        line = (
            f"[finding: opponent address {format_address(target)} reached via "
            f"delegatecall from {format_address(caller)}]"
        )
        if self.print_sink is not None:
            self.print_sink(line)
        else:
            print(line, flush=True)

    def _apply_pp_call(self, config: GameConfig, move: PPCallMove):
        frame = config.stack[-1]
        assert isinstance(frame, ProponentFrame) and isinstance(frame.result, StuckOn)
        event = frame.result.event
        parent_ctx = frame.ctx
        if event.value and event.kind != "delegatecall":
            if not self._transfer_or_violation(config, move.caller, event.target, event.value):
                self._resume_frame(config, frame, [0], b"")
                return
        config.trace.append(move)
        target_account = config.world.peek_account(event.target)
        obj = self.objects.object_for_id(target_account.code)
        if event.kind == "delegatecall":
            ctx = CallContext(
                self_address=parent_ctx.self_address,
                caller=parent_ctx.caller,
                origin=parent_ctx.origin,
                callvalue=parent_ctx.callvalue,
                calldata=event.input_data,
                gas_remaining=event.child_gas,
                code_object=target_account.code,
                code_address=event.target,
                memory=Memory(),
                is_static=parent_ctx.is_static,
            )
        else:
            caller = event.sender if event.kind == "impersonate" else parent_ctx.self_address
            ctx = CallContext(
                self_address=event.target,
                caller=caller,
                origin=parent_ctx.origin,
                callvalue=event.value,
                calldata=event.input_data,
                gas_remaining=event.child_gas,
                code_object=target_account.code,
                code_address=event.target,
                memory=Memory(),
                is_static=parent_ctx.is_static or event.kind == "staticcall",
            )
        config.stack.append(ProponentFrame(kind="ppcall", ctx=ctx, block=obj.code, origin_move=move))

    def _apply_create(self, config: GameConfig, move: CreateMove):
        frame = config.stack[-1]
        assert isinstance(frame, ProponentFrame) and isinstance(frame.result, StuckOn)
        event = frame.result.event
        assert isinstance(event, CreateEvent)
        if event.value:
            if not self._transfer_or_violation(
                config, frame.ctx.self_address, move.address, event.value
            ):
                self._resume_frame(config, frame, [0], b"")
                return
        config.trace.append(move)
        obj = self.objects.object_for_id(int.from_bytes(event.init_data[:32], "big"))
        ctx = CallContext(
            self_address=move.address,
            caller=frame.ctx.self_address,
            origin=frame.ctx.origin,
            callvalue=event.value,
            calldata=event.init_data[32:],
            gas_remaining=event.child_gas,
            code_object=obj.object_id,
            code_address=move.address,
            memory=Memory(),
            is_constructor=True,
        )
        config.stack.append(
            ProponentFrame(kind="create", ctx=ctx, block=obj.code, origin_move=move,
                           created_address=move.address)
        )

    def _frame_output(self, frame: ProponentFrame) -> bytes:
        return frame.result.data if isinstance(frame.result, HaltedReturn) else b""

    def _apply_pp_ret(self, config: GameConfig, move: PPRetMove):
        child = config.stack.pop()
        parent = config.stack[-1]
        assert isinstance(child, ProponentFrame) and isinstance(parent, ProponentFrame)
        assert isinstance(parent.result, StuckOn)
        event = parent.result.event
        data = self._frame_output(child)
        config.trace.append(move)
        parent.ctx.gas_remaining += child.ctx.gas_remaining  # unused child gas
        if isinstance(event, CreateEvent):
            deployed = self._install_code(config.world, child.created_address, data)
            if deployed is not None:
                config.world.addresses.add_proponent(child.created_address)
            # return data is cleared; the new address is the call's result
            self._resume_frame(config, parent, [child.created_address], b"")
        else:
            parent.ctx.memory.write(event.out_offset, data[: event.out_size])
            self._resume_frame(config, parent, [1], data)

    def _apply_po_ret(self, config: GameConfig, move: PORetMove):
        child = config.stack.pop()
        assert isinstance(child, ProponentFrame)
        parent = config.stack[-1]
        assert isinstance(parent, OpponentFrame)
        config.trace.append(move)
        # the opponent learns every value the call returned
        fn = getattr(child.origin_move, "fn", None) if child.origin_move else None
        data = self._frame_output(child)
        self._grow_domains_from_return(config, fn, data)

    def _grow_domains_from_return(self, config: GameConfig, fn: Optional[AbiFunction], data: bytes):
        if not data:
            return
        values = decode_return(fn.outputs, data) if fn is not None else None
        if values is None or any(isinstance(v, RawReturn) for v in values):
            self._grow_domains_from_calldata(config, data)
            return
        for abi_type, value in zip(fn.outputs or (), values):
            if abi_type.kind in ("uint", "bytesN"):
                config.domains.add_uint(value)
            elif abi_type.kind == "address":
                config.domains.add_address(value)
            elif abi_type.kind == "array":
                for element in value:
                    config.domains.add_uint(element)

    def _apply_o_ret(self, config: GameConfig, move: ORetMove):
        child = config.stack.pop()
        assert isinstance(child, OpponentFrame)
        parent = config.stack[-1]
        assert isinstance(parent, ProponentFrame) and isinstance(parent.result, StuckOn)
        event = parent.result.event
        config.trace.append(move)
        parent.ctx.gas_remaining += event.charged_gas  # opponent work is free
        parent.ctx.memory.write(event.out_offset, move.data[: event.out_size])
        self._resume_frame(config, parent, [1], move.data)

    def _apply_deploy(self, config: GameConfig, move: DeployMove):
        frame = config.stack[-1]
        assert isinstance(frame, ProponentFrame) and len(config.stack) == 1
        data = self._frame_output(frame)
        self._install_code(config.world, frame.created_address, data)
        config.world.addresses.add_proponent(frame.created_address)
        config.trace.append(move)
        config.stack.clear()
        config.stack.append(OpponentFrame(origin=None))

    # -- exploration --------------------------------------------------------

    def explore(self, config: Optional[GameConfig] = None) -> Verdict:
        params = self.params
        if config is None:
            config = self.initial_config()
        self._deadline = (
            time.monotonic() + params.deadline if params.deadline is not None else None
        )
        try:
            self._step_check()
            violation = self._dfs(config)
        except _DeadlineReached:
            return TimedOut(self.stats)
        if violation is not None:
            return violation
        return ExhaustedWithinBounds(self.stats)

    def _dfs(self, config: GameConfig) -> Optional[Violation]:
        while True:
            self._step_check()
            self.stats.configurations += 1
            moves = self.enumerate_moves(config)
            if not moves:
                self.stats.traces += 1
                if self.trace_sink is not None:
                    self.trace_sink(config)
                return None
            if len(moves) == 1:
                violation = self.apply_move(config, moves[0])
                if violation is not None:
                    return violation
                continue
            for move in moves:
                child = config.copy()
                violation = self.apply_move(child, move)
                if violation is None:
                    violation = self._dfs(child)
                if violation is not None:
                    return violation
            return None


class ReplayMismatch(Exception):
    """A recorded move is not available at its position during replay."""


def replay(engine: GameEngine, trace: list[Move]) -> Optional[str]:
    """Re-run a recorded move sequence from a fresh initial configuration.

    Internal reductions are driven implicitly (they are not part of traces);
    every recorded move must be offered by enumerate_moves at its turn.
    Returns the violation message the replay reproduces, or None.
    """
    config = engine.initial_config()
    pending = list(trace)
    while True:
        moves = engine.enumerate_moves(config)
        if not moves:
            return None
        if len(moves) == 1 and isinstance(moves[0], InternalMove):
            violation = engine.apply_move(config, moves[0])
        elif pending:
            recorded = pending.pop(0)
            if recorded not in moves:
                raise ReplayMismatch(f"recorded move unavailable: {format_move(recorded)}")
            violation = engine.apply_move(config, recorded)
        elif len(moves) == 1:
            # forced continuation past the last recorded move (a violation can
            # preempt the very move that would have been recorded next)
            violation = engine.apply_move(config, moves[0])
        else:
            return None
        if violation is not None:
            if pending:
                raise ReplayMismatch("violation fired before the trace was consumed")
            return violation.message


# -- opponent-chosen return helpers ----------------------------------------------


def _outputs_as_inputs(fn: AbiFunction) -> AbiFunction:
    return AbiFunction(
        name=fn.name,
        inputs=fn.outputs or (),
        outputs=(),
        state_mutability=fn.state_mutability,
        selector=fn.selector,
        canonical_signature=fn.canonical_signature,
    )


def _encode_outputs(types, values) -> bytes:
    from .abi import encode_arguments

    return encode_arguments(tuple(types), values)


# -- trace formatting --------------------------------------------------------------


def format_trace(verdict_or_trace, opponents=None, message=None) -> str:
    """Render a move sequence in the trace grammar, one move per line."""
    if isinstance(verdict_or_trace, Violation):
        trace = verdict_or_trace.trace
        opponents = verdict_or_trace.opponents
        message = verdict_or_trace.message
    else:
        trace = verdict_or_trace
    lines = [
        f"[new opponent address: <{format_address(a)}>]" for a in (opponents or [])
    ]
    for move in trace:
        lines.append(format_move(move))
    if message is not None:
        lines.append(f"ERROR! {message}")
    return "\n".join(lines)


def format_move(move: Move) -> str:
    if isinstance(move, DeployMove):
        return f"deploy(object:<{move.object_name}>, address:<{format_address(move.address)}>) ->"
    if isinstance(move, OCallMove):
        parts = [
            f"caller:<{format_address(move.caller)}>",
            f"target:<{move.target_name}>",
            f"sig:<{move.signature}>",
        ]
        if move.args:
            rendered = ", ".join(
                render_value(t, v) for t, v in zip(move.fn.inputs, move.args)
            ) if move.fn is not None else ", ".join(map(str, move.args))
            parts.append(f"args:<[{rendered}]>")
        parts.append(f"value:<{move.value}>")
        return f"o-call({', '.join(parts)}) ->"
    if isinstance(move, POCallMove):
        return (
            f"po-call(caller:<{format_address(move.caller)}>, "
            f"target:<{format_address(move.target)}>) ->"
        )
    if isinstance(move, PPCallMove):
        parts = [f"target:<{move.target_name}>", f"sig:<{move.signature}>"]
        if move.args:
            if move.fn is not None:
                rendered = ", ".join(
                    render_value(t, v) for t, v in zip(move.fn.inputs, move.args)
                )
            else:
                rendered = ", ".join(render_value(None, v) for v in move.args)
            parts.append(f"args:<[{rendered}]>")
        return f"pp-call({', '.join(parts)}) ->"
    if isinstance(move, CreateMove):
        return (
            f"create(object:<{move.object_name}>, "
            f"address:<{format_address(move.address)}>) ->"
        )
    if isinstance(move, ORetMove):
        return f"o-ret([{_render_raw_words(move.data)}]) ->"
    if isinstance(move, PORetMove):
        return f"po-ret([{', '.join(render_value(None, v) for v in move.values)}]) ->"
    if isinstance(move, PPRetMove):
        return f"pp-ret([{', '.join(render_value(None, v) for v in move.values)}]) ->"
    if isinstance(move, OWaitMove):
        return "o-wait ->"
    raise AssertionError(f"unknown move {move!r}")


def _render_raw_words(data: bytes) -> str:
    if not data:
        return ""
    if len(data) % 32 == 0:
        return ", ".join(
            format_word(int.from_bytes(data[i : i + 32], "big"))
            for i in range(0, len(data), 32)
        )
    return "0x" + data.hex()
