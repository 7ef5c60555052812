"""Command-line entry point: flag parsing, pipeline wiring, exit codes.

Exit codes: 0 exhausted within bounds, 1 violation found, 2 input error,
3 deadline reached.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .abi import parse_abi
from .engine import (
    CreateMove,
    DeployMove,
    ExhaustedWithinBounds,
    GameEngine,
    Move,
    OCallMove,
    ORetMove,
    OWaitMove,
    POCallMove,
    PORetMove,
    PPCallMove,
    PPRetMove,
    TimedOut,
    Violation,
    format_move,
    format_trace,
)
from .errors import InputError
from .params import Params
from .preprocess import inject_hooks, link_libraries, strip_checked_arithmetic
from .state import DEFAULT_ORACLE_SEED, KeccakOracle
from .syntax import parse_object
from .words import format_address

_DURATION_UNITS = {"s": 1, "m": 60, "h": 3600, "d": 86400}


def parse_int(text: str) -> int:
    return int(text, 0)


def parse_duration(text: str) -> int:
    """Seconds, with optional s/m/h/d suffix (e.g. 7d, 12h, 604800)."""
    text = text.strip()
    if text and text[-1].lower() in _DURATION_UNITS:
        return parse_int(text[:-1]) * _DURATION_UNITS[text[-1].lower()]
    return parse_int(text)


def parse_deadline(text: str) -> float:
    text = text.strip()
    if text and text[-1].lower() in _DURATION_UNITS:
        return float(text[:-1]) * _DURATION_UNITS[text[-1].lower()]
    return float(text)


def parse_int_list(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(parse_int(part) for part in text.split(","))


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="yul-gamecheck",
        description=(
            "Bounded game-semantics checker for the EVM dialect of Yul: "
            "exhaustively explores environment interactions within bounds and "
            "reports a violating trace when an assertion (or the implicit "
            "insufficient-balance check) is reachable."
        ),
    )
    parser.add_argument("yul_file", nargs="?", help="compiled Yul source (top-level object)")
    parser.add_argument("abi_file", nargs="?", help="ABI JSON for the contracts in the tree")

    calls = parser.add_argument_group("opponent call settings")
    calls.add_argument("--call-bound", type=parse_int, default=2, metavar="N",
                       help="calls allowed per proponent function per trace (default 2)")
    calls.add_argument("--stack-bound", type=parse_int, default=3, metavar="N",
                       help="open opponent-to-proponent calls (default 3)")
    calls.add_argument("--opponent-addresses", type=parse_int, default=1, metavar="N",
                       help="number of opponent-controlled addresses (default 1)")
    calls.add_argument("--opponent-balance", type=parse_int, default=10 * 10**18, metavar="WEI",
                       help="starting balance per opponent address (default 10 ETH)")
    calls.add_argument("--opponent-spending", type=parse_int, default=1000, metavar="WEI",
                       help="value the opponent may send per payable call (default 1000)")
    calls.add_argument("--uint-domain", type=parse_int_list, default=(0, 1, 1000), metavar="CSV",
                       help="initial uint256/bytes32 knowledge (default 0,1,1000)")
    calls.add_argument("--address-domain", type=parse_int_list, default=(), metavar="CSV",
                       help="initial address knowledge (default empty)")
    calls.add_argument("--opponent-return-values", action="store_true",
                       help="let the opponent choose return values from its domains")

    timing = parser.add_argument_group("opponent time settings")
    timing.add_argument("--wait-time", type=parse_duration, default=7 * 86400, metavar="DUR",
                        help="time added per wait move (default 7d)")
    timing.add_argument("--no-waiting", action="store_true", help="disable wait moves")
    timing.add_argument("--wait-first", action="store_true",
                        help="explore waiting before other moves")
    timing.add_argument("--max-wait", type=parse_duration, default=22 * 86400, metavar="DUR",
                        help="bound on total wait per trace (default 22d)")

    deploy = parser.add_argument_group("deployment transaction settings")
    deploy.add_argument("--deploy-gas", type=parse_int, default=30000 * 10**18, metavar="GAS",
                        help="gas budget per transaction (default 30000e18)")
    deploy.add_argument("--deploy-address", type=parse_int, default=0x0102030405060708090A,
                        metavar="ADDR", help="address of the top-level contract")
    deploy.add_argument("--deploy-value", type=parse_int, default=123456789 * 10**18,
                        metavar="WEI", help="ETH sent with the deployment transaction")

    pipeline = parser.add_argument_group("pipeline and output")
    pipeline.add_argument("--legacy", action="store_true",
                          help="strip compiler overflow checks (older-contract semantics)")
    pipeline.add_argument("--only", action="append", default=[], metavar="C.SIG[=N]",
                          help="restrict the exploration ABI to this Contract.signature "
                               "(repeatable; =N overrides its call bound)")
    pipeline.add_argument("--deadline", type=parse_deadline, default=None, metavar="DUR",
                          help="wall-clock budget; exceeded -> exit 3")
    pipeline.add_argument("--json", action="store_true",
                          help="machine-readable verdict on stdout")
    return parser


def params_from_args(args: argparse.Namespace) -> Params:
    seed = None
    env_seed = os.environ.get("YULGC_SEED")
    if env_seed:
        seed = parse_int(env_seed)
    return Params(
        call_bound=args.call_bound,
        stack_bound=args.stack_bound,
        opponent_address_count=args.opponent_addresses,
        opponent_balance=args.opponent_balance,
        opponent_spending=args.opponent_spending,
        uint256_domain=args.uint_domain,
        address_domain=args.address_domain,
        opponent_return_values=args.opponent_return_values,
        wait_time=args.wait_time,
        no_waiting=args.no_waiting,
        wait_first=args.wait_first,
        max_wait=args.max_wait,
        deploy_gas=args.deploy_gas,
        deploy_address=args.deploy_address,
        deploy_value=args.deploy_value,
        legacy_mode=args.legacy,
        only=tuple(args.only),
        deadline=args.deadline,
        json_output=args.json,
        seed=seed,
    )


def parse_params(argv: list[str]) -> Params:
    """Params from flags alone; unspecified flags take their defaults."""
    return params_from_args(build_arg_parser().parse_args(argv))


def main(yul_path: str, abi_path: str, params: Params) -> int:
    try:
        yul_text = Path(yul_path).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read Yul input: {exc}", file=sys.stderr)
        return 2
    try:
        abi_text = Path(abi_path).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read ABI input: {exc}", file=sys.stderr)
        return 2

    try:
        root = parse_object(yul_text)
        root = inject_hooks(root)
        if params.legacy_mode:
            root = strip_checked_arithmetic(root)
        root, link_plan = link_libraries(root)
        explore_abi = parse_abi(abi_text)
        for warning in explore_abi.warnings:
            print(f"warning: {warning}", file=sys.stderr)
        if params.only:
            explore_abi.restrict(list(params.only))
        oracle = KeccakOracle(params.seed if params.seed is not None else DEFAULT_ORACLE_SEED)
        engine = GameEngine(root, params, explore_abi, link_plan, oracle=oracle)
        verdict = engine.explore()
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if params.json_output:
        print(json.dumps(verdict_to_json(verdict, engine), indent=2))
    else:
        print_verdict(verdict, engine)
    if isinstance(verdict, Violation):
        return 1
    if isinstance(verdict, TimedOut):
        return 3
    return 0


def print_verdict(verdict, engine: GameEngine) -> None:
    stats = engine.stats
    if isinstance(verdict, Violation):
        print(format_trace(verdict))
    elif isinstance(verdict, ExhaustedWithinBounds):
        print(
            f"no violation found within bounds: explored {stats.traces} trace(s), "
            f"{stats.configurations} configuration(s), {stats.o_calls} opponent call(s)"
        )
    else:
        assert isinstance(verdict, TimedOut)
        print(
            f"deadline reached before exhausting bounds: explored {stats.traces} trace(s), "
            f"{stats.configurations} configuration(s), {stats.o_calls} opponent call(s)"
        )


def move_to_json(move: Move) -> dict:
    base = {"text": format_move(move)}
    if isinstance(move, DeployMove):
        base.update(move="deploy", object=move.object_name, address=format_address(move.address))
    elif isinstance(move, OCallMove):
        base.update(
            move="o-call",
            caller=format_address(move.caller),
            target=move.target_name,
            target_address=format_address(move.target),
            sig=move.signature,
            args=[_json_value(v) for v in move.args],
            value=move.value,
        )
    elif isinstance(move, POCallMove):
        base.update(
            move="po-call",
            kind=move.kind,
            caller=format_address(move.caller),
            target=format_address(move.target),
        )
    elif isinstance(move, PPCallMove):
        base.update(
            move="pp-call",
            kind=move.kind,
            caller=format_address(move.caller),
            target=move.target_name,
            sig=move.signature,
            args=[_json_value(v) for v in move.args],
            value=move.value,
        )
    elif isinstance(move, CreateMove):
        base.update(
            move=move.kind, object=move.object_name, address=format_address(move.address),
            value=move.value,
        )
    elif isinstance(move, ORetMove):
        base.update(move="o-ret", data="0x" + move.data.hex())
    elif isinstance(move, PORetMove):
        base.update(move="po-ret", values=[_json_value(v) for v in move.values])
    elif isinstance(move, PPRetMove):
        base.update(move="pp-ret", values=[_json_value(v) for v in move.values])
    elif isinstance(move, OWaitMove):
        base.update(move="o-wait")
    return base


def _json_value(value):
    if isinstance(value, bytes):
        return "0x" + value.hex()
    if isinstance(value, tuple):
        return [_json_value(v) for v in value]
    if hasattr(value, "data"):  # RawReturn
        return "0x" + value.data.hex()
    return value


def verdict_to_json(verdict, engine: GameEngine) -> dict:
    stats = engine.stats
    doc = {
        "stats": {
            "traces": stats.traces,
            "configurations": stats.configurations,
            "o_calls": stats.o_calls,
        },
    }
    if isinstance(verdict, Violation):
        doc["verdict"] = "violation"
        doc["message"] = verdict.message
        doc["opponents"] = [format_address(a) for a in verdict.opponents]
        doc["trace"] = [move_to_json(m) for m in verdict.trace]
    elif isinstance(verdict, ExhaustedWithinBounds):
        doc["verdict"] = "exhausted-within-bounds"
    else:
        doc["verdict"] = "timed-out"
    return doc


def entrypoint() -> None:
    parser = build_arg_parser()
    args = parser.parse_args()
    if not args.yul_file or not args.abi_file:
        parser.error("both a Yul file and an ABI JSON file are required")
    sys.exit(main(args.yul_file, args.abi_file, params_from_args(args)))


if __name__ == "__main__":
    entrypoint()
