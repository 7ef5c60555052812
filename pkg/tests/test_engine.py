import pytest

from yulgamecheck.engine import (
    CreateMove,
    DeployMove,
    ExhaustedWithinBounds,
    GameEngine,
    OCallMove,
    ORetMove,
    OWaitMove,
    POCallMove,
    PORetMove,
    PPCallMove,
    TimedOut,
    Violation,
    format_move,
    format_trace,
    opponent_address,
)
from yulgamecheck.params import Params
from yulgamecheck.state import KeccakOracle

from conftest import bank_params, build_engine


def moves_of(trace, kind):
    return [m for m in trace if isinstance(m, kind)]


# -- initial configuration ------------------------------------------------------


def test_opponent_address_matches_paper_convention():
    assert opponent_address(0) == int.from_bytes(b"OP_ADDRESS_0", "big")
    assert hex(opponent_address(0)) == "0x4f505f414444524553535f30"
    assert opponent_address(1) != opponent_address(0)


def test_initial_config_defaults():
    engine = build_engine("counter.yul", "counter.abi.json", Params())
    config = engine.initial_config()
    assert engine.opponents == [opponent_address(0)]
    assert config.world.balance(opponent_address(0)) == 10 * 10**18
    assert config.domains.uint_bytes32 == [0, 1, 1000]
    frame = config.stack[0]
    assert frame.created_address == 0x0102030405060708090A
    assert frame.ctx.callvalue == 123456789 * 10**18
    assert frame.ctx.calldata == b""


def test_opponent_count_parameter():
    engine = build_engine(
        "counter.yul", "counter.abi.json", Params(opponent_address_count=3)
    )
    assert engine.opponents == [opponent_address(i) for i in range(3)]


# -- core detection -------------------------------------------------------------


def explore(yul, abi, params, **kw):
    engine = build_engine(yul, abi, params, **kw)
    return engine, engine.explore()


def test_vulnerable_bank_violation_and_trace_shape():
    engine, verdict = explore("bank_vulnerable.yul", "bank.abi.json", bank_params())
    assert isinstance(verdict, Violation)
    assert "has insufficient balance" in verdict.message
    o_calls = moves_of(verdict.trace, OCallMove)
    po_calls = moves_of(verdict.trace, POCallMove)
    assert po_calls, "the violation is reached through a callback"
    # a withdraw o-call nested inside the po-call (reentrancy witness)
    po_index = verdict.trace.index(po_calls[0])
    nested = [
        m for m in verdict.trace[po_index + 1 :]
        if isinstance(m, OCallMove) and m.signature == "withdraw()"
    ]
    assert nested
    assert verdict.trace[-1] == nested[0]  # the reentrant call triggers it


def test_patched_bank_exhausts_with_zero_violations():
    engine, verdict = explore("bank_patched.yul", "bank.abi.json", bank_params())
    assert isinstance(verdict, ExhaustedWithinBounds)
    assert engine.stats.traces > 0


def test_reveal_gates_the_assertion():
    engine, verdict = explore(
        "gate_revealing.yul", "gate.abi.json", bank_params(no_waiting=True)
    )
    assert isinstance(verdict, Violation)
    assert verdict.message == "[ASSERTION VIOLATION]"
    # the violating open() call carries the revealed oracle hash
    last = verdict.trace[-1]
    assert isinstance(last, OCallMove) and last.signature == "open(uint256)"
    gate_hash = engine.oracle.digest(b"Nu Token")
    assert last.args == (gate_hash,)

    _, verdict = explore("gate.yul", "gate.abi.json", bank_params(no_waiting=True))
    assert isinstance(verdict, ExhaustedWithinBounds)


def test_seeding_the_domain_substitutes_for_reveal():
    gate_hash = KeccakOracle().digest(b"Nu Token")
    _, verdict = explore(
        "gate.yul",
        "gate.abi.json",
        bank_params(no_waiting=True, uint256_domain=(0, 1, 1000, gate_hash)),
    )
    assert isinstance(verdict, Violation)


def test_deadline_zero_times_out():
    _, verdict = explore("counter.yul", "counter.abi.json", bank_params(deadline=0))
    assert isinstance(verdict, TimedOut)


# -- enumeration ----------------------------------------------------------------


def test_depth_one_transaction_count_is_closed_form():
    # f(uint256) over a 3-value domain plus g(): 3 + 1 first moves
    params = bank_params(no_waiting=True, call_bound=1)
    engine, verdict = explore("counter.yul", "counter.abi.json", params)
    assert isinstance(verdict, ExhaustedWithinBounds)
    assert engine.stats.first_transaction_o_calls == 4


def test_enumerate_moves_order_and_count():
    params = bank_params(no_waiting=True)
    engine = build_engine("counter.yul", "counter.abi.json", params)
    config = engine.initial_config()
    # drive to the first opponent configuration
    while not isinstance(config.stack[-1], type(config.stack[-1])) or True:
        moves = engine.enumerate_moves(config)
        if len(moves) == 1 and not isinstance(moves[0], OCallMove):
            assert engine.apply_move(config, moves[0]) is None
            continue
        break
    moves = engine.enumerate_moves(config)
    assert [type(m).__name__ for m in moves] == ["OCallMove"] * 4
    assert [m.signature for m in moves] == ["f(uint256)"] * 3 + ["g()"]
    assert [m.args for m in moves[:3]] == [(0,), (1,), (1000,)]


def drive_to_top_level(engine, config):
    while True:
        moves = engine.enumerate_moves(config)
        if moves and not isinstance(moves[0], (OCallMove, OWaitMove)):
            assert engine.apply_move(config, moves[0]) is None
            continue
        return config


def test_wait_moves_only_at_sole_frame_and_ordering():
    engine = build_engine("counter.yul", "counter.abi.json", bank_params())
    config = drive_to_top_level(engine, engine.initial_config())
    moves = engine.enumerate_moves(config)
    assert isinstance(moves[-1], OWaitMove)  # wait last by default
    assert not any(isinstance(m, ORetMove) for m in moves)

    engine_first = build_engine(
        "counter.yul", "counter.abi.json", bank_params(wait_first=True)
    )
    config = drive_to_top_level(engine_first, engine_first.initial_config())
    assert isinstance(engine_first.enumerate_moves(config)[0], OWaitMove)


def test_no_waiting_removes_wait_moves():
    engine = build_engine("counter.yul", "counter.abi.json", bank_params(no_waiting=True))
    config = drive_to_top_level(engine, engine.initial_config())
    assert not any(
        isinstance(m, OWaitMove) for m in engine.enumerate_moves(config)
    )


def test_nested_opponent_frame_offers_oret_not_wait():
    engine = build_engine("bank_vulnerable.yul", "bank.abi.json", bank_params())
    config = drive_to_top_level(engine, engine.initial_config())
    deposit = next(
        m for m in engine.enumerate_moves(config)
        if isinstance(m, OCallMove) and m.signature == "deposit()" and m.value == 1000
    )
    assert engine.apply_move(config, deposit) is None
    drive_to_top_level(engine, config)
    withdraw = next(
        m for m in engine.enumerate_moves(config)
        if isinstance(m, OCallMove) and m.signature == "withdraw()"
    )
    assert engine.apply_move(config, withdraw) is None
    # run until the proponent po-calls the opponent
    while True:
        moves = engine.enumerate_moves(config)
        if isinstance(moves[0], POCallMove):
            assert engine.apply_move(config, moves[0]) is None
            break
        assert engine.apply_move(config, moves[0]) is None
    nested = engine.enumerate_moves(config)
    assert any(isinstance(m, ORetMove) for m in nested)
    assert not any(isinstance(m, OWaitMove) for m in nested)
    # the zero-filled return matches the caller's requested return size (0)
    oret = next(m for m in nested if isinstance(m, ORetMove))
    assert oret.data == b""


def test_stack_bound_caps_open_ocalls():
    params = bank_params(stack_bound=1)
    engine, verdict = explore("bank_vulnerable.yul", "bank.abi.json", params)
    # reentrancy needs two open o-calls; with the bound at 1 it cannot fire
    assert isinstance(verdict, ExhaustedWithinBounds)
    assert engine.stats.max_open_ocalls == 1


def test_call_bound_enforced_per_address_and_selector():
    seen = {}

    def on_move(config, move):
        if isinstance(move, OCallMove):
            key = (move.target, move.signature)
            seen[key] = max(seen.get(key, 0), config.counters[key])

    engine = build_engine("bank_vulnerable.yul", "bank.abi.json", bank_params())
    engine.on_move = on_move
    engine.explore()
    assert seen and all(count <= 2 for count in seen.values())


# -- backtracking ------------------------------------------------------------------


def test_backtracking_restores_the_snapshot():
    engine = build_engine("counter.yul", "counter.abi.json", bank_params(no_waiting=True))
    config = drive_to_top_level(engine, engine.initial_config())
    snapshot = config.copy()
    move = engine.enumerate_moves(config)[0]
    child = config.copy()
    assert engine.apply_move(child, move) is None
    # the original is untouched by exploring the child
    assert config.world == snapshot.world
    assert config.domains == snapshot.domains
    assert config.counters == snapshot.counters
    assert config.trace == snapshot.trace
    assert engine.enumerate_moves(config) == engine.enumerate_moves(snapshot)


def test_domain_growth_rolls_back_between_branches():
    engine = build_engine(
        "gate_revealing.yul", "gate.abi.json", bank_params(no_waiting=True)
    )
    config = drive_to_top_level(engine, engine.initial_config())
    probe = next(
        m for m in engine.enumerate_moves(config) if m.signature == "probe()"
    )
    child = config.copy()
    engine.apply_move(child, probe)
    drive_to_top_level(engine, child)
    # the PO-ret completed: within the probe branch the hash is known
    gate_hash = engine.oracle.digest(b"Nu Token")
    assert gate_hash in child.domains.uint_bytes32
    assert gate_hash not in config.domains.uint_bytes32


# -- wait accounting ------------------------------------------------------------


def test_wait_time_and_max_wait():
    waits_per_trace = []

    engine = build_engine("counter.yul", "counter.abi.json", bank_params(call_bound=0))
    engine.trace_sink = lambda cfg: waits_per_trace.append(
        sum(1 for m in cfg.trace if isinstance(m, OWaitMove))
    )
    verdict = engine.explore()
    assert isinstance(verdict, ExhaustedWithinBounds)
    # bounds: floor(22 days / 7 days) = 3 waits; call bound 0 leaves only waits
    assert max(waits_per_trace) == 3


def test_wait_advances_world_time():
    engine = build_engine("counter.yul", "counter.abi.json", bank_params())
    config = drive_to_top_level(engine, engine.initial_config())
    engine.apply_move(config, OWaitMove())
    assert config.world.time == 7 * 86400
    assert config.total_wait == 7 * 86400


# -- create / library / delegate flows ------------------------------------------------


def test_factory_create_deploys_child_and_finds_reentrancy():
    params = bank_params(deploy_value=100, no_waiting=True)
    engine, verdict = explore("factory.yul", "factory.abi.json", params)
    assert isinstance(verdict, Violation)
    create = moves_of(verdict.trace, CreateMove)[0]
    assert create.object_name == "SimpleBank_7"
    assert create.address == 0xA000000000000000000000000000000000000001
    assert create.value == 5
    deploy = moves_of(verdict.trace, DeployMove)[0]
    assert deploy.object_name == "Deployer_62_deployed"
    # the violating sender is the created child, which held only 5 wei
    assert "0xa000000000000000000000000000000000000001" in verdict.message


def test_library_deployed_and_linked():
    engine = build_engine("linked.yul", "linked.abi.json", bank_params(no_waiting=True))
    config = drive_to_top_level(engine, engine.initial_config())
    lib_address = config.world.link_table["src/Math.sol:Math"]
    assert config.world.account(lib_address).code is not None
    # set(1000): the library doubles in the caller's storage context
    set_move = next(
        m for m in engine.enumerate_moves(config)
        if isinstance(m, OCallMove) and m.signature == "set(uint256)" and m.args == (1000,)
    )
    engine.apply_move(config, set_move)
    drive_to_top_level(engine, config)
    app = config.world.peek_account(0x0102030405060708090A)
    assert app.storage[7] == 2000
    assert config.world.account(lib_address).storage == {}
    pp_calls = moves_of(config.trace, PPCallMove)
    assert pp_calls and pp_calls[0].kind == "delegatecall"
    # Math has no exploration-ABI entry, so the call renders by raw selector
    assert pp_calls[0].signature == "0xeee97206"
    assert pp_calls[0].target_name == "Math_88_deployed"


def test_library_address_return_grows_address_domain():
    engine = build_engine("linked.yul", "linked.abi.json", bank_params(no_waiting=True))
    config = drive_to_top_level(engine, engine.initial_config())
    lib_address = config.world.link_table["src/Math.sol:Math"]
    get_move = next(
        m for m in engine.enumerate_moves(config)
        if isinstance(m, OCallMove) and m.signature == "get()"
    )
    engine.apply_move(config, get_move)
    drive_to_top_level(engine, config)
    po_ret = moves_of(config.trace, PORetMove)[-1]
    assert po_ret.values == (lib_address,)
    assert lib_address in config.domains.address


def test_delegatecall_to_opponent_reported_once():
    findings = []
    engine = build_engine(
        "proxy.yul", "proxy.abi.json", bank_params(no_waiting=True),
        print_sink=findings.append,
    )
    verdict = engine.explore()
    assert isinstance(verdict, ExhaustedWithinBounds)
    delegate_findings = [f for f in findings if "delegatecall" in f]
    assert len(delegate_findings) == 1
    assert "0x4f505f414444524553535f30" in delegate_findings[0]


# -- trace formatting -----------------------------------------------------------


def test_format_trace_matches_paper_grammar():
    engine, verdict = explore("bank_vulnerable.yul", "bank.abi.json", bank_params())
    text = format_trace(verdict)
    lines = text.splitlines()
    assert lines[0] == "[new opponent address: <0x4f505f414444524553535f30>]"
    assert lines[1] == (
        "deploy(object:<SimpleBank_7_deployed>, address:<0x102030405060708090a>) ->"
    )
    assert any(
        line.startswith("o-call(caller:<0x4f505f414444524553535f30>, "
                        "target:<SimpleBank_7_deployed>, sig:<deposit()>")
        for line in lines
    )
    assert lines[-1].startswith("ERROR! sender 0x102030405060708090a has insufficient balance")
    assert all(line.endswith("->") for line in lines[1:-1])


def test_format_move_shapes():
    assert format_move(OWaitMove()) == "o-wait ->"
    assert format_move(ORetMove(b"")) == "o-ret([]) ->"
    assert format_move(ORetMove(b"\0" * 32)) == "o-ret([0]) ->"
    assert (
        format_move(DeployMove("A_1_deployed", 0x0102030405060708090A))
        == "deploy(object:<A_1_deployed>, address:<0x102030405060708090a>) ->"
    )
    assert (
        format_move(POCallMove(0xAA, 0xBB, "call"))
        == "po-call(caller:<0xaa>, target:<0xbb>) ->"
    )


def test_violation_message_format_matches_paper():
    engine, verdict = explore("bank_vulnerable.yul", "bank.abi.json", bank_params())
    assert verdict.message == (
        "sender 0x102030405060708090a has insufficient balance (0) to transfer 1000"
    )


# -- harness opcodes end-to-end ----------------------------------------------------


def test_ext_fund_and_impersonate_through_the_game():
    engine = build_engine("harness.yul", "harness.abi.json", bank_params(no_waiting=True))
    config = drive_to_top_level(engine, engine.initial_config())
    total_before = config.world.total_balance()
    fund = next(
        m for m in engine.enumerate_moves(config)
        if isinstance(m, OCallMove) and m.signature == "fundme()"
    )
    assert engine.apply_move(config, fund) is None
    drive_to_top_level(engine, config)
    harness = config.world.peek_account(0x0102030405060708090A)
    assert harness.storage.get(9) == 1  # the impersonated admin passed the guard
    assert config.world.balance(0x907060) == 1000  # EXT_FUND minted
    assert config.world.total_balance() == total_before + 1000


def test_admin_guard_holds_against_plain_opponent_calls():
    engine = build_engine("harness.yul", "harness.abi.json", bank_params(no_waiting=True))
    verdict = engine.explore()
    assert isinstance(verdict, ExhaustedWithinBounds)

    engine = build_engine("harness.yul", "harness.abi.json", bank_params(no_waiting=True))
    config = drive_to_top_level(engine, engine.initial_config())
    direct = next(
        m for m in engine.enumerate_moves(config)
        if isinstance(m, OCallMove) and m.signature == "adminSet()"
    )
    assert engine.apply_move(config, direct) is None
    drive_to_top_level(engine, config)
    harness = config.world.peek_account(0x0102030405060708090A)
    assert harness.storage.get(9) is None  # the direct call reverted


def test_opponent_chosen_returns_unlock_the_airdrop_assert():
    params = bank_params(no_waiting=True)
    _, verdict = explore("airdrop.yul", "airdrop.abi.json", params)
    assert isinstance(verdict, ExhaustedWithinBounds)
    params = bank_params(no_waiting=True, opponent_return_values=True)
    engine, verdict = explore("airdrop.yul", "airdrop.abi.json", params)
    assert isinstance(verdict, Violation)
    assert verdict.message == "[ASSERTION VIOLATION]"
    # both callbacks were answered with the revealed oracle hash
    gate_hash = engine.oracle.digest(b"Nu Token")
    rets = moves_of(verdict.trace, ORetMove)
    assert [r.data for r in rets] == [gate_hash.to_bytes(32, "big")] * 2


def test_gas_budget_cuts_runaway_loops():
    params = bank_params(no_waiting=True, deploy_gas=200_000)
    engine, verdict = explore("spin.yul", "spin.abi.json", params)
    assert isinstance(verdict, ExhaustedWithinBounds)
    assert engine.stats.traces == 1  # the single spin() branch dies on gas


def test_legacy_mode_changes_the_verdict():
    top = (1 << 256) - 1
    params = bank_params(no_waiting=True, uint256_domain=(0, 1, top))
    _, verdict = explore("overflow.yul", "overflow.abi.json", params)
    assert isinstance(verdict, ExhaustedWithinBounds)  # the panic path reverts
    params = bank_params(no_waiting=True, uint256_domain=(0, 1, top), legacy_mode=True)
    _, verdict = explore("overflow.yul", "overflow.abi.json", params)
    assert isinstance(verdict, Violation)  # wrapped add reaches the assert


def test_depth_one_count_scales_with_callers_and_values():
    # two opponent callers, payable deposit gets two value choices:
    # 2 callers x (deposit x {0, 1000} + withdraw x {0}) = 6
    params = bank_params(no_waiting=True, opponent_address_count=2, call_bound=1)
    engine, _ = explore("bank_vulnerable.yul", "bank.abi.json", params)
    assert engine.stats.first_transaction_o_calls == 6


def test_insufficient_opponent_balance_filters_value_moves():
    params = bank_params(no_waiting=True, opponent_balance=0)
    engine = build_engine("bank_vulnerable.yul", "bank.abi.json", params)
    config = drive_to_top_level(engine, engine.initial_config())
    values = {
        m.value for m in engine.enumerate_moves(config) if isinstance(m, OCallMove)
    }
    assert values == {0}


# -- determinism -------------------------------------------------------------------


def test_exploration_is_deterministic():
    runs = []
    for _ in range(2):
        engine, verdict = explore("bank_vulnerable.yul", "bank.abi.json", bank_params())
        runs.append((format_trace(verdict), engine.stats))
    assert runs[0][0] == runs[1][0]
    assert runs[0][1] == runs[1][1]
