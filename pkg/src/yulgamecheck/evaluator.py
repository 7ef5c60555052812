"""Yul interpreter: runs a code block until it halts, faults, or gets stuck
on a control-passing opcode.

The interpreter is an explicit machine (work stack + value stack + scope
stack) rather than a recursive walker, so a frame suspended on a call can be
value-copied when the game engine forks exploration branches, then resumed
independently in each branch.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .dialect import (
    RETURN,
    REVERT,
    STOP,
    AssertEvent,
    CallContext,
    ControlEvent,
    Halt,
    StrArg,
    Stuck,
    Values,
    exec_opcode,
)
from .dialect import SIGNATURES
from .errors import EvalFault
from .state import WorldState
from .syntax.nodes import (
    Assignment,
    Block,
    Break,
    Continue,
    ExpressionStatement,
    ForLoop,
    FunctionCall,
    FunctionDefinition,
    Identifier,
    If,
    Leave,
    Literal,
    Switch,
    VariableDeclaration,
)

STEP_CHECK_INTERVAL = 4096


# -- run results ---------------------------------------------------------------


@dataclass
class HaltedStop:
    pass


@dataclass
class HaltedReturn:
    data: bytes


@dataclass
class Reverted:
    data: bytes


@dataclass
class OutOfGas:
    reason: str = "out of gas"


@dataclass
class AssertViolation:
    pass


@dataclass
class StuckOn:
    event: ControlEvent
    machine: "Machine"
    n_results: int


RunResult = object  # union of the six classes above


@dataclass
class FnVal:
    node: FunctionDefinition
    chain: tuple  # (dict name -> FnVal, parent chain | None)


class Scope:
    __slots__ = ("vars", "chain", "barrier")

    def __init__(self, vars: dict, chain, barrier: bool):
        self.vars = vars
        self.chain = chain
        self.barrier = barrier


class Machine:
    """Copyable interpreter state for one message execution."""

    __slots__ = ("ctx", "scopes", "value_stack", "work")

    def __init__(self, ctx: CallContext):
        self.ctx = ctx
        self.scopes: list[Scope] = []
        self.value_stack: list[int] = []
        self.work: list[tuple] = []

    def copy(self, new_ctx: CallContext) -> "Machine":
        dup = Machine.__new__(Machine)
        dup.ctx = new_ctx
        dup.scopes = [Scope(dict(s.vars), s.chain, s.barrier) for s in self.scopes]
        dup.value_stack = list(self.value_stack)
        dup.work = list(self.work)
        return dup

    # -- scope helpers ----------------------------------------------------

    def _chain(self):
        return self.scopes[-1].chain if self.scopes else None

    def lookup(self, name: str) -> int:
        for scope in reversed(self.scopes):
            if name in scope.vars:
                return scope.vars[name]
            if scope.barrier:
                break
        raise EvalFault(f"unbound identifier {name!r}")

    def set_var(self, name: str, value: int) -> None:
        for scope in reversed(self.scopes):
            if name in scope.vars:
                scope.vars[name] = value
                return
            if scope.barrier:
                break
        raise EvalFault(f"assignment to undeclared identifier {name!r}")

    def lookup_function(self, name: str) -> Optional[FnVal]:
        chain = self._chain()
        while chain is not None:
            fns, chain = chain
            if name in fns:
                return fns[name]
        return None

    def enter_block(self, block: Block) -> None:
        chain = self._chain()
        # hoist function definitions: visible throughout the block
        fns = {}
        for stmt in block.statements:
            if isinstance(stmt, FunctionDefinition):
                if stmt.name in fns:
                    raise EvalFault(f"duplicate function {stmt.name!r} in block")
                fns[stmt.name] = None
        if fns:
            chain = (fns, chain)
            for stmt in block.statements:
                if isinstance(stmt, FunctionDefinition):
                    fns[stmt.name] = FnVal(stmt, chain)
        self.scopes.append(Scope({}, chain, False))
        self.work.append(("pop_scope",))
        self.work.append(("stmts", block.statements, 0))

    def enter_for_loop(self, loop: ForLoop) -> None:
        """The init block's scope encloses condition, post and body, so the
        loop driver is spliced in just above the init scope's pop."""
        self.enter_block(loop.init)
        self.work.insert(len(self.work) - 1, ("for_cond", loop))

    # -- unwinding for break / continue / leave ----------------------------

    def _unwind(self, until: str):
        while self.work:
            item = self.work.pop()
            tag = item[0]
            if tag == "pop_scope":
                self.scopes.pop()
            elif tag == until:
                return item
            elif tag == "fn_return":
                raise EvalFault(f"control escaped a function body seeking {until!r}")
        raise EvalFault(f"no enclosing target for {until!r}")

    def _finish_function(self, fn: FunctionDefinition) -> None:
        scope = self.scopes.pop()
        if not scope.barrier:
            raise EvalFault("function return crossed a block scope")
        self.value_stack.extend(scope.vars[name] for name in fn.returns)


def run(
    block: Block,
    ctx: CallContext,
    world: WorldState,
    step_check: Optional[Callable[[], None]] = None,
) -> RunResult:
    """Evaluate a code block to its next RunResult."""
    machine = Machine(ctx)
    machine.enter_block(block)
    return drive(machine, world, step_check)


def resume(
    resume_point: StuckOn,
    result_values: list[int],
    returndata: Optional[bytes],
    ctx: CallContext,
    world: WorldState,
    step_check: Optional[Callable[[], None]] = None,
) -> RunResult:
    """Continue a stuck frame: the suspended builtin call evaluates to
    ``result_values`` and, for message calls, returndata is replaced."""
    machine = resume_point.machine
    if len(result_values) != resume_point.n_results:
        raise EvalFault(
            f"resume expected {resume_point.n_results} value(s), got {len(result_values)}"
        )
    machine.ctx = ctx
    machine.value_stack.extend(result_values)
    if returndata is not None:
        ctx.returndata = bytes(returndata)
    return drive(machine, world, step_check)


def drive(machine: Machine, world: WorldState, step_check=None) -> RunResult:
    """Perform as many reductions as possible; running off the end of the
    top-level code block is an implicit stop."""
    work = machine.work
    steps = 0
    while work:
        steps += 1
        if step_check is not None and steps % STEP_CHECK_INTERVAL == 0:
            step_check()
        item = work.pop()
        tag = item[0]

        if tag == "stmts":
            _, statements, index = item
            if index < len(statements):
                work.append(("stmts", statements, index + 1))
                result = _exec_statement(machine, statements[index], world)
                if result is not None:
                    return result
        elif tag == "eval":
            _eval_expression(machine, item[1])
        elif tag == "apply":
            result = _apply(machine, item[1], item[2], world)
            if result is not None:
                return result
        elif tag == "bind_new":
            _, names, depth = item
            values = machine.value_stack[depth:]
            if len(values) != len(names):
                raise EvalFault(
                    f"declaration of {len(names)} name(s) got {len(values)} value(s)"
                )
            del machine.value_stack[depth:]
            scope_vars = machine.scopes[-1].vars
            for name, value in zip(names, values):
                if name in scope_vars:
                    raise EvalFault(f"redeclaration of {name!r}")
                scope_vars[name] = value
        elif tag == "bind_set":
            _, names, depth = item
            values = machine.value_stack[depth:]
            if len(values) != len(names):
                raise EvalFault(
                    f"assignment to {len(names)} name(s) got {len(values)} value(s)"
                )
            del machine.value_stack[depth:]
            for name, value in zip(names, values):
                machine.set_var(name, value)
        elif tag == "expr_stmt_end":
            if len(machine.value_stack) != item[1]:
                raise EvalFault("expression statement must not return values")
        elif tag == "pop_scope":
            machine.scopes.pop()
        elif tag == "if":
            if machine.value_stack.pop() != 0:
                machine.enter_block(item[1])
        elif tag == "switch":
            node = item[1]
            selector = machine.value_stack.pop()
            for case in node.cases:
                if case.value.value == selector:
                    machine.enter_block(case.body)
                    break
            else:
                if node.default is not None:
                    machine.enter_block(node.default)
        elif tag == "for_cond":
            work.append(("for_test", item[1]))
            work.append(("eval", item[1].condition))
        elif tag == "for_test":
            node = item[1]
            if machine.value_stack.pop() != 0:
                work.append(("for_cond", node))
                work.append(("enter", node.post))
                work.append(("loop_body_end", node))
                work.append(("enter", node.body))
        elif tag == "enter":
            machine.enter_block(item[1])
        elif tag == "loop_body_end":
            pass
        elif tag == "fn_return":
            machine._finish_function(item[1])
        else:
            raise EvalFault(f"corrupt work item {tag!r}")
    return HaltedStop()


def _exec_statement(machine: Machine, stmt, world) -> Optional[RunResult]:
    work = machine.work
    if isinstance(stmt, ExpressionStatement):
        work.append(("expr_stmt_end", len(machine.value_stack)))
        work.append(("eval", stmt.expression))
    elif isinstance(stmt, VariableDeclaration):
        if stmt.value is None:
            scope_vars = machine.scopes[-1].vars
            for name in stmt.names:
                if name in scope_vars:
                    raise EvalFault(f"redeclaration of {name!r}")
                scope_vars[name] = 0
        else:
            work.append(("bind_new", stmt.names, len(machine.value_stack)))
            work.append(("eval", stmt.value))
    elif isinstance(stmt, Assignment):
        work.append(("bind_set", stmt.names, len(machine.value_stack)))
        work.append(("eval", stmt.value))
    elif isinstance(stmt, If):
        work.append(("if", stmt.body))
        work.append(("eval", stmt.condition))
    elif isinstance(stmt, Switch):
        work.append(("switch", stmt))
        work.append(("eval", stmt.expression))
    elif isinstance(stmt, ForLoop):
        machine.enter_for_loop(stmt)
    elif isinstance(stmt, Block):
        machine.enter_block(stmt)
    elif isinstance(stmt, FunctionDefinition):
        pass  # hoisted at block entry
    elif isinstance(stmt, Break):
        machine._unwind("for_cond")
    elif isinstance(stmt, Continue):
        machine._unwind("loop_body_end")
    elif isinstance(stmt, Leave):
        item = machine._unwind("fn_return")
        machine._finish_function(item[1])
    else:
        raise EvalFault(f"unknown statement node {stmt!r}")
    return None


def _eval_expression(machine: Machine, expr) -> None:
    if isinstance(expr, Literal):
        machine.value_stack.append(expr.value)
    elif isinstance(expr, Identifier):
        machine.value_stack.append(machine.lookup(expr.name))
    elif isinstance(expr, FunctionCall):
        machine.work.append(("apply", expr, len(machine.value_stack)))
        for arg in reversed(expr.args):
            machine.work.append(("eval", arg))
    else:
        raise EvalFault(f"unknown expression node {expr!r}")


def _apply(machine: Machine, node: FunctionCall, depth: int, world) -> Optional[RunResult]:
    values = machine.value_stack[depth:]
    if len(values) != len(node.args):
        raise EvalFault(f"argument of {node.name} returned multiple values")
    del machine.value_stack[depth:]

    fnval = machine.lookup_function(node.name)
    if fnval is not None:
        fn = fnval.node
        if len(fn.parameters) != len(values):
            raise EvalFault(
                f"{fn.name} expects {len(fn.parameters)} argument(s), got {len(values)}"
            )
        frame_vars = dict(zip(fn.parameters, values))
        for ret in fn.returns:
            if ret in frame_vars:
                raise EvalFault(f"return variable {ret!r} shadows a parameter")
            frame_vars[ret] = 0
        machine.scopes.append(Scope(frame_vars, fnval.chain, True))
        machine.work.append(("fn_return", fn))
        machine.enter_block(fn.body)
        return None

    # builtin: pair popped words with literal texts for the object opcodes
    dialect_args = [
        StrArg(arg.text, value)
        if isinstance(arg, Literal) and arg.text is not None
        else value
        for arg, value in zip(node.args, values)
    ]
    outcome = exec_opcode(node.name, dialect_args, machine.ctx, world)
    if isinstance(outcome, Values):
        machine.value_stack.extend(outcome.values)
        return None
    if isinstance(outcome, Halt):
        if outcome.kind == STOP:
            return HaltedStop()
        if outcome.kind == RETURN:
            return HaltedReturn(outcome.data)
        if outcome.kind == REVERT:
            return Reverted(outcome.data)
        return OutOfGas(outcome.reason or "out of gas")
    assert isinstance(outcome, Stuck)
    if isinstance(outcome.event, AssertEvent):
        return AssertViolation()
    return StuckOn(outcome.event, machine, SIGNATURES[node.name][1])
