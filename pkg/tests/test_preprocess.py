import pytest

from yulgamecheck.errors import HookArityError, LinkError
from yulgamecheck.preprocess import (
    inject_hooks,
    link_libraries,
    strip_checked_arithmetic,
)
from yulgamecheck.syntax import (
    Assignment,
    FunctionCall,
    Identifier,
    If,
    Literal,
    parse_object,
    render,
)


def obj(code: str, extra: str = ""):
    return parse_object('object "T_1" { code { %s } %s }' % (code, extra))


def find_function(root, name):
    for stmt in root.code.statements:
        if getattr(stmt, "name", None) == name:
            return stmt
    raise AssertionError(f"no function {name}")


# -- hook injection ---------------------------------------------------------


def test_assert_hook_becomes_opcode():
    root = obj("function fun___yult__assert_57(c) {} fun___yult__assert_57(1)")
    out = inject_hooks(root)
    call = out.code.statements[1].expression
    assert call == FunctionCall("ASSERT", (Literal(1),))
    # the dead hook definition stays behind
    assert find_function(out, "fun___yult__assert_57")


def test_print_hex_hook_longest_match_wins():
    root = obj(
        "function fun___yult__printHex_9(v) {} "
        "function fun___yult__print_signed_8(v) {} "
        "fun___yult__printHex_9(7) "
        "fun___yult__print_signed_8(7)"
    )
    out = inject_hooks(root)
    names = [s.expression.name for s in out.code.statements[2:]]
    assert names == ["PRINT_hex", "PRINT_signed"]


def test_tree_without_hooks_unchanged():
    root = obj("sstore(0, add(1, 2))")
    assert inject_hooks(root).structurally_equal(root)


def test_injection_is_idempotent():
    root = obj("function fun___yult__reveal_uint_3(v) {} fun___yult__reveal_uint_3(4)")
    once = inject_hooks(root)
    twice = inject_hooks(once)
    assert once.structurally_equal(twice)


def test_hook_arity_mismatch_rejected():
    root = obj("function fun___yult__assert_57(a, b) {} fun___yult__assert_57(1, 2)")
    with pytest.raises(HookArityError):
        inject_hooks(root)


def test_ext_fund_and_impersonate_arities():
    root = obj(
        "function f___yult__ext_fund_1(a, v) {} "
        "f___yult__ext_fund_1(0xAA, 5)"
    )
    out = inject_hooks(root)
    assert out.code.statements[1].expression.name == "EXT_FUND"


# -- library linking -----------------------------------------------------------


LIB_OBJECT = 'object "Lib_42" { code { } object "Lib_42_deployed" { code { } } }'


def test_link_plan_matches_compiler_naming():
    root = obj('let a := linkersymbol("src/Lib.sol:Lib")', LIB_OBJECT)
    linked, plan = link_libraries(root)
    assert plan.entries == [("src/Lib.sol:Lib", "Lib_42")]
    assert linked.structurally_equal(root)  # the pass only plans


def test_no_linkersymbols_yields_empty_plan():
    root = obj("sstore(0, 1)")
    linked, plan = link_libraries(root)
    assert plan.entries == []
    assert linked.structurally_equal(root)


def test_unresolvable_library_named_in_error():
    root = obj('let a := linkersymbol("src/Gone.sol:Gone")')
    with pytest.raises(LinkError, match="Gone"):
        link_libraries(root)


def test_each_linkersymbol_planned_once():
    root = obj(
        'let a := linkersymbol("src/Lib.sol:Lib") let b := linkersymbol("src/Lib.sol:Lib")',
        LIB_OBJECT,
    )
    _, plan = link_libraries(root)
    assert plan.entries == [("src/Lib.sol:Lib", "Lib_42")]


# -- legacy mode ------------------------------------------------------------------

CHECKED_ADD = """
function checked_add_t_uint256(x, y) -> sum {
    x := cleanup_t_uint256(x)
    y := cleanup_t_uint256(y)
    sum := add(x, y)
    if gt(x, sum) { panic_error_0x11() }
}
"""

CHECKED_DIV = """
function checked_div_t_uint256(x, y) -> r {
    x := cleanup_t_uint256(x)
    y := cleanup_t_uint256(y)
    if iszero(y) { panic_error_0x12() }
    r := div(x, y)
}
"""

SDIV_CHECKED = """
function checked_div_t_int256(x, y) -> r {
    if iszero(y) { panic_error_0x12() }
    r := sdiv(x, y)
}
"""


def test_checked_add_body_becomes_wrapping_add():
    # oracle: the compiler emits `sum := add(x, y)` for the same source in an
    # unchecked block; the stripped body must be exactly that statement
    root = obj("sstore(0, checked_add_t_uint256(1, 2))" + CHECKED_ADD)
    out = strip_checked_arithmetic(root)
    fn = find_function(out, "checked_add_t_uint256")
    assert fn.body.statements == (
        Assignment(("sum",), FunctionCall("add", (Identifier("x"), Identifier("y")))),
    )
    # call sites are untouched
    assert out.code.statements[0] == root.code.statements[0]


def test_checked_div_keeps_zero_divisor_guard():
    root = obj("sstore(0, checked_div_t_uint256(6, 3))" + CHECKED_DIV)
    out = strip_checked_arithmetic(root)
    fn = find_function(out, "checked_div_t_uint256")
    guard, operation = fn.body.statements
    assert isinstance(guard, If)
    assert guard.condition == FunctionCall("iszero", (Identifier("y"),))
    # the original guard body (with its panic helper) is retained verbatim
    assert guard.body.statements[0].expression.name == "panic_error_0x12"
    assert operation == Assignment(
        ("r",), FunctionCall("div", (Identifier("x"), Identifier("y")))
    )


def test_signed_div_uses_sdiv():
    root = obj("sstore(0, checked_div_t_int256(6, 3))" + SDIV_CHECKED)
    fn = find_function(strip_checked_arithmetic(root), "checked_div_t_int256")
    assert fn.body.statements[1].value.name == "sdiv"


def test_tree_without_checked_functions_is_identity():
    root = obj("function helper(x) -> y { y := add(x, 1) } sstore(0, helper(1))")
    assert strip_checked_arithmetic(root).structurally_equal(root)


def test_panic_helpers_untouched():
    root = obj(
        "function panic_error_0x11() { revert(0, 0) } sstore(0, 1)" + CHECKED_ADD
    )
    out = strip_checked_arithmetic(root)
    panic = find_function(out, "panic_error_0x11")
    assert panic.body.statements[0].expression.name == "revert"
