import pytest
from hypothesis import given, strategies as st

from yulgamecheck.errors import InputError, YulSyntaxError
from yulgamecheck.state import KeccakOracle
from yulgamecheck.syntax import (
    Block,
    ForLoop,
    FunctionCall,
    Identifier,
    If,
    Literal,
    Switch,
    index_objects,
    parse_object,
    render,
    string_literal_word,
)

from conftest import load_fixture

DAO_SKELETON = """
/// @use-src 0:"src/DAO.sol"
object "DAO_3087" {
    code {
        let _7 := 0
        codecopy(_7, dataoffset("DAO_3087_deployed"), datasize("DAO_3087_deployed"))
        return(_7, datasize("DAO_3087_deployed"))
    }
    /// @use-src 0:"src/DAO.sol"
    object "DAO_3087_deployed" {
        code {
            sstore(0, 1)
        }
        data ".metadata" hex"a264697066735822"
    }
}
"""


def test_minimal_object():
    obj = parse_object('object "A_1" { code { } }')
    assert obj.name == "A_1"
    assert obj.code == Block(())
    assert obj.subobjects == []


def test_dao_shaped_skeleton():
    obj = parse_object(DAO_SKELETON)
    assert obj.name == "DAO_3087"
    assert [s.name for s in obj.subobjects] == ["DAO_3087_deployed"]
    deployed = obj.subobjects[0]
    assert deployed.data_segments == [(".metadata", bytes.fromhex("a264697066735822"))]


def test_unclosed_block_reports_position():
    with pytest.raises(YulSyntaxError) as err:
        parse_object('object "A_1" { code {')
    assert err.value.line == 1


def test_comments_and_type_suffixes_are_discarded():
    obj = parse_object(
        'object "A_1" { code { /* block */ let x : u256 := 1:u256 // line\n sstore(x, x) } }'
    )
    decl = obj.code.statements[0]
    assert decl.names == ("x",) and decl.value == Literal(1)


def test_string_literal_left_aligned():
    # "abc" occupies the three most significant bytes of the word
    assert string_literal_word("abc") == int.from_bytes(b"abc" + b"\0" * 29, "big")
    with pytest.raises(YulSyntaxError):
        string_literal_word("x" * 33)


def test_oversized_number_literal_rejected():
    with pytest.raises(YulSyntaxError):
        parse_object('object "A_1" { code { let x := %d } }' % (1 << 256))


def test_break_outside_loop_rejected():
    with pytest.raises(YulSyntaxError):
        parse_object('object "A_1" { code { break } }')
    with pytest.raises(YulSyntaxError):
        parse_object('object "A_1" { code { leave } }')
    # leave is fine inside a function body
    parse_object('object "A_1" { code { function f() { leave } } }')


def test_switch_preserves_case_order():
    src = '''
    object "A_1" { code {
        switch calldataload(0)
        case 2 { sstore(0, 2) }
        case 1 { sstore(0, 1) }
        case 3 { sstore(0, 3) }
        default { revert(0, 0) }
    } }
    '''
    first = parse_object(src)
    again = parse_object(render(first))
    assert first.structurally_equal(again)
    switch = again.code.statements[0]
    assert isinstance(switch, Switch)
    assert [case.value.value for case in switch.cases] == [2, 1, 3]


@pytest.mark.parametrize(
    "name",
    [
        "bank_vulnerable.yul",
        "bank_patched.yul",
        "gate.yul",
        "gate_revealing.yul",
        "counter.yul",
    ],
)
def test_round_trip_over_corpus(name):
    first = parse_object(load_fixture(name))
    second = parse_object(render(first))
    assert first.structurally_equal(second)
    # a second round trip is a fixed point
    assert second.structurally_equal(parse_object(render(second)))


def test_every_statement_reachable_from_root():
    # the renderer's recursive walk must see every call the source mentions:
    # a node the walk cannot reach would vanish from the rendered text
    source = load_fixture("bank_vulnerable.yul")
    rendered = render(parse_object(source))
    for needle in ("sstore", "sload", "call(", "revert", "stop()"):
        assert source.count(needle) == rendered.count(needle)


@given(st.integers(min_value=0, max_value=(1 << 256) - 1))
def test_number_literals_round_trip(value):
    src = 'object "A_1" { code { let x := %d } }' % value
    obj = parse_object(src)
    assert obj.code.statements[0].value == Literal(value)
    assert parse_object(render(obj)).structurally_equal(obj)


# -- object indexing -----------------------------------------------------------


def test_index_assigns_distinct_nonzero_ids():
    src = 'object "A_1" { code { } object "B_2" { code { } } object "C_3" { code { } } }'
    obj = parse_object(src)
    table = index_objects(obj, KeccakOracle())
    ids = [node.object_id for node in obj.walk()]
    assert len(ids) == 3
    assert len(set(ids)) == 3
    assert all(i != 0 for i in ids)
    assert set(table.by_id) == set(ids)
    assert set(table.by_name) == {"A_1", "B_2", "C_3"}


def test_index_is_deterministic_and_name_pure():
    src_a = 'object "A_1" { code { } object "B_2" { code { } } object "C_3" { code { } } }'
    # same names, different subobject order and different code
    src_b = 'object "A_1" { code { sstore(0,1) } object "C_3" { code { } } object "B_2" { code { } } }'
    table_a = index_objects(parse_object(src_a), KeccakOracle())
    table_b = index_objects(parse_object(src_b), KeccakOracle())
    for name in ("A_1", "B_2", "C_3"):
        assert table_a.by_name[name].object_id == table_b.by_name[name].object_id


def test_duplicate_object_name_rejected():
    src = 'object "A_1" { code { } object "A_1" { code { } } }'
    with pytest.raises(InputError, match="duplicate object name"):
        index_objects(parse_object(src), KeccakOracle())


def test_table_by_name_by_id_inverse_consistent():
    obj = parse_object(load_fixture("bank_vulnerable.yul"))
    table = index_objects(obj, KeccakOracle())
    for name, node in table.by_name.items():
        assert table.by_id[node.object_id] is node
        assert node.name == name
