import pytest
from hypothesis import given

from conftest import specs
from chiralwalk.notation import (
    Chain,
    Cycle,
    DiCycle,
    Handles,
    Join,
    Merge,
    NotationSemanticError,
    NotationSyntaxError,
    Path,
    parse,
    to_text,
)


def test_mixed_operators_group_left():
    assert parse("C3/C5+P1") == Join(Merge(Cycle(3), Cycle(5)), Path(1))


def test_single_atom():
    assert parse("P1") == Path(1)


def test_five_triangles_with_handles():
    tree = parse("h(C3/C3/C3/C3/C3)")
    assert isinstance(tree, Handles)
    merges, node = 0, tree.child
    while isinstance(node, Merge):
        assert node.right == Cycle(3)
        merges += 1
        node = node.left
    assert merges == 4 and node == Cycle(3)


def test_atoms():
    assert parse("Pw7:1.4142") == Path(7, 1.4142)
    assert parse("DiC7(3,6)") == DiCycle(7, 3, 6)
    assert parse("DiC8(1-5)") == DiCycle(8, 1, 5)
    assert parse("DiC7(3,6,5)") == DiCycle(7, 3, 6, 5)
    assert parse("chain(C4,3)") == Chain(Cycle(4), 3)


def test_chain_expands_to_handles_of_merges():
    assert Chain(Cycle(3), 3).expand() == Handles(Merge(Merge(Cycle(3), Cycle(3)), Cycle(3)))


def test_canonical_print_strips_whitespace():
    assert to_text(parse(" h( C3 / C3 ) + P2 ")) == "h(C3/C3)+P2"


def test_right_grouping_keeps_parentheses():
    assert to_text(parse("C3/(C5+P1)")) == "C3/(C5+P1)"
    assert to_text(parse("(C3/C5)+P1")) == "C3/C5+P1"


def test_weight_printing():
    assert to_text(Path(5, 2.0)) == "Pw5:2"
    assert to_text(Path(5, 1.5)) == "Pw5:1.5"


@pytest.mark.parametrize("text", ["C2", "P0", "DiC4(1,2)", "DiC5(1,5)", "DiC3(1,3)",
                                  "Pw2:1.5", "Pw5:0", "chain(C3,0)", "DiC6(2,5,9)"])
def test_semantic_errors(text):
    with pytest.raises(NotationSemanticError):
        parse(text)


@pytest.mark.parametrize("text,pos", [("", 0), ("C3/", 3), ("C3 C4", 3), ("X5", 0),
                                      ("h(C3", 4), ("DiC5(1;3)", 6), ("C3++C4", 3)])
def test_syntax_errors_report_position(text, pos):
    with pytest.raises(NotationSyntaxError) as info:
        parse(text)
    assert info.value.position == pos


def test_non_ascii_rejected():
    with pytest.raises(NotationSyntaxError) as info:
        parse("C3/C₅")
    assert info.value.position == 4


@given(specs)
def test_print_parse_roundtrip(spec):
    text = to_text(spec)
    assert parse(text) == spec
    assert to_text(parse(text)) == text
