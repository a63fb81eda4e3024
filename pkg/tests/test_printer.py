import pytest

from eca.parser import parse_source
from eca.printer import pretty_print

from conftest import corpus_entries


def roundtrip(source: str):
    program = parse_source(source)
    printed = pretty_print(program)
    reparsed = parse_source(printed)
    assert reparsed == program, f"print/reparse changed the tree:\n{printed}"
    return printed


def test_simple_global():
    assert roundtrip("int g = 0").strip() == "int g = 0"


def test_minimal_parens_precedence():
    assert "1 + 2 * 3" in roundtrip("int g = 1 + 2 * 3")
    assert "(1 + 2) * 3" in roundtrip("int g = (1 + 2) * 3")
    assert "1 - (2 - 3)" in roundtrip("int g = 1 - (2 - 3)")
    # redundant parens are not reproduced
    assert "1 + 2 * 3" in roundtrip("int g = 1 + (2 * 3)")


def test_nested_if_inside_while_roundtrips():
    roundtrip("""
void main() begin
  while true begin
    if 1 < 2 then
      skip
    else
      if false then skip end
    end
  end
end
""")


def test_comma_and_seq_mixtures():
    roundtrip("int f() begin x = 1, x end")
    roundtrip("int f() begin x = 1; y = 2, y end")
    roundtrip("int f() begin a = 1, b = 2, b end")
    roundtrip("void f() begin skip; skip; skip end")
    roundtrip("int f() begin (a = 1, a), b end")


def test_implicit_unit_body_prints_as_statement():
    printed = roundtrip("void main() begin skip end")
    assert "skip" in printed
    assert "unit" not in printed


def test_float_and_bool_literals():
    printed = roundtrip("float g = 2.5")
    assert "2.5" in printed
    roundtrip("bool g = true")
    roundtrip("float g = 0.125")


def test_construct_call_field_component():
    roundtrip("""
struct Point begin
  int x;
  int y;
end

int f(int a, bool b) begin
  Point p = Point(a, a + 1);
  hw::go(a, b),
  f(p.x, p.y == 0).x
end
""")


def test_args_with_comma_expressions_parenthesized():
    printed = roundtrip("int f(int a) begin f((x = 1, x)) end")
    assert "f((" in printed


def test_assignment_in_operand_position():
    roundtrip("int f() begin 1 + (x = 2) end")
    roundtrip("int f() begin x = y = 2 end")


def test_corpus_roundtrip():
    for path, source, _ in corpus_entries():
        program = parse_source(source)
        printed = pretty_print(program)
        assert parse_source(printed) == program, f"roundtrip failed for {path.name}"
