import pytest

from eca.ast_nodes import (
    Assign, BinOp, Call, CommaExpr, ComponentCall, Const, Construct, Decl,
    ExprStmt, FieldAccess, If, Program, Repeat, Seq, Skip, Type, Var, While,
    INT,
)
from eca.errors import ClassificationError, ParseError
from eca.parser import parse, parse_source, parse_with_lookahead
from eca.lexer import tokenize
from eca.values import UNIT

from conftest import corpus_entries


def test_single_global():
    program = parse_source("int g = 0")
    assert not program.structs
    assert not program.functions
    glob = program.globals[0]
    assert glob.name == "g"
    assert glob.decl_type == INT
    assert glob.init == Const(0)


def test_minimal_void_function():
    program = parse_source("void main() begin skip end")
    body = program.functions[0].body
    assert body == CommaExpr(Skip(), Const(UNIT))


def test_comma_body_example():
    body = parse_source("int f() begin x = 1, x end").functions[0].body
    assert body == CommaExpr(ExprStmt(Assign("x", Const(1))), Var("x"))


def test_semicolon_then_comma_body():
    body = parse_source("int f() begin x = 1; y = 2, y end").functions[0].body
    assert body == CommaExpr(
        Seq(ExprStmt(Assign("x", Const(1))), ExprStmt(Assign("y", Const(2)))),
        Var("y"))


def test_comma_nests_on_the_right():
    body = parse_source("int f() begin a = 1, b = 2, b end").functions[0].body
    assert body == CommaExpr(
        ExprStmt(Assign("a", Const(1))),
        CommaExpr(ExprStmt(Assign("b", Const(2))), Var("b")))


def test_precedence_mul_over_add():
    init = parse_source("int g = 1 + 2 * 3").globals[0].init
    assert init == BinOp("+", Const(1), BinOp("*", Const(2), Const(3)))


def test_precedence_cmp_and_or():
    init = parse_source("bool g = 1 < 2 and true or false").globals[0].init
    assert init == BinOp(
        "or", BinOp("and", BinOp("<", Const(1), Const(2)), Const(True)),
        Const(False))


def test_left_associativity():
    init = parse_source("int g = 1 - 2 - 3").globals[0].init
    assert init == BinOp("-", BinOp("-", Const(1), Const(2)), Const(3))


def test_comparisons_do_not_chain():
    with pytest.raises(ParseError, match="do not chain"):
        parse_source("bool g = 1 < 2 < 3")


def test_statement_in_value_position_rejected():
    with pytest.raises(ClassificationError, match="statement"):
        parse_source("int f() begin 1 + (if true then skip end, 2, skip) end")


def test_semicolon_sequence_in_value_position_rejected():
    with pytest.raises(ClassificationError):
        parse_source("int g = (skip; skip)")


def test_if_as_comma_left_arm_ok():
    body = parse_source("int f() begin if b then skip end, 3 end").functions[0].body
    assert isinstance(body, CommaExpr)
    assert isinstance(body.stmt, If)
    assert body.expr == Const(3)


def test_component_call_and_call_and_construct():
    src = """
struct Point begin
  int x;
end

int f(int a) begin
  Point p = Point(a);
  hw::step(a, true),
  f(p.x)
end
"""
    program = parse_source(src)
    body = program.functions[0].body
    assert isinstance(body, CommaExpr)
    decl_then_cmp = body.stmt
    assert isinstance(decl_then_cmp, Seq)
    decl = decl_then_cmp.first.expr
    assert isinstance(decl, Decl)
    assert isinstance(decl.init, Construct)
    cmp = decl_then_cmp.second.expr
    assert cmp == ComponentCall("hw", "step", [Var("a"), Const(True)])
    assert body.expr == Call("f", [FieldAccess(Var("p"), "x")])


def test_struct_def_fields_and_empty():
    program = parse_source("""
struct P begin
  int x;
  float y;
end

struct E begin
end

int g = 0
""")
    assert program.structs[0].fields == [("x", INT), ("y", Type("float"))]
    assert program.structs[1].fields == []


def test_repeat_and_while_and_else():
    src = """
void main() begin
  repeat 2 begin
    skip
  end;
  while false begin
    skip
  end;
  if true then skip else skip end
end
"""
    body = parse_source(src).functions[0].body
    seq = body.stmt
    assert isinstance(seq, Seq)
    assert isinstance(seq.first, Repeat)
    assert isinstance(seq.second.first, While)
    assert isinstance(seq.second.second, If)
    assert seq.second.second.orelse == Skip()


def test_duplicate_names_rejected():
    with pytest.raises(ParseError, match="duplicate name 'f'"):
        parse_source("int f() begin 1 end void f() begin skip end")
    with pytest.raises(ParseError, match="duplicate name 'g'"):
        parse_source("int g = 0 int g = 1")
    with pytest.raises(ParseError, match="duplicate field"):
        parse_source("struct S begin int x; int x; end")


def test_void_field_rejected():
    with pytest.raises(ParseError, match="cannot have type void"):
        parse_source("struct S begin void x; end")


def test_parse_error_has_expected_set():
    with pytest.raises(ParseError) as exc:
        parse_source("int f( begin 1 end")
    assert exc.value.expected
    assert exc.value.span is not None


def test_error_position_format():
    with pytest.raises(ParseError) as exc:
        parse_source("int x 5")
    assert exc.value.format("prog.eca").startswith("prog.eca:1:")


def test_parse_accepts_token_list():
    program = parse(tokenize("int g = 1"))
    assert program.globals[0].init == Const(1)


def test_empty_program():
    program = parse_source("")
    assert program == Program([], [], [])


def test_spans_excluded_from_equality():
    a = parse_source("int g = 1 + 2")
    b = parse_source("int g =\n  1 + 2")
    assert a == b


def test_lookahead_within_two_tokens_on_corpus():
    worst = 0
    for path, source, _ in corpus_entries():
        _, used = parse_with_lookahead(source)
        worst = max(worst, used)
    assert worst <= 2


def test_lookahead_two_is_reached():
    # struct-typed declarations genuinely need the second token
    _, used = parse_with_lookahead("int f() begin Point p = q, 1 end")
    assert used == 2
