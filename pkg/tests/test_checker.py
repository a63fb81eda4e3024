import pytest

from eca.ast_nodes import BOOL, INT, Type
from eca.checker import (
    ComponentSignature, TypeCheckFailure, UnknownStructError, check,
    collect_type_errors, resolve_struct,
)
from eca.parser import parse_source

from conftest import ILLTYPED, MODELS, corpus_entries, scenario_setup
from eca.model import load_model_file


def signatures():
    return [load_model_file(str(MODELS / name)).signature()
            for name in ("fig1.toml", "sensor.toml", "motor.toml")]


def errors_of(source: str):
    return collect_type_errors(parse_source(source), signatures())


def test_well_typed_program_checks_clean():
    src = """
struct Point begin
  int x;
  int y;
end

int origin_shift = 2

int f(int a) begin
  Point p = Point(a, origin_shift),
  p.x + p.y
end

void main() begin
  hw::ab()
end
"""
    typed = check(parse_source(src), signatures())
    assert typed.function_sigs["f"][1] == INT
    assert typed.global_types["origin_shift"] == INT


def test_struct_as_condition_reports_expected_bool():
    errs = errors_of("""
struct Flag begin
  int raw;
end

void main() begin
  Flag f = Flag(1);
  if f then skip end
end
""")
    assert any("must be bool" in e.message and e.expected == BOOL for e in errs)


def test_int_plus_bool():
    errs = errors_of("int main() begin 1 + true end")
    assert any(e.found == BOOL for e in errs)


def test_no_implicit_int_to_float():
    assert errors_of("float main() begin 1 + 0.5 end")


def test_equality_on_bool_allowed_ordering_not():
    assert not errors_of("bool main() begin true == false end")
    assert errors_of("bool main() begin true <= false end")


def test_assignment_requires_identical_type():
    assert errors_of("int x = 0 void main() begin x = 1.0 end")
    assert not errors_of("float x = 0.0 void main() begin x = 1.0; skip end")


def test_local_shadows_global_with_local_type():
    src = """
int x = 1

bool main() begin
  bool x = true,
  x
end
"""
    assert not errors_of(src)


def test_redeclaration_same_scope_rejected():
    assert errors_of("void main() begin int a = 1; int a = 2 end")


def test_child_scopes_allow_shadowing():
    src = """
void main() begin
  int a = 1;
  if true then int a = 2; a = a + 1 end;
  while false begin int a = 3; skip end;
  repeat 1 begin int a = 4; skip end
end
"""
    assert not errors_of(src)


def test_declaration_visible_for_rest_of_sequence_only():
    assert errors_of("""
void main() begin
  if true then int a = 1 end;
  a = 2
end
""")


def test_param_redeclaration_in_body_rejected():
    assert errors_of("int f(int a) begin int a = 2, a end")


def test_recursive_struct_rejected():
    errs = errors_of("struct R begin R again; end void main() begin skip end")
    assert any("contains itself" in e.message for e in errs)


def test_mutually_recursive_structs_rejected():
    errs = errors_of("""
struct A begin B other; end
struct B begin A other; end
void main() begin skip end
""")
    assert any("contains itself" in e.message for e in errs)


def test_forward_function_references_allowed():
    assert not errors_of("""
int caller() begin callee() end
int callee() begin 1 end
void main() begin skip end
""")


def test_component_struct_argument_rejected():
    errs = errors_of("""
struct Boxed begin int level; end
int main() begin sensor::poll(Boxed(1)) end
""")
    assert any("struct values cannot be passed" in e.message for e in errs)


def test_unknown_component_and_function():
    assert errors_of("void main() begin nosuch::f() end")
    assert errors_of("void main() begin hw::nosuch() end")


def test_component_arity_and_types():
    assert errors_of("int main() begin sensor::poll() end")
    assert errors_of("int main() begin sensor::poll(true) end")
    assert not errors_of("int main() begin sensor::poll(3) end")


def test_void_in_value_position_rejected():
    # hw::ab() returns void; it cannot be an operand
    assert errors_of("int main() begin hw::ab() + 1 end")


def test_multiple_errors_reported():
    errs = errors_of("int main() begin (1 + true) * (false + 2), ghost end")
    assert len(errs) >= 3


def test_errors_carry_spans():
    errs = errors_of("int main() begin 1 + true end")
    assert all(e.span is not None and e.span.line >= 1 for e in errs)


def test_check_raises_with_error_list():
    with pytest.raises(TypeCheckFailure) as exc:
        check(parse_source("int main() begin true end"), signatures())
    assert exc.value.errors


def test_idempotent_erasure():
    program = parse_source("int main() begin 1 + 1 end")
    typed = check(program, signatures())
    assert typed.program is program
    retyped = check(program, signatures())
    assert retyped.program == program


def test_resolve_struct_layout_and_unknown():
    typed = check(parse_source("""
struct Inner begin int v; end
struct Outer begin Inner box; float w; end
void main() begin skip end
"""), signatures())
    assert resolve_struct(typed, "Outer") == [("box", Type("Inner")),
                                              ("w", Type("float"))]
    with pytest.raises(UnknownStructError):
        resolve_struct(typed, "Missing")


def test_corpus_is_well_typed():
    for path, source, scenarios in corpus_entries():
        models, _, _, _ = scenario_setup(path, scenarios[0])
        sigs = [m.signature() for m in models.values()]
        errs = collect_type_errors(parse_source(source), sigs)
        assert not errs, f"{path.name}: {[e.message for e in errs]}"


def test_illtyped_corpus_all_rejected_with_location():
    files = sorted(ILLTYPED.glob("*.eca"))
    assert len(files) >= 10
    for path in files:
        source = path.read_text()
        first = source.splitlines()[0]
        assert first.startswith("// expect-error:")
        expectation = first.split(":", 1)[1].strip()
        errs = collect_type_errors(parse_source(source), signatures())
        assert errs, f"{path.name} was not rejected"
        formatted = [e.format(path.name) for e in errs]
        assert any(expectation in msg for msg in formatted), (
            f"{path.name}: none of {formatted} mention {expectation!r}")
        assert all(e.span is not None for e in errs)
