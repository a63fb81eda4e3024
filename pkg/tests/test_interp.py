from fractions import Fraction

import pytest

from eca.interp import (
    InputError, Interpreter, MissingMainError, NegativeRepeatError,
    RecursionLimitError, TimingTable, TraceEvent, run, trace_to_jsonl,
)
from eca.model import StepError
from eca.quantity import QuantityError, seconds
from eca.values import UNIT, StructValue

from conftest import check_source


def interp(source, models, timing=None, inputs=None, limit=10_000):
    typed = check_source(source, models)
    return run(typed, models, timing, inputs, recursion_limit=limit)


def test_skip_costs_nothing_with_zero_timings(fig1):
    res = interp("void main() begin skip end", {"hw": fig1})
    assert res.energy.value == 0
    assert res.value is UNIT
    assert res.final_components == {"hw": "a"}


def test_var_read_costs_power_times_t_var(fig1):
    res = interp("int main(int x) begin x end", {"hw": fig1},
                 TimingTable(t_var=seconds(1)), {"x": 5})
    assert res.energy.value == 8  # 8 J/s in state a for 1 s
    assert res.value == 5


def test_component_call_prices_power_in_pre_transition_state(fig1_t2):
    res = interp("void main() begin hw::ab() end", {"hw": fig1_t2})
    # 8 J/s (state a) * 2 s + 4 J edge
    assert res.energy.value == 20


def test_four_edge_driver(fig1):
    res = interp("void main() begin hw::ab(); hw::bb(); hw::bc(); hw::cd() end",
                 {"hw": fig1})
    assert res.energy.value == 16
    assert res.final_components == {"hw": "d"}


def test_extended_driver_with_return_edge(fig1):
    res = interp("void main() begin hw::ab(); hw::bb(); hw::bc(); hw::ca(); "
                 "hw::ab(); hw::bc(); hw::cd() end", {"hw": fig1})
    assert res.energy.value == 33  # 4+8+3+10+4+3+1
    assert res.final_components == {"hw": "d"}


def test_repeat_over_loop_edge(fig1):
    src = """
void main() begin
  hw::ab();
  repeat 4 begin hw::bb() end
end
"""
    res = interp(src, {"hw": fig1})
    assert res.energy.value == 4 + 4 * 8


def test_while_false_pays_condition_only(fig1):
    # component pinned in state c (0 J/s): the condition read costs 0 J
    src = """
int x = 0
void main() begin
  hw::ab(); hw::bc();
  while x > x begin skip end
end
"""
    res = interp(src, {"hw": fig1}, TimingTable(t_var=seconds(1)))
    assert res.energy.value == 4 + 3  # edges only; reads happened at 0 J/s
    assert res.final_components == {"hw": "c"}


def test_while_taxes_condition_every_test(fig1):
    src = """
int n = 2
void main() begin
  while n > 0 begin n = n - 1 end
end
"""
    res = interp(src, {"hw": fig1}, TimingTable(t_var=seconds(1)))
    # three condition tests, each one Var read at 8 J/s, plus two body reads
    assert res.energy.value == (3 + 2) * 8


def test_t_while_charged_once_at_entry(fig1):
    src = """
int n = 3
void main() begin
  while n > 0 begin n = n - 1 end
end
"""
    res = interp(src, {"hw": fig1}, TimingTable(t_while=seconds(1)))
    assert res.energy.value == 8


def test_repeat_count_evaluated_once(fig1):
    src = """
int n = 3
int main() begin
  int hits = 0;
  repeat n begin n = n + 10; hits = hits + 1 end,
  hits
end
"""
    res = interp(src, {"hw": fig1})
    assert res.value == 3
    assert res.final_globals["n"] == 33


def test_negative_repeat_raises():
    src = "void main(int n) begin repeat n begin skip end end"
    with pytest.raises(NegativeRepeatError):
        interp(src, {}, inputs={"n": -1})


def test_missing_main():
    with pytest.raises(MissingMainError):
        interp("int helper() begin 1 end", {})


def test_input_validation():
    src = "int main(int n) begin n end"
    with pytest.raises(InputError, match="missing input"):
        interp(src, {})
    with pytest.raises(InputError, match="unknown input"):
        interp(src, {}, inputs={"n": 1, "zz": 2})
    with pytest.raises(InputError, match="must be int"):
        interp(src, {}, inputs={"n": True})


def test_globals_initialize_in_order_and_count_energy(fig1):
    src = """
int a = (hw::ab(), 1)
int b = a + 1
void main() begin skip end
"""
    res = interp(src, {"hw": fig1})
    assert res.final_globals == {"a": 1, "b": 2}
    assert res.energy.value == 4


def test_by_value_calls_and_static_scoping(fig1):
    src = """
int x = 10

int clobber(int x) begin
  x = x + 100,
  x
end

int main() begin
  int x = 1;
  int got = clobber(5),
  got * 1000 + x
end
"""
    res = interp(src, {"hw": fig1})
    assert res.value == 105 * 1000 + 1
    assert res.final_globals["x"] == 10


def test_callee_assignment_to_global_propagates():
    src = """
int total = 0

void add(int k) begin
  total = total + k
end

int main() begin
  add(3); add(4),
  total
end
"""
    assert interp(src, {}).value == 7


def test_identity_function_and_zero_cost():
    res = interp("int f(int x) begin x end int main() begin f(9) end", {})
    assert res.value == 9
    assert res.energy.value == 0


def test_recursive_countdown_component_cost(fig1):
    src = """
int f(int n) begin
  if n > 0 then hw::bb(); r = f(n - 1) end, 0
end
int r = 0
int main(int n) begin hw::ab(), f(n) end
"""
    res = interp(src, {"hw": fig1}, inputs={"n": 3})
    assert res.energy.value == 4 + 3 * 8


def test_recursion_limit():
    src = "int f(int n) begin f(n) end int main() begin f(0) end"
    with pytest.raises(RecursionLimitError) as exc:
        interp(src, {}, limit=64)
    assert exc.value.limit == 64


def test_step_error_surfaces(fig1):
    with pytest.raises(StepError):
        interp("void main() begin hw::cd() end", {"hw": fig1})


def test_struct_values_compare_structurally():
    res = interp("struct Box begin int v; end Box g = Box(7) Box main() begin g end", {})
    assert res.value == StructValue.make("Box", {"v": 7})
    assert res.final_globals["g"] == res.value


def test_trace_sums_to_total_and_exports(fig1):
    src = "void main() begin hw::ab(); hw::bb() end"
    res = interp(src, {"hw": fig1}, TimingTable(t_skip=seconds(1)))
    total = Fraction(0)
    for ev in res.trace:
        total += ev.energy.value
    assert total == res.energy.value
    lines = trace_to_jsonl(res.trace).strip().splitlines()
    assert len(lines) == len(res.trace)
    import json
    first = json.loads(lines[0])
    assert first["kind"] == "transition"
    assert first["energy"] == "4/1"


def test_zero_timing_purity(fig1):
    src = "void main() begin hw::ab(); hw::bc(); hw::ca() end"
    res = interp(src, {"hw": fig1})
    transition_sum = sum(ev.energy.value for ev in res.trace
                         if ev.kind == "transition")
    assert res.energy.value == transition_sum == 17


def test_run_is_deterministic(fig1):
    src = "int main(int n) begin hw::ab(), n * 2 end"
    a = interp(src, {"hw": fig1}, inputs={"n": 21})
    b = interp(src, {"hw": fig1}, inputs={"n": 21})
    assert a.energy.value == b.energy.value
    assert a.value == b.value == 42
    assert a.final_components == b.final_components


def test_and_or_evaluate_both_sides(fig1):
    src = """
bool left() begin hw::ab(), false end
bool right() begin hw::bc(), true end
bool main() begin left() and right() end
"""
    res = interp(src, {"hw": fig1})
    assert res.value is False
    assert res.energy.value == 7  # both calls happened


def test_timing_table_loading_and_validation():
    table = TimingTable.load('t_var = "1/2"\nt_if = "0.25"\n')
    assert table.t_var.value == Fraction(1, 2)
    assert table.t_if.value == Fraction(1, 4)
    with pytest.raises(QuantityError, match="unknown timing keys"):
        TimingTable.load('t_bogus = "1"')
    with pytest.raises(QuantityError):
        TimingTable.load('t_var = "-1"')
