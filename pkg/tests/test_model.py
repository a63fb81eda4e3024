from fractions import Fraction

import pytest

from eca.ast_nodes import BOOL, INT
from eca.model import (
    ComponentModel, ModelError, StepError, load_model, load_model_file,
    initial_gamma, phi_total, validate,
)
from eca.quantity import watts
from eca.values import UNIT

from conftest import MODELS


@pytest.fixture(scope="module")
def fig1():
    return load_model_file(str(MODELS / "fig1.toml"))


def test_fig1_loads_with_expected_shape(fig1):
    assert fig1.name == "hw"
    assert fig1.initial == "a"
    assert fig1.states == {"a", "b", "c", "d"}
    powers = {s: fig1.power[s].value for s in "abcd"}
    assert powers == {"a": 8, "b": 1, "c": 0, "d": 4}
    energies = {f: fig1.functions[f].transitions[0].energy.value
                for f in ("ab", "bb", "bc", "cd", "ca")}
    assert energies == {"ab": 4, "bb": 8, "bc": 3, "cd": 1, "ca": 10}


def test_fig1_validation_warns_dead_end_state(fig1):
    errors, warnings = validate(fig1)
    assert not errors
    assert any("state 'd' has no outgoing transitions" in str(w) for w in warnings)


def test_partial_coverage_warned(fig1):
    _, warnings = validate(fig1)
    assert any("function 'ab' has no transition from state 'b'" in str(w)
               for w in warnings)


def test_step_follows_edges(fig1):
    step = fig1.step("a", "ab", [])
    assert (step.target, step.energy.value, step.value) == ("b", 4, UNIT)
    assert step.duration.value == 0
    loop = fig1.step("b", "bb", [])
    assert (loop.target, loop.energy.value) == ("b", 8)


def test_step_dead_end_raises(fig1):
    with pytest.raises(StepError, match="no matching transition"):
        fig1.step("d", "ab", [])


def test_step_is_deterministic(fig1):
    results = {fig1.step("c", "ca", []).target for _ in range(10)}
    assert results == {"a"}


def test_power_draw(fig1):
    assert fig1.power_draw("a").value == 8
    assert fig1.power_draw("c").value == 0
    with pytest.raises(ModelError, match="no state"):
        fig1.power_draw("z")


def test_phi_total_sums_and_is_linear(fig1):
    sensor = load_model_file(str(MODELS / "sensor.toml"))
    models = {"hw": fig1, "sensor": sensor}
    gamma = initial_gamma(models)
    assert gamma == {"hw": "a", "sensor": "idle"}
    total = phi_total(models, gamma)
    assert total.value == 9  # 8 + 1
    only_hw = phi_total({"hw": fig1}, {"hw": "a"})
    assert total.value - only_hw.value == sensor.power_draw("idle").value


def test_phi_total_requires_exact_cover(fig1):
    with pytest.raises(ModelError, match="do not cover"):
        phi_total({"hw": fig1}, {})
    with pytest.raises(ModelError, match="do not cover"):
        phi_total({}, {"hw": "a"})


def test_phi_total_empty_is_zero():
    assert phi_total({}, {}).value == 0


def test_guarded_transitions_first_match_wins():
    sensor = load_model_file(str(MODELS / "sensor.toml"))
    hot = sensor.step("idle", "poll", [5])
    assert (hot.target, hot.energy.value, hot.value) == ("active", 2, 5)
    cold = sensor.step("idle", "poll", [0])
    assert (cold.target, cold.energy.value, cold.value) == ("idle", 1, 0)


def test_multi_param_guards():
    motor = load_model_file(str(MODELS / "motor.toml"))
    fast = motor.step("off", "set_speed", [True, 9])
    assert (fast.target, fast.value) == ("fast", 9)
    slow = motor.step("off", "set_speed", [True, 2])
    assert (slow.target, slow.value) == ("slow", 1)


def test_param_echo_and_literals():
    sensor = load_model_file(str(MODELS / "sensor.toml"))
    assert sensor.step("idle", "emit", [2.5]).value == 2.5
    assert sensor.step("idle", "is_active", []).value is False
    assert sensor.step("active", "is_active", []).value is True


def test_signature_projection():
    sensor = load_model_file(str(MODELS / "sensor.toml"))
    sig = sensor.signature()
    assert sig.functions["poll"] == ((INT,), INT)
    assert sig.functions["is_active"] == ((), BOOL)


def _base_model(**overrides):
    text = """
name = "m"
initial = "s"

[states.s]
power = "1"

[functions.f]
transitions = [{ from = "s", to = "s", energy = "1" }]
"""
    for old, new in overrides.items():
        text = text.replace(old, new)
    return text


def test_load_errors_unknown_state():
    with pytest.raises(ModelError, match="unknown state"):
        load_model(_base_model(**{'to = "s"': 'to = "t"'}))


def test_load_errors_negative_energy_monotonicity():
    with pytest.raises(ModelError, match="monotonically"):
        load_model(_base_model(**{'energy = "1"': 'energy = "-1"'}))


def test_load_errors_negative_power():
    with pytest.raises(ModelError, match="monotonically"):
        load_model(_base_model(**{'power = "1"': 'power = "-2"'}))


def test_load_errors_duplicate_unguarded_transitions():
    text = _base_model(**{
        'transitions = [{ from = "s", to = "s", energy = "1" }]':
        'transitions = [{ from = "s", to = "s", energy = "1" }, '
        '{ from = "s", to = "s", energy = "2" }]'})
    with pytest.raises(ModelError, match="duplicate transition"):
        load_model(text)


def test_load_errors_guard_unknown_parameter():
    with pytest.raises(ModelError, match="unknown parameter"):
        load_model(_base_model(**{
            'from = "s", to = "s"': 'from = "s", guard = "arg0 > 0", to = "s"'}))


def test_load_errors_bad_initial():
    with pytest.raises(ModelError, match="initial state"):
        load_model(_base_model(**{'initial = "s"': 'initial = "zz"'}))


def test_load_errors_long_decimal():
    with pytest.raises(ModelError, match="fractional digits"):
        load_model(_base_model(**{'power = "1"': 'power = "0.1234567891"'}))


def test_decimal_power_exact():
    model = load_model(_base_model(**{'power = "1"': 'power = "2.5"'}))
    assert model.power_draw("s").value == Fraction(5, 2)


def test_unreachable_state_warning():
    text = _base_model() + '\n[states.orphan]\npower = "1"\n'
    model = load_model(text)
    _, warnings = validate(model)
    assert any("unreachable" in str(w) for w in warnings)


def test_monotonic_accumulation_along_walks():
    fig1 = load_model_file(str(MODELS / "fig1.toml"))
    total = Fraction(0)
    state = fig1.initial
    for fun in ("ab", "bb", "bc", "ca", "ab", "bc", "cd"):
        before = total
        step = fig1.step(state, fun, [])
        total += step.energy.value
        state = step.target
        assert total >= before


def test_models_round_trip_exactly():
    for name in ("fig1.toml", "sensor.toml", "motor.toml"):
        model = load_model_file(str(MODELS / name))
        for state in model.states:
            q = model.power_draw(state)
            assert Fraction(q.as_ratio()) == q.value
