import json
import pathlib

import pytest

from eca.checker import check
from eca.interp import TimingTable, run
from eca.model import load_model_file
from eca.parser import parse_source
from eca.transform import evaluate_program, transform_program

TESTS = pathlib.Path(__file__).parent
MODELS = TESTS / "models"
CORPUS = TESTS / "corpus"
TIMINGS = TESTS / "timings"
ILLTYPED = TESTS / "illtyped"


@pytest.fixture(scope="session")
def fig1():
    return load_model_file(str(MODELS / "fig1.toml"))


@pytest.fixture(scope="session")
def fig1_t2():
    return load_model_file(str(MODELS / "fig1_t2.toml"))


@pytest.fixture(scope="session")
def sensor():
    return load_model_file(str(MODELS / "sensor.toml"))


@pytest.fixture(scope="session")
def motor():
    return load_model_file(str(MODELS / "motor.toml"))


def check_source(source: str, models: dict) -> object:
    return check(parse_source(source), [m.signature() for m in models.values()])


def run_both(source: str, models: dict, timing: TimingTable | None = None,
             inputs: dict | None = None, limit: int = 10_000):
    """Run interpreter and transformation; assert exact agreement; return both."""
    typed = check_source(source, models)
    res = run(typed, models, timing, inputs, recursion_limit=limit)
    analysis = transform_program(typed, models, timing)
    out = evaluate_program(analysis, inputs, recursion_limit=limit)
    assert res.energy.value == out.energy.value, (
        f"energy: interp {res.energy} != transform {out.energy}")
    assert res.value == out.value
    assert res.final_globals == out.final_globals
    assert res.final_components == out.final_components
    return res, out


def corpus_entries():
    """All (program path, source, scenario list) triples of the corpus."""
    entries = []
    for path in sorted(CORPUS.glob("*.eca")):
        sidecar = path.parent / (path.stem + ".scenarios.json")
        with open(sidecar) as fh:
            scenarios = json.load(fh)["scenarios"]
        entries.append((path, path.read_text(), scenarios))
    return entries


def scenario_setup(path: pathlib.Path, scenario: dict):
    """Materialize a sidecar scenario: (models dict, timing, inputs, expect)."""
    models = {}
    for rel in scenario["models"]:
        m = load_model_file(str((path.parent / rel).resolve()))
        models[m.name] = m
    timing = None
    if scenario.get("timing"):
        timing = TimingTable.load_file(str((path.parent / scenario["timing"]).resolve()))
    return models, timing, scenario.get("inputs", {}), scenario.get("expect", {})
