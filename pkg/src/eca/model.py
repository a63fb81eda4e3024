"""Finite-state hardware component models.

A component is an FSM whose states carry a constant power draw (J/s) and
whose transitions, grouped under named component functions, carry an
incidental energy (J), an optional guard over the call arguments, and an
optional return value. Stepping a component fires the first transition (in
declaration order) whose source state and guard match; model files are
validated so that this is deterministic.

Model files are TOML: header keys `name` and `initial`, a `[states.X]`
section per state with a `power` rational string, and a `[functions.f]`
section per function with `params`, `returns_type`, `time` and a
`transitions` array of inline tables `{ from, [guard], to, energy,
[returns] }`. All quantities are exact-rational strings.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .ast_nodes import BOOL, COMPARISON_OPS, FLOAT, INT, LOGIC_OPS, VOID, BinOp, Const, Expr, Type, Var
from .checker import ComponentSignature
from .errors import EcaError
from .lexer import TokenKind, tokenize
from .quantity import JOULES, SECONDS, WATTS, Quantity, QuantityError
from .values import UNIT

_SCALARS = {"bool": BOOL, "int": INT, "float": FLOAT}
_RETURN_TYPES = {"void": VOID, **_SCALARS}


class ModelError(EcaError):
    def __init__(self, message: str, location: str = ""):
        super().__init__(None, message)
        self.location = location

    def __str__(self) -> str:
        return f"{self.location}: {self.message}" if self.location else self.message


@dataclass(frozen=True)
class ModelWarning:
    message: str

    def __str__(self) -> str:
        return self.message


class StepError(EcaError):
    """A component was driven from a state its model does not cover."""

    def __init__(self, component: str, state: str, fun: str):
        super().__init__(None, f"no matching transition for {component}::{fun} "
                               f"from state {state!r}")
        self.component = component
        self.state = state
        self.fun = fun


@dataclass(frozen=True)
class Transition:
    source: str
    target: str
    energy: Quantity  # J
    guard: Expr | None = None
    returns: object = None  # literal value, or param name to echo, or None


@dataclass(frozen=True)
class ComponentFunction:
    name: str
    params: tuple[tuple[str, Type], ...]
    return_type: Type
    duration: Quantity  # s
    transitions: tuple[Transition, ...]


@dataclass(frozen=True)
class StepResult:
    target: str
    energy: Quantity
    duration: Quantity
    value: object


@dataclass(frozen=True)
class ComponentModel:
    name: str
    states: frozenset[str]
    initial: str
    power: dict[str, Quantity]  # J/s per state
    functions: dict[str, ComponentFunction]

    def signature(self) -> ComponentSignature:
        return ComponentSignature(self.name, {
            f.name: (tuple(ty for _, ty in f.params), f.return_type)
            for f in self.functions.values()
        })

    def power_draw(self, state: str) -> Quantity:
        if state not in self.states:
            raise ModelError(f"component {self.name!r} has no state {state!r}")
        return self.power[state]

    def select_transition(self, state: str, fun: str, args: list) -> Transition:
        """First transition (declaration order) from `state` whose guard holds."""
        cf = self.functions.get(fun)
        if cf is None:
            raise ModelError(f"component {self.name!r} has no function {fun!r}")
        if state not in self.states:
            raise ModelError(f"component {self.name!r} has no state {state!r}")
        env = {name: value for (name, _), value in zip(cf.params, args)}
        for tr in cf.transitions:
            if tr.source != state:
                continue
            if tr.guard is None or _eval_guard(tr.guard, env):
                return tr
        raise StepError(self.name, state, fun)

    def step(self, state: str, fun: str, args: list) -> StepResult:
        """Fire a component function: (target state, edge energy, t_f, return value)."""
        tr = self.select_transition(state, fun, args)
        cf = self.functions[fun]
        value: object = UNIT
        if tr.returns is not None:
            if isinstance(tr.returns, str):
                env = {name: value for (name, _), value in zip(cf.params, args)}
                value = env[tr.returns]
            else:
                value = tr.returns
        return StepResult(tr.target, tr.energy, cf.duration, value)


def phi_total(models: dict[str, ComponentModel], gamma: dict[str, str]) -> Quantity:
    """System power draw: sum of each component's power in its current state."""
    if set(models) != set(gamma):
        missing = set(models) ^ set(gamma)
        raise ModelError(f"component states do not cover the model set: {sorted(missing)}")
    total = Quantity(0, WATTS)
    for name, model in models.items():
        total = total + model.power_draw(gamma[name])
    return total


def initial_gamma(models: dict[str, ComponentModel]) -> dict[str, str]:
    return {name: m.initial for name, m in models.items()}


# -- guards ----------------------------------------------------------------

def parse_guard(text: str, loc: str, errors: list[ModelError]) -> Expr | None:
    """Guards are comparisons and and/or over parameter names and literals."""
    from .errors import LexError, ParseError
    from .parser import Parser
    try:
        tokens = tokenize(text)
        parser = Parser(tokens)
        expr = parser._expr()
        if parser.cursor.peek().kind != TokenKind.EOF:
            raise ParseError(parser.cursor.peek().span, "trailing tokens in guard")
    except (ParseError, LexError) as exc:
        errors.append(ModelError(f"invalid guard {text!r}: {exc.message}", loc))
        return None
    if not _guard_shape_ok(expr):
        errors.append(ModelError(
            f"invalid guard {text!r}: only comparisons and and/or over "
            f"parameters and literals are allowed", loc))
        return None
    return expr


def _guard_shape_ok(e: Expr) -> bool:
    if isinstance(e, BinOp):
        if e.op in LOGIC_OPS:
            return _guard_shape_ok(e.lhs) and _guard_shape_ok(e.rhs)
        if e.op in COMPARISON_OPS:
            return _is_guard_atom(e.lhs) and _is_guard_atom(e.rhs)
        return False
    return _is_guard_atom(e) and isinstance(e, (Const, Var))


def _is_guard_atom(e: Expr) -> bool:
    return isinstance(e, (Const, Var))


def _eval_guard(e: Expr, env: dict[str, object]) -> bool:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, BinOp):
        lhs = _eval_guard(e.lhs, env)
        rhs = _eval_guard(e.rhs, env)
        if e.op == "and":
            return lhs and rhs
        if e.op == "or":
            return lhs or rhs
        return {
            ">": lhs > rhs, ">=": lhs >= rhs, "==": lhs == rhs,
            "!=": lhs != rhs, "<=": lhs <= rhs, "<": lhs < rhs,
        }[e.op]
    raise AssertionError(f"bad guard node {e!r}")


def _guard_vars(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, BinOp):
        return _guard_vars(e.lhs) | _guard_vars(e.rhs)
    return set()


def _guard_type(e: Expr, params: dict[str, Type],
                loc: str, errors: list[ModelError]) -> Type | None:
    if isinstance(e, Const):
        if isinstance(e.value, bool):
            return BOOL
        if isinstance(e.value, int):
            return INT
        errors.append(ModelError("float literals are not allowed in guards", loc))
        return None
    if isinstance(e, Var):
        ty = params.get(e.name)
        if ty is None:
            errors.append(ModelError(f"guard references unknown parameter {e.name!r}", loc))
            return None
        if ty == FLOAT:
            errors.append(ModelError(
                f"guard parameter {e.name!r} is float; guards allow int and bool only", loc))
            return None
        return ty
    if isinstance(e, BinOp):
        lt = _guard_type(e.lhs, params, loc, errors)
        rt = _guard_type(e.rhs, params, loc, errors)
        if lt is None or rt is None:
            return None
        if e.op in LOGIC_OPS:
            if lt != BOOL or rt != BOOL:
                errors.append(ModelError(f"operands of {e.op!r} in guard must be bool", loc))
                return None
            return BOOL
        if lt != rt:
            errors.append(ModelError(f"guard comparison mixes {lt} and {rt}", loc))
            return None
        if e.op not in ("==", "!=") and lt == BOOL:
            errors.append(ModelError(f"ordering comparison on bool in guard", loc))
            return None
        return BOOL
    raise AssertionError


# -- loading ----------------------------------------------------------------

def load_model(text: str, source_name: str = "<model>") -> ComponentModel:
    """Parse and validate a model file; raises ModelError on the first failure
    after collecting the full error list (available on the exception)."""
    models_errors: list[ModelError] = []
    model = _parse_model(text, source_name, models_errors)
    if model is not None:
        errors, _ = validate(model)
        models_errors.extend(errors)
    if models_errors:
        exc = models_errors[0]
        exc.all_errors = models_errors  # type: ignore[attr-defined]
        raise exc
    assert model is not None
    return model


def load_model_file(path: str) -> ComponentModel:
    with open(path, "rb") as fh:
        text = fh.read().decode("utf-8")
    return load_model(text, path)


def _parse_model(text: str, src: str, errors: list[ModelError]) -> ComponentModel | None:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        errors.append(ModelError(f"model file syntax: {exc}", src))
        return None

    def quantity(raw, unit: str, loc: str) -> Quantity:
        if not isinstance(raw, str):
            errors.append(ModelError(
                f"{loc}: quantities must be rational strings, got {raw!r}", src))
            return Quantity(0, unit)
        try:
            return Quantity.parse(raw, unit)
        except QuantityError as exc:
            errors.append(ModelError(f"{loc}: {exc}", src))
            return Quantity(0, unit)

    name = doc.get("name")
    initial = doc.get("initial")
    if not isinstance(name, str):
        errors.append(ModelError("missing or invalid 'name'", src))
        name = "<unnamed>"
    if not isinstance(initial, str):
        errors.append(ModelError("missing or invalid 'initial'", src))
        initial = ""

    states_doc = doc.get("states", {})
    if not isinstance(states_doc, dict) or not states_doc:
        errors.append(ModelError("model declares no states", src))
        states_doc = {}
    power: dict[str, Quantity] = {}
    for state, body in states_doc.items():
        power[state] = quantity(body.get("power") if isinstance(body, dict) else None,
                                WATTS, f"states.{state}.power")

    functions: dict[str, ComponentFunction] = {}
    funs_doc = doc.get("functions", {})
    for fname, body in funs_doc.items():
        loc = f"functions.{fname}"
        if not isinstance(body, dict):
            errors.append(ModelError(f"{loc}: must be a table", src))
            continue
        params: list[tuple[str, Type]] = []
        for i, p in enumerate(body.get("params", [])):
            if not (isinstance(p, dict) and isinstance(p.get("name"), str)
                    and p.get("type") in _SCALARS):
                errors.append(ModelError(
                    f"{loc}.params[{i}]: expected {{ name = ..., type = bool|int|float }}", src))
                continue
            params.append((p["name"], _SCALARS[p["type"]]))
        ret_raw = body.get("returns_type", "void")
        if ret_raw not in _RETURN_TYPES:
            errors.append(ModelError(f"{loc}.returns_type: invalid type {ret_raw!r}", src))
            ret_raw = "void"
        ret = _RETURN_TYPES[ret_raw]
        duration = quantity(body.get("time", "0"), SECONDS, f"{loc}.time")
        transitions: list[Transition] = []
        for i, tr in enumerate(body.get("transitions", [])):
            tloc = f"{loc}.transitions[{i}]"
            if not isinstance(tr, dict):
                errors.append(ModelError(f"{tloc}: expected an inline table", src))
                continue
            source = tr.get("from")
            target = tr.get("to")
            if not isinstance(source, str) or not isinstance(target, str):
                errors.append(ModelError(f"{tloc}: needs 'from' and 'to' states", src))
                continue
            energy = quantity(tr.get("energy", "0"), JOULES, f"{tloc}.energy")
            guard = None
            if "guard" in tr:
                guard = parse_guard(str(tr["guard"]), f"{src}:{tloc}", errors)
            returns = tr.get("returns")
            transitions.append(Transition(source, target, energy, guard, returns))
        functions[fname] = ComponentFunction(fname, tuple(params), ret,
                                             duration, tuple(transitions))

    return ComponentModel(name, frozenset(power), initial, power, functions)


def validate(model: ComponentModel) -> tuple[list[ModelError], list[ModelWarning]]:
    """Structural validation: errors for inconsistencies, warnings for partiality."""
    errors: list[ModelError] = []
    warnings: list[ModelWarning] = []
    where = f"model {model.name!r}"

    if model.initial not in model.states:
        errors.append(ModelError(f"{where}: initial state {model.initial!r} is not declared"))
    for state, p in model.power.items():
        if p.is_negative():
            errors.append(ModelError(
                f"{where}: state {state!r} has negative power draw "
                f"(consumption must increase monotonically)"))

    for f in model.functions.values():
        floc = f"{where}, function {f.name!r}"
        if f.duration.is_negative():
            errors.append(ModelError(f"{floc}: negative duration"))
        param_types = dict(f.params)
        for i, tr in enumerate(f.transitions):
            tloc = f"{floc}, transition {i}"
            for endpoint in (tr.source, tr.target):
                if endpoint not in model.states:
                    errors.append(ModelError(f"{tloc}: unknown state {endpoint!r}"))
            if tr.energy.is_negative():
                errors.append(ModelError(
                    f"{tloc}: negative energy (consumption must increase monotonically)"))
            if tr.guard is not None:
                _guard_type(tr.guard, param_types, tloc, errors)
            _check_return_spec(tr, f, tloc, errors)
        # duplicate (source, guard) pairs make transition choice ambiguous
        seen: set[tuple[str, str]] = set()
        for tr in f.transitions:
            key = (tr.source, _guard_key(tr.guard))
            if key in seen:
                errors.append(ModelError(
                    f"{floc}: duplicate transition from state {tr.source!r} "
                    f"with identical guard"))
            seen.add(key)

    # partial (state, function) coverage is legal but worth flagging
    sourced: set[str] = set()
    for f in model.functions.values():
        covered = {tr.source for tr in f.transitions}
        sourced |= covered
        for state in sorted(model.states - covered):
            warnings.append(ModelWarning(
                f"{where}: function {f.name!r} has no transition from state {state!r}"))
    for state in sorted(model.states - sourced):
        warnings.append(ModelWarning(f"{where}: state {state!r} has no outgoing transitions"))

    reachable = {model.initial} if model.initial in model.states else set()
    frontier = list(reachable)
    edges: dict[str, set[str]] = {}
    for f in model.functions.values():
        for tr in f.transitions:
            edges.setdefault(tr.source, set()).add(tr.target)
    while frontier:
        state = frontier.pop()
        for nxt in edges.get(state, ()):
            if nxt not in reachable and nxt in model.states:
                reachable.add(nxt)
                frontier.append(nxt)
    for state in sorted(model.states - reachable):
        warnings.append(ModelWarning(
            f"{where}: state {state!r} is unreachable from the initial state"))

    return errors, warnings


def _guard_key(guard: Expr | None) -> str:
    if guard is None:
        return ""
    if isinstance(guard, Const):
        return f"c:{guard.value!r}"
    if isinstance(guard, Var):
        return f"v:{guard.name}"
    if isinstance(guard, BinOp):
        return f"({_guard_key(guard.lhs)}{guard.op}{_guard_key(guard.rhs)})"
    raise AssertionError


def _check_return_spec(tr: Transition, f: ComponentFunction,
                       loc: str, errors: list[ModelError]) -> None:
    if tr.returns is None:
        return
    if f.return_type == VOID:
        errors.append(ModelError(f"{loc}: void function cannot return a value"))
        return
    if isinstance(tr.returns, str):
        params = dict(f.params)
        if tr.returns not in params:
            errors.append(ModelError(
                f"{loc}: return spec echoes unknown parameter {tr.returns!r}"))
        elif params[tr.returns] != f.return_type:
            errors.append(ModelError(
                f"{loc}: echoed parameter {tr.returns!r} has type "
                f"{params[tr.returns]}, function returns {f.return_type}"))
        return
    expected = {BOOL: bool, INT: int, FLOAT: float}[f.return_type]
    if expected is int and isinstance(tr.returns, bool):
        errors.append(ModelError(f"{loc}: bool literal for int return"))
    elif not isinstance(tr.returns, expected):
        errors.append(ModelError(
            f"{loc}: return literal {tr.returns!r} does not match "
            f"return type {f.return_type}"))
