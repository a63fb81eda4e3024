"""Energy-aware reference interpreter.

Walks a type-checked program over the machine state (local scopes, global
variables, component states) while accumulating exact energy. Every charge
is recorded as a trace event, so the total always equals the trace sum:

  * time-draw events: one per component whenever a construct with a nonzero
    duration executes, worth that component's power times the duration;
  * transition events: the incidental energy of a fired component edge.

Charging points, construct by construct: a construct's own charge lands
after its subexpressions have been evaluated (at the resulting component
states); `while` charges t_while once at loop entry and its condition's own
costs on every test; `repeat` evaluates its count once, then charges
t_repeat; `;` sequencing is free glue. Component calls charge the system
power draw times the function's duration in the pre-transition states, then
the edge energy, exactly in that order.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .ast_nodes import (
    Assign, BinOp, Call, CommaExpr, ComponentCall, Const, Construct, Decl,
    Expr, ExprStmt, FieldAccess, If, Repeat, Seq, Skip, Stmt, Var, While,
)
from .checker import TypedProgram
from .errors import EcaError, Span
from .model import ComponentModel, StepError, initial_gamma, phi_total
from .quantity import JOULES, SECONDS, Quantity, QuantityError
from .values import UNIT, StructValue

DEFAULT_RECURSION_LIMIT = 10_000

TIMING_KEYS = (
    "t_var", "t_assign", "t_fieldaccess", "t_const", "t_binop", "t_decl",
    "t_construct", "t_call", "t_if", "t_while", "t_repeat", "t_skip", "t_seq",
)


class EcaRuntimeError(EcaError):
    pass


class UnboundVariableError(EcaRuntimeError):
    pass


class NegativeRepeatError(EcaRuntimeError):
    def __init__(self, span: Span | None, count: int):
        super().__init__(span, f"repeat count is negative: {count}")
        self.count = count


class RecursionLimitError(EcaRuntimeError):
    def __init__(self, limit: int):
        super().__init__(None, f"recursion limit of {limit} exceeded")
        self.limit = limit


class MissingMainError(EcaRuntimeError):
    def __init__(self):
        super().__init__(None, "program has no 'main' function")


class InputError(EcaRuntimeError):
    pass


@dataclass(frozen=True)
class TimingTable:
    """Per-construct execution durations multiplying the system power draw.

    t_seq is accepted for interface completeness but `;` sequencing itself
    charges nothing; see the module docstring.
    """

    t_var: Quantity = Quantity(0, SECONDS)
    t_assign: Quantity = Quantity(0, SECONDS)
    t_fieldaccess: Quantity = Quantity(0, SECONDS)
    t_const: Quantity = Quantity(0, SECONDS)
    t_binop: Quantity = Quantity(0, SECONDS)
    t_decl: Quantity = Quantity(0, SECONDS)
    t_construct: Quantity = Quantity(0, SECONDS)
    t_call: Quantity = Quantity(0, SECONDS)
    t_if: Quantity = Quantity(0, SECONDS)
    t_while: Quantity = Quantity(0, SECONDS)
    t_repeat: Quantity = Quantity(0, SECONDS)
    t_skip: Quantity = Quantity(0, SECONDS)
    t_seq: Quantity = Quantity(0, SECONDS)

    def __post_init__(self):
        for key in TIMING_KEYS:
            q = getattr(self, key)
            if q.unit != SECONDS or q.is_negative():
                raise QuantityError(f"timing {key} must be a non-negative duration")

    def get(self, key: str) -> Quantity:
        return getattr(self, key)

    @classmethod
    def from_mapping(cls, raw: dict) -> "TimingTable":
        unknown = set(raw) - set(TIMING_KEYS)
        if unknown:
            raise QuantityError(f"unknown timing keys: {sorted(unknown)}")
        return cls(**{k: Quantity.parse(v, SECONDS) for k, v in raw.items()})

    @classmethod
    def load(cls, text: str) -> "TimingTable":
        return cls.from_mapping(tomllib.loads(text))

    @classmethod
    def load_file(cls, path: str) -> "TimingTable":
        with open(path, "rb") as fh:
            return cls.load(fh.read().decode("utf-8"))


@dataclass(frozen=True)
class TraceEvent:
    kind: str  # "transition" | "time-draw"
    energy: Quantity  # J
    component: str | None = None
    # transition detail
    source: str | None = None
    target: str | None = None
    fun: str | None = None
    # time-draw detail
    construct: str | None = None
    duration: Quantity | None = None
    power: Quantity | None = None

    def to_json(self) -> dict:
        if self.kind == "transition":
            return {"kind": "transition", "component": self.component,
                    "from": self.source, "to": self.target, "fun": self.fun,
                    "energy": self.energy.as_ratio()}
        return {"kind": "time-draw", "component": self.component,
                "construct": self.construct,
                "duration": self.duration.as_ratio(),
                "power": self.power.as_ratio(),
                "energy": self.energy.as_ratio()}


def trace_to_jsonl(trace: list[TraceEvent]) -> str:
    import json
    return "\n".join(json.dumps(ev.to_json()) for ev in trace) + ("\n" if trace else "")


class LocalState:
    """Stack of scopes; lookup is innermost-first."""

    def __init__(self):
        self.scopes: list[dict[str, object]] = [{}]

    def push(self) -> None:
        self.scopes.append({})

    def pop(self) -> None:
        self.scopes.pop()

    def declare(self, name: str, value) -> None:
        self.scopes[-1][name] = value

    def lookup(self, name: str):
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return _MISSING

    def assign(self, name: str, value) -> bool:
        for scope in reversed(self.scopes):
            if name in scope:
                scope[name] = value
                return True
        return False

    def snapshot(self) -> list[dict[str, object]]:
        return [dict(s) for s in self.scopes]


_MISSING = object()


@dataclass
class RunResult:
    value: object
    final_locals: list[dict[str, object]]
    final_globals: dict[str, object]
    final_components: dict[str, str]
    energy: Quantity
    trace: list[TraceEvent] = field(repr=False, default_factory=list)


class EnergyAccount:
    """Exact energy accumulator; shared by both engines so traces align."""

    def __init__(self, models: dict[str, ComponentModel]):
        self.models = models
        self.total = Quantity(0, JOULES)
        self.trace: list[TraceEvent] = []

    def charge_time(self, construct: str, duration: Quantity,
                    gamma: dict[str, str]) -> None:
        if duration.is_zero():
            return
        for name, model in self.models.items():
            power = model.power_draw(gamma[name])
            energy = power * duration
            self.total = self.total + energy
            self.trace.append(TraceEvent("time-draw", energy, component=name,
                                         construct=construct, duration=duration,
                                         power=power))

    def charge_transition(self, component: str, source: str, target: str,
                          fun: str, energy: Quantity) -> None:
        self.total = self.total + energy
        self.trace.append(TraceEvent("transition", energy, component=component,
                                     source=source, target=target, fun=fun))


def ensure_python_stack(limit: int) -> None:
    """Deep ECA recursion needs proportional Python stack headroom."""
    needed = 2_000 + 20 * limit
    if sys.getrecursionlimit() < needed:
        sys.setrecursionlimit(needed)


class Interpreter:
    def __init__(self, typed: TypedProgram, models: dict[str, ComponentModel],
                 timing: TimingTable | None = None,
                 recursion_limit: int = DEFAULT_RECURSION_LIMIT):
        self.typed = typed
        self.program = typed.program
        self.functions = {f.name: f for f in self.program.functions}
        self.models = models
        self.timing = timing or TimingTable()
        self.limit = recursion_limit

    def run(self, inputs: dict[str, object] | None = None) -> RunResult:
        ensure_python_stack(self.limit)
        self.gamma = initial_gamma(self.models)
        self.globals: dict[str, object] = {}
        self.account = EnergyAccount(self.models)
        self.depth = 0

        for glob in self.program.globals:
            self.sigma = LocalState()
            value = self.eval(glob.init)
            self.account.charge_time("t_decl", self.timing.t_decl, self.gamma)
            self.globals[glob.name] = value

        main = self.functions.get(self.typed.main)
        if main is None:
            raise MissingMainError()
        args = self._bind_inputs(main, inputs or {})
        self.depth = 1
        self.sigma = LocalState()
        for (pname, _), arg in zip(main.params, args):
            self.sigma.declare(pname, arg)
        value = self.eval(main.body)
        return RunResult(value, self.sigma.snapshot(), dict(self.globals),
                         dict(self.gamma), self.account.total, self.account.trace)

    def _bind_inputs(self, main, inputs: dict[str, object]) -> list:
        expected = {name for name, _ in main.params}
        extra = set(inputs) - expected
        if extra:
            raise InputError(None, f"unknown input(s): {sorted(extra)}")
        args = []
        for pname, pty in main.params:
            if pname not in inputs:
                raise InputError(None, f"missing input {pname!r} for main")
            value = inputs[pname]
            ok = {"bool": lambda v: isinstance(v, bool),
                  "int": lambda v: isinstance(v, int) and not isinstance(v, bool),
                  "float": lambda v: isinstance(v, float)}.get(pty.name)
            if ok is None:
                raise InputError(None, f"main parameter {pname!r} has non-scalar "
                                       f"type {pty}; cannot be bound from inputs")
            if not ok(value):
                raise InputError(None, f"input {pname!r} must be {pty}, "
                                       f"got {value!r}")
            args.append(value)
        return args

    # -- expressions ----------------------------------------------------

    def eval(self, e: Expr):
        if isinstance(e, Const):
            self.account.charge_time("t_const", self.timing.t_const, self.gamma)
            return e.value
        if isinstance(e, Var):
            value = self.sigma.lookup(e.name)
            if value is _MISSING:
                value = self.globals.get(e.name, _MISSING)
            if value is _MISSING:
                raise UnboundVariableError(e.span, f"unbound variable {e.name!r}")
            self.account.charge_time("t_var", self.timing.t_var, self.gamma)
            return value
        if isinstance(e, BinOp):
            lhs = self.eval(e.lhs)
            rhs = self.eval(e.rhs)
            self.account.charge_time("t_binop", self.timing.t_binop, self.gamma)
            return _apply_binop(e.op, lhs, rhs)
        if isinstance(e, FieldAccess):
            obj = self.eval(e.obj)
            self.account.charge_time("t_fieldaccess", self.timing.t_fieldaccess,
                                     self.gamma)
            return obj.get(e.field_name)
        if isinstance(e, Decl):
            value = self.eval(e.init)
            self.account.charge_time("t_decl", self.timing.t_decl, self.gamma)
            self.sigma.declare(e.name, value)
            return value
        if isinstance(e, Assign):
            value = self.eval(e.value)
            self.account.charge_time("t_assign", self.timing.t_assign, self.gamma)
            if not self.sigma.assign(e.name, value):
                if e.name not in self.globals:
                    raise UnboundVariableError(e.span, f"unbound variable {e.name!r}")
                self.globals[e.name] = value
            return value
        if isinstance(e, Construct):
            args = [self.eval(a) for a in e.args]
            self.account.charge_time("t_construct", self.timing.t_construct,
                                     self.gamma)
            layout = self.typed.struct_layouts[e.struct_name]
            return StructValue(e.struct_name,
                               tuple((fname, arg) for (fname, _), arg in zip(layout, args)))
        if isinstance(e, Call):
            args = [self.eval(a) for a in e.args]
            self.account.charge_time("t_call", self.timing.t_call, self.gamma)
            value, _ = self.call_function(e.fun, args)
            return value
        if isinstance(e, ComponentCall):
            args = [self.eval(a) for a in e.args]
            model = self.models[e.component]
            state = self.gamma[e.component]
            step = model.step(state, e.fun, args)
            # power draw is priced in the pre-transition states
            self.account.charge_time(f"{e.component}::{e.fun}", step.duration,
                                     self.gamma)
            self.account.charge_transition(e.component, state, step.target,
                                           e.fun, step.energy)
            self.gamma[e.component] = step.target
            return step.value
        if isinstance(e, CommaExpr):
            self.exec(e.stmt)
            return self.eval(e.expr)
        raise AssertionError(f"unknown expression {e!r}")

    def call_function(self, name: str, args: list) -> tuple[object, LocalState]:
        """By-value call: the callee sees only its parameters and the globals."""
        self.depth += 1
        if self.depth > self.limit:
            raise RecursionLimitError(self.limit)
        fun = self.functions[name]
        caller_sigma = self.sigma
        self.sigma = LocalState()
        for (pname, _), arg in zip(fun.params, args):
            self.sigma.declare(pname, arg)
        try:
            value = self.eval(fun.body)
            callee_sigma = self.sigma
        finally:
            self.sigma = caller_sigma
            self.depth -= 1
        return value, callee_sigma

    # -- statements -----------------------------------------------------

    def exec(self, s: Stmt) -> None:
        if isinstance(s, Skip):
            self.account.charge_time("t_skip", self.timing.t_skip, self.gamma)
            return
        if isinstance(s, Seq):
            self.exec(s.first)
            self.exec(s.second)
            return
        if isinstance(s, ExprStmt):
            self.eval(s.expr)
            return
        if isinstance(s, If):
            taken = self.eval(s.cond)
            self.account.charge_time("t_if", self.timing.t_if, self.gamma)
            if taken:
                self._exec_block(s.then)
            elif s.orelse is not None:
                self._exec_block(s.orelse)
            return
        if isinstance(s, While):
            self.account.charge_time("t_while", self.timing.t_while, self.gamma)
            while True:
                if not self.eval(s.cond):
                    break
                self._exec_block(s.body)
            return
        if isinstance(s, Repeat):
            count = self.eval(s.count)
            if count < 0:
                raise NegativeRepeatError(s.span, count)
            self.account.charge_time("t_repeat", self.timing.t_repeat, self.gamma)
            for _ in range(count):
                self._exec_block(s.body)
            return
        raise AssertionError(f"unknown statement {s!r}")

    def _exec_block(self, s: Stmt) -> None:
        self.sigma.push()
        try:
            self.exec(s)
        finally:
            self.sigma.pop()


def _apply_binop(op: str, lhs, rhs):
    if op == "+":
        return lhs + rhs
    if op == "-":
        return lhs - rhs
    if op == "*":
        return lhs * rhs
    if op == "and":
        return lhs and rhs
    if op == "or":
        return lhs or rhs
    if op == ">":
        return lhs > rhs
    if op == ">=":
        return lhs >= rhs
    if op == "==":
        return lhs == rhs
    if op == "!=":
        return lhs != rhs
    if op == "<=":
        return lhs <= rhs
    if op == "<":
        return lhs < rhs
    raise AssertionError(f"unknown operator {op!r}")


def run(typed: TypedProgram, models: dict[str, ComponentModel],
        timing: TimingTable | None = None,
        inputs: dict[str, object] | None = None,
        recursion_limit: int = DEFAULT_RECURSION_LIMIT) -> RunResult:
    """Initialize components and globals, then interpret main on the inputs."""
    return Interpreter(typed, models, timing, recursion_limit).run(inputs)
