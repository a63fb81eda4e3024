"""Compositional energy transformation.

Compiles a type-checked program into immutable combinator terms over
(local state, global state): every expression becomes a value function V, a
state-update function Sigma and an energy function E; statements become the
latter two. Evaluating a term on concrete states yields the value, the
successor states, or the exact energy, and is defined exactly when the
interpreter terminates on the same input.

Construction follows the per-construct shapes of the interpreter's energy
accounting. Calls bind arguments with `scope` (a fresh callee environment
whose global half comes from the argument effects) and isolate caller locals
with `split`; recursion uses lazy one-step unfolding: a call site inside the
function's own body emits a rec placeholder, call sites elsewhere wrap the
installed judgment in subst, and evaluation unfolds a placeholder by one
step each time it is reached.

Local declarations are alpha-renamed at transform time (each declaration
gets a unique name), which gives the flat local environment the same
observable behavior as the interpreter's block-scoped stack.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .ast_nodes import (
    Assign, BinOp, Call, CommaExpr, ComponentCall, Const, Construct, Decl,
    Expr, ExprStmt, FieldAccess, If, Repeat, Seq, Skip, Stmt, Type, Var, While,
)
from .checker import TypedProgram
from .errors import EcaError
from .interp import (
    DEFAULT_RECURSION_LIMIT, EnergyAccount, InputError, MissingMainError,
    NegativeRepeatError, RecursionLimitError, TimingTable, TraceEvent,
    UnboundVariableError, _apply_binop, ensure_python_stack,
)
from .model import ComponentModel, initial_gamma, phi_total
from .quantity import JOULES, Quantity
from .values import StructValue, UNIT, value_repr


class TransformError(EcaError):
    pass


# -- term node kinds ---------------------------------------------------------

class Term:
    pass


@dataclass(frozen=True)
class Identity(Term):
    def __str__(self):
        return "id"


@dataclass(frozen=True)
class ZeroE(Term):
    def __str__(self):
        return "0"


@dataclass(frozen=True)
class ConstV(Term):
    value: object


@dataclass(frozen=True)
class Lookup(Term):
    name: str


@dataclass(frozen=True)
class Update(Term):
    """Bind `name` to the value computed on the pre-effect state.

    Applies `effect` (the right-hand side's state updates), then writes the
    value the right-hand side produced on the original state; targets a
    local or a global binding as resolved during transformation.
    """

    name: str
    value: Term
    effect: Term
    global_target: bool = False


@dataclass(frozen=True)
class Compose(Term):
    first: Term   # state update
    second: Term  # any sort; receives the updated states


@dataclass(frozen=True)
class Plus(Term):
    """Energy sum; both operands are evaluated on the same input states."""

    left: Term
    right: Term


@dataclass(frozen=True)
class Scope(Term):
    """Fresh callee environment: binds `params` to the argument values
    computed on the input states, takes the global half from `effect`
    applied to the input states, and evaluates `inner` there."""

    params: tuple[str, ...]
    args: tuple[Term, ...]
    effect: Term
    inner: Term


@dataclass(frozen=True)
class Split(Term):
    """Resulting local state from the first branch, global state from the
    second; both branches run on the same input states."""

    locals_from: Term
    globals_from: Term


@dataclass(frozen=True)
class TdEc(Term):
    """Time-dependent energy: system power draw times a duration, the
    duration being a timing-table entry or a component function's time."""

    key: str
    component_fun: tuple[str, str] | None = None


@dataclass(frozen=True)
class CmpValue(Term):
    component: str
    fun: str


@dataclass(frozen=True)
class CmpEffect(Term):
    component: str
    fun: str


@dataclass(frozen=True)
class CmpEnergy(Term):
    component: str
    fun: str


@dataclass(frozen=True)
class RecV(Term):
    fun: str


@dataclass(frozen=True)
class RecSigma(Term):
    fun: str


@dataclass(frozen=True)
class RecE(Term):
    fun: str


@dataclass(frozen=True)
class Subst(Term):
    """One-step-unfolding wrapper around an installed function judgment."""

    body: Term
    fun: str
    flavor: str  # "V" | "Σ" | "E"


@dataclass(frozen=True)
class BinOpTerm(Term):
    op: str
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class CondV(Term):
    cond: Term
    then: Term
    orelse: Term


@dataclass(frozen=True)
class CondSigma(Term):
    cond: Term
    then: Term
    orelse: Term


@dataclass(frozen=True)
class CondE(Term):
    cond: Term
    then: Term
    orelse: Term


@dataclass(frozen=True)
class LoopSigma(Term):
    cond: Term
    cond_effect: Term
    body: Term


@dataclass(frozen=True)
class LoopE(Term):
    cond: Term
    cond_effect: Term
    cond_energy: Term
    body_effect: Term
    body_energy: Term


@dataclass(frozen=True)
class RepeatSigma(Term):
    count: Term
    count_effect: Term
    body: Term


@dataclass(frozen=True)
class RepeatE(Term):
    count: Term
    count_effect: Term
    body_effect: Term
    body_energy: Term


@dataclass(frozen=True)
class FieldV(Term):
    value: Term
    field_name: str


@dataclass(frozen=True)
class ConstructV(Term):
    struct_name: str
    args: tuple[Term, ...]


_IDENTITY = Identity()
_ZERO = ZeroE()


def compose(first: Term, second: Term) -> Term:
    """`first >> second`; identity state updates vanish."""
    if isinstance(first, Identity):
        return second
    if isinstance(second, Identity):
        return first
    return Compose(first, second)


def plus(*terms: Term) -> Term:
    """Left-folded energy sum; zero terms vanish."""
    out: Term = _ZERO
    for t in terms:
        if isinstance(t, ZeroE):
            continue
        out = t if isinstance(out, ZeroE) else Plus(out, t)
    return out


# -- transformation ----------------------------------------------------------

@dataclass(frozen=True)
class FunctionTerms:
    params: tuple[str, ...]
    value: Term
    sigma: Term
    energy: Term


@dataclass
class Analysis:
    """Transformed program: per-function judgments plus the globals chain.

    The analysis also remembers the component models and timing table it was
    built against; evaluation defaults to those bindings but accepts
    replacements with the same interface (transform once, evaluate many).
    """

    functions: dict[str, FunctionTerms]
    globals_sigma: Term
    globals_energy: Term
    main: str
    models: dict[str, ComponentModel]
    timing: TimingTable
    struct_layouts: dict[str, list[tuple[str, Type]]]

    def main_terms(self, inputs: dict[str, object] | None = None) -> tuple[Term, Term, Term]:
        """Synthetic call of main with the inputs as constant arguments."""
        entry = self.functions[self.main]
        if inputs is None:
            inputs = {}
        missing = [p for p in entry.params if p not in inputs]
        extra = sorted(set(inputs) - set(entry.params))
        if missing or extra:
            raise InputError(None, f"inputs do not match main's parameters "
                                   f"(missing {missing}, unknown {extra})")
        args = tuple(ConstV(inputs[p]) for p in entry.params)
        value = Scope(entry.params, args, _IDENTITY,
                      Subst(entry.value, self.main, "V"))
        sigma = Scope(entry.params, args, _IDENTITY,
                      Subst(entry.sigma, self.main, "Σ"))
        energy = Scope(entry.params, args, _IDENTITY,
                       Subst(entry.energy, self.main, "E"))
        return value, sigma, energy

    def program_terms(self, inputs: dict[str, object] | None = None) -> tuple[Term, Term, Term]:
        """Whole-program judgments: globals initialized in order, then main."""
        v_main, s_main, e_main = self.main_terms(inputs)
        value = compose(self.globals_sigma, v_main)
        sigma = compose(self.globals_sigma, s_main)
        energy = plus(self.globals_energy, compose(self.globals_sigma, e_main))
        return value, sigma, energy

    def metadata(self) -> dict:
        def digest(text: str) -> str:
            return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]

        return {
            "main": self.main,
            "functions": {
                name: {"params": list(ft.params),
                       "term_sizes": {"V": term_size(ft.value),
                                      "Σ": term_size(ft.sigma),
                                      "E": term_size(ft.energy)}}
                for name, ft in self.functions.items()
            },
            "globals_term_sizes": {"Σ": term_size(self.globals_sigma),
                                   "E": term_size(self.globals_energy)},
            "models": {name: digest(repr(m)) for name, m in self.models.items()},
            "timing": digest(repr(self.timing)),
        }

    def metadata_json(self) -> str:
        return json.dumps(self.metadata(), indent=2, sort_keys=True, ensure_ascii=False)


def term_size(term: Term) -> int:
    size = 1
    for child in vars(term).values():
        if isinstance(child, Term):
            size += term_size(child)
        elif isinstance(child, tuple):
            size += sum(term_size(c) for c in child if isinstance(c, Term))
    return size


class _Renamer:
    """Static scoping for the flat local environment: declarations get
    globally unique names, so shadowing never collides."""

    def __init__(self):
        self.frames: list[dict[str, str]] = []
        self.counter = 0

    def push(self) -> None:
        self.frames.append({})

    def pop(self) -> None:
        self.frames.pop()

    def bind_param(self, name: str) -> None:
        self.frames[-1][name] = name

    def declare(self, name: str) -> str:
        self.counter += 1
        unique = f"{name}#{self.counter}"
        self.frames[-1][name] = unique
        return unique

    def resolve(self, name: str) -> str | None:
        for frame in reversed(self.frames):
            if name in frame:
                return frame[name]
        return None


class _Transformer:
    def __init__(self, typed: TypedProgram, models: dict[str, ComponentModel]):
        self.typed = typed
        self.models = models
        self.table: dict[str, FunctionTerms] = {}
        self.placeholders: set[str] = {f.name for f in typed.program.functions}
        self.names = _Renamer()

    def run(self) -> tuple[dict[str, FunctionTerms], Term, Term]:
        for fun in self.typed.program.functions:
            self.names = _Renamer()
            self.names.push()
            for pname, _ in fun.params:
                self.names.bind_param(pname)
            # the function's own entry stays a placeholder while its body is
            # transformed, so self calls become rec placeholders
            value, sigma, energy = self.expr(fun.body)
            self.names.pop()
            self.table[fun.name] = FunctionTerms(
                tuple(p for p, _ in fun.params), value, sigma, energy)
            self.placeholders.discard(fun.name)

        globals_sigma: Term = _IDENTITY
        globals_energy: Term = _ZERO
        for glob in self.typed.program.globals:
            self.names = _Renamer()
            self.names.push()
            v, s, e = self.expr(glob.init)
            self.names.pop()
            g_sigma = Update(glob.name, v, s, global_target=True)
            g_energy = plus(e, compose(s, TdEc("t_decl")))
            globals_energy = plus(globals_energy, compose(globals_sigma, g_energy))
            globals_sigma = compose(globals_sigma, g_sigma)
        return self.table, globals_sigma, globals_energy

    # -- argument threading ----------------------------------------------

    def thread(self, args: list[Expr]) -> tuple[tuple[Term, ...], Term, Term]:
        """Left-to-right argument evaluation: each value term sees the
        effects of the arguments before it; effects and energies chain."""
        v_terms: list[Term] = []
        sigma: Term = _IDENTITY
        energy: Term = _ZERO
        for arg in args:
            v, s, e = self.expr(arg)
            v_terms.append(compose(sigma, v))
            energy = plus(energy, compose(sigma, e))
            sigma = compose(sigma, s)
        return tuple(v_terms), sigma, energy

    # -- expressions -------------------------------------------------------

    def expr(self, e: Expr) -> tuple[Term, Term, Term]:
        if isinstance(e, Const):
            return ConstV(e.value), _IDENTITY, TdEc("t_const")
        if isinstance(e, Var):
            local = self.names.resolve(e.name)
            return Lookup(local or e.name), _IDENTITY, TdEc("t_var")
        if isinstance(e, BinOp):
            lv, ls, le = self.expr(e.lhs)
            rv, rs, re_ = self.expr(e.rhs)
            value = BinOpTerm(e.op, lv, compose(ls, rv))
            sigma = compose(ls, rs)
            energy = plus(le, compose(ls, re_), compose(sigma, TdEc("t_binop")))
            return value, sigma, energy
        if isinstance(e, FieldAccess):
            v, s, en = self.expr(e.obj)
            return (FieldV(v, e.field_name), s,
                    plus(en, compose(s, TdEc("t_fieldaccess"))))
        if isinstance(e, Decl):
            v, s, en = self.expr(e.init)
            unique = self.names.declare(e.name)
            sigma = Update(unique, v, s)
            energy = plus(en, compose(s, TdEc("t_decl")))
            return v, sigma, energy
        if isinstance(e, Assign):
            v, s, en = self.expr(e.value)
            local = self.names.resolve(e.name)
            sigma = Update(local or e.name, v, s, global_target=local is None)
            energy = plus(en, compose(s, TdEc("t_assign")))
            return v, sigma, energy
        if isinstance(e, Construct):
            v_terms, sigma, energy = self.thread(e.args)
            return (ConstructV(e.struct_name, v_terms), sigma,
                    plus(energy, compose(sigma, TdEc("t_construct"))))
        if isinstance(e, ComponentCall):
            v_terms, sigma, energy = self.thread(e.args)
            params = tuple(p for p, _ in self.models[e.component].functions[e.fun].params)
            scope = lambda inner: Scope(params, v_terms, sigma, inner)
            value = scope(CmpValue(e.component, e.fun))
            eff = Split(sigma, scope(CmpEffect(e.component, e.fun)))
            en = plus(energy, scope(plus(TdEc("t_f", (e.component, e.fun)),
                                         CmpEnergy(e.component, e.fun))))
            return value, eff, en
        if isinstance(e, Call):
            v_terms, sigma, energy = self.thread(e.args)
            params = tuple(p for p, _ in self.typed.function_sigs[e.fun][0])
            scope = lambda inner: Scope(params, v_terms, sigma, inner)
            if e.fun in self.placeholders:
                # call under transformation of the callee itself: placeholder
                value = scope(RecV(e.fun))
                eff = Split(sigma, scope(RecSigma(e.fun)))
                en = plus(energy, scope(plus(TdEc("t_call"), RecE(e.fun))))
            else:
                entry = self.table[e.fun]
                value = scope(Subst(entry.value, e.fun, "V"))
                eff = Split(sigma, scope(Subst(entry.sigma, e.fun, "Σ")))
                en = plus(energy, scope(plus(TdEc("t_call"),
                                             Subst(entry.energy, e.fun, "E"))))
            return value, eff, en
        if isinstance(e, CommaExpr):
            s_sigma, s_energy = self.stmt(e.stmt)
            v, sigma, energy = self.expr(e.expr)
            return (compose(s_sigma, v), compose(s_sigma, sigma),
                    plus(s_energy, compose(s_sigma, energy)))
        raise AssertionError(f"unknown expression {e!r}")

    # -- statements ---------------------------------------------------------

    def stmt(self, s: Stmt) -> tuple[Term, Term]:
        if isinstance(s, Skip):
            return _IDENTITY, TdEc("t_skip")
        if isinstance(s, ExprStmt):
            _, sigma, energy = self.expr(s.expr)
            return sigma, energy
        if isinstance(s, Seq):
            s1, e1 = self.stmt(s.first)
            s2, e2 = self.stmt(s.second)
            return compose(s1, s2), plus(e1, compose(s1, e2))
        if isinstance(s, If):
            cv, cs, ce = self.expr(s.cond)
            ts, te = self._block(s.then)
            if s.orelse is not None:
                es, ee = self._block(s.orelse)
            else:
                es, ee = _IDENTITY, _ZERO
            sigma = CondSigma(cv, compose(cs, ts), compose(cs, es))
            energy = plus(ce, compose(cs, TdEc("t_if")),
                          CondE(cv, compose(cs, te),
                                compose(cs, ee) if not isinstance(ee, ZeroE) else _ZERO))
            return sigma, energy
        if isinstance(s, While):
            cv, cs, ce = self.expr(s.cond)
            bs, be = self._block(s.body)
            sigma = LoopSigma(cv, cs, bs)
            energy = plus(TdEc("t_while"), LoopE(cv, cs, ce, bs, be))
            return sigma, energy
        if isinstance(s, Repeat):
            nv, ns, ne = self.expr(s.count)
            bs, be = self._block(s.body)
            sigma = RepeatSigma(nv, ns, bs)
            energy = plus(ne, compose(ns, TdEc("t_repeat")),
                          RepeatE(nv, ns, bs, be))
            return sigma, energy
        raise AssertionError(f"unknown statement {s!r}")

    def _block(self, s: Stmt) -> tuple[Term, Term]:
        self.names.push()
        out = self.stmt(s)
        self.names.pop()
        return out


def transform_program(typed: TypedProgram, models: dict[str, ComponentModel],
                      timing: TimingTable | None = None) -> Analysis:
    """Transform every function (own entry as placeholder, then installed),
    then the globals chain; exposes main's judgment."""
    if typed.main not in {f.name for f in typed.program.functions}:
        raise MissingMainError()
    transformer = _Transformer(typed, models)
    table, globals_sigma, globals_energy = transformer.run()
    return Analysis(table, globals_sigma, globals_energy, typed.main,
                    models, timing or TimingTable(), dict(typed.struct_layouts))


# -- evaluation ---------------------------------------------------------------

@dataclass(frozen=True)
class GState:
    """Global half of the machine state: variables and component states."""

    variables: dict[str, object]
    components: dict[str, str]

    def with_variable(self, name: str, value) -> "GState":
        new = dict(self.variables)
        new[name] = value
        return GState(new, self.components)

    def with_component(self, name: str, state: str) -> "GState":
        new = dict(self.components)
        new[name] = state
        return GState(self.variables, new)


class _EvalEnv:
    def __init__(self, functions: dict[str, FunctionTerms],
                 models: dict[str, ComponentModel], timing: TimingTable,
                 struct_layouts: dict[str, list[tuple[str, Type]]],
                 limit: int, account: EnergyAccount | None):
        self.functions = functions
        self.models = models
        self.timing = timing
        self.struct_layouts = struct_layouts
        self.limit = limit
        self.account = account
        self.depth = 0


def evaluate(term: Term, ps: dict[str, object], gs: GState,
             analysis: Analysis, *,
             models: dict[str, ComponentModel] | None = None,
             timing: TimingTable | None = None,
             recursion_limit: int = DEFAULT_RECURSION_LIMIT,
             account: EnergyAccount | None = None):
    """Evaluate a term on concrete states.

    Value terms return a value, state terms a (locals, GState) pair, energy
    terms an exact Quantity in joules. Models and timing default to the
    analysis bindings; passing replacements evaluates the same terms against
    different hardware.
    """
    ensure_python_stack(recursion_limit)
    env = _EvalEnv(analysis.functions, models or analysis.models,
                   timing or analysis.timing, analysis.struct_layouts,
                   recursion_limit, account)
    return _eval(term, ps, gs, env)


def _eval(term: Term, ps: dict[str, object], gs: GState, env: _EvalEnv):
    if isinstance(term, ConstV):
        return term.value
    if isinstance(term, Lookup):
        if term.name in ps:
            return ps[term.name]
        if term.name in gs.variables:
            return gs.variables[term.name]
        raise UnboundVariableError(None, f"unbound variable {term.name!r}")
    if isinstance(term, Identity):
        return ps, gs
    if isinstance(term, ZeroE):
        return Quantity(0, JOULES)
    if isinstance(term, Update):
        value = _eval(term.value, ps, gs, env)
        ps2, gs2 = _eval(term.effect, ps, gs, env)
        if term.global_target:
            return ps2, gs2.with_variable(term.name, value)
        new_ps = dict(ps2)
        new_ps[term.name] = value
        return new_ps, gs2
    if isinstance(term, Compose):
        ps2, gs2 = _eval(term.first, ps, gs, env)
        return _eval(term.second, ps2, gs2, env)
    if isinstance(term, Plus):
        left = _eval(term.left, ps, gs, env)
        right = _eval(term.right, ps, gs, env)
        return left + right
    if isinstance(term, Scope):
        values = [_eval(arg, ps, gs, env) for arg in term.args]
        _, gs2 = _eval(term.effect, ps, gs, env)
        callee_ps = dict(zip(term.params, values))
        return _eval(term.inner, callee_ps, gs2, env)
    if isinstance(term, Split):
        ps2, _ = _eval(term.locals_from, ps, gs, env)
        _, gs2 = _eval(term.globals_from, ps, gs, env)
        return ps2, gs2
    if isinstance(term, TdEc):
        if term.component_fun is not None:
            comp, fun = term.component_fun
            duration = env.models[comp].functions[fun].duration
        else:
            duration = env.timing.get(term.key)
        energy = Quantity(0, JOULES)
        if duration.is_zero():
            return energy
        label = (term.key if term.component_fun is None
                 else f"{term.component_fun[0]}::{term.component_fun[1]}")
        for name, model in env.models.items():
            power = model.power_draw(gs.components[name])
            part = power * duration
            energy = energy + part
            if env.account is not None:
                env.account.total = env.account.total + part
                env.account.trace.append(TraceEvent(
                    "time-draw", part, component=name, construct=label,
                    duration=duration, power=power))
        return energy
    if isinstance(term, (CmpValue, CmpEffect, CmpEnergy)):
        return _eval_component(term, ps, gs, env)
    if isinstance(term, (RecV, RecSigma, RecE)):
        entry = env.functions[term.fun]
        flavor = {RecV: "value", RecSigma: "sigma", RecE: "energy"}[type(term)]
        env.depth += 1
        if env.depth > env.limit:
            raise RecursionLimitError(env.limit)
        try:
            return _eval(getattr(entry, flavor), ps, gs, env)
        finally:
            env.depth -= 1
    if isinstance(term, Subst):
        return _eval(term.body, ps, gs, env)
    if isinstance(term, BinOpTerm):
        lhs = _eval(term.lhs, ps, gs, env)
        rhs = _eval(term.rhs, ps, gs, env)
        return _apply_binop(term.op, lhs, rhs)
    if isinstance(term, (CondV, CondSigma, CondE)):
        taken = _eval(term.cond, ps, gs, env)
        return _eval(term.then if taken else term.orelse, ps, gs, env)
    if isinstance(term, LoopSigma):
        while True:
            taken = _eval(term.cond, ps, gs, env)
            ps, gs = _eval(term.cond_effect, ps, gs, env)
            if not taken:
                return ps, gs
            ps, gs = _eval(term.body, ps, gs, env)
    if isinstance(term, LoopE):
        total = Quantity(0, JOULES)
        while True:
            taken = _eval(term.cond, ps, gs, env)
            total = total + _eval(term.cond_energy, ps, gs, env)
            ps, gs = _eval(term.cond_effect, ps, gs, env)
            if not taken:
                return total
            total = total + _eval(term.body_energy, ps, gs, env)
            ps, gs = _eval(term.body_effect, ps, gs, env)
    if isinstance(term, RepeatSigma):
        count = _eval(term.count, ps, gs, env)
        if count < 0:
            raise NegativeRepeatError(None, count)
        ps, gs = _eval(term.count_effect, ps, gs, env)
        for _ in range(count):
            ps, gs = _eval(term.body, ps, gs, env)
        return ps, gs
    if isinstance(term, RepeatE):
        count = _eval(term.count, ps, gs, env)
        if count < 0:
            raise NegativeRepeatError(None, count)
        ps, gs = _eval(term.count_effect, ps, gs, env)
        total = Quantity(0, JOULES)
        for _ in range(count):
            total = total + _eval(term.body_energy, ps, gs, env)
            ps, gs = _eval(term.body_effect, ps, gs, env)
        return total
    if isinstance(term, FieldV):
        value = _eval(term.value, ps, gs, env)
        return value.get(term.field_name)
    if isinstance(term, ConstructV):
        values = [_eval(arg, ps, gs, env) for arg in term.args]
        layout = env.struct_layouts[term.struct_name]
        return StructValue(term.struct_name,
                           tuple((fname, v) for (fname, _), v in zip(layout, values)))
    raise AssertionError(f"unknown term {term!r}")


def _eval_component(term, ps: dict[str, object], gs: GState, env: _EvalEnv):
    model = env.models[term.component]
    cf = model.functions[term.fun]
    args = [ps[name] for name, _ in cf.params]
    state = gs.components[term.component]
    if isinstance(term, CmpValue):
        return model.step(state, term.fun, args).value
    if isinstance(term, CmpEffect):
        tr = model.select_transition(state, term.fun, args)
        return ps, gs.with_component(term.component, tr.target)
    tr = model.select_transition(state, term.fun, args)
    if env.account is not None:
        env.account.charge_transition(term.component, state, tr.target,
                                      term.fun, tr.energy)
    return tr.energy


@dataclass
class ProgramOutcome:
    value: object
    final_globals: dict[str, object]
    final_components: dict[str, str]
    energy: Quantity
    trace: list[TraceEvent] = field(repr=False, default_factory=list)


def evaluate_program(analysis: Analysis,
                     inputs: dict[str, object] | None = None, *,
                     models: dict[str, ComponentModel] | None = None,
                     timing: TimingTable | None = None,
                     recursion_limit: int = DEFAULT_RECURSION_LIMIT,
                     with_trace: bool = False) -> ProgramOutcome:
    """Run the transformed program: value, final states and exact energy."""
    active_models = models or analysis.models
    gs0 = GState({}, initial_gamma(active_models))
    v_term, s_term, e_term = analysis.program_terms(inputs)
    account = EnergyAccount(active_models)
    energy = evaluate(e_term, {}, gs0, analysis, models=models, timing=timing,
                      recursion_limit=recursion_limit, account=account)
    _, gs_final = evaluate(s_term, {}, gs0, analysis, models=models,
                           timing=timing, recursion_limit=recursion_limit)
    value = evaluate(v_term, {}, gs0, analysis, models=models, timing=timing,
                     recursion_limit=recursion_limit)
    return ProgramOutcome(value, dict(gs_final.variables),
                          dict(gs_final.components), energy,
                          account.trace if with_trace else [])


# -- rec discipline ----------------------------------------------------------

def unguarded_recs(term: Term, guarded: frozenset[str] = frozenset()) -> set[str]:
    """Names of rec placeholders not beneath a matching subst wrapper."""
    if isinstance(term, (RecV, RecSigma, RecE)):
        return set() if term.fun in guarded else {term.fun}
    if isinstance(term, Subst):
        return unguarded_recs(term.body, guarded | {term.fun})
    out: set[str] = set()
    for child in vars(term).values():
        if isinstance(child, Term):
            out |= unguarded_recs(child, guarded)
        elif isinstance(child, tuple):
            for c in child:
                if isinstance(c, Term):
                    out |= unguarded_recs(c, guarded)
    return out


# -- symbolic printing ---------------------------------------------------------

def print_symbolic(term: Term) -> str:
    """Deterministic parenthesized rendering using the combinator names."""
    return _print(term, top=True)


def _print(term: Term, top: bool = False) -> str:
    if isinstance(term, Identity):
        return "id"
    if isinstance(term, ZeroE):
        return "0"
    if isinstance(term, ConstV):
        return value_repr(term.value)
    if isinstance(term, Lookup):
        return f"lookup({term.name})"
    if isinstance(term, Update):
        name = "update_G" if term.global_target else "update"
        return f"{name}[{term.name}]({_print(term.value)}; {_print(term.effect)})"
    if isinstance(term, Compose):
        text = f"{_print(term.first)} >> {_print(term.second)}"
        return text if top else f"({text})"
    if isinstance(term, Plus):
        text = f"{_print(term.left)} (+) {_print(term.right)}"
        return text if top else f"({text})"
    if isinstance(term, Scope):
        params = ",".join(term.params)
        args = ", ".join(_print(a) for a in term.args)
        text = (f"scope[{params}]({args}; {_print(term.effect)})"
                f" >> {_print(term.inner)}")
        return text if top else f"({text})"
    if isinstance(term, Split):
        return f"split({_print(term.locals_from, top=True)}, {_print(term.globals_from, top=True)})"
    if isinstance(term, TdEc):
        return f"td_ec({term.key})"
    if isinstance(term, CmpValue):
        return f"V[{term.component}::{term.fun}]"
    if isinstance(term, CmpEffect):
        return f"Σ[{term.component}::{term.fun}]"
    if isinstance(term, CmpEnergy):
        return f"E[{term.component}::{term.fun}]"
    if isinstance(term, RecV):
        return f"rec_V({term.fun})"
    if isinstance(term, RecSigma):
        return f"rec_Σ({term.fun})"
    if isinstance(term, RecE):
        return f"rec_E({term.fun})"
    if isinstance(term, Subst):
        flavor = term.flavor
        return f"subst({flavor}[{term.fun}], rec_{flavor}({term.fun}))"
    if isinstance(term, BinOpTerm):
        return f"({_print(term.lhs, top=True)} {term.op} {_print(term.rhs, top=True)})"
    if isinstance(term, (CondV, CondSigma, CondE)):
        flavor = {"CondV": "V", "CondSigma": "Σ", "CondE": "E"}[type(term).__name__]
        return (f"cond_{flavor}({_print(term.cond, top=True)}; "
                f"{_print(term.then, top=True)}; {_print(term.orelse, top=True)})")
    if isinstance(term, LoopSigma):
        return (f"loop_Σ({_print(term.cond, top=True)}; "
                f"{_print(term.cond_effect, top=True)}; {_print(term.body, top=True)})")
    if isinstance(term, LoopE):
        return (f"loop_E({_print(term.cond, top=True)}; "
                f"{_print(term.cond_effect, top=True)}; {_print(term.cond_energy, top=True)}; "
                f"{_print(term.body_effect, top=True)}; {_print(term.body_energy, top=True)})")
    if isinstance(term, RepeatSigma):
        return (f"repeat_Σ({_print(term.count, top=True)}; "
                f"{_print(term.count_effect, top=True)}; {_print(term.body, top=True)})")
    if isinstance(term, RepeatE):
        return (f"repeat_E({_print(term.count, top=True)}; "
                f"{_print(term.count_effect, top=True)}; "
                f"{_print(term.body_effect, top=True)}; {_print(term.body_energy, top=True)})")
    if isinstance(term, FieldV):
        return f"{_print(term.value)}.{term.field_name}"
    if isinstance(term, ConstructV):
        return f"{term.struct_name}({', '.join(_print(a) for a in term.args)})"
    raise AssertionError(f"unknown term {term!r}")
