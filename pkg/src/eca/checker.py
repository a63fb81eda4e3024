"""Type checker for parsed ECA programs.

Checks a Program against its struct definitions, function signatures and the
signatures of the loaded hardware components, annotating every expression
node with its type. Checking continues past errors so that all violations
are reported in one pass.

Scoping: locals shadow globals; parameters and top-level body declarations
share the function scope; if/while/repeat bodies open child scopes; a
declaration is visible for the remainder of its enclosing sequence and
redeclaring a name in the same scope is an error. There are no implicit
conversions (in particular no int-to-float widening).
"""

from __future__ import annotations

from dataclasses import dataclass

from .ast_nodes import (
    ARITH_OPS, BOOL, COMPARISON_OPS, FLOAT, INT, LOGIC_OPS, VOID,
    Assign, BinOp, Call, CommaExpr, ComponentCall, Const, Construct, Decl,
    Expr, ExprStmt, FieldAccess, If, Program, Repeat, Seq, Skip, Stmt, Type,
    Var, While,
)
from .errors import EcaError, Span
from .values import UNIT

SCALAR_TYPES = (BOOL, INT, FLOAT)


@dataclass(frozen=True)
class ComponentSignature:
    """Type-level projection of a hardware component model."""

    name: str
    functions: dict[str, tuple[tuple[Type, ...], Type]]


@dataclass
class EcaTypeError:
    span: Span | None
    message: str
    expected: Type | None = None
    found: Type | None = None

    def format(self, filename: str = "<input>") -> str:
        where = f"{filename}:{self.span}" if self.span else filename
        extra = ""
        if self.expected is not None or self.found is not None:
            extra = f" (expected {self.expected}, found {self.found})"
        return f"{where}: {self.message}{extra}"


class TypeCheckFailure(EcaError):
    def __init__(self, errors: list[EcaTypeError]):
        self.errors = errors
        first = errors[0]
        super().__init__(first.span, f"{len(errors)} type error(s): {first.message}")


class UnknownStructError(EcaError):
    pass


@dataclass
class TypedProgram:
    """A checked program plus its resolved symbol tables.

    The wrapped program is the same object that was checked; its expression
    nodes carry their types in `ty`.
    """

    program: Program
    struct_layouts: dict[str, list[tuple[str, Type]]]
    function_sigs: dict[str, tuple[list[tuple[str, Type]], Type]]
    global_types: dict[str, Type]
    components: dict[str, ComponentSignature]
    main: str = "main"

    @property
    def functions(self):
        return {f.name: f for f in self.program.functions}


def resolve_struct(typed: TypedProgram, name: str) -> list[tuple[str, Type]]:
    """Declared (field, type) order used by construction and field access."""
    try:
        return typed.struct_layouts[name]
    except KeyError:
        raise UnknownStructError(None, f"unknown struct {name!r}") from None


def check(program: Program, components: list[ComponentSignature]) -> TypedProgram:
    """Type-check a program; raises TypeCheckFailure listing every violation."""
    checker = _Checker(program, components)
    typed = checker.run()
    if checker.errors:
        raise TypeCheckFailure(checker.errors)
    return typed


def collect_type_errors(program: Program,
                        components: list[ComponentSignature]) -> list[EcaTypeError]:
    checker = _Checker(program, components)
    checker.run()
    return checker.errors


class _Scopes:
    def __init__(self):
        self.stack: list[dict[str, Type]] = []

    def push(self) -> None:
        self.stack.append({})

    def pop(self) -> None:
        self.stack.pop()

    def declare(self, name: str, ty: Type) -> bool:
        if name in self.stack[-1]:
            return False
        self.stack[-1][name] = ty
        return True

    def lookup(self, name: str) -> Type | None:
        for scope in reversed(self.stack):
            if name in scope:
                return scope[name]
        return None


class _Checker:
    def __init__(self, program: Program, components: list[ComponentSignature]):
        self.program = program
        self.components = {c.name: c for c in components}
        self.errors: list[EcaTypeError] = []
        self.struct_layouts: dict[str, list[tuple[str, Type]]] = {}
        self.function_sigs: dict[str, tuple[list[tuple[str, Type]], Type]] = {}
        self.global_types: dict[str, Type] = {}
        self.scopes = _Scopes()

    def error(self, span: Span | None, message: str,
              expected: Type | None = None, found: Type | None = None) -> None:
        self.errors.append(EcaTypeError(span, message, expected, found))

    def run(self) -> TypedProgram:
        self._collect_structs()
        self._collect_functions()
        self._check_globals()
        for fun in self.program.functions:
            self._check_function(fun)
        return TypedProgram(self.program, self.struct_layouts, self.function_sigs,
                            self.global_types, self.components)

    # -- declarations ----------------------------------------------------

    def _collect_structs(self) -> None:
        for s in self.program.structs:
            self.struct_layouts[s.name] = s.fields
        for s in self.program.structs:
            for fname, fty in s.fields:
                if fty.is_struct and fty.name not in self.struct_layouts:
                    self.error(s.span, f"field {fname!r} has unknown struct type {fty.name!r}")
        self._reject_recursive_structs()

    def _reject_recursive_structs(self) -> None:
        # by-value fields make a cyclic struct infinitely large
        visiting: set[str] = set()
        done: set[str] = set()

        def visit(name: str, origin) -> None:
            if name in done:
                return
            if name in visiting:
                self.error(origin.span, f"struct {name!r} contains itself by value")
                return
            visiting.add(name)
            for _, fty in self.struct_layouts.get(name, ()):
                if fty.is_struct and fty.name in self.struct_layouts:
                    visit(fty.name, origin)
            visiting.discard(name)
            done.add(name)

        for s in self.program.structs:
            visit(s.name, s)

    def _resolve_type(self, ty: Type, span: Span | None) -> Type | None:
        if ty.is_struct and ty.name not in self.struct_layouts:
            self.error(span, f"unknown type {ty.name!r}")
            return None
        return ty

    def _collect_functions(self) -> None:
        for f in self.program.functions:
            self._resolve_type(f.return_type, f.span)
            for pname, pty in f.params:
                self._resolve_type(pty, f.span)
            self.function_sigs[f.name] = (f.params, f.return_type)

    def _check_globals(self) -> None:
        for g in self.program.globals:
            declared = self._resolve_type(g.decl_type, g.span)
            if declared == VOID:
                self.error(g.span, f"global {g.name!r} cannot have type void")
                declared = None
            self.scopes.push()  # initializers run with no locals in scope
            init_ty = self.expr(g.init)
            self.scopes.pop()
            if declared is not None and init_ty is not None and init_ty != declared:
                self.error(g.span, f"initializer of global {g.name!r} has wrong type",
                           expected=declared, found=init_ty)
            self.global_types[g.name] = g.decl_type

    def _check_function(self, fun) -> None:
        self.scopes.push()
        for pname, pty in fun.params:
            if pty == VOID:
                self.error(fun.span, f"parameter {pname!r} cannot have type void")
            self.scopes.declare(pname, pty)
        body_ty = self.expr(fun.body)
        self.scopes.pop()
        if body_ty is not None and body_ty != fun.return_type:
            self.error(fun.span, f"body of function {fun.name!r} has wrong type",
                       expected=fun.return_type, found=body_ty)

    # -- expressions -----------------------------------------------------

    def expr(self, e: Expr) -> Type | None:
        ty = self._expr(e)
        e.ty = ty
        return ty

    def _expr(self, e: Expr) -> Type | None:
        if isinstance(e, Const):
            if e.value is UNIT:
                return VOID
            if isinstance(e.value, bool):
                return BOOL
            if isinstance(e.value, int):
                return INT
            return FLOAT
        if isinstance(e, Var):
            ty = self.scopes.lookup(e.name)
            if ty is None:
                ty = self.global_types.get(e.name)
            if ty is None:
                self.error(e.span, f"unknown variable {e.name!r}")
            return ty
        if isinstance(e, BinOp):
            return self._binop(e)
        if isinstance(e, Construct):
            return self._construct(e)
        if isinstance(e, FieldAccess):
            obj_ty = self.expr(e.obj)
            if obj_ty is None:
                return None
            if not obj_ty.is_struct:
                self.error(e.span, f"field access on non-struct value", found=obj_ty)
                return None
            layout = dict(self.struct_layouts.get(obj_ty.name, ()))
            if e.field_name not in layout:
                self.error(e.span, f"struct {obj_ty.name!r} has no field {e.field_name!r}")
                return None
            return layout[e.field_name]
        if isinstance(e, Decl):
            declared = self._resolve_type(e.decl_type, e.span)
            if declared == VOID:
                self.error(e.span, f"variable {e.name!r} cannot have type void")
                declared = None
            init_ty = self.expr(e.init)
            if declared is not None and init_ty is not None and init_ty != declared:
                self.error(e.span, f"initializer of {e.name!r} has wrong type",
                           expected=declared, found=init_ty)
            if not self.scopes.declare(e.name, e.decl_type):
                self.error(e.span, f"redeclaration of {e.name!r} in the same scope")
            return declared
        if isinstance(e, Assign):
            target_ty = self.scopes.lookup(e.name)
            if target_ty is None:
                target_ty = self.global_types.get(e.name)
            if target_ty is None:
                self.error(e.span, f"assignment to unknown variable {e.name!r}")
            value_ty = self.expr(e.value)
            if target_ty is not None and value_ty is not None and value_ty != target_ty:
                self.error(e.span, f"assignment to {e.name!r} has wrong type",
                           expected=target_ty, found=value_ty)
            return target_ty
        if isinstance(e, ComponentCall):
            return self._component_call(e)
        if isinstance(e, Call):
            return self._call(e)
        if isinstance(e, CommaExpr):
            self.stmt(e.stmt)
            return self.expr(e.expr)
        raise AssertionError(f"unknown expression {e!r}")

    def _binop(self, e: BinOp) -> Type | None:
        lt = self.expr(e.lhs)
        rt = self.expr(e.rhs)
        if lt is None or rt is None:
            return None
        if e.op in LOGIC_OPS:
            for ty, side in ((lt, e.lhs), (rt, e.rhs)):
                if ty != BOOL:
                    self.error(side.span, f"operand of {e.op!r} must be bool",
                               expected=BOOL, found=ty)
            return BOOL
        if e.op in ARITH_OPS:
            if lt == rt and lt in (INT, FLOAT):
                return lt
            self.error(e.span, f"operands of {e.op!r} must both be int or both be float",
                       expected=lt if lt in (INT, FLOAT) else INT, found=rt)
            return None
        if e.op in COMPARISON_OPS:
            allowed = (INT, FLOAT, BOOL) if e.op in ("==", "!=") else (INT, FLOAT)
            if lt == rt and lt in allowed:
                return BOOL
            self.error(e.span, f"cannot compare {lt} with {rt} using {e.op!r}",
                       expected=lt, found=rt)
            return None
        raise AssertionError(f"unknown operator {e.op!r}")

    def _construct(self, e: Construct) -> Type | None:
        layout = self.struct_layouts.get(e.struct_name)
        if layout is None:
            self.error(e.span, f"unknown struct {e.struct_name!r}")
            layout = []
        arg_tys = [self.expr(a) for a in e.args]
        if layout and len(arg_tys) != len(layout):
            self.error(e.span, f"constructor {e.struct_name!r} takes {len(layout)} "
                               f"argument(s), got {len(arg_tys)}")
        for (fname, fty), aty, arg in zip(layout, arg_tys, e.args):
            if aty is not None and aty != fty:
                self.error(arg.span, f"field {fname!r} of {e.struct_name!r} has wrong type",
                           expected=fty, found=aty)
        return Type(e.struct_name)

    def _component_call(self, e: ComponentCall) -> Type | None:
        arg_tys = [self.expr(a) for a in e.args]
        comp = self.components.get(e.component)
        if comp is None:
            self.error(e.span, f"unknown component {e.component!r}")
            return None
        sig = comp.functions.get(e.fun)
        if sig is None:
            self.error(e.span, f"component {e.component!r} has no function {e.fun!r}")
            return None
        param_tys, ret = sig
        if len(arg_tys) != len(param_tys):
            self.error(e.span, f"{e.component}::{e.fun} takes {len(param_tys)} "
                               f"argument(s), got {len(arg_tys)}")
        for pty, aty, arg in zip(param_tys, arg_tys, e.args):
            if aty is None:
                continue
            if aty.is_struct:
                self.error(arg.span, "struct values cannot be passed to components",
                           expected=pty, found=aty)
            elif aty != pty:
                self.error(arg.span, f"argument of {e.component}::{e.fun} has wrong type",
                           expected=pty, found=aty)
        return ret

    def _call(self, e: Call) -> Type | None:
        arg_tys = [self.expr(a) for a in e.args]
        sig = self.function_sigs.get(e.fun)
        if sig is None:
            self.error(e.span, f"unknown function {e.fun!r}")
            return None
        params, ret = sig
        if len(arg_tys) != len(params):
            self.error(e.span, f"function {e.fun!r} takes {len(params)} "
                               f"argument(s), got {len(arg_tys)}")
        for (pname, pty), aty, arg in zip(params, arg_tys, e.args):
            if aty is not None and aty != pty:
                self.error(arg.span, f"argument {pname!r} of {e.fun!r} has wrong type",
                           expected=pty, found=aty)
        return ret

    # -- statements -------------------------------------------------------

    def stmt(self, s: Stmt) -> None:
        if isinstance(s, Skip):
            return
        if isinstance(s, Seq):
            self.stmt(s.first)
            self.stmt(s.second)
            return
        if isinstance(s, ExprStmt):
            self.expr(s.expr)
            return
        if isinstance(s, If):
            cond_ty = self.expr(s.cond)
            if cond_ty is not None and cond_ty != BOOL:
                self.error(s.cond.span, "if condition must be bool",
                           expected=BOOL, found=cond_ty)
            self._in_child_scope(s.then)
            if s.orelse is not None:
                self._in_child_scope(s.orelse)
            return
        if isinstance(s, While):
            cond_ty = self.expr(s.cond)
            if cond_ty is not None and cond_ty != BOOL:
                self.error(s.cond.span, "while condition must be bool",
                           expected=BOOL, found=cond_ty)
            self._in_child_scope(s.body)
            return
        if isinstance(s, Repeat):
            count_ty = self.expr(s.count)
            if count_ty is not None and count_ty != INT:
                self.error(s.count.span, "repeat count must be int",
                           expected=INT, found=count_ty)
            self._in_child_scope(s.body)
            return
        raise AssertionError(f"unknown statement {s!r}")

    def _in_child_scope(self, s: Stmt) -> None:
        self.scopes.push()
        self.stmt(s)
        self.scopes.pop()
