"""AST for the extended ECA language.

Expressions and statements are separate node families; CommaExpr bridges a
statement into expression position and ExprStmt the other way around.
Spans and checker-assigned types are excluded from equality so that parsed
and hand-built trees compare structurally.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import Span

PRIMITIVE_TYPES = ("void", "bool", "int", "float")

BIN_OPS = ("+", "-", "*", ">", ">=", "==", "!=", "<=", "<", "and", "or")
COMPARISON_OPS = (">", ">=", "==", "!=", "<=", "<")
ARITH_OPS = ("+", "-", "*")
LOGIC_OPS = ("and", "or")


@dataclass(frozen=True)
class Type:
    name: str

    @property
    def is_struct(self) -> bool:
        return self.name not in PRIMITIVE_TYPES

    def __str__(self) -> str:
        return self.name


VOID = Type("void")
BOOL = Type("bool")
INT = Type("int")
FLOAT = Type("float")


def _span_field():
    return field(default=None, compare=False, repr=False)


def _ty_field():
    return field(default=None, compare=False, repr=False)


class Expr:
    pass


class Stmt:
    pass


@dataclass
class Const(Expr):
    value: object  # int | float | bool | Unit
    span: Span | None = _span_field()
    ty: Type | None = _ty_field()


@dataclass
class Var(Expr):
    name: str
    span: Span | None = _span_field()
    ty: Type | None = _ty_field()


@dataclass
class BinOp(Expr):
    op: str
    lhs: Expr
    rhs: Expr
    span: Span | None = _span_field()
    ty: Type | None = _ty_field()


@dataclass
class Construct(Expr):
    struct_name: str
    args: list[Expr]
    span: Span | None = _span_field()
    ty: Type | None = _ty_field()


@dataclass
class FieldAccess(Expr):
    obj: Expr
    field_name: str
    span: Span | None = _span_field()
    ty: Type | None = _ty_field()


@dataclass
class Decl(Expr):
    decl_type: Type
    name: str
    init: Expr
    span: Span | None = _span_field()
    ty: Type | None = _ty_field()


@dataclass
class Assign(Expr):
    name: str
    value: Expr
    span: Span | None = _span_field()
    ty: Type | None = _ty_field()


@dataclass
class ComponentCall(Expr):
    component: str
    fun: str
    args: list[Expr]
    span: Span | None = _span_field()
    ty: Type | None = _ty_field()


@dataclass
class Call(Expr):
    fun: str
    args: list[Expr]
    span: Span | None = _span_field()
    ty: Type | None = _ty_field()


@dataclass
class CommaExpr(Expr):
    stmt: Stmt
    expr: Expr
    span: Span | None = _span_field()
    ty: Type | None = _ty_field()


@dataclass
class Skip(Stmt):
    span: Span | None = _span_field()


@dataclass
class Seq(Stmt):
    first: Stmt
    second: Stmt
    span: Span | None = _span_field()


@dataclass
class ExprStmt(Stmt):
    expr: Expr
    span: Span | None = _span_field()


@dataclass
class If(Stmt):
    cond: Expr
    then: Stmt
    orelse: Stmt | None
    span: Span | None = _span_field()


@dataclass
class Repeat(Stmt):
    count: Expr
    body: Stmt
    span: Span | None = _span_field()


@dataclass
class While(Stmt):
    cond: Expr
    body: Stmt
    span: Span | None = _span_field()


@dataclass
class StructDef:
    name: str
    fields: list[tuple[str, Type]]
    span: Span | None = _span_field()


@dataclass
class FunDef:
    return_type: Type
    name: str
    params: list[tuple[str, Type]]
    body: Expr
    span: Span | None = _span_field()


@dataclass
class GlobalDef:
    decl_type: Type
    name: str
    init: Expr
    span: Span | None = _span_field()


@dataclass
class Program:
    structs: list[StructDef]
    functions: list[FunDef]
    globals: list[GlobalDef]


def ast_to_json(node) -> object:
    """Plain-data dump of an AST (for --emit-ast); spans become [line, col]."""
    if isinstance(node, (Expr, Stmt, StructDef, FunDef, GlobalDef, Program)):
        out: dict[str, object] = {"node": type(node).__name__}
        for name, val in vars(node).items():
            if name == "ty":
                if val is not None:
                    out["type"] = str(val)
            elif name == "span":
                if val is not None:
                    out["span"] = [val.line, val.col]
            else:
                out[name] = ast_to_json(val)
        return out
    if isinstance(node, Type):
        return str(node)
    if isinstance(node, list):
        return [ast_to_json(x) for x in node]
    if isinstance(node, tuple):
        return [ast_to_json(x) for x in node]
    from .values import UNIT
    if node is UNIT:
        return {"node": "Unit"}
    return node
