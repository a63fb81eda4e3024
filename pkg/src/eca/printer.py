"""Pretty-printer; its output parses back to a structurally identical tree.

Parentheses are emitted only where re-parsing would otherwise regroup the
tree: binary operators follow the documented precedence table, assignments
and declarations are parenthesized inside operators, comma expressions and
`;` sequences are parenthesized outside sequence positions.
"""

from __future__ import annotations

from decimal import Decimal

from .ast_nodes import (
    Assign, BinOp, Call, CommaExpr, ComponentCall, Const, Construct, Decl,
    Expr, ExprStmt, FieldAccess, FunDef, GlobalDef, If, Program, Repeat, Seq,
    Skip, Stmt, StructDef, Var, While,
)
from .values import UNIT

_LEVEL = {"or": 1, "and": 2, ">": 3, ">=": 3, "==": 3, "!=": 3, "<=": 3, "<": 3,
          "+": 4, "-": 4, "*": 5}
_ATOM = 7


def pretty_print(program: Program) -> str:
    out: list[str] = []
    for struct in program.structs:
        out.append(_struct(struct))
    for glob in program.globals:
        out.append(f"{glob.decl_type} {glob.name} = {_expr(glob.init, 0)}")
    for fun in program.functions:
        out.append(_fun(fun))
    return "\n\n".join(out) + "\n"


def _struct(s: StructDef) -> str:
    lines = [f"struct {s.name} begin"]
    for fname, fty in s.fields:
        lines.append(f"  {fty} {fname};")
    lines.append("end")
    return "\n".join(lines)


def _fun(f: FunDef) -> str:
    params = ", ".join(f"{ty} {name}" for name, ty in f.params)
    header = f"{f.return_type} {f.name}({params}) begin"
    body = _body(f.body, "  ")
    return f"{header}\n{body}\nend"


def _body(body: Expr, indent: str) -> str:
    # Implicit unit tail marks a statement-only body; print just the statement.
    if isinstance(body, CommaExpr) and isinstance(body.expr, Const) and body.expr.value is UNIT:
        return _stmt(body.stmt, indent)
    return indent + _expr(body, 0)


def _stmt(s: Stmt, indent: str) -> str:
    if isinstance(s, Seq):
        items: list[str] = []
        node: Stmt = s
        while isinstance(node, Seq):
            items.append(_seq_item(node.first, indent))
            node = node.second
        items.append(_seq_item(node, indent))
        return ";\n".join(items)
    return _seq_item(s, indent)


def _seq_item(s: Stmt, indent: str) -> str:
    if isinstance(s, Skip):
        return indent + "skip"
    if isinstance(s, Seq):
        # left-nested sequence: parenthesize to preserve grouping
        return indent + "(" + _stmt(s, "").replace("\n", " ") + ")"
    if isinstance(s, ExprStmt):
        return indent + _expr(s.expr, 0)
    if isinstance(s, If):
        head = indent + f"if {_expr(s.cond, 0)} then\n"
        head += _stmt(s.then, indent + "  ")
        if s.orelse is not None:
            head += f"\n{indent}else\n" + _stmt(s.orelse, indent + "  ")
        return head + f"\n{indent}end"
    if isinstance(s, Repeat):
        return (indent + f"repeat {_expr(s.count, 0)} begin\n"
                + _stmt(s.body, indent + "  ") + f"\n{indent}end")
    if isinstance(s, While):
        return (indent + f"while {_expr(s.cond, 0)} begin\n"
                + _stmt(s.body, indent + "  ") + f"\n{indent}end")
    raise AssertionError(f"unknown statement {s!r}")


def _stmt_inline(s: Stmt) -> str:
    """A statement appearing as the left arm of a comma expression."""
    if isinstance(s, Seq):
        return "(" + _stmt(s, "").replace("\n", " ") + ")"
    if isinstance(s, ExprStmt) and isinstance(s.expr, CommaExpr):
        return "(" + _expr(s.expr, 0) + ")"
    return _stmt(s, "").replace("\n", " ")


def _expr(e: Expr, min_level: int) -> str:
    if isinstance(e, Const):
        return _const(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, BinOp):
        lvl = _LEVEL[e.op]
        # left-associative: right operand must sit one level tighter;
        # comparisons do not chain, so both operands sit tighter
        right_min = lvl + 1 if lvl != 3 else 4
        left_min = lvl if lvl != 3 else 4
        left = _expr(e.lhs, left_min)
        right = _expr(e.rhs, right_min)
        text = f"{left} {e.op} {right}"
        return f"({text})" if lvl < min_level else text
    if isinstance(e, FieldAccess):
        return f"{_expr(e.obj, _ATOM)}.{e.field_name}"
    if isinstance(e, (Assign, Decl)):
        if isinstance(e, Assign):
            text = f"{e.name} = {_rhs(e.value)}"
        else:
            text = f"{e.decl_type} {e.name} = {_rhs(e.init)}"
        return f"({text})" if min_level > 0 else text
    if isinstance(e, Construct):
        return f"{e.struct_name}({_args(e.args)})"
    if isinstance(e, Call):
        return f"{e.fun}({_args(e.args)})"
    if isinstance(e, ComponentCall):
        return f"{e.component}::{e.fun}({_args(e.args)})"
    if isinstance(e, CommaExpr):
        text = f"{_stmt_inline(e.stmt)}, {_expr(e.expr, 0)}"
        return f"({text})" if min_level > 0 else text
    raise AssertionError(f"unknown expression {e!r}")


def _rhs(e: Expr) -> str:
    # assignment right-hand sides stop at `,`, so comma chains need parens
    if isinstance(e, CommaExpr):
        return f"({_expr(e, 0)})"
    return _expr(e, 0)


def _args(args: list[Expr]) -> str:
    out = []
    for a in args:
        if isinstance(a, CommaExpr):
            out.append(f"({_expr(a, 0)})")
        else:
            out.append(_expr(a, 0))
    return ", ".join(out)


def _const(v) -> str:
    if v is UNIT:
        raise ValueError("implicit unit constant is only printable as a function body tail")
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        text = repr(v)
        if "e" in text or "E" in text or "." not in text or text.startswith("-"):
            if v < 0:
                raise ValueError("negative float literals are not expressible in source")
            text = format(Decimal(v), "f")
            if "." not in text:
                text += ".0"
        return text
    if isinstance(v, int):
        if v < 0:
            raise ValueError("negative integer literals are not expressible in source")
        return str(v)
    raise AssertionError(f"unknown constant {v!r}")
