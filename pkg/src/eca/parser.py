"""Two-phase predictive parser for the extended ECA language.

Phase 1 is a recursive-descent parser that never looks more than two tokens
ahead (the cursor records and enforces the bound). Because statements and
expressions overlap syntactically, phase 1 keeps sequences of `;`/`,`
separated items in a neutral form. The small second pass then classifies
every node as statement or expression, erroring where a statement-only form
(skip, if, repeat, while, `;` sequences) lands in a position that needs a
value, except as the left arm of a comma expression.

Extensions beyond the core grammar, documented in the README: `//` line
comments and parenthesized expressions.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ast_nodes import (
    BOOL, FLOAT, INT, VOID,
    Assign, BinOp, Call, CommaExpr, ComponentCall, Const, Construct, Decl,
    Expr, ExprStmt, FieldAccess, FunDef, GlobalDef, If, Program, Repeat, Seq,
    Skip, Stmt, StructDef, Type, Var, While,
)
from .errors import ClassificationError, ParseError, Span
from .lexer import Token, TokenKind, tokenize
from .values import UNIT

MAX_LOOKAHEAD = 2  # tokens, i.e. peek offsets 0 and 1

_TYPE_KEYWORDS = {"void": VOID, "bool": BOOL, "int": INT, "float": FLOAT}
_STMT_KEYWORDS = frozenset({"skip", "if", "repeat", "while"})
_CMP_OPS = frozenset({">", ">=", "==", "!=", "<=", "<"})


@dataclass
class RawSeq:
    """Phase-1 sequence of items joined by `;` / `,` separators."""

    items: list
    seps: list[str]
    span: Span


class TokenCursor:
    """Token stream access instrumented with the lookahead actually used."""

    def __init__(self, tokens: list[Token]):
        self._tokens = tokens
        self._pos = 0
        self.max_lookahead = 0

    def peek(self, offset: int = 0) -> Token:
        if offset >= MAX_LOOKAHEAD:
            raise AssertionError(f"phase-1 lookahead {offset + 1} exceeds LL({MAX_LOOKAHEAD})")
        self.max_lookahead = max(self.max_lookahead, offset + 1)
        idx = min(self._pos + offset, len(self._tokens) - 1)
        return self._tokens[idx]

    def advance(self) -> Token:
        tok = self._tokens[self._pos]
        if self._pos < len(self._tokens) - 1:
            self._pos += 1
        return tok


class Parser:
    def __init__(self, tokens: list[Token]):
        self.cursor = TokenCursor(tokens)

    # -- token helpers -------------------------------------------------

    def _at_keyword(self, word: str) -> bool:
        tok = self.cursor.peek()
        return tok.kind == TokenKind.KEYWORD and tok.text == word

    def _at_text(self, text: str) -> bool:
        tok = self.cursor.peek()
        return tok.kind in (TokenKind.OP, TokenKind.PUNCT) and tok.text == text

    def _expect(self, text: str, kind: TokenKind | None = None) -> Token:
        tok = self.cursor.peek()
        ok = tok.text == text and (kind is None or tok.kind == kind)
        if not ok:
            raise ParseError(tok.span, f"expected {text!r}, found {tok.text or 'end of input'!r}",
                             frozenset({text}))
        return self.cursor.advance()

    def _expect_ident(self, what: str = "identifier") -> Token:
        tok = self.cursor.peek()
        if tok.kind != TokenKind.IDENT:
            raise ParseError(tok.span, f"expected {what}, found {tok.text or 'end of input'!r}",
                             frozenset({"<identifier>"}))
        return self.cursor.advance()

    # -- phase 1: program structure -------------------------------------

    def parse_program(self) -> Program:
        structs: list[StructDef] = []
        functions: list[FunDef] = []
        globals_: list[GlobalDef] = []
        raw_funs: list[tuple[FunDef, object]] = []
        raw_globals: list[tuple[GlobalDef, object]] = []

        while self.cursor.peek().kind != TokenKind.EOF:
            if self._at_keyword("struct"):
                structs.append(self._struct_def())
                continue
            ty = self._type()
            name = self._expect_ident("function or variable name")
            tok = self.cursor.peek()
            if tok.text == "(":
                raw_funs.append(self._fun_def(ty, name))
            elif tok.text == "=":
                self.cursor.advance()
                raw = self._expr()
                raw_globals.append((GlobalDef(ty, name.text, None, span=name.span), raw))
            else:
                raise ParseError(tok.span,
                                 f"expected '(' or '=' after {name.text!r}, found {tok.text!r}",
                                 frozenset({"(", "="}))

        # phase 2: classification and call/construct resolution
        struct_names = {s.name for s in structs}
        classifier = _Classifier(struct_names)
        for fun, raw_body in raw_funs:
            fun.body = classifier.body_expr(raw_body)
            functions.append(fun)
        for glob, raw_init in raw_globals:
            glob.init = classifier.as_expr(raw_init)
            globals_.append(glob)

        _check_unique((s.name, s.span) for s in structs)
        _check_unique((f.name, f.span) for f in functions)
        _check_unique((g.name, g.span) for g in globals_)
        return Program(structs, functions, globals_)

    def _struct_def(self) -> StructDef:
        kw = self.cursor.advance()
        name = self._expect_ident("struct name")
        self._expect("begin")
        fields: list[tuple[str, Type]] = []
        seen: dict[str, Span] = {}
        while not self._at_keyword("end"):
            fty = self._type()
            fname = self._expect_ident("field name")
            self._expect(";")
            if fty == VOID:
                raise ParseError(fname.span, f"field {fname.text!r} cannot have type void")
            if fname.text in seen:
                raise ParseError(fname.span, f"duplicate field {fname.text!r}")
            seen[fname.text] = fname.span
            fields.append((fname.text, fty))
        self._expect("end")
        return StructDef(name.text, fields, span=kw.span)

    def _fun_def(self, return_type: Type, name: Token):
        self._expect("(")
        params: list[tuple[str, Type]] = []
        if not self._at_text(")"):
            while True:
                pty = self._type()
                pname = self._expect_ident("parameter name")
                if pty == VOID:
                    raise ParseError(pname.span, f"parameter {pname.text!r} cannot have type void")
                params.append((pname.text, pty))
                if self._at_text(","):
                    self.cursor.advance()
                else:
                    break
        self._expect(")")
        self._expect("begin")
        raw_body = self._sequence()
        self._expect("end")
        _check_unique((p, name.span) for p, _ in params)
        return FunDef(return_type, name.text, params, None, span=name.span), raw_body

    def _type(self) -> Type:
        tok = self.cursor.peek()
        if tok.kind == TokenKind.KEYWORD and tok.text in _TYPE_KEYWORDS:
            self.cursor.advance()
            return _TYPE_KEYWORDS[tok.text]
        if tok.kind == TokenKind.IDENT:
            self.cursor.advance()
            return Type(tok.text)
        raise ParseError(tok.span, f"expected a type, found {tok.text or 'end of input'!r}",
                         frozenset({"void", "bool", "int", "float", "<struct name>"}))

    # -- phase 1: statements / sequences ---------------------------------

    def _sequence(self):
        """Parse items joined by `;` or `,`; stops before any other token."""
        first = self._item()
        items = [first]
        seps: list[str] = []
        while self._at_text(";") or self._at_text(","):
            seps.append(self.cursor.advance().text)
            items.append(self._item())
        if not seps:
            return first
        span = getattr(first, "span", None) or self.cursor.peek().span
        return RawSeq(items, seps, span)

    def _item(self):
        tok = self.cursor.peek()
        if tok.kind == TokenKind.KEYWORD and tok.text in _STMT_KEYWORDS:
            if tok.text == "skip":
                self.cursor.advance()
                return Skip(span=tok.span)
            if tok.text == "if":
                return self._if()
            if tok.text == "repeat":
                return self._repeat()
            return self._while()
        return self._expr()

    def _if(self):
        kw = self.cursor.advance()
        cond = self._sequence()
        self._expect("then")
        then = self._sequence()
        orelse = None
        if self._at_keyword("else"):
            self.cursor.advance()
            orelse = self._sequence()
        self._expect("end")
        return If(cond, then, orelse, span=kw.span)

    def _repeat(self):
        kw = self.cursor.advance()
        count = self._sequence()
        self._expect("begin")
        body = self._sequence()
        self._expect("end")
        return Repeat(count, body, span=kw.span)

    def _while(self):
        kw = self.cursor.advance()
        cond = self._sequence()
        self._expect("begin")
        body = self._sequence()
        self._expect("end")
        return While(cond, body, span=kw.span)

    # -- phase 1: expressions --------------------------------------------
    # Precedence, high to low: * ; + - ; comparisons (non-chaining) ; and ; or.

    def _expr(self):
        return self._or()

    def _or(self):
        left = self._and()
        while self._at_keyword("or"):
            op = self.cursor.advance()
            left = BinOp("or", left, self._and(), span=op.span)
        return left

    def _and(self):
        left = self._cmp()
        while self._at_keyword("and"):
            op = self.cursor.advance()
            left = BinOp("and", left, self._cmp(), span=op.span)
        return left

    def _cmp(self):
        left = self._add()
        tok = self.cursor.peek()
        if tok.kind == TokenKind.OP and tok.text in _CMP_OPS:
            self.cursor.advance()
            right = self._add()
            nxt = self.cursor.peek()
            if nxt.kind == TokenKind.OP and nxt.text in _CMP_OPS:
                raise ParseError(nxt.span, "comparisons do not chain; parenthesize explicitly")
            return BinOp(tok.text, left, right, span=tok.span)
        return left

    def _add(self):
        left = self._mul()
        while self._at_text("+") or self._at_text("-"):
            op = self.cursor.advance()
            left = BinOp(op.text, left, self._mul(), span=op.span)
        return left

    def _mul(self):
        left = self._postfix()
        while self._at_text("*"):
            op = self.cursor.advance()
            left = BinOp("*", left, self._postfix(), span=op.span)
        return left

    def _postfix(self):
        node = self._primary()
        while self._at_text("."):
            self.cursor.advance()
            fname = self._expect_ident("field name")
            node = FieldAccess(node, fname.text, span=fname.span)
        return node

    def _primary(self):
        tok = self.cursor.peek()
        if tok.kind == TokenKind.INT:
            self.cursor.advance()
            return Const(int(tok.text), span=tok.span)
        if tok.kind == TokenKind.FLOAT:
            self.cursor.advance()
            return Const(float(tok.text), span=tok.span)
        if tok.kind == TokenKind.BOOL:
            self.cursor.advance()
            return Const(tok.text == "true", span=tok.span)
        if tok.text == "(":
            self.cursor.advance()
            inner = self._sequence()
            self._expect(")")
            return inner
        if tok.kind == TokenKind.KEYWORD and tok.text in _TYPE_KEYWORDS:
            ty = self._type()
            name = self._expect_ident("variable name")
            self._expect("=")
            return Decl(ty, name.text, self._expr(), span=name.span)
        if tok.kind == TokenKind.IDENT:
            nxt = self.cursor.peek(1)
            if nxt.text == "::":
                self.cursor.advance()
                self.cursor.advance()
                fun = self._expect_ident("component function name")
                args = self._call_args()
                return ComponentCall(tok.text, fun.text, args, span=tok.span)
            if nxt.text == "(":
                self.cursor.advance()
                args = self._call_args()
                return Call(tok.text, args, span=tok.span)
            if nxt.kind == TokenKind.IDENT:
                # struct-typed declaration: <struct-name> <var> = <expr>
                ty = self._type()
                name = self.cursor.advance()
                self._expect("=")
                return Decl(ty, name.text, self._expr(), span=name.span)
            if nxt.text == "=":
                self.cursor.advance()
                self.cursor.advance()
                return Assign(tok.text, self._expr(), span=tok.span)
            self.cursor.advance()
            return Var(tok.text, span=tok.span)
        raise ParseError(
            tok.span,
            f"expected an expression, found {tok.text or 'end of input'!r}",
            frozenset({"<literal>", "<identifier>", "(", "skip", "if", "repeat", "while"}),
        )

    def _call_args(self) -> list:
        self._expect("(")
        args: list = []
        if not self._at_text(")"):
            args.append(self._expr())
            while self._at_text(","):
                self.cursor.advance()
                args.append(self._expr())
        self._expect(")")
        return args


def _check_unique(pairs) -> None:
    seen: set[str] = set()
    for name, span in pairs:
        if name in seen:
            raise ParseError(span, f"duplicate name {name!r}")
        seen.add(name)


class _Classifier:
    """Phase 2: classify raw nodes as statements or expressions."""

    def __init__(self, struct_names: set[str]):
        self.struct_names = struct_names

    def body_expr(self, raw) -> Expr:
        """Function bodies that are pure statements get an implicit unit result."""
        if self._can_be_expr(raw):
            return self.as_expr(raw)
        stmt = self.as_stmt(raw)
        return CommaExpr(stmt, Const(UNIT, span=_raw_span(raw)), span=_raw_span(raw))

    def _can_be_expr(self, raw) -> bool:
        if isinstance(raw, RawSeq):
            if _expr_split(raw) is None:
                return False
            return self._can_be_expr(raw.items[-1])
        return not isinstance(raw, (Skip, If, Repeat, While))

    def as_expr(self, raw) -> Expr:
        if isinstance(raw, RawSeq):
            if ";" not in raw.seps:
                return self._comma_chain(raw.items, raw.span)
            # `s1; ...; sk, e...`: the first comma after the last semicolon
            # splits a leading statement from the value-producing tail
            split = _expr_split(raw)
            if split is None:
                raise ClassificationError(
                    raw.span, "';' sequence used where a value is required")
            head = RawSeq(raw.items[: split + 1], raw.seps[:split], raw.span)
            return CommaExpr(self.as_stmt(head),
                             self._comma_chain(raw.items[split + 1:], raw.span),
                             span=raw.span)
        if isinstance(raw, (Skip, If, Repeat, While)):
            kind = type(raw).__name__.lower()
            raise ClassificationError(
                raw.span, f"'{kind}' is a statement and cannot produce a value")
        if isinstance(raw, Const):
            return raw
        if isinstance(raw, Var):
            return raw
        if isinstance(raw, BinOp):
            return BinOp(raw.op, self.as_expr(raw.lhs), self.as_expr(raw.rhs), span=raw.span)
        if isinstance(raw, FieldAccess):
            return FieldAccess(self.as_expr(raw.obj), raw.field_name, span=raw.span)
        if isinstance(raw, Decl):
            return Decl(raw.decl_type, raw.name, self.as_expr(raw.init), span=raw.span)
        if isinstance(raw, Assign):
            return Assign(raw.name, self.as_expr(raw.value), span=raw.span)
        if isinstance(raw, ComponentCall):
            return ComponentCall(raw.component, raw.fun,
                                 [self.as_expr(a) for a in raw.args], span=raw.span)
        if isinstance(raw, Call):
            args = [self.as_expr(a) for a in raw.args]
            if raw.fun in self.struct_names:
                return Construct(raw.fun, args, span=raw.span)
            return Call(raw.fun, args, span=raw.span)
        if isinstance(raw, CommaExpr):  # nested via parentheses, already classified
            return raw
        raise AssertionError(f"unclassifiable node {raw!r}")

    def _comma_chain(self, items: list, span: Span) -> Expr:
        if len(items) == 1:
            return self.as_expr(items[0])
        head = self.as_stmt(items[0])
        rest = self._comma_chain(items[1:], span)
        return CommaExpr(head, rest, span=_raw_span(items[0]) or span)

    def as_stmt(self, raw) -> Stmt:
        if isinstance(raw, RawSeq):
            segments = _split_semicolons(raw)
            stmts = [self._segment_stmt(seg, raw.span) for seg in segments]
            out = stmts[-1]
            for st in reversed(stmts[:-1]):
                out = Seq(st, out, span=_raw_span(st))
            return out
        if isinstance(raw, Skip):
            return raw
        if isinstance(raw, If):
            return If(self.as_expr(raw.cond), self.as_stmt(raw.then),
                      self.as_stmt(raw.orelse) if raw.orelse is not None else None,
                      span=raw.span)
        if isinstance(raw, Repeat):
            return Repeat(self.as_expr(raw.count), self.as_stmt(raw.body), span=raw.span)
        if isinstance(raw, While):
            return While(self.as_expr(raw.cond), self.as_stmt(raw.body), span=raw.span)
        expr = self.as_expr(raw)
        return ExprStmt(expr, span=_raw_span(expr))

    def _segment_stmt(self, items: list, span: Span) -> Stmt:
        if len(items) == 1:
            return self.as_stmt(items[0])
        expr = self._comma_chain(items, span)
        return ExprStmt(expr, span=_raw_span(expr) or span)


def _expr_split(raw: RawSeq) -> int | None:
    """Index of the first ',' separator after the last ';', if any."""
    if ";" not in raw.seps:
        return None if not raw.seps else 0
    last_semi = max(i for i, s in enumerate(raw.seps) if s == ";")
    for i in range(last_semi + 1, len(raw.seps)):
        if raw.seps[i] == ",":
            return i
    return None


def _split_semicolons(raw: RawSeq) -> list[list]:
    segments: list[list] = [[raw.items[0]]]
    for sep, item in zip(raw.seps, raw.items[1:]):
        if sep == ";":
            segments.append([item])
        else:
            segments[-1].append(item)
    return segments


def _raw_span(raw) -> Span | None:
    return getattr(raw, "span", None)


def parse(tokens: list[Token]) -> Program:
    """Parse a full token stream (from tokenize) into a Program."""
    parser = Parser(tokens)
    program = parser.parse_program()
    return program


def parse_source(source: str) -> Program:
    return parse(tokenize(source))


def parse_with_lookahead(source: str) -> tuple[Program, int]:
    """Parse and report the maximum phase-1 lookahead actually used."""
    parser = Parser(tokenize(source))
    program = parser.parse_program()
    return program, parser.cursor.max_lookahead
