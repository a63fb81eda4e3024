import pytest

from eca.errors import LexError
from eca.lexer import KEYWORDS, Token, TokenKind, tokenize


def kinds(source):
    return [(t.kind, t.text) for t in tokenize(source)[:-1]]


def test_single_keyword():
    assert kinds("skip") == [(TokenKind.KEYWORD, "skip")]


def test_component_call_tokens():
    assert kinds("C::f(1)") == [
        (TokenKind.IDENT, "C"),
        (TokenKind.OP, "::"),
        (TokenKind.IDENT, "f"),
        (TokenKind.PUNCT, "("),
        (TokenKind.INT, "1"),
        (TokenKind.PUNCT, ")"),
    ]


def test_lex_error_carries_span():
    with pytest.raises(LexError) as exc:
        tokenize("int x = @")
    assert exc.value.span.line == 1
    assert exc.value.span.col == 9


def test_all_keywords_recognized():
    for kw in KEYWORDS:
        toks = tokenize(kw)
        assert toks[0].kind == TokenKind.KEYWORD
        assert toks[0].text == kw


def test_bool_literals_are_not_keywords():
    toks = tokenize("true false")
    assert [t.kind for t in toks[:-1]] == [TokenKind.BOOL, TokenKind.BOOL]


def test_float_vs_int_vs_field_access():
    assert kinds("1.5") == [(TokenKind.FLOAT, "1.5")]
    assert kinds("15") == [(TokenKind.INT, "15")]
    # a dot not followed by a digit is field access punctuation
    assert kinds("p.x")[1] == (TokenKind.PUNCT, ".")


def test_maximal_munch_operators():
    assert [t.text for t in tokenize("a<=b==c!=d>=e")[:-1]] == [
        "a", "<=", "b", "==", "c", "!=", "d", ">=", "e"]
    assert [t.text for t in tokenize("x=y")[:-1]] == ["x", "=", "y"]


def test_comments_dropped():
    toks = tokenize("int x = 1 // trailing comment\n// whole line\nint")
    assert [t.text for t in toks[:-1]] == ["int", "x", "=", "1", "int"]


def test_spans_track_lines_and_columns():
    toks = tokenize("int x\n  = 1")
    spans = [(t.span.line, t.span.col) for t in toks[:-1]]
    assert spans == [(1, 1), (1, 5), (2, 3), (2, 5)]
    assert toks[0].span.length == 3


def test_token_texts_reproduce_stream():
    source = "int f(int a) begin a + 1, a end"
    toks = tokenize(source)
    rebuilt = " ".join(t.text for t in toks[:-1])
    assert [t.text for t in tokenize(rebuilt)[:-1]] == [t.text for t in toks[:-1]]


def test_eof_token_terminates():
    toks = tokenize("")
    assert len(toks) == 1
    assert toks[0].kind == TokenKind.EOF
