"""A small straight-line language for rounding-error experiments.

Programs bind scalars and vectors with ``let`` and mark results with
``output``::

    let v = [1, 2, 3, 4];
    let x = 0.5;
    let y = horner(v, x);
    output y;

Expressions support ``+``, ``-``, ``*``, parentheses, decimal literals,
and element access ``v[i]``.  The builtins ``sum``, ``pairwise``,
``horner``, and ``karatsuba`` lower to exactly the graphs the generator
functions in :mod:`srbound.algorithms` produce.  Division is not part of
the operation set and is rejected up front.  Literals are kept as exact
decimal rationals, so ``0.1`` means one tenth, not its binary rounding.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import NamedTuple, Union

from .algorithms import Polynomial, ShapeMismatch, fold_sum, horner, karatsuba_dag, tree_sum
from .graph import BiasedMultiplication, Dag, validate_martingale_inducing

__all__ = [
    "ArityError",
    "BinOp",
    "Call",
    "DivisionUnsupported",
    "DslError",
    "Index",
    "Let",
    "Num",
    "Output",
    "ParseError",
    "Program",
    "Ref",
    "SourceSpan",
    "UndefinedIdentifier",
    "VectorLit",
    "lower",
    "parse",
    "pretty_print",
]


@dataclass(frozen=True)
class SourceSpan:
    """1-based position of a token or construct in the source text."""

    line: int
    column: int
    length: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class DslError(Exception):
    """Base for all language errors; every instance carries a span."""

    def __init__(self, message: str, span: SourceSpan):
        self.span = span
        super().__init__(message)


class ParseError(DslError):
    def __init__(self, message: str, span: SourceSpan, expected: tuple[str, ...] = ()):
        self.expected = tuple(expected)
        super().__init__(message, span)


class DivisionUnsupported(DslError):
    """Division would break the unbiased-rounding analysis; it is not offered."""

    def __init__(self, span: SourceSpan):
        super().__init__("division is not supported; only +, -, and * round unbiasedly here", span)


class UndefinedIdentifier(DslError):
    pass


class ArityError(DslError):
    """A builtin call or identifier was used with the wrong shape or count."""


# ---------------------------------------------------------------------------
# syntax tree


@dataclass(frozen=True)
class Num:
    lexeme: str
    value: Fraction
    span: SourceSpan


@dataclass(frozen=True)
class Ref:
    name: str
    span: SourceSpan


@dataclass(frozen=True)
class Index:
    name: str
    index: int
    span: SourceSpan


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    span: SourceSpan


Expr = Union[Num, Ref, Index, BinOp]


@dataclass(frozen=True)
class VectorLit:
    items: tuple[Expr, ...]
    span: SourceSpan


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple[Union[Expr, VectorLit], ...]
    span: SourceSpan


Rhs = Union[Expr, VectorLit, Call]


@dataclass(frozen=True)
class Let:
    name: str
    rhs: Rhs
    span: SourceSpan


@dataclass(frozen=True)
class Output:
    name: str
    span: SourceSpan


@dataclass
class Program:
    statements: tuple[Union[Let, Output], ...]
    # name -> node id (scalar) or tuple of node ids (vector); filled by lower()
    symbols: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# lexer

_BUILTINS = ("sum", "pairwise", "horner", "karatsuba")
_KEYWORDS = ("let", "output")

_NUMBER = re.compile(r"\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_PUNCT = ";=[](),+-*"


class _Token(NamedTuple):
    kind: str  # "ident", "number", "builtin", keyword text, punct text, "eof"
    text: str
    line: int
    col: int

    @property
    def span(self) -> SourceSpan:
        return SourceSpan(self.line, self.col, max(1, len(self.text)))


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "/":
            raise DivisionUnsupported(SourceSpan(line, col, 1))
        if ch in _PUNCT:
            tokens.append(_Token(ch, ch, line, col))
            i += 1
            col += 1
            continue
        m = _NUMBER.match(text, i)
        if m:
            tokens.append(_Token("number", m.group(), line, col))
            col += m.end() - i
            i = m.end()
            continue
        m = _IDENT.match(text, i)
        if m:
            word = m.group()
            if word in _KEYWORDS:
                kind = word
            elif word in _BUILTINS:
                kind = "builtin"
            else:
                kind = "ident"
            tokens.append(_Token(kind, word, line, col))
            col += m.end() - i
            i = m.end()
            continue
        raise ParseError(f"unexpected character {ch!r}", SourceSpan(line, col, 1))
    tokens.append(_Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# parser (recursive descent, one token of lookahead)


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, what: str | None = None) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            want = what or repr(kind)
            got = tok.text or "end of input"
            raise ParseError(f"expected {want}, found {got!r}", tok.span, (kind,))
        return self.advance()

    def program(self) -> Program:
        statements: list[Let | Output] = []
        defined: dict[str, SourceSpan] = {}
        emitted: dict[str, SourceSpan] = {}
        while self.peek().kind != "eof":
            tok = self.peek()
            if tok.kind == "let":
                stmt = self.let_stmt()
                if stmt.name in defined:
                    raise ParseError(f"{stmt.name!r} is already defined", stmt.span)
                defined[stmt.name] = stmt.span
                statements.append(stmt)
            elif tok.kind == "output":
                stmt = self.output_stmt()
                if stmt.name in emitted:
                    raise ParseError(f"{stmt.name!r} is already an output", stmt.span)
                emitted[stmt.name] = stmt.span
                statements.append(stmt)
            else:
                got = tok.text or "end of input"
                raise ParseError(
                    f"expected a statement, found {got!r}", tok.span, ("let", "output")
                )
        if not emitted:
            raise ParseError("program has no output statement", self.peek().span, ("output",))
        return Program(tuple(statements))

    def let_stmt(self) -> Let:
        self.expect("let")
        name = self.expect("ident", "an identifier")
        self.expect("=")
        rhs = self.rhs()
        self.expect(";")
        return Let(name.text, rhs, name.span)

    def output_stmt(self) -> Output:
        self.expect("output")
        name = self.expect("ident", "an identifier")
        self.expect(";")
        return Output(name.text, name.span)

    def rhs(self) -> Rhs:
        tok = self.peek()
        if tok.kind == "[":
            return self.vector()
        if tok.kind == "builtin":
            return self.call()
        return self.expr()

    def vector(self) -> VectorLit:
        start = self.expect("[")
        items = [self.expr()]
        while self.peek().kind == ",":
            self.advance()
            items.append(self.expr())
        self.expect("]")
        return VectorLit(tuple(items), start.span)

    def call(self) -> Call:
        func = self.advance()
        self.expect("(")
        args: list[Expr | VectorLit] = []
        if self.peek().kind != ")":
            args.append(self.call_arg())
            while self.peek().kind == ",":
                self.advance()
                args.append(self.call_arg())
        self.expect(")")
        return Call(func.text, tuple(args), func.span)

    def call_arg(self) -> Expr | VectorLit:
        if self.peek().kind == "[":
            return self.vector()
        return self.expr()

    def expr(self) -> Expr:
        node = self.term()
        while self.peek().kind in ("+", "-"):
            op = self.advance()
            node = BinOp(op.kind, node, self.term(), op.span)
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.peek().kind == "*":
            op = self.advance()
            node = BinOp("*", node, self.factor(), op.span)
        return node

    def factor(self) -> Expr:
        tok = self.peek()
        if tok.kind in ("+", "-"):
            sign = self.advance()
            num = self.expect("number", "a number after the sign")
            return self.number(num, sign)
        if tok.kind == "number":
            return self.number(self.advance())
        if tok.kind == "ident":
            name = self.advance()
            if self.peek().kind == "[":
                self.advance()
                idx = self.expect("number", "a vector index")
                if not idx.text.isdigit():
                    raise ParseError("vector index must be a plain integer", idx.span)
                close = self.expect("]")
                length = close.col + 1 - name.col if close.line == name.line else len(name.text)
                return Index(name.text, int(idx.text), SourceSpan(name.line, name.col, length))
            return Ref(name.text, name.span)
        if tok.kind == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        got = tok.text or "end of input"
        raise ParseError(
            f"expected a number, identifier, or '(', found {got!r}",
            tok.span,
            ("number", "ident", "("),
        )

    def number(self, tok: _Token, sign: _Token | None = None) -> Num:
        lexeme = tok.text if sign is None else sign.text + tok.text
        value = Fraction(Decimal(lexeme))
        if sign is None or sign.line != tok.line:
            span = tok.span
        else:
            span = SourceSpan(sign.line, sign.col, tok.col + len(tok.text) - sign.col)
        return Num(lexeme, value, span)


def parse(text: str) -> Program:
    """Parse source text; raises ParseError or DivisionUnsupported with a span."""
    return _Parser(text).program()


# ---------------------------------------------------------------------------
# pretty-printer

_PREC = {"+": 1, "-": 1, "*": 2}


def _render_expr(node: Expr, parent_prec: int = 0, right: bool = False) -> str:
    if isinstance(node, Num):
        return node.lexeme
    if isinstance(node, Ref):
        return node.name
    if isinstance(node, Index):
        return f"{node.name}[{node.index}]"
    prec = _PREC[node.op]
    text = f"{_render_expr(node.left, prec)} {node.op} {_render_expr(node.right, prec, True)}"
    # same-precedence right children need parens: the grammar reparses
    # unparenthesized chains left-associated
    if prec < parent_prec or (prec == parent_prec and right):
        return f"({text})"
    return text


def _render_rhs(rhs: Rhs) -> str:
    if isinstance(rhs, VectorLit):
        return "[" + ", ".join(_render_expr(e) for e in rhs.items) + "]"
    if isinstance(rhs, Call):
        return f"{rhs.func}(" + ", ".join(_render_rhs(a) for a in rhs.args) + ")"
    return _render_expr(rhs)


def pretty_print(program: Program) -> str:
    """Render a parsed program back to canonical source, one statement per line.

    Literal lexemes are preserved verbatim, so printing is a fixed point
    of parse-then-print.
    """
    lines = []
    for stmt in program.statements:
        if isinstance(stmt, Let):
            lines.append(f"let {stmt.name} = {_render_rhs(stmt.rhs)};")
        else:
            lines.append(f"output {stmt.name};")
    return "".join(line + "\n" for line in lines)


# ---------------------------------------------------------------------------
# lowering

Binding = Union[int, tuple[int, ...]]


def _lookup(symbols: dict[str, Binding], name: str, span: SourceSpan) -> Binding:
    try:
        return symbols[name]
    except KeyError:
        raise UndefinedIdentifier(f"undefined identifier {name!r}", span) from None


def _lower_expr(dag: Dag, symbols: dict[str, Binding], node: Expr) -> int:
    if isinstance(node, Num):
        return dag.input(node.value)
    if isinstance(node, Ref):
        binding = _lookup(symbols, node.name, node.span)
        if isinstance(binding, tuple):
            raise ArityError(f"{node.name!r} is a vector; a scalar is needed here", node.span)
        return binding
    if isinstance(node, Index):
        binding = _lookup(symbols, node.name, node.span)
        if not isinstance(binding, tuple):
            raise ArityError(f"{node.name!r} is a scalar and cannot be indexed", node.span)
        if not 0 <= node.index < len(binding):
            raise ArityError(
                f"index {node.index} out of range for {node.name!r} "
                f"(length {len(binding)})",
                node.span,
            )
        return binding[node.index]
    left = _lower_expr(dag, symbols, node.left)
    right = _lower_expr(dag, symbols, node.right)
    if node.op == "+":
        return dag.add(left, right)
    if node.op == "-":
        return dag.sub(left, right)
    try:
        return dag.mul(left, right)
    except BiasedMultiplication as exc:
        raise BiasedMultiplication(exc.x, exc.y, exc.witness, span=node.span) from None


def _vector_arg(
    dag: Dag, symbols: dict[str, Binding], arg: Expr | VectorLit, func: str
) -> tuple[int, ...]:
    if isinstance(arg, VectorLit):
        return tuple(_lower_expr(dag, symbols, item) for item in arg.items)
    if isinstance(arg, Ref):
        binding = _lookup(symbols, arg.name, arg.span)
        if isinstance(binding, tuple):
            return binding
    raise ArityError(f"{func} expects a vector argument here", _span_of(arg))


def _span_of(arg: Expr | VectorLit) -> SourceSpan:
    return arg.span


def _lower_call(dag: Dag, symbols: dict[str, Binding], call: Call) -> Binding:
    def need(count: int) -> None:
        if len(call.args) != count:
            raise ArityError(
                f"{call.func} takes {count} argument(s), got {len(call.args)}", call.span
            )

    if call.func in ("sum", "pairwise"):
        need(1)
        ids = _vector_arg(dag, symbols, call.args[0], call.func)
        build = fold_sum if call.func == "sum" else tree_sum
        return build(dag, list(ids))
    if call.func == "horner":
        need(2)
        coeffs = _vector_arg(dag, symbols, call.args[0], call.func)
        x = _lower_expr(dag, symbols, call.args[1])
        return horner(dag, list(coeffs), x)
    need(2)  # karatsuba
    a = _vector_arg(dag, symbols, call.args[0], call.func)
    b = _vector_arg(dag, symbols, call.args[1], call.func)
    try:
        return karatsuba_dag(dag, Polynomial(a), Polynomial(b)).coeffs
    except ShapeMismatch as exc:
        raise ArityError(str(exc), call.span) from None


def lower(program: Program) -> Dag:
    """Build the computation graph a program describes.

    Vector outputs expand to indexed output names (``p`` becomes
    ``p[0]``, ``p[1]``, ...).  The returned graph is frozen.  Raises
    UndefinedIdentifier, ArityError, or BiasedMultiplication (with the
    span of the offending ``*``) as appropriate.
    """
    dag = Dag()
    symbols: dict[str, Binding] = {}
    for stmt in program.statements:
        if isinstance(stmt, Let):
            if isinstance(stmt.rhs, Call):
                symbols[stmt.name] = _lower_call(dag, symbols, stmt.rhs)
            elif isinstance(stmt.rhs, VectorLit):
                symbols[stmt.name] = tuple(
                    _lower_expr(dag, symbols, item) for item in stmt.rhs.items
                )
            else:
                symbols[stmt.name] = _lower_expr(dag, symbols, stmt.rhs)
        else:
            binding = _lookup(symbols, stmt.name, stmt.span)
            if isinstance(binding, tuple):
                for i, node_id in enumerate(binding):
                    dag.set_output(f"{stmt.name}[{i}]", node_id)
            else:
                dag.set_output(stmt.name, binding)
    program.symbols = dict(symbols)
    assert not validate_martingale_inducing(dag)
    return dag.freeze()
