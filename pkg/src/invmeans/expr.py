"""A small expression language for entering (possibly discontinuous) means as text.

Grammar::

    expr    := cond | arith
    cond    := "if" arith cmp arith "then" expr "else" expr
    cmp     := "<" | "<=" | ">" | ">="
    arith   := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | primary
    primary := NUMBER | VAR | FUNC "(" args ")" | "(" expr ")"

Functions are ``sqrt(a)``, ``abs(a)``, ``min(a, b, ...)``, ``max(a, b, ...)``
and ``pow(a, c)`` where ``c`` must be a constant expression.  ``#`` starts a
comment running to the end of the line.  Guard comparisons are exact float
comparisons, so a jump at ``abs(x - y) <= 1`` happens precisely where the
floating-point gap crosses 1.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .core import DEFAULT_GRID, STRICT, SYMMETRIC, Grid, Interval, Mean, check_mean_bounds
from .errors import MeanBoundsError, MeanEvalError, MeanSyntaxError

MAX_DEPTH = 100
FUNCTIONS = ("sqrt", "abs", "min", "max", "pow")
KEYWORDS = ("if", "then", "else")
COMPARISONS = ("<=", ">=", "<", ">")


# -- tree ---------------------------------------------------------------------

@dataclass(frozen=True)
class Node:
    line: int = field(default=0, compare=False, repr=False, kw_only=True)
    col: int = field(default=0, compare=False, repr=False, kw_only=True)

    def _err(self, message: str) -> MeanEvalError:
        return MeanEvalError(message, self.line, self.col)


@dataclass(frozen=True)
class Const(Node):
    value: float

    def eval(self, x, y):
        return self.value


@dataclass(frozen=True)
class Var(Node):
    name: str

    def eval(self, x, y):
        return x if self.name == "x" else y


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node

    def eval(self, x, y):
        a = self.left.eval(x, y)
        b = self.right.eval(x, y)
        if self.op == "+":
            v = a + b
        elif self.op == "-":
            v = a - b
        elif self.op == "*":
            v = a * b
        elif b == 0:
            raise self._err("division by zero")
        else:
            v = a / b
        if not math.isfinite(v):
            raise self._err("overflow")
        return v


@dataclass(frozen=True)
class Unary(Node):
    op: str  # "-", "sqrt" or "abs"
    operand: Node

    def eval(self, x, y):
        v = self.operand.eval(x, y)
        if self.op == "-":
            return -v
        if self.op == "abs":
            return abs(v)
        if v < 0:
            raise self._err(f"sqrt of negative value {v!r}")
        return math.sqrt(v)


@dataclass(frozen=True)
class NAry(Node):
    op: str  # "min" or "max"
    args: tuple[Node, ...]

    def eval(self, x, y):
        vals = [a.eval(x, y) for a in self.args]
        return min(vals) if self.op == "min" else max(vals)


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exponent: float

    def eval(self, x, y):
        b = self.base.eval(x, y)
        try:
            return math.pow(b, self.exponent)
        except (ValueError, OverflowError, ZeroDivisionError) as exc:
            raise self._err(f"pow({b!r}, {self.exponent!r}): {exc}") from None


@dataclass(frozen=True)
class Cond(Node):
    op: str
    left: Node
    right: Node
    then: Node
    orelse: Node

    def eval(self, x, y):
        a = self.left.eval(x, y)
        b = self.right.eval(x, y)
        if self.op == "<":
            hit = a < b
        elif self.op == "<=":
            hit = a <= b
        elif self.op == ">":
            hit = a > b
        else:
            hit = a >= b
        return self.then.eval(x, y) if hit else self.orelse.eval(x, y)


MeanExpr = Node


def evaluate(expr: Node, x: float, y: float = 0.0) -> float:
    """Evaluate ``expr`` strictly at ``(x, y)``; only the taken branch of a guard runs."""
    return expr.eval(float(x), float(y))


def variables(expr: Node) -> set[str]:
    if isinstance(expr, Var):
        return {expr.name}
    out: set[str] = set()
    for child in _children(expr):
        out |= variables(child)
    return out


def _children(expr: Node) -> tuple[Node, ...]:
    if isinstance(expr, BinOp):
        return (expr.left, expr.right)
    if isinstance(expr, Unary):
        return (expr.operand,)
    if isinstance(expr, NAry):
        return expr.args
    if isinstance(expr, Pow):
        return (expr.base,)
    if isinstance(expr, Cond):
        return (expr.left, expr.right, expr.then, expr.orelse)
    return ()


def to_source(expr: Node) -> str:
    """Fully parenthesized text that parses back to an equal tree."""
    if isinstance(expr, Const):
        return repr(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, BinOp):
        return f"({to_source(expr.left)} {expr.op} {to_source(expr.right)})"
    if isinstance(expr, Unary):
        if expr.op == "-":
            return f"(-{to_source(expr.operand)})"
        return f"{expr.op}({to_source(expr.operand)})"
    if isinstance(expr, NAry):
        return f"{expr.op}({', '.join(to_source(a) for a in expr.args)})"
    if isinstance(expr, Pow):
        return f"pow({to_source(expr.base)}, {expr.exponent!r})"
    if isinstance(expr, Cond):
        return (f"(if {to_source(expr.left)} {expr.op} {to_source(expr.right)} "
                f"then {to_source(expr.then)} else {to_source(expr.orelse)})")
    raise TypeError(f"not an expression node: {expr!r}")


# -- lexer --------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str  # "num", "name", "op", "eof"
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|[-+*/(),<>])
""", re.VERBOSE)


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        col = pos - line_start + 1
        if m is None:
            raise MeanSyntaxError(f"unexpected character {source[pos]!r}", line, col)
        kind, text = m.lastgroup, m.group()
        if kind == "ws":
            nl = text.count("\n")
            if nl:
                line += nl
                line_start = pos + text.rindex("\n") + 1
        else:
            tokens.append(Token(kind, text, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# -- parser -------------------------------------------------------------------

def _depth(node: Node) -> int:
    return getattr(node, "_depth", 1)


def _mk(cls, tok: Token, *args) -> Node:
    node = cls(*args, line=tok.line, col=tok.col)
    kids = _children(node)
    object.__setattr__(node, "_depth", 1 + max((_depth(k) for k in kids), default=0))
    if node._depth > MAX_DEPTH:
        raise MeanSyntaxError("expression nested too deeply", tok.line, tok.col)
    return node


class _Parser:
    def __init__(self, source: str, allowed: frozenset[str]):
        self.toks = tokenize(source)
        self.i = 0
        self.allowed = allowed
        self.nesting = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def fail(self, message: str, expected=()) -> MeanSyntaxError:
        t = self.tok
        return MeanSyntaxError(message, t.line, t.col, expected)

    def accept(self, text: str) -> Token | None:
        t = self.tok
        if t.kind in ("op", "name") and t.text == text:
            self.i += 1
            return t
        return None

    def expect(self, text: str) -> Token:
        t = self.accept(text)
        if t is None:
            found = self.tok.text or "end of input"
            raise self.fail(f"unexpected {found!r}", (repr(text),))
        return t

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "eof":
            raise self.fail(f"unexpected {self.tok.text!r} after expression",
                            ("operator", "end of input"))
        return node

    def expr(self) -> Node:
        self.nesting += 1
        if self.nesting > MAX_DEPTH:
            raise self.fail("expression nested too deeply")
        try:
            kw = self.accept("if")
            if kw is None:
                return self.arith()
            left = self.arith()
            t = self.tok
            if not (t.kind == "op" and t.text in COMPARISONS):
                raise self.fail("guard needs a comparison", COMPARISONS)
            self.i += 1
            right = self.arith()
            self.expect("then")
            then = self.expr()
            self.expect("else")
            orelse = self.expr()
            return _mk(Cond, kw, t.text, left, right, then, orelse)
        finally:
            self.nesting -= 1

    def arith(self) -> Node:
        node = self.term()
        while True:
            t = self.accept("+") or self.accept("-")
            if t is None:
                return node
            node = _mk(BinOp, t, t.text, node, self.term())

    def term(self) -> Node:
        node = self.unary()
        while True:
            t = self.accept("*") or self.accept("/")
            if t is None:
                return node
            node = _mk(BinOp, t, t.text, node, self.unary())

    def unary(self) -> Node:
        t = self.accept("-")
        if t is None:
            return self.primary()
        self.nesting += 1
        if self.nesting > MAX_DEPTH:
            raise self.fail("expression nested too deeply")
        try:
            return _mk(Unary, t, "-", self.unary())
        finally:
            self.nesting -= 1

    def primary(self) -> Node:
        t = self.tok
        if t.kind == "num":
            self.i += 1
            value = float(t.text)
            if not math.isfinite(value):
                raise MeanSyntaxError(f"numeric literal {t.text!r} overflows", t.line, t.col)
            return _mk(Const, t, value)
        if t.kind == "name":
            if t.text in FUNCTIONS:
                self.i += 1
                return self.call(t)
            if t.text in KEYWORDS:
                raise self.fail(f"unexpected keyword {t.text!r}", ("expression",))
            if t.text not in self.allowed:
                raise MeanSyntaxError(
                    f"unknown identifier {t.text!r}", t.line, t.col,
                    tuple(sorted(self.allowed)) + FUNCTIONS)
            self.i += 1
            return _mk(Var, t, t.text)
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        found = t.text or "end of input"
        raise self.fail(f"unexpected {found!r}", ("expression",))

    def call(self, name: Token) -> Node:
        self.expect("(")
        args = [self.expr()]
        while self.accept(","):
            args.append(self.expr())
        self.expect(")")
        fn = name.text
        if fn in ("sqrt", "abs"):
            if len(args) != 1:
                raise MeanSyntaxError(f"{fn} takes 1 argument, got {len(args)}",
                                      name.line, name.col)
            return _mk(Unary, name, fn, args[0])
        if fn in ("min", "max"):
            if len(args) < 2:
                raise MeanSyntaxError(f"{fn} takes at least 2 arguments",
                                      name.line, name.col)
            return _mk(NAry, name, fn, tuple(args))
        if len(args) != 2:
            raise MeanSyntaxError(f"pow takes 2 arguments, got {len(args)}",
                                  name.line, name.col)
        if variables(args[1]):
            raise MeanSyntaxError("pow exponent must be a constant", name.line, name.col)
        try:
            exponent = evaluate(args[1], 0.0, 0.0)
        except MeanEvalError as exc:
            raise MeanSyntaxError(f"bad pow exponent: {exc.message}",
                                  name.line, name.col) from None
        if not math.isfinite(exponent):
            raise MeanSyntaxError("pow exponent overflows", name.line, name.col)
        return _mk(Pow, name, args[0], exponent)


def parse(source: str | bytes, variables: tuple[str, ...] = ("x", "y")) -> Node:
    """Parse mean-expression text.

    Raises :class:`MeanSyntaxError` (with 1-based line/column and the set of
    expected tokens) on any malformed input; never anything else.
    """
    if isinstance(source, (bytes, bytearray)):
        source = bytes(source).decode("utf-8", errors="replace")
    try:
        return _Parser(source, frozenset(variables)).parse()
    except RecursionError:
        # the nesting limit normally fires first; this guards small stacks
        raise MeanSyntaxError("expression nested too deeply", 1, 1) from None


# -- means from text ----------------------------------------------------------

def lift_to_mean(expr: Node, domain: Interval, grid: Grid = DEFAULT_GRID,
                 name: str | None = None) -> Mean:
    """Accept ``expr`` as a mean if ``min <= expr <= max`` at every sampled point.

    Passing the grid is necessary, not sufficient, for being a mean.  The
    returned mean carries ``symmetric`` / ``strict`` tags when those held on
    the grid too.
    """
    points = grid.points(domain)
    if not points:
        raise ValueError("empty grid")
    values = {}
    for p in points:
        try:
            values[p] = expr.eval(*p)
        except MeanEvalError as exc:
            raise MeanEvalError(f"at {p}: {exc.message}", exc.line, exc.column) from None
    label = name or to_source(expr)
    func = expr.eval
    check_mean_bounds(lambda x, y: values[(x, y)], domain, grid, name=label)

    props = set()
    try:
        if all(values[(x, y)] == func(y, x) for x, y in points):
            props.add(SYMMETRIC)
    except MeanEvalError:
        pass
    if all(min(x, y) < v < max(x, y) for (x, y), v in values.items() if x != y):
        props.add(STRICT)
    return Mean(label, func, domain, props)


def parse_mean(source: str, domain: Interval, grid: Grid = DEFAULT_GRID,
               name: str | None = None) -> Mean:
    return lift_to_mean(parse(source), domain, grid, name=name or source.strip())


__all__ = [
    "BinOp", "Cond", "Const", "MeanExpr", "NAry", "Node", "Pow",
    "Unary", "Var", "evaluate", "lift_to_mean", "parse", "parse_mean", "to_source",
    "tokenize", "variables",
]
