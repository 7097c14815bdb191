"""Recursive-descent parser for scalar profile expressions.

Grammar, lowest to highest precedence::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := '-' unary | power
    power := atom ('^' unary)?
    atom  := number | ident | ident '(' expr ')' | '(' expr ')'

``^`` is right-associative and binds tighter than a leading minus, so
``-u^2`` is ``-(u^2)``.  Implicit multiplication is not supported.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Union

from .jet import DomainError, Jet2, apply_primitive, constant

__all__ = [
    "ParseError",
    "Num",
    "Const",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "parse",
    "eval_jet",
    "eval_scalar",
    "to_source",
    "variables",
    "FUNCTIONS",
    "CONSTANTS",
]

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh")
CONSTANTS = {"pi": math.pi, "e": math.e}
# recursion guard; each level costs a handful of Python frames
MAX_DEPTH = 100


class ParseError(ValueError):
    """Syntax or name error in an expression.

    Attributes
    ----------
    offset : int
        Byte offset into the UTF-8 encoded source.
    expected : str
        What the parser was looking for.
    found : str
        Text of the offending token (empty at end of input).
    """

    def __init__(self, offset, expected, found, message=None):
        self.offset = offset
        self.expected = expected
        self.found = found
        if message is None:
            shown = repr(found) if found else "end of input"
            message = f"at offset {offset}: expected {expected}, found {shown}"
        super().__init__(message)


# AST nodes. Offsets are kept for diagnostics but excluded from equality so
# that structurally identical trees compare equal.


@dataclass(frozen=True)
class Num:
    value: float
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Const:
    name: str
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Expr"
    offset: int = field(default=0, compare=False)


Expr = Union[Num, Const, Var, Neg, BinOp, Call]


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),−])
    """,
    re.VERBOSE,
)


class _Parser:
    def __init__(self, source, allowed_vars):
        self.source = source
        self.allowed = frozenset(allowed_vars)
        self.tokens = self._tokenize()
        self.pos = 0
        self.depth = 0

    def _enter(self, tok):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise ParseError(tok[2], f"nesting depth at most {MAX_DEPTH}", tok[1])

    def _leave(self):
        self.depth -= 1

    def _byte_offset(self, index):
        return len(self.source[:index].encode("utf-8"))

    def _tokenize(self):
        tokens = []
        i = 0
        src = self.source
        while i < len(src):
            m = _TOKEN.match(src, i)
            if m is None:
                raise ParseError(self._byte_offset(i), "a token", src[i])
            kind = m.lastgroup
            if kind != "ws":
                text = m.group()
                if text == "−":
                    text = "-"
                tokens.append((kind, text, self._byte_offset(i)))
            i = m.end()
        tokens.append(("end", "", self._byte_offset(len(src))))
        return tokens

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text, what):
        tok = self.peek()
        if tok[1] != text or tok[0] == "end":
            raise ParseError(tok[2], what, tok[1])
        return self.advance()

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            if tok[1] == ")":
                raise ParseError(tok[2], "end of input (unbalanced ')')", tok[1])
            raise ParseError(tok[2], "operator or end of input", tok[1])
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            _, op, off = self.advance()
            node = BinOp(op, node, self.term(), off)
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            _, op, off = self.advance()
            node = BinOp(op, node, self.unary(), off)
        return node

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.advance()
            self._enter(tok)
            node = Neg(self.unary(), tok[2])
            self._leave()
            return node
        return self.power()

    def power(self):
        base = self.atom()
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "^":
            self.advance()
            self._enter(tok)
            node = BinOp("^", base, self.unary(), tok[2])
            self._leave()
            return node
        return base

    def atom(self):
        kind, text, off = self.peek()
        if kind == "num":
            self.advance()
            value = float(text)
            if not math.isfinite(value):
                raise ParseError(off, "a finite number", text)
            return Num(value, off)
        if kind == "ident":
            self.advance()
            nxt = self.peek()
            if text in FUNCTIONS:
                if nxt[1] != "(":
                    raise ParseError(nxt[2], f"'(' after function {text}", nxt[1])
                self._enter(self.advance())
                arg = self.expr()
                self._leave()
                close = self.peek()
                if close[1] == ",":
                    raise ParseError(close[2], f"')' ({text} takes exactly 1 argument)", ",")
                self.expect(")", "')'")
                return Call(text, arg, off)
            if text in self.allowed:
                node = Var(text, off)
            elif text in CONSTANTS:
                node = Const(text, off)
            else:
                raise ParseError(
                    off,
                    "a variable, constant or function",
                    text,
                    f"unknown identifier {text!r} at offset {off}",
                )
            if nxt[1] == "(":
                raise ParseError(nxt[2], f"an operator ({text} is not a function)", "(")
            return node
        if kind == "op" and text == "(":
            self._enter(self.advance())
            node = self.expr()
            self._leave()
            self.expect(")", "')'")
            return node
        raise ParseError(off, "expression", text)


def parse(source, allowed_vars=("u",)):
    """Parse ``source`` into an expression tree.

    Raises
    ------
    ParseError
        On any syntax error, unknown identifier or arity violation.
    """
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(exc.start, "UTF-8 text", repr(source[exc.start:exc.start + 1])) from None
    return _Parser(source, allowed_vars).parse()


def variables(node):
    """Set of variable names referenced in ``node``."""
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, (Num, Const)):
        return set()
    if isinstance(node, Neg):
        return variables(node.operand)
    if isinstance(node, Call):
        return variables(node.arg)
    return variables(node.left) | variables(node.right)


def eval_jet(node, u, v=None):
    """Evaluate ``node`` on jets; ``u`` and ``v`` are the seeded variables.

    Domain errors raised by primitives carry the source offset of the node
    that failed.
    """
    env = {"u": u}
    if v is not None:
        env["v"] = v
    return _eval_jet(node, env)


def _eval_jet(node, env):
    if isinstance(node, Num):
        return constant(node.value)
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise ValueError(f"no value supplied for variable {node.name!r}") from None
    if isinstance(node, Const):
        return constant(CONSTANTS[node.name])
    try:
        if isinstance(node, Neg):
            return -_eval_jet(node.operand, env)
        if isinstance(node, Call):
            return apply_primitive(node.name, _eval_jet(node.arg, env))
        left = _eval_jet(node.left, env)
        right = _eval_jet(node.right, env)
        op = node.op
        if op == "+":
            return left + right
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        if op == "/":
            return left / right
        return left ** right
    except DomainError as exc:
        if exc.offset is None:
            exc.with_offset(node.offset)
        raise


_SCALAR_FUNCS = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
    "sinh": math.sinh,
    "cosh": math.cosh,
}


def eval_scalar(node, u, v=0.0):
    """Plain floating-point evaluation, independent of the jet machinery."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return u if node.name == "u" else v
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Neg):
        return -eval_scalar(node.operand, u, v)
    if isinstance(node, Call):
        return _SCALAR_FUNCS[node.name](eval_scalar(node.arg, u, v))
    a = eval_scalar(node.left, u, v)
    b = eval_scalar(node.right, u, v)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return a / b
    return math.pow(a, b)


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4, "atom": 5}


def _prec(node):
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _PREC["neg"]
    return _PREC["atom"]


def to_source(node):
    """Pretty-print with the minimal parentheses that re-parse identically."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Call):
        return f"{node.name}({to_source(node.arg)})"
    if isinstance(node, Neg):
        inner = to_source(node.operand)
        if _prec(node.operand) < _PREC["neg"]:
            inner = f"({inner})"
        return f"-{inner}"
    p = _PREC[node.op]
    left, right = to_source(node.left), to_source(node.right)
    if node.op == "^":
        if _prec(node.left) < _PREC["atom"]:
            left = f"({left})"
        if _prec(node.right) < _PREC["neg"]:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(node.left) < p:
        left = f"({left})"
    if _prec(node.right) <= p:
        right = f"({right})"
    return f"{left} {node.op} {right}"
