"""
Parser of the expression grammar.

The grammar knows integers, `+ - * / ^` (`**` is read as `^`, exponents must be
integers), parentheses, `exp(...)`, the dependent variable `u`, jet variables
`u[a1,...,an]`, coordinates `x1..xn` (or `t`, `x0`, `x1`... with a time variable,
`x` standing for `x1` when there is a single spatial variable) and the user
symbols declared in the context. `#` starts a comment that runs to the end of
the line.

Errors carry the byte offset of the offending token in the UTF-8 text.

Functions:
- tokenize(text): Split text into tokens.
- parse_expr(text, ctx): Parse one expression and normalize it.
- parse_equation(text, ctx): Parse `expr` or `lhs = rhs` (read as `lhs - (rhs)`).
"""
from dataclasses import dataclass
import logging

import sympy
from sympy import Symbol

from redmod.errors import ExprSyntaxError, JetIndexLengthError, UnknownIdentifier
from redmod.expr import ExpAtom, normalize
from redmod.jet import U, jet_symbol

logger = logging.getLogger(__name__)

# Binary operators by increasing binding power.
OPERATORS = [
    [("+", "left"), ("-", "left")],
    [("*", "left"), ("/", "left")],
    [("^", "right")],
]
OPERATOR_PREC = {name: idx for idx, group in enumerate(OPERATORS) for name, _ in group}
OPERATOR_ASSOC = {name: assoc for group in OPERATORS for name, assoc in group}


@dataclass(frozen=True)
class Token:
    kind: str
    value: object
    offset: int


def tokenize(text):
    """
    Turn `text` into a list of tokens ending with an `end` token.

    Raises:
        ExprSyntaxError: On characters outside the grammar.
    """
    tokens = []
    idx = 0
    offset = 0

    def advance():
        nonlocal idx, offset
        c = text[idx]
        idx += 1
        offset += len(c.encode("utf-8"))
        return c

    while idx < len(text):
        start = offset
        c = advance()
        if c.isspace():
            continue
        if c == "#":
            while idx < len(text) and advance() != "\n":
                pass
            continue
        if c.isdigit() and c.isascii():
            digits = c
            while idx < len(text) and text[idx].isdigit() and text[idx].isascii():
                digits += advance()
            if idx < len(text) and text[idx] == ".":
                raise ExprSyntaxError("Decimal numbers are not supported, use fractions", offset)
            tokens.append(Token("number", int(digits), start))
            continue
        if c == "*" and idx < len(text) and text[idx] == "*":
            advance()
            tokens.append(Token("op", "^", start))
            continue
        if c in OPERATOR_PREC:
            tokens.append(Token("op", c, start))
            continue
        if c in "()[],=":
            tokens.append(Token(c, c, start))
            continue
        if c.isascii() and (c.isalpha() or c == "_"):
            if c == "_":
                raise ExprSyntaxError("Identifiers may not start with an underscore", start)
            name = c
            while idx < len(text) and text[idx].isascii() and (text[idx].isalnum()
                                                              or text[idx] == "_"):
                name += advance()
            tokens.append(Token("name", name, start))
            continue
        raise ExprSyntaxError(f"Unexpected character {c!r}", start)
    tokens.append(Token("end", None, offset))
    return tokens


class _Parser:
    """Precedence climbing over a token list."""

    def __init__(self, tokens, ctx):
        self.tokens = tokens
        self.pos = 0
        self.ctx = ctx
        self.symbols = {decl.name for decl in ctx.symbols}

    def peek(self):
        return self.tokens[self.pos]

    def pop(self):
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, kind):
        token = self.pop()
        if token.kind != kind:
            raise ExprSyntaxError(f"Expected {kind!r}", token.offset)
        return token

    def parse(self, min_prec=0):
        lhs = self.atom()
        while True:
            token = self.peek()
            if token.kind != "op" or OPERATOR_PREC[token.value] < min_prec:
                return lhs
            self.pop()
            prec = OPERATOR_PREC[token.value]
            next_prec = prec + 1 if OPERATOR_ASSOC[token.value] == "left" else prec
            rhs = self.parse(next_prec)
            lhs = self.apply(token, lhs, rhs)

    @staticmethod
    def apply(token, lhs, rhs):
        if token.value == "+":
            return lhs + rhs
        if token.value == "-":
            return lhs - rhs
        if token.value == "*":
            return lhs * rhs
        if token.value == "/":
            if rhs == 0:
                raise ExprSyntaxError("Division by zero", token.offset)
            return lhs / rhs
        exponent = rhs
        if not exponent.is_Integer:
            raise ExprSyntaxError("Exponents must be integers", token.offset)
        if exponent < 0 and lhs == 0:
            raise ExprSyntaxError("Division by zero", token.offset)
        return lhs**exponent

    def atom(self):
        token = self.pop()
        if token.kind == "op" and token.value == "-":
            return -self.parse(OPERATOR_PREC["^"])
        if token.kind == "op" and token.value == "+":
            return self.parse(OPERATOR_PREC["^"])
        if token.kind == "(":
            inner = self.parse(0)
            self.expect(")")
            return inner
        if token.kind == "number":
            return sympy.Integer(token.value)
        if token.kind == "name":
            return self.identifier(token)
        if token.kind == "end":
            raise ExprSyntaxError("Unexpected end of input", token.offset)
        raise ExprSyntaxError(f"Unexpected token {token.value!r}", token.offset)

    def identifier(self, token):
        name = token.value
        if name == "exp" and self.peek().kind == "(":
            self.pop()
            argument = self.parse(0)
            self.expect(")")
            return ExpAtom(normalize(argument))
        if name == "u":
            if self.peek().kind == "[":
                return self.jet_index(token)
            return U
        if name in self.symbols:
            return Symbol(name)
        names = self.ctx.coordinate_names
        if name in names:
            return Symbol(name)
        if self.ctx.time_alias and name == "x0":
            return self.ctx.coordinate(0)
        if self.ctx.time_alias and name == "x" and self.ctx.n == 2:
            return self.ctx.coordinate(1)
        raise UnknownIdentifier(f"Unknown identifier {name!r}", token.offset)

    def jet_index(self, token):
        self.pop()
        entries = [self.expect("number").value]
        while self.peek().kind == ",":
            self.pop()
            entries.append(self.expect("number").value)
        self.expect("]")
        if len(entries) != self.ctx.n:
            raise JetIndexLengthError(f"Jet index has {len(entries)} entries, the context has "
                                      f"{self.ctx.n} independent variables", token.offset)
        return jet_symbol(entries)


def parse_expr(text, ctx):
    """
    Parse `text` into a normalized expression.

    Args:
        text (str): Expression in the grammar.
        ctx (JetContext): Coordinates and declared symbols.

    Returns:
        sympy.Expr: The normalized expression.

    Raises:
        ExprSyntaxError: With the byte offset of the problem.
    """
    parser = _Parser(tokenize(text), ctx)
    result = parser.parse(0)
    token = parser.peek()
    if token.kind != "end":
        raise ExprSyntaxError(f"Unexpected token {token.value!r}", token.offset)
    return normalize(result)


def parse_equation(text, ctx):
    """Parse `expr` or `lhs = rhs`; the latter becomes `lhs - (rhs)`."""
    parser = _Parser(tokenize(text), ctx)
    lhs = parser.parse(0)
    token = parser.peek()
    if token.kind == "=":
        parser.pop()
        lhs = lhs - parser.parse(0)
        token = parser.peek()
    if token.kind != "end":
        raise ExprSyntaxError(f"Unexpected token {token.value!r}", token.offset)
    return normalize(lhs)
