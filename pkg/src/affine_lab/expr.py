"""Expression trees for holomorphic functions of one complex variable.

Grammar (whitespace insignificant)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' exponent)?
    exponent := ['-'] INT | '(' ['-'] INT ')'
    atom   := NUMBER | NUMBER 'i' | 'i' | 'pi' | VAR
            | FUNC '(' expr ')' | '(' expr ')'

``FUNC`` is one of exp, sin, cos, sinh, cosh.  Sums, differences and
negations of two constants are folded while parsing so that a complex
literal such as ``(1+2i)`` becomes a single constant node; the canonical
printer relies on this to round-trip.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ExprSyntaxError, UnknownIdentifierError

FUNCTIONS = ("exp", "sin", "cos", "sinh", "cosh")
UNARY = ("neg",) + FUNCTIONS
BINARY = ("add", "sub", "mul", "div")


@dataclass(frozen=True)
class HoloExpr:
    kind: str
    children: tuple = ()
    value: object = None

    # construction helpers -------------------------------------------------

    @staticmethod
    def const(value):
        return HoloExpr("const", (), complex(value))

    @staticmethod
    def var(name="z"):
        return HoloExpr("var", (), name)

    @staticmethod
    def _wrap(other):
        return other if isinstance(other, HoloExpr) else HoloExpr.const(other)

    def __add__(self, other):
        return HoloExpr("add", (self, self._wrap(other)))

    def __radd__(self, other):
        return HoloExpr("add", (self._wrap(other), self))

    def __sub__(self, other):
        return HoloExpr("sub", (self, self._wrap(other)))

    def __rsub__(self, other):
        return HoloExpr("sub", (self._wrap(other), self))

    def __mul__(self, other):
        return HoloExpr("mul", (self, self._wrap(other)))

    def __rmul__(self, other):
        return HoloExpr("mul", (self._wrap(other), self))

    def __truediv__(self, other):
        return HoloExpr("div", (self, self._wrap(other)))

    def __rtruediv__(self, other):
        return HoloExpr("div", (self._wrap(other), self))

    def __neg__(self):
        return HoloExpr("neg", (self,))

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported")
        return HoloExpr("pow", (self,), n)

    # queries ----------------------------------------------------------------

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    @property
    def divisions(self):
        """Divide nodes, i.e. the places where a pole can occur."""
        return [n for n in self.walk() if n.kind == "div"]

    @property
    def has_division(self):
        return any(n.kind == "div" for n in self.walk())

    def denominators(self):
        """Subexpressions that must not vanish: divisors and bases of negative powers."""
        out = []
        for n in self.walk():
            if n.kind == "div":
                out.append(n.children[1])
            elif n.kind == "pow" and n.value < 0:
                out.append(n.children[0])
        return list(dict.fromkeys(out))

    def variables(self):
        return sorted({n.value for n in self.walk() if n.kind == "var"})

    def substitute(self, name, replacement):
        if self.kind == "var":
            return replacement if self.value == name else self
        if not self.children:
            return self
        kids = tuple(c.substitute(name, replacement) for c in self.children)
        return HoloExpr(self.kind, kids, self.value)

    def __str__(self):
        return to_text(self)


def apply(name, arg):
    if name not in FUNCTIONS:
        raise ValueError(f"unknown function {name!r}")
    return HoloExpr(name, (HoloExpr._wrap(arg),))


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


def _tokenize(text):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastgroup)
        kind = m.lastgroup
        tok = m.group(kind)
        if kind == "num":
            end = m.end()
            # imaginary literal: digits immediately followed by a bare "i"
            if end < n and text[end] == "i" and not (end + 1 < n and (text[end + 1].isalnum() or text[end + 1] == "_")):
                tokens.append(("imag", tok, start))
                pos = end + 1
                continue
        tokens.append((kind, tok, start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


def _fold(kind, a, b=None):
    if kind == "neg":
        if a.kind == "const":
            return HoloExpr.const(-a.value)
        return HoloExpr("neg", (a,))
    if a.kind == "const" and b.kind == "const" and kind in ("add", "sub"):
        return HoloExpr.const(a.value + b.value if kind == "add" else a.value - b.value)
    return HoloExpr(kind, (a, b))


class _Parser:
    def __init__(self, text, variables):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.variables = tuple(variables)

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, op):
        kind, tok, pos = self.tok
        if kind != "op" or tok != op:
            what = "end of input" if kind == "end" else repr(tok)
            raise ExprSyntaxError(f"expected {op!r}, found {what}", pos)
        self.advance()

    def parse(self):
        e = self.expr()
        kind, tok, pos = self.tok
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {tok!r}", pos)
        return e

    def expr(self):
        left = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.advance()[1]
            right = self.term()
            left = _fold("add" if op == "+" else "sub", left, right)
        return left

    def term(self):
        left = self.unary()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = self.advance()[1]
            right = self.unary()
            left = HoloExpr("mul" if op == "*" else "div", (left, right))
        return left

    def unary(self):
        if self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.advance()[1]
            inner = self.unary()
            return _fold("neg", inner) if op == "-" else inner
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.advance()
            return HoloExpr("pow", (base,), self.exponent())
        return base

    def exponent(self):
        paren = self.tok[0] == "op" and self.tok[1] == "("
        if paren:
            self.advance()
        sign = 1
        if self.tok[0] == "op" and self.tok[1] == "-":
            self.advance()
            sign = -1
        kind, tok, pos = self.tok
        if kind != "num" or not tok.isdigit():
            raise ExprSyntaxError("exponent must be an integer literal", pos)
        self.advance()
        if paren:
            self.expect(")")
        return sign * int(tok)

    def atom(self):
        kind, tok, pos = self.tok
        if kind == "num":
            self.advance()
            return HoloExpr.const(float(tok))
        if kind == "imag":
            self.advance()
            return HoloExpr.const(complex(0.0, float(tok)))
        if kind == "ident":
            self.advance()
            if tok == "i":
                return HoloExpr.const(1j)
            if tok == "pi":
                return HoloExpr.const(math.pi)
            if tok in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return HoloExpr(tok, (arg,))
            if tok in self.variables:
                return HoloExpr.var(tok)
            raise UnknownIdentifierError(tok, pos)
        if kind == "op" and tok == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        what = "end of input" if kind == "end" else repr(tok)
        raise ExprSyntaxError(f"unexpected {what}", pos)


def parse_expr(text, variables=("z",)):
    """Parse ``text`` into a :class:`HoloExpr`.

    ``variables`` lists the identifiers accepted as free variables; scene
    oracles use ``("s", "t")`` to describe real closed forms.
    """
    return _Parser(text, variables).parse()


# ---------------------------------------------------------------------------
# printing

_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}
_SYMBOL = {"add": " + ", "sub": " - ", "mul": "*", "div": "/"}


def _real_text(x):
    r = repr(float(x))
    if r in ("inf", "-inf", "nan"):
        raise ValueError("non-finite constant")
    return r


def _const_text(c):
    c = complex(c)
    re_, im = c.real, c.imag
    if im == 0:
        text = _real_text(re_)
        return text if not text.startswith("-") else f"({text})"
    if re_ == 0:
        text = _real_text(im) + "i"
        return text if not text.startswith("-") else f"({text})"
    sign = "+" if math.copysign(1.0, im) > 0 else "-"
    return f"({_real_text(re_)}{sign}{_real_text(abs(im))}i)"


def _prec(e):
    return _PREC.get(e.kind, 5)


def to_text(e, min_prec=0):
    """Canonical printer; ``parse_expr(to_text(e)) == e`` for parsed trees."""
    k = e.kind
    if k == "const":
        out = _const_text(e.value)
    elif k == "var":
        out = e.value
    elif k in FUNCTIONS:
        out = f"{k}({to_text(e.children[0])})"
    elif k == "neg":
        out = "-" + to_text(e.children[0], 3)
    elif k == "pow":
        n = e.value
        out = to_text(e.children[0], 5) + ("^" + str(n) if n >= 0 else f"^({n})")
    else:
        p = _PREC[k]
        out = to_text(e.children[0], p) + _SYMBOL[k] + to_text(e.children[1], p + 1)
    if _prec(e) < min_prec:
        out = f"({out})"
    return out


# ---------------------------------------------------------------------------
# direct evaluation (no derivatives)

_NP = {"exp": np.exp, "sin": np.sin, "cos": np.cos, "sinh": np.sinh, "cosh": np.cosh}


def evaluate(e, **env):
    """Evaluate ``e`` with numpy complex arithmetic.

    Variables are bound through keyword arguments and may be arrays.  This
    path shares no code with the jet evaluator and is used as its oracle and
    for the real closed forms stored with scenes.
    """
    k = e.kind
    if k == "const":
        return e.value
    if k == "var":
        try:
            return np.asarray(env[e.value], dtype=complex)
        except KeyError:
            raise UnknownIdentifierError(e.value, -1) from None
    args = [evaluate(c, **env) for c in e.children]
    if k == "neg":
        return -args[0]
    if k == "add":
        return args[0] + args[1]
    if k == "sub":
        return args[0] - args[1]
    if k == "mul":
        return args[0] * args[1]
    if k == "div":
        return args[0] / args[1]
    if k == "pow":
        return args[0] ** e.value
    return _NP[k](args[0])
