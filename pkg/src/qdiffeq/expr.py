"""Expression language for q-difference operators.

Grammar::

    expr   := ['+'|'-'] term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := atom ('^' integer)?
    atom   := 'z' | 'S' | 'q' ('^' rational)? | number | '(' expr ')'

Numbers are exact: decimals (``1.5``, ``2e-3``), rationals ``p/r`` and
imaginary literals with an ``i`` or ``j`` suffix (``3i``, ``1/2i``, ``i``).
Division is only accepted by scalar factors; this is checked when the
tree is normalised.  ``−`` and ``·`` are accepted for ``-`` and ``*``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import ParseError
from .numctx import format_fraction

__all__ = ["Num", "Sym", "QPow", "Add", "Mul", "Pow", "Node", "parse_expr", "print_expr", "tokenize"]


@dataclass(frozen=True)
class Num:
    """Exact literal ``re + im*i``."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)


@dataclass(frozen=True)
class Sym:
    name: str  # "z" or "S"


@dataclass(frozen=True)
class QPow:
    exponent: Fraction = Fraction(1)


@dataclass(frozen=True)
class Add:
    items: tuple  # of (sign, node), sign in {+1, -1}


@dataclass(frozen=True)
class Mul:
    items: tuple  # of (op, node), op in {"*", "/"}; first op is "*"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


Node = Union[Num, Sym, QPow, Add, Mul, Pow]

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?(?:/\d+)?[ij]?)
  | (?P<imag>[ij](?![A-Za-z]))
  | (?P<name>[zSq])
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)

_TRANSLATE = str.maketrans({"−": "-", "·": "*", "×": "*", "σ": "S"})


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    src = text.translate(_TRANSLATE)
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m:
            raise ParseError(f"unexpected character {src[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(Token("end", "", len(src)))
    return tokens


def _number_value(text: str) -> Num:
    imag = text[-1] in "ij"
    body = text[:-1] if imag else text
    if "/" in body:
        num, den = body.split("/")
        if int(den) == 0:
            raise ZeroDivisionError
        val = Fraction(num) / Fraction(den)
    else:
        val = Fraction(body)
    return Num(Fraction(0), val) if imag else Num(val, Fraction(0))


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return ParseError(msg, tok.pos, self.text)

    def accept(self, kind, text=None):
        t = self.tok
        if t.kind == kind and (text is None or t.text == text):
            self.i += 1
            return t
        return None

    def expect(self, kind, text=None, what=None):
        t = self.accept(kind, text)
        if t is None:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {what or text or kind}, found {found!r}")
        return t

    def parse(self) -> Node:
        if self.tok.kind == "end":
            raise self.error("empty expression")
        node = self.expr()
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}")
        return node

    def expr(self) -> Node:
        items = []
        sign = 1
        if self.accept("op", "-"):
            sign = -1
        else:
            self.accept("op", "+")
        items.append((sign, self.term()))
        while True:
            if self.accept("op", "+"):
                items.append((1, self.term()))
            elif self.accept("op", "-"):
                items.append((-1, self.term()))
            else:
                break
        if len(items) == 1 and items[0][0] == 1:
            return items[0][1]
        return Add(tuple(items))

    def term(self) -> Node:
        items = [("*", self.factor())]
        while True:
            if self.accept("op", "*"):
                items.append(("*", self.factor()))
            elif self.accept("op", "/"):
                items.append(("/", self.factor()))
            else:
                break
        if len(items) == 1:
            return items[0][1]
        return Mul(tuple(items))

    def factor(self) -> Node:
        base = self.atom()
        if self.accept("op", "^"):
            return Pow(base, self.integer())
        return base

    def integer(self) -> int:
        paren = self.accept("op", "(")
        sign = -1 if self.accept("op", "-") else 1
        if sign == 1:
            self.accept("op", "+")
        t = self.expect("number", what="integer exponent")
        if not t.text.isdigit():
            raise self.error("exponent must be an integer", t)
        if paren:
            self.expect("op", ")")
        return sign * int(t.text)

    def rational(self) -> Fraction:
        paren = self.accept("op", "(")
        sign = -1 if self.accept("op", "-") else 1
        if sign == 1:
            self.accept("op", "+")
        t = self.expect("number", what="rational exponent")
        body = t.text
        if body[-1] in "ij" or "." in body or "e" in body.lower():
            raise self.error("q exponent must be rational", t)
        if "/" in body:
            num, den = body.split("/")
            if int(den) == 0:
                raise self.error("zero denominator", t)
            val = Fraction(int(num), int(den))
        else:
            val = Fraction(int(body))
            # allow the spaced form q^(1 / 2)
            if paren and self.accept("op", "/"):
                d = self.expect("number", what="denominator")
                if not d.text.isdigit() or int(d.text) == 0:
                    raise self.error("bad denominator", d)
                val /= int(d.text)
        if paren:
            self.expect("op", ")")
        return sign * val

    def atom(self) -> Node:
        t = self.tok
        if self.accept("name"):
            if t.text == "q":
                if self.accept("op", "^"):
                    return QPow(self.rational())
                return QPow(Fraction(1))
            return Sym(t.text)
        if self.accept("number"):
            try:
                return _number_value(t.text)
            except (ValueError, ZeroDivisionError):
                raise self.error(f"bad number {t.text!r}", t) from None
        if self.accept("imag"):
            return Num(Fraction(0), Fraction(1))
        if self.accept("op", "("):
            node = self.expr()
            self.expect("op", ")")
            return node
        found = t.text or "end of input"
        raise self.error(f"expected operand, found {found!r}")


def parse_expr(text: str) -> Node:
    """Parse operator text into an expression tree."""
    return _Parser(text).parse()


# -- printing -----------------------------------------------------------

def _print_num(n: Num) -> str:
    if n.im == 0:
        return format_fraction(n.re)
    if n.re == 0:
        return "i" if n.im == 1 else f"{format_fraction(n.im)}i"
    # never produced by the parser; rendered as a sum
    sign = "-" if n.im < 0 else "+"
    return f"({format_fraction(n.re)} {sign} {format_fraction(abs(n.im))}i)"


def _needs_parens(node: Node, context: str) -> bool:
    if isinstance(node, Add):
        return True
    if isinstance(node, Mul):
        return context == "pow"
    if isinstance(node, Num):
        negative = node.re < 0 or node.im < 0
        fractional = node.re.denominator != 1 or node.im.denominator != 1
        return negative or (context == "pow" and fractional)
    if isinstance(node, Pow):
        return context == "pow"
    if isinstance(node, QPow):
        # "q^2" would read back as a single power of q, not Pow(q, 2)
        return context == "pow"
    return False


def print_expr(node: Node) -> str:
    """Render a tree so that ``parse_expr(print_expr(t)) == t``."""
    if isinstance(node, Num):
        return _print_num(node)
    if isinstance(node, Sym):
        return node.name
    if isinstance(node, QPow):
        e = node.exponent
        if e == 1:
            return "q"
        if e.denominator == 1 and e >= 0:
            return f"q^{e.numerator}"
        return f"q^({format_fraction(e)})"
    if isinstance(node, Pow):
        inner = print_expr(node.base)
        if _needs_parens(node.base, "pow"):
            inner = f"({inner})"
        exp = str(node.exponent) if node.exponent >= 0 else f"({node.exponent})"
        return f"{inner}^{exp}"
    if isinstance(node, Mul):
        parts = []
        for k, (op, sub) in enumerate(node.items):
            s = print_expr(sub)
            if _needs_parens(sub, "mul") or (op == "/" and isinstance(sub, Mul)):
                s = f"({s})"
            parts.append(s if k == 0 else f" {op} {s}" if op == "/" else f"*{s}")
        return "".join(parts)
    if isinstance(node, Add):
        out = []
        for k, (sign, sub) in enumerate(node.items):
            s = print_expr(sub)
            if isinstance(sub, Add) or (isinstance(sub, Num) and (sub.re < 0 or sub.im < 0)):
                s = f"({s})"
            if k == 0:
                out.append(f"-{s}" if sign < 0 else s)
            else:
                out.append(f" {'-' if sign < 0 else '+'} {s}")
        return "".join(out)
    raise TypeError(f"not an expression node: {node!r}")
