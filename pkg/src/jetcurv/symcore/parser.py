"""Recursive-descent parser for the expression grammar.

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := primary ('^' exponent)?
    exponent:= ['-'] INT ('^' exponent)? | '(' ['-'] INT ')'
    primary := INT | IDENT | IDENT '(' expr ')' | '(' expr ')'

``^`` is right-associative and takes integer literals only.  Whitespace is
insignificant.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, List, Optional

from . import expr as E

ROLES = ("base", "fibre", "derivative", "parameter")

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z][A-Za-z0-9_]*)|(.))")


class ParseError(ValueError):
    def __init__(self, message: str, pos: int, text: str = ""):
        super().__init__(f"{message} at position {pos}" + (f" in {text!r}" if text else ""))
        self.pos = pos


class UnknownIdentifierError(ParseError):
    def __init__(self, name: str, pos: int, text: str = ""):
        super().__init__(f"unknown identifier {name!r}", pos, text)
        self.name = name


@dataclass
class SymbolTable:
    """Ordered, unique symbol names tagged with a role."""

    names: List[str] = field(default_factory=list)
    roles: List[str] = field(default_factory=list)

    def __post_init__(self):
        if len(self.names) != len(self.roles):
            raise ValueError("names and roles differ in length")
        if len(set(self.names)) != len(self.names):
            raise ValueError("symbol names must be unique")
        for r in self.roles:
            if r not in ROLES:
                raise ValueError(f"bad role {r!r}")
        for n in self.names:
            if n in E.FUNCTIONS or not re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", n):
                raise ValueError(f"invalid symbol name {n!r}")

    def __contains__(self, name):
        return name in self.names

    def index(self, name: str) -> int:
        return self.names.index(name)

    def role(self, name: str) -> str:
        return self.roles[self.names.index(name)]

    def with_parameters(self, params: Iterable[str]) -> "SymbolTable":
        extra = [p for p in params if p not in self.names]
        return SymbolTable(self.names + extra, self.roles + ["parameter"] * len(extra))

    def of_role(self, role: str) -> List[str]:
        return [n for n, r in zip(self.names, self.roles) if r == role]


def _tokenize(text: str):
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m.group(0).strip() == "":
            break
        start = m.start(m.lastindex)
        if m.group(1):
            toks.append(("int", m.group(1), start))
        elif m.group(2):
            toks.append(("ident", m.group(2), start))
        else:
            ch = m.group(3)
            if ch not in "+-*/^()":
                raise ParseError(f"unexpected character {ch!r}", start, text)
            toks.append((ch, ch, start))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, symbols: Optional[SymbolTable]):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.symbols = symbols

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None):
        tok = self.toks[self.i]
        if kind is not None and tok[0] != kind:
            what = "end of input" if tok[0] == "end" else repr(tok[1])
            raise ParseError(f"expected {kind!r}, found {what}", tok[2], self.text)
        self.i += 1
        return tok

    def parse(self):
        if self.peek()[0] == "end":
            raise ParseError("empty expression", 0, self.text)
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected {tok[1]!r}", tok[2], self.text)
        return e

    def expr(self):
        e = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            t = self.term()
            e = e + t if op == "+" else e - t
        return e

    def term(self):
        e = self.unary()
        while self.peek()[0] in ("*", "/"):
            op, _, pos = self.take()
            f = self.unary()
            if op == "*":
                e = e * f
            else:
                if f.is_zero_const:
                    raise ParseError("division by zero", pos, self.text)
                e = e / f
        return e

    def unary(self):
        if self.peek()[0] == "-":
            self.take()
            return -self.unary()
        if self.peek()[0] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.primary()
        if self.peek()[0] == "^":
            _, _, pos = self.take()
            k = self.exponent()
            if base.is_zero_const and k < 0:
                raise ParseError("zero raised to a negative power", pos, self.text)
            return E.power(base, k)
        return base

    def exponent(self) -> int:
        if self.peek()[0] == "(":
            self.take()
            k = self._signed_int()
            self.take(")")
            return k
        sign = 1
        if self.peek()[0] == "-":
            self.take()
            sign = -1
        tok = self.peek()
        if tok[0] != "int":
            raise ParseError("exponent must be an integer literal", tok[2], self.text)
        k = sign * int(self.take()[1])
        if self.peek()[0] == "^":
            self.take()
            k = k ** self.exponent()
            if not isinstance(k, int):
                raise ParseError("exponent tower is not an integer", tok[2], self.text)
        return k

    def _signed_int(self) -> int:
        sign = 1
        if self.peek()[0] == "-":
            self.take()
            sign = -1
        return sign * int(self.take("int")[1])

    def primary(self):
        kind, val, pos = self.peek()
        if kind == "int":
            self.take()
            return E.Const(int(val))
        if kind == "ident":
            self.take()
            if self.peek()[0] == "(":
                if val not in E.FUNCTIONS:
                    raise UnknownIdentifierError(val, pos, self.text)
                self.take()
                arg = self.expr()
                self.take(")")
                return E.func(val, arg)
            if self.symbols is not None and val not in self.symbols:
                raise UnknownIdentifierError(val, pos, self.text)
            if val in E.FUNCTIONS:
                raise ParseError(f"function {val!r} used without argument", pos, self.text)
            return E.Sym(val)
        if kind == "(":
            self.take()
            e = self.expr()
            self.take(")")
            return e
        what = "end of input" if kind == "end" else repr(val)
        raise ParseError(f"unexpected {what}", pos, self.text)


def parse(text: str, symbols: Optional[SymbolTable] = None) -> E.Expr:
    """Parse ``text`` into a canonical expression.

    With ``symbols`` given, every identifier must be registered there.
    """
    return _Parser(text, symbols).parse()
