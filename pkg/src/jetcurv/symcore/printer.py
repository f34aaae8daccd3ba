"""Render canonical expressions in the input grammar (parse(print(e)) == e)."""

from __future__ import annotations

from .expr import Const, Expr, Func, Pow, Sym


def _atom_str(b: Expr) -> str:
    if isinstance(b, Sym):
        return b.name
    if isinstance(b, Func):
        return f"{b.name}({to_string(b.arg)})"
    return f"({to_string(b)})"


def _factor_str(b: Expr, k: int) -> str:
    s = _atom_str(b)
    return s if k == 1 else f"{s}^{k}"


def _term_str(mono, c):
    """Return (negative, body) for one monomial term."""
    neg = c < 0
    c = abs(c)
    num = [_factor_str(b, k) for b, k in mono if k > 0]
    den = [_factor_str(b, -k) for b, k in mono if k < 0]
    if c.numerator != 1 or not num:
        num.insert(0, str(c.numerator))
    if c.denominator != 1:
        den.insert(0, str(c.denominator))
    body = "*".join(num)
    if den:
        body += "/" + (den[0] if len(den) == 1 else "(" + "*".join(den) + ")")
    return neg, body


def to_string(e: Expr) -> str:
    if isinstance(e, Const):
        v = e.value
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(e, (Sym, Func)):
        return _atom_str(e)
    if isinstance(e, Pow) and e.exp > 0:
        return _factor_str(e.base, e.exp)
    out = []
    for i, (m, c) in enumerate(e.terms().items()):
        neg, body = _term_str(m, c)
        if i == 0:
            out.append("-" + body if neg else body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)
