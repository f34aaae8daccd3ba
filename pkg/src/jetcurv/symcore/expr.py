"""Immutable expression trees kept in a canonical expanded form.

Every public constructor returns a canonical expression: an expanded Laurent
polynomial with exact rational coefficients over *atoms*.  Atoms are symbols,
function applications, and sums raised to negative integer powers (positive
powers of sums are always multiplied out).  Two expressions that are
structurally equal are therefore mathematically equal; the converse holds for
polynomial and Laurent-polynomial input, which covers most of what the jet
calculus produces.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Tuple

FUNCTIONS = ("sin", "cos", "exp", "ln", "sqrt")

# a monomial is a tuple of (base, exponent) pairs sorted by base key
Mono = Tuple[Tuple["Expr", int], ...]


class EvalError(ArithmeticError):
    """Numeric evaluation failed (missing symbol or domain error)."""


class MissingSymbolError(EvalError, KeyError):
    pass


class DomainError(EvalError):
    def __init__(self, message, subexpr=None):
        super().__init__(message)
        self.subexpr = subexpr


class Expr:
    __slots__ = ("_key", "_hash", "_free")

    # rank used as the first element of the sort key
    _rank = 99

    def __init__(self):
        self._key = None
        self._hash = None
        self._free = None

    # -- identity ---------------------------------------------------------
    @property
    def key(self):
        if self._key is None:
            self._key = self._make_key()
        return self._key

    def _make_key(self):
        raise NotImplementedError

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key)
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr):
            if isinstance(other, (int, Fraction)):
                return isinstance(self, Const) and self.value == other
            return NotImplemented
        return hash(self) == hash(other) and self.key == other.key

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __lt__(self, other):
        return self.key < other.key

    @property
    def free_symbols(self) -> frozenset:
        if self._free is None:
            self._free = self._make_free()
        return self._free

    def _make_free(self):
        return frozenset()

    @property
    def is_zero_const(self):
        return False

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, mul(-1, other))

    def __rsub__(self, other):
        return add(other, mul(-1, self))

    def __neg__(self):
        return mul(-1, self)

    def __pos__(self):
        return self

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return mul(self, power(other, -1))

    def __rtruediv__(self, other):
        return mul(other, power(self, -1))

    def __pow__(self, k):
        if isinstance(k, Const) and k.value.denominator == 1:
            k = k.value.numerator
        if not isinstance(k, int):
            raise TypeError("only integer exponents are supported")
        return power(self, k)

    def __str__(self):
        from .printer import to_string

        return to_string(self)

    def __repr__(self):
        return f"Expr({str(self)!r})"

    # -- canonical term view ---------------------------------------------
    def terms(self) -> Dict[Mono, Fraction]:
        """Return the canonical ``{monomial: coefficient}`` view."""
        raise NotImplementedError

    @property
    def args(self) -> tuple:
        return ()


class Const(Expr):
    __slots__ = ("value",)
    _rank = 0

    def __init__(self, value):
        super().__init__()
        self.value = Fraction(value)

    def _make_key(self):
        return (0, self.value)

    def terms(self):
        return {} if self.value == 0 else {(): self.value}

    @property
    def is_zero_const(self):
        return self.value == 0


class Sym(Expr):
    __slots__ = ("name",)
    _rank = 1

    def __init__(self, name: str):
        super().__init__()
        self.name = name

    def _make_key(self):
        return (1, self.name)

    def _make_free(self):
        return frozenset((self.name,))

    def terms(self):
        return {((self, 1),): Fraction(1)}


class Func(Expr):
    __slots__ = ("name", "arg")
    _rank = 2

    def __init__(self, name: str, arg: Expr):
        super().__init__()
        if name not in FUNCTIONS:
            raise ValueError(f"unknown function {name!r}")
        self.name = name
        self.arg = arg

    def _make_key(self):
        return (2, self.name, self.arg.key)

    def _make_free(self):
        return self.arg.free_symbols

    def terms(self):
        return {((self, 1),): Fraction(1)}

    @property
    def args(self):
        return (self.arg,)


class Pow(Expr):
    """``base**exp`` with an atom base (sums only with negative exponent)."""

    __slots__ = ("base", "exp")
    _rank = 5

    def __init__(self, base: Expr, exp: int):
        super().__init__()
        self.base = base
        self.exp = exp

    def _make_key(self):
        return (5, self.base.key, self.exp)

    def _make_free(self):
        return self.base.free_symbols

    def terms(self):
        return {((self.base, self.exp),): Fraction(1)}

    @property
    def args(self):
        return (self.base, Const(self.exp))


class Mul(Expr):
    __slots__ = ("coeff", "mono")
    _rank = 6

    def __init__(self, coeff: Fraction, mono: Mono):
        super().__init__()
        self.coeff = coeff
        self.mono = mono

    def _make_key(self):
        return (6, _mono_key(self.mono), self.coeff)

    def _make_free(self):
        return frozenset().union(*(b.free_symbols for b, _ in self.mono))

    def terms(self):
        return {self.mono: self.coeff}

    @property
    def args(self):
        out = [] if self.coeff == 1 else [Const(self.coeff)]
        out.extend(_factor_expr(b, k) for b, k in self.mono)
        return tuple(out)


class Add(Expr):
    __slots__ = ("_terms",)
    _rank = 7

    def __init__(self, terms: Dict[Mono, Fraction]):
        # caller guarantees: >= 2 terms, sorted, no zero coefficients
        super().__init__()
        self._terms = terms

    def _make_key(self):
        return (7, tuple((_mono_key(m), c) for m, c in self._terms.items()))

    def _make_free(self):
        out = set()
        for m in self._terms:
            for b, _ in m:
                out |= b.free_symbols
        return frozenset(out)

    def terms(self):
        return self._terms

    @property
    def args(self):
        return tuple(_term_expr(m, c) for m, c in self._terms.items())


ZERO = Const(0)
ONE = Const(1)


def _mono_key(mono: Mono):
    return tuple((b.key, k) for b, k in mono)


def _factor_expr(b: Expr, k: int) -> Expr:
    return b if k == 1 else Pow(b, k)


def _term_expr(mono: Mono, c: Fraction) -> Expr:
    if not mono:
        return Const(c)
    if c == 1 and len(mono) == 1:
        return _factor_expr(*mono[0])
    return Mul(c, mono)


def sympify(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return Const(x)
    if isinstance(x, str):
        return Sym(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Expr")


def symbol(name: str) -> Sym:
    return Sym(name)


# -- canonical construction ---------------------------------------------


def _sort_mono(d: Dict[Expr, int]) -> Mono:
    items = [(b, k) for b, k in d.items() if k != 0]
    if len(items) > 1:
        items.sort(key=lambda bk: bk[0].key)
    return tuple(items)


def _needs_fixup(b: Expr, k: int) -> bool:
    # sums may only carry negative exponents; sqrt exponents are kept in {-1, 1}
    if isinstance(b, Add):
        return k > 0
    if isinstance(b, Func) and b.name == "sqrt":
        return abs(k) >= 2
    return False


def from_terms(terms: Dict[Mono, Fraction]) -> Expr:
    """Build the canonical expression for a term dictionary."""
    terms = {m: c for m, c in terms.items() if c != 0}
    if any(_needs_fixup(b, k) for m in terms for b, k in m):
        return _fixup(terms)
    terms = _cancel_sum_denominators(terms)
    if not terms:
        return ZERO
    if len(terms) == 1:
        (m, c), = terms.items()
        return _term_expr(m, c)
    items = sorted(terms.items(), key=lambda mc: _mono_key(mc[0]))
    return Add(dict(items))


def _fixup(terms):
    plain: Dict[Mono, Fraction] = {}
    extra = []
    for m, c in terms.items():
        if not any(_needs_fixup(b, k) for b, k in m):
            plain[m] = plain.get(m, 0) + c
            continue
        rest = {}
        factors = []
        for b, k in m:
            if isinstance(b, Add) and k > 0:
                factors.append(_expand_power(b, k))
            elif isinstance(b, Func) and b.name == "sqrt" and abs(k) >= 2:
                q, r = divmod(k, 2)
                factors.append(power(b.arg, q))
                if r:
                    rest[b] = rest.get(b, 0) + r
            else:
                rest[b] = rest.get(b, 0) + k
        e = from_terms({_sort_mono(rest): c})
        for f in factors:
            e = mul(e, f)
        extra.append(e)
    out = dict(plain)
    for e in extra:
        for m, c in e.terms().items():
            out[m] = out.get(m, 0) + c
    return from_terms(out)


def _split_den(m: Mono):
    # sums have the highest sort rank, so their factors form a suffix
    i = len(m)
    while i and isinstance(m[i - 1][0], Add):
        i -= 1
    return m[:i], m[i:]


def _cancel_sum_denominators(terms):
    """Cancel ``(a + b) * (a + b)**-k`` hidden by expansion.

    Terms sharing the same negative sum powers are grouped; when a group's
    cofactor is a constant multiple of one of those sums the exponent is
    raised by one.  No polynomial GCDs are attempted.
    """
    sizes: Dict[Mono, int] = {}
    for m in terms:
        if m and isinstance(m[-1][0], Add):
            den = _split_den(m)[1]
            sizes[den] = sizes.get(den, 0) + 1
    candidates = {den for den, size in sizes.items()
                  if size >= 2 and any(len(b._terms) == size for b, _ in den)}
    if not candidates:
        return terms
    groups: Dict[Mono, Dict[Mono, Fraction]] = {den: {} for den in candidates}
    for m, c in terms.items():
        if m and isinstance(m[-1][0], Add):
            rest, den = _split_den(m)
            if den in groups:
                groups[den][rest] = c
    out = None
    for den, cof in groups.items():
        hit = None
        for s, _k in den:
            st = s._terms
            if len(st) != len(cof):
                continue
            ratio = None
            for sm, sc in st.items():
                cc = cof.get(sm)
                if cc is None:
                    break
                r = cc / sc
                if ratio is None:
                    ratio = r
                elif r != ratio:
                    break
            else:
                hit = (s, ratio)
                break
        if hit is None:
            continue
        if out is None:
            out = dict(terms)
        for rest in cof:
            del out[rest + den]
        s, ratio = hit
        d = dict(den)
        d[s] += 1
        m = _sort_mono(d)
        out[m] = out.get(m, 0) + ratio
    if out is None:
        return terms
    return {m: c for m, c in out.items() if c != 0}


def _as_expr(x) -> Expr:
    return x if isinstance(x, Expr) else sympify(x)


def add(*xs) -> Expr:
    return sum_exprs(xs)


def sum_exprs(xs: Iterable) -> Expr:
    acc: Dict[Mono, Fraction] = {}
    n = 0
    last = ZERO
    for x in xs:
        x = _as_expr(x)
        if x.is_zero_const:
            continue
        n += 1
        last = x
        for m, c in x.terms().items():
            v = acc.get(m)
            acc[m] = c if v is None else v + c
    if n == 1:
        return last
    if n == 0:
        return ZERO
    return from_terms(acc)


def _mul_mono(m1: Mono, m2: Mono) -> Mono:
    if not m1:
        return m2
    if not m2:
        return m1
    d = dict(m1)
    for b, k in m2:
        d[b] = d.get(b, 0) + k
    return _sort_mono(d)


def _mul_by_sum(s: Add, other: Dict[Mono, Fraction]):
    """Multiply the sum ``s`` into ``other``, absorbing into ``s**-k`` factors."""
    out: Dict[Mono, Fraction] = {}
    st = s._terms
    for m, c in other.items():
        absorbed = False
        for b, k in m:
            if k < 0 and b == s:
                d = dict(m)
                d[b] = k + 1
                nm = _sort_mono(d)
                out[nm] = out.get(nm, 0) + c
                absorbed = True
                break
        if absorbed:
            continue
        for sm, sc in st.items():
            nm = _mul_mono(m, sm)
            out[nm] = out.get(nm, 0) + c * sc
    return out


def mul(*xs) -> Expr:
    result = ONE
    for x in xs:
        result = _mul2(result, _as_expr(x))
        if result.is_zero_const:
            return ZERO
    return result


def _mul2(a: Expr, b: Expr) -> Expr:
    if a.is_zero_const or b.is_zero_const:
        return ZERO
    if isinstance(a, Const):
        if a.value == 1:
            return b
        if isinstance(b, Const):
            return Const(a.value * b.value)
        return from_terms({m: c * a.value for m, c in b.terms().items()})
    if isinstance(b, Const):
        return _mul2(b, a)
    if isinstance(a, Add):
        return from_terms(_mul_by_sum(a, b.terms()))
    if isinstance(b, Add):
        return from_terms(_mul_by_sum(b, a.terms()))
    (m1, c1), = a.terms().items()
    (m2, c2), = b.terms().items()
    return from_terms({_mul_mono(m1, m2): c1 * c2})


def _expand_power(s: Expr, k: int) -> Expr:
    result = ONE
    base = s
    while k:
        if k & 1:
            result = _mul2(result, base)
        k >>= 1
        if k:
            base = _mul2(base, base)
    return result


def power(x, k: int) -> Expr:
    x = _as_expr(x)
    if k == 0:
        return ONE
    if k == 1:
        return x
    if isinstance(x, Const):
        if x.value == 0 and k < 0:
            raise ZeroDivisionError("0 raised to a negative power")
        return Const(x.value ** k)
    if isinstance(x, Add):
        if k > 0:
            return _expand_power(x, k)
        # normalize so the leading coefficient is 1: (c*s)**k = c**k * s**k
        (m0, c0) = next(iter(x._terms.items()))
        if c0 != 1:
            s = from_terms({m: c / c0 for m, c in x._terms.items()})
            return from_terms({((s, k),): c0 ** k})
        return from_terms({((x, k),): Fraction(1)})
    (m, c), = x.terms().items()
    if c == 0:
        raise ZeroDivisionError
    d: Dict[Expr, int] = {}
    for b, e in m:
        d[b] = e * k
    return from_terms({_sort_mono(d): c ** k})


def func(name: str, arg) -> Expr:
    arg = _as_expr(arg)
    if isinstance(arg, Const):
        v = arg.value
        if name == "sin" and v == 0:
            return ZERO
        if name == "cos" and v == 0:
            return ONE
        if name == "exp" and v == 0:
            return ONE
        if name == "ln" and v == 1:
            return ZERO
        if name == "sqrt" and v >= 0:
            rn, rd = math.isqrt(v.numerator), math.isqrt(v.denominator)
            if rn * rn == v.numerator and rd * rd == v.denominator:
                return Const(Fraction(rn, rd))
    if name not in FUNCTIONS:
        raise ValueError(f"unknown function {name!r}")
    return Func(name, arg)


def sin(x):
    return func("sin", x)


def cos(x):
    return func("cos", x)


def exp(x):
    return func("exp", x)


def ln(x):
    return func("ln", x)


def sqrt(x):
    return func("sqrt", x)


# -- calculus and evaluation ---------------------------------------------


def _diff_atom(b: Expr, s: str, memo) -> Expr:
    if isinstance(b, Sym):
        return ONE if b.name == s else ZERO
    if isinstance(b, Func):
        da = diff(b.arg, s, memo)
        if da.is_zero_const:
            return ZERO
        a = b.arg
        if b.name == "sin":
            outer = func("cos", a)
        elif b.name == "cos":
            outer = mul(-1, func("sin", a))
        elif b.name == "exp":
            outer = b
        elif b.name == "ln":
            outer = power(a, -1)
        else:  # sqrt
            outer = mul(Fraction(1, 2), power(b, -1))
        return mul(outer, da)
    if isinstance(b, Add):
        return diff(b, s, memo)
    raise TypeError(f"unexpected atom {b!r}")


def diff(e, s, memo=None) -> Expr:
    """Exact partial derivative of ``e`` with respect to the symbol ``s``."""
    e = _as_expr(e)
    if isinstance(s, Sym):
        s = s.name
    if s not in e.free_symbols:
        return ZERO
    if memo is None:
        memo = {}
    hit = memo.get(e)
    if hit is not None:
        return hit
    if isinstance(e, Sym):
        return ONE
    parts = []
    for m, c in e.terms().items():
        for idx, (b, k) in enumerate(m):
            if s not in b.free_symbols:
                continue
            db = _diff_atom(b, s, memo)
            if db.is_zero_const:
                continue
            d = dict(m)
            d[b] = k - 1
            rest = from_terms({_sort_mono(d): c * k})
            parts.append(mul(rest, db))
    out = sum_exprs(parts)
    memo[e] = out
    return out


def _eval_atom(b: Expr, point: Mapping[str, float], memo) -> float:
    if isinstance(b, Sym):
        try:
            return float(point[b.name])
        except KeyError:
            raise MissingSymbolError(f"no value for symbol {b.name!r}") from None
    if isinstance(b, Func):
        a = evaluate(b.arg, point, memo)
        if b.name == "sin":
            return math.sin(a)
        if b.name == "cos":
            return math.cos(a)
        if b.name == "exp":
            return math.exp(a)
        if b.name == "ln":
            if a <= 0:
                raise DomainError(f"ln of non-positive value {a:g} in {b}", b)
            return math.log(a)
        if a < 0:
            raise DomainError(f"sqrt of negative value {a:g} in {b}", b)
        return math.sqrt(a)
    return evaluate(b, point, memo)


def evaluate(e, point: Mapping[str, float], memo=None) -> float:
    """IEEE double evaluation of ``e`` at ``point`` (symbol name -> float)."""
    e = _as_expr(e)
    if isinstance(e, Const):
        return float(e.value)
    if memo is None:
        memo = {}
    hit = memo.get(e)
    if hit is not None:
        return hit
    total = 0.0
    for m, c in e.terms().items():
        t = float(c)
        for b, k in m:
            v = _eval_atom(b, point, memo)
            if k < 0 and v == 0.0:
                raise DomainError(f"division by zero in {_factor_expr(b, k)}", b)
            t *= v ** k
        total += t
    memo[e] = total
    return total


def term_values(e, point: Mapping[str, float]) -> list:
    """Values of the individual monomials of ``e`` at ``point``."""
    e = _as_expr(e)
    memo: dict = {}
    out = []
    for m, c in e.terms().items():
        t = float(c)
        for b, k in m:
            v = _eval_atom(b, point, memo)
            if k < 0 and v == 0.0:
                raise DomainError(f"division by zero in {_factor_expr(b, k)}", b)
            t *= v ** k
        out.append(t)
    return out


def denominators(e) -> list:
    """All atoms appearing with a negative exponent, searched recursively."""
    e = _as_expr(e)
    out: dict = {}

    def walk(x):
        for m in x.terms():
            for b, k in m:
                if k < 0:
                    out[b] = None
                if isinstance(b, Func):
                    if b.name in ("ln", "sqrt"):
                        out[b.arg] = None
                    walk(b.arg)
                elif isinstance(b, Add):
                    walk(b)

    walk(e)
    return list(out)


def subs(e, mapping: Mapping[str, Expr]) -> Expr:
    """Substitute expressions for symbols (by name)."""
    e = _as_expr(e)
    mapping = {(k.name if isinstance(k, Sym) else k): _as_expr(v) for k, v in mapping.items()}
    if not (e.free_symbols & mapping.keys()):
        return e
    memo: dict = {}

    def atom(b):
        if isinstance(b, Sym):
            return mapping.get(b.name, b)
        if isinstance(b, Func):
            return func(b.name, rec(b.arg))
        return rec(b)

    def rec(x):
        if not (x.free_symbols & mapping.keys()):
            return x
        hit = memo.get(x)
        if hit is not None:
            return hit
        parts = []
        for m, c in x.terms().items():
            t = Const(c)
            for b, k in m:
                t = mul(t, power(atom(b), k))
            parts.append(t)
        out = sum_exprs(parts)
        memo[x] = out
        return out

    return rec(e)


def simplify(e) -> Expr:
    """Rebuild ``e`` bottom-up through the canonical constructors.

    Expressions built by this module are already canonical, so this is the
    identity on them; it matters for trees assembled by hand from the node
    classes.
    """
    e = _as_expr(e)
    if isinstance(e, (Const, Sym)):
        return e
    if isinstance(e, Func):
        return func(e.name, simplify(e.arg))
    if isinstance(e, Pow):
        return power(simplify(e.base), e.exp)
    if isinstance(e, Mul):
        out = Const(e.coeff)
        for b, k in e.mono:
            out = mul(out, power(simplify(b), k))
        return out
    return sum_exprs(simplify(t) for t in e.args)
