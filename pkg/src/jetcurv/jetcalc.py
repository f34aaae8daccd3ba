"""Calculus on the first jet manifold J^1(pi).

Coordinates are ``(x^i, y^s, y^s_i)`` ordered as ``x`` block, ``y`` block, then
derivative coordinates with ``s`` major.  All indices are 0-based in Python.

Vector fields, forms (degree 0-2) and vector-valued forms are sparse tables of
:class:`~jetcurv.symcore.Expr` over the coordinate frame.  A 2-form stores its
strictly upper-triangular coefficients ``c[a, b]`` (``a < b``) and means
``sum_{a<b} c[a, b] dz^a ^ dz^b`` with the wedge convention
``(alpha ^ beta)(U, W) = alpha(U) beta(W) - alpha(W) beta(U)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence

from .symcore import ONE, ZERO, Expr, Sym, SymbolTable, all_zero, diff, sum_exprs, sympify
from .symcore.expr import mul


class ContextMismatch(ValueError):
    pass


class DegreeError(ValueError):
    pass


@dataclass(frozen=True)
class JetContext:
    n: int
    m: int
    x_names: tuple
    y_names: tuple
    d_names: tuple  # d_names[s][i] names y^s_i

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be >= 1")
        if len(self.x_names) != self.n or len(self.y_names) != self.m:
            raise ValueError("coordinate names do not match n, m")
        if len(self.d_names) != self.m or any(len(r) != self.n for r in self.d_names):
            raise ValueError("derivative names must form an m x n table")
        names = self.names
        if len(set(names)) != len(names):
            raise ValueError("coordinate names must be distinct")

    @classmethod
    def create(cls, x_names: Sequence[str], y_names: Sequence[str],
               d_names: Optional[Sequence[Sequence[str]]] = None) -> "JetContext":
        if d_names is None:
            d_names = [[f"{y}_{x}" for x in x_names] for y in y_names]
        return cls(len(x_names), len(y_names), tuple(x_names), tuple(y_names),
                   tuple(tuple(r) for r in d_names))

    @classmethod
    def default(cls, n: int, m: int) -> "JetContext":
        xs = [f"x{i + 1}" for i in range(n)]
        ys = [f"y{s + 1}" for s in range(m)]
        ds = [[f"y{s + 1}_{i + 1}" for i in range(n)] for s in range(m)]
        return cls.create(xs, ys, ds)

    @property
    def dim(self) -> int:
        return self.n + self.m + self.n * self.m

    @property
    def names(self) -> List[str]:
        out = list(self.x_names) + list(self.y_names)
        for row in self.d_names:
            out.extend(row)
        return out

    @property
    def symbols(self) -> SymbolTable:
        roles = (["base"] * self.n + ["fibre"] * self.m
                 + ["derivative"] * (self.n * self.m))
        return SymbolTable(self.names, roles)

    # index helpers
    def ix(self, i: int) -> int:
        return i

    def iy(self, s: int) -> int:
        return self.n + s

    def iyd(self, s: int, i: int) -> int:
        return self.n + self.m + s * self.n + i

    def coord(self, a: int) -> Sym:
        return Sym(self.names[a])

    def x(self, i: int) -> Sym:
        return Sym(self.x_names[i])

    def y(self, s: int) -> Sym:
        return Sym(self.y_names[s])

    def yd(self, s: int, i: int) -> Sym:
        return Sym(self.d_names[s][i])

    def split_index(self, a: int):
        """Return ('x', i), ('y', s) or ('yd', s, i) for a frame index."""
        if a < self.n:
            return ("x", a)
        if a < self.n + self.m:
            return ("y", a - self.n)
        s, i = divmod(a - self.n - self.m, self.n)
        return ("yd", s, i)


def _clean(d: dict) -> dict:
    return {k: v for k, v in d.items() if not v.is_zero_const}


def _merge(d1: dict, d2: dict, sign: int = 1) -> dict:
    out = dict(d1)
    for k, v in d2.items():
        if k in out:
            out[k] = out[k] + v if sign > 0 else out[k] - v
        else:
            out[k] = v if sign > 0 else -v
    return _clean(out)


def _check_ctx(a, b):
    if a.ctx != b.ctx:
        raise ContextMismatch("objects live on different jet manifolds")


class VectorField:
    """Sparse vector field ``sum_a comps[a] d/dz^a``."""

    __slots__ = ("ctx", "comps")

    def __init__(self, ctx: JetContext, comps: Optional[Dict[int, Expr]] = None):
        self.ctx = ctx
        self.comps = _clean({a: sympify(v) for a, v in (comps or {}).items()})

    @classmethod
    def coordinate(cls, ctx, a: int) -> "VectorField":
        return cls(ctx, {a: ONE})

    def __getitem__(self, a: int) -> Expr:
        return self.comps.get(a, ZERO)

    def __add__(self, other):
        _check_ctx(self, other)
        return VectorField(self.ctx, _merge(self.comps, other.comps))

    def __sub__(self, other):
        _check_ctx(self, other)
        return VectorField(self.ctx, _merge(self.comps, other.comps, -1))

    def __neg__(self):
        return VectorField(self.ctx, {a: -v for a, v in self.comps.items()})

    def __mul__(self, f):
        f = sympify(f)
        return VectorField(self.ctx, {a: mul(f, v) for a, v in self.comps.items()})

    __rmul__ = __mul__

    def __call__(self, f) -> Expr:
        """Apply as a derivation to the function ``f``."""
        f = sympify(f)
        names = self.ctx.names
        free = f.free_symbols
        return sum_exprs(mul(v, diff(f, names[a])) for a, v in self.comps.items()
                         if names[a] in free)

    def components(self) -> List[Expr]:
        return [self[a] for a in range(self.ctx.dim)]

    def __repr__(self):
        names = self.ctx.names
        body = " + ".join(f"({v})*d/d{names[a]}" for a, v in sorted(self.comps.items()))
        return f"VectorField({body or '0'})"


def lie_bracket(U: VectorField, W: VectorField) -> VectorField:
    """[U, W]^a = U(W^a) - W(U^a)."""
    _check_ctx(U, W)
    out = {}
    for a in set(U.comps) | set(W.comps):
        out[a] = U(W[a]) - W(U[a])
    return VectorField(U.ctx, out)


class DiffForm:
    """Differential form of degree 0, 1 or 2.

    Degree 0 stores ``{(): f}``; degree 1 ``{a: c}``; degree 2 ``{(a, b): c}``
    with ``a < b``.
    """

    __slots__ = ("ctx", "degree", "comps")

    def __init__(self, ctx: JetContext, degree: int, comps: Optional[dict] = None):
        if degree not in (0, 1, 2):
            raise DegreeError(f"forms of degree {degree} are not supported")
        self.ctx = ctx
        self.degree = degree
        comps = {k: sympify(v) for k, v in (comps or {}).items()}
        if degree == 2:
            fixed = {}
            for (a, b), v in comps.items():
                if a == b:
                    continue
                if a > b:
                    a, b, v = b, a, -v
                fixed[(a, b)] = fixed[(a, b)] + v if (a, b) in fixed else v
            comps = fixed
        self.comps = _clean(comps)

    @classmethod
    def function(cls, ctx, f) -> "DiffForm":
        return cls(ctx, 0, {(): sympify(f)})

    @classmethod
    def coordinate(cls, ctx, a: int) -> "DiffForm":
        return cls(ctx, 1, {a: ONE})

    @classmethod
    def zero(cls, ctx, degree: int) -> "DiffForm":
        return cls(ctx, degree)

    @property
    def value(self) -> Expr:
        if self.degree != 0:
            raise DegreeError("value is defined for 0-forms only")
        return self.comps.get((), ZERO)

    def __getitem__(self, key) -> Expr:
        if self.degree == 2:
            a, b = key
            if a == b:
                return ZERO
            if a > b:
                return -self.comps.get((b, a), ZERO)
            return self.comps.get((a, b), ZERO)
        return self.comps.get(key, ZERO)

    def is_structurally_zero(self) -> bool:
        return not self.comps

    def __add__(self, other):
        _check_ctx(self, other)
        if self.degree != other.degree:
            raise DegreeError("cannot add forms of different degree")
        return DiffForm(self.ctx, self.degree, _merge(self.comps, other.comps))

    def __sub__(self, other):
        _check_ctx(self, other)
        if self.degree != other.degree:
            raise DegreeError("cannot subtract forms of different degree")
        return DiffForm(self.ctx, self.degree, _merge(self.comps, other.comps, -1))

    def __neg__(self):
        return DiffForm(self.ctx, self.degree, {k: -v for k, v in self.comps.items()})

    def __mul__(self, f):
        f = sympify(f)
        if f.is_zero_const:
            return DiffForm(self.ctx, self.degree)
        return DiffForm(self.ctx, self.degree, {k: mul(f, v) for k, v in self.comps.items()})

    __rmul__ = __mul__

    def __call__(self, *vectors: VectorField) -> Expr:
        """Evaluate on ``degree`` vector fields."""
        if len(vectors) != self.degree:
            raise DegreeError(f"a {self.degree}-form takes {self.degree} arguments")
        if self.degree == 0:
            return self.value
        if self.degree == 1:
            U, = vectors
            return sum_exprs(mul(c, U[a]) for a, c in self.comps.items() if a in U.comps)
        U, W = vectors
        parts = []
        for (a, b), c in self.comps.items():
            ua, ub, wa, wb = U[a], U[b], W[a], W[b]
            parts.append(mul(c, ua, wb))
            parts.append(mul(-1, c, ub, wa))
        return sum_exprs(parts)

    def components(self) -> List[Expr]:
        return list(self.comps.values())

    def __repr__(self):
        names = self.ctx.names
        if self.degree == 0:
            return f"DiffForm0({self.value})"
        if self.degree == 1:
            body = " + ".join(f"({v})*d{names[a]}" for a, v in sorted(self.comps.items()))
        else:
            body = " + ".join(f"({v})*d{names[a]}^d{names[b]}"
                              for (a, b), v in sorted(self.comps.items()))
        return f"DiffForm{self.degree}({body or '0'})"


def contact_form(ctx: JetContext, s: int) -> DiffForm:
    """omega^s = dy^s - y^s_i dx^i."""
    if not 0 <= s < ctx.m:
        raise IndexError(f"fibre index {s} out of range")
    comps = {ctx.iy(s): ONE}
    for i in range(ctx.n):
        comps[ctx.ix(i)] = -ctx.yd(s, i)
    return DiffForm(ctx, 1, comps)


def wedge(alpha: DiffForm, beta: DiffForm) -> DiffForm:
    _check_ctx(alpha, beta)
    da, db = alpha.degree, beta.degree
    if da + db > 2:
        raise DegreeError("wedge product of degree > 2 is not supported")
    if da == 0:
        return beta * alpha.value
    if db == 0:
        return alpha * beta.value
    acc: Dict[tuple, list] = {}
    for a, ca in alpha.comps.items():
        for b, cb in beta.comps.items():
            if a == b:
                continue
            if a < b:
                acc.setdefault((a, b), []).append(mul(ca, cb))
            else:
                acc.setdefault((b, a), []).append(mul(-1, ca, cb))
    return DiffForm(alpha.ctx, 2, {k: sum_exprs(v) for k, v in acc.items()})


def exterior_d(alpha: DiffForm) -> DiffForm:
    ctx = alpha.ctx
    names = ctx.names
    if alpha.degree == 0:
        f = alpha.value
        free = f.free_symbols
        return DiffForm(ctx, 1, {a: diff(f, nm) for a, nm in enumerate(names) if nm in free})
    if alpha.degree == 1:
        acc: Dict[tuple, list] = {}
        for b, c in alpha.comps.items():
            free = c.free_symbols
            for a, nm in enumerate(names):
                if a == b or nm not in free:
                    continue
                dc = diff(c, nm)
                # d(c dz^b) = dc/dz^a dz^a ^ dz^b
                if a < b:
                    acc.setdefault((a, b), []).append(dc)
                else:
                    acc.setdefault((b, a), []).append(-dc)
        return DiffForm(ctx, 2, {k: sum_exprs(v) for k, v in acc.items()})
    raise DegreeError("exterior derivative of a 2-form (degree 3) is not supported")


def interior(U: VectorField, alpha):
    """Contraction in the first slot; works on forms and vector-valued forms."""
    if isinstance(alpha, VectorValuedForm):
        if alpha.degree == 0:
            raise DegreeError("cannot contract a degree-0 vector-valued form")
        return VectorValuedForm(alpha.ctx, alpha.degree - 1,
                                {b: interior(U, f) for b, f in alpha.comps.items()})
    _check_ctx(U, alpha)
    if alpha.degree == 0:
        raise DegreeError("cannot contract a 0-form")
    if alpha.degree == 1:
        return DiffForm.function(alpha.ctx, alpha(U))
    acc: Dict[int, list] = {}
    for (a, b), c in alpha.comps.items():
        ua, ub = U[a], U[b]
        if not ua.is_zero_const:
            acc.setdefault(b, []).append(mul(ua, c))
        if not ub.is_zero_const:
            acc.setdefault(a, []).append(mul(-1, ub, c))
    return DiffForm(alpha.ctx, 1, {k: sum_exprs(v) for k, v in acc.items()})


def lie_derivative(U: VectorField, alpha: DiffForm) -> DiffForm:
    """L_U alpha (Cartan formula for degree <= 1, coordinate formula for 2)."""
    _check_ctx(U, alpha)
    ctx = alpha.ctx
    if alpha.degree == 0:
        return DiffForm.function(ctx, U(alpha.value))
    if alpha.degree == 1:
        return interior(U, exterior_d(alpha)) + exterior_d(interior(U, alpha))
    names = ctx.names
    # (L_U a)_{ab} = U(a_ab) + a_cb d_a U^c + a_ac d_b U^c
    dU = {(c, a): diff(u, names[a]) for c, u in U.comps.items()
          for a in range(ctx.dim) if names[a] in u.free_symbols}
    acc: Dict[tuple, list] = {}
    for (a, b), v in alpha.comps.items():
        acc.setdefault((a, b), []).append(U(v))
    for (c, e), v in dU.items():
        # contributes through every stored pair containing c
        for (p, q), w in alpha.comps.items():
            if p == c:
                # alpha_{c q} d_e U^c -> component (e, q)
                acc.setdefault((e, q), []).append(mul(w, v))
            elif q == c:
                acc.setdefault((p, e), []).append(mul(w, v))
    return DiffForm(ctx, 2, {k: sum_exprs(vs) for k, vs in acc.items()})


class VectorValuedForm:
    """``sum_b comps[b] (x) d/dz^b`` with ``comps[b]`` a form of fixed degree."""

    __slots__ = ("ctx", "degree", "comps")

    def __init__(self, ctx: JetContext, degree: int, comps: Optional[Dict[int, DiffForm]] = None):
        if degree not in (0, 1, 2):
            raise DegreeError(f"vector-valued forms of degree {degree} are not supported")
        self.ctx = ctx
        self.degree = degree
        out = {}
        for b, f in (comps or {}).items():
            if f.degree != degree:
                raise DegreeError("component degree mismatch")
            if f.comps:
                out[b] = f
        self.comps = out

    @classmethod
    def from_decomposables(cls, ctx, degree: int, pairs: Iterable) -> "VectorValuedForm":
        """Sum of ``form (x) vector_field`` terms."""
        acc: Dict[int, Dict] = {}
        for form, U in pairs:
            if form.degree != degree:
                raise DegreeError("decomposable of wrong degree")
            for b, ub in U.comps.items():
                for k, c in form.comps.items():
                    acc.setdefault(b, {}).setdefault(k, []).append(mul(ub, c))
        return cls(ctx, degree, {b: DiffForm(ctx, degree, {k: sum_exprs(v) for k, v in d.items()})
                                 for b, d in acc.items()})

    @classmethod
    def from_vector_field(cls, U: VectorField) -> "VectorValuedForm":
        return cls(U.ctx, 0, {b: DiffForm.function(U.ctx, c) for b, c in U.comps.items()})

    @classmethod
    def identity(cls, ctx) -> "VectorValuedForm":
        return cls(ctx, 1, {a: DiffForm.coordinate(ctx, a) for a in range(ctx.dim)})

    @classmethod
    def zero(cls, ctx, degree) -> "VectorValuedForm":
        return cls(ctx, degree)

    def form(self, b: int) -> DiffForm:
        return self.comps.get(b) or DiffForm(self.ctx, self.degree)

    def __add__(self, other):
        _check_ctx(self, other)
        if self.degree != other.degree:
            raise DegreeError("cannot add vector-valued forms of different degree")
        out = dict(self.comps)
        for b, f in other.comps.items():
            out[b] = out[b] + f if b in out else f
        return VectorValuedForm(self.ctx, self.degree, out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return VectorValuedForm(self.ctx, self.degree, {b: -f for b, f in self.comps.items()})

    def __mul__(self, f):
        f = sympify(f)
        return VectorValuedForm(self.ctx, self.degree, {b: g * f for b, g in self.comps.items()})

    __rmul__ = __mul__

    def __call__(self, *vectors: VectorField) -> VectorField:
        return VectorField(self.ctx, {b: f(*vectors) for b, f in self.comps.items()})

    def as_vector_field(self) -> VectorField:
        if self.degree != 0:
            raise DegreeError("only degree-0 vector-valued forms are vector fields")
        return VectorField(self.ctx, {b: f.value for b, f in self.comps.items()})

    def components(self) -> List[Expr]:
        out = []
        for f in self.comps.values():
            out.extend(f.comps.values())
        return out

    def coefficient(self, b: int, key) -> Expr:
        return self.form(b)[key]

    def __repr__(self):
        names = self.ctx.names
        body = "; ".join(f"d/d{names[b]}: {f!r}" for b, f in sorted(self.comps.items()))
        return f"VectorValuedForm{self.degree}({body or '0'})"


def lie_derivative_vvf(U: VectorField, A: VectorValuedForm) -> VectorValuedForm:
    """L_U (alpha_b (x) d_b) = L_U alpha_b (x) d_b - alpha_b (x) (d_b U^c) d_c."""
    ctx = A.ctx
    names = ctx.names
    out = VectorValuedForm(ctx, A.degree, {b: lie_derivative(U, f) for b, f in A.comps.items()})
    extra: Dict[int, list] = {}
    for b, f in A.comps.items():
        nb = names[b]
        for c, uc in U.comps.items():
            if nb not in uc.free_symbols:
                continue
            extra.setdefault(c, []).append(f * (-diff(uc, nb)))
    corr = {}
    for c, forms in extra.items():
        acc = forms[0]
        for g in forms[1:]:
            acc = acc + g
        corr[c] = acc
    return out + VectorValuedForm(ctx, A.degree, corr)


def _partial_form(alpha: DiffForm, a: int) -> DiffForm:
    """L along the coordinate field d/dz^a: differentiate every coefficient."""
    nm = alpha.ctx.names[a]
    return DiffForm(alpha.ctx, alpha.degree,
                    {k: diff(v, nm) for k, v in alpha.comps.items() if nm in v.free_symbols})


def _contract_coord(alpha: DiffForm, a: int) -> Optional[DiffForm]:
    """i_{d/dz^a} alpha, or None for a 0-form."""
    if alpha.degree == 0:
        return None
    if alpha.degree == 1:
        return DiffForm.function(alpha.ctx, alpha[a])
    out = {}
    for (p, q), c in alpha.comps.items():
        if p == a:
            out[q] = c
        elif q == a:
            out[p] = -c
    return DiffForm(alpha.ctx, 1, out)


def fn_bracket(A: VectorValuedForm, B: VectorValuedForm) -> VectorValuedForm:
    """Frolicher-Nijenhuis bracket [[A, B]] of vector-valued forms.

    Both arguments are expanded into decomposables ``alpha (x) d/dz^b`` over
    the coordinate frame and each pair is bracketed with

        [[w (x) U, e (x) W]] = w ^ e (x) [U, W] + w ^ L_U e (x) W - L_W w ^ e (x) U
                              + (-1)^deg(w) (dw ^ i_U e (x) W + i_W w ^ de (x) U)

    where ``[U, W] = 0`` for coordinate fields.
    """
    _check_ctx(A, B)
    a, b = A.degree, B.degree
    if a + b > 2:
        raise DegreeError(f"FN bracket of degrees {a}+{b} > 2 is not supported")
    ctx = A.ctx
    sign = -1 if a % 2 else 1
    acc: Dict[int, List[DiffForm]] = {}

    def put(idx, form):
        if form is not None and form.comps:
            acc.setdefault(idx, []).append(form)

    dA = {i: exterior_d(f) for i, f in A.comps.items()} if a <= 1 and b >= 1 else {}
    dB = {e: exterior_d(g) for e, g in B.comps.items()} if b <= 1 and a >= 1 else {}
    for i, alpha in A.comps.items():
        for e, beta in B.comps.items():
            # alpha ^ L_{d_i} beta (x) d_e
            put(e, wedge(alpha, _partial_form(beta, i)))
            # - L_{d_e} alpha ^ beta (x) d_i
            put(i, -wedge(_partial_form(alpha, e), beta))
            if i in dA:
                ib = _contract_coord(beta, i)
                if ib is not None:
                    put(e, wedge(dA[i], ib) * sign)
            if e in dB:
                ia = _contract_coord(alpha, e)
                if ia is not None:
                    put(i, wedge(ia, dB[e]) * sign)
    comps = {}
    for idx, forms in acc.items():
        comps[idx] = _sum_forms(forms)
    return VectorValuedForm(ctx, a + b, comps)


def _sum_forms(forms: List[DiffForm]) -> DiffForm:
    ctx, deg = forms[0].ctx, forms[0].degree
    acc: Dict = {}
    for f in forms:
        for k, v in f.comps.items():
            acc.setdefault(k, []).append(v)
    return DiffForm(ctx, deg, {k: sum_exprs(v) for k, v in acc.items()})


def vvf_compose(A: VectorValuedForm, B: VectorValuedForm) -> VectorValuedForm:
    """Apply the endomorphism ``A`` (degree 1) to the vector part of ``B``."""
    _check_ctx(A, B)
    if A.degree != 1:
        raise DegreeError("the left factor of a composition must have degree 1")
    acc: Dict[int, List[DiffForm]] = {}
    for c, alpha in A.comps.items():
        for b, beta in B.comps.items():
            coef = alpha[b]
            if coef.is_zero_const:
                continue
            acc.setdefault(c, []).append(beta * coef)
    return VectorValuedForm(A.ctx, B.degree, {c: _sum_forms(fs) for c, fs in acc.items()})


def vvf_zero(A: VectorValuedForm, probe_points: int = 8, seed: int = 0x5EED):
    """Zero test across all components of a vector-valued form."""
    return all_zero(A.components(), probe_points, seed)


def vf_zero(U: VectorField, probe_points: int = 8, seed: int = 0x5EED):
    return all_zero(U.comps.values(), probe_points, seed)


def form_zero(alpha: DiffForm, probe_points: int = 8, seed: int = 0x5EED):
    return all_zero(alpha.comps.values(), probe_points, seed)
