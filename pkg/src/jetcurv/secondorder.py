"""Second-order route to the splitting: the pulled-back codistribution psi^s_ij,
the compatibility condition, the D_- frame and the metric-based reduction."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from .connection import (
    Connection, HTable, Slice, SplitFrame, VerificationError, frame_from_coefficients,
    gamma_fields, h_fields, horizontal_coefficients, is_adapted, make_slice,
)
from .jetcalc import DiffForm, JetContext, VectorField, contact_form
from .symcore import ONE, ZERO, Const, Expr, all_zero, diff, is_zero, mul, power, subs, sum_exprs, sympify
from .symcore.zero import DEFAULT_PROBES, DEFAULT_SEED


class CompatibilityError(ValueError):
    """The connection fails the compatibility condition for the given 1-form."""


class ChartError(ValueError):
    """The slice is not in adapted form and no chart change is available."""


class MetricError(ValueError):
    pass


def n_factor(i: int, j: int) -> int:
    """n(ij): 1 on the diagonal, 2 off it."""
    return 1 if i == j else 2


def omega_bar(c: Connection, s: int, i: int) -> DiffForm:
    """dy^s_i - F^s_ik dx^k."""
    ctx = c.ctx
    comps = {ctx.iyd(s, i): ONE}
    for k in range(ctx.n):
        comps[ctx.ix(k)] = -c.F(s, i, k)
    return DiffForm(ctx, 1, comps)


AnnihilatorForms = Dict[Tuple[int, int, int], DiffForm]


def annihilator_forms(c: Connection, s: Slice) -> AnnihilatorForms:
    """psi^s_ij for i <= j, keyed (s, i, j); read (s, j, i) through ``psi_entry``."""
    ctx = c.ctx
    phi = s.phi
    omega = [contact_form(ctx, a) for a in range(ctx.m)]
    obar = {(a, i): omega_bar(c, a, i) for a in range(ctx.m) for i in range(ctx.n)}
    out = {}
    for sg in range(ctx.m):
        for i in range(ctx.n):
            for j in range(i, ctx.n):
                dphi = diff(phi[i], ctx.x_names[j]) + diff(phi[j], ctx.x_names[i])
                f = omega[sg] * (dphi * Fraction(n_factor(i, j), 2))
                F = c.F(sg, i, j)
                for nu in range(ctx.m):
                    coef = sum_exprs(mul(phi[k], diff(F, ctx.d_names[nu][k])) for k in range(ctx.n))
                    f = f - omega[nu] * coef
                f = f + obar[(sg, j)] * phi[i] + obar[(sg, i)] * phi[j]
                out[(sg, i, j)] = f
    return out


def psi_entry(forms: AnnihilatorForms, s: int, i: int, j: int) -> DiffForm:
    return forms[(s, min(i, j), max(i, j))]


# -- compatibility ---------------------------------------------------------


@dataclass
class CompatibilityResult:
    compatible: bool
    witness: List[Tuple[int, int, int, int]]   # failing (sigma, p, q, nu)
    connection: Connection                     # the connection in the chart that was checked
    slice: Slice

    def __bool__(self):
        return self.compatible


def _invert_fraction_matrix(B):
    n = len(B)
    A = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(B)]
    for col in range(n):
        piv = next(r for r in range(col, n) if A[r][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        p = A[col][col]
        A[col] = [x / p for x in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [a - f * b for a, b in zip(A[r], A[col])]
    return [row[n:] for row in A]


def adapt_chart(c: Connection, s: Slice, prefix: str = "X"):
    """Linear change of base coordinates making a constant ``phi`` equal to dx'^1.

    Returns ``(connection, slice, B)`` in the new chart, where ``x' = B x``;
    the new base coordinates are named X1, X2, ... Only constant ``phi`` is
    supported.
    """
    ctx = c.ctx
    n = ctx.n
    if not all(isinstance(p, Const) for p in s.phi):
        raise ChartError("chart adaptation needs constant phi components")
    phi = [p.value for p in s.phi]
    k0 = next(k for k, p in enumerate(phi) if p != 0)
    B = [list(phi)]
    for k in range(n):
        if k != k0:
            B.append([Fraction(int(k == j)) for j in range(n)])
    A = _invert_fraction_matrix(B)        # x = A x'
    new_x = [f"{prefix}{a + 1}" for a in range(n)]
    if set(new_x) & set(ctx.names):
        raise ChartError(f"new coordinate names {new_x} clash with the system's names")
    new_ctx = JetContext.create(new_x, ctx.y_names)
    mapping = {}
    for i in range(n):
        mapping[ctx.x_names[i]] = sum_exprs(mul(Const(A[i][a]), new_ctx.x(a)) for a in range(n))
    for sg in range(ctx.m):
        for i in range(n):
            # y_i = (dx'^a/dx^i) y'_a = B[a][i] y'_a
            mapping[ctx.d_names[sg][i]] = sum_exprs(mul(Const(B[a][i]), new_ctx.yd(sg, a))
                                                    for a in range(n))
    F = {}
    for sg in range(ctx.m):
        for a in range(n):
            for b in range(a, n):
                terms = []
                for i in range(n):
                    for j in range(n):
                        w = A[i][a] * A[j][b]
                        if w:
                            terms.append(mul(Const(w), subs(c.F(sg, i, j), mapping)))
                F[(sg, a, b)] = sum_exprs(terms)
    new_c = Connection(new_ctx, F)
    # v'^a = B[a][i] v^i, with v expressed in the new coordinates
    xmap = {k: v for k, v in mapping.items() if k in ctx.x_names}
    v_new = [sum_exprs(mul(Const(B[a][i]), subs(s.v[i], xmap)) for i in range(n)) for a in range(n)]
    new_s = make_slice(new_ctx, [ONE] + [ZERO] * (n - 1), v_new)
    return new_c, new_s, B


def check_compatibility(c: Connection, s: Slice, adapt: bool = False,
                        probe_points=DEFAULT_PROBES, seed=DEFAULT_SEED) -> CompatibilityResult:
    """Adapted criterion: dF^s_pq/dy^nu_1 = 0 for all p, q >= 2.

    A non-adapted slice is rejected unless ``adapt`` is set, in which case a
    constant ``phi`` is first brought to dx^1 by a linear chart change.
    """
    if not is_adapted(s):
        if not adapt:
            raise ChartError("compatibility is checked in adapted coordinates (phi = dx^1)")
        c, s, _ = adapt_chart(c, s)
    ctx = c.ctx
    witness = []
    for sg in range(ctx.m):
        for p in range(1, ctx.n):
            for q in range(p, ctx.n):
                F = c.F(sg, p, q)
                for nu in range(ctx.m):
                    d = diff(F, ctx.d_names[nu][0])
                    if not is_zero(d, probe_points, seed):
                        witness.append((sg, p, q, nu))
    return CompatibilityResult(not witness, witness, c, s)


def d_minus_coefficients(c: Connection) -> HTable:
    """H^nu_{sk} = 1/2 n(1k) dF^nu_1k/dy^s_1 (adapted coordinates)."""
    ctx = c.ctx
    H = {}
    for nu in range(ctx.m):
        for sg in range(ctx.m):
            for k in range(ctx.n):
                d = diff(c.F(nu, 0, k), ctx.d_names[sg][0])
                H[(nu, sg, k)] = d * Fraction(n_factor(0, k), 2)
    return H


def d_minus_membership(c: Connection, s: Slice, vectors: Sequence[VectorField],
                       probe_points=DEFAULT_PROBES, seed=DEFAULT_SEED):
    """Residual of psi^s_ij(U) = 0 over all (s, i<=j) and the given vectors."""
    forms = annihilator_forms(c, s)
    return all_zero([f(U) for f in forms.values() for U in vectors], probe_points, seed)


def d_minus_frame(c: Connection, s: Slice, verify: bool = True, probe_points=DEFAULT_PROBES,
                  seed=DEFAULT_SEED) -> SplitFrame:
    """Frame built from D_- (needs adapted phi and compatibility)."""
    res = check_compatibility(c, s, probe_points=probe_points, seed=seed)
    if not res:
        raise CompatibilityError(f"incompatible: dF^s_pq/dy^nu_1 != 0 for {res.witness}")
    H = d_minus_coefficients(c)
    if verify:
        vecs = list(h_fields(c.ctx, H)) + list(gamma_fields(c))
        r = d_minus_membership(c, s, vecs, probe_points, seed)
        if not r:
            raise VerificationError(f"D_- frame fields leave the annihilator (residual {r.residual:g})")
    return frame_from_coefficients(c, s, H, verify, probe_points, seed)


# -- metrics ---------------------------------------------------------------


def _det(M) -> Expr:
    n = len(M)
    if n == 1:
        return M[0][0]
    if n == 2:
        return M[0][0] * M[1][1] - M[0][1] * M[1][0]
    terms = []
    for j in range(n):
        if M[0][j].is_zero_const:
            continue
        minor = [[M[r][k] for k in range(n) if k != j] for r in range(1, n)]
        t = mul(M[0][j], _det(minor))
        terms.append(t if j % 2 == 0 else -t)
    return sum_exprs(terms)


def adjugate_inverse(M) -> List[List[Expr]]:
    """Inverse by cofactors; intended for n <= 4."""
    n = len(M)
    if n > 4:
        raise MetricError("symbolic inverse is limited to n <= 4; supply the inverse")
    if all(M[i][j].is_zero_const for i in range(n) for j in range(n) if i != j):
        return [[power(M[i][i], -1) if i == j else ZERO for j in range(n)] for i in range(n)]
    det = _det(M)
    if det.is_zero_const:
        raise MetricError("metric is singular")
    inv_det = power(det, -1)
    out = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[M[r][k] for k in range(n) if k != j] for r in range(n) if r != i]
            cof = _det(minor) if n > 1 else ONE
            if (i + j) % 2:
                cof = -cof
            out[j][i] = mul(cof, inv_det)
    return out


@dataclass
class BaseMetric:
    """Symmetric metric g_ij on a coordinate patch, with its inverse g^ij."""

    names: Tuple[str, ...]
    g: List[List[Expr]]
    inverse: List[List[Expr]]

    @classmethod
    def create(cls, names: Sequence[str], g, inverse=None, check: bool = True,
               probe_points=DEFAULT_PROBES, seed=DEFAULT_SEED) -> "BaseMetric":
        names = tuple(names)
        n = len(names)
        g = [[sympify(g[i][j]) for j in range(n)] for i in range(n)]
        allowed = set(names)
        for i in range(n):
            for j in range(n):
                extra = g[i][j].free_symbols - allowed
                if extra:
                    raise MetricError(f"g[{i + 1}][{j + 1}] depends on {sorted(extra)}")
        if check:
            r = all_zero([g[i][j] - g[j][i] for i in range(n) for j in range(i + 1, n)],
                         probe_points, seed)
            if not r:
                raise MetricError("metric is not symmetric")
        if inverse is None:
            inverse = adjugate_inverse(g)
        else:
            inverse = [[sympify(inverse[i][j]) for j in range(n)] for i in range(n)]
        out = cls(names, g, inverse)
        if check:
            r = all_zero(out.identity_residuals(), probe_points, seed)
            if not r:
                raise MetricError(f"g times its inverse is not the identity (residual {r.residual:g})")
        return out

    @property
    def n(self) -> int:
        return len(self.names)

    def identity_residuals(self) -> List[Expr]:
        n = self.n
        out = []
        for i in range(n):
            for j in range(n):
                val = sum_exprs(mul(self.g[i][k], self.inverse[k][j]) for k in range(n))
                out.append(val - ONE if i == j else val)
        return out

    def sharp(self, phi: Sequence) -> List[Expr]:
        """v^i = g^ij phi_j."""
        n = self.n
        return [sum_exprs(mul(self.inverse[i][j], sympify(phi[j])) for j in range(n)) for i in range(n)]

    def co_norm(self, phi: Sequence) -> Expr:
        return sum_exprs(mul(sympify(phi[i]), c) for i, c in enumerate(self.sharp(phi)))


def metric_slice(ctx: JetContext, phi: Sequence, g: BaseMetric,
                 probe_points=DEFAULT_PROBES, seed=DEFAULT_SEED) -> Slice:
    """The slice (phi, g#(phi)) after checking the normalization g^-1(phi, phi) = 1."""
    if tuple(ctx.x_names) != g.names:
        raise MetricError("metric coordinates differ from the base coordinates")
    r = is_zero(g.co_norm(phi) - ONE, probe_points, seed)
    if not r:
        raise MetricError("metric is not normalized: g^ij phi_i phi_j != 1")
    return make_slice(ctx, phi, g.sharp(phi), probe_points=probe_points, seed=seed)


def metric_coefficients(c: Connection, g: BaseMetric) -> HTable:
    """Adapted-coordinate H from the metric:
    H^nu_s1 = 1/2 (dF^nu_11 - g^1p g^1q dF^nu_pq), H^nu_sq = dF^nu_1q + g^1p dF^nu_pq,
    derivatives taken along y^s_1."""
    ctx = c.ctx
    n = ctx.n
    gi = g.inverse
    H = {}
    for nu in range(ctx.m):
        for sg in range(ctx.m):
            y1 = ctx.d_names[sg][0]
            dF = {(p, q): diff(c.F(nu, p, q), y1) for p in range(n) for q in range(n)}
            corr = sum_exprs(mul(gi[0][p], gi[0][q], dF[(p, q)])
                             for p in range(1, n) for q in range(1, n))
            H[(nu, sg, 0)] = (dF[(0, 0)] - corr) * Fraction(1, 2)
            for q in range(1, n):
                H[(nu, sg, q)] = dF[(0, q)] + sum_exprs(mul(gi[0][p], dF[(p, q)]) for p in range(1, n))
    return H


def metric_annihilators(c: Connection, g: BaseMetric) -> Dict[Tuple[int, int], DiffForm]:
    """Combinations of psi^s_ij cutting out the metric splitting (adapted chart):
    psi^s_1 = psi^s_11 - g^1p g^1q psi^s_pq,  psi^s_p = psi^s_1p + g^1q psi^s_pq."""
    ctx = c.ctx
    n = ctx.n
    s = make_slice(ctx, [ONE] + [ZERO] * (n - 1), g.sharp([ONE] + [ZERO] * (n - 1)))
    forms = annihilator_forms(c, s)
    gi = g.inverse
    out = {}
    for sg in range(ctx.m):
        f = psi_entry(forms, sg, 0, 0)
        for p in range(1, n):
            for q in range(1, n):
                f = f - psi_entry(forms, sg, p, q) * mul(gi[0][p], gi[0][q])
        out[(sg, 0)] = f
        for p in range(1, n):
            f = psi_entry(forms, sg, 0, p)
            for q in range(1, n):
                f = f + psi_entry(forms, sg, p, q) * gi[0][q]
            out[(sg, p)] = f
    return out


def metric_reduction(c: Connection, s: Slice, g: BaseMetric, verify: bool = True,
                     probe_points=DEFAULT_PROBES, seed=DEFAULT_SEED) -> SplitFrame:
    """Frame of the metric splitting, with v = g#(phi).

    In adapted coordinates the H coefficients come from the metric display and
    are checked against the first-order coefficients for v = g#(phi); for other
    charts the first-order formula with v = g#(phi) is used directly.
    """
    ctx = c.ctx
    ms = metric_slice(ctx, s.phi, g, probe_points, seed)
    if is_adapted(ms):
        H = metric_coefficients(c, g)
        if verify:
            ref = horizontal_coefficients(c, ms)
            r = all_zero([H[k] - ref[k] for k in H], probe_points, seed)
            if not r:
                raise VerificationError(f"metric H differs from the first-order H (residual {r.residual:g})")
    else:
        H = horizontal_coefficients(c, ms)
    return frame_from_coefficients(c, ms, H, verify, probe_points, seed)
