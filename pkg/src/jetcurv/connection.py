"""Second-order connections, slices (phi, v) and the induced splittings of TJ^1.

Given a closed 1-form ``phi`` and a vector field ``v`` on the base with
``i_v phi = 1``, the deformation ``L_{Gamma_v} S1_phi`` has eigenvalues
-1, 0, +1.  The -1 eigenfields are ``H_s = d/dy^s + H[n, s, k] d/dy^n_k`` with
(general coordinates)

    A[n, s, k] = v^i (phi_j dF^n_ik/dy^s_j - delta^n_s dphi_k/dx^i)
    H[n, s, k] = A[n, s, k] - 1/2 phi_k v^l A[n, s, l]

which reduces to the usual adapted-chart formulas when ``phi = dx^1``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .jetcalc import (
    DiffForm, JetContext, VectorField, VectorValuedForm, contact_form, fn_bracket, interior,
    lie_derivative_vvf, vvf_compose,
)
from .symcore import ONE, ZERO, Expr, all_zero, diff, evaluate, is_zero, sum_exprs, sympify
from .symcore.expr import mul, power
from .symcore.zero import DEFAULT_PROBES, DEFAULT_SEED, sample_point


class SliceError(ValueError):
    pass


class VerificationError(RuntimeError):
    """An identity that must hold by construction failed."""


class Connection:
    """Symmetric table ``F[s, i, j]`` of a system ``y^s_ij = F^s_ij(x, y, y_k)``."""

    def __init__(self, ctx: JetContext, F: Optional[Dict[Tuple[int, int, int], Expr]] = None):
        self.ctx = ctx
        self._F: Dict[Tuple[int, int, int], Expr] = {}
        for (s, i, j), v in (F or {}).items():
            if not (0 <= s < ctx.m and 0 <= i < ctx.n and 0 <= j < ctx.n):
                raise IndexError(f"F index {(s, i, j)} out of range")
            key = (s, min(i, j), max(i, j))
            v = sympify(v)
            if key in self._F and self._F[key] != v:
                raise ValueError(f"conflicting entries for F{key}")
            self._F[key] = v
        allowed = set(ctx.names)
        for key, v in self._F.items():
            extra = v.free_symbols - allowed
            if extra:
                raise ValueError(f"F{key} uses unknown symbols {sorted(extra)}")

    def F(self, s: int, i: int, j: int) -> Expr:
        return self._F.get((s, min(i, j), max(i, j)), ZERO)

    @property
    def entries(self) -> Dict[Tuple[int, int, int], Expr]:
        return dict(self._F)

    def __repr__(self):
        return f"Connection(n={self.ctx.n}, m={self.ctx.m}, entries={len(self._F)})"


def free_connection(ctx: JetContext) -> Connection:
    return Connection(ctx, {})


@dataclass(frozen=True)
class Slice:
    phi: tuple  # phi_i(x)
    v: tuple    # v^i(x)
    normalized: bool = False

    def pairing(self) -> Expr:
        return sum_exprs(mul(a, b) for a, b in zip(self.phi, self.v))


def make_slice(ctx: JetContext, phi: Sequence, v: Sequence, normalize: bool = True,
               probe_points: int = DEFAULT_PROBES, seed: int = DEFAULT_SEED) -> Slice:
    """Validate ``(phi, v)`` and (by default) rescale ``v`` so that ``i_v phi = 1``."""
    phi = tuple(sympify(p) for p in phi)
    v = tuple(sympify(c) for c in v)
    if len(phi) != ctx.n or len(v) != ctx.n:
        raise SliceError(f"phi and v need {ctx.n} components")
    base = set(ctx.x_names)
    for name, comps in (("phi", phi), ("v", v)):
        for c in comps:
            bad = c.free_symbols - base
            if bad:
                raise SliceError(f"{name} may depend on base coordinates only, found {sorted(bad)}")
    for i in range(ctx.n):
        for j in range(i + 1, ctx.n):
            r = is_zero(diff(phi[i], ctx.x_names[j]) - diff(phi[j], ctx.x_names[i]),
                        probe_points, seed)
            if not r:
                raise SliceError(f"phi is not closed (d phi_{i + 1}/dx^{j + 1} != d phi_{j + 1}/dx^{i + 1})")
    s = Slice(phi, v)
    ivphi = s.pairing()
    if ivphi.is_zero_const:
        raise SliceError("i_v phi vanishes identically")
    rng = random.Random(seed)
    for _ in range(probe_points):
        p = sample_point(ctx.x_names, rng, [ivphi])
        if abs(evaluate(ivphi, p)) < 1e-9:
            raise SliceError("i_v phi vanishes at a probe point")
    if not normalize:
        return Slice(phi, v, is_zero(ivphi - 1, probe_points, seed).value)
    if ivphi == ONE:
        return Slice(phi, v, True)
    inv = power(ivphi, -1)
    return Slice(phi, tuple(mul(c, inv) for c in v), True)


def adapted_slice(ctx: JetContext, v: Optional[Sequence] = None) -> Slice:
    """``phi = dx^1`` with ``v`` (default ``d/dx^1``); ``v^1`` must be 1."""
    phi = [ONE] + [ZERO] * (ctx.n - 1)
    if v is None:
        v = [ONE] + [ZERO] * (ctx.n - 1)
    return make_slice(ctx, phi, v)


def is_adapted(s: Slice) -> bool:
    return s.phi[0] == ONE and all(p.is_zero_const for p in s.phi[1:])


def gamma_fields(c: Connection) -> List[VectorField]:
    """Gamma_i = d/dx^i + y^s_i d/dy^s + F^s_ij d/dy^s_j."""
    ctx = c.ctx
    out = []
    for i in range(ctx.n):
        comps = {ctx.ix(i): ONE}
        for s in range(ctx.m):
            comps[ctx.iy(s)] = ctx.yd(s, i)
            for j in range(ctx.n):
                comps[ctx.iyd(s, j)] = c.F(s, i, j)
        out.append(VectorField(ctx, comps))
    return out


def gamma_v(c: Connection, v: Sequence) -> VectorField:
    fields = gamma_fields(c)
    out = VectorField(c.ctx)
    for vi, G in zip(v, fields):
        out = out + G * vi
    return out


def gamma_vvf(c: Connection) -> VectorValuedForm:
    """The connection form dx^i (x) Gamma_i."""
    ctx = c.ctx
    return VectorValuedForm.from_decomposables(
        ctx, 1, [(DiffForm.coordinate(ctx, ctx.ix(i)), G) for i, G in enumerate(gamma_fields(c))])


def s1_phi(ctx: JetContext, s: Slice) -> VectorValuedForm:
    """S1_phi = phi_i omega^s (x) d/dy^s_i."""
    comps = {}
    for sg in range(ctx.m):
        w = contact_form(ctx, sg)
        for i in range(ctx.n):
            if not s.phi[i].is_zero_const:
                comps[ctx.iyd(sg, i)] = w * s.phi[i]
    return VectorValuedForm(ctx, 1, comps)


def deformation(c: Connection, s: Slice) -> VectorValuedForm:
    """L_{Gamma_v} S1_phi by the componentwise Lie derivative."""
    return lie_derivative_vvf(gamma_v(c, s.v), s1_phi(c.ctx, s))


def lemma1_residual(c: Connection, s: Slice) -> VectorValuedForm:
    """i_{Gamma_v} [[Gamma, S1_phi]] - L_{Gamma_v} S1_phi (vanishes identically)."""
    bracket = fn_bracket(gamma_vvf(c), s1_phi(c.ctx, s))
    return interior(gamma_v(c, s.v), bracket) - deformation(c, s)


HTable = Dict[Tuple[int, int, int], Expr]  # (nu, sigma, k) -> H^nu_{sigma k}


def horizontal_coefficients(c: Connection, s: Slice, verify: bool = False) -> HTable:
    """Coefficients H^nu_{sigma k} of the -1 eigenfields of L_{Gamma_v} S1_phi."""
    if not s.normalized:
        raise SliceError("horizontal coefficients need a normalized slice (i_v phi = 1)")
    ctx = c.ctx
    n, m = ctx.n, ctx.m
    dphi = [[diff(s.phi[k], ctx.x_names[i]) for i in range(n)] for k in range(n)]
    H: HTable = {}
    for nu in range(m):
        for sg in range(m):
            A = []
            for k in range(n):
                parts = []
                for i in range(n):
                    if s.v[i].is_zero_const:
                        continue
                    inner = [mul(s.phi[j], diff(c.F(nu, i, k), ctx.d_names[sg][j]))
                             for j in range(n) if not s.phi[j].is_zero_const]
                    if nu == sg:
                        inner.append(-dphi[k][i])
                    parts.append(mul(s.v[i], sum_exprs(inner)))
                A.append(sum_exprs(parts))
            vA = sum_exprs(mul(s.v[l], A[l]) for l in range(n))
            for k in range(n):
                H[(nu, sg, k)] = A[k] - mul(Fraction(1, 2), s.phi[k], vA)
    if verify:
        check_eigen_equations(c, s, H)
    return H


def h_fields(ctx: JetContext, H: HTable) -> List[VectorField]:
    out = []
    for sg in range(ctx.m):
        comps = {ctx.iy(sg): ONE}
        for nu in range(ctx.m):
            for k in range(ctx.n):
                comps[ctx.iyd(nu, k)] = H[(nu, sg, k)]
        out.append(VectorField(ctx, comps))
    return out


def check_eigen_equations(c: Connection, s: Slice, H: HTable,
                          probe_points: int = DEFAULT_PROBES, seed: int = DEFAULT_SEED):
    """L(H_s) = -H_s, L(S1(d/dy^s)) = S1(d/dy^s), L(Gamma_i) = 0."""
    ctx = c.ctx
    L = deformation(c, s)
    exprs = []
    for Hs in h_fields(ctx, H):
        exprs.extend((L(Hs) + Hs).comps.values())
    for sg in range(ctx.m):
        P = VectorField(ctx, {ctx.iyd(sg, j): s.phi[j] for j in range(ctx.n)})
        exprs.extend((L(P) - P).comps.values())
    for G in gamma_fields(c):
        exprs.extend(L(G).comps.values())
    r = all_zero(exprs, probe_points, seed)
    if not r:
        raise VerificationError(f"eigen-equation check failed (residual {r.residual:g})")
    return r


@dataclass
class SplitFrame:
    """Adapted frame/coframe and projectors of the splittings (B) and (AB)."""

    connection: Connection
    slice: Slice
    H: HTable
    h_fields: List[VectorField]
    gamma_fields: List[VectorField]
    omega: List[DiffForm]
    dx: List[DiffForm]
    psi: Dict[Tuple[int, int], DiffForm]      # (nu, k) -> psi^nu_k
    pivot: int                                 # index k0 with v^{k0} != 0
    W: Dict[Tuple[int, int], VectorField]     # (nu, p), p != pivot
    P: List[VectorField]                       # phi_j d/dy^nu_j
    theta: Dict[Tuple[int, int], DiffForm]    # (nu, p), p != pivot
    theta_plus: List[DiffForm]                 # v^k psi^nu_k
    h: VectorValuedForm
    gamma: VectorValuedForm
    vert: VectorValuedForm
    vert_tilde: VectorValuedForm
    vert_plus: VectorValuedForm
    checks: Dict[str, str] = field(default_factory=dict)

    @property
    def ctx(self) -> JetContext:
        return self.connection.ctx

    def basis_B(self):
        """({H_s, Gamma_i, d/dy^nu_k}, {omega^s, dx^i, psi^nu_k})."""
        ctx = self.ctx
        vecs = list(self.h_fields) + list(self.gamma_fields)
        forms = list(self.omega) + list(self.dx)
        for nu in range(ctx.m):
            for k in range(ctx.n):
                vecs.append(VectorField.coordinate(ctx, ctx.iyd(nu, k)))
                forms.append(self.psi[(nu, k)])
        return vecs, forms

    def basis_AB(self):
        """({H_s, Gamma_i, W^p_nu, P_nu}, {omega^s, dx^i, theta^nu_p, theta^nu_+})."""
        vecs = list(self.h_fields) + list(self.gamma_fields)
        forms = list(self.omega) + list(self.dx)
        for key in sorted(self.W):
            vecs.append(self.W[key])
            forms.append(self.theta[key])
        vecs.extend(self.P)
        forms.extend(self.theta_plus)
        return vecs, forms


def force_forms(c: Connection, H: HTable) -> Dict[Tuple[int, int], DiffForm]:
    """psi^nu_k = dy^nu_k - F^nu_ki dx^i - H^nu_{sk} omega^s."""
    ctx = c.ctx
    omega = [contact_form(ctx, s) for s in range(ctx.m)]
    out = {}
    for nu in range(ctx.m):
        for k in range(ctx.n):
            f = DiffForm(ctx, 1, {ctx.iyd(nu, k): ONE,
                                  **{ctx.ix(i): -c.F(nu, k, i) for i in range(ctx.n)}})
            for sg in range(ctx.m):
                f = f - omega[sg] * H[(nu, sg, k)]
            out[(nu, k)] = f
    return out


def _pivot(s: Slice) -> int:
    for k, c in enumerate(s.v):
        if not c.is_zero_const:
            return k
    raise SliceError("v vanishes identically")


def frame_from_coefficients(c: Connection, s: Slice, H: HTable, verify: bool = True,
                            probe_points: int = DEFAULT_PROBES,
                            seed: int = DEFAULT_SEED) -> SplitFrame:
    ctx = c.ctx
    n, m = ctx.n, ctx.m
    Hf = h_fields(ctx, H)
    G = gamma_fields(c)
    omega = [contact_form(ctx, sg) for sg in range(m)]
    dx = [DiffForm.coordinate(ctx, ctx.ix(i)) for i in range(n)]
    psi = force_forms(c, H)
    k0 = _pivot(s)
    inv = power(s.v[k0], -1)
    W, theta = {}, {}
    theta_plus, P = [], []
    for nu in range(m):
        tp = DiffForm(ctx, 1)
        for k in range(n):
            tp = tp + psi[(nu, k)] * s.v[k]
        theta_plus.append(tp)
        P.append(VectorField(ctx, {ctx.iyd(nu, j): s.phi[j] for j in range(n)}))
        for p in range(n):
            if p == k0:
                continue
            W[(nu, p)] = VectorField(ctx, {ctx.iyd(nu, p): ONE,
                                           ctx.iyd(nu, k0): -mul(s.v[p], inv)})
            theta[(nu, p)] = psi[(nu, p)] - tp * s.phi[p]
    VVF = VectorValuedForm
    h = VVF.from_decomposables(ctx, 1, zip(omega, Hf))
    gamma = VVF.from_decomposables(ctx, 1, zip(dx, G))
    vert = VVF.from_decomposables(
        ctx, 1, [(psi[(nu, k)], VectorField.coordinate(ctx, ctx.iyd(nu, k)))
                 for nu in range(m) for k in range(n)])
    vert_plus = VVF.from_decomposables(ctx, 1, zip(theta_plus, P))
    vert_tilde = VVF.from_decomposables(ctx, 1, [(theta[key], W[key]) for key in sorted(W)])
    frame = SplitFrame(c, s, H, Hf, G, omega, dx, psi, k0, W, P, theta, theta_plus,
                       h, gamma, vert, vert_tilde, vert_plus)
    if verify:
        verify_frame(frame, probe_points, seed)
    return frame


def build_split_frame(c: Connection, s: Slice, verify: bool = True,
                      probe_points: int = DEFAULT_PROBES, seed: int = DEFAULT_SEED) -> SplitFrame:
    H = horizontal_coefficients(c, s)
    if verify:
        check_eigen_equations(c, s, H, probe_points, seed)
    return frame_from_coefficients(c, s, H, verify, probe_points, seed)


def _pairing_residuals(vecs, forms):
    out = []
    for a, f in enumerate(forms):
        for b, U in enumerate(vecs):
            val = f(U)
            out.append(val - 1 if a == b else val)
    return out


def verify_frame(frame: SplitFrame, probe_points: int = DEFAULT_PROBES,
                 seed: int = DEFAULT_SEED) -> Dict[str, str]:
    """Check duality of both bases and the projector algebra; raise on failure."""
    ctx = frame.ctx
    ident = VectorValuedForm.identity(ctx)
    checks = {
        "duality B": _pairing_residuals(*frame.basis_B()),
        "duality AB": _pairing_residuals(*frame.basis_AB()),
        "h + Gamma + v = id": (frame.h + frame.gamma + frame.vert - ident).components(),
        "v~ + v+ = v": (frame.vert_tilde + frame.vert_plus - frame.vert).components(),
    }
    out = {}
    for name, exprs in checks.items():
        r = all_zero(exprs, probe_points, seed)
        if not r:
            raise VerificationError(f"split frame check {name!r} failed (residual {r.residual:g})")
        out[name] = r.method
    frame.checks.update(out)
    return out


def projector_products(frame: SplitFrame) -> Dict[str, VectorValuedForm]:
    """Residuals P∘P - P and P∘Q for the four projectors of splitting (AB)."""
    projs = {"h": frame.h, "Gamma": frame.gamma, "v~": frame.vert_tilde, "v+": frame.vert_plus}
    out = {}
    for a, A in projs.items():
        for b, B in projs.items():
            prod = vvf_compose(A, B)
            out[f"{a}∘{b}"] = prod - A if a == b else prod
    return out
