"""Curvature operators of the splittings (B) and (AB) and their identities.

Sums written as ``dx^i ^ dx^j (x) [Gamma_i, Gamma_j]`` run over *all* ordered
pairs ``(i, j)``; that is what the FN bracket itself produces, so e.g.
``[[Gamma, Gamma]]`` equals the full double sum exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .connection import SplitFrame, VerificationError, is_adapted
from .jetcalc import (
    VectorField, VectorValuedForm, fn_bracket, lie_bracket, vvf_compose, wedge,
)
from .symcore import ONE, ZERO, Expr, ZeroResult, all_zero, diff, sum_exprs
from .symcore.expr import mul
from .symcore.zero import DEFAULT_PROBES, DEFAULT_SEED

VVF = VectorValuedForm


def _decomp(frame: SplitFrame, pairs) -> VVF:
    return VVF.from_decomposables(frame.ctx, 2, pairs)


def _zero(A, probe_points=DEFAULT_PROBES, seed=DEFAULT_SEED) -> ZeroResult:
    if isinstance(A, VVF):
        return all_zero(A.components(), probe_points, seed)
    if isinstance(A, VectorField):
        return all_zero(A.comps.values(), probe_points, seed)
    return all_zero(A, probe_points, seed)


class _Cache:
    """Per-frame memo of the brackets; lives only as long as one report."""

    def __init__(self, frame: SplitFrame):
        self.frame = frame
        self._d: Dict[str, object] = {}

    def get(self, name, fn):
        if name not in self._d:
            self._d[name] = fn()
        return self._d[name]

    def fn(self, a: str, b: str) -> VVF:
        proj = {"Gamma": self.frame.gamma, "h": self.frame.h, "v": self.frame.vert,
                "v~": self.frame.vert_tilde, "v+": self.frame.vert_plus}
        return self.get(f"[[{a},{b}]]", lambda: fn_bracket(proj[a], proj[b]))


# -- Lie brackets of frame fields ------------------------------------------


def gamma_brackets(frame: SplitFrame) -> Dict[Tuple[int, int], VectorField]:
    G = frame.gamma_fields
    n = frame.ctx.n
    return {(i, j): lie_bracket(G[i], G[j]) for i in range(n) for j in range(n)}


def h_brackets(frame: SplitFrame) -> Dict[Tuple[int, int], VectorField]:
    H = frame.h_fields
    m = frame.ctx.m
    return {(a, b): lie_bracket(H[a], H[b]) for a in range(m) for b in range(m)}


def gamma_part(frame: SplitFrame, brackets=None) -> VVF:
    """dx^i ^ dx^j (x) [Gamma_i, Gamma_j] summed over all i, j."""
    brackets = brackets or gamma_brackets(frame)
    return _decomp(frame, [(wedge(frame.dx[i], frame.dx[j]), U)
                           for (i, j), U in brackets.items() if i != j])


def h_part(frame: SplitFrame, brackets=None) -> VVF:
    """omega^s ^ omega^r (x) [H_s, H_r] summed over all s, r."""
    brackets = brackets or h_brackets(frame)
    return _decomp(frame, [(wedge(frame.omega[a], frame.omega[b]), U)
                           for (a, b), U in brackets.items() if a != b])


def psi_h_part(frame: SplitFrame) -> VVF:
    """dx^i ^ psi^s_i (x) H_s."""
    ctx = frame.ctx
    return _decomp(frame, [(wedge(frame.dx[i], frame.psi[(s, i)]), frame.h_fields[s])
                           for s in range(ctx.m) for i in range(ctx.n)])


# -- operators -------------------------------------------------------------


def r_gamma(frame: SplitFrame, cache: Optional[_Cache] = None) -> VVF:
    """R^Gamma = [[Gamma, Gamma]]."""
    cache = cache or _Cache(frame)
    return cache.fn("Gamma", "Gamma")


def jacobi_components(frame: SplitFrame) -> Dict[Tuple[int, int, int, int], Expr]:
    """Phi^nu_{i s j} = H^r_{s i} H^nu_{r j} + Gamma_i(H^nu_{s j}) - H_s(F^nu_ij)."""
    ctx = frame.ctx
    H, c = frame.H, frame.connection
    out = {}
    for nu in range(ctx.m):
        for i in range(ctx.n):
            G = frame.gamma_fields[i]
            for s in range(ctx.m):
                Hs = frame.h_fields[s]
                for j in range(ctx.n):
                    parts = [mul(H[(r, s, i)], H[(nu, r, j)]) for r in range(ctx.m)]
                    parts.append(G(H[(nu, s, j)]))
                    parts.append(-Hs(c.F(nu, i, j)))
                    out[(nu, i, s, j)] = sum_exprs(parts)
    return out


def phi_from_components(frame: SplitFrame, comps) -> VVF:
    ctx = frame.ctx
    pairs = []
    for (nu, i, s, j), v in comps.items():
        if v.is_zero_const:
            continue
        pairs.append((wedge(frame.dx[i], frame.omega[s]) * v,
                      VectorField.coordinate(ctx, ctx.iyd(nu, j))))
    return _decomp(frame, pairs)


def jacobi_curvature(frame: SplitFrame, cache: Optional[_Cache] = None,
                     probe_points=DEFAULT_PROBES, seed=DEFAULT_SEED) -> VVF:
    """Phi = v ∘ [[Gamma, h]], cross-checked against the component formula."""
    cache = cache or _Cache(frame)
    phi = cache.get("Phi", lambda: vvf_compose(frame.vert, cache.fn("Gamma", "h")))
    comps = cache.get("Phi components", lambda: jacobi_components(frame))
    r = _zero(phi - phi_from_components(frame, comps), probe_points, seed)
    if not r:
        raise VerificationError(f"Jacobi curvature cross-check failed (residual {r.residual:g})")
    return phi


def jacobi_values(frame: SplitFrame, phi: VVF) -> Dict[Tuple[int, int, int, int], Expr]:
    """Read Phi^nu_{i s j} back from a vector-valued 2-form as Phi(Gamma_i, H_s)."""
    ctx = frame.ctx
    out = {}
    for i in range(ctx.n):
        for s in range(ctx.m):
            U = phi(frame.gamma_fields[i], frame.h_fields[s])
            for nu in range(ctx.m):
                for j in range(ctx.n):
                    out[(nu, i, s, j)] = U[ctx.iyd(nu, j)]
    return out


def r_h(frame: SplitFrame, cache: Optional[_Cache] = None,
        probe_points=DEFAULT_PROBES, seed=DEFAULT_SEED) -> VVF:
    """R^H = v ∘ [[h, h]], cross-checked against omega ^ omega (x) [H, H]."""
    cache = cache or _Cache(frame)
    rh = cache.get("R^H", lambda: vvf_compose(frame.vert, cache.fn("h", "h")))
    r = _zero(rh - h_part(frame), probe_points, seed)
    if not r:
        raise VerificationError(f"R^H cross-check failed (residual {r.residual:g})")
    return rh


def r_plus_display(frame: SplitFrame) -> VVF:
    """Adapted-chart coordinate expression of r_+ (phi = dx^1, v^1 = 1)."""
    if not is_adapted(frame.slice):
        raise ValueError("the r_+ display needs adapted coordinates (phi = dx^1)")
    ctx = frame.ctx
    c, v, H = frame.connection, frame.slice.v, frame.H
    n, m = ctx.n, ctx.m
    pairs = []
    for sg in range(m):
        target = VectorField.coordinate(ctx, ctx.iyd(sg, 0))
        for nu in range(m):
            for p in range(1, n):
                for i in range(n):
                    parts = []
                    for k in range(n):
                        F = c.F(sg, i, k)
                        inner = [mul(v[p], diff(F, ctx.d_names[nu][0])),
                                 -diff(F, ctx.d_names[nu][p])]
                        coef = (v[p] if i == 0 else ZERO) - (ONE if i == p else ZERO)
                        inner.append(-mul(coef, H[(sg, nu, k)]))
                        parts.append(mul(v[k], sum_exprs(inner)))
                    if sg == nu:
                        parts.append(-diff(v[p], ctx.x_names[i]))
                    coef = sum_exprs(parts)
                    if coef.is_zero_const:
                        continue
                    pairs.append((wedge(frame.dx[i], frame.psi[(nu, p)]) * coef, target))
    return _decomp(frame, pairs)


def r_plus_vertical(frame: SplitFrame, cache: Optional[_Cache] = None,
                    probe_points=DEFAULT_PROBES, seed=DEFAULT_SEED) -> VVF:
    """r_+ = v_+ ∘ [[Gamma, v~]]; matched to the coordinate display when adapted."""
    cache = cache or _Cache(frame)
    rp = cache.get("r_+", lambda: vvf_compose(frame.vert_plus, cache.fn("Gamma", "v~")))
    if is_adapted(frame.slice):
        r = _zero(rp - r_plus_display(frame), probe_points, seed)
        if not r:
            raise VerificationError(f"r_+ display check failed (residual {r.residual:g})")
    return rp


def decompose_plus_tilde(frame: SplitFrame, A: VVF) -> Tuple[VVF, VVF]:
    """(v~ ∘ A, v+ ∘ A) for A with values in the vertical bundle V pi_{1,0}."""
    return vvf_compose(frame.vert_tilde, A), vvf_compose(frame.vert_plus, A)


# -- identity checks -------------------------------------------------------


def check_theorem2(frame: SplitFrame, cache: Optional[_Cache] = None,
                   probe_points=DEFAULT_PROBES, seed=DEFAULT_SEED) -> ZeroResult:
    """v ∘ [[Gamma, v]] + R^Gamma + Phi = 0."""
    cache = cache or _Cache(frame)
    phi = jacobi_curvature(frame, cache, probe_points, seed)
    lhs = vvf_compose(frame.vert, cache.fn("Gamma", "v")) + r_gamma(frame, cache) + phi
    return _zero(lhs, probe_points, seed)


def check_theorem3(frame: SplitFrame, cache: Optional[_Cache] = None,
                   probe_points=DEFAULT_PROBES, seed=DEFAULT_SEED) -> ZeroResult:
    """v+ ∘ [[Gamma, v+]] + R^Gamma_+ + Phi_+ + r_+ = 0."""
    cache = cache or _Cache(frame)
    phi = jacobi_curvature(frame, cache, probe_points, seed)
    vp = frame.vert_plus
    lhs = (vvf_compose(vp, cache.fn("Gamma", "v+")) + vvf_compose(vp, r_gamma(frame, cache))
           + vvf_compose(vp, phi) + r_plus_vertical(frame, cache, probe_points, seed))
    return _zero(lhs, probe_points, seed)


def check_appendix_table(frame: SplitFrame, cache: Optional[_Cache] = None,
                         probe_points=DEFAULT_PROBES, seed=DEFAULT_SEED) -> Dict[str, ZeroResult]:
    """Residuals of the six FN-bracket rows and five Lie-bracket rows."""
    cache = cache or _Cache(frame)
    ctx = frame.ctx
    c, H = frame.connection, frame.H
    gb = cache.get("gamma brackets", lambda: gamma_brackets(frame))
    hb = cache.get("h brackets", lambda: h_brackets(frame))
    phi_comps = cache.get("Phi components", lambda: jacobi_components(frame))
    Phi = phi_from_components(frame, phi_comps)
    RG = gamma_part(frame, gb)
    RH = h_part(frame, hb)
    PH = psi_h_part(frame)
    rows = {
        "[[Gamma,Gamma]]": cache.fn("Gamma", "Gamma") - RG,
        "[[Gamma,h]]": cache.fn("Gamma", "h") - (Phi + PH),
        "[[Gamma,v]]": cache.fn("Gamma", "v") + Phi + PH + RG,
        "[[h,h]]": cache.fn("h", "h") - (RH - PH * 2),
        "[[h,v]]": cache.fn("h", "v") + Phi + RH - PH,
        "[[v,v]]": cache.fn("v", "v") - (Phi * 2 + RG + RH),
    }
    out = {name: _zero(A, probe_points, seed) for name, A in rows.items()}

    def coord(a):
        return VectorField.coordinate(ctx, a)

    n, m = ctx.n, ctx.m
    res: Dict[str, List[Expr]] = {k: [] for k in (
        "[Gamma_i,Gamma_j]", "[H_s,H_r]", "[Gamma_i,H_s]", "[Gamma_i,d/dy^s_j]", "[H_s,d/dy^nu_j]")}
    for (i, j), U in gb.items():
        disp = VectorField(ctx, {ctx.iyd(nu, k): frame.gamma_fields[i](c.F(nu, j, k))
                                 - frame.gamma_fields[j](c.F(nu, i, k))
                                 for nu in range(m) for k in range(n)})
        res["[Gamma_i,Gamma_j]"].extend((U - disp).comps.values())
    for (a, b), U in hb.items():
        disp = VectorField(ctx, {ctx.iyd(r, k): frame.h_fields[a](H[(r, b, k)])
                                 - frame.h_fields[b](H[(r, a, k)])
                                 for r in range(m) for k in range(n)})
        res["[H_s,H_r]"].extend((U - disp).comps.values())
    for i in range(n):
        G = frame.gamma_fields[i]
        for s in range(m):
            Phi_is = VectorField(ctx, {ctx.iyd(nu, j): phi_comps[(nu, i, s, j)]
                                       for nu in range(m) for j in range(n)})
            disp = Phi_is
            for nu in range(m):
                disp = disp - frame.h_fields[nu] * H[(nu, s, i)]
            res["[Gamma_i,H_s]"].extend((lie_bracket(G, frame.h_fields[s]) - disp).comps.values())
            for j in range(n):
                comps = {}
                for nu in range(m):
                    for k in range(n):
                        val = -diff(c.F(nu, i, k), ctx.d_names[s][j])
                        if i == j:
                            val = val + H[(nu, s, k)]
                        comps[ctx.iyd(nu, k)] = val
                disp = VectorField(ctx, comps)
                if i == j:
                    disp = disp - frame.h_fields[s]
                res["[Gamma_i,d/dy^s_j]"].extend(
                    (lie_bracket(G, coord(ctx.iyd(s, j))) - disp).comps.values())
    for s in range(m):
        for nu in range(m):
            for j in range(n):
                disp = VectorField(ctx, {ctx.iyd(r, k): -diff(H[(r, s, k)], ctx.d_names[nu][j])
                                         for r in range(m) for k in range(n)})
                res["[H_s,d/dy^nu_j]"].extend(
                    (lie_bracket(frame.h_fields[s], coord(ctx.iyd(nu, j))) - disp).comps.values())
    for name, exprs in res.items():
        out[name] = all_zero(exprs, probe_points, seed)
    return out


def check_adapted_displays(frame: SplitFrame, cache: Optional[_Cache] = None,
                           probe_points=DEFAULT_PROBES, seed=DEFAULT_SEED) -> Dict[str, ZeroResult]:
    """Adapted-chart displays of Phi~, Phi+, R~, R+, R~^H, R^H_+ (phi = dx^1)."""
    if not is_adapted(frame.slice):
        raise ValueError("adapted displays need phi = dx^1")
    cache = cache or _Cache(frame)
    ctx = frame.ctx
    n, m = ctx.n, ctx.m
    v = frame.slice.v
    phi = jacobi_curvature(frame, cache, probe_points, seed)
    comps = cache.get("Phi components", lambda: jacobi_components(frame))
    gb = cache.get("gamma brackets", lambda: gamma_brackets(frame))
    hb = cache.get("h brackets", lambda: h_brackets(frame))
    W = frame.W
    d1 = lambda nu: VectorField.coordinate(ctx, ctx.iyd(nu, 0))

    phi_t = _decomp(frame, [(wedge(frame.dx[i], frame.omega[s]) * comps[(nu, i, s, p)], W[(nu, p)])
                            for nu in range(m) for i in range(n) for s in range(m)
                            for p in range(1, n)])
    phi_p = _decomp(frame, [(wedge(frame.dx[i], frame.omega[s])
                             * sum_exprs(mul(v[j], comps[(nu, i, s, j)]) for j in range(n)), d1(nu))
                            for nu in range(m) for i in range(n) for s in range(m)])

    def split(brackets, forms):
        tilde, plus = [], []
        for (a, b), U in brackets.items():
            if a == b:
                continue
            w = wedge(forms[a], forms[b])
            for nu in range(m):
                for p in range(1, n):
                    tilde.append((w * U[ctx.iyd(nu, p)], W[(nu, p)]))
                plus.append((w * sum_exprs(mul(v[k], U[ctx.iyd(nu, k)]) for k in range(n)), d1(nu)))
        return _decomp(frame, tilde), _decomp(frame, plus)

    rg_t, rg_p = split(gb, frame.dx)
    rh_t, rh_p = split(hb, frame.omega)
    RG = r_gamma(frame, cache)
    RH = r_h(frame, cache, probe_points, seed)
    got = {
        "Phi~": (decompose_plus_tilde(frame, phi)[0], phi_t),
        "Phi+": (decompose_plus_tilde(frame, phi)[1], phi_p),
        "R~Gamma": (decompose_plus_tilde(frame, RG)[0], rg_t),
        "RGamma+": (decompose_plus_tilde(frame, RG)[1], rg_p),
        "R~H": (decompose_plus_tilde(frame, RH)[0], rh_t),
        "RH+": (decompose_plus_tilde(frame, RH)[1], rh_p),
    }
    return {k: _zero(a - b, probe_points, seed) for k, (a, b) in got.items()}


@dataclass
class CurvatureReport:
    operators: Dict[str, VVF]
    phi_components: Dict[Tuple[int, int, int, int], Expr]
    residuals: Dict[str, ZeroResult] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(bool(r) for r in self.residuals.values())


def curvature_report(frame: SplitFrame, tables: bool = True, probe_points=DEFAULT_PROBES,
                     seed=DEFAULT_SEED) -> CurvatureReport:
    """All operators of the (AB) splitting plus every identity residual."""
    cache = _Cache(frame)
    RG = r_gamma(frame, cache)
    phi = jacobi_curvature(frame, cache, probe_points, seed)
    RH = r_h(frame, cache, probe_points, seed)
    rp = r_plus_vertical(frame, cache, probe_points, seed)
    ops = {"R^Gamma": RG, "R^H": RH, "Phi": phi, "r_+": rp}
    for name, A in (("Phi", phi), ("R^Gamma", RG), ("R^H", RH)):
        t, p = decompose_plus_tilde(frame, A)
        ops[name + "~"] = t
        ops[name + "_+"] = p
    report = CurvatureReport(ops, cache.get("Phi components", lambda: jacobi_components(frame)))
    for name in ("Phi", "R^Gamma", "R^H"):
        report.residuals[f"{name}~ + {name}_+ = {name}"] = _zero(
            ops[name + "~"] + ops[name + "_+"] - ops[name], probe_points, seed)
    report.residuals["Theorem 2"] = check_theorem2(frame, cache, probe_points, seed)
    report.residuals["Theorem 3"] = check_theorem3(frame, cache, probe_points, seed)
    if tables:
        for k, r in check_appendix_table(frame, cache, probe_points, seed).items():
            report.residuals[f"appendix {k}"] = r
        if is_adapted(frame.slice):
            for k, r in check_adapted_displays(frame, cache, probe_points, seed).items():
                report.residuals[f"display {k}"] = r
    return report
