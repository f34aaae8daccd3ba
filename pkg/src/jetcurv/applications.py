"""Worked examples: harmonic-map connections, separable systems, the lemniscate
with oscillating amplitude, and a seeded random polynomial system."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .connection import Connection, SplitFrame, adapted_slice, build_split_frame, free_connection
from .curvature import (
    _Cache, _decomp, _zero, jacobi_components, jacobi_curvature, r_gamma, r_h,
    r_plus_vertical,
)
from .jetcalc import JetContext, VectorField, wedge
from .secondorder import BaseMetric
from .symcore import (
    ONE, ZERO, Const, Expr, ZeroResult, all_zero, cos, diff, evaluate, is_zero, mul, parse,
    sqrt, sum_exprs, symbol,
)
from .symcore.zero import DEFAULT_PROBES, DEFAULT_SEED


# -- Riemannian data -------------------------------------------------------


@dataclass
class RiemannData:
    """Metric, Christoffel symbols Gamma[k][i][j] and Riemann tensor R[l][k][i][j].

    R^l_kij = d_i Gamma^l_jk - d_j Gamma^l_ik + Gamma^l_im Gamma^m_jk - Gamma^l_jm Gamma^m_ik.
    """

    metric: BaseMetric
    christoffel: List[List[List[Expr]]]
    riemann: List[List[List[List[Expr]]]]

    @property
    def names(self):
        return self.metric.names

    @property
    def n(self):
        return self.metric.n

    def invariant_residuals(self) -> Dict[str, List[Expr]]:
        n, G, R, g = self.n, self.christoffel, self.riemann, self.metric.g
        idx = range(n)
        return {
            "christoffel symmetry": [G[k][i][j] - G[k][j][i] for k in idx for i in idx for j in idx],
            "antisymmetry": [R[l][k][i][j] + R[l][k][j][i] for l in idx for k in idx for i in idx for j in idx],
            "first Bianchi": [R[l][k][i][j] + R[l][i][j][k] + R[l][j][k][i]
                              for l in idx for k in idx for i in idx for j in idx],
            "metric compatibility": [
                diff(g[i][j], self.names[k])
                - sum_exprs(mul(G[l][k][i], g[l][j]) + mul(G[l][k][j], g[i][l]) for l in idx)
                for i in idx for j in idx for k in idx],
        }


def christoffel(g: BaseMetric) -> RiemannData:
    n = g.n
    x = g.names
    gi = g.inverse
    dg = [[[diff(g.g[i][j], x[k]) for k in range(n)] for j in range(n)] for i in range(n)]
    G = [[[ZERO] * n for _ in range(n)] for _ in range(n)]
    for k in range(n):
        for i in range(n):
            for j in range(i, n):
                val = sum_exprs(mul(gi[k][l], dg[l][i][j] + dg[l][j][i] - dg[i][j][l])
                                for l in range(n)) * Fraction(1, 2)
                G[k][i][j] = G[k][j][i] = val
    R = [[[[ZERO] * n for _ in range(n)] for _ in range(n)] for _ in range(n)]
    for l in range(n):
        for k in range(n):
            for i in range(n):
                for j in range(i + 1, n):
                    val = (diff(G[l][j][k], x[i]) - diff(G[l][i][k], x[j])
                           + sum_exprs(mul(G[l][i][mm], G[mm][j][k]) - mul(G[l][j][mm], G[mm][i][k])
                                       for mm in range(n)))
                    R[l][k][i][j] = val
                    R[l][k][j][i] = -val
    return RiemannData(g, G, R)


def metric(names: Sequence[str], g, inverse=None) -> RiemannData:
    """Parse metric entries (strings or Exprs) and compute Christoffel and Riemann data."""
    from .symcore import SymbolTable

    table = SymbolTable(list(names), ["base"] * len(names))
    conv = lambda e: parse(e, table) if isinstance(e, str) else e
    g = [[conv(e) for e in row] for row in g]
    if inverse is not None:
        inverse = [[conv(e) for e in row] for row in inverse]
    return christoffel(BaseMetric.create(names, g, inverse))


def flat_metric(names: Sequence[str]) -> RiemannData:
    n = len(names)
    return metric(names, [[ONE if i == j else ZERO for j in range(n)] for i in range(n)])


def sphere_metric(names: Sequence[str] = ("a", "b")) -> RiemannData:
    """Round unit 2-sphere, diag(1, sin(a)^2)."""
    a, b = names
    return metric(names, [["1", "0"], ["0", f"sin({a})^2"]])


# -- harmonic maps ---------------------------------------------------------


def harmonic_connection(g: RiemannData, h: RiemannData) -> Connection:
    """F^r_ij = gGamma^k_ij y^r_k - hGamma^r_sn y^s_i y^n_j."""
    ctx = JetContext.create(g.names, h.names)
    n, m = ctx.n, ctx.m
    gG, hG = g.christoffel, h.christoffel
    F = {}
    for r in range(m):
        for i in range(n):
            for j in range(i, n):
                parts = [mul(gG[k][i][j], ctx.yd(r, k)) for k in range(n)]
                parts += [-mul(hG[r][s][nu], ctx.yd(s, i), ctx.yd(nu, j))
                          for s in range(m) for nu in range(m)]
                F[(r, i, j)] = sum_exprs(parts)
    return Connection(ctx, F)


class ChartConditionError(ValueError):
    pass


@dataclass
class HarmonicReport:
    connection: Connection
    frame: SplitFrame
    residuals: Dict[str, ZeroResult]

    @property
    def passed(self):
        return all(bool(r) for r in self.residuals.values())


def harmonic_displays(frame: SplitFrame, g: RiemannData, h: RiemannData):
    """The four closed-form curvature operators for a harmonic-map connection."""
    ctx = frame.ctx
    n, m = ctx.n, ctx.m
    gR, hR, gG = g.riemann, h.riemann, g.christoffel
    yd = ctx.yd
    dy = lambda nu, k: VectorField.coordinate(ctx, ctx.iyd(nu, k))
    rg, rh, phi, rp = [], [], [], []
    for nu in range(m):
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    if i == j:
                        continue
                    kappa = sum_exprs([mul(gR[l][k][i][j], yd(nu, l)) for l in range(n)]
                                      + [mul(hR[nu][r][mu][s], yd(s, i), yd(mu, j), yd(r, k))
                                         for r in range(m) for mu in range(m) for s in range(m)])
                    rg.append((wedge(frame.dx[i], frame.dx[j]) * kappa, dy(nu, k)))
            for s in range(m):
                for r in range(m):
                    if s == r:
                        continue
                    kappa = sum_exprs(mul(hR[nu][mu][r][s], yd(mu, k)) for mu in range(m))
                    rh.append((wedge(frame.omega[s], frame.omega[r]) * kappa, dy(nu, k)))
    for rho in range(m):
        for i in range(n):
            for nu in range(m):
                for k in range(n):
                    val = sum_exprs(mul(hR[rho][mu][nu][s], yd(s, i), yd(mu, k))
                                    for mu in range(m) for s in range(m))
                    phi.append((wedge(frame.dx[i], frame.omega[nu]) * val, dy(rho, k)))
    for sg in range(m):
        for i in range(n):
            for p in range(1, n):
                rp.append((wedge(frame.dx[i], frame.psi[(sg, p)]) * (-gG[p][i][0]), dy(sg, 0)))
    return {"R^Gamma": _decomp(frame, rg), "R^H": _decomp(frame, rh),
            "Phi": _decomp(frame, phi), "r_+": _decomp(frame, rp)}


def check_chart_conditions(g: RiemannData, probe_points=DEFAULT_PROBES, seed=DEFAULT_SEED):
    """Require g_11 = 1 and g_1q = 0 so that v = d/dx^1 is g#(dx^1)."""
    gm = g.metric.g
    if not is_zero(gm[0][0] - ONE, probe_points, seed):
        raise ChartConditionError(f"g[1][1] = {gm[0][0]} is not 1")
    for q in range(1, g.n):
        if not is_zero(gm[0][q], probe_points, seed):
            raise ChartConditionError(f"g[1][{q + 1}] = {gm[0][q]} is not 0")


def harmonic_curvature_check(g: RiemannData, h: RiemannData, probe_points=DEFAULT_PROBES,
                             seed=DEFAULT_SEED) -> HarmonicReport:
    """Compare R^Gamma, R^H, Phi, r_+ with their harmonic-map closed forms,
    for the slice phi = dx^1, v = d/dx^1."""
    check_chart_conditions(g, probe_points, seed)
    c = harmonic_connection(g, h)
    frame = build_split_frame(c, adapted_slice(c.ctx), probe_points=probe_points, seed=seed)
    cache = _Cache(frame)
    computed = {
        "R^Gamma": r_gamma(frame, cache),
        "R^H": r_h(frame, cache, probe_points, seed),
        "Phi": jacobi_curvature(frame, cache, probe_points, seed),
        "r_+": r_plus_vertical(frame, cache, probe_points, seed),
    }
    disp = harmonic_displays(frame, g, h)
    res = {k: _zero(computed[k] - disp[k], probe_points, seed) for k in computed}
    return HarmonicReport(c, frame, res)


# -- separability ----------------------------------------------------------


@dataclass
class SeparabilityReport:
    hypothesis: bool
    violations: List[str]
    slices: Dict[str, Dict[str, ZeroResult]] = field(default_factory=dict)

    @property
    def passed(self):
        """The necessary conditions hold on every slice (asserted only when the
        hypothesis holds)."""
        if not self.hypothesis:
            return False
        return all(bool(r) for rows in self.slices.values() for r in rows.values())


def separability_violations(c: Connection, probe_points=DEFAULT_PROBES, seed=DEFAULT_SEED) -> List[str]:
    ctx = c.ctx
    out = []
    for sg in range(ctx.m):
        for i in range(ctx.n):
            for j in range(i, ctx.n):
                F = c.F(sg, i, j)
                label = f"F[{ctx.y_names[sg]}][{ctx.x_names[i]}][{ctx.x_names[j]}]"
                deps = list(ctx.x_names)
                for nu in range(ctx.m):
                    if nu != sg:
                        deps.append(ctx.y_names[nu])
                        deps.extend(ctx.d_names[nu])
                for name in deps:
                    if name in F.free_symbols and not is_zero(diff(F, name), probe_points, seed):
                        out.append(f"{label} depends on {name}")
    return out


def separable_slice_coefficients(c: Connection, p: Optional[int]) -> Dict[Tuple[int, int, int], Expr]:
    """Closed-form H^s_{sk} for the slice v_1 (p None) or v_p."""
    ctx = c.ctx
    H = {}
    for sg in range(ctx.m):
        y1 = ctx.d_names[sg][0]
        d = lambda i, j: diff(c.F(sg, i, j), y1)
        H[(sg, sg, 0)] = (d(0, 0) - (d(p, p) if p else ZERO)) * Fraction(1, 2)
        for q in range(1, ctx.n):
            H[(sg, sg, q)] = d(0, q) + (d(p, q) if p else ZERO)
    return H


def separability_check(c: Connection, probe_points=DEFAULT_PROBES, seed=DEFAULT_SEED) -> SeparabilityReport:
    """Necessary conditions for separability: R^H = 0 and Phi diagonal in (nu, sigma),
    on the slices v_1 = (1, 0, ..) and v_p = e_1 + e_p with phi = dx^1."""
    ctx = c.ctx
    report = SeparabilityReport(False, separability_violations(c, probe_points, seed))
    report.hypothesis = not report.violations
    for p in [None] + list(range(1, ctx.n)):
        v = [ONE] + [ONE if q == p else ZERO for q in range(1, ctx.n)]
        name = "v1" if p is None else f"v{p + 1}"
        frame = build_split_frame(c, adapted_slice(ctx, v), probe_points=probe_points, seed=seed)
        cache = _Cache(frame)
        rows = {"R^H = 0": _zero(r_h(frame, cache, probe_points, seed), probe_points, seed)}
        comps = jacobi_components(frame)
        rows["Phi off-diagonal = 0"] = all_zero(
            [val for (nu, i, s, j), val in comps.items() if nu != s], probe_points, seed)
        disp = separable_slice_coefficients(c, p)
        rows["H matches slice formula"] = all_zero(
            [frame.H[key] - (disp.get(key, ZERO)) for key in frame.H], probe_points, seed)
        report.slices[name] = rows
    return report


# -- the lemniscate --------------------------------------------------------


def lemniscate() -> Connection:
    """r_tt = -r, r_t th = r_t r_th / r, r_th th = -2 r - r_th^2 / r."""
    ctx = JetContext.create(["t", "th"], ["r"])
    P = lambda s: parse(s, ctx.symbols)
    return Connection(ctx, {(0, 0, 0): P("-r"), (0, 0, 1): P("r_t*r_th/r"),
                            (0, 1, 1): P("-2*r - r_th^2/r")})


def lemniscate_solution_residual(points: Sequence[Dict[str, float]]) -> float:
    """Max residual of the three PDEs on r = cos(t) sqrt(cos(2 th)); points need cos(2 th) > 0."""
    c = lemniscate()
    t, th = symbol("t"), symbol("th")
    r = mul(cos(t), sqrt(cos(th * 2)))
    first = {"r": r, "r_t": diff(r, "t"), "r_th": diff(r, "th")}
    second = {(0, 0): diff(first["r_t"], "t"), (0, 1): diff(first["r_t"], "th"),
              (1, 1): diff(first["r_th"], "th")}
    worst = 0.0
    for p in points:
        jet = {"t": p["t"], "th": p["th"]}
        for k, e in first.items():
            jet[k] = evaluate(e, p)
        for (i, j), e in second.items():
            worst = max(worst, abs(evaluate(e, p) - evaluate(c.F(0, i, j), jet)))
    return worst


# -- random test systems ---------------------------------------------------


def random_connection(n: int = 3, m: int = 2, seed: int = DEFAULT_SEED, terms: int = 3,
                      degree: int = 3) -> Connection:
    """Sparse polynomial F with small integer coefficients, reproducible from ``seed``."""
    ctx = JetContext.default(n, m)
    rng = random.Random(seed)
    names = ctx.names
    F = {}
    for sg in range(m):
        for i in range(n):
            for j in range(i, n):
                parts = []
                for _ in range(terms):
                    coef = rng.choice([-2, -1, 1, 2])
                    deg = rng.randint(0, degree)
                    parts.append(mul(Const(coef), *[symbol(rng.choice(names)) for _ in range(deg)]))
                F[(sg, i, j)] = sum_exprs(parts)
    return Connection(ctx, F)


def test_systems() -> Dict[str, Connection]:
    """The three reference systems: free (n=2, m=1), lemniscate, random (n=3, m=2)."""
    return {
        "free": free_connection(JetContext.default(2, 1)),
        "lemniscate": lemniscate(),
        "random": random_connection(),
    }
