"""Numeric verification: operator matrices at jet points, ranks, FD audits."""

from __future__ import annotations

import random
from dataclasses import asdict, dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np

from .jetcalc import JetContext, VectorValuedForm
from .symcore import DomainError, Expr, diff, evaluate
from .symcore.expr import denominators
from .symcore.zero import BOX, DEFAULT_SEED, DENOM_GUARD, MAX_RESAMPLE

FD_STEP = 1e-6
EIGEN_TOL = 1e-8


class PointError(ValueError):
    """A jet point lies outside the domain of the expressions involved."""


def check_point(exprs: Iterable[Expr], point: Mapping[str, float]) -> None:
    """Require every denominator to satisfy |d| >= 1e-3 at ``point``."""
    for e in exprs:
        for d in denominators(e):
            try:
                val = evaluate(d, point)
            except DomainError as exc:
                raise PointError(str(exc)) from None
            if abs(val) < DENOM_GUARD:
                raise PointError(f"denominator {d} is {val:g} at the point")


def random_jet_points(ctx: JetContext, count: int, seed: int = DEFAULT_SEED,
                      exprs: Sequence[Expr] = ()) -> List[Dict[str, float]]:
    """Seeded points in the sampling box, valid for ``exprs``."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        for _ in range(MAX_RESAMPLE):
            p = {nm: rng.uniform(*BOX) for nm in ctx.names}
            try:
                check_point(exprs, p)
                for e in exprs:
                    evaluate(e, p)
            except (PointError, DomainError):
                continue
            out.append(p)
            break
        else:
            raise PointError(f"no valid point after {MAX_RESAMPLE} attempts")
    return out


def assemble(A: VectorValuedForm, point: Mapping[str, float]) -> np.ndarray:
    """Matrix of a vector-valued 1-form; row = output direction, column = input."""
    if A.degree != 1:
        raise ValueError("assemble needs a vector-valued 1-form")
    d = A.ctx.dim
    M = np.zeros((d, d))
    memo: dict = {}
    for b, f in A.comps.items():
        for a, c in f.comps.items():
            M[b, a] = evaluate(c, point, memo)
    return M


def rank(M: np.ndarray, threshold: float = EIGEN_TOL) -> int:
    """Rank by Gaussian elimination with partial pivoting; pivots below
    ``threshold`` (absolute) count as zero."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    A = np.array(M, dtype=float, copy=True)
    rows, cols = A.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = r + int(np.argmax(np.abs(A[r:, c])))
        if abs(A[p, c]) < threshold:
            continue
        if p != r:
            A[[r, p]] = A[[p, r]]
        A[r + 1:] -= np.outer(A[r + 1:, c] / A[r, c], A[r])
        r += 1
    return r


@dataclass
class MatrixCheckReport:
    point: Dict[str, float]
    dim: int
    m: int
    cube_residual: float
    trace: float
    trace_sq: float
    rank_L: int
    rank_L_minus_I: int
    rank_L_plus_I: int
    tolerance: float = EIGEN_TOL

    @property
    def checks(self) -> Dict[str, bool]:
        tol, d, m = self.tolerance, self.dim, self.m
        return {
            "L^3 = L": self.cube_residual <= tol,
            "trace L = 0": abs(self.trace) <= tol,
            "trace L^2 = 2m": abs(self.trace_sq - 2 * m) <= tol,
            "ranks": (self.rank_L == 2 * m and self.rank_L_minus_I == d - m
                      and self.rank_L_plus_I == d - m),
        }

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def multiplicities(self):
        """(zero, +1, -1) eigenvalue multiplicities implied by the ranks."""
        d = self.dim
        return (d - self.rank_L, d - self.rank_L_minus_I, d - self.rank_L_plus_I)

    def to_dict(self):
        out = asdict(self)
        out["checks"] = self.checks
        out["passed"] = self.passed
        return out


def matrix_checks(L: np.ndarray, m: int, point=None, tol: float = EIGEN_TOL) -> MatrixCheckReport:
    d = L.shape[0]
    I = np.eye(d)
    L2 = L @ L
    return MatrixCheckReport(
        point=dict(point or {}), dim=d, m=m,
        cube_residual=float(np.max(np.abs(L2 @ L - L))) if d else 0.0,
        trace=float(np.trace(L)), trace_sq=float(np.trace(L2)),
        rank_L=rank(L, tol), rank_L_minus_I=rank(L - I, tol), rank_L_plus_I=rank(L + I, tol),
        tolerance=tol,
    )


def verify_eigensplitting(c, s, point: Mapping[str, float], L: Optional[VectorValuedForm] = None,
                          tol: float = EIGEN_TOL) -> MatrixCheckReport:
    """Certify the spectrum {-1, 0, +1} of L_{Gamma_v} S1_phi at a jet point."""
    from .connection import deformation

    if L is None:
        L = deformation(c, s)
    check_point(L.components(), point)
    M = assemble(L, point)
    return matrix_checks(M, c.ctx.m, point, tol)


def fd_audit(e: Expr, s: str, points: Sequence[Mapping[str, float]], step: float = FD_STEP) -> float:
    """Max over points of |central difference - d e/d s| / (1 + |d e/d s|)."""
    de = diff(e, s)
    worst = 0.0
    for p in points:
        exact = evaluate(de, p)
        hi = dict(p)
        lo = dict(p)
        hi[s] = p.get(s, 0.0) + step
        lo[s] = p.get(s, 0.0) - step
        approx = (evaluate(e, hi) - evaluate(e, lo)) / (2 * step)
        worst = max(worst, abs(approx - exact) / (1.0 + abs(exact)))
    return worst
