"""Two-tier zero testing: canonical form first, then random numeric probes."""

from __future__ import annotations

import random
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .expr import DomainError, Expr, denominators, evaluate, sympify, term_values

DEFAULT_SEED = 0x5EED
DEFAULT_PROBES = 8
BOX = (0.25, 1.75)
DENOM_GUARD = 1e-3
NUM_TOL = 1e-9
MAX_RESAMPLE = 10

_tolerance: ContextVar = ContextVar("numeric_tolerance", default=NUM_TOL)


def current_tolerance() -> float:
    return _tolerance.get()


@contextmanager
def numeric_tolerance(tol: float):
    """Temporarily replace the relative tolerance of the numeric tier."""
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    token = _tolerance.set(float(tol))
    try:
        yield
    finally:
        _tolerance.reset(token)


@dataclass(frozen=True)
class ZeroResult:
    value: bool
    method: str  # "symbolic" or "numeric"
    residual: float = 0.0
    probes: int = 0
    tolerance: float = 0.0  # relative tolerance of a numeric verdict; 0 when exact

    def __bool__(self):
        return self.value


class SamplingError(RuntimeError):
    pass


def sample_point(names: Iterable[str], rng: random.Random, exprs: Sequence[Expr] = ()) -> dict:
    """Draw a point in the sampling box where every denominator of ``exprs``
    stays away from zero."""
    names = sorted(set(names))
    dens = []
    for e in exprs:
        dens.extend(denominators(e))
    for _ in range(MAX_RESAMPLE):
        p = {n: rng.uniform(*BOX) for n in names}
        try:
            if all(abs(evaluate(d, p)) >= DENOM_GUARD for d in dens):
                return p
        except DomainError:
            continue
    raise SamplingError("could not find a valid sample point after "
                        f"{MAX_RESAMPLE} attempts")


def numeric_residual(e: Expr, point: dict) -> tuple:
    """Return (|e(p)|, allowed) with allowed = tol * (1 + max |monomial|)."""
    vals = term_values(e, point)
    scale = max((abs(v) for v in vals), default=0.0)
    return abs(sum(vals)), current_tolerance() * (1.0 + scale)


def is_zero(e, probe_points: int = DEFAULT_PROBES, seed: Optional[int] = DEFAULT_SEED,
            rng: Optional[random.Random] = None) -> ZeroResult:
    """Decide whether ``e`` vanishes identically.

    Returns a truthy/falsy :class:`ZeroResult` carrying the method used.
    """
    if probe_points < 1:
        raise ValueError("probe_points must be >= 1")
    e = sympify(e)
    if e.is_zero_const:
        return ZeroResult(True, "symbolic")
    if not e.free_symbols:
        return ZeroResult(False, "symbolic", abs(float(e.value)))
    rng = rng or random.Random(seed)
    worst = 0.0
    for _ in range(probe_points):
        for attempt in range(MAX_RESAMPLE):
            p = sample_point(e.free_symbols, rng, [e])
            try:
                r, allowed = numeric_residual(e, p)
                break
            except DomainError:
                if attempt == MAX_RESAMPLE - 1:
                    raise
        worst = max(worst, r)
        if r > allowed:
            return ZeroResult(False, "numeric", worst, probe_points, current_tolerance())
    return ZeroResult(True, "numeric", worst, probe_points, current_tolerance())


def all_zero(exprs: Iterable, probe_points: int = DEFAULT_PROBES,
             seed: Optional[int] = DEFAULT_SEED) -> ZeroResult:
    """Combined zero test over many expressions; symbolic only if all are."""
    method = "symbolic"
    worst = 0.0
    rng = random.Random(seed)
    for e in exprs:
        r = is_zero(e, probe_points, rng=rng)
        worst = max(worst, r.residual)
        if not r:
            return ZeroResult(False, r.method, worst, probe_points, r.tolerance)
        if r.method == "numeric":
            method = "numeric"
    if method == "numeric":
        return ZeroResult(True, method, worst, probe_points, current_tolerance())
    return ZeroResult(True, method, worst, 0)
