"""Numeric oracle: matrix assembly, rank, the spectrum checks and the FD audit."""

import numpy as np
import pytest

from helpers import free_system, lemniscate_slices
from jetcurv.applications import lemniscate, random_connection
from jetcurv.connection import adapted_slice, deformation
from jetcurv.jetcalc import DiffForm, JetContext, VectorValuedForm, vvf_compose
from jetcurv.oracle import (
    PointError, assemble, check_point, fd_audit, matrix_checks, random_jet_points, rank,
    verify_eigensplitting,
)
from jetcurv.symcore import parse

LEMNISCATE_POINT = {"t": 0.3, "th": 0.7, "r": 1.2, "r_t": 0.4, "r_th": 0.5}


def test_rank_examples():
    assert rank(np.zeros((3, 3))) == 0
    assert rank(np.eye(4)) == 4
    assert rank(np.array([[1.0, 2.0], [2.0, 4.0]])) == 1
    assert rank(np.array([[1e-10, 0.0], [0.0, 1.0]])) == 1


def test_assemble_identity_and_composition():
    ctx = JetContext.default(1, 1)
    p = {"x1": 0.5, "y1": 1.5, "y1_1": -0.25}
    I = VectorValuedForm.identity(ctx)
    assert np.array_equal(assemble(I, p), np.eye(3))
    P = lambda t: parse(t, ctx.symbols)
    A = VectorValuedForm(ctx, 1, {2: DiffForm(ctx, 1, {0: P("y1"), 1: P("x1")})})
    B = VectorValuedForm(ctx, 1, {0: DiffForm(ctx, 1, {2: P("2")}), 1: DiffForm(ctx, 1, {0: P("y1_1")})})
    MA, MB = assemble(A, p), assemble(B, p)
    assert np.allclose(assemble(vvf_compose(A, B), p), MA @ MB)
    assert np.allclose(assemble(A + B, p), MA + MB)


def test_check_point_rejects_small_denominators():
    c = lemniscate()
    L = deformation(c, lemniscate_slices(c)["t"])
    bad = dict(LEMNISCATE_POINT, r=1e-5)
    with pytest.raises(PointError):
        check_point(L.components(), bad)


def test_random_points_are_reproducible():
    ctx = lemniscate().ctx
    a = random_jet_points(ctx, 3, 0x5EED)
    b = random_jet_points(ctx, 3, 0x5EED)
    assert a == b and len(a) == 3 and set(a[0]) == set(ctx.names)


def test_lemniscate_point_passes_all_checks():
    c = lemniscate()
    rep = verify_eigensplitting(c, lemniscate_slices(c)["t"], LEMNISCATE_POINT)
    assert rep.passed, rep.to_dict()
    assert rep.dim == 5 and rep.multiplicities() == (3, 1, 1)


def test_free_system_spectrum():
    c = free_system(2, 1)
    rep = verify_eigensplitting(c, adapted_slice(c.ctx), {n: 0.7 for n in c.ctx.names})
    assert rep.passed and rep.rank_L == 2 and abs(rep.trace_sq - 2) < 1e-12


def test_random_cubic_system_multiplicities():
    c = random_connection(3, 2)
    s = adapted_slice(c.ctx)
    L = deformation(c, s)
    for p in random_jet_points(c.ctx, 3, 0x5EED, L.components()):
        rep = verify_eigensplitting(c, s, p, L)
        assert rep.passed and rep.dim == 11 and rep.multiplicities() == (7, 2, 2)


def test_matrix_checks_flag_failures():
    rep = matrix_checks(np.eye(3), 1)
    assert rep.checks["L^3 = L"] and not rep.checks["trace L = 0"] and not rep.passed
    rep = matrix_checks(np.diag([1.0, -1.0, 0.5]), 1)
    assert not rep.checks["L^3 = L"]


def test_report_serializes():
    rep = matrix_checks(np.diag([1.0, -1.0, 0.0]), 1)
    d = rep.to_dict()
    assert d["passed"] is True and d["checks"]["ranks"] is True


def test_fd_audit_exact_derivative():
    ctx = JetContext.default(1, 1)
    e = parse("sin(x1)*y1^2 + exp(y1_1)", ctx.symbols)
    pts = random_jet_points(ctx, 4, 1)
    assert fd_audit(e, "y1", pts) < 1e-7
