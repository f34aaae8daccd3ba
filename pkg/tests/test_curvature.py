"""Curvature operators, their plus/tilde decompositions and the identity checks."""

import pytest

from helpers import connection_from_text, free_system, frame, lemniscate_slices
from jetcurv.applications import lemniscate, random_connection
from jetcurv.connection import build_split_frame
from jetcurv.curvature import (
    _Cache, check_adapted_displays, check_appendix_table, check_theorem2, check_theorem3,
    curvature_report, decompose_plus_tilde, gamma_brackets, jacobi_components, jacobi_curvature,
    jacobi_values, r_gamma, r_h, r_plus_display, r_plus_vertical,
)
from jetcurv.jetcalc import VectorField, VectorValuedForm, vvf_zero
from jetcurv.symcore import ONE, all_zero, diff, is_zero, parse


@pytest.fixture(scope="module")
def lem_frames():
    c = lemniscate()
    return {k: build_split_frame(c, s) for k, s in lemniscate_slices(c).items()}


@pytest.fixture(scope="module")
def rand_frame():
    return frame(random_connection(3, 2))


@pytest.fixture(scope="module")
def quad_frame():
    # n = 2, m = 2, F of degree <= 2 in the derivative coordinates
    return frame(random_connection(2, 2, seed=3, degree=2))


# -- lemniscate values ---------------------------------------------------------


@pytest.mark.parametrize("name, expected", [
    ("t", {(0, 0): 1, (0, 1): 0, (1, 0): 0, (1, 1): 0}),
    ("th", {(0, 0): 0, (0, 1): 0, (1, 0): 0, (1, 1): 4}),
])
def test_lemniscate_jacobi_curvature(lem_frames, name, expected):
    fr = lem_frames[name]
    vals = jacobi_values(fr, jacobi_curvature(fr))
    for (i, j), v in expected.items():
        r = is_zero(vals[(0, i, 0, j)] - v)
        assert r and r.method == "symbolic", (i, j)


@pytest.mark.parametrize("name", ["t", "th"])
def test_lemniscate_r_gamma_vanishes(lem_frames, name):
    r = vvf_zero(r_gamma(lem_frames[name]))
    assert r and r.method == "symbolic"


def test_r_h_vanishes_for_single_equation(lem_frames):
    assert vvf_zero(r_h(lem_frames["t"]))


def test_lemniscate_phi_is_all_plus(lem_frames):
    fr = lem_frames["t"]
    phi = jacobi_curvature(fr)
    tilde, plus = decompose_plus_tilde(fr, phi)
    assert vvf_zero(tilde) and vvf_zero(plus - phi)


# -- free system ---------------------------------------------------------------


def test_free_system_is_flat():
    fr = frame(free_system(2, 2))
    cache = _Cache(fr)
    for A in (r_gamma(fr, cache), r_h(fr, cache), jacobi_curvature(fr, cache), r_plus_vertical(fr, cache)):
        assert vvf_zero(A).method == "symbolic"


def test_decompose_zero():
    fr = frame(free_system(2, 1))
    t, p = decompose_plus_tilde(fr, VectorValuedForm.zero(fr.ctx, 2))
    assert not t.comps and not p.comps


# -- identities on random systems ----------------------------------------------


@pytest.mark.parametrize("which", ["rand", "quad"])
def test_theorems(which, rand_frame, quad_frame):
    fr = rand_frame if which == "rand" else quad_frame
    cache = _Cache(fr)
    assert check_theorem2(fr, cache)
    assert check_theorem3(fr, cache)


def test_appendix_table_on_random_system(rand_frame):
    rows = check_appendix_table(rand_frame)
    assert len(rows) == 11
    assert all(rows.values()), {k: v for k, v in rows.items() if not v}


def test_adapted_displays(rand_frame):
    rows = check_adapted_displays(rand_frame)
    assert all(rows.values())


def test_r_plus_display_agrees_in_adapted_chart(quad_frame):
    assert vvf_zero(r_plus_vertical(quad_frame) - r_plus_display(quad_frame))


def test_gamma_brackets_antisymmetric(rand_frame):
    gb = gamma_brackets(rand_frame)
    for (i, j), U in gb.items():
        assert all_zero((U + gb[(j, i)]).comps.values())


def test_jacobi_components_match_formula(quad_frame):
    fr = quad_frame
    ctx = fr.ctx
    comps = jacobi_components(fr)
    H, G = fr.H, fr.gamma_fields
    for (nu, i, s, j), val in comps.items():
        expected = (sum((H[(r, s, i)] * H[(nu, r, j)] for r in range(ctx.m)), parse("0"))
                    + G[i](H[(nu, s, j)]) - fr.h_fields[s](fr.connection.F(nu, i, j)))
        assert is_zero(val - expected)


def test_report_on_general_slice():
    c = random_connection(3, 2)
    P = lambda t: parse(t, c.ctx.symbols)
    from jetcurv.connection import make_slice
    s = make_slice(c.ctx, [P("x2"), P("x1"), ONE], [P("0"), P("0"), ONE])
    rep = curvature_report(build_split_frame(c, s))
    assert rep.passed, [k for k, v in rep.residuals.items() if not v]
    assert "Theorem 3" in rep.residuals and not any(k.startswith("display") for k in rep.residuals)


# -- ODE reduction -------------------------------------------------------------


def test_ode_jacobi_endomorphism():
    c = connection_from_text(["t"], ["u", "w"], {
        (0, 0, 0): "u*w_t^2 + t*u_t - w", (1, 0, 0): "u_t*w_t + u^2*w_t - 3*t*w"})
    ctx = c.ctx
    fr = frame(c)
    F = [c.F(0, 0, 0), c.F(1, 0, 0)]
    dots = [ctx.d_names[s][0] for s in range(2)]
    # classical connection coefficients with the opposite sign
    G = [[-diff(F[nu], dots[s]) * parse("1/2") for s in range(2)] for nu in range(2)]
    spray = VectorField(ctx, {0: ONE, 1: ctx.yd(0, 0), 2: ctx.yd(1, 0), 3: F[0], 4: F[1]})
    hor = [VectorField(ctx, {1 + s: ONE, 3: -G[0][s], 4: -G[1][s]}) for s in range(2)]
    comps = jacobi_components(fr)
    for nu in range(2):
        for s in range(2):
            classical = (G[0][s] * G[nu][0] + G[1][s] * G[nu][1] - spray(G[nu][s]) - hor[s](F[nu]))
            assert is_zero(comps[(nu, 0, s, 0)] - classical).method == "symbolic"
