"""Connections, slices, the horizontal coefficients and the split frame."""

import pytest

from helpers import connection_from_text, free_system, frame, lemniscate_slices
from jetcurv.applications import lemniscate, random_connection
from jetcurv.connection import (
    Connection, SliceError, VerificationError, adapted_slice, build_split_frame, check_eigen_equations,
    deformation, gamma_fields, gamma_v, h_fields, horizontal_coefficients, is_adapted, lemma1_residual,
    make_slice, projector_products, s1_phi,
)
from jetcurv.jetcalc import (
    DiffForm, JetContext, VectorField, VectorValuedForm, contact_form, interior, vf_zero, vvf_compose,
    vvf_zero,
)
from jetcurv.symcore import ONE, ZERO, all_zero, diff, is_zero, parse


@pytest.fixture(scope="module")
def lem():
    return lemniscate()


@pytest.fixture(scope="module")
def rand():
    return random_connection(3, 2)


def general_slice(c):
    """A closed non-constant phi with a polynomial transverse field."""
    ctx = c.ctx
    P = lambda t: parse(t, ctx.symbols)
    return make_slice(ctx, [P("x2"), P("x1"), ONE], [ZERO, ZERO, ONE])


# -- Connection and Slice ------------------------------------------------------


def test_connection_is_symmetric_in_lower_indices(lem):
    assert lem.F(0, 1, 0) == lem.F(0, 0, 1)
    assert len(lem.entries) == 3


def test_free_ode_total_derivative():
    c = free_system(1, 1)
    G, = gamma_fields(c)
    ctx = c.ctx
    assert G.comps == {0: ONE, 1: ctx.yd(0, 0)}


def test_slice_normalization():
    ctx = JetContext.create(["a", "b"], ["u"])
    P = lambda t: parse(t, ctx.symbols)
    s = make_slice(ctx, [ONE, ZERO], [P("2"), P("b")])
    assert s.normalized and s.v[0] == ONE
    assert is_zero(s.v[1] - P("b/2")).method == "symbolic"


@pytest.mark.parametrize("phi, v, message", [
    (["b", "0"], ["1", "0"], "not closed"),
    (["1", "0"], ["0", "1"], "vanishes identically"),
    (["1", "0"], ["u", "0"], "base coordinates only"),
    (["1", "0", "0"], ["1", "0"], "components"),
])
def test_slice_errors(phi, v, message):
    ctx = JetContext.create(["a", "b"], ["u"])
    P = lambda t: parse(t, ctx.symbols)
    with pytest.raises(SliceError, match=message):
        make_slice(ctx, [P(p) for p in phi], [P(q) for q in v])


def test_adapted_slice_flags():
    ctx = JetContext.default(2, 1)
    assert is_adapted(adapted_slice(ctx))
    assert not is_adapted(make_slice(ctx, [ZERO, ONE], [ZERO, ONE]))


# -- S1 and the deformation ----------------------------------------------------


def test_s1_for_ode():
    ctx = JetContext.create(["t"], ["y"])
    S = s1_phi(ctx, adapted_slice(ctx))
    expected = VectorValuedForm.from_decomposables(
        ctx, 1, [(contact_form(ctx, 0), VectorField.coordinate(ctx, ctx.iyd(0, 0)))])
    assert vvf_zero(S - expected).method == "symbolic"


@pytest.mark.parametrize("name", ["free", "lemniscate", "random"])
def test_s1_is_nilpotent_and_kills_gamma(name, lem, rand):
    c = {"free": free_system(2, 1), "lemniscate": lem, "random": rand}[name]
    s = adapted_slice(c.ctx)
    S = s1_phi(c.ctx, s)
    assert vvf_zero(vvf_compose(S, S))
    assert vf_zero(S(gamma_v(c, s.v)))


@pytest.mark.parametrize("which", ["lemniscate t", "lemniscate th", "random", "random general"])
def test_lemma1(which, lem, rand):
    if which.startswith("lemniscate"):
        c, s = lem, lemniscate_slices(lem)[which.split()[1]]
    else:
        c = rand
        s = general_slice(c) if which.endswith("general") else adapted_slice(c.ctx)
    assert vvf_zero(lemma1_residual(c, s))


# -- horizontal coefficients ---------------------------------------------------


def test_lemniscate_horizontal_coefficients(lem):
    P = lambda t: parse(t, lem.ctx.symbols)
    sl = lemniscate_slices(lem)
    # adapted formula: H_t = (1/2) dF_tt/dr_t, H_th = dF_tth/dr_t (and t <-> th)
    H = horizontal_coefficients(lem, sl["t"])
    assert H[(0, 0, 0)].is_zero_const
    assert is_zero(H[(0, 0, 1)] - P("r_th/r")).method == "symbolic"
    H = horizontal_coefficients(lem, sl["th"])
    assert is_zero(H[(0, 0, 0)] - P("r_t/r")).method == "symbolic"
    assert is_zero(H[(0, 0, 1)] - P("-r_th/r")).method == "symbolic"


def test_ode_reduction_of_horizontal_coefficients():
    c = connection_from_text(["t"], ["u", "w"], {
        (0, 0, 0): "u*w_t^2 + t*u_t - w", (1, 0, 0): "u_t*w_t + u^2*w_t - 3*t*w"})
    H = horizontal_coefficients(c, adapted_slice(c.ctx))
    for nu in range(2):
        for s in range(2):
            half = diff(c.F(nu, 0, 0), c.ctx.d_names[s][0]) * parse("1/2")
            assert is_zero(H[(nu, s, 0)] - half).method == "symbolic"


def test_general_formula_reduces_to_adapted_display(rand):
    ctx = rand.ctx
    H = horizontal_coefficients(rand, adapted_slice(ctx))
    for nu in range(ctx.m):
        for s in range(ctx.m):
            d = lambda i, j: diff(rand.F(nu, i, j), ctx.d_names[s][0])
            assert is_zero(H[(nu, s, 0)] - d(0, 0) * parse("1/2"))
            for p in range(1, ctx.n):
                assert is_zero(H[(nu, s, p)] - d(0, p))


def test_free_system_has_zero_horizontal_part():
    c = free_system(2, 2)
    H = horizontal_coefficients(c, adapted_slice(c.ctx))
    assert all(e.is_zero_const for e in H.values())


@pytest.mark.parametrize("which", ["free", "lemniscate t", "lemniscate th", "random", "general"])
def test_eigen_equations(which, lem, rand):
    if which == "free":
        c, s = free_system(2, 1), adapted_slice(JetContext.default(2, 1))
    elif which.startswith("lemniscate"):
        c, s = lem, lemniscate_slices(lem)[which.split()[1]]
    else:
        c = rand
        s = general_slice(c) if which == "general" else adapted_slice(c.ctx)
    H = horizontal_coefficients(c, s)
    assert check_eigen_equations(c, s, H)


def test_wrong_coefficients_fail_eigen_check(lem):
    s = lemniscate_slices(lem)["t"]
    H = dict(horizontal_coefficients(lem, s))
    H[(0, 0, 1)] = H[(0, 0, 1)] + ONE
    with pytest.raises(VerificationError):
        check_eigen_equations(lem, s, H)


def test_scaling_by_constant_leaves_coefficients(rand):
    ctx = rand.ctx
    P = lambda t: parse(t, ctx.symbols)
    base = horizontal_coefficients(rand, adapted_slice(ctx, [ONE, P("x2"), ZERO]))
    scaled = horizontal_coefficients(rand, make_slice(ctx, [ONE, ZERO, ZERO], [P("3"), P("3*x2"), ZERO]))
    assert all_zero([base[k] - scaled[k] for k in base]).method == "symbolic"


def test_scaling_by_function_keeps_eigen_equations(lem):
    ctx = lem.ctx
    P = lambda t: parse(t, ctx.symbols)
    s = make_slice(ctx, [ONE, ZERO], [P("1 + th^2"), P("t*th")])
    assert check_eigen_equations(lem, s, horizontal_coefficients(lem, s))


# -- split frame ---------------------------------------------------------------


def test_lemniscate_psi_forms(lem):
    fr = frame(lem, lemniscate_slices(lem)["t"])
    P = lambda t: parse(t, lem.ctx.symbols)
    ctx = lem.ctx
    dt, dth = DiffForm.coordinate(ctx, 0), DiffForm.coordinate(ctx, 1)
    omega = contact_form(ctx, 0)
    # psi_k = dr_k - F_ki dx^i - H_k omega with H_t = 0, H_th = r_th/r
    psi_t = DiffForm.coordinate(ctx, ctx.iyd(0, 0)) + dt * P("r") - dth * P("r_t*r_th/r")
    psi_th = (DiffForm.coordinate(ctx, ctx.iyd(0, 1)) - dt * P("r_t*r_th/r")
              + dth * P("2*r + r_th^2/r") - omega * P("r_th/r"))
    assert all_zero((fr.psi[(0, 0)] - psi_t).components())
    assert all_zero((fr.psi[(0, 1)] - psi_th).components())


def test_free_system_psi_forms():
    c = free_system(2, 1)
    fr = frame(c)
    ctx = c.ctx
    for k in range(2):
        assert (fr.psi[(0, k)] - DiffForm.coordinate(ctx, ctx.iyd(0, k))).is_structurally_zero()


@pytest.mark.parametrize("which", ["lemniscate th", "random", "general"])
def test_frame_duality_and_projectors(which, lem, rand):
    if which == "lemniscate th":
        c, s = lem, lemniscate_slices(lem)["th"]
    else:
        c = rand
        s = general_slice(c) if which == "general" else adapted_slice(c.ctx)
    fr = build_split_frame(c, s)
    assert set(fr.checks) == {"duality B", "duality AB", "h + Gamma + v = id", "v~ + v+ = v"}
    for label, A in projector_products(fr).items():
        assert vvf_zero(A), label


def test_zero_eigenvalue_fields(rand):
    s = adapted_slice(rand.ctx)
    fr = build_split_frame(rand, s)
    L = deformation(rand, s)
    for W in list(fr.W.values()) + list(fr.gamma_fields):
        assert vf_zero(L(W))
    for Hs in h_fields(rand.ctx, fr.H):
        assert vf_zero(L(Hs) + Hs)
    for P in fr.P:
        assert vf_zero(L(P) - P)


def test_projectors_act_on_frame(lem):
    fr = frame(lem, lemniscate_slices(lem)["t"])
    for Hs in fr.h_fields:
        assert vf_zero(fr.h(Hs) - Hs) and vf_zero(fr.gamma(Hs)) and vf_zero(fr.vert(Hs))
    for G in fr.gamma_fields:
        assert vf_zero(fr.gamma(G) - G) and vf_zero(fr.h(G))
    for P in fr.P:
        assert vf_zero(fr.vert_plus(P) - P) and vf_zero(fr.vert_tilde(P))
    for W in fr.W.values():
        assert vf_zero(fr.vert_tilde(W) - W) and vf_zero(fr.vert_plus(W))


def test_bad_frame_rejected(lem):
    from jetcurv.connection import frame_from_coefficients
    s = lemniscate_slices(lem)["t"]
    H = dict(horizontal_coefficients(lem, s))
    H[(0, 0, 0)] = ONE
    # the frame is still dual by construction, but the eigen check catches it
    with pytest.raises(VerificationError):
        check_eigen_equations(lem, s, H)
    assert frame_from_coefficients(lem, s, H, verify=True).checks


def test_interior_of_gamma_v_is_total_derivative(lem):
    s = lemniscate_slices(lem)["t"]
    Gv = gamma_v(lem, s.v)
    P = lambda t: parse(t, lem.ctx.symbols)
    r = DiffForm.function(lem.ctx, P("r"))
    from jetcurv.jetcalc import exterior_d
    assert is_zero(interior(Gv, exterior_d(r)).value - P("r_t")).method == "symbolic"


def test_connection_rejects_out_of_range():
    ctx = JetContext.default(2, 1)
    with pytest.raises((KeyError, IndexError, ValueError)):
        Connection(ctx, {(1, 0, 0): ONE})
