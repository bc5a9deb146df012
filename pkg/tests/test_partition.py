import cmath

import numpy as np
import pytest

from frozen import PARTITION
from oracle_mp import POINTS
from sosdw.errors import DomainError, PoleError
from sosdw.partition import (EVALUATORS, SpectralParams, factored_terms, ik_terms, lambda_structure_check,
                             recursion_check, sample_params, symmetry_check, variable_structure_check,
                             z_bruteforce, z_factored_sum, z_free_fermion, z_ik_sum, z_laurent,
                             z_root_of_unity, z_sixvertex_ik, z_tilde, z_weightfunction)
from sosdw.theta import ThetaContext, bracket, relative_error, theta

GAMMA = 0.17 - 0.08j


def frozen_case(n):
    pt = POINTS[n]
    ctx = ThetaContext(p=pt["p"], eta=pt["eta"])
    return SpectralParams(pt["x"], pt["y"], pt["lam"], GAMMA), ctx


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def generic_ctx():
    return ThetaContext(p=0.2 + 0.1j, eta=0.27 + 0.02j)


@pytest.mark.parametrize("n", sorted(PARTITION))
@pytest.mark.parametrize("method", sorted(EVALUATORS))
def test_frozen_oracle(n, method):
    P, ctx = frozen_case(n)
    assert relative_error(EVALUATORS[method](P, ctx), PARTITION[n]) < 1e-11


def test_ik_frobenius_path_frozen():
    for n in (2, 3):
        P, ctx = frozen_case(n)
        assert relative_error(z_ik_sum(P, ctx, det_path="frobenius"), PARTITION[n]) < 1e-11


def test_n1_closed_form():
    ctx = generic_ctx()
    P = SpectralParams([0.3 + 0.1j], [-0.2 + 0.05j], 0.41 - 0.07j, GAMMA)
    expected = bracket(P.lam - P.x[0] + P.y[0], ctx) / bracket(P.lam, ctx)
    for f in EVALUATORS.values():
        assert relative_error(f(P, ctx), expected) < 1e-13


def test_n0_is_one():
    ctx = generic_ctx()
    P = SpectralParams([], [], 0.3, GAMMA)
    for f in EVALUATORS.values():
        assert f(P, ctx) == 1


def test_n2_matches_explicit_two_state_sum():
    ctx = generic_ctx()
    P = SpectralParams([0.3 + 0.1j, -0.2], [0.1j, 0.45], 0.33 + 0.1j)
    x, y, lam = P.x, P.y, P.lam

    def b(v):
        return bracket(v, ctx)

    b1 = b(1)
    u = np.subtract.outer(x, y)
    s1 = (b(lam - u[0, 0]) / b(lam)) * (b(u[0, 1]) * b(lam + 2) / (b1 * b(lam + 1))) \
        * (b(u[1, 0]) * b(lam) / (b1 * b(lam + 1))) * (b(lam - u[1, 1]) / b(lam))
    s2 = (b(u[0, 0] + 1) / b1) * (b(lam + 1 - u[0, 1]) / b(lam + 1)) \
        * (b(lam + 1 - u[1, 0]) / b(lam + 1)) * (b(u[1, 1] + 1) / b1)
    assert relative_error(z_bruteforce(P, ctx), s1 + s2) < 1e-13


def test_z_tilde_multiplicative_n1():
    ctx = generic_ctx()
    P = SpectralParams([0.3 + 0.1j], [-0.2 + 0.05j], 0.41 - 0.07j)
    M = P.to_multiplicative(ctx)
    x, y, lam = M.x[0], M.y[0], M.lam
    expected = x * theta(lam * y / x, ctx.p) / theta(lam, ctx.p)
    assert relative_error(z_tilde(M, ctx), expected) < 1e-12
    assert relative_error(z_tilde(P, ctx), expected) < 1e-12


def test_z_tilde_period_invariance(rng):
    ctx = generic_ctx()
    P = sample_params(3, ctx, rng, with_gamma=False)
    x = P.x.copy()
    x[1] += 1 / ctx.eta
    assert relative_error(z_tilde(P.replace(x=x), ctx), z_tilde(P, ctx)) < 1e-9


def test_gamma_independence(rng):
    ctx = generic_ctx()
    P = sample_params(3, ctx, rng)
    a = z_ik_sum(P, ctx)
    b = z_ik_sum(P.replace(gamma=0.29 + 0.04j), ctx)
    assert relative_error(a, b) < 1e-9
    assert relative_error(z_factored_sum(P.replace(gamma=-0.31 + 0.1j), ctx), a) < 1e-9


def test_ik_terms_and_factored_terms_agree(rng):
    ctx = generic_ctx()
    P = sample_params(3, ctx, rng)
    ik = np.array([t for _, t in ik_terms(P, ctx)])
    fac = factored_terms(P, ctx)
    assert len(fac) == 8
    assert np.allclose(ik, fac, rtol=1e-10, atol=1e-12 * np.abs(fac).max())
    assert [S for S, _ in ik_terms(P.replace(x=P.x[:2], y=P.y[:2]), ctx)] == [(), (0,), (1,), (0, 1)]


def test_factored_numpy_path_matches(rng, monkeypatch):
    from sosdw import kernels
    ctx = generic_ctx()
    P = sample_params(5, ctx, rng)
    fast = z_factored_sum(P, ctx)
    monkeypatch.setattr(kernels, "NUMBA_ENABLED", False)
    assert relative_error(z_factored_sum(P, ctx), fast) < 1e-12


def test_weightfunction_trig():
    ctx = ThetaContext(p=0.2j, eta=0.13)
    P = SpectralParams([0.3, -0.1 + 0.2j, 0.4j], [0.05, 0.5, -0.3], 0.21 + 0.1j)
    assert relative_error(z_weightfunction(P, ctx), z_bruteforce(P, ctx)) < 1e-9


def test_pole_errors_name_factor():
    ctx = generic_ctx()
    with pytest.raises(PoleError, match="lambda"):
        z_bruteforce(SpectralParams([0.1, 0.2], [0.3, 0.4], 0.0), ctx)
    with pytest.raises(PoleError, match=r"x_1 - x_2"):
        z_factored_sum(SpectralParams([0.1, 0.1], [0.3, 0.4], 0.3, GAMMA), ctx)
    with pytest.raises(ValueError):
        z_ik_sum(SpectralParams([0.1], [0.3], 0.3), ctx)


def test_root_of_unity_vs_brute(rng):
    for N in (3, 4):
        ctx = ThetaContext(p=0.2 + 0.1j, eta=1 / N)
        for n in (2, 3):
            P = sample_params(n, ctx, rng)
            ref = z_tilde(P, ctx)
            assert relative_error(z_root_of_unity(P, N, ctx), ref) < 1e-8
            assert relative_error(z_root_of_unity(P, N, ctx, drop_k=1), ref) < 1e-8


def test_root_of_unity_domain():
    P = SpectralParams([0.1], [0.2], 0.3, GAMMA)
    with pytest.raises(DomainError):
        z_root_of_unity(P, 3, generic_ctx())


def test_free_fermion(rng):
    ctx = ThetaContext(p=0.25 - 0.1j, eta=0.5)
    for n in (1, 2, 3):
        P = sample_params(n, ctx, rng)
        ff = z_free_fermion(P, ctx)
        assert relative_error(ff, z_tilde(P, ctx)) < 1e-9
        assert relative_error(z_root_of_unity(P, 2, ctx), ff) < 1e-9


def test_free_fermion_explicit_zero():
    ctx = ThetaContext(p=0.25, eta=0.5)
    M = SpectralParams([0.7 + 0.2j, -0.7 - 0.2j], [1.1, 0.6j], 0.4 + 0.3j, convention="multiplicative")
    assert abs(z_free_fermion(M, ctx)) < 1e-15


def test_laurent(rng):
    ctx = ThetaContext(p=0.05, eta=0.27 + 0.02j)
    M = SpectralParams([1.1 * cmath.exp(0.3j), 0.9 * cmath.exp(-1.1j)], [1.05, 0.95 * cmath.exp(2j)],
                       0.35 * cmath.exp(0.4j), 0.6 + 0.2j, "multiplicative")
    ref = z_tilde(M, ctx)
    assert relative_error(z_laurent(M, ctx, K=40), ref) < 1e-8
    assert relative_error(z_laurent(M, ctx, K=0), ref) > 1e-3
    errs = [relative_error(z_laurent(M, ctx, K=K), ref) for K in (2, 4, 8, 16)]
    assert errs == sorted(errs, reverse=True)


def test_laurent_domain():
    ctx = ThetaContext(p=0.05, eta=0.27)
    M = SpectralParams([1.0, 1.2], [1.0, 0.9], 1.5, 0.5, "multiplicative")
    with pytest.raises(DomainError):
        z_laurent(M, ctx)


@pytest.mark.parametrize("which", ["x1+1=y1", "x1=y1"])
def test_recursion(which, rng):
    ctx = generic_ctx()
    for n in (1, 2, 3, 4):
        P = sample_params(n, ctx, rng, with_gamma=False)
        lhs, rhs = recursion_check(P, ctx, which)
        assert relative_error(lhs, rhs) < 1e-9


@pytest.mark.parametrize("method", sorted(EVALUATORS))
def test_symmetry_all_evaluators(method, rng):
    ctx = generic_ctx()
    P = sample_params(3, ctx, rng)
    assert symmetry_check(P, ctx, trials=3, rng=rng, evaluator=EVALUATORS[method], tol=1e-9)


def test_theta_structure(rng):
    ctx = generic_ctx()
    P = sample_params(2, ctx, rng, with_gamma=False)
    assert variable_structure_check(P, ctx, "x", 0, rng=rng)
    assert variable_structure_check(P, ctx, "y", 1, rng=rng)
    assert lambda_structure_check(P, ctx, rng=rng)
    ctx2 = ThetaContext(p=0.2 + 0.1j, eta=0.5)
    P3 = sample_params(3, ctx2, rng, with_gamma=False)
    assert lambda_structure_check(P3, ctx2, rng=rng)


def test_sixvertex_limit():
    ctx = ThetaContext(p=0, eta=0.23)
    P = SpectralParams([0.31 + 0.05j], [-0.12], 0.3)
    expected = cmath.exp(1j * cmath.pi * ctx.eta * (P.x[0] - P.y[0]))
    assert relative_error(z_sixvertex_ik(P, ctx), expected) < 1e-13
    P2 = SpectralParams([0.31 + 0.05j, -0.2 + 0.1j], [-0.12, 0.27 - 0.03j], 0.3 + 40j, 0.2)
    lim = z_sixvertex_ik(P2, ctx)
    assert relative_error(z_weightfunction(P2, ctx), lim) < 1e-6
    assert relative_error(z_ik_sum(P2, ctx), lim) < 1e-6
    assert relative_error(z_ik_sum(P2.replace(gamma=-0.35 + 0.1j), ctx), lim) < 1e-6
