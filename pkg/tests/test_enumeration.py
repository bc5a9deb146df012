import cmath
import math
from fractions import Fraction

import numpy as np
import pytest

from sosdw import enumeration as en
from sosdw.cyclotomic import CyclotomicPoly, ZI, ZOmega
from sosdw.errors import DomainError, PoleError, ResourceError
from sosdw.partition import SpectralParams, z_tilde
from sosdw.states import a_n, c_n
from sosdw.theta import ThetaContext, relative_error, theta

W = en.OMEGA_C


def test_kuperberg_n1_and_generic():
    for n in (1, 2, 3, 4):
        ctx = ThetaContext(p=0.2, eta=0.21 + 0.03j)
        lhs, rhs, _ = en.kuperberg_specialize(n, ctx, 0.31 + 0.12j)
        assert relative_error(lhs, rhs) < 1e-9


def test_kuperberg_t_at_p0():
    ctx = ThetaContext(p=0, eta=0.19 + 0.02j)
    s = cmath.exp(1j * math.pi * ctx.eta)
    _, _, t = en.kuperberg_specialize(2, ctx, 0.3)
    assert abs(t - (s + 1 / s + 2)) < 1e-13


def test_kuperberg_explicit_root():
    ctx = ThetaContext(p=0.1, eta=0.23)
    s = -cmath.exp(1j * math.pi * ctx.eta)
    lhs, rhs, _ = en.kuperberg_specialize(3, ctx, 0.27 - 0.1j, s=s)
    assert relative_error(lhs, rhs) < 1e-9
    with pytest.raises(DomainError):
        en.kuperberg_specialize(2, ctx, 0.3, s=1.0)


def test_dynamical_enumerate_lambda0():
    for n in range(1, 6):
        assert abs(en.dynamical_enumerate(n, 0) - W ** (n * (n + 1) // 2) * a_n(n)) < 1e-9


def test_dynamical_enumerate_vs_brute():
    ctx = ThetaContext(p=0, eta=1 / 3)
    for n in (1, 2, 3):
        lam = 0.37 - 0.21j
        P = SpectralParams([W] * n, [1.0] * n, lam, convention="multiplicative")
        assert relative_error(z_tilde(P, ctx), en.dynamical_enumerate(n, lam)) < 1e-10


def test_dynamical_enumerate_pole():
    with pytest.raises(PoleError):
        en.dynamical_enumerate(2, W ** -3)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_dynamical_enumeration_exact(n):
    lhs, rhs = en.dynamical_enumeration_identity(n)
    assert lhs == rhs
    # the exact state sum also agrees numerically with the closed form
    P = en.exact_state_sum_omega(n)
    lam = 0.23 + 0.17j
    assert relative_error(P(lam) / (1 - lam ** 3) ** (n * n), en.dynamical_enumerate(n, lam)) < 1e-10


def test_exact_cap():
    with pytest.raises(ResourceError):
        en.three_colour_identity(6)
    with pytest.raises(ResourceError):
        en.two_enumeration(6, cap=5)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_three_colour_identity(n):
    lhs, rhs = en.three_colour_identity(n)
    assert lhs == rhs
    # lambda = 0 coefficient of the uncleared identity is A_n
    assert lhs.coeff(0) == ZOmega(a_n(n), 0)


def test_colour_probabilities_n1_n2():
    assert en.colour_probabilities(1).p == (Fraction(1, 2), Fraction(1, 2), Fraction(0))
    for n in (2, 3, 4, 5):
        assert en.colour_probabilities(n) == en.colour_probabilities_enumerated(n)


def test_colour_probabilities_sum_and_limit():
    worst = 0.0
    for n in range(1, 201):
        rep = en.colour_probabilities(n)
        assert sum(rep.p) == 1
        assert sum(rep.K) == (n + 1) ** 2 * rep.A_n
        worst = max(worst, max(abs(float(p) - 1 / 3) * n ** (5 / 3) for p in rep.p))
    assert worst < 1.0


@pytest.mark.parametrize("lam", [0, 0.3 + 0.2j, -1.7j, 2.5])
def test_constraint(lam):
    assert abs(en.constraint_check(lam)) < 1e-10
    assert abs(en.constraint_check(lam, t=3.7 - 1j)) < 1e-10
    if lam == 0:
        assert en.constraint_check(0, normalized=False) == 0


def test_two_enumeration_n2_hand():
    lhs, rhs = en.two_enumeration(2)
    expected = CyclotomicPoly(ZI, [1, -1]) ** 3 * CyclotomicPoly(ZI, [1, 1]) * 2
    assert lhs == rhs == expected


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_two_enumeration(n):
    lhs, rhs = en.two_enumeration(n)
    assert lhs == rhs
    assert lhs.coeff(0) == ZI(2 ** (n * (n - 1) // 2), 0)


def test_two_enumeration_moments():
    assert en.two_enumeration_moments(1) == (0, -1)
    assert en.two_enumeration_moments(2) == (4, 0)
    assert en.two_enumeration_moments(4) == (0, 0)
    for n in range(1, 7):
        assert en.two_enumeration_moments(n) == en.two_enumeration_moments_closed(n)


def test_kuperberg_limit_det():
    assert en.kuperberg_limit_det(2, 1, 3) == Fraction(2, 27)
    assert en.kuperberg_limit_det(2, 2, 3) == Fraction(5, 27)
    assert en.kuperberg_limit_det(1, 1, 3) == Fraction(1, 3)
    with pytest.raises(ValueError):
        en.kuperberg_limit_det(2, 1, 0)


def test_xy_probe():
    for n in (1, 2, 3):
        probe = en.elliptic_XY_probe(n, 0.2)
        assert probe.check_error < 1e-7
        X0, Y0 = en.xy_p0_limit(n)
        near = en.elliptic_XY_probe(n, 1e-9)
        assert abs(near.X - X0) < 1e-6 * abs(X0)
        assert abs(near.Y - Y0) < 1e-6 * abs(Y0)


def test_xy_probe_n1_exact():
    # at n = 1 the fitted model reproduces the single-state value at any lambda
    p = 0.3
    probe = en.elliptic_XY_probe(1, p)
    ctx = ThetaContext(p=p, eta=1 / 3)
    lam = -0.41 + 0.22j
    den = theta(lam * W ** 2, p) * theta(lam * W ** 3, p)
    model = (probe.X * theta(-W * lam * lam, p * p) + probe.Y * lam * theta(-p * W * lam * lam, p * p)) / den
    exact = z_tilde(SpectralParams([W], [1.0], lam, convention="multiplicative"), ctx)
    assert relative_error(model, exact) < 1e-9


def test_colour_table_csv():
    text = en.colour_table_csv(range(1, 4), enumerate_check=True)
    lines = text.splitlines()
    assert lines[0] == "n,A_n,C_n,K0,K1,K2,p0,p1,p2"
    assert lines[1] == "1,1,2,2,2,0,1/2,1/2,0"
    assert len(lines) == 4


def test_limit_det_recovers_counts():
    for n in range(1, 21):
        scale = 3 ** (n * (n + 1) // 2)
        assert en.kuperberg_limit_det(n, 1, 3) * scale == a_n(n)
        assert en.kuperberg_limit_det(n, 2, 3) * scale == c_n(n)


def test_exact_poly_numeric_consistency():
    lhs, _ = en.two_enumeration(3)
    lam = 0.3 - 0.1j
    direct = 0
    from sosdw.states import statistics_table
    tab = statistics_table(3)
    for N, m in zip(tab["n_minus"], tab["m"]):
        direct += 2 ** int(N) * np.prod([(1 + lam) ** m[0], (1 + 1j * lam) ** m[1],
                                         (1 - lam) ** m[2], (1 - 1j * lam) ** m[3]])
    assert abs(lhs(lam) - direct) < 1e-10 * abs(direct)
