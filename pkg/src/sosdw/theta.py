"""Theta functions and the classical identities they satisfy.

Two conventions are used side by side:

* multiplicative: ``theta(x; p) = prod_{j>=0} (1 - p^j x)(1 - p^{j+1}/x)``
* additive: ``[x] = q^{-x/2} theta(q^x; p)`` where ``q^x`` always means
  ``exp(2 pi i eta x)``.

Products are truncated at the smallest ``K`` with ``|p|^K * max(|x|, 1/|x|)``
below the truncation tolerance.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DomainError, NumericError, PoleError

TRUNCATION_TOL = 1e-17
MAX_NOME = 0.9
POLE_TOL = 1e-13

TWO_PI_I = 2j * math.pi


def truncation_bound(p, tol=TRUNCATION_TOL, magnitude=1.0):
    """Smallest K with ``|p|**K * magnitude < tol`` (at least 1)."""
    r = abs(p)
    if r == 0:
        return 1
    if r >= 1:
        raise DomainError(f"nome |p| = {r} is not < 1")
    k = math.ceil((math.log(tol) - math.log(max(magnitude, 1.0))) / math.log(r))
    return max(k, 1)


def theta(x, p, tol=TRUNCATION_TOL):
    """theta(x; p) for scalar or array ``x``.

    ``x = 0`` is only allowed when ``p = 0`` (where theta(0; 0) = 1).
    """
    scalar = np.ndim(x) == 0
    arr = np.asarray(x, dtype=np.complex128)
    flat = arr.ravel()
    p = complex(p)
    if abs(p) > MAX_NOME:
        raise DomainError(f"nome |p| = {abs(p):.3g} exceeds cap {MAX_NOME}")
    if p == 0:
        out = 1.0 - flat
    else:
        mags = np.abs(flat)
        if np.any(mags == 0):
            raise DomainError("theta(x; p) with x = 0 and p != 0")
        if not np.all(np.isfinite(mags)):
            raise NumericError("non-finite theta argument")
        magnitude = float(max(mags.max(), (1.0 / mags).max())) if flat.size else 1.0
        out = kernels.theta_product(flat, p, truncation_bound(p, tol, magnitude))
    if not np.all(np.isfinite(out)):
        raise NumericError("theta product overflowed")
    if scalar:
        return complex(out[0])
    return out.reshape(arr.shape)


def qpoch(p, tol=TRUNCATION_TOL):
    """(p; p)_infinity."""
    p = complex(p)
    if p == 0:
        return 1.0 + 0j
    acc = 1.0 + 0j
    pj = p
    for _ in range(truncation_bound(p, tol)):
        acc *= 1.0 - pj
        pj *= p
    return acc


@dataclass(frozen=True)
class ThetaContext:
    """Fixed modular parameter ``p`` (or ``tau``) and crossing parameter ``eta``.

    ``tau`` is derived from ``p`` on the principal branch when not given;
    any branch works as long as the same one is used for shifts and
    multipliers.
    """

    p: complex
    eta: complex
    tau: complex | None = None
    tolerance: float = TRUNCATION_TOL
    truncation: int = field(init=False)

    def __post_init__(self):
        p = complex(self.p)
        eta = complex(self.eta)
        if not abs(p) < 1:
            raise DomainError(f"nome |p| = {abs(p)} is not < 1")
        if abs(p) > MAX_NOME:
            raise DomainError(f"nome |p| = {abs(p):.3g} exceeds cap {MAX_NOME}")
        tau = self.tau
        if tau is None:
            tau = cmath.log(p) / TWO_PI_I if p != 0 else None
        else:
            tau = complex(tau)
            if tau.imag <= 0:
                raise DomainError("Im(tau) must be positive")
            if abs(cmath.exp(TWO_PI_I * tau) - p) > 1e-12:
                raise DomainError("tau and p disagree")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "truncation", truncation_bound(p, self.tolerance))
        if eta == 0 or abs(theta(self.q, p, self.tolerance)) < POLE_TOL:
            raise DomainError("eta lies in Z + tau Z; [1] vanishes")

    @classmethod
    def from_tau(cls, tau, eta, **kw):
        tau = complex(tau)
        if tau.imag <= 0:
            raise DomainError("Im(tau) must be positive")
        return cls(p=cmath.exp(TWO_PI_I * tau), eta=eta, tau=tau, **kw)

    @property
    def q(self):
        return cmath.exp(TWO_PI_I * self.eta)

    def qpow(self, x):
        """q^x = exp(2 pi i eta x), never a power of a stored q."""
        return np.exp(TWO_PI_I * self.eta * np.asarray(x, dtype=np.complex128))

    def with_p(self, p):
        return ThetaContext(p=p, eta=self.eta, tolerance=self.tolerance)

    def with_eta(self, eta):
        return ThetaContext(p=self.p, eta=eta, tau=self.tau, tolerance=self.tolerance)


def theta_mul(x, ctx):
    if np.any(np.asarray(x) == 0):
        raise DomainError("theta_mul at x = 0")
    return theta(x, ctx.p, ctx.tolerance)


def bracket(x, ctx):
    """[x] = exp(-pi i eta x) * theta(exp(2 pi i eta x); p); vectorised."""
    x = np.asarray(x, dtype=np.complex128)
    phase = TWO_PI_I * ctx.eta * x
    if np.any(np.abs(phase.real) > 700):
        raise NumericError("bracket argument overflows exp")
    out = np.exp(-0.5 * phase) * theta(np.exp(phase), ctx.p, ctx.tolerance)
    if out.ndim == 0:
        return complex(out)
    return out


def bracket_product(xs, ctx):
    xs = np.asarray(xs, dtype=np.complex128).ravel()
    if xs.size == 0:
        return 1.0 + 0j
    return complex(np.prod(bracket(xs, ctx)))


def nonzero(value, name, tol=POLE_TOL):
    """Return ``value`` or raise PoleError if it is (numerically) zero."""
    if abs(value) < tol:
        raise PoleError(name, value)
    return value


def relative_error(a, b):
    scale = max(abs(a), abs(b))
    if scale == 0:
        return 0.0
    return abs(a - b) / scale


def det(m):
    """Determinant of a small dense complex matrix (partially pivoted LU)."""
    m = np.asarray(m, dtype=np.complex128)
    if m.shape == (0, 0):
        return 1.0 + 0j
    d = complex(np.linalg.det(m))
    if not cmath.isfinite(d):
        raise NumericError("non-finite determinant")
    return d


# ---------------------------------------------------------------------------
# identities


def addition_residual(x, y, u, v, ctx, normalized=False):
    """Residual of the three-term addition formula for brackets.

    ``[x+u,x-u,y+v,y-v] - [x+v,x-v,y+u,y-u] - [x+y,x-y,u+v,u-v]``.
    With ``normalized=True`` the residual is divided by the largest term.
    """
    b = bracket(np.array([x + u, x - u, y + v, y - v,
                          x + v, x - v, y + u, y - u,
                          x + y, x - y, u + v, u - v]), ctx)
    t1 = b[0] * b[1] * b[2] * b[3]
    t2 = b[4] * b[5] * b[6] * b[7]
    t3 = b[8] * b[9] * b[10] * b[11]
    res = complex(t1 - t2 - t3)
    if normalized:
        scale = max(abs(t1), abs(t2), abs(t3))
        return res / scale if scale else 0j
    return res


def frobenius_closed_form(x, y, t, ctx):
    """Product side of the additive Frobenius determinant evaluation."""
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    n = len(x)
    diff = bracket(np.subtract.outer(x, y), ctx)
    for i in range(n):
        for j in range(n):
            nonzero(diff[i, j], f"[x_{i + 1} - y_{j + 1}]")
    iu, ju = np.triu_indices(n, 1)
    num = (-1) ** (n * (n - 1) // 2) * bracket(t, ctx) ** (n - 1)
    num *= bracket(x.sum() - y.sum() + t, ctx)
    num *= np.prod(bracket(x[ju] - x[iu], ctx)) * np.prod(bracket(y[ju] - y[iu], ctx))
    return complex(num / np.prod(diff))


def frobenius_det(x, y, t, ctx, convention="additive"):
    """Both sides of Frobenius' elliptic Cauchy determinant.

    Returns ``(lhs, rhs)`` where ``lhs`` is the determinant computed by
    elimination and ``rhs`` is the closed product.
    """
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    n = len(x)
    if len(y) != n:
        raise ValueError("x and y must have equal length")
    if convention == "additive":
        diff = np.subtract.outer(x, y)
        den = bracket(diff, ctx)
        for i in range(n):
            for j in range(n):
                nonzero(den[i, j], f"[x_{i + 1} - y_{j + 1}]")
        lhs = det(bracket(diff + t, ctx) / den)
        return lhs, frobenius_closed_form(x, y, t, ctx)
    if convention == "multiplicative":
        p = ctx.p
        ratio = np.divide.outer(x, y)
        den = theta(ratio, p, ctx.tolerance)
        for i in range(n):
            for j in range(n):
                nonzero(den[i, j], f"theta(x_{i + 1}/y_{j + 1})")
        lhs = det(theta(t * ratio, p, ctx.tolerance) / den)
        X, Y = np.prod(x), np.prod(y)
        iu, ju = np.triu_indices(n, 1)
        num = (-1) ** (n * (n - 1) // 2) * theta(t, p, ctx.tolerance) ** (n - 1)
        num *= Y * theta(t * X / Y, p, ctx.tolerance)
        num *= np.prod(x[ju] * y[ju] * theta(x[iu] / x[ju], p, ctx.tolerance)
                       * theta(y[iu] / y[ju], p, ctx.tolerance))
        rhs = num / np.prod(y[np.newaxis, :] * den)
        return lhs, complex(rhs)
    raise ValueError(f"unknown convention {convention!r}")


def order_norm_error(f, n, t, ctx, samples=20, rng=None, box=0.5):
    """Largest relative violation of the quasi-periodicity of a theta function
    of order n and norm t.

    The two conditions are ``f(x + 1/eta) = (-1)^n f(x)`` and
    ``f(x + tau/eta) = (-1)^n exp(2 pi i eta (t - n x) - pi i tau n) f(x)``,
    tested at ``samples`` random points of the box ``|Re x|, |Im x| <= box``.
    """
    if ctx.tau is None:
        raise DomainError("quasi-periodicity in tau needs p != 0")
    rng = np.random.default_rng(rng)
    eta, tau = ctx.eta, ctx.tau
    sign = (-1) ** n
    worst = 0.0
    for _ in range(samples):
        x = complex(rng.uniform(-box, box), rng.uniform(-box, box))
        fx = f(x)
        worst = max(worst, relative_error(f(x + 1 / eta), sign * fx))
        mult = sign * cmath.exp(TWO_PI_I * eta * (t - n * x) - 1j * math.pi * tau * n)
        worst = max(worst, relative_error(f(x + tau / eta), mult * fx))
    return worst


def order_norm_check(f, n, t, ctx, samples=20, rng=None, tol=1e-9, box=0.5):
    return order_norm_error(f, n, t, ctx, samples, rng, box) <= tol


def theta_decompose_residual(a, x, N, ctx, normalized=False):
    """Residual of splitting theta(ax)/theta(x) into N theta quotients in p^N."""
    if N < 1:
        raise ValueError("N must be a positive integer")
    p, tol = ctx.p, ctx.tolerance
    pN = p ** N
    lhs_den = nonzero(theta(x, p, tol), "theta(x; p)")
    lhs = theta(a * x, p, tol) / lhs_den
    terms = []
    for k in range(N):
        den = nonzero(theta(a * p ** k, pN, tol), f"theta(a p^{k}; p^{N})")
        terms.append(x ** k * theta(a * x ** N * p ** k, pN, tol) / den)
    pref = qpoch(pN, tol) ** 2 * theta(a, p, tol) / (
        qpoch(p, tol) ** 2 * nonzero(theta(x ** N, pN, tol), f"theta(x^{N}; p^{N})"))
    rhs = pref * sum(terms)
    res = complex(lhs - rhs)
    if normalized:
        scale = max(abs(lhs), abs(pref) * max(abs(t) for t in terms))
        return res / scale if scale else 0j
    return res


def ramanujan_partial(a, x, ctx, K):
    """Symmetric partial sum ``sum_{|k|<=K} x^k / (1 - a p^k)``; needs |p| < |x| < 1."""
    p = ctx.p
    if not abs(p) < abs(x) < 1:
        raise DomainError("ramanujan_partial needs |p| < |x| < 1")
    total = 0j
    for k in range(-K, K + 1):
        if a == 0:
            total += x ** k
        elif k >= 0:
            total += x ** k / nonzero(1 - a * p ** k, f"1 - a p^{k}")
        else:
            m = -k
            pm = p ** m
            total += x ** k * pm / nonzero(pm - a, f"1 - a p^{k}")
    return complex(total)


def ramanujan_closed(a, x, ctx):
    """(p;p)^2 theta(ax) / (theta(a) theta(x)), the limit of ramanujan_partial."""
    p, tol = ctx.p, ctx.tolerance
    den = nonzero(theta(a, p, tol), "theta(a)") * nonzero(theta(x, p, tol), "theta(x)")
    return complex(qpoch(p, tol) ** 2 * theta(a * x, p, tol) / den)
