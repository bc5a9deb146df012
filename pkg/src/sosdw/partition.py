"""Domain-wall partition function of the 8VSOS model, evaluated several ways.

Additive evaluators return ``Z_n(x; y; lambda)``. Multiplicative evaluators
return the translation-invariant ``Zt_n = q^{n(|x|+|y|)/2} Z_n`` written in
the variables ``q^x``, ``q^y``, ``q^lambda``.

=====================  ==========================  ================
evaluator              terms                       convention
=====================  ==========================  ================
z_bruteforce           A_n states                  additive
z_weightfunction       n! permutations             additive
z_ik_sum               2^n determinants            additive
z_factored_sum         2^n products                additive
z_root_of_unity        N (or N-1) determinants     multiplicative
z_laurent              2K+1 determinants           multiplicative
z_free_fermion         one product (q = -1)        multiplicative
z_sixvertex_ik         one determinant (p = 0)     additive, lambda -> oo
=====================  ==========================  ================
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import DomainError, NumericError, PoleError
from .states import (DEFAULT_STATE_CAP, MINUS_ONE, MM, MP_MP, PLUS_ONE, PM_PM, PP,
                     block_types, states_array)
from .theta import (POLE_TOL, TWO_PI_I, bracket, det, frobenius_closed_form, nonzero,
                    order_norm_error, qpoch, relative_error, theta)

SAMPLE_POLE_TOL = 1e-6


def _binom2(n):
    return n * (n - 1) // 2


@dataclass(frozen=True, eq=False)
class SpectralParams:
    """Spectral parameters ``x``, ``y``, dynamical ``lam`` and optional ``gamma``."""

    x: np.ndarray
    y: np.ndarray
    lam: complex
    gamma: complex | None = None
    convention: str = "additive"

    def __post_init__(self):
        x = np.array(self.x, dtype=np.complex128).ravel()
        y = np.array(self.y, dtype=np.complex128).ravel()
        if x.shape != y.shape:
            raise ValueError("x and y must have the same length")
        if self.convention not in ("additive", "multiplicative"):
            raise ValueError(f"unknown convention {self.convention!r}")
        if self.convention == "multiplicative" and (np.any(x == 0) or np.any(y == 0) or self.lam == 0):
            raise DomainError("multiplicative parameters must be nonzero")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "lam", complex(self.lam))
        if self.gamma is not None:
            object.__setattr__(self, "gamma", complex(self.gamma))

    @property
    def n(self):
        return len(self.x)

    @property
    def additive(self):
        return self.convention == "additive"

    def to_multiplicative(self, ctx):
        if not self.additive:
            return self
        g = None if self.gamma is None else complex(ctx.qpow(self.gamma))
        return SpectralParams(ctx.qpow(self.x), ctx.qpow(self.y), complex(ctx.qpow(self.lam)), g,
                              "multiplicative")

    def to_additive(self, ctx):
        """Additive preimage; any branch of the logarithm is acceptable."""
        if self.additive:
            return self

        def log(z):
            return np.log(np.asarray(z, dtype=np.complex128)) / (TWO_PI_I * ctx.eta)

        g = None if self.gamma is None else complex(log(self.gamma))
        return SpectralParams(log(self.x), log(self.y), complex(log(self.lam)), g, "additive")

    def replace(self, **kw):
        return replace(self, **kw)

    def as_dict(self):
        def cx(z):
            return {"re": float(z.real), "im": float(z.imag)}

        d = {"convention": self.convention, "x": [cx(v) for v in self.x],
             "y": [cx(v) for v in self.y], "lambda": cx(self.lam)}
        if self.gamma is not None:
            d["gamma"] = cx(self.gamma)
        return d


def _require(params, convention, ctx):
    if convention == "additive":
        return params.to_additive(ctx)
    return params.to_multiplicative(ctx)


def _gamma(params):
    if params.gamma is None:
        raise ValueError("this evaluator needs a gamma parameter")
    return params.gamma


# ---------------------------------------------------------------------------
# Boltzmann weights


def boltzmann_weight(kind, lam, u, ctx):
    """R weight of the given block type code at dynamical parameter ``lam``."""
    b1 = nonzero(bracket(1, ctx), "[1]")
    if kind in (PP, MM):
        return bracket(u + 1, ctx) / b1
    bl = nonzero(bracket(lam, ctx), "[lambda]")
    if kind == PM_PM:
        return bracket(u, ctx) * bracket(lam + 1, ctx) / (b1 * bl)
    if kind == MP_MP:
        return bracket(u, ctx) * bracket(lam - 1, ctx) / (b1 * bl)
    if kind == MINUS_ONE:
        return bracket(lam + u, ctx) / bl
    if kind == PLUS_ONE:
        return bracket(lam - u, ctx) / bl
    raise ValueError(f"unknown block type {kind}")


@lru_cache(maxsize=None)
def _brute_index(n):
    """Flat index of every (state, block) into the weight table, plus used heights."""
    st = states_array(n, cap=None).astype(np.int64)
    types = block_types(st).astype(np.int64)
    a = st[:, :-1, :-1]
    i, j = np.indices((n, n))
    idx = ((types * (n + 1) + a) * n + i) * n + j
    heights = tuple(sorted(set(a[types >= PM_PM].tolist())))
    idx = idx.reshape(len(st), n * n).astype(np.int32)
    idx.setflags(write=False)
    return idx, heights


def weight_table(params, ctx):
    """W[type, a, i, j] = R_type(lambda + a, x_i - y_j), flattened."""
    n = params.n
    x, y, lam = params.x, params.y, params.lam
    u = np.subtract.outer(x, y)
    a = np.arange(n + 1)
    la = lam + a
    # one vectorised bracket evaluation for everything
    args = np.concatenate([
        [1.0], lam + np.arange(-1, n + 2),
        u.ravel(), (u + 1).ravel(),
        np.add.outer(la, u).ravel(), np.subtract.outer(la, u).ravel(),
    ])
    b = bracket(args, ctx)
    b1 = nonzero(b[0], "[1]")
    blam = b[1:n + 4]  # [lam + a] for a = -1 .. n+1
    off = n + 4
    bu = b[off:off + n * n].reshape(n, n)
    off += n * n
    bu1 = b[off:off + n * n].reshape(n, n)
    off += n * n
    bplus = b[off:off + (n + 1) * n * n].reshape(n + 1, n, n)
    off += (n + 1) * n * n
    bminus = b[off:].reshape(n + 1, n, n)
    bl0 = blam[1:n + 2]  # [lam + a], a = 0..n
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_l = 1.0 / bl0
    W = np.empty((6, n + 1, n, n), dtype=np.complex128)
    W[PP] = W[MM] = (bu1 / b1)[np.newaxis]
    W[PM_PM] = (bu / b1)[np.newaxis] * (blam[2:n + 3] * inv_l)[:, None, None]
    W[MP_MP] = (bu / b1)[np.newaxis] * (blam[0:n + 1] * inv_l)[:, None, None]
    W[MINUS_ONE] = bplus * inv_l[:, None, None]
    W[PLUS_ONE] = bminus * inv_l[:, None, None]
    return W, bl0


def z_bruteforce(params, ctx, cap=DEFAULT_STATE_CAP):
    """Sum over all states of the product of local weights."""
    params = _require(params, "additive", ctx)
    n = params.n
    if n == 0:
        return 1.0 + 0j
    if cap is not None and n > cap:
        states_array(n, cap=cap)  # raises ResourceError
    idx, heights = _brute_index(n)
    W, bl0 = weight_table(params, ctx)
    for a in heights:
        nonzero(bl0[a], f"[lambda + {a}]")
    return kernels.state_sum(W.ravel(), idx)


def z_tilde(params, ctx, evaluator=None):
    """Translation-invariant partition function q^{n(|x|+|y|)/2} Z_n.

    Multiplicative input is mapped to an additive preimage first; the
    result does not depend on the branch chosen.
    """
    add = _require(params, "additive", ctx)
    evaluator = evaluator or z_bruteforce
    shift = complex(ctx.qpow(add.n * (add.x.sum() + add.y.sum()) / 2))
    return shift * evaluator(add, ctx)


# ---------------------------------------------------------------------------
# permutation sum


@lru_cache(maxsize=None)
def _perms(n):
    arr = np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)
    arr.setflags(write=False)
    return arr


def _weightfunction_parts(params, ctx):
    n = params.n
    x, y, lam = params.x, params.y, params.lam
    yy = np.subtract.outer(y, y)
    yx = np.subtract.outer(y, x)
    jj = np.arange(1, n + 1)
    args = np.concatenate([[1.0], lam + jj - 1, yy.ravel(), (yy + 1).ravel(), yx.ravel(),
                           (yx - 1).ravel(), (yx + lam + n - jj[np.newaxis, :]).ravel()])
    b = bracket(args, ctx)
    b1 = nonzero(b[0], "[1]")
    blam = b[1:n + 1]
    for k in range(n):
        nonzero(blam[k], f"[lambda + {k}]")
    off = n + 1
    byy, byy1, byx, byx1, bdiag = (b[off + r * n * n: off + (r + 1) * n * n].reshape(n, n)
                                   for r in range(5))
    for a in range(n):
        for c in range(n):
            nonzero(byx[a, c], f"[y_{a + 1} - x_{c + 1}]")
            if a != c:
                nonzero(byy[a, c], f"[y_{a + 1} - y_{c + 1}]")
    pair = np.ones((n, n), dtype=np.complex128)
    off_diag = ~np.eye(n, dtype=bool)
    pair[off_diag] = byy1[off_diag] / byy[off_diag]
    cross = byx1 / byx
    diag = bdiag / byx
    pref = np.prod(byx) / (b1 ** (n * (n - 1)) * np.prod(blam))
    return pref, pair, cross, diag


def z_weightfunction(params, ctx):
    """n!-term elliptic weight function representation."""
    params = _require(params, "additive", ctx)
    n = params.n
    if n == 0:
        return 1.0 + 0j
    pref, pair, cross, diag = _weightfunction_parts(params, ctx)
    return complex(pref * kernels.perm_sum(_perms(n), pair, cross, diag))


def weightfunction_l1(params, ctx):
    """Sum of |term| over the n! permutation terms."""
    params = _require(params, "additive", ctx)
    n = params.n
    if n == 0:
        return 1.0
    pref, pair, cross, diag = _weightfunction_parts(params, ctx)
    absd = [np.abs(m).astype(np.complex128) for m in (pair, cross, diag)]
    return float(abs(pref) * kernels.perm_sum(_perms(n), *absd).real)


# ---------------------------------------------------------------------------
# 2^n determinant sums


@lru_cache(maxsize=None)
def _subsets(n):
    masks = ((np.arange(2 ** n)[:, None] >> np.arange(n)) & 1).astype(bool)
    masks.setflags(write=False)
    return masks


def ik_terms(params, ctx, det_path="direct"):
    """Per-subset contributions of the 2^n determinant sum (prefactor included).

    Returns a list of ``(S, term)`` with ``S`` a tuple of 0-based indices.
    ``det_path`` is "direct" (elimination) or "frobenius" (closed form).
    """
    params = _require(params, "additive", ctx)
    terms = _ik_term_array(params, ctx, det_path)
    return [(tuple(np.flatnonzero(mk).tolist()), complex(t))
            for mk, t in zip(_subsets(params.n), terms)]


def _ik_pieces(params, ctx, with_mats=True):
    """Scalar factor per subset and (optionally) the 2^n matrices."""
    n = params.n
    x, y, lam, g = params.x, params.y, params.lam, _gamma(params)
    d = x.sum() - y.sum()
    k = np.arange(n + 1)
    iu, ju, _ = _pair_index(n)
    u = np.subtract.outer(x, y).ravel()
    nn = n * n
    args = np.concatenate([[1.0, g, d + lam + g + n], lam + n - k, lam + g + n - k,
                           x[iu] - x[ju], y[iu] - y[ju], u, u + 1, u + g, u + 1 + g])
    b = bracket(args, ctx)
    b1, bg, bden = b[0], nonzero(b[1], "[gamma]"), nonzero(b[2], "[|x| - |y| + lambda + gamma + n]")
    blk = b[3:n + 4]
    blgk = b[n + 4:2 * n + 5]
    off = 2 * n + 5
    m = len(iu)
    bxx, byy = b[off:off + m], b[off + m:off + 2 * m]
    off += 2 * m
    bu, bu1, bug, bu1g = (b[off + r * nn:off + (r + 1) * nn].reshape(n, n) for r in range(4))
    for j in range(n + 1):
        nonzero(blk[j], f"[lambda + {n - j}]")
    for r, (i, j) in enumerate(zip(iu, ju)):
        nonzero(bxx[r], f"[x_{i + 1} - x_{j + 1}]")
        nonzero(byy[r], f"[y_{i + 1} - y_{j + 1}]")
    masks = _subsets(n)
    sizes = masks.sum(axis=1)
    pref = (-1) ** _binom2(n) * blk[0] / (b1 ** nn * bg ** n * bden)
    pref *= np.prod(bu * bu1) / (np.prod(bxx) * np.prod(byy))
    scal = pref * np.where(sizes % 2, -1.0, 1.0) * (blgk[sizes] / blk[sizes])
    if not with_mats:
        return scal, None
    # [x^S_i - y_j] takes one of two values per (i, j)
    bad = np.argwhere(np.minimum(np.abs(bu), np.abs(bu1)) < POLE_TOL)
    if len(bad):
        i, j = bad[0]
        raise PoleError(f"[x^S_{i + 1} - y_{j + 1}]")
    return scal, np.where(masks[:, :, None], bu1g / bu1, bug / bu)


def _ik_term_array(params, ctx, det_path):
    if det_path not in ("direct", "frobenius"):
        raise ValueError(f"unknown det_path {det_path!r}")
    scal, mats = _ik_pieces(params, ctx, with_mats=det_path == "direct")
    if det_path == "direct":
        dets = np.linalg.det(mats)
        if not np.all(np.isfinite(dets)):
            raise NumericError("non-finite determinant")
    else:
        x, y, g = params.x, params.y, _gamma(params)
        dets = np.array([frobenius_closed_form(x + mk, y, g, ctx) for mk in _subsets(params.n)])
    return scal * dets


def ik_hadamard_l1(params, ctx):
    """Sum over subsets of |scalar| times the Hadamard bound of the matrix;
    bounds the rounding error of the direct determinant path."""
    params = _require(params, "additive", ctx)
    if params.n == 0:
        return 1.0
    scal, mats = _ik_pieces(params, ctx)
    return float(np.sum(np.abs(scal) * np.prod(np.linalg.norm(mats, axis=2), axis=1)))


def z_ik_sum(params, ctx, det_path="direct"):
    """Sum over subsets S of determinants in the shifted variables x^S."""
    params = _require(params, "additive", ctx)
    if params.n == 0:
        return 1.0 + 0j
    return complex(_ik_term_array(params, ctx, det_path).sum())


def factored_terms(params, ctx):
    """The 2^n fully factored addends (prefactor included), as an array
    aligned with ``_subsets(n)``."""
    params = _require(params, "additive", ctx)
    n = params.n
    x, y, lam, g = params.x, params.y, params.lam, _gamma(params)
    d = x.sum() - y.sum()
    k = np.arange(n + 1)
    xx = np.subtract.outer(x, x)
    xy = np.subtract.outer(x, y)
    # one batched bracket call; every pole check below reads from it
    args = np.concatenate([[1.0, g, d + lam + g + n], lam + n - k, lam + g + n - k,
                           d + g + k, xx.ravel(), (xx + 1).ravel(), xy.ravel(), (xy + 1).ravel()])
    b = bracket(args, ctx)
    b1, bg, bden = b[0], nonzero(b[1], "[gamma]"), nonzero(b[2], "[|x| - |y| + lambda + gamma + n]")
    off = 3
    blk = b[off:off + n + 1]
    blgk = b[off + n + 1:off + 2 * n + 2]
    bdgk = b[off + 2 * n + 2:off + 3 * n + 3]
    off += 3 * n + 3
    bxx, bxx1, bxy, bxy1 = (b[off + r * n * n: off + (r + 1) * n * n].reshape(n, n) for r in range(4))
    small = np.abs(blk) < POLE_TOL
    if small.any():
        j = int(np.flatnonzero(small)[0])
        raise PoleError(f"[lambda + {n - j}]", blk[j])
    iu, ju, off_diag = _pair_index(n)
    small = np.abs(bxx[iu, ju]) < POLE_TOL
    if small.any():
        m = int(np.flatnonzero(small)[0])
        raise PoleError(f"[x_{iu[m] + 1} - x_{ju[m] + 1}]", bxx[iu[m], ju[m]])
    F = np.ones((n, n), dtype=np.complex128)
    F[off_diag] = bxx1[off_diag] / bxx[off_diag]
    sign = np.where(k % 2, -1.0, 1.0)
    coef = sign * blgk * bdgk / blk
    terms = kernels.subset_terms(F, bxy.prod(axis=1), bxy1.prod(axis=1), coef)
    return (blk[0] / (b1 ** (n * n) * bg * bden)) * terms


@lru_cache(maxsize=None)
def _pair_index(n):
    iu, ju = np.triu_indices(n, 1)
    return iu, ju, ~np.eye(n, dtype=bool)


def z_factored_sum(params, ctx):
    """Sum of 2^n explicitly factored terms; cost O(2^n n^2)."""
    params = _require(params, "additive", ctx)
    if params.n == 0:
        return 1.0 + 0j
    if kernels.NUMBA_ENABLED and params.gamma is not None:
        val, status = kernels.factored_sum_numba(params.x, params.y, params.lam, params.gamma,
                                                 complex(ctx.eta), ctx.p,
                                                 math.log(ctx.tolerance), POLE_TOL)
        if status == 0:
            return complex(val)
    # numpy path; also reports which factor failed when the fused kernel bails out
    return complex(factored_terms(params, ctx).sum())


# ---------------------------------------------------------------------------
# multiplicative forms


def _mult_prefactor(x, y, lam, g, ctx):
    """Common prefactor of the multiplicative determinant sums, without the
    nome-dependent normalisations."""
    n = len(x)
    p, q, tol = ctx.p, ctx.q, ctx.tolerance
    X, Y = np.prod(x), np.prod(y)
    r = np.divide.outer(x, y)
    tq = nonzero(theta(q, p, tol), "theta(q)")
    tg = nonzero(theta(g, p, tol), "theta(gamma)")
    last = nonzero(Y * theta(X * lam * g * q ** n / Y, p, tol), "Y theta(X lambda gamma q^n / Y)")
    iu, ju = np.triu_indices(n, 1)
    txx = theta(x[iu] / x[ju], p, tol)
    tyy = theta(y[iu] / y[ju], p, tol)
    for k, (i, j) in enumerate(zip(iu, ju)):
        nonzero(txx[k], f"theta(x_{i + 1}/x_{j + 1})")
        nonzero(tyy[k], f"theta(y_{i + 1}/y_{j + 1})")
    num = (-1) ** _binom2(n) * theta(lam * q ** n, p, tol)
    num *= np.prod(y[None, :] ** 2 * theta(r, p, tol) * theta(q * r, p, tol))
    den = tq ** (n * n) * tg ** (n - 1) * last * np.prod(x[ju] * y[ju] * txx * tyy)
    return num / den


def _shift_dets(x, y, g, ctx):
    """A = theta(g x/y)/theta(x/y), B = theta(q g x/y)/theta(q x/y)."""
    p, q, tol = ctx.p, ctx.q, ctx.tolerance
    r = np.divide.outer(x, y)
    den_a = theta(r, p, tol)
    den_b = theta(q * r, p, tol)
    n = len(x)
    for i in range(n):
        for j in range(n):
            nonzero(den_a[i, j], f"theta(x_{i + 1}/y_{j + 1})")
            nonzero(den_b[i, j], f"theta(q x_{i + 1}/y_{j + 1})")
    return theta(g * r, p, tol) / den_a, theta(q * g * r, p, tol) / den_b


def _check_root(ctx, N):
    if N < 2 or abs(ctx.q ** N - 1) > 1e-10:
        raise DomainError(f"q = {ctx.q:.6g} is not an N-th root of unity for N = {N}")


def root_of_unity_parts(params, N, ctx, drop_k=None):
    """Pieces of the N-term sum: ``(pref, ks, coefs, A, B)`` with
    ``Zt = pref * sum_k coefs[k] * det(A - q^{-ks[k]} B)``.

    With ``drop_k`` given, gamma is set to ``p^{-drop_k} lambda^{-N}`` and the
    matching term (which vanishes) is skipped, leaving N-1 determinants.
    Otherwise ``params.gamma`` (multiplicative) is used.
    """
    _check_root(ctx, N)
    params = _require(params, "multiplicative", ctx)
    n = params.n
    x, y, lam = params.x, params.y, params.lam
    p, q, tol = ctx.p, ctx.q, ctx.tolerance
    pN = p ** N
    if drop_k is not None:
        if p == 0 and drop_k != 0:
            raise DomainError("with p = 0 only drop_k = 0 is available")
        g = lam ** (-N) * (p ** (-drop_k) if drop_k else 1.0)
    else:
        g = _gamma(params)
    tlN = nonzero(theta(lam ** N, pN, tol), "theta(lambda^N; p^N)")
    pref = _mult_prefactor(x, y, lam, g, ctx)
    pref *= qpoch(pN, tol) ** 2 / (qpoch(p, tol) ** 2 * tlN)
    A, B = _shift_dets(x, y, g, ctx)
    ks, coefs = [], []
    for k in range(N):
        if drop_k is not None and (k - drop_k) % N == 0:
            continue
        den = nonzero(theta(g * p ** k, pN, tol), f"theta(gamma p^{k}; p^N)")
        ks.append(k)
        coefs.append(lam ** k * q ** (n * k) * theta(g * lam ** N * p ** k, pN, tol) / den)
    return pref, ks, np.array(coefs, dtype=np.complex128), A, B


def z_root_of_unity(params, N, ctx, drop_k=None):
    """N-term determinant sum valid when q^N = 1; returns Zt_n.

    See ``root_of_unity_parts`` for ``drop_k``.
    """
    if params.n == 0:
        _check_root(ctx, N)
        return 1.0 + 0j
    pref, ks, coefs, A, B = root_of_unity_parts(params, N, ctx, drop_k)
    q = ctx.q
    total = sum(c * det(A - q ** (-k) * B) for k, c in zip(ks, coefs))
    return complex(pref * total)


def laurent_parts(params, ctx, K=40):
    """Pieces of the truncated Laurent sum, in the layout of ``root_of_unity_parts``."""
    params = _require(params, "multiplicative", ctx)
    n = params.n
    x, y, lam = params.x, params.y, params.lam
    g = _gamma(params)
    p, q, tol = ctx.p, ctx.q, ctx.tolerance
    for k in range(n + 1):
        if not abs(p) < abs(lam * q ** k) < 1:
            raise DomainError(f"needs |p| < |lambda q^{k}| < 1")
    pref = _mult_prefactor(x, y, lam, g, ctx) / qpoch(p, tol) ** 2
    A, B = _shift_dets(x, y, g, ctx)
    ks, coefs = [], []
    for k in range(-K, K + 1):
        if k >= 0:
            c = 1.0 / nonzero(1 - g * p ** k, f"1 - gamma p^{k}")
        else:
            pm = p ** (-k)
            c = pm / nonzero(pm - g, f"1 - gamma p^{k}")
        if c == 0:
            continue
        ks.append(k)
        coefs.append(lam ** k * q ** (n * k) * c)
    return pref, ks, np.array(coefs, dtype=np.complex128), A, B


def z_laurent(params, ctx, K=40):
    """Doubly infinite determinant sum truncated to |k| <= K. Returns Zt_n."""
    if params.n == 0:
        return 1.0 + 0j
    pref, ks, coefs, A, B = laurent_parts(params, ctx, K)
    q = ctx.q
    total = sum(c * det(A - q ** (-k) * B) for k, c in zip(ks, coefs))
    return complex(pref * total)


def det_sum_condition(ks, coefs, A, B, q):
    """Error amplification bound for sum_k c_k det(A - q^{-k} B).

    Each determinant is bounded by Hadamard's inequality applied to |A| + |B|,
    which also covers cancellation inside the entries.
    """
    bound = np.prod(np.linalg.norm(np.abs(A) + np.abs(B), axis=1))
    total = sum(c * np.linalg.det(A - q ** (-k) * B) for k, c in zip(ks, coefs))
    if total == 0:
        return math.inf
    return float(np.abs(coefs).sum() * bound / abs(total))


def z_free_fermion(params, ctx):
    """Closed product formula for Zt_n at q = -1."""
    if abs(ctx.q + 1) > 1e-10:
        raise DomainError("free-fermion formula needs q = -1")
    params = _require(params, "multiplicative", ctx)
    n = params.n
    if n == 0:
        return 1.0 + 0j
    x, y, lam = params.x, params.y, params.lam
    p, tol = ctx.p, ctx.tolerance
    X, Y = np.prod(x), np.prod(y)
    s = (-1) ** (n + 1)
    den = nonzero(theta(s * lam, p, tol), "theta((-1)^{n+1} lambda)")
    ratio = (qpoch(p, tol) / qpoch(p * p, tol)) ** (2 * n * (n - 1))
    iu, ju = np.triu_indices(n, 1)
    prod = np.prod(x[iu] * y[iu] * theta(-x[ju] / x[iu], p, tol) * theta(-y[ju] / y[iu], p, tol))
    return complex(ratio / 2 ** (n * (n - 1)) * X * theta(s * lam * Y / X, p, tol) / den * prod)


def z_sixvertex_ik(params, ctx):
    """Single-determinant limit lambda -> infinity of the trigonometric case."""
    if ctx.p != 0:
        raise DomainError("six-vertex limit needs p = 0")
    params = _require(params, "additive", ctx)
    n = params.n
    if n == 0:
        return 1.0 + 0j
    x, y = params.x, params.y
    u = np.subtract.outer(x, y)
    bu, bu1 = bracket(u, ctx), bracket(u + 1, ctx)
    for i in range(n):
        for j in range(n):
            nonzero(bu[i, j], f"[x_{i + 1} - y_{j + 1}]")
            nonzero(bu1[i, j], f"[x_{i + 1} + 1 - y_{j + 1}]")
    iu, ju = np.triu_indices(n, 1)
    bxx = bracket(x[iu] - x[ju], ctx)
    byy = bracket(y[iu] - y[ju], ctx)
    for k, (i, j) in enumerate(zip(iu, ju)):
        nonzero(bxx[k], f"[x_{i + 1} - x_{j + 1}]")
        nonzero(byy[k], f"[y_{i + 1} - y_{j + 1}]")
    b1 = bracket(1, ctx)
    pref = (-1) ** _binom2(n) * cmath.exp(1j * math.pi * ctx.eta * (x.sum() - y.sum()))
    pref /= b1 ** (n * n - n)
    pref *= np.prod(bu * bu1) / (np.prod(bxx) * np.prod(byy))
    return complex(pref * det(1.0 / (bu * bu1)))


EVALUATORS = {
    "brute": z_bruteforce,
    "weightfn": z_weightfunction,
    "ik": z_ik_sum,
    "factored": z_factored_sum,
}


# ---------------------------------------------------------------------------
# structural checks


def recursion_check(params, ctx, which="x1+1=y1", evaluator=None):
    """Both sides of the reduction n -> n-1 at x_1 + 1 = y_1 or x_1 = y_1."""
    evaluator = evaluator or z_bruteforce
    params = _require(params, "additive", ctx)
    n = params.n
    if n < 1:
        raise ValueError("recursion needs n >= 1")
    x, y, lam = params.x.copy(), params.y, params.lam
    rest_y = y[1:]
    b1 = nonzero(bracket(1, ctx), "[1]")
    if which == "x1+1=y1":
        x[0] = y[0] - 1
        rest_x = x[1:]
        num = bracket(lam + n, ctx) * np.prod(bracket(y[0] - rest_y - 1, ctx) * bracket(rest_x - y[0], ctx))
        den = nonzero(bracket(lam + n - 1, ctx), f"[lambda + {n - 1}]") * b1 ** (2 * (n - 1))
        sub_lam = lam
    elif which == "x1=y1":
        x[0] = y[0]
        rest_x = x[1:]
        num = np.prod(bracket(y[0] - rest_y + 1, ctx) * bracket(rest_x - y[0] + 1, ctx))
        den = b1 ** (2 * (n - 1))
        sub_lam = lam + 1
    else:
        raise ValueError(f"unknown branch {which!r}")
    lhs = evaluator(SpectralParams(x, y, lam), ctx)
    sub = SpectralParams(rest_x, rest_y, sub_lam)
    z_sub = evaluator(sub, ctx) if n > 1 else 1.0 + 0j
    return complex(lhs), complex(num / den * z_sub)


def symmetry_error(params, ctx, trials=5, rng=None, evaluator=None):
    """Largest relative change of Z_n under random permutations of x and of y."""
    evaluator = evaluator or z_bruteforce
    params = _require(params, "additive", ctx)
    rng = np.random.default_rng(rng)
    base = evaluator(params, ctx)
    worst = 0.0
    for _ in range(trials):
        moved = params.replace(x=rng.permutation(params.x), y=rng.permutation(params.y))
        worst = max(worst, relative_error(evaluator(moved, ctx), base))
    return worst


def symmetry_check(params, ctx, trials=5, rng=None, evaluator=None, tol=1e-9):
    return symmetry_error(params, ctx, trials, rng, evaluator) <= tol


def _eta_denominator(ctx):
    """N if eta = 1/N for an integer N >= 2, else None."""
    inv = 1 / ctx.eta
    N = round(inv.real)
    if N >= 2 and abs(inv - N) < 1e-12:
        return N
    return None


def lambda_structure_error(params, ctx, evaluator=None, samples=10, rng=None):
    """Violation of the theta-function structure of Z_n in lambda.

    ``Z_n * prod_{j<n} [lambda + j]`` has order n and norm |x| - |y| - C(n,2).
    When eta = 1/N with 2 <= N <= n the smaller product over
    ``[lambda + n - j]``, 1 <= j < N, already suffices (order N-1).
    """
    evaluator = evaluator or z_bruteforce
    params = _require(params, "additive", ctx)
    rng = np.random.default_rng(rng)
    n = params.n
    d = params.x.sum() - params.y.sum()

    def f(lam):
        return evaluator(params.replace(lam=lam), ctx) * bracket_product_shifted(lam, range(n), ctx)

    worst = order_norm_error(f, n, d - _binom2(n), ctx, samples, rng)
    N = _eta_denominator(ctx)
    if N is not None and 2 <= N <= n:
        def g(lam):
            return evaluator(params.replace(lam=lam), ctx) * bracket_product_shifted(
                lam, [n - j for j in range(1, N)], ctx)

        worst = max(worst, order_norm_error(g, N - 1, d + n - _binom2(N), ctx, samples, rng))
    return worst


def lambda_structure_check(params, ctx, evaluator=None, samples=10, rng=None, tol=1e-8):
    return lambda_structure_error(params, ctx, evaluator, samples, rng) <= tol


def bracket_product_shifted(lam, shifts, ctx):
    shifts = list(shifts)
    if not shifts:
        return 1.0 + 0j
    return complex(np.prod(bracket(lam + np.asarray(shifts, dtype=float), ctx)))


def variable_structure_error(params, ctx, which="x", index=0, evaluator=None, samples=10,
                             rng=None):
    """Z_n as a function of one x_i (order n, norm |y| + lambda) or one y_i
    (order n, norm |x| - lambda); returns the largest violation."""
    evaluator = evaluator or z_bruteforce
    params = _require(params, "additive", ctx)
    n = params.n
    if which == "x":
        norm = params.y.sum() + params.lam

        def f(v):
            x = params.x.copy()
            x[index] = v
            return evaluator(params.replace(x=x), ctx)
    elif which == "y":
        norm = params.x.sum() - params.lam

        def f(v):
            y = params.y.copy()
            y[index] = v
            return evaluator(params.replace(y=y), ctx)
    else:
        raise ValueError(which)
    return order_norm_error(f, n, norm, ctx, samples, rng)


def variable_structure_check(params, ctx, which="x", index=0, evaluator=None, samples=10,
                             rng=None, tol=1e-8):
    return variable_structure_error(params, ctx, which, index, evaluator, samples, rng) <= tol


def bruteforce_l1(params, ctx, cap=DEFAULT_STATE_CAP):
    """Sum of |weight| over states; the natural error scale of the state sum."""
    params = _require(params, "additive", ctx)
    n = params.n
    if n == 0:
        return 1.0
    if cap is not None and n > cap:
        states_array(n, cap=cap)
    idx, _ = _brute_index(n)
    W, _ = weight_table(params, ctx)
    return float(kernels.state_sum(np.abs(W).ravel().astype(np.complex128), idx).real)


# ---------------------------------------------------------------------------
# sampling


def pole_factors(params):
    """Additive arguments whose brackets must stay away from zero."""
    n = params.n
    x, y, lam = params.x, params.y, params.lam
    u = np.subtract.outer(x, y).ravel()
    iu, ju = np.triu_indices(n, 1)
    parts = [[1.0], lam + np.arange(-1, n + 2), u, u + 1, u - 1, x[iu] - x[ju], y[iu] - y[ju]]
    if params.gamma is not None:
        g = params.gamma
        d = x.sum() - y.sum()
        parts += [[g, d + lam + g + n]]
    return np.concatenate([np.asarray(p, dtype=np.complex128) for p in parts])


def sample_params(n, ctx, rng, with_gamma=True, box=(1.0, 0.25), pole_tol=SAMPLE_POLE_TOL,
                  max_tries=1000):
    """Draw additive parameters uniformly from a box, rejecting near-poles."""
    re, im = box

    def draw(size=None):
        return rng.uniform(-re, re, size) + 1j * rng.uniform(-im, im, size)

    for _ in range(max_tries):
        params = SpectralParams(draw(n), draw(n), complex(draw()),
                                complex(draw()) if with_gamma else None)
        if np.all(np.abs(bracket(pole_factors(params), ctx)) > pole_tol):
            return params
    raise DomainError("could not sample parameters away from poles")


def sample_context(rng, p_max=0.5, p_min=0.05, eta=None):
    from .theta import ThetaContext

    r = rng.uniform(p_min, p_max)
    p = r * cmath.exp(2j * math.pi * rng.uniform())
    if eta is None:
        eta = rng.uniform(0.1, 0.4) + 1j * rng.uniform(-0.05, 0.05)
    return ThetaContext(p=p, eta=eta)
