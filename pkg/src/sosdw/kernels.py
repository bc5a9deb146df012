"""Inner loops shared by the evaluators.

Each kernel has a numba version and a pure-numpy version with identical
semantics. The numba versions are used when numba imports cleanly and the
environment variable ``SOSDW_DISABLE_NUMBA`` is unset (or "0"). Both
variants stay importable so benchmarks and tests can compare them.
"""

import os
from functools import lru_cache

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


def _flag_disabled():
    return os.environ.get("SOSDW_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")


NUMBA_AVAILABLE = numba is not None
NUMBA_ENABLED = NUMBA_AVAILABLE and not _flag_disabled()

# rows per chunk in the numpy state sum; bounds the (chunk, n^2) gather
_CHUNK = 1 << 14


def _njit(func):
    if numba is None:
        return func
    return numba.njit(cache=True)(func)


# ---------------------------------------------------------------------------
# theta(x; p) = prod_{j<K} (1 - p^j x)(1 - p^{j+1}/x)


def theta_numpy(x, p, K):
    x = np.asarray(x, dtype=np.complex128)
    if p == 0:
        return 1.0 - x
    pj = np.empty(K, dtype=np.complex128)
    acc = 1.0 + 0.0j
    for j in range(K):
        pj[j] = acc
        acc *= p
    inv = 1.0 / x
    return np.prod(
        (1.0 - np.multiply.outer(x, pj)) * (1.0 - np.multiply.outer(inv, pj * p)),
        axis=-1,
    )


def _theta_loop(x, p, K):
    out = np.empty(x.shape[0], dtype=np.complex128)
    if p == 0:
        for m in range(x.shape[0]):
            out[m] = 1.0 - x[m]
        return out
    # (1 - p^j z)(1 - p^{j+1}/z) = c_j - p^j (z + p/z) with c_j = 1 + p^{2j+1}
    pw = np.empty(K, dtype=np.complex128)
    c = np.empty(K, dtype=np.complex128)
    acc = 1.0 + 0.0j
    for j in range(K):
        pw[j] = acc
        c[j] = 1.0 + acc * acc * p
        acc *= p
    for m in range(x.shape[0]):
        z = x[m]
        s = z + p / z
        acc = 1.0 + 0.0j
        for j in range(K):
            acc *= c[j] - pw[j] * s
        out[m] = acc
    return out


theta_numba = _njit(_theta_loop)


def theta_product(x, p, K):
    """Truncated theta product over a flat complex array."""
    x = np.ascontiguousarray(x, dtype=np.complex128).ravel()
    if NUMBA_ENABLED:
        return theta_numba(x, complex(p), int(K))
    return theta_numpy(x, complex(p), int(K))


# ---------------------------------------------------------------------------
# brute-force state sum: sum_s prod_k table[idx[s, k]]


def state_sum_numpy(table, idx):
    total = 0j
    for start in range(0, idx.shape[0], _CHUNK):
        block = table[idx[start:start + _CHUNK]]
        total += block.prod(axis=1).sum()
    return complex(total)


def _state_sum_loop(table, idx):
    total = 0.0 + 0.0j
    for s in range(idx.shape[0]):
        w = 1.0 + 0.0j
        for k in range(idx.shape[1]):
            w *= table[idx[s, k]]
        total += w
    return total


state_sum_numba = _njit(_state_sum_loop)


def state_sum(table, idx):
    table = np.ascontiguousarray(table, dtype=np.complex128)
    idx = np.ascontiguousarray(idx, dtype=np.int32)
    if NUMBA_ENABLED:
        return complex(state_sum_numba(table, idx))
    return state_sum_numpy(table, idx)


# ---------------------------------------------------------------------------
# permutation sum used by the weight-function formula:
#   sum_sigma prod_{i<j} pair[s_j, s_i] * cross[s_j, i] * prod_j diag[s_j, j]


def perm_sum_numpy(perms, pair, cross, diag):
    n = perms.shape[1]
    iu, ju = np.triu_indices(n, 1)
    total = 0j
    for start in range(0, perms.shape[0], _CHUNK):
        s = perms[start:start + _CHUNK]
        sj = s[:, ju]
        term = (pair[sj, s[:, iu]] * cross[sj, iu]).prod(axis=1)
        term *= diag[s, np.arange(n)].prod(axis=1)
        total += term.sum()
    return complex(total)


def _perm_sum_loop(perms, pair, cross, diag):
    n = perms.shape[1]
    total = 0.0 + 0.0j
    for r in range(perms.shape[0]):
        w = 1.0 + 0.0j
        for j in range(n):
            sj = perms[r, j]
            w *= diag[sj, j]
            for i in range(j):
                w *= pair[sj, perms[r, i]] * cross[sj, i]
        total += w
    return total


perm_sum_numba = _njit(_perm_sum_loop)


def perm_sum(perms, pair, cross, diag):
    perms = np.ascontiguousarray(perms, dtype=np.int64)
    pair = np.ascontiguousarray(pair, dtype=np.complex128)
    cross = np.ascontiguousarray(cross, dtype=np.complex128)
    diag = np.ascontiguousarray(diag, dtype=np.complex128)
    if NUMBA_ENABLED:
        return complex(perm_sum_numba(perms, pair, cross, diag))
    return perm_sum_numpy(perms, pair, cross, diag)


# ---------------------------------------------------------------------------
# factored subset terms:
#   term[S] = coef[|S|] * prod_{i in S, j not in S} F[i, j] * prod_{i in S} U_i * prod_{i not in S} V_i
# with S running over bitmasks 0 .. 2^n - 1 (bit i set when i is in S)


@lru_cache(maxsize=None)
def _subset_masks(n):
    S = ((np.arange(2 ** n)[:, None] >> np.arange(n)) & 1).astype(bool)
    return S, (S[:, :, None] & ~S[:, None, :]).reshape(len(S), -1), S.sum(axis=1)


def subset_terms_numpy(F, U, V, coef):
    S, cross_mask, sizes = _subset_masks(U.shape[0])
    cross = np.where(cross_mask, F.ravel(), 1.0).prod(axis=1)
    return coef[sizes] * cross * np.where(S, U, V).prod(axis=1)


def _subset_terms_loop(F, U, V, coef):
    n = U.shape[0]
    out = np.empty(1 << n, dtype=np.complex128)
    for mask in range(1 << n):
        w = 1.0 + 0.0j
        size = 0
        for i in range(n):
            if (mask >> i) & 1:
                size += 1
                w *= U[i]
                for j in range(n):
                    if not (mask >> j) & 1:
                        w *= F[i, j]
            else:
                w *= V[i]
        out[mask] = coef[size] * w
    return out


subset_terms_numba = _njit(_subset_terms_loop)


def subset_terms(F, U, V, coef):
    F = np.ascontiguousarray(F, dtype=np.complex128)
    U = np.ascontiguousarray(U, dtype=np.complex128)
    V = np.ascontiguousarray(V, dtype=np.complex128)
    coef = np.ascontiguousarray(coef, dtype=np.complex128)
    if NUMBA_ENABLED:
        return subset_terms_numba(F, U, V, coef)
    return subset_terms_numpy(F, U, V, coef)


# ---------------------------------------------------------------------------
# fused factored sum: brackets, pole checks and the subset loop in one pass.
# Status is 0 on success and 1 when a denominator is below pole_tol or an
# exponent overflows; callers then rerun the numpy path for diagnostics.


def _bracket_one(u, eta, p, log_abs_p, log_tol):
    ph = 2j * np.pi * eta * u
    if abs(ph.real) > 700.0:
        return complex(np.nan)
    z = np.exp(ph)
    if p == 0:
        th = 1.0 - z
    else:
        mag = max(abs(z), 1.0 / abs(z), 1.0)
        K = max(1, int(np.ceil((log_tol - np.log(mag)) / log_abs_p)))
        s = z + p / z
        th = 1.0 + 0.0j
        pj = 1.0 + 0.0j
        for _ in range(K):
            th *= (1.0 + pj * pj * p) - pj * s
            pj *= p
    return np.exp(-0.5 * ph) * th


_bracket_one = _njit(_bracket_one)


def _factored_sum_loop(x, y, lam, g, eta, p, log_tol, pole_tol):
    n = x.shape[0]
    la = np.log(abs(p)) if p != 0 else -1.0
    d = x.sum() - y.sum()
    b1 = _bracket_one(1.0 + 0.0j, eta, p, la, log_tol)
    bg = _bracket_one(g, eta, p, la, log_tol)
    bden = _bracket_one(d + lam + g + n, eta, p, la, log_tol)
    if not (abs(bg) >= pole_tol and abs(bden) >= pole_tol):
        return 0j, 1
    coef = np.empty(n + 1, dtype=np.complex128)
    blk0 = 0j
    for k in range(n + 1):
        blk = _bracket_one(lam + n - k, eta, p, la, log_tol)
        if not abs(blk) >= pole_tol:
            return 0j, 1
        if k == 0:
            blk0 = blk
        c = (_bracket_one(lam + g + n - k, eta, p, la, log_tol)
             * _bracket_one(d + g + k, eta, p, la, log_tol) / blk)
        coef[k] = -c if k % 2 else c
    F = np.ones((n, n), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            if i != j:
                den = _bracket_one(x[i] - x[j], eta, p, la, log_tol)
                if not abs(den) >= pole_tol:
                    return 0j, 1
                F[i, j] = _bracket_one(x[i] - x[j] + 1.0, eta, p, la, log_tol) / den
    U = np.ones(n, dtype=np.complex128)
    V = np.ones(n, dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            U[i] *= _bracket_one(x[i] - y[j], eta, p, la, log_tol)
            V[i] *= _bracket_one(x[i] - y[j] + 1.0, eta, p, la, log_tol)
    total = subset_terms_numba(F, U, V, coef).sum()
    val = total * blk0 / (b1 ** (n * n) * bg * bden)
    if not np.isfinite(val.real) or not np.isfinite(val.imag):
        return 0j, 1
    return val, 0


factored_sum_numba = _njit(_factored_sum_loop)


def backend():
    return "numba" if NUMBA_ENABLED else "numpy"
