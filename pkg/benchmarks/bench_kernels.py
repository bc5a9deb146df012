"""Numba kernels against their pure-numpy twins, then whole evaluators per backend.

    python3 benchmarks/bench_kernels.py [--n 6] [--repeat 7]

Timings are best-of-repeat wall clock after a warm-up call (jit compile and
caches excluded). Each kernel pair is also checked for agreement.
"""

import argparse
import time

import numpy as np

from sosdw import kernels
from sosdw.partition import (EVALUATORS, _brute_index, _perms, _weightfunction_parts,
                             sample_params, weight_table)
from sosdw.theta import ThetaContext, truncation_bound


def best_of(fn, repeat):
    fn()
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def kernel_rows(n, ctx, params, repeat):
    rng = np.random.default_rng(1)
    z = np.exp(2j * np.pi * (rng.uniform(-0.5, 0.5, 4096) + 0.1j * rng.standard_normal(4096)))
    K = truncation_bound(ctx.p, magnitude=float(np.max(np.maximum(abs(z), 1 / abs(z)))))

    idx, _ = _brute_index(n)
    W = weight_table(params, ctx)[0].ravel()
    _, pair, cross, diag = _weightfunction_parts(params, ctx)
    perms = _perms(n)
    F = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    U = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    V = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    coef = rng.standard_normal(n + 1) + 0j

    pairs = {
        "theta (4096 args)": (lambda: kernels.theta_numba(z, ctx.p, K),
                              lambda: kernels.theta_numpy(z, ctx.p, K)),
        f"state sum (n={n})": (lambda: kernels.state_sum_numba(W, idx),
                               lambda: kernels.state_sum_numpy(W, idx)),
        f"perm sum (n={n})": (lambda: kernels.perm_sum_numba(perms, pair, cross, diag),
                              lambda: kernels.perm_sum_numpy(perms, pair, cross, diag)),
        f"subset terms (n={n})": (lambda: kernels.subset_terms_numba(F, U, V, coef),
                                  lambda: kernels.subset_terms_numpy(F, U, V, coef)),
    }
    rows = []
    for name, (fast, slow) in pairs.items():
        a, b = np.asarray(fast()), np.asarray(slow())
        err = float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))
        rows.append((name, best_of(fast, repeat), best_of(slow, repeat), err))
    return rows


def evaluator_rows(n, ctx, params, repeat):
    saved = kernels.NUMBA_ENABLED
    out = {}
    try:
        for flag in (True, False):
            kernels.NUMBA_ENABLED = flag
            out[flag] = {m: best_of(lambda f=f: f(params, ctx), repeat) for m, f in EVALUATORS.items()}
    finally:
        kernels.NUMBA_ENABLED = saved
    return [(m, out[True][m], out[False][m]) for m in EVALUATORS]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=6)
    ap.add_argument("--repeat", type=int, default=7)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if not kernels.NUMBA_AVAILABLE:
        raise SystemExit("numba is not importable; nothing to compare")

    ctx = ThetaContext(p=0.2 + 0.1j, eta=0.27 + 0.02j)
    params = sample_params(args.n, ctx, np.random.default_rng(args.seed))

    print(f"{'kernel':<24}{'numba us':>12}{'numpy us':>12}{'speedup':>10}{'max rel diff':>14}")
    for name, tf, ts, err in kernel_rows(args.n, ctx, params, args.repeat):
        print(f"{name:<24}{tf * 1e6:12.1f}{ts * 1e6:12.1f}{ts / tf:10.1f}{err:14.1e}")

    print()
    print(f"{'evaluator (n=%d)' % args.n:<24}{'numba us':>12}{'numpy us':>12}{'vs brute':>10}")
    rows = evaluator_rows(args.n, ctx, params, args.repeat)
    brute = dict((m, tf) for m, tf, _ in rows)["brute"]
    for m, tf, ts in rows:
        print(f"{m:<24}{tf * 1e6:12.1f}{ts * 1e6:12.1f}{brute / tf:10.1f}")


if __name__ == "__main__":
    main()
