"""High-precision reference for the partition function, independent of sosdw.

Enumerates height matrices by brute force, applies the local weights
literally and sums in mpmath at 30 digits. Used to regenerate the frozen
values in ``frozen.py``:

    python3 tests/oracle_mp.py
"""

import itertools

import mpmath as mp

mp.mp.dps = 30


def theta(x, p, terms=200):
    out = mp.mpc(1)
    for j in range(terms):
        out *= (1 - p ** j * x) * (1 - p ** (j + 1) / x)
    return out


def bracket(x, p, eta):
    q = mp.exp(2j * mp.pi * eta)
    return mp.exp(-1j * mp.pi * eta * x) * theta(q ** x, p)


def states(n):
    """All (n+1)x(n+1) height matrices with DWBC, by exhaustive search."""
    inner = [(i, j) for i in range(1, n) for j in range(1, n)]
    out = []
    for vals in itertools.product(range(n + 1), repeat=len(inner)):
        h = [[0] * (n + 1) for _ in range(n + 1)]
        for k in range(n + 1):
            h[0][k] = h[k][0] = k
            h[n][k] = h[k][n] = n - k
        for (i, j), v in zip(inner, vals):
            h[i][j] = v
        if all(abs(h[i][j] - h[i + 1][j]) == 1 for i in range(n) for j in range(n + 1)) and \
           all(abs(h[i][j] - h[i][j + 1]) == 1 for i in range(n + 1) for j in range(n)):
            out.append(h)
    return out


def weight(b_a, d_b, d_c, c_a, lam, u, p, eta):
    def br(t):
        return bracket(t, p, eta)
    key = (b_a, d_b, d_c, c_a)
    if key in ((1, 1, 1, 1), (-1, -1, -1, -1)):
        return br(u + 1) / br(1)
    if key == (1, -1, 1, -1):
        return br(u) * br(lam + 1) / (br(1) * br(lam))
    if key == (-1, 1, -1, 1):
        return br(u) * br(lam - 1) / (br(1) * br(lam))
    if key == (-1, 1, 1, -1):
        return br(lam + u) / br(lam)
    if key == (1, -1, -1, 1):
        return br(lam - u) / br(lam)
    raise ValueError(key)


def partition(x, y, lam, p, eta):
    n = len(x)
    total = mp.mpc(0)
    for h in states(n):
        w = mp.mpc(1)
        for i in range(n):
            for j in range(n):
                a, b, c, d = h[i][j], h[i][j + 1], h[i + 1][j], h[i + 1][j + 1]
                w *= weight(b - a, d - b, d - c, c - a, lam + a, x[i] - y[j], p, eta)
        total += w
    return total


POINTS = {
    1: dict(x=[0.31 + 0.07j], y=[-0.12 + 0.05j], lam=0.23 + 0.11j, p=0.2 + 0.1j, eta=0.27 + 0.02j),
    2: dict(x=[0.31 + 0.07j, -0.44 + 0.02j], y=[-0.12 + 0.05j, 0.18 - 0.09j], lam=0.23 + 0.11j,
            p=0.2 + 0.1j, eta=0.27 + 0.02j),
    3: dict(x=[0.31 + 0.07j, -0.44 + 0.02j, 0.05 - 0.13j], y=[-0.12 + 0.05j, 0.18 - 0.09j, 0.37 + 0.04j],
            lam=0.23 + 0.11j, p=-0.3j, eta=0.13),
    4: dict(x=[0.21 - 0.06j, -0.34 + 0.12j, 0.45 + 0.03j, -0.08 - 0.1j],
            y=[0.02 + 0.07j, -0.27 - 0.04j, 0.33 + 0.08j, -0.41 + 0.02j],
            lam=-0.37 + 0.09j, p=0.35, eta=0.19 + 0.01j),
}


def main():
    for n, pt in POINTS.items():
        z = partition([mp.mpc(v) for v in pt["x"]], [mp.mpc(v) for v in pt["y"]], mp.mpc(pt["lam"]),
                      mp.mpc(pt["p"]), mp.mpc(pt["eta"]))
        print(f"    {n}: complex({mp.nstr(z.real, 20)}, {mp.nstr(z.imag, 20)}),")


if __name__ == "__main__":
    main()
