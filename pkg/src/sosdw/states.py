"""Height matrices with domain-wall boundary, their ASMs and statistics."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

import numpy as np

from .errors import ResourceError, ValidationError

DEFAULT_STATE_CAP = 7

# Block type codes, keyed by the signs (b - a, c - a) and d for a block
# (a b; c d). Names give the weight labels R^{b-a, d-b}_{d-c, c-a}.
PP, MM, PM_PM, MP_MP, MINUS_ONE, PLUS_ONE = range(6)
BLOCK_TYPE_NAMES = ("++/++", "--/--", "+-/+-", "-+/-+", "-+/+-", "+-/-+")


def dwbc_boundary(n):
    """Boundary pattern as an (n+1)x(n+1) array with interior set to -1."""
    h = np.full((n + 1, n + 1), -1, dtype=np.int16)
    idx = np.arange(n + 1)
    h[0, :] = idx
    h[:, 0] = idx
    h[n, :] = n - idx
    h[:, n] = n - idx
    return h


@dataclass(frozen=True, eq=False)
class HeightMatrix:
    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=np.int16)
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def n(self):
        return self.entries.shape[0] - 1

    def validate(self):
        h = self.entries
        if h.ndim != 2 or h.shape[0] != h.shape[1] or h.shape[0] < 2:
            raise ValidationError("height matrix must be square of size n+1 >= 2")
        n = self.n
        b = dwbc_boundary(n)
        mask = b >= 0
        if not np.array_equal(h[mask], b[mask]):
            raise ValidationError("boundary does not match domain-wall pattern")
        if np.any(np.abs(np.diff(h, axis=0)) != 1) or np.any(np.abs(np.diff(h, axis=1)) != 1):
            raise ValidationError("adjacent heights must differ by exactly 1")
        return self

    def __eq__(self, other):
        return isinstance(other, HeightMatrix) and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())

    def tolist(self):
        return self.entries.tolist()


@dataclass(frozen=True, eq=False)
class AlternatingSignMatrix:
    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=np.int8)
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def n(self):
        return self.entries.shape[0]

    def validate(self):
        a = self.entries
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValidationError("ASM must be a nonempty square matrix")
        if not np.all(np.isin(a, (-1, 0, 1))):
            raise ValidationError("ASM entries must be -1, 0 or 1")
        for line in itertools.chain(a, a.T):
            nz = line[line != 0]
            if len(nz) == 0 or nz[0] != 1 or nz[-1] != 1 or np.any(nz[1:] == nz[:-1]):
                raise ValidationError("nonzero entries must alternate 1, -1, ..., 1")
        return self

    def __eq__(self, other):
        return isinstance(other, AlternatingSignMatrix) and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())

    def tolist(self):
        return self.entries.tolist()


@dataclass(frozen=True)
class StateStatistics:
    n_minus: int
    k_mod3: tuple
    m_mod8: tuple
    block_list: tuple

    def as_dict(self):
        return {"n_minus": self.n_minus, "k_mod3": list(self.k_mod3), "m_mod8": list(self.m_mod8)}


# ---------------------------------------------------------------------------
# enumeration


@lru_cache(maxsize=None)
def _rows(n, r):
    """Admissible rows r (0 < r < n): +-1 paths from r to n-r, lexicographic.

    Entries that could not reach the fixed bottom row are pruned.
    """
    rows = []
    target = n - 2 * r
    for steps in itertools.product((-1, 1), repeat=n):
        if sum(steps) != target:
            continue
        row = np.concatenate(([r], r + np.cumsum(steps)))
        if np.all(np.abs(row - (n - np.arange(n + 1))) <= n - r):
            rows.append(tuple(int(v) for v in row))
    return tuple(rows)


def _compatible(u, v):
    return all(abs(a - b) == 1 for a, b in zip(u, v))


def _check_cap(n, cap):
    if n < 1:
        raise ValueError("n must be a positive integer")
    if cap is not None and n > cap:
        raise ResourceError(f"n = {n} exceeds state cap {cap}; raise the cap explicitly")


def _iter_rows(n, first_k=None):
    top = tuple(range(n + 1))
    bottom = tuple(n - j for j in range(n + 1))
    if n == 1:
        yield (top, bottom)
        return
    layers = [_rows(n, r) for r in range(1, n)]
    succ = []
    for r in range(len(layers) - 1):
        succ.append({u: [v for v in layers[r + 1] if _compatible(u, v)] for u in layers[r]})
    ok_last = {u for u in layers[-1] if _compatible(u, bottom)}
    first = [u for u in layers[0] if _compatible(top, u)]
    if first_k is not None:
        first = [u for u in first if _second_row_k(u) == first_k]

    def extend(prefix, depth):
        last = prefix[-1]
        if depth == len(layers) - 1:
            if last in ok_last:
                yield (top,) + prefix + (bottom,)
            return
        for v in succ[depth][last]:
            yield from extend(prefix + (v,), depth + 1)

    for u in first:
        yield from extend((u,), 0)


def _second_row_k(row):
    """Position k (1-based) of the descent in a second row 1 2 .. k k-1 k .. n-1."""
    for j in range(1, len(row)):
        if row[j] < row[j - 1]:
            return j
    raise ValidationError("second row has no descent")


def enumerate_states(n, cap=DEFAULT_STATE_CAP, first_row_k=None):
    """Yield every domain-wall height matrix of size n+1 once, lexicographically.

    ``first_row_k`` restricts to states whose ASM has its top 1 in column k
    (1-based), which partitions the state space for parallel evaluation.
    """
    _check_cap(n, cap)
    for rows in _iter_rows(n, first_row_k):
        yield HeightMatrix(np.array(rows, dtype=np.int16))


@lru_cache(maxsize=None)
def _states_array_cached(n):
    arr = np.array(list(_iter_rows(n)), dtype=np.int16)
    arr.setflags(write=False)
    return arr


def states_array(n, cap=DEFAULT_STATE_CAP):
    """All states stacked as an int16 array of shape (A_n, n+1, n+1); cached."""
    _check_cap(n, cap)
    return _states_array_cached(n)


# ---------------------------------------------------------------------------
# bijection with ASMs


def height_to_asm(h):
    e = np.asarray(h.entries if isinstance(h, HeightMatrix) else h, dtype=np.int32)
    a, b, c, d = e[:-1, :-1], e[:-1, 1:], e[1:, :-1], e[1:, 1:]
    return AlternatingSignMatrix((b + c - a - d) // 2)


def asm_to_height(asm):
    """Invert the block rule: heights are i + j - 2 * (corner sum of the ASM)."""
    if not isinstance(asm, AlternatingSignMatrix):
        asm = AlternatingSignMatrix(asm)
    asm.validate()
    n = asm.n
    corner = np.zeros((n + 1, n + 1), dtype=np.int32)
    corner[1:, 1:] = np.cumsum(np.cumsum(asm.entries.astype(np.int32), axis=0), axis=1)
    i, j = np.indices((n + 1, n + 1))
    return HeightMatrix(i + j - 2 * corner).validate()


# ---------------------------------------------------------------------------
# statistics


def block_types(states):
    """Type code of every block; works on one state or a stack of states."""
    e = np.asarray(states, dtype=np.int32)
    a, b, c, d = e[..., :-1, :-1], e[..., :-1, 1:], e[..., 1:, :-1], e[..., 1:, 1:]
    up = b > a
    left = c > a
    flat = d == a
    t = np.empty(a.shape, dtype=np.int8)
    t[up & left & ~flat] = PP
    t[~up & ~left & ~flat] = MM
    t[up & ~left] = PM_PM
    t[~up & left] = MP_MP
    t[~up & ~left & flat] = MINUS_ONE
    t[up & left & flat] = PLUS_ONE
    return t


def statistics(h):
    e = np.asarray(h.entries if isinstance(h, HeightMatrix) else h, dtype=np.int32)
    n = e.shape[0] - 1
    types = block_types(e)
    k = tuple(int(np.count_nonzero(e % 3 == r)) for r in range(3))
    s = e[:-1, :-1] + e[:-1, 1:] + e[1:, :-1] + e[1:, 1:]
    m = tuple(int(np.count_nonzero((s // 2) % 4 == r)) for r in range(4))
    blocks = tuple(
        (i + 1, j + 1, int(e[i, j]), int(e[i, j + 1]), int(e[i + 1, j]), int(e[i + 1, j + 1]))
        for i in range(n) for j in range(n)
    )
    return StateStatistics(int(np.count_nonzero(types == MINUS_ONE)), k, m, blocks)


@lru_cache(maxsize=None)
def _statistics_table_cached(n):
    st = _states_array_cached(n).astype(np.int32)
    types = block_types(st)
    s = st[:, :-1, :-1] + st[:, :-1, 1:] + st[:, 1:, :-1] + st[:, 1:, 1:]
    mod = (s // 2) % 4
    return {
        "n_minus": np.count_nonzero(types == MINUS_ONE, axis=(1, 2)),
        "k": np.stack([np.count_nonzero(st % 3 == r, axis=(1, 2)) for r in range(3)], axis=1),
        "m": np.stack([np.count_nonzero(mod == r, axis=(1, 2)) for r in range(4)], axis=1),
        "types": types,
    }


def statistics_table(n, cap=DEFAULT_STATE_CAP):
    """Vectorised statistics over all states: n_minus (S,), k (S,3), m (S,4), types."""
    _check_cap(n, cap)
    return _statistics_table_cached(n)


# ---------------------------------------------------------------------------
# product formulas


def a_n(n):
    """Number of n x n alternating sign matrices."""
    v = Fraction(1)
    for j in range(1, n + 1):
        v *= Fraction(factorial(3 * j - 2), factorial(n + j - 1))
    assert v.denominator == 1
    return int(v)


def c_n(n):
    """Number of cyclically symmetric plane partitions in an n-cube."""
    v = Fraction(1)
    for j in range(1, n + 1):
        v *= Fraction((3 * j - 1) * factorial(3 * j - 3), factorial(n + j - 1))
    assert v.denominator == 1
    return int(v)


def export_jsonl(n, fp, cap=DEFAULT_STATE_CAP):
    """Write one JSON object per state: n, ASM entries, statistics."""
    count = 0
    for h in enumerate_states(n, cap=cap):
        st = statistics(h)
        rec = {"n": n, "asm": height_to_asm(h).tolist(), **st.as_dict()}
        fp.write(json.dumps(rec, separators=(",", ":")) + "\n")
        count += 1
    return count
