import io
import json

import numpy as np
import pytest

from sosdw.errors import ResourceError, ValidationError
from sosdw.states import (AlternatingSignMatrix, HeightMatrix, a_n, asm_to_height, block_types, c_n,
                          enumerate_states, export_jsonl, height_to_asm, statistics, statistics_table,
                          states_array)

# OEIS A005130 and A005157
ASM = [1, 1, 2, 7, 42, 429, 7436, 218348, 10850216]
CSPP = [1, 2, 5, 20, 132, 1452, 26741]


@pytest.mark.parametrize("n", range(1, 8))
def test_state_counts(n):
    assert len(states_array(n)) == ASM[n] == a_n(n)


def test_product_formulas():
    assert [a_n(n) for n in range(9)] == ASM
    assert [c_n(n) for n in range(7)] == CSPP


def test_n1_and_n2_states():
    assert [h.tolist() for h in enumerate_states(1)] == [[[0, 1], [1, 0]]]
    assert [h.tolist() for h in enumerate_states(2)] == [
        [[0, 1, 2], [1, 0, 1], [2, 1, 0]],
        [[0, 1, 2], [1, 2, 1], [2, 1, 0]],
    ]


def test_states_valid_and_distinct():
    hs = list(enumerate_states(5))
    assert len(set(hs)) == len(hs) == 429
    for h in hs:
        h.validate()


def test_first_row_partition():
    n = 5
    parts = {k: list(enumerate_states(n, first_row_k=k)) for k in range(1, n + 1)}
    assert sum(map(len, parts.values())) == a_n(n)
    for k, part in parts.items():
        for h in part:
            assert int(np.flatnonzero(height_to_asm(h).entries[0])[0]) == k - 1


def test_cap():
    with pytest.raises(ResourceError):
        states_array(8)
    with pytest.raises(ResourceError):
        list(enumerate_states(6, cap=5))


def test_asm_bijection():
    asms = {height_to_asm(h) for h in enumerate_states(4)}
    assert len(asms) == 42
    for a in asms:
        a.validate()
    for h in enumerate_states(3):
        assert asm_to_height(height_to_asm(h)) == h


def test_asm_examples():
    assert height_to_asm([[0, 1, 2], [1, 0, 1], [2, 1, 0]]).tolist() == [[1, 0], [0, 1]]
    assert height_to_asm([[0, 1, 2], [1, 2, 1], [2, 1, 0]]).tolist() == [[0, 1], [1, 0]]
    h = asm_to_height([[0, 1, 0], [1, -1, 1], [0, 1, 0]])
    assert h.tolist() == [[0, 1, 2, 3], [1, 2, 1, 2], [2, 1, 2, 1], [3, 2, 1, 0]]


def test_validation_errors():
    with pytest.raises(ValidationError):
        HeightMatrix([[0, 1], [1, 2]]).validate()
    with pytest.raises(ValidationError):
        HeightMatrix([[0, 1, 2], [1, 1, 1], [2, 1, 0]]).validate()
    with pytest.raises(ValidationError):
        AlternatingSignMatrix([[1, 1], [0, 0]]).validate()
    with pytest.raises(ValidationError):
        asm_to_height([[0, 1], [1, -1]])


def test_statistics_n1():
    s = statistics(next(enumerate_states(1)))
    assert s.n_minus == 0
    assert s.k_mod3 == (2, 2, 0)
    assert s.m_mod8 == (0, 1, 0, 0)


def test_statistics_invariants():
    for n in range(1, 6):
        tab = statistics_table(n)
        assert np.all(tab["k"].sum(axis=1) == (n + 1) ** 2)
        assert np.all(tab["m"].sum(axis=1) == n * n)
        # N equals the number of -1 entries of the ASM
        minus = [int(np.sum(height_to_asm(h).entries == -1)) for h in states_array(n)]
        assert tab["n_minus"].tolist() == minus


def test_block_types_count_minus_ones():
    h = asm_to_height([[0, 1, 0], [1, -1, 1], [0, 1, 0]]).entries
    t = block_types(h)
    assert t.shape == (3, 3)
    assert statistics(h).n_minus == 1


def test_export_jsonl():
    buf = io.StringIO()
    assert export_jsonl(3, buf) == 7
    recs = [json.loads(line) for line in buf.getvalue().splitlines()]
    assert all(r["n"] == 3 and len(r["asm"]) == 3 for r in recs)
    assert sum(r["n_minus"] for r in recs) == 1
