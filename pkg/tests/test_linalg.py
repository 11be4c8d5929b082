import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from pgw.linalg import (
    ModularColumnReducer,
    cokernel_invariants_mod,
    column_echelon_mod,
    elementary_divisors,
    smith_form,
    smith_valuations_mod,
    valuations,
)


def small_matrices(max_side=5, lo=-9, hi=9):
    shapes = st.tuples(st.integers(1, max_side), st.integers(1, max_side))
    return shapes.flatmap(lambda s: arrays(np.int64, s, elements=st.integers(lo, hi)))


def det(M):
    return round(np.linalg.det(np.array(M, dtype=float)))


@given(small_matrices())
def test_smith_form_factorisation(A):
    D, U, V, Vinv = smith_form(A, with_inverse=True)
    U, V, Vinv, D = (np.array(x, dtype=object) for x in (U, V, Vinv, D))
    assert ((U @ A.astype(object) @ V) == D).all()
    assert (V @ Vinv == np.eye(V.shape[0], dtype=object)).all()
    assert abs(det(U)) == 1 and abs(det(V)) == 1
    diag = [D[i, i] for i in range(min(D.shape))]
    off = D.copy()
    for i in range(len(diag)):
        off[i, i] = 0
    assert not off.any()
    nz = [d for d in diag if d]
    assert all(d > 0 for d in nz)
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    assert diag[: len(nz)] == nz  # zeros come last


def test_elementary_divisors_examples():
    assert elementary_divisors([[2, 4, 4], [-6, 6, 12], [10, -4, -16]]) == [2, 6, 12]
    assert elementary_divisors([[0, 0], [0, 0]]) == []
    assert elementary_divisors([[6]]) == [6]


@given(small_matrices(), st.sampled_from([(2, 3), (3, 2), (5, 2), (3, 4)]))
def test_modular_valuations_match_integer_smith_form(A, pm):
    p, m = pm
    q = p**m
    expected = []
    for d in elementary_divisors(A):
        v = 0
        while d % p == 0 and v < m:
            d //= p
            v += 1
        if v < m:
            expected.append(v)
    assert smith_valuations_mod(A, p, m) == sorted(expected)
    assert all(0 <= v < m for v in smith_valuations_mod(A % q, p, m))


def test_valuations():
    v = valuations(np.array([0, 1, 3, 9, 18, 27]), 3, 3)
    assert v.tolist() == [3, 0, 1, 2, 2, 3]


def test_cokernel_invariants():
    # (Z/9)^3 modulo <3 e_1, e_2>
    assert cokernel_invariants_mod([0, 1], 3, 3, 2) == [9, 3]


@given(small_matrices(6, 0, 26), st.integers(0, 2**32))
def test_streaming_reducer_matches_direct_elimination(A, seed):
    p, m = 3, 3
    rng = np.random.default_rng(seed)
    reducer = ModularColumnReducer(A.shape[0], p, m)
    cols = A.T.copy()
    rng.shuffle(cols)
    for chunk in np.array_split(cols, max(1, len(cols) // 2)):
        if len(chunk):
            reducer.add_columns(chunk.T)
    direct = cokernel_invariants_mod(smith_valuations_mod(A, p, m), A.shape[0], p, m)
    assert reducer.cokernel_invariants() == direct


@given(small_matrices(5, 0, 8))
def test_column_echelon_keeps_the_span(A):
    p, m = 2, 3
    E = column_echelon_mod(A, p, m)
    assert E.shape[1] <= A.shape[0]
    base = smith_valuations_mod(A, p, m)
    assert smith_valuations_mod(np.concatenate([E, A], axis=1), p, m) == base
    if E.shape[1]:
        assert smith_valuations_mod(E, p, m) == base


def test_reducer_compaction_on_many_nonunit_columns():
    p, m = 2, 4
    rng = np.random.default_rng(1)
    A = 2 * rng.integers(0, 8, size=(6, 400))
    reducer = ModularColumnReducer(6, p, m)
    for k in range(0, 400, 25):
        reducer.add_columns(A[:, k : k + 25])
    assert reducer.cokernel_invariants() == cokernel_invariants_mod(smith_valuations_mod(A, p, m), 6, p, m)
