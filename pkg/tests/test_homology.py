import pytest
from hypothesis import given, settings, strategies as st

from oracles import integral_h2, wedge_formula
from pgw.corpus import abelian, corpus_builtin, corpus_by_name, partitions
from pgw.groups import derived_subgroup, pc_group
from pgw.homology import (
    AbelianInvariants,
    ModulusTooSmallError,
    abelian_invariants,
    exterior_square_invariants,
    multiplier_exponent,
    multiplier_invariants,
)


def table_of(P):
    G = pc_group(P)
    return G.mul(G.elements()[:, None], G.elements()[None, :]).tolist()


@pytest.mark.parametrize(
    "name, expected",
    [
        ("heisenberg-3", (3, 3)),
        ("modular-3", ()),
        ("heisenberg-5", (5, 5)),
        ("modular-5", ()),
        ("dihedral-8", (2,)),
        ("quaternion-8", ()),
        ("wreath-C3-C3", (3,)),
        ("dihedral-8-x-C2", (2, 2, 2)),
        ("abelian-C9xC3", (3,)),
        ("abelian-C9", ()),
    ],
)
def test_known_multipliers(name, expected):
    P = corpus_by_name(name).presentation
    assert multiplier_invariants(P).factors == expected


@pytest.mark.parametrize("name", ["heisenberg-3", "modular-3", "dihedral-8", "quaternion-8", "abelian-C4xC2xC2", "dihedral-8-x-C2"])
def test_bar_and_tails_routes_agree(name):
    P = corpus_by_name(name).presentation
    assert multiplier_invariants(P, method="bar") == multiplier_invariants(P, method="tails")


@pytest.mark.parametrize("p, n", [(2, 5), (3, 5), (5, 4)])
def test_abelian_multiplier_is_exterior_square(p, n):
    for part in partitions(n):
        P = abelian(p, part)
        factors = [p**a for a in part]
        assert list(multiplier_invariants(P)) == wedge_formula(factors)
        assert multiplier_invariants(P) == exterior_square_invariants(factors)


def test_dense_oracle_on_order_16():
    P = corpus_by_name("dihedral-8-x-C2").presentation
    torsion, rank = integral_h2(table_of(P))
    assert list(multiplier_invariants(P, method="tails")) == torsion
    assert rank == 15 * 15 - 15


def test_small_modulus_truncates_to_p_rank():
    # below the multiplier exponent the answer is only the rank mod p
    P = corpus_by_name("abelian-C9xC9").presentation
    assert multiplier_invariants(P, method="tails", modulus_exp=1).factors == (3,)
    assert multiplier_invariants(P, method="tails", modulus_exp=2).factors == (9,)


def test_missing_free_part_is_reported():
    from pgw.homology import _strip

    with pytest.raises(ModulusTooSmallError):
        _strip([9, 3], 9, 2)


def test_invalid_arguments():
    P = corpus_by_name("abelian-C3").presentation
    with pytest.raises(ValueError):
        multiplier_invariants(P, method="nope")
    with pytest.raises(ValueError):
        multiplier_invariants(P, modulus_exp=0)
    assert multiplier_invariants(corpus_by_name("abelian-C3").presentation) == AbelianInvariants()


@pytest.mark.parametrize(
    "entry",
    [e for e in corpus_builtin() if e.presentation.order <= 81],
    ids=lambda e: e.name,
)
def test_larger_modulus_gives_same_answer(entry):
    P = entry.presentation
    n = P.n
    a = multiplier_invariants(P, method="tails", modulus_exp=n)
    b = multiplier_invariants(P, method="tails", modulus_exp=n + 1)
    assert a == b


def test_abelian_invariants_from_census():
    G = pc_group(abelian(3, (2, 1, 1)))
    assert abelian_invariants(G.whole).factors == (9, 3, 3)
    H = pc_group(corpus_by_name("wreath-C3-C3").presentation)
    assert abelian_invariants(derived_subgroup(H)).factors == (3, 3)
    with pytest.raises(ValueError):
        abelian_invariants(H.whole)


@given(st.lists(st.sampled_from([1, 2, 3, 4, 8, 9, 27]), max_size=6))
def test_abelian_invariants_arithmetic(fs):
    A = AbelianInvariants(tuple(fs))
    assert 1 not in A.factors
    assert list(A.factors) == sorted(A.factors, reverse=True)
    prod = 1
    for f in fs:
        prod *= f
    assert A.order == prod
    assert (A + A).order == prod * prod
    assert A.exponent == (max(fs) if fs else 1)


def test_multiplier_exponent_helper():
    assert multiplier_exponent(corpus_by_name("abelian-C9xC9").presentation) == 9


def _apply(G, k, chain):
    from pgw.homology import boundary_apply

    return boundary_apply(G, k, chain)


def test_two_face_boundary_examples():
    G = pc_group(corpus_by_name("abelian-C3").presentation)
    g = 1
    gi = int(G.inv(g))
    # the middle face is the identity and drops out; the outer faces both carry +1
    assert _apply(G, 2, (g, gi)) == {(gi,): 1, (g,): 1}
    # d(g|h) = (h) - (gh) + (g) when gh != 1
    h = g
    gh = int(G.mul(g, h))
    d = _apply(G, 2, (g, h))
    expected = {}
    for key, v in (((h,), 1), ((gh,), -1), ((g,), 1)):
        expected[key] = expected.get(key, 0) + v
    assert d == {k: v for k, v in expected.items() if v}


@given(st.lists(st.integers(1, 2), min_size=3, max_size=3))
@settings(max_examples=100)
def test_boundary_squares_to_zero(chain):
    G = pc_group(corpus_by_name("abelian-C3").presentation)
    total = {}
    for face, v in _apply(G, 3, tuple(chain)).items():
        for f2, w in _apply(G, 2, face).items():
            total[f2] = total.get(f2, 0) + v * w
    assert not any(total.values())
