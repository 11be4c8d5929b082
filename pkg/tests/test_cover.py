import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pgw.corpus import corpus_builtin, corpus_by_name
from pgw.cover import (
    Cocycle,
    CocycleError,
    SearchExhaustedError,
    build_extension,
    cocycle_basis,
    exterior_square,
    find_stem_cover,
    stem_covers,
    wedge_exponent,
)
from pgw.groups import (
    center,
    derived_subgroup,
    element_orders,
    exponent,
    frattini,
    is_abelian,
    pc_group,
)
from pgw.homology import multiplier_invariants

SMALL = [e for e in corpus_builtin() if e.presentation.order <= 81]


def P_of(name):
    return corpus_by_name(name).presentation


def generator_rank(G):
    # d(G) = log_p |G / Phi(G)|, the rank of G^ab mod p
    k, x = 0, G.order // frattini(G).order
    while x > 1:
        x //= G.p
        k += 1
    return k


def test_cyclic_carry_cocycle_gives_cyclic_extension():
    P = P_of("abelian-C3")
    (f,) = cocycle_basis(P, 3)
    assert f.table[:, :, 0].tolist() == [[0, 0, 0], [0, 0, 1], [0, 1, 1]]
    ext = build_extension(pc_group(P), [3], f)
    assert ext.total.order == 9
    assert exponent(ext.total.whole) == 9
    assert not ext.is_stem()  # Z/3 has trivial multiplier


def test_zero_cocycle_gives_direct_product():
    G = pc_group(P_of("heisenberg-3"))
    f = Cocycle(np.zeros((27, 27, 1), dtype=np.int64), (3,))
    ext = build_extension(G, [3], f)
    assert ext.total.order == 81
    assert exponent(ext.total.whole) == 3
    assert center(ext.total).order == 9
    assert not ext.is_stem()


def test_bad_cocycles_are_rejected():
    G = pc_group(P_of("abelian-C3"))
    t = np.zeros((3, 3), dtype=np.int64)
    t[1, 0] = 1
    with pytest.raises(CocycleError, match="normalized"):
        build_extension(G, [3], Cocycle(t, (3,)))
    t = np.zeros((3, 3), dtype=np.int64)
    t[1, 1] = 1  # f(1,1)=1 only: fails the identity at (1, 1, 2)
    with pytest.raises(CocycleError, match="identity"):
        build_extension(G, [3], Cocycle(t, (3,)))
    with pytest.raises(CocycleError):
        build_extension(G, [9], Cocycle(np.zeros((3, 3)), (3,)))
    with pytest.raises(CocycleError):
        build_extension(G, [3], Cocycle(np.zeros((9, 9)), (3,)))


def test_cocycle_basis_rejects_wrong_modulus():
    with pytest.raises(ValueError):
        cocycle_basis(P_of("abelian-C3"), 2)
    with pytest.raises(ValueError):
        cocycle_basis(P_of("abelian-C3"), 1)


@pytest.mark.parametrize("entry", SMALL, ids=lambda e: e.name)
def test_cohomology_rank_matches_universal_coefficients(entry):
    # H^2(G, Z/p) = Hom(H_2, Z/p) + Ext(G^ab, Z/p): rank d(M) + d(G)
    P = entry.presentation
    G = pc_group(P)
    basis = cocycle_basis(P, P.p)
    assert len(basis) == multiplier_invariants(P).rank + generator_rank(G)
    for f in basis[:3]:
        assert f.violations(G) == []
        assert f.is_normalized()


@pytest.mark.parametrize("name", ["abelian-C9xC3", "modular-3", "abelian-C3xC3"])
def test_cohomology_with_larger_coefficients(name):
    # every nontrivial cyclic factor of H_2 and of G^ab contributes one generator
    P = P_of(name)
    G = pc_group(P)
    basis = cocycle_basis(P, 9)
    expected = multiplier_invariants(P).rank + generator_rank(G)
    assert len(basis) == expected
    for f in basis:
        assert f.violations(G) == []


@given(st.data())
@settings(max_examples=20)
def test_sums_of_basis_cocycles_are_cocycles(data):
    P = P_of("heisenberg-3")
    G = pc_group(P)
    basis = cocycle_basis(P, 3)
    coeffs = data.draw(st.lists(st.integers(0, 2), min_size=len(basis), max_size=len(basis)))
    table = sum(c * f.table for c, f in zip(coeffs, basis))
    f = Cocycle(table, (3,))
    assert f.violations(G) == []


@pytest.mark.parametrize(
    "name", ["abelian-C3xC3", "heisenberg-3", "dihedral-8", "quaternion-8", "wreath-C3-C3", "dihedral-8-x-C2"]
)
def test_stem_cover_is_a_schur_cover(name):
    P = P_of(name)
    G = pc_group(P)
    M = multiplier_invariants(P)
    ext = find_stem_cover(P)
    assert ext.is_stem()
    assert ext.embedded_is_central()
    assert ext.total.order == G.order * M.order
    assert ext.coefficients == M
    x = ext.total.elements()
    assert set(np.unique(ext.projection(x)).tolist()) == set(range(G.order))


@pytest.mark.parametrize(
    "name, order, exp",
    [
        ("abelian-C3xC3", 3, 3),
        ("heisenberg-3", 27, 3),
        ("dihedral-8", 4, 4),
        ("quaternion-8", 2, 2),
        ("abelian-C9", 1, 1),
        ("maxclass-243", 729, 9),
    ],
)
def test_exterior_square_values(name, order, exp):
    W = exterior_square(P_of(name))
    assert W.order == order
    assert W.exponent == exp


@pytest.mark.parametrize("entry", SMALL, ids=lambda e: e.name)
def test_exterior_square_order_identity(entry):
    P = entry.presentation
    G = pc_group(P)
    M = multiplier_invariants(P)
    if M.order * derived_subgroup(G).order > 3**8:
        pytest.skip("exterior square beyond the test budget")
    W = exterior_square(P)
    assert W.order == M.order * derived_subgroup(G).order
    assert W.multiplier.order == M.order
    assert W.multiplier_is_normal()
    image = np.unique(W.projection(W.group.elements()))
    assert set(image.tolist()) == set(derived_subgroup(G).elements().tolist())
    assert exponent(derived_subgroup(G)) <= W.exponent


@pytest.mark.parametrize("name", ["abelian-C3xC3", "heisenberg-3", "dihedral-8", "wreath-C3-C3", "abelian-C2xC2xC2"])
def test_exterior_square_independent_of_cover(name):
    covers = list(itertools.islice(stem_covers(P_of(name), distinct=True), 2))
    assert len(covers) == 2
    a, b = covers
    assert a.label != b.label
    for ext in covers:
        assert ext.is_stem()
    Wa = exterior_square(P_of(name))
    from pgw.cover import ExteriorSquare

    Wb = ExteriorSquare(b, b.derived)
    assert Wa.order == Wb.order
    assert Wa.exponent == Wb.exponent
    assert Wa.quotient_census() == Wb.quotient_census()
    oa = np.unique(element_orders(a.total, a.derived.elements()), return_counts=True)
    ob = np.unique(element_orders(b.total, b.derived.elements()), return_counts=True)
    assert [x.tolist() for x in oa] == [x.tolist() for x in ob]


def test_sweep_cap_is_enforced():
    with pytest.raises(SearchExhaustedError):
        find_stem_cover(P_of("heisenberg-3"), cap=0)
    with pytest.raises(SearchExhaustedError):
        list(stem_covers(P_of("abelian-C3xC3"), cap=3, distinct=True))


def test_wedge_of_abelian_group_is_the_multiplier():
    P = P_of("abelian-C9xC3")
    W = exterior_square(P)
    assert is_abelian(W.group.whole)
    assert W.order == 3
    assert wedge_exponent(P) == 3
