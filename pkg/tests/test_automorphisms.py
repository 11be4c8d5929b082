import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_force_automorphisms, cyclic_unit_group_order, gl_order
from pgw.automorphisms import (
    Automorphism,
    AutomorphismCapError,
    automorphism_group,
    central_quotient_exponent,
    compose,
    inner_automorphisms,
    minimal_generators,
    permutation_orders,
    sylow_p_exponent,
)
from pgw.corpus import corpus_builtin, corpus_by_name
from pgw.groups import center, pc_group

WITHIN_CAP = [e for e in corpus_builtin() if e.presentation.order <= 81]


def G_of(name):
    return pc_group(corpus_by_name(name).presentation)


def table(G):
    x = G.elements()
    return G.mul(x[:, None], x[None, :]).tolist()


@pytest.mark.parametrize(
    "name, count",
    [
        ("abelian-C3xC3", gl_order(2, 3)),
        ("abelian-C9", cyclic_unit_group_order(9)),
        ("abelian-C3", cyclic_unit_group_order(3)),
        ("abelian-C2xC2xC2", gl_order(3, 2)),
        ("abelian-C5xC5", gl_order(2, 5)),
        ("abelian-C3xC3xC3", gl_order(3, 3)),
        ("abelian-C27", 18),
        ("dihedral-8", 8),
        ("quaternion-8", 24),
        ("heisenberg-3", 432),
    ],
)
def test_automorphism_counts(name, count):
    assert len(automorphism_group(G_of(name))) == count


def test_small_counts_literal():
    assert len(automorphism_group(G_of("abelian-C3xC3"))) == 48
    assert len(automorphism_group(G_of("abelian-C9"))) == 6
    assert len(automorphism_group(G_of("abelian-C3"))) == 2


@pytest.mark.parametrize(
    "name", ["abelian-C3xC3", "abelian-C9", "abelian-C3", "abelian-C4xC2", "dihedral-8", "quaternion-8", "abelian-C9xC3"]
)
def test_counts_match_brute_force(name):
    G = G_of(name)
    gens = [int(g) for g in G.generators]
    assert len(automorphism_group(G)) == brute_force_automorphisms(table(G), gens)


@pytest.mark.parametrize("name", ["dihedral-8", "heisenberg-3", "modular-3"])
def test_automorphisms_form_a_group(name):
    G = G_of(name)
    auts = automorphism_group(G)
    found = set(auts)
    assert len(found) == len(auts)
    rng = np.random.default_rng(3)
    x = G.elements()
    for _ in range(50):
        a, b = (auts[i] for i in rng.integers(0, len(auts), 2))
        ab = compose(a, b)
        assert ab in found
        assert a.inverse() in found
        assert (a @ a.inverse()).perm.tolist() == x.tolist()
        y, z = rng.integers(0, G.order, 2)
        assert ab(G.mul(y, z)) == G.mul(ab(y), ab(z))
    assert sum(1 for a in auts if a.perm.tolist() == x.tolist()) == 1


@pytest.mark.parametrize("entry", WITHIN_CAP, ids=lambda e: e.name)
def test_inner_automorphisms_divide_and_are_contained(entry):
    G = pc_group(entry.presentation)
    try:
        auts = automorphism_group(G)
    except AutomorphismCapError:
        pytest.skip("automorphism group beyond the count limit")
    inner = inner_automorphisms(G)
    assert len(inner) == G.order // center(G).order
    assert len(auts) % len(inner) == 0
    assert set(inner) <= set(auts)
    q = sylow_p_exponent(G, auts)
    assert q % central_quotient_exponent(G) == 0


def test_caps():
    with pytest.raises(AutomorphismCapError):
        automorphism_group(G_of("maxclass-243"))
    with pytest.raises(AutomorphismCapError):
        automorphism_group(G_of("abelian-C2xC2xC2xC2"), count_limit=1000)
    assert len(automorphism_group(G_of("abelian-C2xC2xC2xC2"))) == gl_order(4, 2)


def test_sylow_exponents():
    assert sylow_p_exponent(G_of("abelian-C3")) == 1
    assert sylow_p_exponent(G_of("abelian-C9")) == 3
    assert sylow_p_exponent(G_of("abelian-C3xC3")) == 3
    assert sylow_p_exponent(G_of("dihedral-8")) == 4


def test_minimal_generators_and_images():
    G = G_of("heisenberg-3")
    assert len(minimal_generators(G)) == 2
    a = automorphism_group(G)[5]
    assert len(a.images) == 3
    assert a.order == int(permutation_orders(a.perm[None, :])[0])


@given(st.permutations(range(7)))
@settings(max_examples=50)
def test_permutation_order_is_cycle_lcm(perm):
    perm = np.array(perm)
    o = int(permutation_orders(perm[None, :])[0])
    cur = np.arange(7)
    for k in range(1, o + 1):
        cur = perm[cur]
        assert (cur == np.arange(7)).all() == (k == o)
