"""Automorphism groups of small p-groups by backtracking over generator images.

An automorphism is determined by the images of a minimal generating set
s_1..s_d (pc generators independent modulo the Frattini subgroup). Candidate
images t_j must have the order of s_j and be independent of t_1..t_{j-1}
modulo Phi(G), which by the Burnside basis theorem guarantees they generate.
A BFS spanning tree of the Cayley graph on s_1..s_d extends an assignment to
a map on all elements; the map is an automorphism iff it respects every edge
y -> y s_j and is injective.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from pgw.groups import (
    GroupTable,
    PcGroup,
    center,
    element_orders,
    exponent,
    frattini,
    quotient,
    subgroup_closure,
)

DEFAULT_ORDER_CAP = 81
DEFAULT_COUNT_LIMIT = 100_000

__all__ = [
    "Automorphism",
    "AutomorphismCapError",
    "automorphism_group",
    "central_quotient_exponent",
    "compose",
    "inner_automorphisms",
    "minimal_generators",
    "permutation_orders",
    "sylow_p_exponent",
]


class AutomorphismCapError(RuntimeError):
    """The group or its automorphism group exceeds the configured budget."""


@dataclass(frozen=True, eq=False)
class Automorphism:
    """An automorphism, stored as the permutation of element indices it induces."""

    group: GroupTable
    perm: np.ndarray

    def __call__(self, x):
        return self.perm[x]

    @cached_property
    def images(self) -> tuple[tuple[int, ...], ...]:
        """Images of the presentation generators as normal words."""
        G = self.group
        if isinstance(G, PcGroup):
            n = G.presentation.n
            weights = G.p ** np.arange(n - 1, -1, -1)
            return tuple(G.word(int(self.perm[w])) for w in weights)
        return tuple((int(self.perm[g]),) for g in G.generators)

    def __eq__(self, other):
        return isinstance(other, Automorphism) and np.array_equal(self.perm, other.perm)

    def __hash__(self):
        return hash(self.perm.tobytes())

    def __matmul__(self, other: "Automorphism") -> "Automorphism":
        """(self @ other)(x) = self(other(x))."""
        return Automorphism(self.group, self.perm[other.perm])

    def inverse(self) -> "Automorphism":
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(len(self.perm))
        return Automorphism(self.group, inv)

    @cached_property
    def order(self) -> int:
        return int(permutation_orders(self.perm[None, :])[0])


def compose(a: Automorphism, b: Automorphism) -> Automorphism:
    return a @ b


def minimal_generators(G: GroupTable) -> list[int]:
    """Generators of G independent modulo Phi(G), taken greedily from G.generators."""
    mask = frattini(G).mask.copy()
    chosen: list[int] = []
    for g in G.generators:
        if not mask[g]:
            chosen.append(int(g))
            mask = subgroup_closure(G, np.concatenate([np.flatnonzero(mask), chosen])).mask.copy()
    return chosen


def _spanning_tree(G: GroupTable, gens: list[int]):
    """BFS levels of (node, parent, generator index) with node = parent * gens[j]."""
    seen = np.zeros(G.order, dtype=bool)
    seen[0] = True
    frontier = np.array([0], dtype=np.int64)
    levels = []
    g = np.asarray(gens, dtype=np.int64)
    while len(frontier):
        prod = G.mul(frontier[:, None], g[None, :])
        par = np.repeat(frontier, len(g))
        which = np.tile(np.arange(len(g)), len(frontier))
        prod = prod.ravel()
        _, first = np.unique(prod, return_index=True)
        keep = first[~seen[prod[first]]]
        keep.sort()
        if not len(keep):
            break
        nodes = prod[keep]
        seen[nodes] = True
        levels.append((nodes, par[keep], which[keep]))
        frontier = nodes
    if not seen.all():
        raise ValueError("generators do not generate the group")
    return levels


def _extend_maps(G: GroupTable, levels, images: np.ndarray) -> np.ndarray:
    """Maps defined on the tree from generator images, one row per image tuple."""
    K = images.shape[0]
    phi = np.zeros((K, G.order), dtype=np.int64)
    for nodes, par, which in levels:
        phi[:, nodes] = G.mul(phi[:, par], images[:, which])
    return phi


def _valid(G: GroupTable, gens: list[int], phi: np.ndarray, images: np.ndarray) -> np.ndarray:
    x = G.elements()
    ok = np.ones(phi.shape[0], dtype=bool)
    for j, s in enumerate(gens):
        lhs = phi[:, G.mul(x, s)]
        rhs = G.mul(phi, images[:, j : j + 1])
        ok &= np.all(lhs == rhs, axis=1)
    srt = np.sort(phi[ok], axis=1)
    bij = np.all(srt == x[None, :], axis=1)
    ok[np.flatnonzero(ok)] = bij
    return ok


def automorphism_group(
    G: GroupTable,
    order_cap: int | None = DEFAULT_ORDER_CAP,
    count_limit: int | None = DEFAULT_COUNT_LIMIT,
) -> list[Automorphism]:
    """Every automorphism of G, sorted by permutation (lexicographically).

    Raises AutomorphismCapError if |G| exceeds ``order_cap`` or more than
    ``count_limit`` automorphisms are found.
    """
    if order_cap is not None and G.order > order_cap:
        raise AutomorphismCapError(f"group order {G.order} exceeds the automorphism cap {order_cap}")
    if G.order == 1:
        return [Automorphism(G, np.zeros(1, dtype=np.int64))]
    gens = minimal_generators(G)
    d = len(gens)
    levels = _spanning_tree(G, gens)
    orders = element_orders(G)
    phi_mask = frattini(G).mask
    found: list[np.ndarray] = []

    def candidates(prefix: list[int], j: int) -> np.ndarray:
        span = subgroup_closure(G, np.concatenate([np.flatnonzero(phi_mask), prefix])).mask \
            if prefix else phi_mask
        return np.flatnonzero((orders == orders[gens[j]]) & ~span)

    def search(prefix: list[int]):
        j = len(prefix)
        cand = candidates(prefix, j)
        if j == d - 1:
            images = np.empty((len(cand), d), dtype=np.int64)
            images[:, :j] = prefix
            images[:, j] = cand
            phi = _extend_maps(G, levels, images)
            ok = _valid(G, gens, phi, images)
            found.extend(phi[ok])
            if count_limit is not None and len(found) > count_limit:
                raise AutomorphismCapError(
                    f"more than {count_limit} automorphisms; raise the limit to enumerate them"
                )
            return
        for t in cand:
            search(prefix + [int(t)])

    search([])
    perms = np.array(found, dtype=np.int64).reshape(-1, G.order)
    perms = perms[np.lexsort(perms.T[::-1])]
    return [Automorphism(G, row) for row in perms]


def permutation_orders(perms: np.ndarray) -> np.ndarray:
    """Order of each permutation (rows of ``perms``) as the lcm of its cycle lengths."""
    perms = np.asarray(perms, dtype=np.int64)
    K, N = perms.shape
    cycle = np.zeros((K, N), dtype=np.int64)
    cur = np.tile(np.arange(N), (K, 1))
    rows = np.arange(K)[:, None]
    for k in range(1, N + 1):
        cur = perms[rows, cur]
        hit = (cycle == 0) & (cur == np.arange(N))
        cycle[hit] = k
        if (cycle > 0).all():
            break
    return np.lcm.reduce(cycle, axis=1)


def sylow_p_exponent(G: GroupTable, auts: list[Automorphism] | None = None, **caps) -> int:
    """Largest p-power order of an automorphism of G, the exponent of a Sylow p-subgroup."""
    if auts is None:
        auts = automorphism_group(G, **caps)
    orders = permutation_orders(np.stack([a.perm for a in auts]))
    p = G.p
    best = 1
    for o in orders.tolist():
        x = o
        while x % p == 0:
            x //= p
        if x == 1:
            best = max(best, o)
    return best


def inner_automorphisms(G: GroupTable) -> list[Automorphism]:
    """Conjugation maps x -> g^-1 x g, one per coset of Z(G), sorted by permutation."""
    Q, proj = quotient(G, center(G))
    _, reps = np.unique(proj, return_index=True)
    x = G.elements()
    perms = np.stack([G.conj(x, g) for g in reps])
    perms = perms[np.lexsort(perms.T[::-1])]
    return [Automorphism(G, row) for row in perms]


def central_quotient_exponent(G: GroupTable) -> int:
    Q, _ = quotient(G, center(G))
    return exponent(Q)
