"""Explicit finite groups on indexed elements, and their subgroups.

Elements are the integers ``0 .. order-1`` with 0 the identity. Products are
evaluated in bulk on numpy index arrays; subgroups are boolean masks over the
element indices, so containment, equality and products of subgroups are array
operations.
"""

from __future__ import annotations

from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from pgw.pcp import PcPresentation, exponent_matrix, right_multiplication_tables, word_index


class GroupTable:
    """A finite group with vectorised multiplication.

    Subclasses provide ``mul`` and ``inv`` on integer arrays (numpy
    broadcasting rules apply to ``mul``).
    """

    origin = "abstract"

    def __init__(self, order: int, p: int, generators: Sequence[int], name: str | None = None):
        self.order = int(order)
        self.p = p
        self.generators = np.unique(np.asarray(generators, dtype=np.int64))
        self.generators = self.generators[self.generators != 0]
        self.name = name

    def mul(self, a, b) -> np.ndarray:
        raise NotImplementedError

    def inv(self, a) -> np.ndarray:
        raise NotImplementedError

    def __len__(self) -> int:
        return self.order

    def __repr__(self) -> str:
        label = f" {self.name}" if self.name else ""
        return f"<{type(self).__name__}{label} order={self.order}>"

    def elements(self) -> np.ndarray:
        return np.arange(self.order, dtype=np.int64)

    def conj(self, x, g) -> np.ndarray:
        """x^g = g^-1 x g."""
        return self.mul(self.inv(g), self.mul(x, g))

    def comm(self, x, y) -> np.ndarray:
        """[x, y] = x^-1 y^-1 x y."""
        x = np.asarray(x)
        y = np.asarray(y)
        return self.mul(self.mul(self.inv(x), self.inv(y)), self.mul(x, y))

    def pow(self, x, k: int) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64)
        if k < 0:
            x, k = self.inv(x), -k
        result = np.zeros_like(x)
        base = x
        while k:
            if k & 1:
                result = self.mul(result, base)
            k >>= 1
            if k:
                base = self.mul(base, base)
        return result

    @cached_property
    def whole(self) -> "Subgroup":
        return Subgroup(self, np.ones(self.order, dtype=bool), self.generators)

    @cached_property
    def trivial(self) -> "Subgroup":
        mask = np.zeros(self.order, dtype=bool)
        mask[0] = True
        return Subgroup(self, mask, np.zeros(0, dtype=np.int64))


class CayleyGroup(GroupTable):
    """Group backed by a full multiplication table."""

    def __init__(self, table: np.ndarray, p: int, generators, origin: str, name=None):
        super().__init__(len(table), p, generators, name)
        self.table = table
        self.origin = origin
        self._inverse = np.argmax(table == 0, axis=1).astype(np.int64)

    def mul(self, a, b):
        return self.table[a, b].astype(np.int64, copy=False)

    def inv(self, a):
        return self._inverse[a]


class PcGroup(CayleyGroup):
    """The group of a consistent polycyclic presentation, elements indexed by
    their normal words read as base-p numerals."""

    def __init__(self, P: PcPresentation, name: str | None = None):
        P.require_consistent()
        self.presentation = P
        n, p = P.n, P.p
        N = p**n
        R = right_multiplication_tables(P)
        weights = p ** np.arange(n - 1, -1, -1, dtype=np.int64)
        E = exponent_matrix(P)
        # Row y of `rows` is left multiplication ... * y, i.e. column y of the
        # Cayley table. y = y' * g_k with g_k its last letter, so column y is
        # R[k] applied to column y'.
        rows = np.empty((N, N), dtype=np.int32)
        rows[0] = np.arange(N)
        nz = E != 0
        last = np.where(nz.any(axis=1), n - 1 - np.argmax(nz[:, ::-1], axis=1), -1)
        for y in range(1, N):
            k = last[y]
            rows[y] = R[k][rows[y - weights[k]]]
        table = np.ascontiguousarray(rows.T)
        super().__init__(table, p, weights if n else [], "presentation", name)
        self.exponents = E

    def index(self, w) -> int:
        return word_index(self.presentation, tuple(w))

    def word(self, x: int) -> tuple[int, ...]:
        return tuple(int(e) for e in self.exponents[x])


def pc_group(P: PcPresentation, name: str | None = None) -> PcGroup:
    return PcGroup(P, name)


class SubgroupGroup(GroupTable):
    """A subgroup regarded as a group in its own right, elements relabelled 0..|H|-1."""

    origin = "subgroup"

    def __init__(self, H: "Subgroup", name=None):
        self.ambient = H.group
        self.members = H.elements()
        gens = np.searchsorted(self.members, H.generators)
        super().__init__(len(self.members), H.group.p, gens, name)

    def mul(self, a, b):
        prod = self.ambient.mul(self.members[a], self.members[b])
        return np.searchsorted(self.members, prod)

    def inv(self, a):
        return np.searchsorted(self.members, self.ambient.inv(self.members[a]))


# ---------------------------------------------------------------------------
# Subgroups


class Subgroup:
    """Element subset of a GroupTable closed under multiplication, with generators."""

    def __init__(self, group: GroupTable, mask: np.ndarray, generators):
        self.group = group
        self.mask = mask
        self.generators = np.asarray(generators, dtype=np.int64)

    @cached_property
    def order(self) -> int:
        return int(self.mask.sum())

    def __len__(self) -> int:
        return self.order

    def elements(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    def __contains__(self, x) -> bool:
        return bool(self.mask[x])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subgroup):
            return NotImplemented
        return self.group is other.group and np.array_equal(self.mask, other.mask)

    __hash__ = None

    def __le__(self, other: "Subgroup") -> bool:
        return not np.any(self.mask & ~other.mask)

    def is_trivial(self) -> bool:
        return self.order == 1

    def __repr__(self) -> str:
        return f"<Subgroup order={self.order} of {self.group!r}>"


def as_subgroup(X) -> Subgroup:
    return X.whole if isinstance(X, GroupTable) else X


def _extend(G: GroupTable, mask: np.ndarray, gens: list[int]) -> None:
    """Close ``mask`` (already a subgroup, or {1}) under right multiplication by ``gens``."""
    g = np.asarray(gens, dtype=np.int64)
    frontier = np.flatnonzero(mask)
    first = True
    while len(frontier):
        if first:
            new = G.mul(frontier, g[-1])
            first = False
        else:
            new = G.mul(frontier[:, None], g[None, :]).ravel()
        new = np.unique(new[~mask[new]])
        mask[new] = True
        frontier = new


def subgroup_closure(G: GroupTable, gens: Iterable[int] = ()) -> Subgroup:
    """Smallest subgroup containing ``gens``; generators kept are an irredundant subset."""
    cand = np.unique(np.asarray(list(gens) if not isinstance(gens, np.ndarray) else gens,
                                dtype=np.int64))
    mask = np.zeros(G.order, dtype=bool)
    mask[0] = True
    chosen: list[int] = []
    for x in cand:
        if mask[x]:
            continue
        chosen.append(int(x))
        _extend(G, mask, chosen)
    return Subgroup(G, mask, chosen)


def subgroup_from_elements(G: GroupTable, elems) -> Subgroup:
    """Subgroup generated by the given elements (which need not be closed)."""
    return subgroup_closure(G, elems)


def is_normal(G: GroupTable, H: Subgroup) -> bool:
    if H.order in (1, G.order):
        return True
    x = H.elements()
    for g in G.generators:
        if not H.mask[G.conj(x, g)].all():
            return False
    return True


class NotNormalError(ValueError):
    pass


def _require_normal(G: GroupTable, *subs: Subgroup) -> None:
    for H in subs:
        if not is_normal(G, H):
            raise NotNormalError(f"subgroup of order {H.order} is not normal")


def normal_closure(G: GroupTable, gens: Iterable[int]) -> Subgroup:
    """Smallest normal subgroup of G containing ``gens``."""
    H = subgroup_closure(G, gens)
    while True:
        x = H.generators
        if not len(x):
            return H
        conj = np.unique(G.conj(x[:, None], G.generators[None, :]))
        missing = conj[~H.mask[conj]]
        if not len(missing):
            return H
        H = subgroup_closure(G, np.concatenate([x, missing]))


def commutator_subgroup(G: GroupTable, A, B, check: bool = True) -> Subgroup:
    """[A, B] for normal subgroups A and B.

    It is the normal closure of the commutators of generators of A with
    generators of B, since [A, B] is normal in G.
    """
    A, B = as_subgroup(A), as_subgroup(B)
    if check:
        _require_normal(G, A, B)
    a, b = A.generators, B.generators
    if not len(a) or not len(b):
        return G.trivial
    c = np.unique(G.comm(a[:, None], b[None, :]))
    return normal_closure(G, c[c != 0])


def commutator_subgroup_all_pairs(G: GroupTable, A, B) -> Subgroup:
    """Subgroup generated by all commutators [a, b], a in A, b in B."""
    A, B = as_subgroup(A), as_subgroup(B)
    a = A.elements()
    b = B.elements()
    values = set()
    chunk = max(1, 2_000_000 // max(len(b), 1))
    for start in range(0, len(a), chunk):
        c = G.comm(a[start : start + chunk, None], b[None, :])
        values.update(np.unique(c).tolist())
    return subgroup_closure(G, sorted(values))


def iterated_commutator(G: GroupTable, N, M, k: int) -> Subgroup:
    """Left-normed [N, M, ..., M] with k copies of M."""
    if k < 1:
        raise ValueError("k must be at least 1")
    X = as_subgroup(N)
    M = as_subgroup(M)
    for _ in range(k):
        if X.is_trivial():
            return X
        X = commutator_subgroup(G, X, M)
    return X


def center(G: GroupTable) -> Subgroup:
    x = G.elements()
    mask = np.ones(G.order, dtype=bool)
    for g in G.generators:
        mask &= G.mul(x, g) == G.mul(g, x)
    return subgroup_closure(G, np.flatnonzero(mask))


def centralizes(G: GroupTable, A, B) -> bool:
    """Whether every element of A commutes with every element of B."""
    A, B = as_subgroup(A), as_subgroup(B)
    a = A.elements()
    for g in B.generators:
        if np.any(G.mul(a, g) != G.mul(g, a)):
            return False
    return True


def lower_central_series(G: GroupTable) -> list[Subgroup]:
    """[gamma_1 = G, gamma_2, ...] ending with the first trivial term."""
    series = [G.whole]
    while not series[-1].is_trivial():
        nxt = commutator_subgroup(G, series[-1], G.whole)
        if nxt == series[-1]:
            raise ValueError("lower central series stabilises: group is not nilpotent")
        series.append(nxt)
    return series


def derived_series(G: GroupTable) -> list[Subgroup]:
    series = [G.whole]
    while not series[-1].is_trivial():
        nxt = commutator_subgroup(G, series[-1], series[-1])
        if nxt == series[-1]:
            raise ValueError("derived series stabilises: group is not solvable")
        series.append(nxt)
    return series


def nilpotency_class(G: GroupTable) -> int:
    return len(lower_central_series(G)) - 1


def derived_subgroup(G: GroupTable) -> Subgroup:
    return commutator_subgroup(G, G.whole, G.whole)


def agemo(X, k: int) -> Subgroup:
    """X^{p^k}: the subgroup generated by the p^k-th powers of all elements of X."""
    X = as_subgroup(X)
    G = X.group
    if k == 0:
        return X
    powers = G.pow(X.elements(), G.p**k)
    return subgroup_closure(G, np.unique(powers))


def subgroup_product(G: GroupTable, *subs) -> Subgroup:
    gens: list[int] = []
    for H in subs:
        gens.extend(as_subgroup(H).generators.tolist())
    return subgroup_closure(G, gens)


def element_orders(G: GroupTable, elems=None) -> np.ndarray:
    x = G.elements() if elems is None else np.asarray(elems, dtype=np.int64)
    orders = np.ones(len(x), dtype=np.int64)
    cur = x.copy()
    live = cur != 0
    while live.any():
        orders[live] *= G.p
        cur = G.pow(cur, G.p)
        live = cur != 0
    return orders


def exponent(X) -> int:
    X = as_subgroup(X)
    return int(element_orders(X.group, X.elements()).max())


def quotient(G: GroupTable, N) -> tuple[CayleyGroup, np.ndarray]:
    """G/N as a table group, plus the projection G -> G/N on element indices.

    Each coset is represented by its least element index; quotient indices
    follow the order of those representatives.
    """
    N = as_subgroup(N)
    _require_normal(G, N)
    x = G.elements()
    label = x.copy()
    for n in N.elements()[1:]:
        np.minimum(label, G.mul(x, n), out=label)
    reps, proj = np.unique(label, return_inverse=True)
    table = proj[G.mul(reps[:, None], reps[None, :])].astype(np.int32)
    Q = CayleyGroup(table, G.p, np.unique(proj[G.generators]), "quotient")
    return Q, proj.astype(np.int64)


def is_abelian(X) -> bool:
    X = as_subgroup(X)
    G = X.group
    gens = X.generators
    if len(gens) < 2:
        return True
    return bool(np.all(G.comm(gens[:, None], gens[None, :]) == 0))


def is_metabelian(G: GroupTable) -> bool:
    return is_abelian(derived_subgroup(G))


class UnsupportedPrimeError(ValueError):
    pass


def is_powerful(X) -> bool:
    """gamma_2(X) <= X^p, for odd p only."""
    X = as_subgroup(X)
    G = X.group
    if G.p == 2:
        raise UnsupportedPrimeError("powerful test is implemented for odd p only")
    return commutator_subgroup(G, X, X) <= agemo(X, 1)


def frattini(G: GroupTable) -> Subgroup:
    """Phi(G) = G^p [G, G] for a p-group."""
    return subgroup_product(G, agemo(G, 1), derived_subgroup(G))
