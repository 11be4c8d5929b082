"""Central extensions, stem covers and the nonabelian exterior square.

Every 2-cocycle used here comes from the free tails extension of the pc
presentation. If F is free on the pc generators and R the relation kernel,
X = R/[F, R] is generated by one central tail per relation, subject to the
relations found by the overlap tests, and the tails group F/[F, R] is a
central extension of G by X with cocycle t(g, h) read off the tail tables.

* A homomorphism X -> A pushes t forward to a cocycle with values in A, and
  H^2(G, A) = Hom(X, A) / {chi o pi}, where pi: X -> F^ab is the exponent sum.
* The torsion of X is H_2(G, Z). Any map X -> M = H_2(G, Z) that restricts to
  an isomorphism on the torsion gives a Schur cover.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from math import gcd

import numpy as np

from pgw.groups import (
    GroupTable,
    PcGroup,
    Subgroup,
    SubgroupGroup,
    element_orders,
    exponent,
    is_normal,
    pc_group,
    subgroup_closure,
)
from pgw.homology import AbelianInvariants, multiplier_exponent
from pgw.linalg import smith_form
from pgw.pcp import PcPresentation, right_multiplication_tables, tail_relations

SWEEP_CAP = 100_000

__all__ = [
    "Cocycle",
    "CocycleError",
    "CentralExtension",
    "ExtensionGroup",
    "ExteriorSquare",
    "SearchExhaustedError",
    "build_extension",
    "cocycle_basis",
    "exterior_square",
    "find_stem_cover",
    "multiplier_exponent",
    "stem_covers",
    "wedge_exponent",
]


class CocycleError(ValueError):
    """The cocycle identity or normalization fails."""


class SearchExhaustedError(RuntimeError):
    pass


@dataclass
class Cocycle:
    """A normalized 2-cocycle G x G -> A = Z/a_1 + ... + Z/a_r.

    ``table[g, h]`` holds the r coordinates of f(g, h). ``moduli`` lists the
    a_k in the order of the coordinates (not necessarily sorted).
    """

    table: np.ndarray
    moduli: tuple[int, ...]

    def __post_init__(self):
        self.moduli = tuple(int(a) for a in self.moduli)
        t = np.asarray(self.table, dtype=np.int64)
        if t.ndim == 2:
            t = t[:, :, None]
        self.table = t % np.asarray(self.moduli, dtype=np.int64) if self.moduli else t

    @property
    def group_order(self) -> int:
        return self.table.shape[0]

    @property
    def coefficients(self) -> AbelianInvariants:
        return AbelianInvariants(self.moduli)

    def __call__(self, g, h):
        return self.table[g, h]

    def violations(self, G: GroupTable, limit: int = 1) -> list[tuple[int, int, int]]:
        """Triples (g, h, k) breaking f(g,h) + f(gh,k) = f(h,k) + f(g,hk), exhaustively."""
        f = self.table
        mod = np.asarray(self.moduli, dtype=np.int64)
        x = G.elements()
        hk = G.mul(x[:, None], x[None, :])
        out: list[tuple[int, int, int]] = []
        for g in range(G.order):
            gh = G.mul(g, x)
            lhs = f[g][:, None, :] + f[gh]
            rhs = f + f[g][hk]
            bad = np.any((lhs - rhs) % mod != 0, axis=2)
            if bad.any():
                for h, k in zip(*np.nonzero(bad)):
                    out.append((g, int(h), int(k)))
                    if len(out) >= limit:
                        return out
        return out

    def is_normalized(self) -> bool:
        return not self.table[0].any() and not self.table[:, 0].any()


class ExtensionGroup(GroupTable):
    """Pairs (g, a) with (g, a)(h, b) = (gh, a + b + f(g, h)).

    The pair is stored as the index g * |A| + a, with a written in mixed radix
    over the moduli (first coordinate most significant). Products are computed
    on demand; no multiplication table is stored.
    """

    origin = "extension"

    def __init__(self, G: GroupTable, f: Cocycle, name: str | None = None):
        self.base = G
        self.cocycle = f
        self.moduli = np.asarray(f.moduli, dtype=np.int64)
        self.a_order = int(np.prod(self.moduli)) if len(self.moduli) else 1
        r = len(self.moduli)
        self._radix = np.array(
            [int(np.prod(self.moduli[k + 1 :])) for k in range(r)], dtype=np.int64
        )
        lifts = np.asarray(G.generators, dtype=np.int64) * self.a_order
        units = self._radix.copy()
        super().__init__(G.order * self.a_order, G.p, np.concatenate([lifts, units]), name)

    def split(self, x):
        x = np.asarray(x, dtype=np.int64)
        g, a = np.divmod(x, self.a_order)
        return g, (a[..., None] // self._radix) % self.moduli

    def join(self, g, coords):
        return np.asarray(g, dtype=np.int64) * self.a_order + (coords % self.moduli) @ self._radix

    def mul(self, x, y):
        g, a = self.split(x)
        h, b = self.split(y)
        gh = self.base.mul(g, h)
        return self.join(gh, a + b + self.cocycle.table[g, h])

    def inv(self, x):
        g, a = self.split(x)
        gi = self.base.inv(g)
        return self.join(gi, -a - self.cocycle.table[g, gi])

    def lift(self, g):
        return np.asarray(g, dtype=np.int64) * self.a_order

    def project(self, x):
        return np.asarray(x, dtype=np.int64) // self.a_order


@dataclass
class CentralExtension:
    """1 -> A -> total -> G -> 1 with A central, built from a cocycle."""

    base: GroupTable
    cocycle: Cocycle
    total: ExtensionGroup
    embedded: Subgroup
    label: tuple[int, ...] = ()

    @property
    def coefficients(self) -> AbelianInvariants:
        return self.cocycle.coefficients

    def projection(self, x):
        return self.total.project(x)

    @cached_property
    def derived(self) -> Subgroup:
        """gamma_2(total), generated by the commutators of lifts (central factors cancel)."""
        E = self.total
        x = E.lift(self.base.elements())
        values: set[int] = set()
        chunk = max(1, 2_000_000 // len(x))
        for start in range(0, len(x), chunk):
            c = E.comm(x[start : start + chunk, None], x[None, :])
            values.update(np.unique(c).tolist())
        return subgroup_closure(E, sorted(values))

    def embedded_is_central(self) -> bool:
        E = self.total
        a = self.embedded.elements()
        return all(np.array_equal(E.mul(a, g), E.mul(g, a)) for g in E.generators)

    def is_stem(self) -> bool:
        return self.embedded <= self.derived


def build_extension(G: GroupTable, A, f: Cocycle, check: bool = True) -> CentralExtension:
    """The central extension of G by A defined by f, after checking f exhaustively."""
    inv = A if isinstance(A, AbelianInvariants) else AbelianInvariants(tuple(A))
    if f.table.shape[:2] != (G.order, G.order):
        raise CocycleError("cocycle table does not match the group order")
    if inv != f.coefficients:
        raise CocycleError(f"cocycle takes values in {f.coefficients}, not {inv}")
    if check:
        if not f.is_normalized():
            raise CocycleError("cocycle is not normalized: f(1, g) or f(g, 1) is nonzero")
        bad = f.violations(G)
        if bad:
            g, h, k = bad[0]
            raise CocycleError(f"cocycle identity fails at (g, h, k) = ({g}, {h}, {k})")
    E = ExtensionGroup(G, f)
    embedded = subgroup_closure(E, E._radix.tolist())
    ext = CentralExtension(G, f, E, embedded)
    if check:
        if embedded.order != inv.order or not ext.embedded_is_central():
            raise CocycleError("kernel of the extension is not a central copy of A")
    return ext


# ---------------------------------------------------------------------------
# Tails data


@dataclass
class _Tails:
    P: PcPresentation
    group: PcGroup
    d: list[int]  # Smith diagonal of the tail relations, padded with zeros
    V: np.ndarray  # object array: x -> x V gives Smith coordinates
    Vinv: np.ndarray
    Pi: np.ndarray  # n x T exponent sums of the tails
    tau: list[np.ndarray] = field(repr=False, default_factory=list)

    @property
    def torsion(self) -> list[int]:
        return [i for i, x in enumerate(self.d) if x > 1]

    @property
    def free(self) -> list[int]:
        return [i for i, x in enumerate(self.d) if x == 0]

    def cocycle_values(self, Psi: np.ndarray, q: int) -> np.ndarray:
        """Table of t(g, h) Psi mod q for a T x r integer matrix Psi."""
        G = self.group
        N = G.order
        r = Psi.shape[1]
        P = self.P
        proj = [(t @ Psi) % q for t in self.tau]
        out = np.zeros((N, N, r), dtype=np.int64)
        if N == 1:
            return out
        E = G.exponents
        nz = E != 0
        last = np.where(nz.any(axis=1), P.n - 1 - np.argmax(nz[:, ::-1], axis=1), -1)
        weights = G.p ** np.arange(P.n - 1, -1, -1, dtype=np.int64)
        x = G.elements()
        for y in range(1, N):
            k = last[y]
            y0 = y - weights[k]
            # s(x)s(y) = s(x)s(y0)g_k = s(x y0) g_k t(x, y0)
            out[:, y] = (out[:, y0] + proj[k][G.table[x, y0]]) % q
        return out


def _exponent_sums(P: PcPresentation) -> np.ndarray:
    n = P.n
    Pi = np.zeros((n, P.tail_count), dtype=np.int64)
    for i in range(n):
        Pi[:, i] = -np.asarray(P.powers[i], dtype=np.int64)
        Pi[i, i] += P.p
    for i in range(n):
        for j in range(i + 1, n):
            t = P.conjugate_tail(i, j)
            w = np.asarray(P.conjugate(i, j), dtype=np.int64).copy()
            w[j] -= 1  # the conjugate word is g_j u_ij
            Pi[:, t] = -w
    return Pi


def _tails(P: PcPresentation) -> _Tails:
    P.require_consistent()
    return _tails_cached(P)


@lru_cache(maxsize=16)
def _tails_cached(P: PcPresentation) -> _Tails:
    G = pc_group(P)
    T = P.tail_count
    S = tail_relations(P)
    if S.shape[0]:
        D, _, V, Vinv = smith_form(S, with_inverse=True)
        d = [D[i][i] if i < len(D) else 0 for i in range(T)]
    else:
        V = [[int(i == j) for j in range(T)] for i in range(T)]
        Vinv = V
        d = [0] * T
    _, tau = right_multiplication_tables(P, with_tails=True)
    return _Tails(
        P, G, [abs(int(x)) for x in d],
        np.array(V, dtype=object).reshape(T, T),
        np.array(Vinv, dtype=object).reshape(T, T),
        _exponent_sums(P), list(tau),
    )


def _presentation(G) -> PcPresentation:
    if isinstance(G, PcPresentation):
        return G
    P = getattr(G, "presentation", None)
    if P is None:
        raise TypeError("covers are built from a polycyclic presentation")
    return P


def _mod_array(M, q: int) -> np.ndarray:
    return np.array([[int(x) % q for x in row] for row in np.asarray(M, dtype=object)],
                    dtype=np.int64).reshape(np.shape(M))


def _row_span_test(Pi: np.ndarray):
    """Membership test for the row span of an integer matrix modulo a."""
    n, T = Pi.shape
    if n == 0:
        return lambda vec, a: not np.any(np.asarray(vec) % a)
    D, _, W = smith_form(Pi)
    diag = [D[i][i] if i < n else 0 for i in range(T)]
    W = np.array(W, dtype=object).reshape(T, T)

    def member(vec, a: int) -> bool:
        coords = np.asarray(vec, dtype=object) @ W
        return all(int(c) % gcd(int(diag[i]), a) == 0 for i, c in enumerate(coords))

    return member


def _is_coboundary(tails: _Tails, Psi: np.ndarray, moduli) -> bool:
    member = _row_span_test(tails.Pi)
    return all(member(Psi[:, k], int(a)) for k, a in enumerate(moduli))


# ---------------------------------------------------------------------------
# Cohomology with cyclic coefficients


def cocycle_basis(G, q: int) -> list[Cocycle]:
    """Cocycles whose classes generate H^2(G, Z/q), one per invariant factor.

    The i-th returned class has order equal to the i-th invariant factor, in
    ascending order.
    """
    P = _presentation(G)
    if P.n == 0:
        return []
    p = P.p
    b = 0
    while p**b < q:
        b += 1
    if p**b != q or q == 1:
        raise ValueError(f"coefficient modulus must be a positive power of {p}")
    tails = _tails(P)
    T = P.tail_count
    g = [gcd(int(x), q) if x else q for x in tails.d]
    # Hom(X, Z/q) in Smith coordinates: omega_i in (q / g_i) Z/q, with
    # generator coordinate c_i = omega_i / (q / g_i) mod g_i
    rel = [[g[i] if j == i else 0 for j in range(T)] for i in range(T)]
    image = tails.Vinv @ tails.Pi.T.astype(object)  # columns are chi o pi in omega coordinates
    for j in range(P.n):
        col = image[:, j]
        rel.append([int(col[i]) // (q // g[i]) for i in range(T)])
    D, _, W, Winv = smith_form(rel, with_inverse=True)
    out = []
    order = []
    for l in range(T):
        e = abs(D[l][l]) if l < len(D) else 0
        if e == 1:
            continue
        c = np.array(Winv[l], dtype=object)
        omega = np.array([int(c[i]) * (q // g[i]) for i in range(T)], dtype=object)
        psi = _mod_array((tails.V @ omega).reshape(T, 1), q)
        out.append(Cocycle(tails.cocycle_values(psi, q), (q,)))
        order.append(e)
    return [out[i] for i in np.argsort(order, kind="stable")]


# ---------------------------------------------------------------------------
# Stem covers


def _sweep(tails: _Tails):
    """Projection matrices X -> M in sweep order, with their coefficient labels.

    Candidate 0 is the projection onto the torsion coordinates; the rest add
    c_jk times free coordinate j to factor k, coefficients in [0, p) taken in
    lexicographic order.
    """
    tors = tails.torsion
    free = tails.free
    moduli = [tails.d[i] for i in tors]
    V = tails.V
    T = len(tails.d)
    base = np.zeros((T, len(tors)), dtype=object)
    for k, i in enumerate(tors):
        base[:, k] = V[:, i]
    slots = [(j, k) for j in free for k in range(len(tors))]
    for coeffs in itertools.product(range(tails.P.p), repeat=len(slots)):
        Psi = base.copy()
        for (j, k), c in zip(slots, coeffs):
            if c:
                Psi[:, k] = Psi[:, k] + c * V[:, j]
        yield coeffs, Psi, moduli


def stem_covers(G, cap: int = SWEEP_CAP, distinct: bool = False):
    """Stem covers of G in sweep order.

    With ``distinct`` a cover is only yielded if its cohomology class differs
    from all earlier yielded ones.
    """
    P = _presentation(G)
    tails = _tails(P)
    base_group = tails.group
    q = P.order
    seen: list[np.ndarray] = []
    for count, (coeffs, Psi, moduli) in enumerate(_sweep(tails)):
        if count >= cap:
            raise SearchExhaustedError(
                f"no further stem cover among the first {cap} candidates "
                f"(multiplier {AbelianInvariants(tuple(moduli))}, {len(tails.free)} free tails)"
            )
        if distinct and any(_is_coboundary(tails, Psi - old, moduli) for old in seen):
            continue
        Psi_q = _mod_array(Psi, q)
        f = Cocycle(tails.cocycle_values(Psi_q, q), moduli)
        ext = build_extension(base_group, f.coefficients, f)
        ext.label = coeffs
        if ext.is_stem():
            seen.append(Psi)
            yield ext


def find_stem_cover(G, cap: int = SWEEP_CAP) -> CentralExtension:
    """First stem cover of G in sweep order."""
    for ext in stem_covers(G, cap):
        return ext
    raise SearchExhaustedError("sweep produced no candidates")


# ---------------------------------------------------------------------------
# Exterior square


@dataclass
class ExteriorSquare:
    """gamma_2 of a stem cover, with its multiplier copy and the map onto gamma_2(G)."""

    cover: CentralExtension
    subgroup: Subgroup  # gamma_2(cover) inside the cover

    @cached_property
    def group(self) -> SubgroupGroup:
        return SubgroupGroup(self.subgroup, name="exterior square")

    @property
    def order(self) -> int:
        return self.subgroup.order

    @cached_property
    def multiplier(self) -> Subgroup:
        """The embedded copy of H_2(G, Z) as a subgroup of ``group``."""
        W = self.group
        inside = self.cover.embedded.elements()
        return subgroup_closure(W, np.searchsorted(W.members, inside))

    def projection(self, x):
        """Image in G of an element of ``group`` (lands in gamma_2(G))."""
        return self.cover.projection(self.group.members[x])

    @cached_property
    def exponent(self) -> int:
        return exponent(self.subgroup)

    def quotient_census(self) -> dict[int, int]:
        """Element-order census of gamma_2(cover)/A.

        The projection to G has kernel A on gamma_2(cover), so the quotient is
        read off the image.
        """
        image = np.unique(self.cover.projection(self.subgroup.elements()))
        orders, counts = np.unique(element_orders(self.cover.base, image), return_counts=True)
        return {int(o): int(c) for o, c in zip(orders, counts)}

    def multiplier_is_normal(self) -> bool:
        return is_normal(self.group, self.multiplier)


def exterior_square(G, cap: int = SWEEP_CAP) -> ExteriorSquare:
    cover = find_stem_cover(G, cap)
    return ExteriorSquare(cover, cover.derived)


def wedge_exponent(G, cap: int = SWEEP_CAP) -> int:
    return exterior_square(G, cap).exponent
