"""Schur multipliers H_2(G, Z) of finite p-groups.

Two routes, both finishing with elimination over Z/p^m and the same stripping
step:

* ``"bar"``: columns of the normalized bar boundary d3 are streamed through
  a ModularColumnReducer. coker(d3) = H_2(G, Z) + Z^(|G|-1) (the free part is
  the image of d2), so after reducing mod p^m the multiplier is what is left
  once |G|-1 copies of Z/p^m are removed.
* ``"tails"``: every relation of the polycyclic presentation gets a free
  central tail; the overlap tests give the relations among tails. The tails
  group is R/[F, R] = H_2(G, Z) + Z^n for F free of rank n, so n copies of
  Z/p^m are removed.

The stripping is exact whenever p^m >= exp(H_2(G, Z)); since |G| annihilates
H_2, the default m = log_p |G| always suffices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from pgw.groups import GroupTable, PcGroup, Subgroup, as_subgroup, element_orders, is_abelian
from pgw.linalg import ModularColumnReducer, cokernel_invariants_mod, smith_valuations_mod
from pgw.pcp import PcPresentation, tail_relations

DEFAULT_BAR_CAP = 16


@dataclass(frozen=True)
class AbelianInvariants:
    """Orders of the cyclic factors of a finite abelian p-group, descending."""

    factors: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(sorted((int(f) for f in self.factors if f != 1), reverse=True)))

    @property
    def order(self) -> int:
        out = 1
        for f in self.factors:
            out *= f
        return out

    @property
    def exponent(self) -> int:
        return self.factors[0] if self.factors else 1

    @property
    def rank(self) -> int:
        return len(self.factors)

    def __add__(self, other: "AbelianInvariants") -> "AbelianInvariants":
        return AbelianInvariants(self.factors + other.factors)

    def __iter__(self):
        return iter(self.factors)

    def __len__(self):
        return len(self.factors)

    def __str__(self) -> str:
        return "{" + ", ".join(map(str, self.factors)) + "}" if self.factors else "{}"


class ModulusTooSmallError(ArithmeticError):
    pass


def exterior_square_invariants(inv: Iterable[int]) -> AbelianInvariants:
    """Invariants of the exterior square of an abelian group: Z/min(a_i, a_j) for i < j."""
    f = sorted(inv, reverse=True)
    return AbelianInvariants(tuple(f[j] for i in range(len(f)) for j in range(i + 1, len(f))))


def abelian_invariants(A) -> AbelianInvariants:
    """Invariants of an abelian p-group from its element-order census.

    The number of elements of order dividing p^k is p^(sum min(a_i, k)), so the
    count of factors of order at least p^k is a first difference of logs.
    """
    X = as_subgroup(A)
    if not is_abelian(X):
        raise ValueError("abelian_invariants needs an abelian group")
    p = X.group.p
    orders = element_orders(X.group, X.elements())
    logs = [0]
    k = 1
    while True:
        count = int(np.sum(orders <= p**k))
        logs.append(_ilog(count, p))
        if count == X.order:
            break
        k += 1
    at_least = [logs[k] - logs[k - 1] for k in range(1, len(logs))]
    at_least.append(0)
    factors = []
    for k in range(1, len(at_least)):
        factors.extend([p**k] * (at_least[k - 1] - at_least[k]))
    return AbelianInvariants(tuple(factors))


def _ilog(x: int, p: int) -> int:
    t = 0
    while x > 1:
        if x % p:
            raise ValueError(f"{x} is not a power of {p}")
        x //= p
        t += 1
    return t


def _strip(invariants: list[int], q: int, copies: int) -> AbelianInvariants:
    have = invariants.count(q)
    if have < copies:
        raise ModulusTooSmallError(
            f"expected at least {copies} factors of order {q}, found {have}; raise the modulus"
        )
    rest = list(invariants)
    for _ in range(copies):
        rest.remove(q)
    return AbelianInvariants(tuple(rest))


# ---------------------------------------------------------------------------
# Normalized bar complex


def boundary_apply(G: GroupTable, k: int, chain: tuple[int, ...]) -> dict[tuple[int, ...], int]:
    """Boundary of one normalized bar generator (g_1|...|g_k) with nonidentity entries.

    Faces containing the identity are dropped and coincident faces merged.
    """
    if k not in (1, 2, 3) or len(chain) != k:
        raise ValueError("boundary_apply supports k in {1, 2, 3}")
    if any(int(g) == 0 for g in chain):
        raise ValueError("normalized generators have nonidentity entries")
    out: dict[tuple[int, ...], int] = {}

    def add(face, c):
        if any(g == 0 for g in face):
            return
        out[face] = out.get(face, 0) + c
        if out[face] == 0:
            del out[face]

    g = tuple(int(x) for x in chain)
    if k == 1:
        return out
    add(g[1:], 1)
    for i in range(k - 1):
        merged = g[:i] + (int(G.mul(g[i], g[i + 1])),) + g[i + 2 :]
        add(merged, (-1) ** (i + 1))
    add(g[:-1], (-1) ** k)
    return out


def d3_block(G: GroupTable, g: int) -> np.ndarray:
    """Dense columns of d3 for all generators (g|h|k), as a (|G|-1)^2 x (|G|-1)^2 array.

    Row (a|b) has index (a-1)(|G|-1) + (b-1); column (g|h|k) has index
    (h-1)(|G|-1) + (k-1).
    """
    N = G.order
    s = N - 1
    h = np.repeat(np.arange(1, N), s)
    k = np.tile(np.arange(1, N), s)
    col = np.arange(s * s)
    block = np.zeros((s * s, s * s), dtype=np.int64)
    gh = G.mul(g, h)
    hk = G.mul(h, k)
    # (h|k) - (gh|k) + (g|hk) - (g|h), identity faces dropped
    np.add.at(block, ((h - 1) * s + (k - 1), col), 1)
    keep = gh != 0
    np.add.at(block, ((gh[keep] - 1) * s + (k[keep] - 1), col[keep]), -1)
    keep = hk != 0
    np.add.at(block, ((g - 1) * s + (hk[keep] - 1), col[keep]), 1)
    np.add.at(block, ((g - 1) * s + (h - 1), col), -1)
    return block


def _bar_cokernel(G: GroupTable, m: int) -> list[int]:
    N = G.order
    reducer = ModularColumnReducer((N - 1) ** 2, G.p, m)
    for g in range(1, N):
        reducer.add_columns(d3_block(G, g))
    return reducer.cokernel_invariants()


def _tails_cokernel(P: PcPresentation, m: int) -> list[int]:
    S = tail_relations(P)
    vals = smith_valuations_mod(S, P.p, m) if S.size else []
    return cokernel_invariants_mod(vals, P.tail_count, P.p, m)


def multiplier_invariants(
    G: GroupTable | PcPresentation,
    method: str = "auto",
    modulus_exp: int | None = None,
    bar_cap: int = DEFAULT_BAR_CAP,
) -> AbelianInvariants:
    """Invariants of the Schur multiplier H_2(G, Z).

    ``method`` is ``"bar"``, ``"tails"`` or ``"auto"`` (bar complex up to
    ``bar_cap`` elements, tails beyond). ``modulus_exp`` is m in the working
    modulus p^m, default log_p |G|.
    """
    if isinstance(G, PcPresentation):
        P, table = G, None
    else:
        P, table = getattr(G, "presentation", None), G
    order = P.order if P is not None else table.order
    p = P.p if P is not None else table.p
    if order == 1:
        return AbelianInvariants()
    m = _ilog(order, p) if modulus_exp is None else modulus_exp
    if m < 1:
        raise ValueError("modulus exponent must be positive")
    if method == "auto":
        method = "bar" if order <= bar_cap or P is None else "tails"
    if method == "bar":
        if table is None:
            from pgw.groups import pc_group

            table = pc_group(P)
        coker = _bar_cokernel(table, m)
        return _strip(coker, p**m, order - 1)
    if method == "tails":
        if P is None:
            raise ValueError("the tails method needs a polycyclic presentation")
        coker = _tails_cokernel(P, m)
        return _strip(coker, p**m, P.n)
    raise ValueError(f"unknown method {method!r}")


def multiplier_exponent(G, **kwargs) -> int:
    return multiplier_invariants(G, **kwargs).exponent
