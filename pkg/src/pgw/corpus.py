"""Builtin corpus of presentations."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from pgw.pcp import PcPresentation, parse_pcp


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    family: str
    presentation: PcPresentation
    order: int | None = None
    nilpotency_class: int | None = None


def partitions(n: int, largest: int | None = None):
    """Partitions of n as non-increasing tuples."""
    largest = n if largest is None else largest
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in partitions(n - first, first):
            yield (first,) + rest


def abelian(p: int, partition: tuple[int, ...]) -> PcPresentation:
    """Direct product of cyclic groups of orders p^a for a in ``partition``.

    A factor of order p^a uses generators x, x^p, ..., x^(p^(a-1)).
    """
    names: list[str] = []
    powers: list[list[int]] = []
    n = sum(partition)
    for k, a in enumerate(partition):
        letter = "abcdefgh"[k]
        start = len(names)
        for s in range(a):
            names.append(letter if s == 0 else f"{letter}{s}")
            w = [0] * n
            if s + 1 < a:
                w[start + s + 1] = 1
            powers.append(w)
    return PcPresentation(p, tuple(names), tuple(tuple(w) for w in powers)).with_consistency()


def heisenberg(p: int) -> PcPresentation:
    return parse_pcp(f"pgroup p={p}\ngens a b c\nconj b^a = b*c\n").with_consistency()


def modular(p: int) -> PcPresentation:
    """Extraspecial group of order p^3 and exponent p^2 (p odd): a^(p^2) = b^p = 1."""
    return parse_pcp(f"pgroup p={p}\ngens a b c\npow a = c\nconj b^a = b*c\n").with_consistency()


WREATH_3_3 = """\
# C3 wr C3: base F3[x]/(x^3) with the top generator acting as 1 + x
pgroup p=3
gens a b1 b2 b3
conj b1^a = b1*b2
conj b2^a = b2*b3
"""

MAXCLASS_243 = """\
# (C9 x C9) : C3, the ring Z3[w]/(w-1)^4 twisted by multiplication by w
pgroup p=3
gens a b1 b2 b3 b4
pow b1 = b3^2*b4
pow b2 = b4^2
conj b1^a = b1*b2
conj b2^a = b2*b3
conj b3^a = b3*b4
"""

DIHEDRAL_8 = """\
pgroup p=2
gens s r z
pow r = z
conj r^s = r*z
"""

QUATERNION_8 = """\
pgroup p=2
gens i j z
pow i = z
pow j = z
conj j^i = j*z
"""


def _sift(mats: list[np.ndarray], M: np.ndarray, positions, p: int) -> tuple[int, ...]:
    """Exponents of M over the elementary unitriangular generators, in pc order."""
    M = M.copy() % p
    word = []
    for (i, j), X in zip(positions, mats):
        e = int(M[i, j]) % p
        word.append(e)
        if e:
            M = (np.linalg.matrix_power(X, p - e) @ M) % p
    if not np.array_equal(M, np.eye(len(M), dtype=np.int64)):
        raise ValueError("matrix is not in the unitriangular group")
    return tuple(word)


def unitriangular_positions(d: int) -> list[tuple[int, int]]:
    return [(i, i + level) for level in range(1, d) for i in range(d - level)]


def unitriangular(d: int, p: int) -> PcPresentation:
    """Upper unitriangular d x d matrices over F_p, generated by I + E_ij ordered by
    superdiagonal then row."""
    if d > 2 and p < d - 1:
        raise ValueError("elementary generators need p >= d-1 to have order p")
    positions = unitriangular_positions(d)
    mats = []
    for i, j in positions:
        X = np.eye(d, dtype=np.int64)
        X[i, j] = 1
        mats.append(X)
    n = len(positions)
    names = tuple(f"x{i + 1}{j + 1}" for i, j in positions)
    powers = tuple(_sift(mats, np.linalg.matrix_power(X, p) % p, positions, p) for X in mats)
    conj = {}
    for a in range(n):
        for b in range(a + 1, n):
            Xa_inv = np.linalg.matrix_power(mats[a], p - 1) % p
            w = _sift(mats, (Xa_inv @ mats[b] @ mats[a]) % p, positions, p)
            if w != tuple(int(k == b) for k in range(n)):
                conj[(a, b)] = w
    return PcPresentation(p, names, powers, conj).with_consistency()


def direct_product(P: PcPresentation, Q: PcPresentation, suffix: str = "_2") -> PcPresentation:
    if P.p != Q.p:
        raise ValueError("direct product of groups for different primes")
    n, m = P.n, Q.n
    names = P.names + tuple(
        name if name not in P.names else name + suffix for name in Q.names
    )
    powers = tuple(w + (0,) * m for w in P.powers) + tuple((0,) * n + w for w in Q.powers)
    conj = {key: w + (0,) * m for key, w in P.conjugates.items()}
    conj.update({(i + n, j + n): (0,) * n + w for (i, j), w in Q.conjugates.items()})
    return PcPresentation(P.p, names, powers, conj).with_consistency()


def _partition_name(p: int, part: tuple[int, ...]) -> str:
    return "abelian-" + "x".join(f"C{p ** a}" for a in part)


@lru_cache(maxsize=None)
def corpus_builtin() -> tuple[CorpusEntry, ...]:
    entries: list[CorpusEntry] = []
    for p in (2, 3, 5):
        for total in range(1, 6):
            for part in partitions(total):
                entries.append(
                    CorpusEntry(_partition_name(p, part), "abelian", abelian(p, part), p**total, 1)
                )
    for p in (3, 5):
        entries.append(CorpusEntry(f"heisenberg-{p}", "extraspecial", heisenberg(p), p**3, 2))
        entries.append(CorpusEntry(f"modular-{p}", "extraspecial", modular(p), p**3, 2))
    entries.append(CorpusEntry("dihedral-8", "2-group", parse_pcp(DIHEDRAL_8).with_consistency(), 8, 2))
    entries.append(CorpusEntry("quaternion-8", "2-group", parse_pcp(QUATERNION_8).with_consistency(), 8, 2))
    entries.append(CorpusEntry("unitriangular-3-3", "unitriangular", unitriangular(3, 3), 27, 2))
    entries.append(CorpusEntry("unitriangular-4-3", "unitriangular", unitriangular(4, 3), 729, 3))
    entries.append(CorpusEntry("wreath-C3-C3", "wreath", parse_pcp(WREATH_3_3).with_consistency(), 81, 3))
    entries.append(CorpusEntry("maxclass-243", "maximal-class", parse_pcp(MAXCLASS_243).with_consistency(), 243, 4))
    entries.append(CorpusEntry("heisenberg-3-x-C3", "direct-product", direct_product(heisenberg(3), abelian(3, (1,))), 81, 2))
    entries.append(CorpusEntry("modular-3-x-C3", "direct-product", direct_product(modular(3), abelian(3, (1,))), 81, 2))
    entries.append(CorpusEntry("dihedral-8-x-C2", "direct-product", direct_product(parse_pcp(DIHEDRAL_8).with_consistency(), abelian(2, (1,))), 16, 2))
    return tuple(entries)


def corpus_by_name(name: str) -> CorpusEntry:
    for entry in corpus_builtin():
        if entry.name == name:
            return entry
    raise KeyError(name)


def load_corpus_dir(path: str | Path) -> list[CorpusEntry]:
    """Every ``*.pcp`` file in a directory, sorted by name, as consistency-checked entries."""
    out = []
    for f in sorted(Path(path).glob("*.pcp")):
        P = parse_pcp(f.read_text(encoding="utf-8")).with_consistency()
        out.append(CorpusEntry(f.stem, "file", P))
    return out
