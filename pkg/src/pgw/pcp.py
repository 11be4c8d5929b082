"""Refined polycyclic presentations of finite p-groups and collection from the left.

A presentation has generators g_0, ..., g_{n-1}, every relative order equal to
``p``, power relations ``g_i^p = w_i`` with ``w_i`` a normal word in generators
of index > i, and conjugate relations ``g_j^{g_i} = g_i^-1 g_j g_i = g_j * u_ij``
with ``u_ij`` a normal word in generators of index > j.

Normal words are exponent tuples of length n with entries in ``[0, p)``,
least index first; the zero tuple is the identity.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

DEFAULT_STEP_LIMIT = 10**8

NormalWord = tuple[int, ...]
GenWord = Sequence[tuple[int, int]]


class PresentationError(ValueError):
    """Malformed or structurally invalid presentation."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column or 1}: {message}"
        super().__init__(message)


class CollectionLimitError(RuntimeError):
    """Collection exceeded its rewrite-step budget."""


class InconsistentPresentationError(ValueError):
    """An operation that needs a consistent presentation was given one that is not."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True, eq=False)
class PcPresentation:
    p: int
    names: tuple[str, ...]
    powers: tuple[NormalWord, ...]
    conjugates: Mapping[tuple[int, int], NormalWord] = field(default_factory=dict)
    consistent: bool = False

    def __post_init__(self):
        p, n = self.p, len(self.names)
        if not is_prime(p):
            raise PresentationError(f"p={p} is not prime")
        if len(set(self.names)) != n:
            raise PresentationError("duplicate generator names")
        if len(self.powers) != n:
            raise PresentationError("one power relation per generator is required")
        for i, w in enumerate(self.powers):
            _check_word(w, n, p)
            if any(w[: i + 1]):
                raise PresentationError(
                    f"power relation of {self.names[i]} uses a generator of index <= {i}"
                )
        for (i, j), w in self.conjugates.items():
            if not 0 <= i < j < n:
                raise PresentationError(f"conjugate relation ({i}, {j}) needs i < j")
            _check_word(w, n, p)
            if any(w[:j]) or w[j] != 1:
                raise PresentationError(
                    f"conjugate relation {self.names[j]}^{self.names[i]} must be "
                    f"{self.names[j]} times a word in later generators"
                )

    def __eq__(self, other):
        if not isinstance(other, PcPresentation):
            return NotImplemented
        return (
            self.p == other.p
            and self.names == other.names
            and self.powers == other.powers
            and self.conjugate_table == other.conjugate_table
        )

    def __hash__(self):
        return hash((self.p, self.names, self.powers, tuple(sorted(self.conjugate_table.items()))))

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def order(self) -> int:
        return self.p**self.n

    @property
    def identity(self) -> NormalWord:
        return (0,) * self.n

    def generator(self, i: int) -> NormalWord:
        return tuple(1 if k == i else 0 for k in range(self.n))

    def conjugate(self, i: int, j: int) -> NormalWord:
        return self.conjugates.get((i, j), self.generator(j))

    @cached_property
    def conjugate_table(self) -> dict[tuple[int, int], NormalWord]:
        return {(i, j): self.conjugate(i, j) for i in range(self.n) for j in range(i + 1, self.n)}

    @cached_property
    def power_letters(self) -> tuple[tuple[int, ...], ...]:
        return tuple(letters(w) for w in self.powers)

    @cached_property
    def conjugate_letters(self) -> dict[tuple[int, int], tuple[int, ...]]:
        return {key: letters(w) for key, w in self.conjugate_table.items()}

    # Tails: one free central symbol per relation, powers first, then
    # conjugates in lexicographic (i, j) order.
    @property
    def tail_count(self) -> int:
        return self.n + self.n * (self.n - 1) // 2

    def conjugate_tail(self, i: int, j: int) -> int:
        n = self.n
        return n + i * (2 * n - i - 1) // 2 + (j - i - 1)

    def tail_labels(self) -> list[str]:
        labels = [f"{g}^{self.p}" for g in self.names]
        for i in range(self.n):
            for j in range(i + 1, self.n):
                labels.append(f"{self.names[j]}^{self.names[i]}")
        return labels

    def with_consistency(self) -> "PcPresentation":
        """Return a copy flagged consistent, or raise if the overlap test fails."""
        failures = consistency_check(self)
        if failures:
            raise InconsistentPresentationError(
                f"{len(failures)} overlap test(s) fail, first: {failures[0].description}"
            )
        return PcPresentation(self.p, self.names, self.powers, dict(self.conjugates), True)

    def require_consistent(self) -> None:
        if not self.consistent:
            raise InconsistentPresentationError("presentation has not passed consistency_check")

    def format_word(self, w: NormalWord) -> str:
        factors = [
            self.names[i] if e == 1 else f"{self.names[i]}^{e}" for i, e in enumerate(w) if e
        ]
        return "*".join(factors) or "1"

    def to_text(self) -> str:
        lines = [f"pgroup p={self.p}", "gens " + " ".join(self.names)]
        for i, w in enumerate(self.powers):
            if any(w):
                lines.append(f"pow {self.names[i]} = {self.format_word(w)}")
        for (i, j), w in sorted(self.conjugate_table.items()):
            if w != self.generator(j):
                lines.append(f"conj {self.names[j]}^{self.names[i]} = {self.format_word(w)}")
        return "\n".join(lines) + "\n"


def _check_word(w: NormalWord, n: int, p: int) -> None:
    if len(w) != n:
        raise PresentationError(f"word {w} has length {len(w)}, expected {n}")
    for e in w:
        if not 0 <= e < p:
            raise PresentationError(f"exponent {e} outside [0, {p})")


def letters(w: NormalWord) -> tuple[int, ...]:
    """Expand a normal word into single-generator letters."""
    out: list[int] = []
    for i, e in enumerate(w):
        out.extend([i] * e)
    return tuple(out)


# ---------------------------------------------------------------------------
# Parsing

_HEADER = re.compile(r"^pgroup\s+p\s*=\s*(\S+)\s*$")
_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def parse_pcp(text: str) -> PcPresentation:
    """Parse the line-oriented presentation format.

    ``pgroup p=<prime>``, ``gens <names>``, then ``pow <g> = <word>`` and
    ``conj <gj>^<gi> = <word>`` lines; ``#`` starts a comment. Omitted power
    relations are trivial and omitted conjugate relations mean commuting.
    """
    lines = [
        (no, raw.split("#", 1)[0].rstrip()) for no, raw in enumerate(text.splitlines(), start=1)
    ]
    lines = [(no, s) for no, s in lines if s.strip()]
    if not lines:
        raise PresentationError("empty presentation")

    no, header = lines[0]
    m = _HEADER.match(header.strip())
    if not m:
        raise PresentationError("expected 'pgroup p=<prime>'", no, 1)
    try:
        p = int(m.group(1))
    except ValueError:
        raise PresentationError(f"invalid prime {m.group(1)!r}", no, header.index(m.group(1)) + 1)
    if not is_prime(p):
        raise PresentationError(f"p={p} is not prime", no, header.index(m.group(1)) + 1)

    if len(lines) < 2 or not lines[1][1].strip().startswith("gens"):
        at = lines[1][0] if len(lines) > 1 else no + 1
        raise PresentationError("expected 'gens <name> ...'", at, 1)
    no, gens_line = lines[1]
    names = gens_line.split()[1:]
    for name in names:
        if not _NAME.match(name):
            raise PresentationError(f"invalid generator name {name!r}", no, gens_line.index(name) + 1)
    if len(set(names)) != len(names):
        raise PresentationError("duplicate generator name", no, 1)
    index = {name: i for i, name in enumerate(names)}
    n = len(names)

    powers = [(0,) * n for _ in range(n)]
    conjugates: dict[tuple[int, int], NormalWord] = {}
    for no, line in lines[2:]:
        stripped = line.lstrip()
        offset = len(line) - len(stripped)
        if "=" not in stripped:
            raise PresentationError("expected '='", no, offset + 1)
        lhs, rhs = stripped.split("=", 1)
        rhs_col = offset + len(lhs) + 2
        keyword, _, target = lhs.strip().partition(" ")
        target = target.strip()
        word = _parse_word(rhs, index, p, no, rhs_col)
        if keyword == "pow":
            if target not in index:
                raise PresentationError(f"unknown generator {target!r}", no, offset + 5)
            i = index[target]
            bad = [k for k, e in enumerate(word) if e and k <= i]
            if bad:
                raise PresentationError(
                    f"power relation of {target} must use generators after {target}, "
                    f"got {names[bad[0]]}",
                    no,
                    rhs_col,
                )
            powers[i] = word
        elif keyword == "conj":
            parts = target.split("^")
            if len(parts) != 2 or parts[0] not in index or parts[1] not in index:
                raise PresentationError(f"expected '<gj>^<gi>', got {target!r}", no, offset + 6)
            j, i = index[parts[0]], index[parts[1]]
            if not i < j:
                raise PresentationError(
                    f"conjugate relation {target} needs the exponent generator first in order",
                    no,
                    offset + 6,
                )
            bad = [k for k, e in enumerate(word) if e and k < j]
            if bad:
                raise PresentationError(
                    f"conjugate relation {target} uses {names[bad[0]]}, which precedes {parts[0]}",
                    no,
                    rhs_col,
                )
            if word[j] != 1:
                raise PresentationError(
                    f"conjugate relation {target} must start with {parts[0]}^1", no, rhs_col
                )
            conjugates[(i, j)] = word
        else:
            raise PresentationError(f"unknown statement {keyword!r}", no, offset + 1)
    return PcPresentation(p, tuple(names), tuple(powers), conjugates)


def _parse_word(text: str, index: Mapping[str, int], p: int, line: int, col: int) -> NormalWord:
    n = len(index)
    exps = [0] * n
    body = text.strip()
    col += len(text) - len(text.lstrip())
    if body == "1":
        return tuple(exps)
    last = -1
    pos = col
    for factor in body.split("*"):
        f = factor.strip()
        name, _, exp = f.partition("^")
        name = name.strip()
        if name not in index:
            raise PresentationError(f"unknown generator {name!r}", line, pos)
        try:
            e = int(exp) if exp else 1
        except ValueError:
            raise PresentationError(f"invalid exponent {exp!r}", line, pos)
        if not 0 <= e < p:
            raise PresentationError(f"exponent {e} outside [0, {p})", line, pos)
        k = index[name]
        if k <= last:
            raise PresentationError("word factors must be in increasing generator order", line, pos)
        last = k
        exps[k] = e
        pos += len(factor) + 1
    return tuple(exps)


# ---------------------------------------------------------------------------
# Collection


def _collect(
    P: PcPresentation,
    exps: list[int],
    todo: Iterable[int],
    tails: list[int] | None = None,
    limit: int = DEFAULT_STEP_LIMIT,
) -> None:
    """Right-multiply the collected word ``exps`` by the letters in ``todo``, in place.

    Each letter is moved into place by collection from the left; when ``tails``
    is given, every relation applied adds one to its tail coordinate.
    """
    p, n = P.p, P.n
    powers = P.power_letters
    conj = P.conjugate_letters
    stack = list(todo)
    stack.reverse()
    steps = 0
    while stack:
        k = stack.pop()
        steps += 1
        if steps > limit:
            raise CollectionLimitError(f"collection exceeded {limit} rewrite steps")
        pending: list[int] = []
        e = exps[k] + 1
        if e == p:
            exps[k] = 0
            pending.extend(powers[k])
            if tails is not None:
                tails[k] += 1
        else:
            exps[k] = e
        for j in range(k + 1, n):
            ej = exps[j]
            if ej:
                exps[j] = 0
                pending.extend(conj[(k, j)] * ej)
                if tails is not None:
                    tails[P.conjugate_tail(k, j)] += ej
        if pending:
            pending.reverse()
            stack.extend(pending)


def word_letters(P: PcPresentation, w: GenWord) -> list[int]:
    """Expand a generator word with arbitrary integer exponents into letters."""
    out: list[int] = []
    for i, e in w:
        if not 0 <= i < P.n:
            raise ValueError(f"generator index {i} out of range")
        if e >= 0:
            out.extend([i] * e)
        else:
            out.extend(letters(inverse(P, P.generator(i))) * (-e))
    return out


def collect(P: PcPresentation, w: GenWord, limit: int = DEFAULT_STEP_LIMIT) -> NormalWord:
    """Normal word equal to the generator word ``w`` (pairs ``(index, exponent)``)."""
    exps = [0] * P.n
    _collect(P, exps, word_letters(P, w), limit=limit)
    return tuple(exps)


def multiply(P: PcPresentation, x: NormalWord, y: NormalWord) -> NormalWord:
    exps = list(x)
    _collect(P, exps, letters(y))
    return tuple(exps)


def inverse(P: PcPresentation, x: NormalWord) -> NormalWord:
    # Kill the leading generator until nothing is left; the killing factors,
    # read in order, multiply to x^-1.
    p = P.p
    cur = list(x)
    inv = [0] * P.n
    for k in range(P.n):
        e = cur[k]
        if e:
            step = [k] * (p - e)
            _collect(P, cur, step)
            _collect(P, inv, step)
    return tuple(inv)


def power(P: PcPresentation, x: NormalWord, k: int) -> NormalWord:
    if k < 0:
        x, k = inverse(P, x), -k
    result = P.identity
    base = tuple(x)
    while k:
        if k & 1:
            result = multiply(P, result, base)
        k >>= 1
        if k:
            base = multiply(P, base, base)
    return result


def element_order(P: PcPresentation, x: NormalWord) -> int:
    P.require_consistent()
    order = 1
    identity = P.identity
    while tuple(x) != identity:
        x = power(P, x, P.p)
        order *= P.p
    return order


# ---------------------------------------------------------------------------
# Consistency


@dataclass(frozen=True)
class OverlapFailure:
    description: str
    lhs: NormalWord
    rhs: NormalWord


def _overlaps(P: PcPresentation):
    """The standard overlap test words, as pairs of bracketings.

    Each entry is ``(description, left, right)`` where a bracketing is a pair
    of factor lists ``(first, second)``: ``first`` is collected on its own and
    ``second`` is collected on its own, then the two results are multiplied.
    """
    n, p = P.n, P.p

    def g(i, e=1):
        w = [0] * n
        w[i] = e
        return tuple(w)

    names = P.names
    for k in range(n):
        for j in range(k):
            for i in range(j):
                yield (
                    f"{names[k]}({names[j]}{names[i]}) = ({names[k]}{names[j]}){names[i]}",
                    ([g(k)], [g(j), g(i)]),
                    ([g(k), g(j)], [g(i)]),
                )
    for j in range(n):
        for i in range(j):
            yield (
                f"({names[j]}^{p - 1}{names[j]}){names[i]} = {names[j]}^{p - 1}({names[j]}{names[i]})",
                ([g(j, p - 1), g(j)], [g(i)]),
                ([g(j, p - 1)], [g(j), g(i)]),
            )
            yield (
                f"{names[j]}({names[i]}^{p - 1}{names[i]}) = ({names[j]}{names[i]}^{p - 1}){names[i]}",
                ([g(j)], [g(i, p - 1), g(i)]),
                ([g(j), g(i, p - 1)], [g(i)]),
            )
    for i in range(n):
        yield (
            f"{names[i]}({names[i]}^{p - 1}{names[i]}) = ({names[i]}^{p - 1}{names[i]}){names[i]}",
            ([g(i)], [g(i, p - 1), g(i)]),
            ([g(i, p - 1), g(i)], [g(i)]),
        )


def _evaluate(P: PcPresentation, bracketing, tails: list[int] | None):
    first, second = bracketing
    left = [0] * P.n
    for w in first:
        _collect(P, left, letters(w), tails)
    right = [0] * P.n
    for w in second:
        _collect(P, right, letters(w), tails)
    _collect(P, left, letters(tuple(right)), tails)
    return tuple(left)


def consistency_check(P: PcPresentation) -> list[OverlapFailure]:
    """Evaluate every overlap test; an empty list means the group has order p^n."""
    failures = []
    for description, a, b in _overlaps(P):
        lhs = _evaluate(P, a, None)
        rhs = _evaluate(P, b, None)
        if lhs != rhs:
            failures.append(OverlapFailure(description, lhs, rhs))
    return failures


def tail_relations(P: PcPresentation) -> np.ndarray:
    """Integer relations among the relation tails forced by the overlap tests.

    Rows are tail-difference vectors of length ``P.tail_count``; zero rows are
    dropped. Requires a consistent presentation.
    """
    P.require_consistent()
    rows = []
    for _, a, b in _overlaps(P):
        ta = [0] * P.tail_count
        tb = [0] * P.tail_count
        lhs = _evaluate(P, a, ta)
        rhs = _evaluate(P, b, tb)
        assert lhs == rhs
        diff = [x - y for x, y in zip(ta, tb)]
        if any(diff):
            rows.append(diff)
    return np.array(rows, dtype=np.int64).reshape(-1, P.tail_count)


# ---------------------------------------------------------------------------
# Vectorised right-multiplication tables


def exponent_matrix(P: PcPresentation) -> np.ndarray:
    """Exponent vectors of all p^n normal words, row r is the word with index r.

    Indices read exponent vectors as base-p numerals, g_0 most significant.
    """
    n, p = P.n, P.p
    idx = np.arange(p**n, dtype=np.int64)
    E = np.empty((p**n, n), dtype=np.int64)
    for i in range(n - 1, -1, -1):
        E[:, i] = idx % p
        idx //= p
    return E


def word_index(P: PcPresentation, w: NormalWord) -> int:
    r = 0
    for e in w:
        r = r * P.p + e
    return r


def right_multiplication_tables(P: PcPresentation, with_tails: bool = False):
    """Tables ``R[k][x] = index of x * g_k`` for every element x.

    With ``with_tails`` also returns ``tau[k]`` of shape (p^n, tail_count):
    the tail vector picked up when the normal word of x is multiplied by g_k
    in the free tails extension. Built from the last generator backwards, so
    every letter pushed by a relation is applied through an already known table.
    """
    n, p = P.n, P.p
    N = p**n
    E = exponent_matrix(P)
    weights = p ** np.arange(n - 1, -1, -1, dtype=np.int64)
    T = P.tail_count
    R: list[np.ndarray | None] = [None] * n
    tau: list[np.ndarray | None] = [None] * n
    for k in range(n - 1, -1, -1):
        head = E[:, :k] @ weights[:k] if k else np.zeros(N, dtype=np.int64)
        ek = E[:, k] + 1
        overflow = ek == p
        y = head + (ek % p) * weights[k]
        tail = np.zeros((N, T), dtype=np.int64) if with_tails else None

        def apply(rows, word):
            for l in word:
                if with_tails:
                    tail[rows] += tau[l][y[rows]]
                y[rows] = R[l][y[rows]]

        rows = np.flatnonzero(overflow)
        if len(rows):
            if with_tails:
                tail[rows, k] += 1
            apply(rows, P.power_letters[k])
        for j in range(k + 1, n):
            word = P.conjugate_letters[(k, j)]
            t = P.conjugate_tail(k, j)
            for c in range(1, p):
                rows = np.flatnonzero(E[:, j] >= c)
                if not len(rows):
                    break
                if with_tails:
                    tail[rows, t] += 1
                apply(rows, word)
        R[k] = y
        tau[k] = tail
    if with_tails:
        return R, tau
    return R
