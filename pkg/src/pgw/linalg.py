"""Exact elimination over Z/p^m and Smith normal form over Z.

Z/p^m is a local principal ideal ring: every nonzero entry is p^v times a unit,
so pivoting on an entry of least valuation always divides the rest of its row
and column. That is the only pivot rule used here.
"""

from __future__ import annotations

import numpy as np


def valuations(a: np.ndarray, p: int, m: int) -> np.ndarray:
    """p-adic valuation of each entry of ``a`` (entries reduced mod p^m; 0 -> m)."""
    a = np.asarray(a) % p**m
    v = np.full(a.shape, m, dtype=np.int64)
    for k in range(m - 1, -1, -1):
        v[a % p ** (k + 1) != 0] = k
    return v


def _unit_inverse(u: int, q: int) -> int:
    return pow(int(u) % q, -1, q)


def smith_valuations_mod(A: np.ndarray, p: int, m: int) -> list[int]:
    """Valuations of the nonzero Smith diagonal of ``A`` over Z/p^m, ascending.

    Entries equal to zero mod p^m are omitted, so ``len(result)`` is the
    number of nonzero invariant factors.
    """
    q = p**m
    A = np.array(A, dtype=np.int64) % q
    out: list[int] = []
    while A.size and A.any():
        v = valuations(A, p, m)
        vmin = int(v.min())
        # least valuation, then lowest column, then lowest row
        cols = np.flatnonzero((v == vmin).any(axis=0))
        c = int(cols[0])
        r = int(np.flatnonzero(v[:, c] == vmin)[0])
        pv = p**vmin
        unit = int(A[r, c]) // pv
        row = (A[r] * _unit_inverse(unit, q)) % q  # pivot entry becomes p^vmin
        factors = (A[:, c] // pv) % q
        A = (A - np.outer(factors, row)) % q
        A = np.delete(np.delete(A, r, axis=0), c, axis=1)
        out.append(vmin)
    return sorted(out)


def cokernel_invariants_mod(vals: list[int], dim: int, p: int, m: int) -> list[int]:
    """Invariant factors of (Z/p^m)^dim modulo a submodule with Smith valuations ``vals``."""
    inv = [p**v for v in vals if v > 0]
    inv.extend([p**m] * (dim - len(vals)))
    return sorted(inv, reverse=True)


def column_echelon_mod(A: np.ndarray, p: int, m: int) -> np.ndarray:
    """Generators of the column span of ``A`` over Z/p^m, at most ``rows`` of them.

    Only column operations are used, so the span is unchanged.
    """
    q = p**m
    A = np.array(A, dtype=np.int64) % q
    rows, cols = A.shape
    kept: list[np.ndarray] = []
    active_rows = np.ones(rows, dtype=bool)
    while A.shape[1] and A.any():
        v = valuations(A, p, m)
        v[~active_rows] = m
        vmin = int(v.min())
        if vmin == m:
            break
        c = int(np.flatnonzero((v == vmin).any(axis=0))[0])
        r = int(np.flatnonzero(v[:, c] == vmin)[0])
        pv = p**vmin
        col = (A[:, c] * _unit_inverse(int(A[r, c]) // pv, q)) % q
        factors = (A[r] // pv) % q
        A = (A - np.outer(col, factors)) % q
        A = np.delete(A, c, axis=1)
        kept.append(col)
        active_rows[r] = False
        A = A[:, A.any(axis=0)]
    if not kept:
        return np.zeros((rows, 0), dtype=np.int64)
    return np.stack(kept, axis=1)


class ModularColumnReducer:
    """Accumulates the span of a stream of columns over Z/p^m.

    Columns with a unit entry become pivots kept in reduced form (a 1 at the
    pivot row, 0 at every other pivot row). Columns whose entries are all
    divisible by p after reduction are set aside and periodically compacted.
    Memory is bounded by rows x (rank + rows).
    """

    def __init__(self, nrows: int, p: int, m: int):
        self.nrows = nrows
        self.p = p
        self.m = m
        self.q = p**m
        self.U = np.zeros((nrows, 0), dtype=np.int64)
        self.pivots: list[int] = []
        self.is_pivot = np.zeros(nrows, dtype=bool)
        self.rest = np.zeros((nrows, 0), dtype=np.int64)
        self._rest_buffer: list[np.ndarray] = []
        self.columns_seen = 0
        # float64 matmul is exact while every partial sum stays below 2^53
        self._float_ok = nrows * self.q * self.q < 2**52

    @property
    def rank_units(self) -> int:
        return len(self.pivots)

    def _matmul(self, a, b):
        if self._float_ok:
            return np.rint(a.astype(np.float64) @ b.astype(np.float64)).astype(np.int64)
        return a @ b

    def add_columns(self, C: np.ndarray) -> None:
        q = self.q
        C = np.asarray(C, dtype=np.int64) % q
        self.columns_seen += C.shape[1]
        C = C[:, C.any(axis=0)]
        if not C.shape[1]:
            return
        k0 = len(self.pivots)
        if k0:
            C = (C - self._matmul(self.U, C[self.pivots, :])) % q
            C = C[:, C.any(axis=0)]
        for col in C.T:
            k = len(self.pivots)
            if k > k0:
                new = self.pivots[k0:]
                col = (col - self._matmul(self.U[:, k0:], col[new])) % q
            if not col.any():
                continue
            units = np.flatnonzero(col % self.p)
            if len(units):
                self._add_pivot(col, int(units[0]))
            else:
                self._rest_buffer.append(col)
        pending = len(self._rest_buffer) + self.rest.shape[1]
        if pending > 2 * (self.nrows - len(self.pivots)) + 64:
            self._compact()

    def _add_pivot(self, col: np.ndarray, r: int) -> None:
        q = self.q
        col = (col * _unit_inverse(int(col[r]), q)) % q
        if self.U.shape[1]:
            self.U = (self.U - np.outer(col, self.U[r])) % q
        self._flush_rest()
        if self.rest.shape[1]:
            self.rest = (self.rest - np.outer(col, self.rest[r])) % q
            self.rest = self.rest[:, self.rest.any(axis=0)]
        self.U = np.concatenate([self.U, col[:, None]], axis=1)
        self.pivots.append(r)
        self.is_pivot[r] = True

    def _flush_rest(self) -> None:
        if self._rest_buffer:
            self.rest = np.concatenate([self.rest, np.stack(self._rest_buffer, axis=1)], axis=1)
            self._rest_buffer = []

    def _compact(self) -> None:
        self._flush_rest()
        free = ~self.is_pivot
        block = self.rest[free]
        reduced = column_echelon_mod(block, self.p, self.m)
        full = np.zeros((self.nrows, reduced.shape[1]), dtype=np.int64)
        full[free] = reduced
        self.rest = full

    def cokernel_invariants(self) -> list[int]:
        """Invariant factors of (Z/p^m)^rows modulo the accumulated span."""
        self._flush_rest()
        free = ~self.is_pivot
        dim = int(free.sum())
        block = self.rest[free]
        vals = smith_valuations_mod(block, self.p, self.m) if block.size else []
        return cokernel_invariants_mod(vals, dim, self.p, self.m)


# ---------------------------------------------------------------------------
# Smith normal form over Z with transforms (small matrices, Python integers)


def smith_form(A, with_inverse: bool = False):
    """Return ``(D, U, V)`` with ``U @ A @ V == D`` diagonal, U and V unimodular,
    and each nonzero diagonal entry dividing the next.

    With ``with_inverse`` the inverse of V is appended to the result.
    """
    A = [[int(x) for x in row] for row in np.asarray(A, dtype=object).tolist()]
    m = len(A)
    n = len(A[0]) if m else 0
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]
    Vinv = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]
        Vinv[i], Vinv[j] = Vinv[j], Vinv[i]

    def add_row(dst, src, c):  # row_dst += c * row_src
        if c:
            A[dst] = [a + c * b for a, b in zip(A[dst], A[src])]
            U[dst] = [a + c * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, c):
        if c:
            for row in A:
                row[dst] += c * row[src]
            for row in V:
                row[dst] += c * row[src]
            Vinv[src] = [a - c * b for a, b in zip(Vinv[src], Vinv[dst])]

    for t in range(min(m, n)):
        nz = [(abs(A[i][j]), j, i) for i in range(t, m) for j in range(t, n) if A[i][j]]
        if not nz:
            break
        _, j, i = min(nz)
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            changed = False
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // A[t][t]))
                    if A[i][t]:
                        changed = True
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // A[t][t]))
                    if A[t][j]:
                        changed = True
            if changed:
                cand = [(abs(A[i][t]), 0, i) for i in range(t + 1, m) if A[i][t]]
                cand += [(abs(A[t][j]), 1, j) for j in range(t + 1, n) if A[t][j]]
                # remainders are smaller than the pivot; move the least one in
                _, kind, idx = min(cand)
                if kind == 0:
                    swap_rows(t, idx)
                else:
                    swap_cols(t, idx)
                continue
            d = A[t][t]
            bad = next(
                ((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if A[i][j] % d),
                None,
            )
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if A[t][t] < 0:
            A[t] = [-a for a in A[t]]
            U[t] = [-a for a in U[t]]
    if with_inverse:
        return A, U, V, Vinv
    return A, U, V


def elementary_divisors(A) -> list[int]:
    """Nonzero diagonal of the Smith form of an integer matrix."""
    D, _, _ = smith_form(A)
    return [D[i][i] for i in range(min(len(D), len(D[0]) if D else 0)) if D[i][i]]
