"""Theorem checks on a single group.

Every check returns a TheoremCheck with one of four verdicts:

* PASS / FAIL: the hypotheses hold and the asserted relation was computed;
  the witnesses alone determine the verdict (see ``audit``).
* NOT_APPLICABLE: a hypothesis fails; ``reason`` names it.
* SKIPPED: a resource cap stopped a computation; ``reason`` names the cap.

Relations carried by witnesses:

* ``divides``: lhs | rhs.
* ``equals``: lhs == rhs.
* ``contained``: subgroup of order lhs inside one of order rhs; ``meet`` is
  the order of the intersection and containment means meet == lhs.
* ``congruent``: X == Y modulo K, read as XK == YK; lhs = |XK|, rhs = |YK|,
  ``join`` = |XK YK|, and equality means all three agree.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields, replace
from functools import cached_property
from typing import Callable, Iterator

from pgw.automorphisms import AutomorphismCapError, automorphism_group, sylow_p_exponent
from pgw.corpus import CorpusEntry
from pgw.cover import ExteriorSquare, exterior_square
from pgw.groups import (
    PcGroup,
    Subgroup,
    agemo,
    center,
    commutator_subgroup,
    exponent,
    is_metabelian,
    is_powerful,
    iterated_commutator,
    lower_central_series,
    pc_group,
    quotient,
    subgroup_product,
)
from pgw.homology import AbelianInvariants, multiplier_invariants

PASS = "PASS"
FAIL = "FAIL"
NOT_APPLICABLE = "NOT_APPLICABLE"
SKIPPED = "SKIPPED"
VERDICTS = (PASS, FAIL, NOT_APPLICABLE, SKIPPED)


# ---------------------------------------------------------------------------
# Resource caps


@dataclass(frozen=True)
class Caps:
    """Resource caps; None means unlimited."""

    aut: int | None = 81  # group order for automorphism enumeration
    aut_count: int | None = 100_000  # automorphisms enumerated before giving up
    multiplier: int | None = 243  # group order for multiplier-based checks
    wedge: int | None = 3**10  # order of the exterior square
    cover: int | None = 243  # group order for building a stem cover
    bar: int = 16  # largest group handled by the bar complex

    def lifted(self) -> "Caps":
        """Caps for ``--slow``: order caps removed, the enumeration budget kept."""
        return replace(self, aut=None, multiplier=None, wedge=None, cover=None)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


class CapsFormatError(ValueError):
    pass


def parse_caps(text: str, base: Caps | None = None) -> Caps:
    """Caps from ``"aut=81,multiplier=243"``; ``none`` lifts a cap."""
    base = base or Caps()
    names = {f.name for f in fields(Caps)}
    values = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in names:
            raise CapsFormatError(f"bad cap {item!r}; known caps: {', '.join(sorted(names))}")
        value = value.strip().lower()
        if value in ("none", "inf", "unlimited"):
            if key == "bar":
                raise CapsFormatError("the bar cap cannot be lifted")
            values[key] = None
        else:
            try:
                values[key] = int(value)
            except ValueError:
                raise CapsFormatError(f"cap {key} needs an integer, got {value!r}") from None
    return replace(base, **values)


def caps_from_env(base: Caps | None = None) -> Caps:
    text = os.environ.get("PGW_CAPS", "")
    return parse_caps(text, base) if text else (base or Caps())


class CapExceeded(RuntimeError):
    pass


def _within(value: int, cap: int | None) -> bool:
    return cap is None or value <= cap


# ---------------------------------------------------------------------------
# Check records


@dataclass
class TheoremCheck:
    id: str
    verdict: str
    hypotheses: str
    params: dict = field(default_factory=dict)
    witnesses: dict | None = None
    reason: str | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "params": self.params,
            "verdict": self.verdict,
            "hypotheses": self.hypotheses,
            "reason": self.reason,
            "witnesses": self.witnesses,
        }


def audit(witnesses: dict) -> bool:
    """Whether a witness record satisfies its relation."""
    rel = witnesses["relation"]
    lhs, rhs = witnesses["lhs"], witnesses["rhs"]
    if rel == "divides":
        return rhs % lhs == 0
    if rel == "equals":
        return lhs == rhs
    if rel == "contained":
        return witnesses["meet"] == lhs
    if rel == "congruent":
        return lhs == rhs == witnesses["join"]
    raise ValueError(f"unknown relation {rel!r}")


def _decide(cid, hyp, params, witnesses) -> TheoremCheck:
    return TheoremCheck(cid, PASS if audit(witnesses) else FAIL, hyp, params, witnesses)


def ceil_log(x: int, p: int) -> int:
    """Least t >= 0 with p^t >= x, for a positive rational given as an int or (num, den)."""
    num, den = (x, 1) if isinstance(x, int) else x
    t = 0
    while p**t * den < num:
        t += 1
    return t


def _log(x: int, p: int) -> int:
    t = 0
    while x > 1:
        x //= p
        t += 1
    return t


# ---------------------------------------------------------------------------
# Per-group context with cached computations


class GroupContext:
    """Lazily computed invariants of one group, shared by all its checks."""

    def __init__(self, entry: CorpusEntry, caps: Caps | None = None):
        self.entry = entry
        self.P = entry.presentation
        self.caps = caps or Caps()
        self.p = self.P.p
        self.order = self.P.order
        self._failures: dict[str, str] = {}

    @cached_property
    def G(self) -> PcGroup:
        return pc_group(self.P, self.entry.name)

    @cached_property
    def lcs(self) -> list[Subgroup]:
        return lower_central_series(self.G)

    @property
    def c(self) -> int:
        return len(self.lcs) - 1

    def gamma(self, i: int) -> Subgroup:
        return self.lcs[i - 1] if i - 1 < len(self.lcs) else self.G.trivial

    @cached_property
    def exp(self) -> int:
        return exponent(self.G)

    @cached_property
    def metabelian(self) -> bool:
        return is_metabelian(self.G)

    @cached_property
    def Gp(self) -> Subgroup:
        return agemo(self.G, 1)

    @cached_property
    def center(self) -> Subgroup:
        return center(self.G)

    @cached_property
    def exp_central_quotient(self) -> int:
        Q, _ = quotient(self.G, self.center)
        return exponent(Q)

    def _guard(self, key: str, fn):
        if key in self._failures:
            raise CapExceeded(self._failures[key])
        try:
            return fn()
        except CapExceeded as exc:
            self._failures[key] = str(exc)
            raise

    @cached_property
    def _multiplier(self) -> AbelianInvariants:
        def run():
            if not _within(self.order, self.caps.multiplier):
                raise CapExceeded(f"order {self.order} exceeds multiplier cap {self.caps.multiplier}")
            return multiplier_invariants(self.P, bar_cap=self.caps.bar)

        return self._guard("multiplier", run)

    def multiplier(self) -> AbelianInvariants:
        return self._guard("multiplier", lambda: self._multiplier)

    @cached_property
    def _wedge(self) -> ExteriorSquare:
        def run():
            M = self.multiplier()
            size = M.order * self.gamma(2).order
            if not _within(self.order, self.caps.cover):
                raise CapExceeded(f"order {self.order} exceeds cover cap {self.caps.cover}")
            if not _within(size, self.caps.wedge):
                raise CapExceeded(f"exterior square order {size} exceeds wedge cap {self.caps.wedge}")
            return exterior_square(self.P)

        return self._guard("wedge", run)

    def wedge(self) -> ExteriorSquare:
        return self._guard("wedge", lambda: self._wedge)

    @cached_property
    def _auts(self):
        def run():
            try:
                return automorphism_group(self.G, self.caps.aut, self.caps.aut_count)
            except AutomorphismCapError as exc:
                raise CapExceeded(str(exc)) from None

        return self._guard("aut", run)

    def automorphisms(self):
        return self._guard("aut", lambda: self._auts)

    @cached_property
    def q(self) -> int:
        return sylow_p_exponent(self.G, self.automorphisms())


# ---------------------------------------------------------------------------
# Hypotheses


def _odd(ctx) -> str | None:
    return None if ctx.p % 2 else "p = 2 is not odd"


def _nontrivial(ctx) -> str | None:
    return None if ctx.order > 1 else "group is trivial"


def _metabelian(ctx) -> str | None:
    return None if ctx.metabelian else "group is not metabelian"


def _class_at_most(bound_fn, label):
    def test(ctx):
        bound = bound_fn(ctx.p)
        return None if ctx.c <= bound else f"class {ctx.c} > {label} = {bound}"

    return test


_class_2p = _class_at_most(lambda p: 2 * p - 1, "2p-1")
_class_p2 = _class_at_most(lambda p: p * p - 1, "p^2-1")
_class_8 = _class_at_most(lambda p: 8, "8")


def _exp_at_least_p2(ctx) -> str | None:
    return None if ctx.exp >= ctx.p**2 else f"exponent {ctx.exp} < p^2 = {ctx.p ** 2}"


def _violated(ctx, tests) -> str | None:
    for t in tests:
        why = t(ctx)
        if why:
            return why
    return None


# ---------------------------------------------------------------------------
# Witness helpers


def _divides(lhs: int, rhs: int, **extra) -> dict:
    return {"lhs": int(lhs), "rhs": int(rhs), "relation": "divides", **extra}


def _equals(lhs: int, rhs: int, **extra) -> dict:
    return {"lhs": int(lhs), "rhs": int(rhs), "relation": "equals", **extra}


def _contained(A: Subgroup, B: Subgroup, **extra) -> dict:
    meet = int((A.mask & B.mask).sum())
    return {"lhs": A.order, "rhs": B.order, "relation": "contained", "meet": meet, **extra}


def _congruent(G, X: Subgroup, Y: Subgroup, K: Subgroup) -> dict:
    XK = subgroup_product(G, X, K)
    YK = subgroup_product(G, Y, K)
    join = subgroup_product(G, XK, YK)
    return {
        "lhs": XK.order,
        "rhs": YK.order,
        "relation": "congruent",
        "join": join.order,
        "modulus": K.order,
    }


# ---------------------------------------------------------------------------
# Checks


@dataclass(frozen=True)
class CheckSpec:
    id: str
    hypotheses: str
    run: Callable[..., TheoremCheck]
    sweep: Callable[[GroupContext], list[dict]] = lambda ctx: [{}]


def _subgroup_by_name(ctx, name: str) -> Subgroup:
    if name == "G":
        return ctx.G.whole
    if name.startswith("gamma"):
        return ctx.gamma(int(name[5:]))
    raise ValueError(f"unknown subgroup {name!r}")


THM_2_1_PAIRS = (("G", "G"), ("gamma2", "G"))
THM_2_1_EXPONENTS = (1, 2)


def check_congruence_2_1_i(ctx, N="G", M="G", n=1) -> TheoremCheck:
    cid, hyp = "thm-2.1-i", "N, M normal in a finite p-group"
    params = {"N": N, "M": M, "n": n}
    G = ctx.G
    Ns, Ms = _subgroup_by_name(ctx, N), _subgroup_by_name(ctx, M)
    lhs = commutator_subgroup(G, agemo(Ns, n), Ms)
    rhs = agemo(commutator_subgroup(G, Ns, Ms), n)
    K = subgroup_product(
        G, *(agemo(iterated_commutator(G, Ms, Ns, ctx.p**r), n - r) for r in range(1, n + 1))
    )
    return _decide(cid, hyp, params, _congruent(G, lhs, rhs, K))


def check_congruence_2_1_ii(ctx, N="G", n=1, l=1) -> TheoremCheck:
    cid, hyp = "thm-2.1-ii", "N normal in a finite p-group"
    params = {"N": N, "n": n, "l": l}
    G = ctx.G
    Ns = _subgroup_by_name(ctx, N)
    lhs = iterated_commutator(G, agemo(Ns, n), G.whole, l)
    rhs = agemo(iterated_commutator(G, Ns, G.whole, l), n)
    K = subgroup_product(
        G,
        *(agemo(iterated_commutator(G, Ns, G.whole, ctx.p**r + l - 1), n - r) for r in range(1, n + 1)),
    )
    return _decide(cid, hyp, params, _congruent(G, lhs, rhs, K))


def _na(cid, hyp, why, params=None) -> TheoremCheck:
    return TheoremCheck(cid, NOT_APPLICABLE, hyp, params or {}, None, why)


def _skip(cid, hyp, why, params=None) -> TheoremCheck:
    return TheoremCheck(cid, SKIPPED, hyp, params or {}, None, why)


META_HYP = "p odd; G metabelian; class <= 2p-1"
META_TESTS = (_odd, _metabelian, _class_2p)


def check_eq_2_2_1(ctx) -> TheoremCheck:
    cid = "eq-2.2.1"
    why = _violated(ctx, META_TESTS)
    if why:
        return _na(cid, META_HYP, why)
    G, Gp = ctx.G, ctx.Gp
    A = commutator_subgroup(G, Gp, Gp)
    B = agemo(commutator_subgroup(G, Gp, G.whole), 1)
    return _decide(cid, META_HYP, {}, _contained(A, B))


def _prop_2_2(ctx, part: str) -> TheoremCheck:
    cid = f"prop-2.2-{part}"
    hyp = META_HYP + "; exp(G) >= p^2"
    why = _violated(ctx, META_TESTS + (_exp_at_least_p2,))
    if why:
        return _na(cid, hyp, why)
    G, Gp = ctx.G, ctx.Gp
    n = _log(ctx.exp, ctx.p)
    X = commutator_subgroup(G, Gp, Gp)
    if part == "i":
        return _decide(cid, hyp, {}, _divides(exponent(X), ctx.p ** (n - 1)))
    X3 = commutator_subgroup(G, X, Gp)
    return _decide(cid, hyp, {}, _divides(exponent(X3), ctx.p ** (n - 2)))


def check_prop_2_2_i(ctx) -> TheoremCheck:
    return _prop_2_2(ctx, "i")


def check_prop_2_2_ii(ctx) -> TheoremCheck:
    return _prop_2_2(ctx, "ii")


def check_cor_2_3(ctx) -> TheoremCheck:
    cid = "cor-2.3"
    why = _violated(ctx, (_nontrivial,) + META_TESTS)
    if why:
        return _na(cid, META_HYP, why)
    n = _log(ctx.exp, ctx.p)
    return _decide(cid, META_HYP, {}, _equals(exponent(ctx.Gp), ctx.p ** (n - 1)))


LEMMA_HYP = "p odd; G^p powerful; exp(G^p) = exp(G)/p; gamma_(p+1)(G) <= G^p"


def check_lemma_2_4(ctx) -> TheoremCheck:
    cid = "lemma-2.4"
    why = _violated(ctx, (_odd, _nontrivial))
    if why:
        return _na(cid, LEMMA_HYP, why)
    Gp = ctx.Gp
    if not is_powerful(Gp):
        return _na(cid, LEMMA_HYP, "G^p is not powerful")
    if exponent(Gp) * ctx.p != ctx.exp:
        return _na(cid, LEMMA_HYP, f"exp(G^p) = {exponent(Gp)} is not exp(G)/p")
    if not ctx.gamma(ctx.p + 1) <= Gp:
        return _na(cid, LEMMA_HYP, "gamma_(p+1)(G) is not contained in G^p")
    try:
        W = ctx.wedge()
    except CapExceeded as exc:
        return _skip(cid, LEMMA_HYP, str(exc))
    return _decide(cid, LEMMA_HYP, {}, _divides(W.exponent, ctx.exp))


def _wedge_or_multiplier(ctx, cid, hyp, part, bound_fn) -> TheoremCheck:
    """exp(G^G) or exp(H_2) divides bound_fn(ctx), depending on ``part``."""
    params = {"part": part}
    try:
        value = ctx.wedge().exponent if part == "wedge" else ctx.multiplier().exponent
    except CapExceeded as exc:
        return _skip(cid, hyp, str(exc), params)
    return _decide(cid, hyp, params, _divides(value, bound_fn(ctx)))


PARTS = [{"part": "wedge"}, {"part": "multiplier"}]


def check_thm_2_5(ctx, part="wedge") -> TheoremCheck:
    cid = "thm-2.5"
    why = _violated(ctx, META_TESTS)
    if why:
        return _na(cid, META_HYP, why, {"part": part})
    return _wedge_or_multiplier(ctx, cid, META_HYP, part, lambda c: c.exp)


def check_thm_2_6(ctx) -> TheoremCheck:
    cid = "thm-2.6"
    why = _violated(ctx, META_TESTS)
    if why:
        return _na(cid, META_HYP, why)
    return _decide(cid, META_HYP, {}, _divides(exponent(ctx.gamma(2)), ctx.exp_central_quotient))


def _eq_3_1_1_sweep(ctx) -> list[dict]:
    return [{"i": i} for i in range(1, ctx.c)] or [{"i": None}]


def check_eq_3_1_1(ctx, i=None) -> TheoremCheck:
    cid, hyp = "eq-3.1.1", "finite p-group of class c; 1 <= i <= c-1; exp(G/Z(G)) = p^n"
    if i is None:
        return TheoremCheck(cid, PASS, hyp, {"i": None}, None, f"vacuous: no i with 1 <= i <= c-1 (c = {ctx.c})")
    n = _log(ctx.exp_central_quotient, ctx.p)
    t = ceil_log((ctx.c, i), ctx.p)
    return _decide(cid, hyp, {"i": i}, _divides(exponent(ctx.gamma(i + 1)), ctx.p ** (n + t - 1)))


def check_cor_3_2(ctx, part="wedge") -> TheoremCheck:
    cid, hyp = "cor-3.2", "p odd; class c; n = ceil(log_p(c+1))"
    why = _violated(ctx, (_odd, _nontrivial))
    if why:
        return _na(cid, hyp, why, {"part": part})
    n = ceil_log(ctx.c + 1, ctx.p)
    return _wedge_or_multiplier(ctx, cid, hyp, part, lambda c: c.p ** (n - 1) * c.exp)


def check_cor_3_3(ctx, part="wedge") -> TheoremCheck:
    cid, hyp = "cor-3.3", "p odd; class <= p^2-1"
    why = _violated(ctx, (_odd, _class_p2))
    if why:
        return _na(cid, hyp, why, {"part": part})
    return _wedge_or_multiplier(ctx, cid, hyp, part, lambda c: c.p * c.exp)


def check_cor_3_4(ctx, part="wedge") -> TheoremCheck:
    cid, hyp = "cor-3.4", "p odd; class <= 8"
    why = _violated(ctx, (_odd, _class_8))
    if why:
        return _na(cid, hyp, why, {"part": part})
    return _wedge_or_multiplier(ctx, cid, hyp, part, lambda c: c.p * c.exp)


def check_thm_3_5_i(ctx) -> TheoremCheck:
    cid, hyp = "thm-3.5-i", "G metabelian; class <= 2p-1; q = exponent of a Sylow p-subgroup of Aut(G)"
    why = _violated(ctx, (_metabelian, _class_2p))
    if why:
        return _na(cid, hyp, why)
    try:
        q = ctx.q
    except CapExceeded as exc:
        return _skip(cid, hyp, str(exc))
    return _decide(cid, hyp, {}, _divides(ctx.exp, ctx.p * q**3, q=q))


def check_thm_3_5_ii(ctx) -> TheoremCheck:
    cid, hyp = "thm-3.5-ii", "class c >= 1; q = exponent of a Sylow p-subgroup of Aut(G)"
    why = _violated(ctx, (_nontrivial,))
    if why:
        return _na(cid, hyp, why)
    try:
        q = ctx.q
    except CapExceeded as exc:
        return _skip(cid, hyp, str(exc))
    t = ceil_log(ctx.c, ctx.p)
    return _decide(cid, hyp, {}, _divides(ctx.exp, ctx.p**t * q**3, q=q, c=ctx.c))


def check_conjecture(ctx) -> TheoremCheck:
    cid, hyp = "conjecture", "finite p-group"
    try:
        M = ctx.multiplier()
    except CapExceeded as exc:
        return _skip(cid, hyp, str(exc))
    return _decide(cid, hyp, {}, _divides(M.exponent, ctx.p * ctx.exp))


def _thm_2_1_i_sweep(ctx) -> list[dict]:
    return [{"N": N, "M": M, "n": n} for N, M in THM_2_1_PAIRS for n in THM_2_1_EXPONENTS]


def _thm_2_1_ii_sweep(ctx) -> list[dict]:
    return [{"N": N, "n": n, "l": l} for N in ("G", "gamma2") for n in THM_2_1_EXPONENTS for l in (1, 2)]


CATALOG: tuple[CheckSpec, ...] = (
    CheckSpec("thm-2.1-i", "N, M normal", check_congruence_2_1_i, _thm_2_1_i_sweep),
    CheckSpec("thm-2.1-ii", "N normal", check_congruence_2_1_ii, _thm_2_1_ii_sweep),
    CheckSpec("eq-2.2.1", META_HYP, check_eq_2_2_1),
    CheckSpec("prop-2.2-i", META_HYP, check_prop_2_2_i),
    CheckSpec("prop-2.2-ii", META_HYP, check_prop_2_2_ii),
    CheckSpec("cor-2.3", META_HYP, check_cor_2_3),
    CheckSpec("lemma-2.4", LEMMA_HYP, check_lemma_2_4),
    CheckSpec("thm-2.5", META_HYP, check_thm_2_5, lambda ctx: PARTS),
    CheckSpec("thm-2.6", META_HYP, check_thm_2_6),
    CheckSpec("eq-3.1.1", "class c", check_eq_3_1_1, _eq_3_1_1_sweep),
    CheckSpec("cor-3.2", "p odd", check_cor_3_2, lambda ctx: PARTS),
    CheckSpec("cor-3.3", "p odd; class <= p^2-1", check_cor_3_3, lambda ctx: PARTS),
    CheckSpec("cor-3.4", "p odd; class <= 8", check_cor_3_4, lambda ctx: PARTS),
    CheckSpec("thm-3.5-i", "metabelian; class <= 2p-1", check_thm_3_5_i),
    CheckSpec("thm-3.5-ii", "class c", check_thm_3_5_ii),
    CheckSpec("conjecture", "finite p-group", check_conjecture),
)

CHECK_IDS = tuple(spec.id for spec in CATALOG)


class UnknownCheckError(ValueError):
    pass


def select_checks(filters: list[str] | None) -> list[CheckSpec]:
    """Catalog entries matching the filters: an exact id or an id prefix ending at '-'.

    ``thm-2.1`` selects both parts of that theorem.
    """
    if not filters:
        return list(CATALOG)
    chosen = []
    for f in filters:
        hits = [s for s in CATALOG if s.id == f or s.id.startswith(f + "-")]
        if not hits:
            raise UnknownCheckError(f"unknown check {f!r}; known: {', '.join(CHECK_IDS)}")
        chosen.extend(h for h in hits if h not in chosen)
    return [s for s in CATALOG if s in chosen]


def run_checks(ctx: GroupContext, specs: list[CheckSpec] | None = None) -> Iterator[TheoremCheck]:
    for spec in specs if specs is not None else CATALOG:
        for params in spec.sweep(ctx):
            yield spec.run(ctx, **params)
