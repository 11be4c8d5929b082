"""Command-line interface: ``pgw <command> ...``.

Exit codes: 0 success (all checks pass), 1 a FAIL verdict or a failed
validation, 2 usage or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from pgw.checks import CapsFormatError, Caps, UnknownCheckError, caps_from_env
from pgw.pcp import InconsistentPresentationError, PcPresentation, PresentationError, consistency_check, parse_pcp

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None


def _load(path: str) -> PcPresentation:
    try:
        return parse_pcp(_read_text(path)).with_consistency()
    except (PresentationError, InconsistentPresentationError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def _caps(args) -> Caps:
    caps = caps_from_env()
    return caps.lifted() if getattr(args, "slow", False) else caps


def _emit(args, data: dict, lines: list[str]) -> None:
    if getattr(args, "json", False):
        print(json.dumps(data, indent=2))
    else:
        print("\n".join(lines))


# ---------------------------------------------------------------------------
# Commands


def cmd_validate(args) -> int:
    text = _read_text(args.file)
    try:
        P = parse_pcp(text)
    except PresentationError as exc:
        print(f"{args.file}: parse error: {exc}")
        return EXIT_FAIL
    failures = consistency_check(P)
    if failures:
        print(f"{args.file}: inconsistent ({len(failures)} failing overlap test(s))")
        for f in failures:
            print(f"  {f.description}: {P.format_word(f.lhs)} != {P.format_word(f.rhs)}")
        return EXIT_FAIL
    print(f"{args.file}: consistent, order {P.p}^{P.n} = {P.order}")
    return EXIT_OK


def cmd_info(args) -> int:
    from pgw.groups import (
        UnsupportedPrimeError,
        center,
        derived_series,
        exponent,
        is_metabelian,
        is_powerful,
        lower_central_series,
        pc_group,
    )

    P = _load(args.file)
    G = pc_group(P)
    lcs = [H.order for H in lower_central_series(G)]
    ds = [H.order for H in derived_series(G)]
    try:
        powerful = is_powerful(G)
    except UnsupportedPrimeError:
        powerful = None
    data = {
        "p": P.p,
        "order": G.order,
        "class": len(lcs) - 1,
        "exponent": exponent(G),
        "lower_central_series": lcs,
        "derived_series": ds,
        "center": center(G).order,
        "metabelian": is_metabelian(G),
        "powerful": powerful,
    }
    lines = [
        f"order: {P.p}^{P.n} = {G.order}",
        f"class: {data['class']}",
        f"exponent: {data['exponent']}",
        f"lower central series orders: {lcs}",
        f"derived series orders: {ds}",
        f"center order: {data['center']}",
        f"metabelian: {'yes' if data['metabelian'] else 'no'}",
        f"powerful: {'n/a (p = 2)' if powerful is None else ('yes' if powerful else 'no')}",
    ]
    _emit(args, data, lines)
    return EXIT_OK


def cmd_multiplier(args) -> int:
    from pgw.homology import ModulusTooSmallError, multiplier_invariants

    P = _load(args.file)
    caps = _caps(args)
    try:
        M = multiplier_invariants(P, method=args.method, modulus_exp=args.modulus_exp, bar_cap=caps.bar)
    except ModulusTooSmallError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    data = {"invariants": list(M.factors), "order": M.order, "exponent": M.exponent}
    _emit(args, data, [f"H_2(G, Z) invariants: {M}", f"order: {M.order}", f"exponent: {M.exponent}"])
    return EXIT_OK


def cmd_wedge(args) -> int:
    from pgw.cover import exterior_square
    from pgw.groups import derived_subgroup, pc_group
    from pgw.homology import multiplier_invariants

    P = _load(args.file)
    caps = _caps(args)
    if caps.cover is not None and P.order > caps.cover:
        print(f"error: order {P.order} exceeds the cover cap {caps.cover}; use --slow", file=sys.stderr)
        return EXIT_USAGE
    M = multiplier_invariants(P, bar_cap=caps.bar)
    size = M.order * derived_subgroup(pc_group(P)).order
    if caps.wedge is not None and size > caps.wedge:
        print(f"error: exterior square order {size} exceeds the wedge cap {caps.wedge}; use --slow", file=sys.stderr)
        return EXIT_USAGE
    W = exterior_square(P)
    data = {
        "order": W.order,
        "exponent": W.exponent,
        "multiplier": list(M.factors),
        "cover_order": W.cover.total.order,
        "sweep_label": list(W.cover.label),
    }
    lines = [
        f"|G ^ G|: {W.order}",
        f"exp(G ^ G): {W.exponent}",
        f"H_2(G, Z): {M}",
        f"stem cover order: {W.cover.total.order}",
    ]
    _emit(args, data, lines)
    return EXIT_OK


def cmd_aut(args) -> int:
    from pgw.automorphisms import AutomorphismCapError, automorphism_group, sylow_p_exponent
    from pgw.groups import pc_group

    P = _load(args.file)
    caps = _caps(args)
    G = pc_group(P)
    try:
        auts = automorphism_group(G, caps.aut, caps.aut_count)
    except AutomorphismCapError as exc:
        print(f"error: {exc}; use --slow or PGW_CAPS", file=sys.stderr)
        return EXIT_USAGE
    q = sylow_p_exponent(G, auts)
    _emit(args, {"order": len(auts), "q": q}, [f"|Aut(G)|: {len(auts)}", f"Sylow {P.p}-subgroup exponent q: {q}"])
    return EXIT_OK


def cmd_verify(args) -> int:
    from pgw.runner import RunOptions, audit_report, dumps, has_failures, load_corpus, run_verification

    try:
        corpus = load_corpus(args.corpus)
    except FileNotFoundError as exc:
        raise UsageError(str(exc)) from None
    except (PresentationError, InconsistentPresentationError) as exc:
        raise UsageError(f"corpus: {exc}") from None
    checks = tuple(c for item in args.checks for c in item.split(",") if c) if args.checks else None
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    options = RunOptions(checks=checks, caps=_caps(args), jobs=args.jobs, timings=args.timings)
    try:
        report = run_verification(corpus, options)
    except UnknownCheckError as exc:
        raise UsageError(str(exc)) from None
    text = dumps(report)
    if args.report:
        try:
            Path(args.report).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot write {args.report}: {exc.strerror or exc}") from None
    for entry in report["entries"]:
        for c in entry["checks"]:
            if c["verdict"] == "FAIL" or args.verbose:
                params = "".join(f" {k}={v}" for k, v in c["params"].items())
                w = c["witnesses"]
                detail = f" ({w['lhs']} {w['relation']} {w['rhs']})" if w else (f" ({c['reason']})" if c["reason"] else "")
                print(f"{c['verdict']:<15}{entry['name']:<28}{c['id']}{params}{detail}")
    s = report["summary"]
    print(f"{len(report['entries'])} groups: " + ", ".join(f"{k} {v}" for k, v in s.items()))
    problems = audit_report(report)
    for p in problems:
        print(f"audit: {p}", file=sys.stderr)
    return EXIT_FAIL if has_failures(report) or problems else EXIT_OK


def cmd_corpus_list(args) -> int:
    from pgw.corpus import corpus_builtin

    for e in corpus_builtin():
        print(f"{e.name:<28}{e.family:<16}order {e.presentation.order:<6}class {e.nilpotency_class}")
    return EXIT_OK


def cmd_corpus_emit(args) -> int:
    from pgw.corpus import corpus_by_name

    try:
        entry = corpus_by_name(args.name)
    except KeyError:
        raise UsageError(f"no builtin corpus entry named {args.name!r}") from None
    path = Path(args.path)
    if path.is_dir():
        path = path / f"{entry.name}.pcp"
    try:
        path.write_text(entry.presentation.to_text(), encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror or exc}") from None
    print(f"wrote {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pgw", description="Invariants of finite p-groups given by pc presentations.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def group_command(name, fn, help_text, slow=False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("file", help="presentation file")
        p.add_argument("--json", action="store_true", help="print JSON")
        if slow:
            p.add_argument("--slow", action="store_true", help="lift the resource caps")
        p.set_defaults(func=fn)
        return p

    p = sub.add_parser("validate", help="parse a presentation and run the consistency checks")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)
    group_command("info", cmd_info, "order, class, exponent, series and flags")
    p = group_command("multiplier", cmd_multiplier, "Schur multiplier invariants")
    p.add_argument("--method", choices=("auto", "bar", "tails"), default="auto")
    p.add_argument("--modulus-exp", type=int, default=None, help="work modulo p^m (default log_p |G|)")
    group_command("wedge", cmd_wedge, "order and exponent of the nonabelian exterior square", slow=True)
    group_command("aut", cmd_aut, "automorphism count and Sylow p-exponent q", slow=True)

    p = sub.add_parser("verify", help="run the theorem checks over a corpus")
    p.add_argument("--corpus", default="builtin", help="'builtin' or a directory of .pcp files")
    p.add_argument("--checks", action="append", help="check ids or id prefixes, comma separated")
    p.add_argument("--report", help="write the JSON report here")
    p.add_argument("--slow", action="store_true", help="lift the order caps")
    p.add_argument("--jobs", type=int, default=1, help="verify entries in parallel processes")
    p.add_argument("--timings", action="store_true", help="record per-check timings in the report")
    p.add_argument("-v", "--verbose", action="store_true", help="print every verdict")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("corpus", help="builtin corpus")
    csub = p.add_subparsers(dest="corpus_command", required=True, parser_class=_Parser)
    c = csub.add_parser("list", help="list builtin entries")
    c.set_defaults(func=cmd_corpus_list)
    c = csub.add_parser("emit", help="write a builtin presentation to a file")
    c.add_argument("name")
    c.add_argument("path")
    c.set_defaults(func=cmd_corpus_emit)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"pgw: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapsFormatError as exc:
        print(f"pgw: error: PGW_CAPS: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
