"""Batch verification over a corpus and the JSON report."""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from pgw import __version__
from pgw.checks import (
    FAIL,
    VERDICTS,
    Caps,
    GroupContext,
    audit,
    run_checks,
    select_checks,
)
from pgw.corpus import CorpusEntry, corpus_builtin, load_corpus_dir

SCHEMA = "pgw-verification-report"
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class RunOptions:
    checks: tuple[str, ...] | None = None
    caps: Caps = Caps()
    jobs: int = 1
    timings: bool = False


def load_corpus(spec: str) -> list[CorpusEntry]:
    """``builtin`` or a directory of ``*.pcp`` files."""
    if spec == "builtin":
        return list(corpus_builtin())
    path = Path(spec)
    if not path.is_dir():
        raise FileNotFoundError(f"corpus directory not found: {spec}")
    return load_corpus_dir(path)


def verify_entry(entry: CorpusEntry, options: RunOptions) -> dict:
    specs = select_checks(list(options.checks) if options.checks else None)
    ctx = GroupContext(entry, options.caps)
    start = time.perf_counter()
    structure = {"order": ctx.order, "class": ctx.c, "exponent": ctx.exp}
    t_structure = time.perf_counter() - start
    checks = []
    per_check: dict[str, float] = {}
    for spec in specs:
        t0 = time.perf_counter()
        checks.extend(c.to_dict() for c in run_checks(ctx, [spec]))
        per_check[spec.id] = round(time.perf_counter() - t0, 6)
    timings = None
    if options.timings:
        timings = {
            "structure": round(t_structure, 6),
            "checks": per_check,
            "total": round(time.perf_counter() - start, 6),
        }
    return {"name": entry.name, **structure, "checks": checks, "timings": timings}


def _verify_star(args):
    return verify_entry(*args)


def run_verification(corpus: list[CorpusEntry], options: RunOptions = RunOptions()) -> dict:
    """Run the selected checks on every entry; the report keeps corpus order."""
    select_checks(list(options.checks) if options.checks else None)  # fail early on bad ids
    work = [(e, options) for e in corpus]
    if options.jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=options.jobs) as pool:
            entries = list(pool.map(_verify_star, work))
    else:
        entries = [verify_entry(*w) for w in work]
    summary = {v: 0 for v in VERDICTS}
    for e in entries:
        for c in e["checks"]:
            summary[c["verdict"]] += 1
    return {
        "schema": SCHEMA,
        "schema_version": SCHEMA_VERSION,
        "generator": f"pgw {__version__}",
        "timestamp": datetime.now(timezone.utc).replace(microsecond=0).isoformat(),
        "options": {
            "checks": list(options.checks) if options.checks else None,
            "caps": options.caps.as_dict(),
        },
        "summary": summary,
        "entries": entries,
    }


def has_failures(report: dict) -> bool:
    return report["summary"].get(FAIL, 0) > 0


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def write_report(report: dict, path: str | Path) -> None:
    Path(path).write_text(dumps(report), encoding="utf-8")


def audit_report(report: dict) -> list[str]:
    """Checks whose recorded verdict disagrees with their own witnesses."""
    problems = []
    for e in report["entries"]:
        for c in e["checks"]:
            w = c["witnesses"]
            if c["verdict"] in ("PASS", "FAIL") and w is not None:
                expected = "PASS" if audit(w) else "FAIL"
                if expected != c["verdict"]:
                    problems.append(f"{e['name']} {c['id']} {c['params']}: {c['verdict']} but witnesses say {expected}")
            elif c["verdict"] == "FAIL":
                problems.append(f"{e['name']} {c['id']}: FAIL without witnesses")
    return problems
