"""Check records, report assembly, and emission (text/json).

The JSON layout is schema-stable (``report_schema_version``): checks are
sorted by (check_id, point_index), keys are emitted sorted, and floats use
``repr`` round-tripping, so identical runs produce byte-identical documents.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

REPORT_SCHEMA_VERSION = 1

PASS = "pass"
FAIL = "fail"
SKIP = "skip"


@dataclass
class CheckRecord:
    check_id: str
    point_index: int | None
    residual: float | None
    tol: float | None
    verdict: str
    note: str = ""


@dataclass
class CheckReport:
    scenario: str
    seed: int
    samples: int
    params: dict[str, float]
    checks: list[CheckRecord] = field(default_factory=list)
    verdicts: dict[str, bool | None] = field(default_factory=dict)
    derived: dict = field(default_factory=dict)

    def add(self, check_id, point_index, residual, tol, note: str = "") -> CheckRecord:
        if residual is None:
            verdict = SKIP
        else:
            residual = float(residual)
            verdict = PASS if residual < tol else FAIL
        rec = CheckRecord(
            check_id=check_id,
            point_index=point_index,
            residual=residual,
            tol=tol,
            verdict=verdict,
            note=note,
        )
        self.checks.append(rec)
        return rec

    def add_skip(self, check_id, point_index, note: str) -> CheckRecord:
        rec = CheckRecord(check_id, point_index, None, None, SKIP, note)
        self.checks.append(rec)
        return rec

    def add_error(self, check_id, point_index, note: str) -> CheckRecord:
        rec = CheckRecord(check_id, point_index, None, None, FAIL, note)
        self.checks.append(rec)
        return rec

    @property
    def summary(self) -> dict[str, int]:
        out = {"total": len(self.checks), "passed": 0, "failed": 0, "skipped": 0}
        for rec in self.checks:
            key = {PASS: "passed", FAIL: "failed", SKIP: "skipped"}[rec.verdict]
            out[key] += 1
        return out

    @property
    def failed(self) -> list[CheckRecord]:
        return [rec for rec in self.checks if rec.verdict == FAIL]

    def sort(self) -> None:
        self.checks.sort(key=lambda r: (r.check_id, r.point_index if r.point_index is not None else -1))

    def to_dict(self) -> dict:
        self.sort()
        return {
            "report_schema_version": REPORT_SCHEMA_VERSION,
            "scenario": self.scenario,
            "seed": self.seed,
            "samples": self.samples,
            "params": self.params,
            "checks": [asdict(rec) for rec in self.checks],
            "summary": self.summary,
            "verdicts": self.verdicts,
            "derived": self.derived,
        }


def report_from_dict(doc: dict) -> CheckReport:
    rep = CheckReport(
        scenario=doc["scenario"],
        seed=doc["seed"],
        samples=doc["samples"],
        params=dict(doc["params"]),
        checks=[CheckRecord(**rec) for rec in doc["checks"]],
        verdicts=dict(doc["verdicts"]),
        derived=doc["derived"],
    )
    return rep


def emit_report(report: CheckReport, fmt: str = "text") -> bytes:
    if fmt == "json":
        return (
            json.dumps(report.to_dict(), sort_keys=True, indent=2, allow_nan=False)
            + "\n"
        ).encode()
    if fmt == "text":
        return _emit_text(report).encode()
    raise ValueError(f"unknown report format '{fmt}'")


def _severity(rec: CheckRecord) -> float:
    if rec.residual is None or rec.tol in (None, 0):
        return float("inf")
    return rec.residual / rec.tol


def _emit_text(report: CheckReport) -> str:
    lines = [f"scenario: {report.scenario}"]
    lines.append(
        "params: " + ", ".join(f"{k}={v!r}" for k, v in sorted(report.params.items()))
    )
    lines.append(f"samples: {report.samples}   seed: {report.seed}")
    lines.append("verdicts:")
    for name, val in report.verdicts.items():
        shown = "n/a" if val is None else str(val).lower()
        lines.append(f"  {name}: {shown}")
    if report.derived:
        lines.append("derived:")
        for name, val in sorted(report.derived.items()):
            if name == "discrepancy_flags":
                continue
            lines.append(f"  {name}: {val}")
    for flag in report.derived.get("discrepancy_flags", []):
        lines.append(f"discrepancy: {flag}")
    failures = sorted(report.failed, key=_severity, reverse=True)
    if failures:
        lines.append("failures (worst first):")
        for rec in failures:
            where = "aggregate" if rec.point_index is None else f"point {rec.point_index}"
            res = "n/a" if rec.residual is None else f"{rec.residual:.3e}"
            tol = "n/a" if rec.tol is None else f"{rec.tol:.1e}"
            note = f"  [{rec.note}]" if rec.note else ""
            lines.append(f"  FAIL {rec.check_id} @ {where}: residual {res} tol {tol}{note}")
    skips = [rec for rec in report.checks if rec.verdict == SKIP]
    for rec in skips:
        lines.append(f"  SKIP {rec.check_id}: {rec.note}")
    s = report.summary
    lines.append(
        f"checks: {s['total']} total, {s['passed']} passed, {s['failed']} failed, {s['skipped']} skipped"
    )
    return "\n".join(lines) + "\n"
