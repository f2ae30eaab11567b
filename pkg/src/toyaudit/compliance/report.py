"""Audit report assembly and JSON / Markdown rendering."""

from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass, field

from toyaudit.capture.model import DeviceProfile, HttpTransaction
from toyaudit.capture.stats import EndpointStats, endpoint_stats
from toyaudit.compliance.catalog import ComplianceClause, Violation, map_findings
from toyaudit.detect.model import FileRef, Finding

FORMATS = ("json", "markdown")


@dataclass
class AuditReport:
    device_name: str
    capture_summary: list[EndpointStats]
    findings: list[Finding]
    violations: list[Violation]
    generated_at: str = field(
        default_factory=lambda: dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds"))
    # clauses referenced by the violations, so the report can quote them
    clauses: dict[str, ComplianceClause] = field(default_factory=dict)

    def __post_init__(self):
        for v in self.violations:
            if not v.finding_indices:
                raise ValueError(f"violation {v.clause_id} has no supporting findings")
            bad = [i for i in v.finding_indices if not 0 <= i < len(self.findings)]
            if bad:
                raise ValueError(f"violation {v.clause_id} references missing findings {bad}")

    def to_dict(self) -> dict:
        return {
            "device_name": self.device_name,
            "generated_at": self.generated_at,
            "capture_summary": [s.to_dict() for s in self.capture_summary],
            "findings": [f.to_dict() for f in self.findings],
            "violations": [
                {**v.to_dict(), **({"source": self.clauses[v.clause_id].source.value,
                                    "quoted_text": self.clauses[v.clause_id].quoted_text}
                                   if v.clause_id in self.clauses else {})}
                for v in self.violations
            ],
        }


def build_report(device_name: str, txns: list[HttpTransaction], profile: DeviceProfile,
                 findings: list[Finding], catalog: list[ComplianceClause],
                 generated_at: str | None = None) -> AuditReport:
    violations = map_findings(findings, catalog)
    by_id = {c.clause_id: c for c in catalog}
    kwargs = {"generated_at": generated_at} if generated_at else {}
    return AuditReport(device_name, endpoint_stats(txns, profile), list(findings), violations,
                       clauses={v.clause_id: by_id[v.clause_id] for v in violations}, **kwargs)


def _evidence_text(e) -> str:
    if isinstance(e, FileRef):
        return f"{e.path}:{e.line}"
    if isinstance(e, int):
        return f"txn #{e}"
    return str(e)


def _cell(text) -> str:
    return str(text).replace("|", "\\|").replace("\n", " ")


def _markdown(report: AuditReport) -> str:
    lines = [f"# Audit report: {report.device_name}", "", "## Summary", "",
             f"- Generated: {report.generated_at}",
             f"- Endpoints: {len(report.capture_summary)}",
             f"- Findings: {len(report.findings)}",
             f"- Violations: {len(report.violations)}", "",
             "## Endpoint Statistics", ""]
    if report.capture_summary:
        lines += ["| Host | Party | Bytes | Share | Transactions | All TLS |",
                  "|---|---|---:|---:|---:|---|"]
        for s in report.capture_summary:
            lines.append(f"| {_cell(s.host)} | {s.party.value} | {s.total_bytes} | "
                         f"{s.byte_fraction:.2%} | {s.transaction_count} | {'yes' if s.all_tls else 'no'} |")
    else:
        lines.append("_No traffic._")
    lines += ["", "## Findings", ""]
    if report.findings:
        lines += ["| # | Detector | Severity | Summary | Evidence |", "|---:|---|---|---|---|"]
        for i, f in enumerate(report.findings):
            ev = ", ".join(_evidence_text(e) for e in f.evidence)
            lines.append(f"| {i} | {f.detector_id.value} | {f.severity.value} | {_cell(f.summary)} | {_cell(ev)} |")
    else:
        lines.append("_No findings._")
    lines += ["", "## Violations", ""]
    if not report.violations:
        lines.append("_No violations._")
    for v in report.violations:
        clause = report.clauses.get(v.clause_id)
        lines.append(f"### {v.clause_id}" + (f" ({clause.source.value})" if clause else ""))
        lines.append("")
        if clause:
            lines += [f"> {clause.quoted_text}", ""]
        lines += [f"Supporting findings: {', '.join(f'#{i}' for i in v.finding_indices)}", ""]
    return "\n".join(lines).rstrip("\n") + "\n"


def render_report(report: AuditReport, format: str = "json") -> bytes:
    if format == "json":
        return (json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n").encode("utf-8")
    if format == "markdown":
        return _markdown(report).encode("utf-8")
    raise ValueError(f"unknown report format {format!r}; expected one of {FORMATS}")
