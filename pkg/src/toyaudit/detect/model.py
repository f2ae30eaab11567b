from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Union


class DetectorId(str, Enum):
    D_CLEARTEXT = "D_CLEARTEXT"
    D_PII_EXPOSURE = "D_PII_EXPOSURE"
    D_TOKEN_REUSE = "D_TOKEN_REUSE"
    D_NO_AUTH = "D_NO_AUTH"
    D_ORACLE = "D_ORACLE"
    D_STALE_RESOURCE = "D_STALE_RESOURCE"
    D_PII_THIRD_PARTY = "D_PII_THIRD_PARTY"
    D_SECRET_CONSTANT = "D_SECRET_CONSTANT"


class Severity(str, Enum):
    LOW = "Low"
    MEDIUM = "Medium"
    HIGH = "High"
    CRITICAL = "Critical"


@dataclass(frozen=True)
class FileRef:
    path: str
    line: int

    def to_dict(self) -> dict:
        return {"path": self.path, "line": self.line}


# Evidence kinds: transaction index (passive), FileRef (source scan),
# probe record string such as "GET /api/photo/ABC -> 301" (active probes).
Evidence = Union[int, FileRef, str]

PASSIVE_DETECTORS = frozenset({
    DetectorId.D_CLEARTEXT, DetectorId.D_PII_EXPOSURE, DetectorId.D_TOKEN_REUSE,
    DetectorId.D_NO_AUTH, DetectorId.D_PII_THIRD_PARTY,
})
ACTIVE_DETECTORS = frozenset({DetectorId.D_ORACLE, DetectorId.D_STALE_RESOURCE})

_EVIDENCE_KIND = {
    **{d: int for d in PASSIVE_DETECTORS},
    **{d: str for d in ACTIVE_DETECTORS},
    DetectorId.D_SECRET_CONSTANT: FileRef,
}


@dataclass
class Finding:
    detector_id: DetectorId
    severity: Severity
    summary: str
    evidence: list[Evidence]
    matched_fields: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.detector_id = DetectorId(self.detector_id)
        self.severity = Severity(self.severity)
        if not self.evidence:
            raise ValueError("a finding needs at least one piece of evidence")
        kind = _EVIDENCE_KIND[self.detector_id]
        for item in self.evidence:
            if not isinstance(item, kind) or (kind is int and isinstance(item, bool)):
                raise ValueError(f"{self.detector_id.value} evidence must be {kind.__name__}, got {item!r}")

    def to_dict(self) -> dict:
        return {
            "detector_id": self.detector_id.value,
            "severity": self.severity.value,
            "summary": self.summary,
            "evidence": [e.to_dict() if isinstance(e, FileRef) else e for e in self.evidence],
            "matched_fields": list(self.matched_fields),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Finding":
        evidence = [FileRef(**e) if isinstance(e, dict) else e for e in data["evidence"]]
        return cls(data["detector_id"], data["severity"], data["summary"], evidence,
                   list(data.get("matched_fields", [])))


def findings_to_json(findings: list[Finding]) -> str:
    return json.dumps([f.to_dict() for f in findings], indent=2, sort_keys=True)


def findings_from_json(text: str) -> list[Finding]:
    return [Finding.from_dict(d) for d in json.loads(text)]


DEFAULT_PII_PATTERNS = (
    ("name", r"(user_?|first_?|last_?|full_?|child_?|kid_?|nick_?)?name"),
    ("gender", r"gender|sex"),
    ("birthday", r"birth_?day|birth_?date|date_?of_?birth|dob"),
    ("weight", r"weight(_?kg|_?lbs?)?"),
    ("height", r"height(_?cm|_?in)?"),
    ("age", r"age(_?years)?"),
    ("photo", r"(profile_?)?(photo|avatar|picture|pic)(_?url|_?token)?"),
)


@dataclass
class PiiDictionary:
    """PII kinds and the key names that reveal them.

    Patterns are matched case-insensitively against a whole key. The
    ``photo`` kind also matches URL path segments of image transfers.
    """

    field_patterns: list[tuple[str, str]] = field(default_factory=lambda: list(DEFAULT_PII_PATTERNS))

    def __post_init__(self):
        if not self.field_patterns:
            raise ValueError("PII dictionary needs at least one pattern")
        kinds = [k for k, _ in self.field_patterns]
        if len(set(kinds)) != len(kinds):
            raise ValueError("duplicate PII kind labels")
        self._compiled = [(k, re.compile(p, re.IGNORECASE)) for k, p in self.field_patterns]
        alternation = "|".join(f"(?:{p})" for _, p in self.field_patterns)
        self._raw = re.compile(
            rf"""(?<![A-Za-z0-9_])["']?({alternation})["']?\s*[:=]""", re.IGNORECASE
        )

    def kind_of(self, key: str) -> str | None:
        for kind, rx in self._compiled:
            if rx.fullmatch(key):
                return kind
        return None

    def kinds_in_raw(self, text: str) -> set[str]:
        found = set()
        for m in self._raw.finditer(text):
            kind = self.kind_of(m.group(1))
            if kind:
                found.add(kind)
        return found
