"""Regulatory / privacy-policy clauses and the detector -> clause mapping."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

from toyaudit import ToyAuditError
from toyaudit.detect.model import DetectorId, Finding

log = logging.getLogger(__name__)

DEFAULT_CATALOG = "default_catalog.json"
_KEYS = {"clause_id", "source", "quoted_text", "triggering_detectors"}


class CatalogSchemaError(ToyAuditError):
    pass


class DuplicateClauseId(ToyAuditError):
    pass


class ClauseSource(str, Enum):
    REGULATION = "Regulation"
    PRIVACY_POLICY = "PrivacyPolicy"


@dataclass(frozen=True)
class ComplianceClause:
    clause_id: str
    source: ClauseSource
    quoted_text: str
    triggering_detectors: frozenset[DetectorId]

    def __post_init__(self):
        if not self.triggering_detectors:
            raise CatalogSchemaError(f"clause {self.clause_id} has no triggering detectors")

    def to_dict(self) -> dict:
        return {
            "clause_id": self.clause_id,
            "source": self.source.value,
            "quoted_text": self.quoted_text,
            "triggering_detectors": sorted(d.value for d in self.triggering_detectors),
        }


@dataclass(frozen=True)
class Violation:
    clause_id: str
    finding_indices: tuple[int, ...]

    def to_dict(self) -> dict:
        return {"clause_id": self.clause_id, "finding_indices": list(self.finding_indices)}


def _clause_from_record(i: int, rec) -> ComplianceClause:
    where = f"catalog entry {i}"
    if not isinstance(rec, dict):
        raise CatalogSchemaError(f"{where}: expected an object")
    missing, extra = _KEYS - rec.keys(), rec.keys() - _KEYS
    if missing or extra:
        raise CatalogSchemaError(f"{where}: missing {sorted(missing)}, unexpected {sorted(extra)}")
    clause_id, text, detectors = rec["clause_id"], rec["quoted_text"], rec["triggering_detectors"]
    if not isinstance(clause_id, str) or not clause_id:
        raise CatalogSchemaError(f"{where}: clause_id must be a non-empty string")
    if not isinstance(text, str) or not text:
        raise CatalogSchemaError(f"{where}: quoted_text must be a non-empty string")
    if not isinstance(detectors, list) or not all(isinstance(d, str) for d in detectors):
        raise CatalogSchemaError(f"{where}: triggering_detectors must be a list of detector ids")
    try:
        source = ClauseSource(rec["source"])
        ids = frozenset(DetectorId(d) for d in detectors)
    except ValueError as exc:
        raise CatalogSchemaError(f"{where}: {exc}") from None
    return ComplianceClause(clause_id, source, text, ids)


def parse_clause_catalog(text: str) -> list[ComplianceClause]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CatalogSchemaError(f"catalog is not valid JSON: {exc}") from None
    if not isinstance(data, list):
        raise CatalogSchemaError("catalog must be a JSON array of clauses")
    clauses = [_clause_from_record(i, rec) for i, rec in enumerate(data)]
    seen = set()
    for c in clauses:
        if c.clause_id in seen:
            raise DuplicateClauseId(c.clause_id)
        seen.add(c.clause_id)
    return clauses


def load_clause_catalog(file=None) -> list[ComplianceClause]:
    """Load a catalog file; ``None`` loads the catalog shipped with the package."""
    if file is None:
        text = resources.files("toyaudit.compliance").joinpath(DEFAULT_CATALOG).read_text("utf-8")
    else:
        text = Path(file).read_text(encoding="utf-8")
    return parse_clause_catalog(text)


def map_findings(findings: list[Finding], catalog: list[ComplianceClause]) -> list[Violation]:
    """One violation per clause triggered by at least one finding, in catalog order."""
    out = []
    for clause in catalog:
        hits = tuple(i for i, f in enumerate(findings) if f.detector_id in clause.triggering_detectors)
        if hits:
            out.append(Violation(clause.clause_id, hits))
    return out
