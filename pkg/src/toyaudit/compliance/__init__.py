from toyaudit.compliance.catalog import (
    CatalogSchemaError,
    ClauseSource,
    ComplianceClause,
    DuplicateClauseId,
    Violation,
    load_clause_catalog,
    map_findings,
    parse_clause_catalog,
)
from toyaudit.compliance.report import FORMATS, AuditReport, build_report, render_report

__all__ = [
    "FORMATS", "AuditReport", "CatalogSchemaError", "ClauseSource", "ComplianceClause",
    "DuplicateClauseId", "Violation", "build_report", "load_clause_catalog", "map_findings",
    "parse_clause_catalog", "render_report",
]
