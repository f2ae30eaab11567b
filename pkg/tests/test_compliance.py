import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from toyaudit.capture import endpoint_stats
from toyaudit.compliance import (
    AuditReport,
    CatalogSchemaError,
    ClauseSource,
    DuplicateClauseId,
    Violation,
    build_report,
    load_clause_catalog,
    map_findings,
    parse_clause_catalog,
    render_report,
)
from toyaudit.detect import DetectorId, FileRef, Finding, Severity, run_passive
from toyaudit.testbed import PROFILES
from tests import oracles

CATALOG = load_clause_catalog()


def finding(detector: DetectorId) -> Finding:
    if detector is DetectorId.D_SECRET_CONSTANT:
        evidence = [FileRef("a", 1)]
    elif detector in (DetectorId.D_ORACLE, DetectorId.D_STALE_RESOURCE):
        evidence = ["GET /x -> 200"]
    else:
        evidence = [0]
    return Finding(detector, Severity.HIGH, detector.value, evidence)


def hydration_report(run, generated_at="2000-01-01T00:00:00+00:00"):
    findings = run_passive(run.txns, PROFILES["hydration"]) + run.active
    return build_report("hydration", run.txns, PROFILES["hydration"], findings, CATALOG, generated_at)


class TestCatalog:
    def test_default(self):
        assert len(CATALOG) == oracles.DEFAULT_CATALOG_SIZE
        by_id = {c.clause_id: c for c in CATALOG}
        assert {d.value for d in by_id["COPPA-312.8"].triggering_detectors} == {
            "D_CLEARTEXT", "D_PII_EXPOSURE", "D_NO_AUTH", "D_ORACLE", "D_PII_THIRD_PARTY"}
        assert {d.value for d in by_id["COPPA-312.10"].triggering_detectors} == {"D_STALE_RESOURCE"}
        assert {d.value for d in by_id["PP-SSL"].triggering_detectors} == {"D_CLEARTEXT"}
        assert {d.value for d in by_id["PP-SECURED-NET"].triggering_detectors} == {"D_NO_AUTH", "D_ORACLE"}
        assert by_id["PP-SSL"].source is ClauseSource.PRIVACY_POLICY
        assert oracles.SSL_QUOTE in by_id["PP-SSL"].quoted_text

    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps([c.to_dict() for c in CATALOG]))
        assert load_clause_catalog(path) == CATALOG

    def test_duplicate_ids(self):
        rec = CATALOG[0].to_dict()
        with pytest.raises(DuplicateClauseId):
            parse_clause_catalog(json.dumps([rec, rec]))

    @pytest.mark.parametrize("text", [
        "", "{}", "[1]", '[{"clause_id": "X"}]',
        '[{"clause_id": "X", "source": "Regulation", "quoted_text": "q", "triggering_detectors": []}]',
        '[{"clause_id": "X", "source": "Blog", "quoted_text": "q", "triggering_detectors": ["D_ORACLE"]}]',
        '[{"clause_id": "X", "source": "Regulation", "quoted_text": "q", "triggering_detectors": ["D_NOPE"]}]',
        '[{"clause_id": "", "source": "Regulation", "quoted_text": "q", "triggering_detectors": ["D_ORACLE"]}]',
        '[{"clause_id": "X", "source": "Regulation", "quoted_text": "q", "triggering_detectors": ["D_ORACLE"], "x": 1}]',
    ])
    def test_schema_errors(self, text):
        with pytest.raises(CatalogSchemaError):
            parse_clause_catalog(text)


class TestMapping:
    def test_stale_only(self):
        assert [v.clause_id for v in map_findings([finding(DetectorId.D_STALE_RESOURCE)], CATALOG)] == ["COPPA-312.10"]

    def test_empty(self):
        assert map_findings([], CATALOG) == []

    def test_secret_constant_maps_nowhere(self):
        assert map_findings([finding(DetectorId.D_SECRET_CONSTANT)], CATALOG) == []

    def test_supporting_indices(self):
        fs = [finding(DetectorId.D_ORACLE), finding(DetectorId.D_STALE_RESOURCE), finding(DetectorId.D_CLEARTEXT)]
        assert map_findings(fs, CATALOG) == [
            Violation("COPPA-312.8", (0, 2)), Violation("COPPA-312.10", (1,)),
            Violation("PP-SSL", (2,)), Violation("PP-SECURED-NET", (0,))]

    @given(st.lists(st.sampled_from(list(DetectorId)), max_size=8), st.sampled_from(list(DetectorId)))
    def test_monotone(self, detectors, extra):
        before = {v.clause_id for v in map_findings([finding(d) for d in detectors], CATALOG)}
        after = {v.clause_id for v in map_findings([finding(d) for d in detectors + [extra]], CATALOG)}
        assert before <= after

    @given(st.permutations([d for d in DetectorId]))
    def test_order_independent(self, detectors):
        canonical = map_findings([finding(d) for d in DetectorId], CATALOG)
        shuffled = map_findings([finding(d) for d in detectors], CATALOG)
        assert [v.clause_id for v in canonical] == [v.clause_id for v in shuffled]
        assert all(list(v.finding_indices) == sorted(v.finding_indices) for v in shuffled)

    def test_hydration(self, scenario_runs):
        report = hydration_report(scenario_runs["hydration"])
        assert [v.clause_id for v in report.violations] == oracles.HYDRATION_VIOLATIONS
        by_id = {v.clause_id: v for v in report.violations}
        stale = [i for i, f in enumerate(report.findings) if f.detector_id is DetectorId.D_STALE_RESOURCE]
        assert list(by_id["COPPA-312.10"].finding_indices) == stale
        cleartext = [i for i, f in enumerate(report.findings) if f.detector_id is DetectorId.D_CLEARTEXT]
        assert list(by_id["PP-SSL"].finding_indices) == cleartext

    def test_fitness_and_hardened_have_no_violations(self, scenario_runs):
        fitness = scenario_runs["fitness"]
        assert map_findings(run_passive(fitness.txns, PROFILES["fitness"]), CATALOG) == []
        assert hydration_report(scenario_runs["hardened"]).violations == []


class TestReport:
    def test_invariants(self):
        with pytest.raises(ValueError):
            AuditReport("d", [], [], [Violation("X", ())])
        with pytest.raises(ValueError):
            AuditReport("d", [], [], [Violation("X", (0,))])

    def test_empty_report(self):
        report = AuditReport("d", [], [], [], generated_at="t")
        md = render_report(report, "markdown").decode()
        for section in ("## Summary", "## Endpoint Statistics", "## Findings", "## Violations"):
            assert section in md
        assert json.loads(render_report(report, "json")) == {
            "capture_summary": [], "device_name": "d", "findings": [], "generated_at": "t", "violations": []}

    def test_markdown_quotes_clause(self, scenario_runs):
        md = render_report(hydration_report(scenario_runs["hydration"]), "markdown").decode()
        assert oracles.SSL_QUOTE in md
        assert "### COPPA-312.10" in md

    def test_deterministic(self, scenario_runs):
        run = scenario_runs["hydration"]
        for fmt in ("json", "markdown"):
            assert render_report(hydration_report(run), fmt) == render_report(hydration_report(run), fmt)

    def test_json_sorted_keys(self, scenario_runs):
        text = render_report(hydration_report(scenario_runs["hydration"]), "json").decode()
        data = json.loads(text)
        assert text == json.dumps(data, indent=2, sort_keys=True) + "\n"
        assert len(data["capture_summary"]) == oracles.SCENARIO_HOSTS["hydration"]
        assert data["violations"][0]["quoted_text"]

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            render_report(AuditReport("d", [], [], []), "pdf")

    def test_capture_summary_matches_stats(self, scenario_runs):
        run = scenario_runs["hydration"]
        assert hydration_report(run).capture_summary == endpoint_stats(run.txns, PROFILES["hydration"])
