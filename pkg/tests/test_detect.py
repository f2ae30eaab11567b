import json

import pytest

from toyaudit.capture import DeviceProfile, HttpTransaction
from toyaudit.detect import (
    DetectorId,
    FileRef,
    Finding,
    OracleInconclusive,
    PassiveConfig,
    PiiDictionary,
    ScriptedActionError,
    Severity,
    detect_cleartext_firstparty,
    detect_pii_exposure,
    detect_token_reuse,
    detect_unauthenticated_resource,
    findings_from_json,
    findings_to_json,
    probe_response_oracle,
    probe_stale_resource,
    run_passive,
)
from toyaudit.httpclient import TargetNotAllowed, TargetUnreachable, is_loopback_target
from toyaudit.testbed import PROFILES
from tests import oracles

PROFILE = DeviceProfile("toy", {"*.toy.test"}, {"*.ads.test": "ads"})
PII = PiiDictionary()


def t(i=0, host="api.toy.test", tls=False, method="POST", path="/x", body=None, headers=None,
      status=200, resp=b"", resp_type="application/json", ts=None) -> HttpTransaction:
    raw = json.dumps(body).encode() if isinstance(body, (dict, list)) else (body or b"")
    req_headers = {"Host": host, **(headers or {})}
    if raw and "Content-Type" not in req_headers:
        req_headers["Content-Type"] = "application/json"
    start = 1000.0 + i if ts is None else ts
    return HttpTransaction(start, start + 0.1, "10.0.0.2", 40000 + i, "10.0.0.9", 443 if tls else 80,
                           host, tls, method, path, req_headers, status,
                           {"Content-Type": resp_type}, raw, resp, len(raw) + 100, len(resp) + 100)


class TestFindingModel:
    def test_evidence_kind_is_checked(self):
        with pytest.raises(ValueError):
            Finding(DetectorId.D_CLEARTEXT, Severity.HIGH, "x", ["GET /"])
        with pytest.raises(ValueError):
            Finding(DetectorId.D_ORACLE, Severity.MEDIUM, "x", [3])
        with pytest.raises(ValueError):
            Finding(DetectorId.D_SECRET_CONSTANT, Severity.HIGH, "x", [1])
        with pytest.raises(ValueError):
            Finding(DetectorId.D_CLEARTEXT, Severity.HIGH, "x", [True])

    def test_needs_evidence(self):
        with pytest.raises(ValueError):
            Finding(DetectorId.D_CLEARTEXT, Severity.HIGH, "x", [])

    def test_json_round_trip(self):
        findings = [
            Finding(DetectorId.D_CLEARTEXT, Severity.HIGH, "c", [0, 2], ["h"]),
            Finding(DetectorId.D_ORACLE, Severity.MEDIUM, "o", ["GET /a -> 301"], ["301", "404"]),
            Finding(DetectorId.D_SECRET_CONSTANT, Severity.HIGH, "s", [FileRef("a/B.java", 9)], ["K"]),
        ]
        assert findings_from_json(findings_to_json(findings)) == findings


class TestPiiDictionary:
    @pytest.mark.parametrize("key,kind", [
        ("name", "name"), ("child_name", "name"), ("Gender", "gender"), ("dob", "birthday"),
        ("weight_kg", "weight"), ("height_cm", "height"), ("age_years", "age"),
        ("avatar_url", "photo"), ("username_hint", None), ("page", None), ("ml", None),
    ])
    def test_kind_of(self, key, kind):
        assert PII.kind_of(key) == kind

    def test_raw_text(self):
        assert PII.kinds_in_raw("name=Ava&weight=20") == {"name", "weight"}
        assert PII.kinds_in_raw("hostname: x") == set()

    def test_rejects_duplicates(self):
        with pytest.raises(ValueError):
            PiiDictionary([("a", "x"), ("a", "y")])


class TestCleartext:
    def test_one_finding_per_host(self):
        txns = [t(0), t(1), t(2, host="static.toy.test"), t(3, tls=True)]
        findings = detect_cleartext_firstparty(txns, PROFILE)
        assert [(f.matched_fields, f.evidence, f.severity) for f in findings] == [
            (["api.toy.test"], [0, 1], Severity.HIGH), (["static.toy.test"], [2], Severity.HIGH)]

    def test_third_party_cleartext_is_medium(self):
        (f,) = detect_cleartext_firstparty([t(0, host="x.ads.test")], PROFILE)
        assert f.severity is Severity.MEDIUM

    def test_all_tls_is_clean(self):
        assert detect_cleartext_firstparty([t(0, tls=True)], PROFILE) == []


class TestPiiExposure:
    def test_cleartext_pii(self):
        (f,) = detect_pii_exposure([t(0, body={"name": "Ava", "birthday": "2012-01-01", "ml": 3})], PII, PROFILE)
        assert f.detector_id is DetectorId.D_PII_EXPOSURE
        assert f.matched_fields == ["birthday", "name"]

    def test_third_party_over_tls(self):
        (f,) = detect_pii_exposure([t(0, host="x.ads.test", tls=True, body={"user": {"gender": "f"}})], PII, PROFILE)
        assert f.detector_id is DetectorId.D_PII_THIRD_PARTY
        assert f.matched_fields == ["gender"]

    def test_third_party_cleartext_yields_both(self):
        ids = {f.detector_id for f in detect_pii_exposure([t(0, host="x.ads.test", body={"name": "a"})], PII, PROFILE)}
        assert ids == {DetectorId.D_PII_EXPOSURE, DetectorId.D_PII_THIRD_PARTY}

    def test_form_and_query(self):
        form = t(0, body=b"name=Ava&x=1", headers={"Content-Type": "application/x-www-form-urlencoded"})
        query = t(1, method="GET", path="/q?age=7")
        assert [f.matched_fields for f in detect_pii_exposure([form, query], PII, PROFILE)] == [["name"], ["age"]]

    def test_photo_requires_photo_path(self):
        background = t(0, method="GET", path="/img/bg.png", resp=b"\x89PNG", resp_type="image/png")
        photo = t(1, method="GET", path="/api/photo/ABC/ABC1", resp=b"\xff\xd8", resp_type="image/jpeg")
        findings = detect_pii_exposure([background, photo], PII, PROFILE)
        assert [f.evidence for f in findings] == [[1]]

    def test_no_pii(self):
        assert detect_pii_exposure([t(0, body={"ml": 250})], PII, PROFILE) == []


class TestTokenReuse:
    def test_reuse_across_posts(self):
        h = {"X-Auth-Token": "tok"}
        (f,) = detect_token_reuse([t(0, headers=h), t(1, method="GET", headers=h), t(300, headers=h)])
        assert f.evidence == [0, 2] and f.matched_fields == ["tok"]
        assert "300 s" in f.summary

    def test_distinct_tokens_are_clean(self):
        assert detect_token_reuse([t(0, headers={"X-Auth-Token": "a"}), t(1, headers={"X-Auth-Token": "b"})]) == []

    def test_thresholds(self):
        h = {"X-Auth-Token": "tok"}
        txns = [t(0, headers=h), t(10, headers=h)]
        assert detect_token_reuse(txns, min_repeats=3) == []
        assert detect_token_reuse(txns, min_span=60) == []
        with pytest.raises(ValueError):
            detect_token_reuse(txns, min_repeats=1)

    def test_custom_header(self):
        h = {"X-Session": "s"}
        assert len(detect_token_reuse([t(0, headers=h), t(1, headers=h)], ("X-Session",))) == 1


class TestUnauthenticatedResource:
    photo = dict(method="GET", path="/api/photo/ABC/ABC123", resp=b"\xff\xd8jpeg", resp_type="image/jpeg")

    def test_credential_free_photo(self):
        (f,) = detect_unauthenticated_resource([t(0, **self.photo)], PII)
        assert f.detector_id is DetectorId.D_NO_AUTH and f.matched_fields == ["photo"]

    @pytest.mark.parametrize("header", ["X-Auth-Token", "Authorization", "Cookie"])
    def test_credentials_suppress(self, header):
        assert detect_unauthenticated_resource([t(0, headers={header: "v"}, **self.photo)], PII) == []

    def test_non_200_is_clean(self):
        assert detect_unauthenticated_resource([t(0, status=404, **{**self.photo, "resp": b""})], PII) == []

    def test_json_profile_response(self):
        txn = t(0, method="GET", path="/api/user/7", resp=b'{"name":"Ava","gender":"f"}')
        (f,) = detect_unauthenticated_resource([txn], PII)
        assert f.matched_fields == ["gender", "name"]


class TestScenarioDetection:
    def test_vulnerable_hydration(self, scenario_runs):
        findings = run_passive(scenario_runs["hydration"].txns, PROFILES["hydration"])
        ids = {f.detector_id.value for f in findings}
        assert ids == oracles.HYDRATION_PASSIVE
        cleartext = {f.matched_fields[0] for f in findings if f.detector_id is DetectorId.D_CLEARTEXT}
        assert cleartext == oracles.HYDRATION_CLEARTEXT_HOSTS
        (reuse,) = [f for f in findings if f.detector_id is DetectorId.D_TOKEN_REUSE]
        assert len(reuse.evidence) == oracles.HYDRATION_DRINK_POSTS
        assert f"over {oracles.HYDRATION_DRINK_SPAN_S} s" in reuse.summary
        (crash,) = [f for f in findings if f.detector_id is DetectorId.D_PII_THIRD_PARTY]
        assert crash.matched_fields == oracles.HYDRATION_CRASH_PII
        account = [f for f in findings if f.detector_id is DetectorId.D_PII_EXPOSURE][0]
        assert account.matched_fields == oracles.HYDRATION_ACCOUNT_PII

    def test_labels_cover_findings(self, scenario_runs):
        run = scenario_runs["hydration"]
        found = {f.detector_id.value for f in run_passive(run.txns, PROFILES["hydration"]) + run.active}
        assert {lb["detector_id"] for lb in run.labels} == found

    def test_hardened_is_clean(self, scenario_runs):
        run = scenario_runs["hardened"]
        assert run_passive(run.txns, PROFILES["hydration"]) == []
        assert run.active == []
        assert run.labels == []

    def test_fitness_is_clean(self, scenario_runs):
        assert run_passive(scenario_runs["fitness"].txns, PROFILES["fitness"]) == []

    def test_smartpet_cleartext_feed(self, scenario_runs):
        findings = run_passive(scenario_runs["smartpet"].txns, PROFILES["smartpet"])
        assert [(f.detector_id, f.severity) for f in findings] == [(DetectorId.D_CLEARTEXT, Severity.MEDIUM)]

    def test_pcap_view_still_finds_cleartext_issues(self, scenario_runs):
        from toyaudit.capture import parse_pcap
        txns = parse_pcap(scenario_runs["hydration"].pcap.read_bytes())
        ids = {f.detector_id.value for f in run_passive(txns, PROFILES["hydration"])}
        # the crash report travels over TLS, so only the decrypted log reveals it
        assert ids == oracles.HYDRATION_PASSIVE - {"D_PII_THIRD_PARTY"}

    def test_passive_config(self, scenario_runs):
        cfg = PassiveConfig(min_span=3600)
        findings = run_passive(scenario_runs["hydration"].txns, PROFILES["hydration"], cfg)
        assert DetectorId.D_TOKEN_REUSE not in {f.detector_id for f in findings}

    def test_input_order_independent_up_to_indices(self, scenario_runs):
        txns = scenario_runs["hydration"].txns
        forward = run_passive(txns, PROFILES["hydration"])
        backward = run_passive(txns[::-1], PROFILES["hydration"])
        n = len(txns)
        remap = lambda fs: sorted((f.detector_id.value, tuple(sorted(f.evidence))) for f in fs)
        flipped = [Finding(f.detector_id, f.severity, f.summary, [n - 1 - i for i in f.evidence],
                           f.matched_fields) for f in backward]
        assert remap(forward) == remap(flipped)


class TestActiveProbes:
    def test_oracle_detected(self, vulnerable_server, vulnerable_config):
        known = vulnerable_config.planted_users[0].photo_token[:3]
        (f,) = probe_response_oracle(vulnerable_server.url, probe_count=20, known_prefixes=[known], delay=0)
        assert f.detector_id is DetectorId.D_ORACLE
        assert f.matched_fields == ["301", "404"]
        assert f"GET /api/photo/{known} -> 301" in f.evidence

    def test_hardened_oracle_inconclusive(self, hardened_server, hardened_config):
        known = hardened_config.planted_users[0].photo_token[:3]
        with pytest.raises(OracleInconclusive):
            probe_response_oracle(hardened_server.url, probe_count=10, known_prefixes=[known], delay=0)

    def test_path_template_validated(self):
        with pytest.raises(ValueError):
            probe_response_oracle("http://127.0.0.1:1", path_template="/api/photo/")

    def test_stale_action_failure(self, vulnerable_server):
        def boom():
            raise RuntimeError("nope")
        with pytest.raises(ScriptedActionError):
            probe_stale_resource(vulnerable_server.url, boom)

    def test_stale_needs_url(self, vulnerable_server):
        with pytest.raises(ScriptedActionError):
            probe_stale_resource(vulnerable_server.url, lambda: None)

    def test_unreachable_target(self, unused_port):
        with pytest.raises(TargetUnreachable):
            probe_response_oracle(f"http://127.0.0.1:{unused_port}", probe_count=1, delay=0)

    def test_scenario_active_findings(self, scenario_runs):
        assert {f.detector_id.value for f in scenario_runs["hydration"].active} == oracles.HYDRATION_ACTIVE


class TestTargetGuard:
    @pytest.mark.parametrize("url,ok", [
        ("http://127.0.0.1:8080", True), ("http://localhost", True), ("http://[::1]:9", True),
        ("http://127.9.9.9", True), ("http://10.0.0.1", False), ("https://example.com", False),
    ])
    def test_loopback(self, url, ok):
        assert is_loopback_target(url) is ok

    def test_probe_refuses_remote_without_acknowledgment(self, vulnerable_config):
        from toyaudit.testbed.probes import run_testbed_probes
        with pytest.raises(TargetNotAllowed):
            run_testbed_probes("http://192.0.2.1", vulnerable_config)
