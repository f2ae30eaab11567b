"""Vulnerability detectors: passive ones over captures, active probes against a target."""

from toyaudit.detect.active import (
    OracleInconclusive,
    ScriptedActionError,
    probe_response_oracle,
    probe_stale_resource,
    testbed_photo_overwrite,
)
from toyaudit.detect.model import (
    ACTIVE_DETECTORS,
    PASSIVE_DETECTORS,
    DetectorId,
    FileRef,
    Finding,
    PiiDictionary,
    Severity,
    findings_from_json,
    findings_to_json,
)
from toyaudit.detect.passive import (
    PassiveConfig,
    detect_cleartext_firstparty,
    detect_pii_exposure,
    detect_token_reuse,
    detect_unauthenticated_resource,
    run_passive,
)
from toyaudit.httpclient import TargetUnreachable

__all__ = [
    "ACTIVE_DETECTORS", "PASSIVE_DETECTORS", "DetectorId", "FileRef", "Finding",
    "OracleInconclusive", "PassiveConfig", "PiiDictionary", "ScriptedActionError", "Severity",
    "TargetUnreachable", "detect_cleartext_firstparty", "detect_pii_exposure",
    "detect_token_reuse", "detect_unauthenticated_resource", "findings_from_json",
    "findings_to_json", "probe_response_oracle", "probe_stale_resource", "run_passive",
    "testbed_photo_overwrite",
]
