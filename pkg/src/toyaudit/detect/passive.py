"""Detectors that work purely on a list of captured transactions."""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from urllib.parse import parse_qsl, urlsplit

from toyaudit.capture.model import DeviceProfile, HttpTransaction, Method, Party
from toyaudit.capture.stats import classify_party
from toyaudit.detect.model import DetectorId, Finding, PiiDictionary, Severity

DEFAULT_AUTH_HEADER = "X-Auth-Token"
_STANDARD_AUTH_HEADERS = ("Authorization", "Cookie")


def _json_keys(obj, out: set[str]):
    if isinstance(obj, dict):
        for key, value in obj.items():
            out.add(str(key))
            _json_keys(value, out)
    elif isinstance(obj, list):
        for item in obj:
            _json_keys(item, out)


def _body_kinds(body: bytes, content_type: str, pii: PiiDictionary) -> set[str]:
    if not body:
        return set()
    try:
        text = body.decode("utf-8")
    except UnicodeDecodeError:
        return set()
    keys: set[str] = set()
    parsed = False
    if "json" in content_type or text.lstrip()[:1] in ("{", "["):
        try:
            _json_keys(json.loads(text), keys)
            parsed = True
        except ValueError:
            pass
    if not parsed and "=" in text and "form-urlencoded" in content_type:
        keys.update(k for k, _ in parse_qsl(text, keep_blank_values=True))
        parsed = True
    if parsed:
        return {kind for kind in map(pii.kind_of, keys) if kind}
    return pii.kinds_in_raw(text)


def _path_names_photo(path: str, pii: PiiDictionary) -> bool:
    segments = [s for s in urlsplit(path).path.split("/") if s]
    return any(pii.kind_of(s) == "photo" for s in segments)


def request_pii(txn: HttpTransaction, pii: PiiDictionary) -> set[str]:
    kinds = _body_kinds(txn.req_body, (txn.header("content-type") or "").lower(), pii)
    query = urlsplit(txn.path).query
    kinds.update(k for k in (pii.kind_of(name) for name, _ in parse_qsl(query)) if k)
    ctype = (txn.header("content-type") or "").lower()
    if txn.req_body and ctype.startswith("image/") and _path_names_photo(txn.path, pii):
        kinds.add("photo")
    return kinds


def response_pii(txn: HttpTransaction, pii: PiiDictionary) -> set[str]:
    kinds = _body_kinds(txn.resp_body, txn.content_type, pii)
    if txn.content_type.startswith("image/") and txn.resp_body and _path_names_photo(txn.path, pii):
        kinds.add("photo")
    return kinds


def transaction_pii(txn: HttpTransaction, pii: PiiDictionary) -> set[str]:
    return request_pii(txn, pii) | response_pii(txn, pii)


def detect_cleartext_firstparty(txns: list[HttpTransaction], profile: DeviceProfile) -> list[Finding]:
    by_host: dict[str, list[int]] = defaultdict(list)
    for i, t in enumerate(txns):
        if not t.tls:
            by_host[t.host].append(i)
    findings = []
    for host, indices in by_host.items():
        party = classify_party(host, profile)
        if party is Party.FIRST_PARTY:
            severity = Severity.HIGH
            summary = f"{len(indices)} cleartext HTTP transaction(s) with first-party host {host}"
        else:
            severity = Severity.MEDIUM
            summary = f"{len(indices)} cleartext HTTP transaction(s) with {host} (party={party.value})"
        findings.append(Finding(DetectorId.D_CLEARTEXT, severity, summary, indices, [host]))
    return findings


def detect_pii_exposure(txns: list[HttpTransaction], pii: PiiDictionary,
                        profile: DeviceProfile) -> list[Finding]:
    findings = []
    for i, t in enumerate(txns):
        kinds = transaction_pii(t, pii)
        if not kinds:
            continue
        fields = sorted(kinds)
        if not t.tls:
            findings.append(Finding(
                DetectorId.D_PII_EXPOSURE, Severity.HIGH,
                f"PII ({', '.join(fields)}) sent in cleartext: {t.method.value} {t.host}{t.path}",
                [i], fields,
            ))
        if classify_party(t.host, profile) is Party.THIRD_PARTY:
            findings.append(Finding(
                DetectorId.D_PII_THIRD_PARTY, Severity.MEDIUM,
                f"PII ({', '.join(fields)}) reported to third party {t.host}"
                + (" over TLS" if t.tls else ""),
                [i], fields,
            ))
    return findings


def detect_token_reuse(txns: list[HttpTransaction], header_names=(DEFAULT_AUTH_HEADER,),
                       min_repeats: int = 2, min_span: float = 0.0) -> list[Finding]:
    if min_repeats < 2:
        raise ValueError("min_repeats must be at least 2")
    seen: dict[tuple[str, str], list[int]] = {}
    for i, t in enumerate(txns):
        if t.method is not Method.POST:
            continue
        for name in header_names:
            value = t.header(name)
            if value:
                seen.setdefault((name, value), []).append(i)
    findings = []
    for (name, value), indices in seen.items():
        if len(indices) < min_repeats:
            continue
        stamps = [txns[i].ts_start for i in indices]
        span = max(stamps) - min(stamps)
        if span < min_span:
            continue
        findings.append(Finding(
            DetectorId.D_TOKEN_REUSE, Severity.MEDIUM,
            f"{name} value reused on {len(indices)} POST requests over {span:.0f} s",
            indices, [value],
        ))
    return findings


def detect_unauthenticated_resource(txns: list[HttpTransaction], pii: PiiDictionary,
                                    auth_headers=(DEFAULT_AUTH_HEADER,)) -> list[Finding]:
    credential_headers = _STANDARD_AUTH_HEADERS + tuple(auth_headers)
    findings = []
    for i, t in enumerate(txns):
        if t.method is not Method.GET or t.status != 200:
            continue
        if any(t.header(h) for h in credential_headers):
            continue
        kinds = response_pii(t, pii)
        if kinds:
            findings.append(Finding(
                DetectorId.D_NO_AUTH, Severity.HIGH,
                f"credential-free GET {t.host}{t.path} returned {', '.join(sorted(kinds))}",
                [i], sorted(kinds),
            ))
    return findings


@dataclass
class PassiveConfig:
    pii: PiiDictionary = field(default_factory=PiiDictionary)
    auth_headers: tuple[str, ...] = (DEFAULT_AUTH_HEADER,)
    min_repeats: int = 2
    min_span: float = 0.0


def run_passive(txns: list[HttpTransaction], profile: DeviceProfile,
                config: PassiveConfig | None = None) -> list[Finding]:
    """All passive detectors, in a fixed detector order."""
    config = config or PassiveConfig()
    return (
        detect_cleartext_firstparty(txns, profile)
        + detect_pii_exposure(txns, config.pii, profile)
        + detect_token_reuse(txns, config.auth_headers, config.min_repeats, config.min_span)
        + detect_unauthenticated_resource(txns, config.pii, config.auth_headers)
    )
