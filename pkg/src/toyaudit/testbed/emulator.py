"""Scripted client sessions producing labeled captures (JSONL + PCAP + labels)."""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass
from pathlib import Path

import httpx

from toyaudit import ToyAuditError
from toyaudit.capture.model import DeviceProfile, HttpTransaction, Method
from toyaudit.capture.pcap import PcapWriter, tls_wire_bytes, transaction_wire_bytes
from toyaudit.capture.translog import dump_transaction_log
from toyaudit.fileio import write_atomic
from toyaudit.testbed import scenarios
from toyaudit.testbed.config import TestbedConfig, fake_jpeg
from toyaudit.testbed.server import AUTH_HEADER

log = logging.getLogger(__name__)

SESSION_START = 1_700_000_000.0
APP_AGENT = "HydroTrack/2.1 (Android 7.0)"


class ScenarioServerUnavailable(ToyAuditError):
    pass


@dataclass
class Label:
    detector_id: str
    description: str
    evidence_hint: str

    def to_dict(self) -> dict:
        return {"detector_id": self.detector_id, "description": self.description,
                "evidence_hint": self.evidence_hint}


class _Recorder:
    """Turns request/response pairs into transactions plus their on-wire byte streams."""

    def __init__(self, profile: DeviceProfile, seed: int):
        self.profile = profile
        self.rng = random.Random(seed)
        self.txns: list[HttpTransaction] = []
        self.streams: list[tuple[bytes, bytes]] = []
        self._port = 49152

    def add(self, ts: float, host: str, tls: bool, method: str, path: str,
            req_headers: dict[str, str], req_body: bytes, status: int,
            resp_headers: dict[str, str], resp_body: bytes, rtt: float = 0.12) -> HttpTransaction:
        txn = HttpTransaction(
            ts_start=round(ts, 6), ts_end=round(ts + rtt, 6), src_ip=scenarios.DEVICE_IP,
            src_port=self._port, dst_ip=scenarios.host_ip(host, self.profile),
            dst_port=443 if tls else 80, host=host, tls=tls, method=Method.parse(method),
            path=path, req_headers=dict(req_headers), status=status,
            resp_headers=dict(resp_headers), req_body=req_body, resp_body=resp_body,
            req_bytes=len(req_body), resp_bytes=len(resp_body),
        )
        up, down = transaction_wire_bytes(txn)
        if tls:
            up, down = tls_wire_bytes(host, up, down, self.rng.randbytes)
        txn.req_bytes, txn.resp_bytes = len(up), len(down)
        self._port += 1
        self.txns.append(txn)
        self.streams.append((up, down))
        return txn

    def synth(self, ts: float, host: str, tls: bool, method: str, path: str, *, body=b"",
              content_type: str | None = None, status: int = 200, resp_body=b"",
              resp_type: str = "application/json", extra_headers=None) -> HttpTransaction:
        if isinstance(body, (dict, list)):
            body = json.dumps(body, separators=(",", ":")).encode()
            content_type = content_type or "application/json"
        if isinstance(resp_body, (dict, list)):
            resp_body = json.dumps(resp_body, separators=(",", ":")).encode()
        headers = {"Host": host, "User-Agent": APP_AGENT, "Accept": "*/*"}
        headers.update(extra_headers or {})
        if body:
            headers["Content-Type"] = content_type or "application/octet-stream"
            headers["Content-Length"] = str(len(body))
        resp_headers = {"Content-Type": resp_type, "Content-Length": str(len(resp_body))}
        return self.add(ts, host, tls, method, path, headers, body, status, resp_headers, resp_body)

    def pcap(self) -> bytes:
        writer = PcapWriter()
        for txn, (up, down) in zip(self.txns, self.streams):
            writer.add_session((txn.src_ip, txn.src_port), (txn.dst_ip, txn.dst_port),
                               [(txn.ts_start, up, txn.ts_end, down)])
        return writer.getvalue()


class _LiveApi:
    """Calls the running testbed while presenting the first-party host name."""

    def __init__(self, recorder: _Recorder, client: httpx.Client, tls: bool):
        self.recorder = recorder
        self.client = client
        self.tls = tls

    def call(self, ts: float, method: str, path: str, *, json_body=None, content: bytes | None = None,
             content_type: str | None = None, headers=None) -> httpx.Response:
        req_headers = {"Host": scenarios.API_HOST, "User-Agent": APP_AGENT,
                       "Accept-Encoding": "identity"}
        req_headers.update(headers or {})
        if json_body is not None:
            content = json.dumps(json_body, separators=(",", ":")).encode()
            content_type = "application/json"
        if content_type:
            req_headers["Content-Type"] = content_type
        try:
            resp = self.client.request(method, path, content=content, headers=req_headers)
        except (httpx.ConnectError, httpx.ConnectTimeout) as exc:
            raise ScenarioServerUnavailable(f"testbed not reachable: {exc}") from exc
        sent = resp.request
        self.recorder.add(
            ts, scenarios.API_HOST, self.tls, method, path,
            _flatten(sent.headers), sent.content or b"", resp.status_code,
            _flatten(resp.headers), resp.content,
        )
        return resp


def _flatten(headers: httpx.Headers) -> dict[str, str]:
    out: dict[str, str] = {}
    for name, value in headers.multi_items():
        out[name] = f"{out[name]}, {value}" if name in out else value
    return out


def _expect(resp: httpx.Response, what: str):
    if resp.status_code != 200:
        raise ScenarioServerUnavailable(f"{what} failed with HTTP {resp.status_code}: {resp.text[:200]}")


def _third_party_chatter(rec: _Recorder, t: float, hosts) -> float:
    """Routine analytics/SDK traffic, TLS, no personal fields."""
    calls = {
        "analytics.example.test": ("POST", "/collect", {"client_id": "c-5512", "event": "app_open"}),
        "collect.analytics.example.test": ("GET", "/r/collect?v=1&t=screenview&cd=home", b""),
        "crash.example.test": ("GET", "/spi/v2/settings", b""),
        "settings.crash.example.test": ("GET", "/spi/v2/platforms/android/settings", b""),
        "data.flurry.example.test": ("POST", "/aap.do", {"session": 3, "event": "launch"}),
        "cfg.flurry.example.test": ("GET", "/sdk/v1/config", b""),
        "stats.jpush.example.test": ("POST", "/v1/report", {"platform": "android", "count": 1}),
        "api.jpush.example.test": ("POST", "/v3/register", {"registration": "r-77a0"}),
        "perf.monitor.example.test": ("POST", "/v1/metrics", {"cold_start_ms": 812, "fps": 58}),
    }
    for host in hosts:
        method, path, body = calls[host]
        rec.synth(t, host, True, method, path, body=body,
                  resp_body={"ok": True, "ttl": 3600} if method == "GET" else {"ok": True})
        t += 0.2
    return t


def _hydration(config: TestbedConfig, target: str, seed: int, client: httpx.Client | None):
    profile = scenarios.profile_for("hydration")
    rec = _Recorder(profile, seed)
    toggles = config.toggles
    first_tls = not toggles["cleartext_first_party"]
    owns = client is None
    client = client or httpx.Client(base_url=target, timeout=10.0, follow_redirects=False)
    api = _LiveApi(rec, client, first_tls)
    labels: list[Label] = []
    t = SESSION_START
    try:
        rec.synth(t, "www.toymaker.test", first_tls, "GET", "/app/config.json",
                  resp_body={"min_version": "2.0", "features": ["reminders", "stats"]})
        rec.synth(t + 0.4, "static.toymaker.test", first_tls, "GET", "/img/background_1.png",
                  resp_body=b"\x89PNG\r\n\x1a\n" + bytes(range(64)) * 8, resp_type="image/png")
        rec.synth(t + 0.7, "static.toymaker.test", first_tls, "GET", "/img/background_2.png",
                  resp_body=b"\x89PNG\r\n\x1a\n" + bytes(range(64, 128)) * 6, resp_type="image/png")
        t = _third_party_chatter(rec, t + 1.0, scenarios.HYDRATION_THIRD_PARTY)

        account = {"name": "Mia K.", "gender": "female", "birthday": "2010-05-14",
                   "weight_kg": 31.5, "height_cm": 134.0, "age_years": 8}
        resp = api.call(t + 0.5, "POST", "/api/account", json_body=account)
        _expect(resp, "account creation")
        user_id, token = resp.json()["user_id"], resp.json()["auth_token"]

        photo = fake_jpeg(f"emulated-{user_id}")
        resp = api.call(t + 1.5, "PUT", f"/api/photo/{user_id}", content=photo,
                        content_type="image/jpeg", headers={AUTH_HEADER: token})
        _expect(resp, "photo upload")
        photo_token = resp.json()["token"]
        photo_url = f"/api/photo/{photo_token[:config.prefix_len]}/{photo_token}"

        photo_headers = {} if toggles["no_auth_photos"] else {AUTH_HEADER: token}
        resp = api.call(t + 2.5, "GET", photo_url, headers=photo_headers)
        _expect(resp, "photo fetch")

        drink_times = [SESSION_START + 60, SESSION_START + 360, SESSION_START + 660]
        for i, when in enumerate(drink_times):
            if i and not toggles["token_reuse"]:
                resp = api.call(when - 1.0, "POST", "/api/token/refresh", json_body={"auth_token": token})
                _expect(resp, "token refresh")
                token = resp.json()["auth_token"]
            resp = api.call(when, "POST", "/api/drink", json_body={"ml": 150 + 25 * i},
                            headers={AUTH_HEADER: token})
            _expect(resp, "drink report")

        crash = {"error": "java.net.SocketTimeoutException: timeout", "app_version": "2.1.0"}
        if toggles["pii_crash_reports"]:
            crash = {"name": account["name"], "gender": account["gender"],
                     "birthday": account["birthday"], "weight": account["weight_kg"], **crash}
        rec.synth(SESSION_START + 700, scenarios.CRASH_HOST, True, "POST", "/api/v1/crash",
                  body=crash, resp_body={"ok": True})

        new_photo = fake_jpeg(f"emulated-{user_id}-v2")
        resp = api.call(SESSION_START + 720, "PUT", f"/api/photo/{user_id}", content=new_photo,
                        content_type="image/jpeg", headers={AUTH_HEADER: token})
        _expect(resp, "photo overwrite")
    finally:
        if owns:
            client.close()

    if toggles["cleartext_first_party"]:
        labels.append(Label("D_CLEARTEXT", "first-party traffic over plain HTTP",
                            ", ".join(scenarios.HYDRATION_FIRST_PARTY)))
        labels.append(Label("D_PII_EXPOSURE", "account fields and profile photo readable on the wire",
                            f"POST /api/account; GET {photo_url}"))
    if toggles["token_reuse"]:
        labels.append(Label("D_TOKEN_REUSE", "one X-Auth-Token value on every drink POST",
                            f"{len(drink_times)} x POST /api/drink"))
    if toggles["no_auth_photos"]:
        labels.append(Label("D_NO_AUTH", "profile photo served without credentials", f"GET {photo_url}"))
    if toggles["prefix_oracle"]:
        labels.append(Label("D_ORACLE", "truncated photo URL answers 301 for real prefixes, 404 otherwise",
                            f"GET /api/photo/{photo_token[:config.prefix_len]}"))
    if toggles["retain_old_photos"]:
        labels.append(Label("D_STALE_RESOURCE", "overwritten profile photo still served", f"GET {photo_url}"))
    if toggles["pii_crash_reports"]:
        labels.append(Label("D_PII_THIRD_PARTY", "crash report carries name, gender, birthday, weight",
                            f"POST {scenarios.CRASH_HOST}/api/v1/crash"))
    return rec, labels


def _smartpet(seed: int, out_dir: Path):
    rec = _Recorder(scenarios.profile_for("smartpet"), seed)
    t = SESSION_START
    rec.synth(t, "api.petmaker.test", True, "POST", "/v1/pet/state",
              body={"mood": "happy", "battery": 81}, resp_body={"ok": True})
    rec.synth(t + 0.5, "update.petmaker.test", True, "GET", "/firmware/latest.json",
              resp_body={"version": "1.4.2", "size": 912344})
    rec.synth(t + 1.0, "analytics.example.test", True, "POST", "/collect",
              body={"client_id": "c-9031", "event": "pet_fed"}, resp_body={"ok": True})
    rec.synth(t + 1.3, "crash.example.test", True, "GET", "/spi/v2/settings", resp_body={"ttl": 3600})
    feeds = []
    for i, feed in enumerate(("kids.xml", "weather.xml")):
        xml = (f'<?xml version="1.0"?><rss version="2.0"><channel><title>{feed}</title>'
               f"<item><title>Story {i}</title></item></channel></rss>").encode()
        rec.synth(t + 2.0 + i, scenarios.NEWS_HOST, False, "GET", f"/rss/{feed}",
                  resp_body=xml, resp_type="application/xml")
        feeds.append(f"/rss/{feed}")
    rec.synth(t + 4.0, "assets.cdn.example.test", True, "GET", "/pets/dog.png",
              resp_body=b"\x89PNG\r\n\x1a\n" + bytes(range(256)) * 4, resp_type="image/png")

    src = out_dir / "smartpet_src" / "com" / "petmaker" / "smartpet" / "Constants.java"
    write_atomic(src, scenarios.SMARTPET_CONSTANTS_JAVA)
    labels = [
        Label("D_CLEARTEXT", "news XML fetched over plain HTTP",
              f"{scenarios.NEWS_HOST} GET {', '.join(feeds)}"),
        Label("D_SECRET_CONSTANT", "in-app purchase secrets stored as plaintext constants",
              f"{src.relative_to(out_dir).as_posix()}: NOOK_ALLPACK_SERVICE_INAPP_SECRET, "
              "NOOK_PACK_SERVICE_INAPP_SECRET"),
    ]
    return rec, labels


def _fitness(seed: int):
    rec = _Recorder(scenarios.profile_for("fitness"), seed)
    t = SESSION_START
    rec.synth(t, "analytics.example.test", True, "POST", "/collect",
              body={"client_id": "c-2207", "event": "sync", "steps": 5400}, resp_body={"ok": True})
    rec.synth(t + 30, "crash.example.test", True, "GET", "/spi/v2/settings", resp_body={"ttl": 3600})
    rec.synth(t + 60, "data.flurry.example.test", True, "POST", "/aap.do",
              body={"session": 1, "event": "band_connected"}, resp_body={"ok": True})
    return rec, []


def emulate_toy_session(scenario: str, config: TestbedConfig | None, out_dir, *,
                        target: str | None = None, seed: int = 0,
                        client: httpx.Client | None = None) -> tuple[Path, Path, Path]:
    """Run one scripted session and write ``<scenario>.jsonl``, ``.pcap`` and ``.labels.json``.

    The hydration scenario talks to a running testbed at ``target`` (or via
    ``client``) whose toggles must match ``config``; the other scenarios are
    synthesized directly. The device profile is written alongside as
    ``<scenario>.profile.json``.
    """
    out_dir = Path(out_dir)
    config = config or TestbedConfig()
    profile = scenarios.profile_for(scenario)
    if scenario == "hydration":
        if target is None and client is None:
            raise ScenarioServerUnavailable("hydration scenario needs a running testbed target")
        rec, labels = _hydration(config, target, seed, client)
    elif scenario == "smartpet":
        rec, labels = _smartpet(seed, out_dir)
    else:
        rec, labels = _fitness(seed)

    jsonl = write_atomic(out_dir / f"{scenario}.jsonl", dump_transaction_log(rec.txns))
    pcap = write_atomic(out_dir / f"{scenario}.pcap", rec.pcap())
    label_path = write_atomic(out_dir / f"{scenario}.labels.json",
                              json.dumps([lb.to_dict() for lb in labels], indent=2) + "\n")
    write_atomic(out_dir / f"{scenario}.profile.json", json.dumps(profile.to_dict(), indent=2) + "\n")
    log.info("%s: %d transactions, %d labels -> %s", scenario, len(rec.txns), len(labels), out_dir)
    return jsonl, pcap, label_path
