"""Active probe suite against a running testbed (loopback only by default)."""

from __future__ import annotations

import logging

from toyaudit.detect.active import (
    OracleInconclusive,
    probe_response_oracle,
    probe_stale_resource,
    testbed_photo_overwrite,
)
from toyaudit.detect.model import Finding
from toyaudit.httpclient import ensure_target_allowed, make_client, send
from toyaudit.testbed.config import TestbedConfig, fake_jpeg
from toyaudit.testbed.emulator import ScenarioServerUnavailable
from toyaudit.testbed.server import AUTH_HEADER

log = logging.getLogger(__name__)

PROBE_ACCOUNT = {"name": "Probe Account", "gender": "x", "birthday": "2010-01-01",
                 "weight_kg": 30, "height_cm": 130, "age_years": 9}


def run_testbed_probes(target: str, config: TestbedConfig, *, seed: int = 0, probe_count: int = 50,
                       delay: float = 0.0, acknowledge_target: bool = False, client=None) -> list[Finding]:
    """Oracle and stale-resource probes using a throwaway account of our own.

    The probe account uploads a photo so one prefix is known to be valid,
    then overwrites it and re-requests the old URL as the owner.
    """
    ensure_target_allowed(target, acknowledge_target)
    owns = client is None
    client = client or make_client(target)
    try:
        resp = send(client, "POST", "/api/account", json=PROBE_ACCOUNT)
        if resp.status_code != 200:
            raise ScenarioServerUnavailable(f"probe account creation returned {resp.status_code}")
        user_id, token = resp.json()["user_id"], resp.json()["auth_token"]
        auth = {AUTH_HEADER: token}
        resp = send(client, "PUT", f"/api/photo/{user_id}", content=fake_jpeg("probe-v1"),
                    headers={**auth, "Content-Type": "image/jpeg"})
        if resp.status_code != 200:
            raise ScenarioServerUnavailable(f"probe photo upload returned {resp.status_code}")
        photo_token = resp.json()["token"]
        prefix = photo_token[: config.prefix_len]
        old_url = f"/api/photo/{prefix}/{photo_token}"

        findings: list[Finding] = []
        try:
            findings += probe_response_oracle(
                target, probe_count=probe_count, seed=seed, known_prefixes=[prefix],
                alphabet=config.alphabet, prefix_len=config.prefix_len, delay=delay, client=client)
        except OracleInconclusive as exc:
            log.info("no prefix oracle: %s", exc)
        findings += probe_stale_resource(
            target, testbed_photo_overwrite(client, user_id, token, fake_jpeg("probe-v2"), old_url),
            headers=auth, client=client)
        return findings
    finally:
        if owns:
            client.close()
