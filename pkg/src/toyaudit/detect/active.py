"""Active probes: these send requests to a running target, serially."""

from __future__ import annotations

import logging
import random
import string
from collections import defaultdict

from toyaudit import ToyAuditError
from toyaudit.detect.model import DetectorId, Finding, Severity
from toyaudit.httpclient import RateLimiter, TargetUnreachable, make_client, send

log = logging.getLogger(__name__)

DEFAULT_ALPHABET = string.ascii_uppercase + string.digits
DEFAULT_PROBE_DELAY = 0.05


class OracleInconclusive(ToyAuditError):
    pass


class ScriptedActionError(ToyAuditError):
    pass


def probe_response_oracle(target: str, path_template: str = "/api/photo/{prefix}",
                          probe_count: int = 50, seed: int = 0, *, known_prefixes=(),
                          alphabet: str = DEFAULT_ALPHABET, prefix_len: int = 3,
                          delay: float = DEFAULT_PROBE_DELAY, client=None) -> list[Finding]:
    """Look for status codes that split truncated-token probes into two classes.

    ``probe_count`` includes the ``known_prefixes``; the remainder are random
    prefixes drawn with ``seed``.
    """
    if "{prefix}" not in path_template:
        raise ValueError("path_template needs a {prefix} placeholder")
    rng = random.Random(seed)
    prefixes = list(known_prefixes)[:probe_count]
    while len(prefixes) < probe_count:
        prefixes.append("".join(rng.choice(alphabet) for _ in range(prefix_len)))

    limiter = RateLimiter(delay)
    owns_client = client is None
    client = client or make_client(target)
    by_status: dict[int, list[str]] = defaultdict(list)
    try:
        for prefix in prefixes:
            limiter.wait()
            path = path_template.format(prefix=prefix)
            resp = send(client, "GET", path)
            by_status[resp.status_code].append(path)
    finally:
        if owns_client:
            client.close()

    if len(by_status) < 2:
        (status,) = by_status or {0: []}
        raise OracleInconclusive(f"all {len(prefixes)} probes returned {status}")
    statuses = sorted(by_status)
    counts = ", ".join(f"{s}x{len(by_status[s])}" for s in statuses)
    evidence = [f"GET {by_status[s][0]} -> {s}" for s in statuses]
    return [Finding(
        DetectorId.D_ORACLE, Severity.MEDIUM,
        f"truncated-token probes split by status ({counts})", evidence,
        [str(s) for s in statuses],
    )]


def probe_stale_resource(target: str, overwrite_action, old_url: str | None = None, *,
                         headers: dict[str, str] | None = None, client=None) -> list[Finding]:
    """Replace a resource via ``overwrite_action`` then check the old URL still serves it.

    ``overwrite_action`` is called with no arguments and returns the
    pre-overwrite URL; an explicit ``old_url`` takes precedence.
    """
    owns_client = client is None
    client = client or make_client(target)
    try:
        try:
            returned = overwrite_action()
        except TargetUnreachable:
            raise
        except Exception as exc:
            raise ScriptedActionError(f"overwrite action failed: {exc}") from exc
        url = old_url or returned
        if not url:
            raise ScriptedActionError("overwrite action returned no URL and none was given")
        resp = send(client, "GET", url, headers=headers or {})
    finally:
        if owns_client:
            client.close()
    log.debug("stale probe %s -> %s (%d bytes)", url, resp.status_code, len(resp.content))
    if resp.status_code == 200 and resp.content:
        return [Finding(
            DetectorId.D_STALE_RESOURCE, Severity.HIGH,
            f"overwritten resource still served at {url}",
            [f"GET {url} -> 200 ({len(resp.content)} bytes)"], [url],
        )]
    return []


def testbed_photo_overwrite(client, user_id: str, auth_token: str, new_photo: bytes,
                            old_url: str):
    """Overwrite action for the testbed's photo upload endpoint.

    The caller supplies the URL of the photo being replaced (the testbed
    only returns the new token).
    """

    def action() -> str:
        resp = send(client, "PUT", f"/api/photo/{user_id}", content=new_photo,
                    headers={"X-Auth-Token": auth_token, "Content-Type": "image/jpeg"})
        if resp.status_code != 200:
            raise ScriptedActionError(f"overwrite of {user_id} returned {resp.status_code}")
        return old_url

    return action
