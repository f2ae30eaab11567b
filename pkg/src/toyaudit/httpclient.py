"""Shared plumbing for tools that send requests to a live target."""

from __future__ import annotations

import ipaddress
import socket
import threading
import time
from urllib.parse import urlsplit

import httpx

from toyaudit import ToyAuditError


class TargetUnreachable(ToyAuditError):
    pass


class TargetNotAllowed(ToyAuditError):
    pass


class RateLimiter:
    """Enforces a minimum spacing between requests across all threads."""

    def __init__(self, min_interval: float):
        self.min_interval = max(0.0, min_interval)
        self._lock = threading.Lock()
        self._next = 0.0

    def wait(self):
        if self.min_interval <= 0:
            return
        with self._lock:
            now = time.monotonic()
            slot = max(now, self._next)
            self._next = slot + self.min_interval
        if slot > now:
            time.sleep(slot - now)


def is_loopback_target(url: str) -> bool:
    host = urlsplit(url).hostname or ""
    if host == "localhost":
        return True
    try:
        return ipaddress.ip_address(host).is_loopback
    except ValueError:
        pass
    try:
        infos = socket.getaddrinfo(host, None)
    except OSError:
        return False
    return bool(infos) and all(ipaddress.ip_address(i[4][0]).is_loopback for i in infos)


def ensure_target_allowed(url: str, acknowledged: bool):
    if not acknowledged and not is_loopback_target(url):
        raise TargetNotAllowed(
            f"refusing to probe non-loopback target {url}; pass the ownership acknowledgment "
            "flag (--i-own-this-target) only for systems you are authorized to test"
        )


def make_client(base_url: str, timeout: float = 10.0) -> httpx.Client:
    return httpx.Client(base_url=base_url, timeout=timeout, follow_redirects=False)


def send(client: httpx.Client, method: str, url: str, **kwargs) -> httpx.Response:
    try:
        return client.request(method, url, **kwargs)
    except (httpx.ConnectError, httpx.ConnectTimeout) as exc:
        raise TargetUnreachable(f"{client.base_url}: {exc}") from exc
