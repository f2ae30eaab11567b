from __future__ import annotations

import fnmatch
from dataclasses import dataclass, field, replace
from enum import Enum


class Method(str, Enum):
    GET = "GET"
    POST = "POST"
    PUT = "PUT"
    DELETE = "DELETE"
    OTHER = "OTHER"

    @classmethod
    def parse(cls, value: str) -> "Method":
        try:
            return cls(value.upper())
        except ValueError:
            return cls.OTHER


class Party(str, Enum):
    FIRST_PARTY = "FirstParty"
    THIRD_PARTY = "ThirdParty"
    UNKNOWN = "Unknown"


@dataclass
class HttpTransaction:
    """One request/response pair as seen on the wire.

    For ``tls=True`` the bodies and headers are the decrypted view when the
    producer had one (emulator logs); PCAP-derived TLS transactions are
    opaque and carry only endpoints, host and byte counts.
    """

    ts_start: float
    ts_end: float
    src_ip: str
    src_port: int
    dst_ip: str
    dst_port: int
    host: str
    tls: bool
    method: Method
    path: str
    req_headers: dict[str, str] = field(default_factory=dict)
    status: int = 0
    resp_headers: dict[str, str] = field(default_factory=dict)
    req_body: bytes = b""
    resp_body: bytes = b""
    req_bytes: int = 0
    resp_bytes: int = 0

    def __post_init__(self):
        self.method = Method.parse(self.method) if isinstance(self.method, str) else self.method
        if self.ts_end < self.ts_start:
            raise ValueError(f"ts_end {self.ts_end} precedes ts_start {self.ts_start}")
        if self.req_bytes < len(self.req_body) or self.resp_bytes < len(self.resp_body):
            raise ValueError("byte counts smaller than body lengths")

    @property
    def total_bytes(self) -> int:
        return self.req_bytes + self.resp_bytes

    def header(self, name: str, *, response: bool = False) -> str | None:
        """Case-insensitive header lookup."""
        headers = self.resp_headers if response else self.req_headers
        lname = name.lower()
        for key, value in headers.items():
            if key.lower() == lname:
                return value
        return None

    def opaque(self) -> "HttpTransaction":
        """The view a passive observer gets of a TLS session: no HTTP semantics."""
        return replace(
            self, method=Method.OTHER, path="", req_headers={}, status=0, resp_headers={},
            req_body=b"", resp_body=b"",
        )

    @property
    def content_type(self) -> str:
        value = self.header("content-type", response=True) or ""
        return value.split(";", 1)[0].strip().lower()


def host_matches(host: str, pattern: str) -> bool:
    """Exact match, or ``*.suffix`` matching any strict subdomain of suffix."""
    host = host.lower().rstrip(".")
    pattern = pattern.lower().rstrip(".")
    if pattern.startswith("*."):
        return host.endswith(pattern[1:])
    if "*" in pattern or "?" in pattern:
        return fnmatch.fnmatchcase(host, pattern)
    return host == pattern


@dataclass
class DeviceProfile:
    device_name: str
    first_party_hosts: set[str] = field(default_factory=set)
    # host pattern -> service label (e.g. "google-analytics")
    third_party_hosts: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.first_party_hosts = {p.lower() for p in self.first_party_hosts}
        self.third_party_hosts = {p.lower(): label for p, label in self.third_party_hosts.items()}
        overlap = self.first_party_hosts & set(self.third_party_hosts)
        if overlap:
            raise ValueError(f"patterns listed as both first and third party: {sorted(overlap)}")

    def service_for(self, host: str) -> str | None:
        for pattern in sorted(self.third_party_hosts):
            if host_matches(host, pattern):
                return self.third_party_hosts[pattern]
        return None

    def to_dict(self) -> dict:
        return {
            "device_name": self.device_name,
            "first_party_hosts": sorted(self.first_party_hosts),
            "third_party_hosts": dict(sorted(self.third_party_hosts.items())),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DeviceProfile":
        return cls(
            device_name=data["device_name"],
            first_party_hosts=set(data.get("first_party_hosts", [])),
            third_party_hosts=dict(data.get("third_party_hosts", {})),
        )
