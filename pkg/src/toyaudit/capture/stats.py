from __future__ import annotations

from collections import defaultdict
from dataclasses import asdict, dataclass

from toyaudit import ToyAuditError
from toyaudit.capture.model import DeviceProfile, HttpTransaction, Party, host_matches


class FewerThanTwoDevices(ToyAuditError):
    pass


@dataclass
class EndpointStats:
    host: str
    party: Party
    total_bytes: int
    byte_fraction: float
    transaction_count: int
    all_tls: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        d["party"] = self.party.value
        return d


def classify_party(host: str, profile: DeviceProfile) -> Party:
    if any(host_matches(host, p) for p in profile.first_party_hosts):
        return Party.FIRST_PARTY
    if any(host_matches(host, p) for p in profile.third_party_hosts):
        return Party.THIRD_PARTY
    return Party.UNKNOWN


def endpoint_stats(txns: list[HttpTransaction], profile: DeviceProfile) -> list[EndpointStats]:
    """Per-host byte totals and shares, largest talker first."""
    totals: dict[str, int] = defaultdict(int)
    counts: dict[str, int] = defaultdict(int)
    tls: dict[str, bool] = {}
    for t in txns:
        totals[t.host] += t.total_bytes
        counts[t.host] += 1
        tls[t.host] = tls.get(t.host, True) and t.tls
    grand = sum(totals.values())
    out = [
        EndpointStats(
            host=host,
            party=classify_party(host, profile),
            total_bytes=total,
            byte_fraction=total / grand if grand else 0.0,
            transaction_count=counts[host],
            all_tls=tls[host],
        )
        for host, total in totals.items()
    ]
    # host name breaks ties so the result does not depend on input order
    out.sort(key=lambda s: (-s.total_bytes, s.host))
    return out


@dataclass
class ServiceOverlap:
    service: str
    devices: list[str]
    hosts: list[str]

    @property
    def device_count(self) -> int:
        return len(self.devices)

    def to_dict(self) -> dict:
        return {"service": self.service, "device_count": self.device_count,
                "devices": self.devices, "hosts": self.hosts}


def cross_device_overlap(captures, profiles: list[DeviceProfile]) -> list[ServiceOverlap]:
    """Which devices contacted each third-party service.

    ``captures`` is a list of ``(device_name, transactions)``; each device is
    classified with the profile of the same name.
    """
    if len({name for name, _ in captures}) < 2:
        raise FewerThanTwoDevices(f"need at least two devices, got {len(captures)}")
    by_name = {p.device_name: p for p in profiles}
    devices: dict[str, set[str]] = defaultdict(set)
    hosts: dict[str, set[str]] = defaultdict(set)
    for name, txns in captures:
        profile = by_name.get(name)
        if profile is None:
            raise KeyError(f"no profile for device {name!r}")
        for host in {t.host for t in txns}:
            if classify_party(host, profile) is not Party.THIRD_PARTY:
                continue
            service = profile.service_for(host)
            devices[service].add(name)
            hosts[service].add(host)
    report = [ServiceOverlap(s, sorted(devices[s]), sorted(hosts[s])) for s in devices]
    report.sort(key=lambda r: (-r.device_count, r.service))
    return report
