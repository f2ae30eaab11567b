"""Traffic capture ingestion: PCAP and JSONL transaction logs, endpoint statistics."""

from pathlib import Path

from toyaudit.capture.model import DeviceProfile, HttpTransaction, Method, Party, host_matches
from toyaudit.capture.pcap import MalformedCapture, UnsupportedLinkType, parse_pcap, write_pcap
from toyaudit.capture.stats import (
    EndpointStats,
    FewerThanTwoDevices,
    ServiceOverlap,
    classify_party,
    cross_device_overlap,
    endpoint_stats,
)
from toyaudit.capture.translog import SchemaError, dump_transaction_log, parse_transaction_log


def load_capture(path) -> list[HttpTransaction]:
    """Load a capture file, picking the parser from its leading bytes."""
    data = Path(path).read_bytes()
    if data[:4] in (b"\xd4\xc3\xb2\xa1", b"\xa1\xb2\xc3\xd4", b"\x4d\x3c\xb2\xa1", b"\xa1\xb2\x3c\x4d"):
        return parse_pcap(data)
    return parse_transaction_log(data.decode("utf-8"))


__all__ = [
    "DeviceProfile", "EndpointStats", "FewerThanTwoDevices", "HttpTransaction",
    "MalformedCapture", "Method", "Party", "SchemaError", "ServiceOverlap",
    "UnsupportedLinkType", "classify_party", "cross_device_overlap", "dump_transaction_log",
    "endpoint_stats", "host_matches", "load_capture", "parse_pcap", "parse_transaction_log",
    "write_pcap",
]
