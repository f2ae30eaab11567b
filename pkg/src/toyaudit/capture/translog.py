"""JSONL transaction log: one JSON object per line, bodies base64-encoded."""

from __future__ import annotations

import base64
import binascii
import json

from toyaudit import ToyAuditError
from toyaudit.capture.model import HttpTransaction, Method

FIELDS = (
    "ts_start", "ts_end", "src_ip", "src_port", "dst_ip", "dst_port", "host", "tls",
    "method", "path", "req_headers", "status", "resp_headers", "req_body_b64",
    "resp_body_b64", "req_bytes", "resp_bytes",
)

_TYPES = {
    "ts_start": (int, float), "ts_end": (int, float), "src_ip": str, "src_port": int,
    "dst_ip": str, "dst_port": int, "host": str, "tls": bool, "method": str, "path": str,
    "req_headers": dict, "status": int, "resp_headers": dict, "req_body_b64": str,
    "resp_body_b64": str, "req_bytes": int, "resp_bytes": int,
}


class SchemaError(ToyAuditError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def transaction_to_record(txn: HttpTransaction) -> dict:
    return {
        "ts_start": txn.ts_start,
        "ts_end": txn.ts_end,
        "src_ip": txn.src_ip,
        "src_port": txn.src_port,
        "dst_ip": txn.dst_ip,
        "dst_port": txn.dst_port,
        "host": txn.host,
        "tls": txn.tls,
        "method": txn.method.value,
        "path": txn.path,
        "req_headers": dict(txn.req_headers),
        "status": txn.status,
        "resp_headers": dict(txn.resp_headers),
        "req_body_b64": base64.b64encode(txn.req_body).decode("ascii"),
        "resp_body_b64": base64.b64encode(txn.resp_body).decode("ascii"),
        "req_bytes": txn.req_bytes,
        "resp_bytes": txn.resp_bytes,
    }


def record_to_transaction(obj, line: int = 1) -> HttpTransaction:
    if not isinstance(obj, dict):
        raise SchemaError(line, "expected a JSON object")
    for name in FIELDS:
        if name not in obj:
            raise SchemaError(line, f"missing field {name!r}")
        value = obj[name]
        expected = _TYPES[name]
        # bool is an int subclass; keep the two apart
        if (expected is not bool and isinstance(value, bool)) or not isinstance(value, expected):
            raise SchemaError(line, f"field {name!r} has wrong type {type(value).__name__}")
    extra = set(obj) - set(FIELDS)
    if extra:
        raise SchemaError(line, f"unknown fields {sorted(extra)}")
    for name in ("req_headers", "resp_headers"):
        if not all(isinstance(k, str) and isinstance(v, str) for k, v in obj[name].items()):
            raise SchemaError(line, f"{name} must map strings to strings")
    try:
        req_body = base64.b64decode(obj["req_body_b64"], validate=True)
        resp_body = base64.b64decode(obj["resp_body_b64"], validate=True)
    except binascii.Error as exc:
        raise SchemaError(line, f"bad base64 body: {exc}") from None
    if obj["method"] not in Method._value2member_map_:
        raise SchemaError(line, f"unknown method {obj['method']!r}")
    try:
        return HttpTransaction(
            ts_start=float(obj["ts_start"]),
            ts_end=float(obj["ts_end"]),
            src_ip=obj["src_ip"],
            src_port=obj["src_port"],
            dst_ip=obj["dst_ip"],
            dst_port=obj["dst_port"],
            host=obj["host"],
            tls=obj["tls"],
            method=Method(obj["method"]),
            path=obj["path"],
            req_headers=dict(obj["req_headers"]),
            status=obj["status"],
            resp_headers=dict(obj["resp_headers"]),
            req_body=req_body,
            resp_body=resp_body,
            req_bytes=obj["req_bytes"],
            resp_bytes=obj["resp_bytes"],
        )
    except ValueError as exc:
        raise SchemaError(line, str(exc)) from None


def parse_transaction_log(jsonl_text: str) -> list[HttpTransaction]:
    """Parse a JSONL log; blank lines are ignored, line numbers are 1-based."""
    txns = []
    for lineno, line in enumerate(jsonl_text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(lineno, f"invalid JSON: {exc.msg}") from None
        txns.append(record_to_transaction(obj, lineno))
    return txns


def dump_transaction_log(txns) -> str:
    return "".join(json.dumps(transaction_to_record(t), separators=(",", ":")) + "\n" for t in txns)
