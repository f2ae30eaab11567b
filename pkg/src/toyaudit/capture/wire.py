"""HTTP/1.1 message framing and a minimal TLS ClientHello (SNI only)."""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field
from http import HTTPStatus

CRLF = b"\r\n"


@dataclass
class HttpMessage:
    start: int  # offset of first byte in the stream
    end: int  # offset one past the last byte
    start_line: str
    headers: dict[str, str] = field(default_factory=dict)
    body: bytes = b""

    @property
    def wire_len(self) -> int:
        return self.end - self.start

    def header(self, name: str) -> str | None:
        lname = name.lower()
        for key, value in self.headers.items():
            if key.lower() == lname:
                return value
        return None


def render_request(method: str, path: str, headers: dict[str, str], body: bytes) -> bytes:
    head = f"{method} {path or '/'} HTTP/1.1\r\n"
    head += "".join(f"{k}: {v}\r\n" for k, v in headers.items())
    return head.encode("latin-1") + CRLF + body


def render_response(status: int, headers: dict[str, str], body: bytes) -> bytes:
    try:
        reason = HTTPStatus(status).phrase
    except ValueError:
        reason = "Unknown"
    head = f"HTTP/1.1 {status} {reason}\r\n"
    head += "".join(f"{k}: {v}\r\n" for k, v in headers.items())
    return head.encode("latin-1") + CRLF + body


class IncompleteMessage(Exception):
    pass


def _parse_head(data: bytes, pos: int) -> tuple[str, dict[str, str], int]:
    end = data.find(CRLF + CRLF, pos)
    if end < 0:
        raise IncompleteMessage("header block not terminated")
    lines = data[pos:end].decode("latin-1").split("\r\n")
    headers: dict[str, str] = {}
    for line in lines[1:]:
        name, sep, value = line.partition(":")
        if not sep:
            raise ValueError(f"malformed header line {line!r}")
        name, value = name.strip(), value.strip()
        headers[name] = f"{headers[name]}, {value}" if name in headers else value
    return lines[0], headers, end + 4


def _read_chunked(data: bytes, pos: int) -> tuple[bytes, int]:
    body = bytearray()
    while True:
        eol = data.find(CRLF, pos)
        if eol < 0:
            raise IncompleteMessage("chunk size line")
        size = int(data[pos:eol].split(b";", 1)[0].strip() or b"0", 16)
        pos = eol + 2
        if size == 0:
            # skip optional trailers
            end = data.find(CRLF, pos)
            while end > pos:
                pos = end + 2
                end = data.find(CRLF, pos)
            if end < 0:
                raise IncompleteMessage("chunked trailer")
            return bytes(body), end + 2
        if len(data) < pos + size + 2:
            raise IncompleteMessage("chunk body")
        body += data[pos:pos + size]
        pos += size + 2


def _read_body(data: bytes, pos: int, headers: dict[str, str], until_close: bool) -> tuple[bytes, int]:
    lower = {k.lower(): v for k, v in headers.items()}
    if "chunked" in lower.get("transfer-encoding", "").lower():
        return _read_chunked(data, pos)
    if "content-length" in lower:
        length = int(lower["content-length"])
        if len(data) < pos + length:
            raise IncompleteMessage("body shorter than Content-Length")
        return data[pos:pos + length], pos + length
    if until_close:
        return data[pos:], len(data)
    return b"", pos


def parse_requests(data: bytes) -> tuple[list[HttpMessage], int]:
    """Split a client byte stream into requests.

    Returns the complete requests and the number of trailing bytes that did
    not form a complete message.
    """
    out = []
    pos = 0
    while pos < len(data):
        try:
            line, headers, body_pos = _parse_head(data, pos)
            body, end = _read_body(data, body_pos, headers, until_close=False)
        except (IncompleteMessage, ValueError):
            break
        out.append(HttpMessage(pos, end, line, headers, body))
        pos = end
    return out, len(data) - pos


def parse_responses(data: bytes, request_methods: list[str]) -> tuple[list[HttpMessage], int]:
    out = []
    pos = 0
    while pos < len(data):
        try:
            line, headers, body_pos = _parse_head(data, pos)
            parts = line.split(" ", 2)
            status = int(parts[1])
            method = request_methods[len(out)] if len(out) < len(request_methods) else "GET"
            if method == "HEAD" or status in (204, 304) or 100 <= status < 200:
                body, end = b"", body_pos
            else:
                body, end = _read_body(data, body_pos, headers, until_close=True)
        except (IncompleteMessage, ValueError, IndexError):
            break
        if 100 <= status < 200:
            # interim response, not paired with a request
            pos = end
            continue
        out.append(HttpMessage(pos, end, line, headers, body))
        pos = end
    return out, len(data) - pos


def build_client_hello(server_name: str, client_random: bytes | None = None) -> bytes:
    """A syntactically valid TLS 1.2 ClientHello record carrying only SNI."""
    client_random = client_random or os.urandom(32)
    name = server_name.encode("ascii")
    sni_list = struct.pack("!BH", 0, len(name)) + name
    sni_ext = struct.pack("!HH", 0, len(sni_list) + 2) + struct.pack("!H", len(sni_list)) + sni_list
    extensions = struct.pack("!H", len(sni_ext)) + sni_ext
    body = (
        b"\x03\x03" + client_random[:32].ljust(32, b"\x00") + b"\x00"  # version, random, empty session id
        + struct.pack("!H", 2) + b"\x13\x01"  # one cipher suite
        + b"\x01\x00"  # null compression
        + extensions
    )
    handshake = b"\x01" + len(body).to_bytes(3, "big") + body
    return b"\x16\x03\x01" + struct.pack("!H", len(handshake)) + handshake


def tls_record(content_type: int, payload: bytes) -> bytes:
    return struct.pack("!BBBH", content_type, 3, 3, len(payload)) + payload


def looks_like_tls(data: bytes) -> bool:
    return len(data) >= 3 and data[0] in (0x16, 0x17) and data[1] == 0x03


def extract_sni(data: bytes) -> str | None:
    """Server name from a ClientHello at the start of ``data``, if any."""
    try:
        if data[0] != 0x16 or data[5] != 0x01:
            return None
        pos = 5 + 4 + 2 + 32  # record hdr, handshake hdr, version, random
        pos += 1 + data[pos]
        (suites_len,) = struct.unpack_from("!H", data, pos)
        pos += 2 + suites_len
        pos += 1 + data[pos]
        (ext_total,) = struct.unpack_from("!H", data, pos)
        pos += 2
        end = pos + ext_total
        while pos + 4 <= end:
            ext_type, ext_len = struct.unpack_from("!HH", data, pos)
            pos += 4
            if ext_type == 0:
                list_pos = pos + 2
                name_type, name_len = struct.unpack_from("!BH", data, list_pos)
                if name_type == 0:
                    return data[list_pos + 3:list_pos + 3 + name_len].decode("ascii")
            pos += ext_len
    except (IndexError, struct.error, UnicodeDecodeError):
        return None
    return None
