"""Classic libpcap reader/writer for Ethernet/IPv4/TCP with HTTP/1.1 reassembly."""

from __future__ import annotations

import bisect
import ipaddress
import logging
import os
import struct
from collections import Counter
from dataclasses import dataclass, field

from toyaudit import ToyAuditError
from toyaudit.capture import wire
from toyaudit.capture.model import HttpTransaction, Method

log = logging.getLogger(__name__)

LINKTYPE_ETHERNET = 1
_MAGIC = {
    0xA1B2C3D4: ("<", 1e-6),
    0xA1B23C4D: ("<", 1e-9),
}
_MAGIC_SWAPPED = {
    0xD4C3B2A1: (">", 1e-6),
    0x4D3CB2A1: (">", 1e-9),
}

TCP_FIN, TCP_SYN, TCP_RST, TCP_PSH, TCP_ACK = 0x01, 0x02, 0x04, 0x08, 0x10
MSS = 1460


class MalformedCapture(ToyAuditError):
    pass


class UnsupportedLinkType(ToyAuditError):
    def __init__(self, linktype: int):
        super().__init__(f"unsupported link type {linktype} (only Ethernet is handled)")
        self.linktype = linktype


@dataclass
class _Direction:
    next_seq: int | None = None
    data: bytearray = field(default_factory=bytearray)
    # (stream offset, timestamp) of each accepted segment
    offsets: list[int] = field(default_factory=list)
    stamps: list[float] = field(default_factory=list)

    def ts_at(self, offset: int) -> float:
        idx = bisect.bisect_right(self.offsets, offset) - 1
        return self.stamps[max(idx, 0)]


@dataclass
class _Connection:
    client: tuple[str, int]
    server: tuple[str, int]
    first_ts: float
    up: _Direction = field(default_factory=_Direction)
    down: _Direction = field(default_factory=_Direction)
    broken: bool = False


def _read_records(data: bytes):
    if len(data) < 24:
        raise MalformedCapture("truncated global header")
    (magic,) = struct.unpack_from("<I", data, 0)
    if magic in _MAGIC:
        endian, resolution = _MAGIC[magic]
    elif magic in _MAGIC_SWAPPED:
        endian, resolution = _MAGIC_SWAPPED[magic]
    else:
        raise MalformedCapture(f"bad magic 0x{magic:08x}")
    _, _, _, _, _, linktype = struct.unpack_from(endian + "HHiIII", data, 4)
    if linktype != LINKTYPE_ETHERNET:
        raise UnsupportedLinkType(linktype)
    pos = 24
    while pos < len(data):
        if pos + 16 > len(data):
            raise MalformedCapture(f"truncated record header at offset {pos}")
        ts_sec, ts_frac, incl_len, _orig = struct.unpack_from(endian + "IIII", data, pos)
        pos += 16
        if pos + incl_len > len(data):
            raise MalformedCapture(f"truncated packet data at offset {pos}")
        yield ts_sec + ts_frac * resolution, data[pos:pos + incl_len]
        pos += incl_len


def _decode_tcp(frame: bytes):
    """Return (src, sport, dst, dport, seq, flags, payload) or None for non-IPv4/TCP."""
    if len(frame) < 14:
        return None
    (ethertype,) = struct.unpack_from("!H", frame, 12)
    offset = 14
    if ethertype == 0x8100 and len(frame) >= 18:
        (ethertype,) = struct.unpack_from("!H", frame, 16)
        offset = 18
    if ethertype != 0x0800:
        return None
    ip = frame[offset:]
    if len(ip) < 20 or ip[0] >> 4 != 4:
        return None
    ihl = (ip[0] & 0x0F) * 4
    (total_len,) = struct.unpack_from("!H", ip, 2)
    if ip[9] != 6:
        return None
    src = str(ipaddress.IPv4Address(ip[12:16]))
    dst = str(ipaddress.IPv4Address(ip[16:20]))
    tcp = ip[ihl:total_len]
    if len(tcp) < 20:
        return None
    sport, dport, seq, _ack, off_flags = struct.unpack_from("!HHIIH", tcp, 0)
    data_off = (off_flags >> 12) * 4
    flags = off_flags & 0x3F
    return src, sport, dst, dport, seq, flags, bytes(tcp[data_off:])


def _strip_port(host: str) -> str:
    name, sep, port = host.rpartition(":")
    if sep and port.isdigit() and "]" not in port:
        return name
    return host


def _transactions_for(conn: _Connection) -> tuple[list[HttpTransaction], Counter]:
    warnings: Counter = Counter()
    up, down = conn.up, conn.down
    src_ip, src_port = conn.client
    dst_ip, dst_port = conn.server
    if not up.data:
        return [], warnings
    if wire.looks_like_tls(bytes(up.data[:3])):
        host = wire.extract_sni(bytes(up.data)) or dst_ip
        last = max(up.stamps[-1], down.stamps[-1] if down.stamps else up.stamps[-1])
        return [
            HttpTransaction(
                ts_start=up.stamps[0], ts_end=last, src_ip=src_ip, src_port=src_port,
                dst_ip=dst_ip, dst_port=dst_port, host=host, tls=True, method=Method.OTHER,
                path="", req_bytes=len(up.data), resp_bytes=len(down.data),
            )
        ], warnings

    requests, leftover = wire.parse_requests(bytes(up.data))
    if leftover:
        warnings["incomplete_request"] += 1
    responses, leftover = wire.parse_responses(
        bytes(down.data), [r.start_line.split(" ", 1)[0] for r in requests]
    )
    if leftover:
        warnings["incomplete_response"] += 1
    if len(responses) > len(requests):
        warnings["unpaired_response"] += len(responses) - len(requests)

    out = []
    for i, req in enumerate(requests):
        parts = req.start_line.split(" ")
        method = parts[0] if parts else ""
        path = parts[1] if len(parts) > 1 else ""
        host = req.header("host")
        host = _strip_port(host) if host else dst_ip
        resp = responses[i] if i < len(responses) else None
        ts_start = up.ts_at(req.start)
        if resp is not None:
            ts_end = max(ts_start, down.ts_at(resp.end - 1))
            status = int(resp.start_line.split(" ", 2)[1])
        else:
            ts_end = max(ts_start, up.ts_at(req.end - 1))
            status = 0
        out.append(
            HttpTransaction(
                ts_start=ts_start, ts_end=ts_end, src_ip=src_ip, src_port=src_port,
                dst_ip=dst_ip, dst_port=dst_port, host=host, tls=False,
                method=Method.parse(method), path=path, req_headers=req.headers,
                status=status, resp_headers=resp.headers if resp else {},
                req_body=req.body, resp_body=resp.body if resp else b"",
                req_bytes=req.wire_len, resp_bytes=resp.wire_len if resp else 0,
            )
        )
    return out, warnings


def parse_pcap(capture_bytes: bytes, warnings: Counter | None = None) -> list[HttpTransaction]:
    """Reassemble HTTP transactions from a classic pcap file.

    Only in-order, non-overlapping TCP segments are accepted; a stream that
    violates this is skipped and counted under ``out_of_order_stream`` in
    ``warnings`` (and logged).
    """
    if warnings is None:
        warnings = Counter()
    conns: dict[tuple, _Connection] = {}
    finished: list[_Connection] = []

    for ts, frame in _read_records(capture_bytes):
        decoded = _decode_tcp(frame)
        if decoded is None:
            warnings["non_tcp_frame"] += 1
            continue
        src, sport, dst, dport, seq, flags, payload = decoded
        key = frozenset({(src, sport), (dst, dport)})
        conn = conns.get(key)
        if flags & TCP_SYN and not flags & TCP_ACK:
            if conn is not None:
                finished.append(conn)
            conn = conns[key] = _Connection(client=(src, sport), server=(dst, dport), first_ts=ts)
        elif conn is None:
            # mid-stream capture: first sender of data is taken as the client
            if not payload:
                continue
            conn = conns[key] = _Connection(client=(src, sport), server=(dst, dport), first_ts=ts)
        if conn.broken:
            continue
        direction = conn.up if (src, sport) == conn.client else conn.down
        if flags & TCP_SYN:
            direction.next_seq = (seq + 1) & 0xFFFFFFFF
            continue
        if not payload:
            continue
        if direction.next_seq is None:
            direction.next_seq = seq
        if seq != direction.next_seq:
            conn.broken = True
            continue
        direction.offsets.append(len(direction.data))
        direction.stamps.append(ts)
        direction.data += payload
        direction.next_seq = (seq + len(payload)) & 0xFFFFFFFF

    finished.extend(conns.values())
    txns = []
    for conn in finished:
        if conn.broken:
            warnings["out_of_order_stream"] += 1
            continue
        found, conn_warnings = _transactions_for(conn)
        warnings.update(conn_warnings)
        txns.extend(found)
    if warnings:
        log.warning("pcap parse warnings: %s", dict(sorted(warnings.items())))
    txns.sort(key=lambda t: t.ts_start)
    return txns


# -- writer -----------------------------------------------------------------

def _checksum(data: bytes) -> int:
    if len(data) % 2:
        data += b"\x00"
    total = sum(struct.unpack(f"!{len(data) // 2}H", data))
    while total >> 16:
        total = (total & 0xFFFF) + (total >> 16)
    return ~total & 0xFFFF


def _frame(src: str, sport: int, dst: str, dport: int, seq: int, ack: int, flags: int,
           payload: bytes = b"") -> bytes:
    src_b = ipaddress.IPv4Address(src).packed
    dst_b = ipaddress.IPv4Address(dst).packed
    tcp = struct.pack("!HHIIHHHH", sport, dport, seq & 0xFFFFFFFF, ack & 0xFFFFFFFF,
                      (5 << 12) | flags, 65535, 0, 0)
    pseudo = src_b + dst_b + struct.pack("!BBH", 0, 6, len(tcp) + len(payload))
    csum = _checksum(pseudo + tcp + payload)
    tcp = tcp[:16] + struct.pack("!H", csum) + tcp[18:]
    total_len = 20 + len(tcp) + len(payload)
    ip = struct.pack("!BBHHHBBH4s4s", 0x45, 0, total_len, 0, 0x4000, 64, 6, 0, src_b, dst_b)
    ip = ip[:10] + struct.pack("!H", _checksum(ip)) + ip[12:]
    eth = b"\x02\x00\x00\x00\x00\x02" + b"\x02\x00\x00\x00\x00\x01" + b"\x08\x00"
    return eth + ip + tcp + payload


class PcapWriter:
    """Writes synthetic TCP sessions; one call to ``add_session`` per connection."""

    def __init__(self):
        self._packets: list[tuple[float, bytes]] = []

    def _emit(self, ts: float, frame: bytes):
        self._packets.append((ts, frame))

    def add_session(self, client: tuple[str, int], server: tuple[str, int],
                    exchanges: list[tuple[float, bytes, float, bytes]], *, close: bool = True):
        """Emit handshake, the (ts_req, req_bytes, ts_resp, resp_bytes) exchanges, then FIN."""
        (cip, cport), (sip, sport) = client, server
        cseq, sseq = 1000, 5000
        t0 = exchanges[0][0] if exchanges else 0.0
        self._emit(t0, _frame(cip, cport, sip, sport, cseq, 0, TCP_SYN))
        self._emit(t0, _frame(sip, sport, cip, cport, sseq, cseq + 1, TCP_SYN | TCP_ACK))
        cseq += 1
        sseq += 1
        self._emit(t0, _frame(cip, cport, sip, sport, cseq, sseq, TCP_ACK))
        last = t0
        for ts_req, req, ts_resp, resp in exchanges:
            for i in range(0, len(req), MSS):
                chunk = req[i:i + MSS]
                self._emit(ts_req, _frame(cip, cport, sip, sport, cseq, sseq, TCP_ACK | TCP_PSH, chunk))
                cseq += len(chunk)
            for i in range(0, len(resp), MSS):
                chunk = resp[i:i + MSS]
                self._emit(ts_resp, _frame(sip, sport, cip, cport, sseq, cseq, TCP_ACK | TCP_PSH, chunk))
                sseq += len(chunk)
            last = max(last, ts_resp)
        if close:
            self._emit(last, _frame(cip, cport, sip, sport, cseq, sseq, TCP_FIN | TCP_ACK))
            self._emit(last, _frame(sip, sport, cip, cport, sseq, cseq + 1, TCP_FIN | TCP_ACK))

    def getvalue(self) -> bytes:
        out = bytearray(struct.pack("<IHHiIII", 0xA1B2C3D4, 2, 4, 0, 0, 65535, LINKTYPE_ETHERNET))
        # stable sort keeps per-session packet order for equal timestamps
        for ts, frame in sorted(self._packets, key=lambda p: p[0]):
            sec = int(ts)
            usec = int(round((ts - sec) * 1e6))
            if usec >= 1_000_000:
                sec, usec = sec + 1, usec - 1_000_000
            out += struct.pack("<IIII", sec, usec, len(frame), len(frame)) + frame
        return bytes(out)


def transaction_wire_bytes(txn: HttpTransaction) -> tuple[bytes, bytes]:
    """Client and server byte streams that a cleartext transaction occupies on the wire."""
    req = wire.render_request(txn.method.value, txn.path, txn.req_headers, txn.req_body)
    resp = wire.render_response(txn.status, txn.resp_headers, txn.resp_body) if txn.status else b""
    return req, resp


def tls_wire_bytes(host: str, req_plain: bytes, resp_plain: bytes, randbytes=os.urandom) -> tuple[bytes, bytes]:
    """Opaque TLS byte streams whose sizes track the plaintext sizes.

    ``randbytes`` supplies the filler standing in for ciphertext; pass a
    seeded source for reproducible captures.
    """
    client = wire.build_client_hello(host, randbytes(32))
    client += wire.tls_record(0x17, randbytes(len(req_plain) + 22))
    server = wire.tls_record(0x16, randbytes(90)) + wire.tls_record(0x17, randbytes(len(resp_plain) + 22))
    return client, server


def write_pcap(txns: list[HttpTransaction], wire_streams: list[tuple[bytes, bytes]] | None = None) -> bytes:
    """Serialize transactions as one TCP connection each.

    Cleartext transactions are rendered from their fields; TLS ones must be
    supplied via ``wire_streams`` (aligned with ``txns``), otherwise opaque
    streams of size ``req_bytes``/``resp_bytes`` are synthesized.
    """
    writer = PcapWriter()
    for i, txn in enumerate(txns):
        if wire_streams is not None:
            up, down = wire_streams[i]
        elif txn.tls:
            up = wire.build_client_hello(txn.host)
            up += b"\x17\x03\x03" + b"\x00" * max(0, txn.req_bytes - len(up) - 3)
            down = b"\x17\x03\x03" + b"\x00" * max(0, txn.resp_bytes - 3)
        else:
            up, down = transaction_wire_bytes(txn)
        writer.add_session(
            (txn.src_ip, txn.src_port), (txn.dst_ip, txn.dst_port),
            [(txn.ts_start, up, txn.ts_end, down)],
        )
    return writer.getvalue()
