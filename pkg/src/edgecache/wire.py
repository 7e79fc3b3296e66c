"""Framed binary protocol spoken on the client-edge and edge-cloud links.

Every message is one frame:

    magic      4 bytes  ``CIC1``
    msg_type   1 byte   1 = task request, 2 = task response
    request_id 8 bytes  big-endian unsigned
    body_len   4 bytes  big-endian unsigned, capped at 64 MiB
    body       body_len bytes

Request body: task_kind (1 byte), user_id (4 bytes BE), then the
descriptor -- for recognition a 2-byte BE dimension followed by that
many IEEE-754 binary32 values in big-endian order, for model/panorama
the 32 hash bytes. Response body: served_from (1 byte), result_len
(4 bytes BE), result bytes.

The decoder is incremental and never throws on short input -- it just
waits for more bytes. Malformed input raises ``ProtocolError`` with a
distinguishing ``kind``; after an error a stream decoder is dead, which
matches how a connection handler treats a corrupt peer.
"""

import struct
from dataclasses import dataclass
from enum import Enum

from .descriptors import ContentHash, Descriptor, FeatureVector, TaskKind
from .errors import EdgeCacheError, InvalidParameter
from .sim import ServedFrom

MAGIC = b"CIC1"
HEADER_LEN = 17
MAX_BODY_BYTES = 64 * 1024 * 1024
MSG_REQUEST = 1
MSG_RESPONSE = 2

DEFAULT_EDGE_PORT = 7401
DEFAULT_CLOUD_PORT = 7402


class ProtocolErrorKind(Enum):
    BAD_MAGIC = "bad_magic"
    UNKNOWN_TYPE = "unknown_type"
    OVERSIZE_BODY = "oversize_body"
    TRUNCATED = "truncated"
    BAD_BODY = "bad_body"


class ProtocolError(EdgeCacheError):
    def __init__(self, kind: ProtocolErrorKind, message: str):
        super().__init__(f"{kind.value}: {message}")
        self.kind = kind


@dataclass(frozen=True)
class RequestMessage:
    request_id: int
    user_id: int
    kind: TaskKind
    descriptor: Descriptor


@dataclass(frozen=True)
class ResponseMessage:
    request_id: int
    served_from: ServedFrom
    result: bytes


def encode_descriptor(descriptor: Descriptor) -> bytes:
    if descriptor.kind.uses_vector_key:
        vec = descriptor.key
        if vec.dim > 0xFFFF:
            raise InvalidParameter("vector dim does not fit in 16 bits")
        return struct.pack(">H", vec.dim) + struct.pack(f">{vec.dim}f", *vec.values)
    return descriptor.key.digest


def _frame(msg_type: int, request_id: int, body: bytes) -> bytes:
    if not 0 <= request_id < 1 << 64:
        raise InvalidParameter("request_id must fit in 64 bits")
    if len(body) > MAX_BODY_BYTES:
        raise InvalidParameter("frame body exceeds the 64 MiB cap")
    return MAGIC + struct.pack(">BQI", msg_type, request_id, len(body)) + body


def encode_request(msg: RequestMessage) -> bytes:
    if not 0 <= msg.user_id < 1 << 32:
        raise InvalidParameter("user_id must fit in 32 bits")
    body = struct.pack(">BI", msg.kind.value, msg.user_id) + encode_descriptor(msg.descriptor)
    return _frame(MSG_REQUEST, msg.request_id, body)


def encode_response(msg: ResponseMessage) -> bytes:
    body = struct.pack(">BI", msg.served_from.value, len(msg.result)) + msg.result
    return _frame(MSG_RESPONSE, msg.request_id, body)


def _parse_request_body(request_id: int, body: bytes) -> RequestMessage:
    if len(body) < 5:
        raise ProtocolError(ProtocolErrorKind.BAD_BODY, "request body shorter than 5 bytes")
    kind_code, user_id = struct.unpack(">BI", body[:5])
    try:
        kind = TaskKind(kind_code)
    except ValueError:
        raise ProtocolError(ProtocolErrorKind.BAD_BODY, f"unknown task kind {kind_code}") from None
    rest = body[5:]
    if kind.uses_vector_key:
        if len(rest) < 2:
            raise ProtocolError(ProtocolErrorKind.BAD_BODY, "missing vector dimension")
        (dim,) = struct.unpack(">H", rest[:2])
        if dim < 1:
            raise ProtocolError(ProtocolErrorKind.BAD_BODY, "vector dim must be >= 1")
        if len(rest) != 2 + 4 * dim:
            raise ProtocolError(ProtocolErrorKind.BAD_BODY, "vector descriptor length mismatch")
        values = struct.unpack(f">{dim}f", rest[2:])
        try:
            descriptor = Descriptor(kind, FeatureVector(values))
        except InvalidParameter as exc:  # non-finite floats on the wire
            raise ProtocolError(ProtocolErrorKind.BAD_BODY, str(exc)) from None
    else:
        if len(rest) != 32:
            raise ProtocolError(ProtocolErrorKind.BAD_BODY, "hash descriptor must be 32 bytes")
        descriptor = Descriptor(kind, ContentHash(rest))
    return RequestMessage(request_id, user_id, kind, descriptor)


def _parse_response_body(request_id: int, body: bytes) -> ResponseMessage:
    if len(body) < 5:
        raise ProtocolError(ProtocolErrorKind.BAD_BODY, "response body shorter than 5 bytes")
    served_code, result_len = struct.unpack(">BI", body[:5])
    try:
        served = ServedFrom(served_code)
    except ValueError:
        raise ProtocolError(ProtocolErrorKind.BAD_BODY, f"unknown served_from {served_code}") from None
    if result_len != len(body) - 5:
        raise ProtocolError(ProtocolErrorKind.BAD_BODY, "result_len does not match body length")
    return ResponseMessage(request_id, served, bytes(body[5:]))


def try_decode(buf):
    """Decode one frame from the front of ``buf``.

    Returns (message, bytes_consumed), or None if ``buf`` holds only a
    prefix of a frame. Raises ProtocolError on malformed input; magic
    and type are checked as soon as their bytes are available. Accepts
    bytes or bytearray without copying the tail.
    """
    head = bytes(buf[:HEADER_LEN])
    if len(head) >= 4:
        if head[:4] != MAGIC:
            raise ProtocolError(ProtocolErrorKind.BAD_MAGIC, f"got {head[:4]!r}")
    elif head != MAGIC[: len(head)]:
        raise ProtocolError(ProtocolErrorKind.BAD_MAGIC, f"got {head!r}")
    if len(head) >= 5 and head[4] not in (MSG_REQUEST, MSG_RESPONSE):
        raise ProtocolError(ProtocolErrorKind.UNKNOWN_TYPE, f"msg_type {head[4]}")
    if len(head) < HEADER_LEN:
        return None
    msg_type, request_id, body_len = struct.unpack(">BQI", head[4:])
    if body_len > MAX_BODY_BYTES:
        raise ProtocolError(ProtocolErrorKind.OVERSIZE_BODY, f"body_len {body_len}")
    end = HEADER_LEN + body_len
    if len(buf) < end:
        return None
    body = bytes(buf[HEADER_LEN:end])
    if msg_type == MSG_REQUEST:
        return _parse_request_body(request_id, body), end
    return _parse_response_body(request_id, body), end


class StreamDecoder:
    """Incremental decoder for one byte stream (one connection)."""

    def __init__(self):
        self._buf = bytearray()
        self._dead = None

    def feed(self, data: bytes):
        """Append ``data`` and return all complete messages."""
        if self._dead is not None:
            raise self._dead
        self._buf.extend(data)
        out = []
        while True:
            try:
                decoded = try_decode(self._buf)
            except ProtocolError as exc:
                self._dead = exc
                raise
            if decoded is None:
                return out
            msg, consumed = decoded
            del self._buf[:consumed]
            out.append(msg)

    def finish(self):
        """Signal end of stream; a buffered partial frame is an error."""
        if self._dead is not None:
            raise self._dead
        if self._buf:
            raise ProtocolError(
                ProtocolErrorKind.TRUNCATED, f"stream closed with {len(self._buf)} buffered bytes"
            )

    @property
    def pending_bytes(self) -> int:
        return len(self._buf)
