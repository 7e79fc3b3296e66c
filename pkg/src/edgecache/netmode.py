"""Networked mode: real TCP servers speaking the frame protocol.

The edge server owns the shared similarity cache; on a hit it answers
the client directly, on a miss it forwards the request frame to the
cloud server, inserts the returned result, and relays it back. The
cloud server wraps the same deterministic backend the simulator uses,
so a networked run and a simulated run of one trace agree on every
hit/miss decision (wall-clock latencies differ, of course).

One handler thread per connection; the cache serializes its own
mutations. Each edge handler keeps a private upstream connection to the
cloud, so per-client request order is preserved on the miss path.
"""

import os
import socket
import socketserver
import threading
import time
from collections import deque
from dataclasses import dataclass

from .cache import SimilarityCache
from .errors import EdgeCacheError
from .scenario import ScenarioConfig
from .sim import CloudBackend, ServedFrom
from .wire import (
    ProtocolError,
    RequestMessage,
    ResponseMessage,
    StreamDecoder,
    encode_request,
    encode_response,
)

_RECV_CHUNK = 65536

REPLAY_CSV_COLUMNS = (
    "arm,request_id,user_id,kind,object_id,issued_at_us,latency_us,served_from,matched_distance"
)


def _now_us() -> int:
    return time.monotonic_ns() // 1000


class MessageStream:
    """Blocking message reader over one socket, tolerant of pipelining."""

    def __init__(self, sock: socket.socket):
        self._sock = sock
        self._decoder = StreamDecoder()
        self._queue = deque()

    def next_message(self):
        """Return the next full message, or None at end of stream."""
        if self._queue:
            return self._queue.popleft()
        while True:
            data = self._sock.recv(_RECV_CHUNK)
            if not data:
                self._decoder.finish()
                return None
            self._queue.extend(self._decoder.feed(data))
            if self._queue:
                return self._queue.popleft()


class _BaseServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def serve_background(self) -> threading.Thread:
        thread = threading.Thread(target=lambda: self.serve_forever(poll_interval=0.02), daemon=True)
        thread.start()
        return thread

    @property
    def bound_port(self) -> int:
        return self.server_address[1]


class CloudServer(_BaseServer):
    """Terminal tier: computes (deterministic) results for every request."""

    def __init__(self, listen_addr, config: ScenarioConfig):
        self.backend = CloudBackend(
            config.workload.catalog_size, config.workload.feature_dim, config.sizes
        )
        super().__init__(listen_addr, _CloudHandler)


class _CloudHandler(socketserver.BaseRequestHandler):
    def handle(self):
        stream = MessageStream(self.request)
        try:
            while True:
                msg = stream.next_message()
                if msg is None:
                    return
                if not isinstance(msg, RequestMessage):
                    return  # a response frame is nonsense here; drop the peer
                result = self.server.backend.result_for(msg.descriptor)
                self.request.sendall(
                    encode_response(ResponseMessage(msg.request_id, ServedFrom.CLOUD, result))
                )
        except (ProtocolError, ConnectionError, OSError):
            return


class EdgeServer(_BaseServer):
    """Middle tier: cache lookup, forward on miss, insert on return."""

    def __init__(self, listen_addr, cloud_addr, config: ScenarioConfig):
        self.cloud_addr = cloud_addr
        self.cache = SimilarityCache(config.cache)
        super().__init__(listen_addr, _EdgeHandler)


class _EdgeHandler(socketserver.BaseRequestHandler):
    def handle(self):
        stream = MessageStream(self.request)
        upstream = None
        upstream_stream = None
        try:
            while True:
                msg = stream.next_message()
                if msg is None:
                    return
                if not isinstance(msg, RequestMessage):
                    return
                cache = self.server.cache
                hit = cache.lookup(msg.descriptor, _now_us())
                if hit is not None:
                    response = ResponseMessage(msg.request_id, ServedFrom.EDGE, hit.result)
                else:
                    if upstream is None:
                        upstream = socket.create_connection(self.server.cloud_addr)
                        upstream_stream = MessageStream(upstream)
                    upstream.sendall(encode_request(msg))
                    reply = upstream_stream.next_message()
                    if reply is None or not isinstance(reply, ResponseMessage):
                        return
                    cache.insert(msg.descriptor, reply.result, _now_us())
                    response = ResponseMessage(msg.request_id, ServedFrom.CLOUD, reply.result)
                self.request.sendall(encode_response(response))
        except (ProtocolError, ConnectionError, OSError):
            return
        finally:
            if upstream is not None:
                upstream.close()


@dataclass(frozen=True)
class ReplayRecord:
    request_id: int
    user_id: int
    kind: object
    object_id: int
    issued_at_us: int
    latency_us: int
    served_from: ServedFrom


def replay_trace(edge_addr, trace, out_dir=None):
    """Send a trace to a live edge, one request at a time, in id order.

    Replay is sequential (the next request goes out when the previous
    response arrives) rather than paced by the trace timestamps; the
    hit/miss sequence it produces is therefore directly comparable with
    a simulated run whose arrivals do not overlap in flight.
    """
    records = []
    with socket.create_connection(edge_addr) as sock:
        stream = MessageStream(sock)
        for r in sorted(trace.requests, key=lambda t: t.request_id):
            frame = encode_request(RequestMessage(r.request_id, r.user_id, r.kind, r.descriptor))
            t0 = time.monotonic_ns()
            sock.sendall(frame)
            reply = stream.next_message()
            if reply is None or not isinstance(reply, ResponseMessage):
                raise EdgeCacheError(f"edge closed the stream at request {r.request_id}")
            if reply.request_id != r.request_id:
                raise EdgeCacheError(
                    f"response id {reply.request_id} does not match request {r.request_id}"
                )
            records.append(
                ReplayRecord(
                    request_id=r.request_id,
                    user_id=r.user_id,
                    kind=r.kind,
                    object_id=r.object_id,
                    issued_at_us=r.issued_at_us,
                    latency_us=(time.monotonic_ns() - t0) // 1000,
                    served_from=reply.served_from,
                )
            )
    if out_dir is not None:
        write_replay_csv(records, out_dir)
    return records


def write_replay_csv(records, out_dir) -> None:
    os.makedirs(out_dir, exist_ok=True)
    lines = [REPLAY_CSV_COLUMNS]
    for r in records:
        lines.append(
            f"networked,{r.request_id},{r.user_id},{r.kind.token},{r.object_id},"
            f"{r.issued_at_us},{r.latency_us},{r.served_from.token},"
        )
    with open(os.path.join(out_dir, "replay.csv"), "w", encoding="ascii", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
