"""Deterministic discrete-event simulation of the client/edge/cloud tiers.

Each trace request walks the pipeline: the client charges extraction
time and ships the descriptor to the edge; the edge looks it up in the
shared cache and either returns the cached result or forwards to the
cloud; the cloud computes the result, the edge inserts it on the way
back and relays it to the client. Timing follows the closed forms in
``latency`` exactly.

Determinism is a hard requirement: events are ordered by (time,
enqueue sequence), the clock is integer microseconds, and each
request's absolute completion time is accumulated in exact real
milliseconds and quantized half-up only when an event is scheduled --
so every simulated latency lands within 1 us of the analytic value.
"""

import hashlib
import heapq
from dataclasses import dataclass
from enum import IntEnum
from typing import Optional

from .cache import SimilarityCache
from .descriptors import Descriptor, TaskKind, centroid
from .errors import DuplicateRequestId, InvalidParameter, SimulationError
from .kernels import l2_distances
from .latency import round_us, transfer_ms
from .workload import Trace, canonical_object_bytes

from array import array


class ServedFrom(IntEnum):
    """Who produced the response bytes. Values double as wire codes."""

    EDGE = 1
    CLOUD = 2

    @property
    def token(self) -> str:
        return "edge" if self is ServedFrom.EDGE else "cloud"


@dataclass(frozen=True)
class TaskRequest:
    request_id: int
    user_id: int
    kind: TaskKind
    descriptor: Descriptor
    issued_at_us: int

    def __post_init__(self):
        if self.descriptor.kind is not self.kind:
            raise InvalidParameter("descriptor kind does not match request kind")


@dataclass(frozen=True)
class TaskResponse:
    request_id: int
    result: bytes
    served_from: ServedFrom
    completed_at_us: int


@dataclass(frozen=True)
class RequestRecord:
    """One per-request measurement row produced by a run."""

    request_id: int
    user_id: int
    kind: TaskKind
    object_id: int
    issued_at_us: int
    completed_at_us: int
    latency_us: int
    served_from: ServedFrom
    matched_distance: Optional[float]
    result_object_id: int


class VirtualClock:
    """Monotonic integer-microsecond clock owned by the event loop."""

    __slots__ = ("now_us",)

    def __init__(self):
        self.now_us = 0

    def advance_to(self, t_us: int):
        if t_us < self.now_us:
            raise SimulationError("virtual clock moved backward")
        self.now_us = t_us


class EventLoop:
    """Priority queue of (time_us, seq, action); seq breaks ties in
    enqueue order so runs are reproducible."""

    def __init__(self):
        self.clock = VirtualClock()
        self._heap = []
        self._seq = 0

    def schedule_ms(self, at_ms: float, action):
        """Schedule ``action`` at an absolute real-valued time, quantized
        half-up to the microsecond grid."""
        self.schedule_us(round_us(at_ms), action)

    def schedule_us(self, at_us: int, action):
        if at_us < self.clock.now_us:
            raise SimulationError("event scheduled in the past")
        heapq.heappush(self._heap, (at_us, self._seq, action))
        self._seq += 1

    def run(self):
        while self._heap:
            t_us, _, action = heapq.heappop(self._heap)
            self.clock.advance_to(t_us)
            action()


def result_payload(kind: TaskKind, object_id: int, size_bytes: int) -> bytes:
    """Deterministic result bytes for (kind, object): an 8-byte big-endian
    object id, a content signature, then zero padding to ``size_bytes``.

    Embedding the resolved object id up front lets any consumer of a
    response (simulated or networked) recover which object the cached
    result actually belongs to, which is what precision accounting needs.
    """
    if size_bytes < 8:
        raise InvalidParameter("result_bytes must be >= 8 to carry the object id")
    head = object_id.to_bytes(8, "big")
    sig = hashlib.sha256(bytes([kind.value]) + head).digest()
    body = head + sig
    if size_bytes <= len(body):
        return body[:size_bytes]
    return body + bytes(size_bytes - len(body))


def payload_object_id(result: bytes) -> int:
    return int.from_bytes(result[:8], "big")


class CloudBackend:
    """Deterministic stand-in for the cloud's recognition/render service.

    Vector descriptors resolve to the nearest catalog centroid (the
    cloud "recognizes" the object); hash descriptors resolve through a
    precomputed digest-to-object map. The same descriptor therefore
    always yields bytewise-identical result payloads.
    """

    def __init__(self, catalog_size: int, feature_dim: int, sizes):
        if catalog_size < 1:
            raise InvalidParameter("catalog_size must be >= 1")
        self.catalog_size = catalog_size
        self.feature_dim = feature_dim
        self.sizes = sizes
        self._hash_index = None
        self._centroid_block = None
        self._payloads = {}

    def _hashes(self):
        if self._hash_index is None:
            from .descriptors import hash_content

            self._hash_index = {
                hash_content(canonical_object_bytes(i)).digest: i for i in range(self.catalog_size)
            }
        return self._hash_index

    def _centroids(self):
        if self._centroid_block is None:
            block = array("d")
            for i in range(self.catalog_size):
                block.extend(centroid(i, self.feature_dim))
            self._centroid_block = block
        return self._centroid_block

    def resolve(self, descriptor: Descriptor) -> int:
        """Ground the descriptor to a catalog object id."""
        if descriptor.kind.uses_vector_key:
            query = descriptor.key
            if query.dim != self.feature_dim:
                raise InvalidParameter(
                    f"descriptor dim {query.dim} does not match catalog dim {self.feature_dim}"
                )
            n = self.catalog_size
            out = array("d", bytes(8 * n))
            l2_distances(query.as_array(), self._centroids(), n, out)
            best = 0
            for i in range(1, n):
                if out[i] < out[best]:
                    best = i
            return best
        obj = self._hashes().get(descriptor.key.digest)
        if obj is None:
            raise SimulationError("hash descriptor does not match any catalog object")
        return obj

    def result_for(self, descriptor: Descriptor) -> bytes:
        obj = self.resolve(descriptor)
        key = (descriptor.kind, obj)
        payload = self._payloads.get(key)
        if payload is None:
            payload = result_payload(descriptor.kind, obj, self.sizes[descriptor.kind].result_bytes)
            self._payloads[key] = payload
        return payload


class Simulation:
    """One arm of an experiment over a fixed trace.

    ``cache_enabled=False`` is the baseline: every request passes
    through the edge untouched (no lookup charge, no insert) and is
    served by the cloud.
    """

    def __init__(self, link_me, link_ec, compute, sizes, backend, cache: Optional[SimilarityCache]):
        self.link_me = link_me
        self.link_ec = link_ec
        self.compute = compute
        self.sizes = sizes
        self.backend = backend
        self.cache = cache
        self.loop = EventLoop()
        self.records = []
        self._pending = set()
        self._seen_ids = set()

    # --- client ---

    def client_issue(self, req: TaskRequest, truth_object_id: int):
        if req.request_id in self._seen_ids:
            raise DuplicateRequestId(f"request id {req.request_id} reused")
        if req.descriptor.kind is not req.kind:
            raise InvalidParameter("descriptor kind does not match request kind")
        self._seen_ids.add(req.request_id)
        self._pending.add(req.request_id)
        c = self.compute[req.kind]
        s = self.sizes[req.kind]
        issue_ms = req.issued_at_us / 1000.0
        arrive_ms = issue_ms + c.client_extract_ms + transfer_ms(self.link_me, s.request_descriptor_bytes)
        self.loop.schedule_ms(arrive_ms, lambda: self._edge_arrival(req, truth_object_id, arrive_ms))

    # --- edge ---

    def _edge_arrival(self, req, truth, at_ms):
        c = self.compute[req.kind]
        s = self.sizes[req.kind]
        if self.cache is not None:
            hit = self.cache.lookup(req.descriptor, self.loop.clock.now_us)
            if hit is not None:
                done_ms = at_ms + c.edge_lookup_ms + transfer_ms(self.link_me, s.result_bytes)
                self.loop.schedule_ms(
                    done_ms,
                    lambda: self._client_delivery(req, truth, hit.result, ServedFrom.EDGE, hit.distance),
                )
                return
            lookup_ms = c.edge_lookup_ms
        else:
            lookup_ms = 0.0  # baseline forwards untouched
        cloud_ms = at_ms + lookup_ms + transfer_ms(self.link_ec, s.request_descriptor_bytes)
        self.loop.schedule_ms(cloud_ms, lambda: self._cloud_arrival(req, truth, cloud_ms))

    # --- cloud ---

    def _cloud_arrival(self, req, truth, at_ms):
        c = self.compute[req.kind]
        s = self.sizes[req.kind]
        result = self.backend.result_for(req.descriptor)
        back_ms = at_ms + c.cloud_compute_ms + transfer_ms(self.link_ec, s.result_bytes)
        self.loop.schedule_ms(back_ms, lambda: self._edge_return(req, truth, result, back_ms))

    def _edge_return(self, req, truth, result, at_ms):
        if self.cache is not None:
            self.cache.insert(req.descriptor, result, self.loop.clock.now_us)
        s = self.sizes[req.kind]
        done_ms = at_ms + transfer_ms(self.link_me, s.result_bytes)
        self.loop.schedule_ms(
            done_ms, lambda: self._client_delivery(req, truth, result, ServedFrom.CLOUD, None)
        )

    # --- client receive ---

    def _client_delivery(self, req, truth, result, served_from, matched_distance):
        if req.request_id not in self._pending:
            raise SimulationError(f"request {req.request_id} completed twice")
        self._pending.discard(req.request_id)
        now = self.loop.clock.now_us
        self.records.append(
            RequestRecord(
                request_id=req.request_id,
                user_id=req.user_id,
                kind=req.kind,
                object_id=truth,
                issued_at_us=req.issued_at_us,
                completed_at_us=now,
                latency_us=now - req.issued_at_us,
                served_from=served_from,
                matched_distance=matched_distance,
                result_object_id=payload_object_id(result),
            )
        )

    def run(self, trace: Trace):
        for r in trace.requests:
            req = TaskRequest(r.request_id, r.user_id, r.kind, r.descriptor, r.issued_at_us)
            self.client_issue(req, r.object_id)
        self.loop.run()
        if self._pending:
            raise SimulationError(f"{len(self._pending)} requests never completed")
        if len(self.records) != len(trace.requests):
            raise SimulationError("response count does not match request count")
        self.records.sort(key=lambda rec: rec.request_id)
        return self.records


def run_simulation(scenario, trace: Trace, cache_enabled: bool = True):
    """Run one arm of ``scenario`` over ``trace``.

    Returns (records, cache_stats); cache_stats is None for the
    baseline arm.
    """
    backend = CloudBackend(scenario.workload.catalog_size, scenario.workload.feature_dim, scenario.sizes)
    cache = SimilarityCache(scenario.cache) if cache_enabled else None
    sim = Simulation(
        scenario.link_mobile_edge, scenario.link_edge_cloud, scenario.compute, scenario.sizes, backend, cache
    )
    records = sim.run(trace)
    return records, (cache.stats() if cache is not None else None)
