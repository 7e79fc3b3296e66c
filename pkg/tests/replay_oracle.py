"""Independent replay of a trace against the reference cache model.

Re-derives the full hit/miss schedule of a scenario without touching
the production simulator: its own tiny event heap, its own leg-time
arithmetic, and the brute-force OracleCache. Shares only the documented
conventions (store-and-forward legs, half-up microsecond quantization,
enqueue-order tie-breaking).
"""

import heapq

from cache_oracle import OracleCache


def _round_us(ms):
    return int(ms * 1000.0 + 0.5)


class ReplayOracle:
    def __init__(self, scenario):
        self.scenario = scenario
        self.cache = OracleCache(
            threshold=scenario.cache.similarity_threshold,
            metric=scenario.cache.metric.value,
            capacity=scenario.cache.capacity_bytes,
        )
        self._heap = []
        self._seq = 0
        self.schedule = {}  # request_id -> "edge" | "cloud"

    def _transfer(self, link, size_bytes):
        return link.propagation_ms + size_bytes * 8.0 / link.bandwidth_bps * 1000.0

    def _push(self, at_ms, fn):
        heapq.heappush(self._heap, (_round_us(at_ms), self._seq, fn))
        self._seq += 1

    def _key(self, descriptor):
        if descriptor.kind.uses_vector_key:
            return descriptor.key.values
        return descriptor.key.digest

    def run(self, trace):
        cfg = self.scenario
        for req in trace.requests:
            c = cfg.compute[req.kind]
            s = cfg.sizes[req.kind]
            arrive = (
                req.issued_at_us / 1000.0
                + c.client_extract_ms
                + self._transfer(cfg.link_mobile_edge, s.request_descriptor_bytes)
            )
            self._push(arrive, self._edge(req, arrive))
        while self._heap:
            _, _, fn = heapq.heappop(self._heap)
            fn()
        return self.schedule

    # The miss path is two scheduled hops (edge->cloud, cloud->edge),
    # mirroring the pipeline's event structure so that same-microsecond
    # ties resolve in the same enqueue order as the system under test.

    def _edge(self, req, at_ms):
        def handle():
            cfg = self.scenario
            c = cfg.compute[req.kind]
            s = cfg.sizes[req.kind]
            hit = self.cache.lookup(req.kind, self._key(req.descriptor), _round_us(at_ms))
            if hit is not None:
                self.schedule[req.request_id] = "edge"
                return
            self.schedule[req.request_id] = "cloud"
            cloud_at = at_ms + c.edge_lookup_ms + self._transfer(cfg.link_edge_cloud, s.request_descriptor_bytes)
            self._push(cloud_at, self._cloud(req, cloud_at))

        return handle

    def _cloud(self, req, at_ms):
        def handle():
            cfg = self.scenario
            back_at = (
                at_ms
                + cfg.compute[req.kind].cloud_compute_ms
                + self._transfer(cfg.link_edge_cloud, cfg.sizes[req.kind].result_bytes)
            )
            self._push(back_at, self._insert(req, back_at))

        return handle

    def _insert(self, req, at_ms):
        def handle():
            size = self.scenario.sizes[req.kind].result_bytes
            self.cache.insert(req.kind, self._key(req.descriptor), b"\0" * size, _round_us(at_ms))

        return handle
