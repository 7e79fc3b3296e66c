"""Closed-form latency arithmetic for the three-tier pipeline.

Links are modeled store-and-forward with no queueing: a payload of S
bytes crosses a link in ``propagation_ms + S*8/bandwidth_bps*1000``
milliseconds, and concurrent requests do not interfere. This keeps the
end-to-end hit/miss latencies in closed form, which the simulator must
reproduce to within one microsecond of clock quantization.

All durations are real-valued milliseconds; the event loop converts
absolute times to integer microseconds with half-up rounding via
``round_us``.
"""

from dataclasses import dataclass

from .descriptors import TaskKind
from .errors import InvalidParameter


@dataclass(frozen=True)
class LinkSpec:
    """One directed link: available bandwidth plus fixed propagation delay."""

    bandwidth_bps: float
    propagation_ms: float

    def __post_init__(self):
        if self.bandwidth_bps <= 0:
            raise InvalidParameter("bandwidth_bps must be > 0")
        if self.propagation_ms < 0:
            raise InvalidParameter("propagation_ms must be >= 0")


@dataclass(frozen=True)
class KindCompute:
    """Per-kind compute charges at each tier."""

    cloud_compute_ms: float
    edge_lookup_ms: float
    client_extract_ms: float

    def __post_init__(self):
        for name in ("cloud_compute_ms", "edge_lookup_ms", "client_extract_ms"):
            if getattr(self, name) < 0:
                raise InvalidParameter(f"{name} must be >= 0")


@dataclass(frozen=True)
class KindSizes:
    """Per-kind wire payload sizes driving the transfer terms."""

    request_descriptor_bytes: int
    result_bytes: int

    def __post_init__(self):
        if self.request_descriptor_bytes < 1:
            raise InvalidParameter("request_descriptor_bytes must be >= 1")
        if self.result_bytes < 1:
            raise InvalidParameter("result_bytes must be >= 1")


# Per-kind maps; every TaskKind must be present.
ComputeSpec = dict
SizeSpec = dict


def transfer_ms(link: LinkSpec, size_bytes: int) -> float:
    """Time for ``size_bytes`` to cross ``link``, in milliseconds."""
    if size_bytes < 1:
        raise InvalidParameter("size_bytes must be >= 1")
    return link.propagation_ms + size_bytes * 8.0 / link.bandwidth_bps * 1000.0


def hit_latency_ms(kind: TaskKind, link_me: LinkSpec, compute, sizes) -> float:
    """End-to-end latency when the edge cache answers the request."""
    c = compute[kind]
    s = sizes[kind]
    return (
        c.client_extract_ms
        + transfer_ms(link_me, s.request_descriptor_bytes)
        + c.edge_lookup_ms
        + transfer_ms(link_me, s.result_bytes)
    )


def miss_latency_ms(kind: TaskKind, link_me: LinkSpec, link_ec: LinkSpec, compute, sizes) -> float:
    """End-to-end latency when the edge forwards to the cloud."""
    c = compute[kind]
    s = sizes[kind]
    return (
        hit_latency_ms(kind, link_me, compute, sizes)
        + transfer_ms(link_ec, s.request_descriptor_bytes)
        + c.cloud_compute_ms
        + transfer_ms(link_ec, s.result_bytes)
    )


def baseline_latency_ms(kind: TaskKind, link_me: LinkSpec, link_ec: LinkSpec, compute, sizes) -> float:
    """Per-request latency of the no-cache arm: the full cloud round trip
    with no lookup charge at the edge."""
    stripped = {k: KindCompute(v.cloud_compute_ms, 0.0, v.client_extract_ms) for k, v in compute.items()}
    return miss_latency_ms(kind, link_me, link_ec, stripped, sizes)


def expected_mean_latency_ms(hit_rate: float, l_hit_ms: float, l_miss_ms: float) -> float:
    """Analytic mean latency for a given hit rate."""
    if not 0.0 <= hit_rate <= 1.0:
        raise InvalidParameter("hit_rate must lie in [0, 1]")
    return hit_rate * l_hit_ms + (1.0 - hit_rate) * l_miss_ms


def round_us(ms: float) -> int:
    """Milliseconds to integer microseconds, rounding half up."""
    return int(ms * 1000.0 + 0.5)
