"""Shared builders for scenario configs and hand-rolled traces."""

from edgecache.cache import CacheConfig
from edgecache.descriptors import (
    Descriptor,
    DistanceMetric,
    TaskKind,
    hash_content,
    stub_extract,
)
from edgecache.latency import KindCompute, KindSizes, LinkSpec
from edgecache.scenario import ScenarioConfig
from edgecache.workload import Trace, TraceRequest, WorkloadSpec, canonical_object_bytes

MBPS = 1_000_000.0


def make_workload(**overrides) -> WorkloadSpec:
    base = dict(
        users=1,
        requests_per_user=10,
        catalog_size=4,
        zipf_s=0.0,
        kind_mix=(0.0, 1.0, 0.0),  # hash-keyed model tasks by default
        sigma=0.0,
        feature_dim=16,
        arrival_mode="fixed",
        mean_interarrival_ms=500.0,
        seed=42,
    )
    base.update(overrides)
    return WorkloadSpec(**base)


def make_scenario(
    workload=None,
    link_me=None,
    link_ec=None,
    cloud_ms=80.0,
    lookup_ms=1.0,
    extract_ms=2.0,
    desc_bytes=1000,
    result_bytes=4000,
    threshold=0.5,
    metric=DistanceMetric.L2,
    capacity=64 * 1024 * 1024,
    mode="simulated",
) -> ScenarioConfig:
    return ScenarioConfig(
        workload=workload or make_workload(),
        link_mobile_edge=link_me or LinkSpec(400 * MBPS, 5.0),
        link_edge_cloud=link_ec or LinkSpec(100 * MBPS, 10.0),
        compute={k: KindCompute(cloud_ms, lookup_ms, extract_ms) for k in TaskKind},
        sizes={k: KindSizes(desc_bytes, result_bytes) for k in TaskKind},
        cache=CacheConfig(threshold, metric, capacity),
        mode=mode,
        sweep=None,
    )


def raw_config(**overrides) -> dict:
    """JSON-shaped config dict matching make_scenario defaults."""
    raw = {
        "mode": "simulated",
        "workload": {
            "users": 1,
            "requests_per_user": 10,
            "catalog_size": 4,
            "zipf_s": 0.0,
            "kind_mix": {"recognition": 0.0, "model3d": 1.0, "panorama": 0.0},
            "sigma": 0.0,
            "feature_dim": 16,
            "arrival_mode": "fixed",
            "mean_interarrival_ms": 500.0,
            "seed": 42,
        },
        "link_mobile_edge": {"bandwidth_bps": 400 * MBPS, "propagation_ms": 5.0},
        "link_edge_cloud": {"bandwidth_bps": 100 * MBPS, "propagation_ms": 10.0},
        "compute": {
            k.token: {"cloud_compute_ms": 80.0, "edge_lookup_ms": 1.0, "client_extract_ms": 2.0}
            for k in TaskKind
        },
        "sizes": {
            k.token: {"request_descriptor_bytes": 1000, "result_bytes": 4000} for k in TaskKind
        },
        "cache": {"similarity_threshold": 0.5, "metric": "l2", "capacity_bytes": 64 * 1024 * 1024},
    }
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(raw.get(key), dict):
            raw[key].update(value)
        else:
            raw[key] = value
    return raw


def manual_trace(items, sigma=0.0, feature_dim=16):
    """Build a trace from (user_id, issued_at_us, kind, object_id) tuples."""
    requests = []
    ordered = sorted(enumerate(items), key=lambda p: (p[1][1], p[0]))
    for rid, (_, (user, issued_us, kind, obj)) in enumerate(ordered):
        if kind.uses_vector_key:
            descriptor = Descriptor(kind, stub_extract(obj, 1000 + rid, sigma, feature_dim))
        else:
            descriptor = Descriptor(kind, hash_content(canonical_object_bytes(obj)))
        requests.append(TraceRequest(rid, user, issued_us, kind, obj, descriptor))
    return Trace(tuple(requests))
