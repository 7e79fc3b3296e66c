"""Cooperative edge caching of offloaded compute results, with a
deterministic latency simulator, a framed TCP protocol for live
client/edge/cloud deployments, and an experiment harness.

The hot vector-scan kernels have a compiled core (``edgecache.kernels``)
with a pure-Python fallback selected at import time.
"""

from .cache import CacheConfig, CacheStats, Hit, InsertOutcome, SimilarityCache
from .descriptors import (
    ContentHash,
    Descriptor,
    DistanceMetric,
    FeatureVector,
    TaskKind,
    distance,
    hash_content,
    stub_extract,
)
from .harness import run_scenario, summarize
from .latency import (
    KindCompute,
    KindSizes,
    LinkSpec,
    baseline_latency_ms,
    expected_mean_latency_ms,
    hit_latency_ms,
    miss_latency_ms,
    transfer_ms,
)
from .scenario import ScenarioConfig, load_config, parse_config
from .sim import CloudBackend, ServedFrom, TaskRequest, TaskResponse, run_simulation
from .workload import Trace, WorkloadSpec, generate_trace, load_trace, save_trace, zipf_sample

__version__ = "0.1.0"

__all__ = [
    "CacheConfig",
    "CacheStats",
    "CloudBackend",
    "ContentHash",
    "Descriptor",
    "DistanceMetric",
    "FeatureVector",
    "Hit",
    "InsertOutcome",
    "KindCompute",
    "KindSizes",
    "LinkSpec",
    "ScenarioConfig",
    "ServedFrom",
    "SimilarityCache",
    "TaskKind",
    "TaskRequest",
    "TaskResponse",
    "Trace",
    "WorkloadSpec",
    "baseline_latency_ms",
    "distance",
    "expected_mean_latency_ms",
    "generate_trace",
    "hash_content",
    "hit_latency_ms",
    "load_config",
    "load_trace",
    "miss_latency_ms",
    "parse_config",
    "run_scenario",
    "run_simulation",
    "save_trace",
    "stub_extract",
    "summarize",
    "transfer_ms",
    "zipf_sample",
    "__version__",
]
