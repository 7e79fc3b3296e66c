"""Seeded multi-user request traces.

The generator models the redundancy that makes edge caching pay off:
several users keep asking for the same few popular objects. Popularity
follows a Zipf law over a catalog of ``catalog_size`` objects (skew 0 is
uniform), task kinds are drawn from a three-way mix, and arrivals per
user are either fixed-spaced or exponential. Everything derives from one
64-bit seed, so a trace regenerates bit-identically.

Recognition requests carry a noisy feature vector from the stub
extractor; model/panorama requests carry the SHA-256 of the object's
canonical byte block (the object id repeated to 256 bytes), so two
requests for the same model share one hash.
"""

import struct
from bisect import bisect_right
from dataclasses import dataclass
from functools import lru_cache

from .descriptors import (
    Descriptor,
    FeatureVector,
    TaskKind,
    hash_content,
    stub_extract,
)
from .errors import InvalidParameter
from .latency import round_us
from .rng import SplitMix64, derive_seed

_KIND_ORDER = (TaskKind.OBJECT_RECOGNITION, TaskKind.MODEL_RENDER_3D, TaskKind.VR_PANORAMA)

# Stream tags for deriving independent per-user generators from one seed.
_TAG_ARRIVAL = 1
_TAG_KIND = 2
_TAG_OBJECT = 3
_TAG_NOISE = 4

_TRACE_HEADER = "# edgecache trace v1"


@dataclass(frozen=True)
class WorkloadSpec:
    users: int
    requests_per_user: int
    catalog_size: int
    zipf_s: float
    kind_mix: tuple  # weights for (recognition, model3d, panorama), sum 1
    sigma: float
    feature_dim: int
    arrival_mode: str  # "fixed" | "exponential"
    mean_interarrival_ms: float
    seed: int

    def __post_init__(self):
        if self.users < 1 or self.requests_per_user < 1 or self.catalog_size < 1:
            raise InvalidParameter("users, requests_per_user and catalog_size must be >= 1")
        if len(self.kind_mix) != 3 or any(w < 0 for w in self.kind_mix):
            raise InvalidParameter("kind_mix must be three nonnegative weights")
        if abs(sum(self.kind_mix) - 1.0) > 1e-9:
            raise InvalidParameter("kind_mix weights must sum to 1")
        if self.zipf_s < 0 or self.sigma < 0:
            raise InvalidParameter("zipf_s and sigma must be >= 0")
        if self.feature_dim < 1:
            raise InvalidParameter("feature_dim must be >= 1")
        if self.arrival_mode not in ("fixed", "exponential"):
            raise InvalidParameter("arrival_mode must be 'fixed' or 'exponential'")
        if self.mean_interarrival_ms < 0:
            raise InvalidParameter("mean_interarrival_ms must be >= 0")


@dataclass(frozen=True)
class TraceRequest:
    request_id: int
    user_id: int
    issued_at_us: int
    kind: TaskKind
    object_id: int  # ground truth, used for precision accounting
    descriptor: Descriptor


@dataclass(frozen=True)
class Trace:
    requests: tuple

    def __len__(self):
        return len(self.requests)

    def digest(self) -> str:
        import hashlib

        return hashlib.sha256(trace_to_text(self).encode()).hexdigest()


def canonical_object_bytes(object_id: int) -> bytes:
    """The fixed 256-byte block whose hash identifies ``object_id``."""
    if object_id < 0:
        raise InvalidParameter("object_id must be >= 0")
    return object_id.to_bytes(8, "big") * 32


def zipf_probabilities(catalog_size: int, s: float):
    """Mass function p(i) = (1/(i+1)^s) / H over i in [0, catalog_size)."""
    if catalog_size < 1:
        raise InvalidParameter("catalog_size must be >= 1")
    if s < 0:
        raise InvalidParameter("s must be >= 0")
    weights = [1.0 / (i + 1) ** s for i in range(catalog_size)]
    h = sum(weights)
    return [w / h for w in weights]


class ZipfSampler:
    """Inverse-CDF sampler over the Zipf mass function."""

    def __init__(self, catalog_size: int, s: float):
        probs = zipf_probabilities(catalog_size, s)
        cdf = []
        acc = 0.0
        for p in probs:
            acc += p
            cdf.append(acc)
        cdf[-1] = 1.0  # guard the top against float shortfall
        self._cdf = cdf

    def sample(self, rng: SplitMix64) -> int:
        return bisect_right(self._cdf, rng.uniform())


def zipf_sample(catalog_size: int, s: float, rng: SplitMix64) -> int:
    """One Zipf draw; convenience wrapper over ``ZipfSampler``."""
    return _sampler(catalog_size, s).sample(rng)


@lru_cache(maxsize=64)
def _sampler(catalog_size, s):
    return ZipfSampler(catalog_size, s)


def _descriptor_for(spec: WorkloadSpec, kind: TaskKind, object_id: int, noise_seed: int) -> Descriptor:
    if kind.uses_vector_key:
        vec = stub_extract(object_id, noise_seed, spec.sigma, spec.feature_dim)
        return Descriptor(kind, vec)
    return Descriptor(kind, hash_content(canonical_object_bytes(object_id)))


def generate_trace(spec: WorkloadSpec) -> Trace:
    """Generate the full request trace for ``spec``, sorted by issue time.

    Request ids are assigned densely from 0 in (issued_at, user, ordinal)
    order. Two calls with the same spec produce identical traces.
    """
    sampler = ZipfSampler(spec.catalog_size, spec.zipf_s)
    mix_cdf = []
    acc = 0.0
    for w in spec.kind_mix:
        acc += w
        mix_cdf.append(acc)
    mix_cdf[-1] = 1.0

    pending = []
    for user in range(spec.users):
        arrival = SplitMix64(derive_seed(spec.seed, _TAG_ARRIVAL, user))
        kinds = SplitMix64(derive_seed(spec.seed, _TAG_KIND, user))
        objects = SplitMix64(derive_seed(spec.seed, _TAG_OBJECT, user))
        t_ms = 0.0
        for j in range(spec.requests_per_user):
            if spec.arrival_mode == "fixed":
                issue_ms = j * spec.mean_interarrival_ms
            else:
                t_ms += arrival.exponential(spec.mean_interarrival_ms)
                issue_ms = t_ms
            kind = _KIND_ORDER[bisect_right(mix_cdf, kinds.uniform())]
            obj = sampler.sample(objects)
            pending.append((round_us(issue_ms), user, j, kind, obj))

    pending.sort(key=lambda r: (r[0], r[1], r[2]))
    requests = []
    for rid, (issue_us, user, j, kind, obj) in enumerate(pending):
        noise_seed = derive_seed(spec.seed, _TAG_NOISE, user, j)
        requests.append(
            TraceRequest(rid, user, issue_us, kind, obj, _descriptor_for(spec, kind, obj, noise_seed))
        )
    return Trace(tuple(requests))


def _descriptor_hex(descriptor: Descriptor) -> str:
    if descriptor.kind.uses_vector_key:
        vec = descriptor.key
        return (struct.pack(">H", vec.dim) + struct.pack(f">{vec.dim}f", *vec.values)).hex()
    return descriptor.key.digest.hex()


def _descriptor_from_hex(kind: TaskKind, text: str) -> Descriptor:
    raw = bytes.fromhex(text)
    if kind.uses_vector_key:
        if len(raw) < 2:
            raise InvalidParameter("truncated vector descriptor")
        (dim,) = struct.unpack(">H", raw[:2])
        if len(raw) != 2 + 4 * dim:
            raise InvalidParameter("vector descriptor length mismatch")
        values = struct.unpack(f">{dim}f", raw[2:])
        return Descriptor(kind, FeatureVector(values))
    from .descriptors import ContentHash

    return Descriptor(kind, ContentHash(raw))


def trace_to_text(trace: Trace) -> str:
    """Serialize a trace, one request per line:
    ``request_id user_id issued_at_us kind object_id descriptor_hex``."""
    lines = [_TRACE_HEADER]
    for r in trace.requests:
        lines.append(
            f"{r.request_id} {r.user_id} {r.issued_at_us} {r.kind.token} {r.object_id} {_descriptor_hex(r.descriptor)}"
        )
    return "\n".join(lines) + "\n"


def trace_from_text(text: str) -> Trace:
    requests = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 6:
            raise InvalidParameter(f"trace line {lineno}: expected 6 fields, got {len(parts)}")
        rid, user, issued, kind_tok, obj, desc_hex = parts
        kind = TaskKind.from_token(kind_tok)
        requests.append(
            TraceRequest(int(rid), int(user), int(issued), kind, int(obj), _descriptor_from_hex(kind, desc_hex))
        )
    requests.sort(key=lambda r: (r.issued_at_us, r.request_id))
    return Trace(tuple(requests))


def save_trace(trace: Trace, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(trace_to_text(trace))


def load_trace(path) -> Trace:
    with open(path, "r", encoding="ascii") as fh:
        return trace_from_text(fh.read())
