"""Task kinds, request descriptors and the deterministic stub extractor.

A descriptor is the compact key a client derives from its input before
contacting the edge: recognition tasks key on a dense feature vector,
3D-model and panorama tasks key on a SHA-256 content hash. Real feature
extraction is out of scope here; ``stub_extract`` stands in for it with
a reproducible "centroid plus Gaussian noise" model so that repeated
views of the same object land near each other in feature space.

Vector components are quantized to IEEE-754 binary32 on creation. The
wire protocol ships binary32, so quantizing at the source makes the
encode/decode round trip lossless and keeps simulated and networked
runs byte-for-byte consistent.
"""

import hashlib
import math
import struct
from dataclasses import dataclass
from enum import Enum, IntEnum
from functools import lru_cache

from .errors import DimensionMismatch, InvalidParameter, ZeroNormVector
from .kernels import cosine_distances, l2_distances
from .rng import SplitMix64, derive_seed

from array import array

DEFAULT_FEATURE_DIM = 64

# Root of the fixed centroid family; not a workload knob, so that object k
# means the same point in feature space in every run.
_CENTROID_ROOT = 0x65646765636163  # arbitrary odd constant


class TaskKind(IntEnum):
    """The three cacheable task families. Values double as wire codes."""

    OBJECT_RECOGNITION = 1
    MODEL_RENDER_3D = 2
    VR_PANORAMA = 3

    @property
    def token(self) -> str:
        return _KIND_TOKENS[self]

    @classmethod
    def from_token(cls, token: str) -> "TaskKind":
        for kind, tok in _KIND_TOKENS.items():
            if tok == token:
                return kind
        raise InvalidParameter(f"unknown task kind {token!r}")

    @property
    def uses_vector_key(self) -> bool:
        return self is TaskKind.OBJECT_RECOGNITION


_KIND_TOKENS = {
    TaskKind.OBJECT_RECOGNITION: "recognition",
    TaskKind.MODEL_RENDER_3D: "model3d",
    TaskKind.VR_PANORAMA: "panorama",
}


class DistanceMetric(Enum):
    L2 = "l2"
    COSINE = "cosine"

    @classmethod
    def from_token(cls, token: str) -> "DistanceMetric":
        try:
            return cls(token)
        except ValueError:
            raise InvalidParameter(f"unknown distance metric {token!r}") from None


def _quantize32(values) -> tuple:
    """Round each component to the nearest binary32, kept as floats."""
    n = len(values)
    return struct.unpack(f">{n}f", struct.pack(f">{n}f", *values))


@dataclass(frozen=True)
class FeatureVector:
    """Dense feature-space key for recognition tasks."""

    values: tuple

    def __post_init__(self):
        if len(self.values) < 1:
            raise InvalidParameter("feature vector must have dim >= 1")
        vals = tuple(float(v) for v in self.values)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidParameter("feature vector components must be finite")
        object.__setattr__(self, "values", vals)

    @property
    def dim(self) -> int:
        return len(self.values)

    def as_array(self) -> array:
        return array("d", self.values)


@dataclass(frozen=True)
class ContentHash:
    """256-bit content digest key; equality is bytewise."""

    digest: bytes

    def __post_init__(self):
        if not isinstance(self.digest, bytes) or len(self.digest) != 32:
            raise InvalidParameter("content hash must be exactly 32 bytes")


@dataclass(frozen=True)
class Descriptor:
    """Tagged cache key: a vector or a hash, namespaced by task kind."""

    kind: TaskKind
    key: object

    def __post_init__(self):
        if self.kind.uses_vector_key:
            if not isinstance(self.key, FeatureVector):
                raise InvalidParameter(f"{self.kind.token} descriptors must carry a feature vector")
        elif not isinstance(self.key, ContentHash):
            raise InvalidParameter(f"{self.kind.token} descriptors must carry a content hash")


def distance(a: FeatureVector, b: FeatureVector, metric: DistanceMetric = DistanceMetric.L2) -> float:
    """Distance between two feature vectors under the given metric.

    Symmetric and zero for identical inputs. Cosine distance is
    1 - cosine similarity and rejects zero-norm vectors; a vector whose
    squared norm underflows to zero counts as zero-norm.
    """
    if a.dim != b.dim:
        raise DimensionMismatch(f"dim {a.dim} vs {b.dim}")
    out = array("d", [0.0])
    try:
        if metric is DistanceMetric.L2:
            l2_distances(a.as_array(), b.as_array(), 1, out)
        else:
            cosine_distances(a.as_array(), b.as_array(), 1, out)
    except ValueError:
        raise ZeroNormVector("cosine distance is undefined for zero-norm vectors") from None
    return out[0]


def hash_content(content: bytes) -> ContentHash:
    """SHA-256 digest of ``content`` as a cache key."""
    return ContentHash(hashlib.sha256(content).digest())


@lru_cache(maxsize=4096)
def centroid(object_id: int, dim: int) -> tuple:
    """Fixed unit-norm direction assigned to ``object_id`` in ``dim`` dims."""
    rng = SplitMix64(derive_seed(_CENTROID_ROOT, object_id, dim))
    raw = [rng.gauss() for _ in range(dim)]
    norm = sum(v * v for v in raw) ** 0.5
    if norm == 0.0:  # unreachable in practice, keeps the map total
        raw[0] = 1.0
        norm = 1.0
    return _quantize32([v / norm for v in raw])


def stub_extract(object_id: int, user_noise_seed: int, sigma: float, dim: int = DEFAULT_FEATURE_DIM) -> FeatureVector:
    """Stand-in for on-device feature extraction.

    Returns the object's fixed centroid perturbed by per-component
    Gaussian noise of standard deviation ``sigma``, drawn from a PRNG
    seeded with ``user_noise_seed``. ``sigma=0`` reproduces the centroid
    exactly, so identical inputs always yield identical vectors.
    """
    if dim < 1:
        raise InvalidParameter("dim must be >= 1")
    if sigma < 0:
        raise InvalidParameter("sigma must be >= 0")
    if object_id < 0:
        raise InvalidParameter("object_id must be >= 0")
    base = centroid(object_id, dim)
    if sigma == 0:
        return FeatureVector(base)
    rng = SplitMix64(user_noise_seed)
    return FeatureVector(_quantize32([c + sigma * rng.gauss() for c in base]))
