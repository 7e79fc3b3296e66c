"""The edge-resident result cache.

One cache instance holds results for all three task kinds, each in its
own namespace so a recognition vector can never match a model hash.
Vector namespaces answer threshold nearest-neighbor lookups (hit iff
the minimum distance is within the configured similarity threshold);
hash namespaces answer exact bytewise lookups. Capacity is budgeted in
bytes of stored result payload and enforced by least-recently-used
eviction across all namespaces.

Vector scans are exact linear scans over a packed coordinate block,
executed by the compiled kernel when available. Exactness is the point:
the cache's hit condition is *defined* as "minimum distance <= threshold",
which lets tests check it against an independent brute-force oracle.

All operations are serialized by an internal lock so the cache can be
shared by concurrent request handlers in networked mode; the simulator
drives it from a single-threaded event loop.
"""

import threading
from array import array
from collections import OrderedDict
from dataclasses import dataclass
from enum import Enum

from .descriptors import Descriptor, DistanceMetric, TaskKind
from .errors import DimensionMismatch, InvalidParameter, ZeroNormVector
from .kernels import cosine_distances, l2_distances


@dataclass(frozen=True)
class CacheConfig:
    """Similarity threshold, metric and byte capacity for one cache."""

    similarity_threshold: float
    metric: DistanceMetric
    capacity_bytes: int

    def __post_init__(self):
        if self.similarity_threshold < 0:
            raise InvalidParameter("similarity_threshold must be >= 0")
        if self.capacity_bytes < 1:
            raise InvalidParameter("capacity_bytes must be >= 1")


class CacheEntry:
    """One cached result.

    ``seq`` is a monotonically increasing insertion counter used to
    break ties deterministically when virtual timestamps collide.
    """

    __slots__ = ("descriptor", "result", "inserted_at", "last_hit_at", "hit_count", "seq")

    def __init__(self, descriptor, result, now, seq):
        self.descriptor = descriptor
        self.result = result
        self.inserted_at = now
        self.last_hit_at = now
        self.hit_count = 0
        self.seq = seq


@dataclass(frozen=True)
class CacheStats:
    lookups: int
    hits: int
    misses: int
    insertions: int
    evictions: int
    bytes_resident: int


@dataclass(frozen=True)
class Hit:
    """Successful lookup: the cached result and the matched key distance."""

    result: bytes
    distance: float


class InsertOutcome(Enum):
    INSERTED = "inserted"
    REPLACED = "replaced"
    REJECTED_TOO_LARGE = "rejected_too_large"


class _VectorNamespace:
    """Entries of one vector kind plus their packed coordinate block.

    The block is the concatenation of all entry vectors in list order;
    it is extended on insert and rebuilt lazily after an eviction.
    """

    __slots__ = ("entries", "block", "block_valid", "dims")

    def __init__(self):
        self.entries = []
        self.block = array("d")
        self.block_valid = True
        self.dims = set()

    def add(self, entry):
        vec = entry.descriptor.key
        self.entries.append(entry)
        self.dims.add(vec.dim)
        if self.block_valid:
            self.block.extend(vec.values)

    def remove(self, entry):
        for i, e in enumerate(self.entries):
            if e is entry:
                del self.entries[i]
                break
        self.block_valid = False
        self.dims = {e.descriptor.key.dim for e in self.entries}

    def packed(self):
        if not self.block_valid:
            self.block = array("d")
            for e in self.entries:
                self.block.extend(e.descriptor.key.values)
            self.block_valid = True
        return self.block


class SimilarityCache:
    """Bounded edge cache with per-kind namespaces and LRU eviction."""

    def __init__(self, config: CacheConfig):
        self.config = config
        self._lock = threading.RLock()
        # Global recency order: least recently used first. Doubles as the
        # exact-key index, since entries are keyed by their descriptor.
        self._entries: "OrderedDict[Descriptor, CacheEntry]" = OrderedDict()
        self._vectors = {k: _VectorNamespace() for k in TaskKind if k.uses_vector_key}
        self._bytes = 0
        self._seq = 0
        self._lookups = 0
        self._hits = 0
        self._misses = 0
        self._insertions = 0
        self._evictions = 0
        self._scratch = array("d")

    def __len__(self):
        return len(self._entries)

    def lookup(self, descriptor: Descriptor, now: int):
        """Return a ``Hit`` or ``None``.

        Hash descriptors hit iff a bytewise-equal hash is cached. Vector
        descriptors hit iff the minimum distance over same-kind entries
        is within the threshold; ties on distance go to the entry with
        the most recent ``last_hit_at``, then to the newest insertion.
        A hit refreshes the entry's recency.
        """
        with self._lock:
            if descriptor.kind.uses_vector_key:
                entry, dist = self._scan(descriptor)
            else:
                entry, dist = self._entries.get(descriptor), 0.0
            self._lookups += 1
            if entry is None:
                self._misses += 1
                return None
            self._hits += 1
            entry.last_hit_at = max(now, entry.inserted_at)
            entry.hit_count += 1
            self._entries.move_to_end(entry.descriptor)
            return Hit(entry.result, dist)

    def _scan(self, descriptor):
        ns = self._vectors[descriptor.kind]
        if not ns.entries:
            return None, 0.0
        query = descriptor.key
        if ns.dims != {query.dim}:
            raise DimensionMismatch(
                f"query dim {query.dim} vs cached dims {sorted(ns.dims)}"
            )
        n = len(ns.entries)
        if len(self._scratch) < n:
            self._scratch.extend([0.0] * (n - len(self._scratch)))
        try:
            if self.config.metric is DistanceMetric.L2:
                l2_distances(query.as_array(), ns.packed(), n, self._scratch)
            else:
                cosine_distances(query.as_array(), ns.packed(), n, self._scratch)
        except ValueError:
            raise ZeroNormVector("cosine lookup with a zero-norm vector") from None
        best = None
        best_key = None
        for i, entry in enumerate(ns.entries):
            key = (self._scratch[i], -entry.last_hit_at, -entry.seq)
            if best_key is None or key < best_key:
                best, best_key = entry, key
        if best_key[0] <= self.config.similarity_threshold:
            return best, best_key[0]
        return None, 0.0

    def insert(self, descriptor: Descriptor, result: bytes, now: int) -> InsertOutcome:
        """Store ``result`` under ``descriptor``, evicting LRU entries to fit.

        An entry with an identical key (bytewise-equal hash, or a vector
        at distance exactly zero, i.e. componentwise equal) has its
        result replaced in place. A result larger than the whole cache
        is rejected without evicting anything.
        """
        if len(result) == 0:
            raise InvalidParameter("result payload must be non-empty")
        size = len(result)
        with self._lock:
            if size > self.config.capacity_bytes:
                return InsertOutcome.REJECTED_TOO_LARGE
            existing = self._entries.get(descriptor)
            if existing is not None:
                self._bytes += size - len(existing.result)
                existing.result = result
                existing.inserted_at = now
                existing.last_hit_at = now
                existing.seq = self._seq
                self._seq += 1
                self._entries.move_to_end(descriptor)
                outcome = InsertOutcome.REPLACED
            else:
                entry = CacheEntry(descriptor, result, now, self._seq)
                self._seq += 1
                self._entries[descriptor] = entry
                if descriptor.kind.uses_vector_key:
                    self._vectors[descriptor.kind].add(entry)
                self._bytes += size
                outcome = InsertOutcome.INSERTED
            self._insertions += 1
            while self._bytes > self.config.capacity_bytes:
                self._evict_lru()
            return outcome

    def _evict_lru(self):
        victim_key, victim = next(iter(self._entries.items()))
        del self._entries[victim_key]
        if victim_key.kind.uses_vector_key:
            self._vectors[victim_key.kind].remove(victim)
        self._bytes -= len(victim.result)
        self._evictions += 1

    def stats(self) -> CacheStats:
        with self._lock:
            return CacheStats(
                lookups=self._lookups,
                hits=self._hits,
                misses=self._misses,
                insertions=self._insertions,
                evictions=self._evictions,
                bytes_resident=self._bytes,
            )

    def entries(self):
        """Snapshot of live entries in recency order (LRU first)."""
        with self._lock:
            return list(self._entries.values())
