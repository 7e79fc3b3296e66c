"""Experiment configuration: a strict JSON schema for scenarios.

A scenario fixes everything a run needs: the workload, both links, the
per-kind compute and size tables, the cache parameters, and optionally
a one-dimensional sweep. Parsing is deliberately strict -- there are no
silent defaults, a missing or unknown field is a ConfigError naming the
exact path -- so a config file is a complete, reviewable record of what
an experiment measured. Example configs ship under ``configs/``.
"""

import copy
import json
from dataclasses import dataclass
from typing import Optional

from .cache import CacheConfig
from .descriptors import DistanceMetric, TaskKind
from .errors import ConfigError, InvalidParameter
from .latency import KindCompute, KindSizes, LinkSpec
from .workload import WorkloadSpec

_KIND_TOKENS = [k.token for k in TaskKind]


@dataclass(frozen=True)
class SweepSpec:
    path: str
    values: tuple


@dataclass(frozen=True)
class ScenarioConfig:
    workload: WorkloadSpec
    link_mobile_edge: LinkSpec
    link_edge_cloud: LinkSpec
    compute: dict
    sizes: dict
    cache: CacheConfig
    mode: str
    sweep: Optional[SweepSpec]


class _Node:
    """Cursor over one JSON object that tracks its path and rejects
    unknown or missing fields."""

    def __init__(self, obj, path):
        if not isinstance(obj, dict):
            raise ConfigError(path, "expected an object")
        self.obj = obj
        self.path = path
        self._taken = set()

    def child(self, name):
        return _Node(self._get(name), self._sub(name))

    def _sub(self, name):
        return f"{self.path}.{name}" if self.path else name

    def _get(self, name):
        if name not in self.obj:
            raise ConfigError(self._sub(name), "missing required field")
        self._taken.add(name)
        return self.obj[name]

    def number(self, name):
        v = self._get(name)
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(self._sub(name), "expected a number")
        return v

    def integer(self, name):
        v = self._get(name)
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(self._sub(name), "expected an integer")
        return v

    def string(self, name):
        v = self._get(name)
        if not isinstance(v, str):
            raise ConfigError(self._sub(name), "expected a string")
        return v

    def optional(self, name):
        if name not in self.obj:
            return None
        self._taken.add(name)
        return self.obj[name]

    def done(self):
        extra = set(self.obj) - self._taken
        if extra:
            raise ConfigError(self._sub(sorted(extra)[0]), "unknown field")


def _parse_workload(node: _Node) -> WorkloadSpec:
    mix_node = node.child("kind_mix")
    mix = tuple(mix_node.number(tok) for tok in _KIND_TOKENS)
    mix_node.done()
    try:
        spec = WorkloadSpec(
            users=node.integer("users"),
            requests_per_user=node.integer("requests_per_user"),
            catalog_size=node.integer("catalog_size"),
            zipf_s=node.number("zipf_s"),
            kind_mix=mix,
            sigma=node.number("sigma"),
            feature_dim=node.integer("feature_dim"),
            arrival_mode=node.string("arrival_mode"),
            mean_interarrival_ms=node.number("mean_interarrival_ms"),
            seed=node.integer("seed"),
        )
    except InvalidParameter as exc:
        raise ConfigError(node.path, str(exc)) from None
    node.done()
    return spec


def _parse_link(node: _Node) -> LinkSpec:
    try:
        link = LinkSpec(bandwidth_bps=node.number("bandwidth_bps"), propagation_ms=node.number("propagation_ms"))
    except InvalidParameter as exc:
        raise ConfigError(node.path, str(exc)) from None
    node.done()
    return link


def _parse_per_kind(node: _Node, builder):
    table = {}
    for kind in TaskKind:
        sub = node.child(kind.token)
        try:
            table[kind] = builder(sub)
        except InvalidParameter as exc:
            raise ConfigError(sub.path, str(exc)) from None
        sub.done()
    node.done()
    return table


def _parse_cache(node: _Node) -> CacheConfig:
    metric_tok = node.string("metric")
    try:
        metric = DistanceMetric.from_token(metric_tok)
        cfg = CacheConfig(
            similarity_threshold=node.number("similarity_threshold"),
            metric=metric,
            capacity_bytes=node.integer("capacity_bytes"),
        )
    except InvalidParameter as exc:
        raise ConfigError(node.path, str(exc)) from None
    node.done()
    return cfg


def _parse_sweep(raw, path) -> Optional[SweepSpec]:
    if raw is None:
        return None
    if not isinstance(raw, list):
        raise ConfigError(path, "expected a list of sweep entries")
    if len(raw) != 1:
        raise ConfigError(path, "exactly one sweep entry is supported")
    node = _Node(raw[0], f"{path}[0]")
    sweep_path = node.string("path")
    values = node.optional("values")
    if not isinstance(values, list) or not values:
        raise ConfigError(f"{path}[0].values", "expected a non-empty list of numbers")
    for i, v in enumerate(values):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{path}[0].values[{i}]", "expected a number")
    node.done()
    return SweepSpec(path=sweep_path, values=tuple(values))


def parse_config(raw: dict) -> ScenarioConfig:
    root = _Node(raw, "")
    mode = root.string("mode")
    if mode not in ("simulated", "networked"):
        raise ConfigError("mode", "must be 'simulated' or 'networked'")
    config = ScenarioConfig(
        workload=_parse_workload(root.child("workload")),
        link_mobile_edge=_parse_link(root.child("link_mobile_edge")),
        link_edge_cloud=_parse_link(root.child("link_edge_cloud")),
        compute=_parse_per_kind(
            root.child("compute"),
            lambda n: KindCompute(
                cloud_compute_ms=n.number("cloud_compute_ms"),
                edge_lookup_ms=n.number("edge_lookup_ms"),
                client_extract_ms=n.number("client_extract_ms"),
            ),
        ),
        sizes=_parse_per_kind(
            root.child("sizes"),
            lambda n: KindSizes(
                request_descriptor_bytes=n.integer("request_descriptor_bytes"),
                result_bytes=n.integer("result_bytes"),
            ),
        ),
        cache=_parse_cache(root.child("cache")),
        mode=mode,
        sweep=_parse_sweep(root.optional("sweep"), "sweep"),
    )
    root.done()
    for kind in TaskKind:
        if config.sizes[kind].result_bytes < 8:
            raise ConfigError(
                f"sizes.{kind.token}.result_bytes",
                "must be >= 8 (result payloads embed the resolved object id)",
            )
    return config


def load_raw(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(str(path), f"invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(str(path), "top-level config must be an object")
    return raw


def load_config(path) -> ScenarioConfig:
    return parse_config(load_raw(path))


def _set_path(raw: dict, dotted: str, value):
    parts = dotted.split(".")
    node = raw
    for p in parts[:-1]:
        if not isinstance(node, dict) or p not in node:
            raise ConfigError(dotted, "sweep path does not exist in the config")
        node = node[p]
    leaf = parts[-1]
    if not isinstance(node, dict) or leaf not in node:
        raise ConfigError(dotted, "sweep path does not exist in the config")
    if isinstance(node[leaf], bool) or not isinstance(node[leaf], (int, float)):
        raise ConfigError(dotted, "sweep path must point at a numeric field")
    node[leaf] = value


def sweep_points(raw: dict):
    """Expand a raw config into its sweep points.

    Yields (sweep_path, sweep_value, ScenarioConfig); a config without a
    sweep yields a single (None, None, config) point. Each point is
    re-validated from scratch.
    """
    base = parse_config(raw)
    if base.sweep is None:
        return [(None, None, base)]
    points = []
    for value in base.sweep.values:
        point_raw = copy.deepcopy(raw)
        del point_raw["sweep"]
        _set_path(point_raw, base.sweep.path, value)
        points.append((base.sweep.path, value, parse_config(point_raw)))
    return points


def config_with_seed(raw: dict, seed: Optional[int]) -> dict:
    """Copy of ``raw`` with the workload seed overridden (CLI --seed)."""
    if seed is None:
        return raw
    out = copy.deepcopy(raw)
    if isinstance(out.get("workload"), dict):
        out["workload"]["seed"] = seed
    return out
