"""Experiment driver: baseline vs cached arms over identical traces.

For every sweep point the harness generates the trace, replays it twice
(once with the cache disabled, once enabled), cross-checks each run
against the closed-form latency model, and aggregates per-kind metrics:
hit rate, precision (fraction of edge-served responses whose cached
result belongs to the requested object), nearest-rank percentiles, and
the headline latency reduction of the cached arm over the baseline.

Outputs are deterministic: the same config and seed produce
byte-identical CSV files.
"""

import math
import os
from dataclasses import dataclass
from typing import Optional

from .descriptors import TaskKind
from .errors import MismatchedTraces, SimulationError
from .latency import baseline_latency_ms, hit_latency_ms, miss_latency_ms, round_us
from .scenario import ScenarioConfig, config_with_seed, parse_config, sweep_points
from .sim import ServedFrom, run_simulation
from .workload import generate_trace

BASELINE_ARM = "baseline"
CACHED_ARM = "cached"

REQUEST_CSV_COLUMNS = (
    "arm,request_id,user_id,kind,object_id,issued_at_us,latency_us,served_from,matched_distance"
)
SUMMARY_CSV_COLUMNS = (
    "point,sweep_path,sweep_value,kind,requests,hits,hit_rate,precision,"
    "baseline_mean_us,baseline_p50_us,baseline_p95_us,"
    "cached_mean_us,cached_p50_us,cached_p95_us,reduction"
)


@dataclass(frozen=True)
class ArmStats:
    mean_us: float
    p50_us: int
    p95_us: int


@dataclass(frozen=True)
class KindSummary:
    kind: str  # task-kind token or "all"
    requests: int
    hits: int
    hit_rate: float
    precision: float
    baseline: ArmStats
    cached: ArmStats
    reduction: float


@dataclass(frozen=True)
class PointReport:
    index: int
    sweep_path: Optional[str]
    sweep_value: Optional[float]
    config: ScenarioConfig
    trace_digest: str
    baseline_records: list
    cached_records: list
    cache_stats: object
    summaries: dict  # token -> KindSummary


@dataclass(frozen=True)
class RunReport:
    points: list

    @property
    def summary(self):
        """The 'all' summary of the first (or only) point."""
        return self.points[0].summaries["all"]


def nearest_rank(sorted_values, percentile: float):
    """Nearest-rank percentile: the ceil(p/100 * n)-th smallest value."""
    n = len(sorted_values)
    if n == 0:
        raise ValueError("percentile of empty sequence")
    rank = max(1, math.ceil(percentile / 100.0 * n))
    return sorted_values[min(rank, n) - 1]


def _arm_stats(records) -> ArmStats:
    lat = sorted(r.latency_us for r in records)
    return ArmStats(
        mean_us=sum(lat) / len(lat),
        p50_us=nearest_rank(lat, 50),
        p95_us=nearest_rank(lat, 95),
    )


def _summary_for(token, cached, baseline) -> KindSummary:
    hits = sum(1 for r in cached if r.served_from is ServedFrom.EDGE)
    edge_correct = sum(
        1 for r in cached if r.served_from is ServedFrom.EDGE and r.result_object_id == r.object_id
    )
    base = _arm_stats(baseline)
    cach = _arm_stats(cached)
    reduction = 1.0 - cach.mean_us / base.mean_us if base.mean_us > 0 else 0.0
    return KindSummary(
        kind=token,
        requests=len(cached),
        hits=hits,
        hit_rate=hits / len(cached),
        precision=edge_correct / hits if hits else 1.0,
        baseline=base,
        cached=cach,
        reduction=reduction,
    )


def summarize(cached_records, baseline_records) -> dict:
    """Per-kind aggregates plus an 'all' rollup.

    Both record lists must replay the same trace; anything else is a
    MismatchedTraces error.
    """
    if len(cached_records) != len(baseline_records):
        raise MismatchedTraces("arms ran different request counts")
    for a, b in zip(cached_records, baseline_records):
        if (a.request_id, a.user_id, a.kind, a.object_id, a.issued_at_us) != (
            b.request_id,
            b.user_id,
            b.kind,
            b.object_id,
            b.issued_at_us,
        ):
            raise MismatchedTraces(f"request {a.request_id} differs between arms")
    out = {"all": _summary_for("all", cached_records, baseline_records)}
    for kind in TaskKind:
        cached_k = [r for r in cached_records if r.kind is kind]
        base_k = [r for r in baseline_records if r.kind is kind]
        if cached_k:
            out[kind.token] = _summary_for(kind.token, cached_k, base_k)
    return out


def closed_forms(config: ScenarioConfig, kind: TaskKind):
    """(hit_ms, miss_ms, baseline_ms) for one kind under ``config``."""
    return (
        hit_latency_ms(kind, config.link_mobile_edge, config.compute, config.sizes),
        miss_latency_ms(kind, config.link_mobile_edge, config.link_edge_cloud, config.compute, config.sizes),
        baseline_latency_ms(kind, config.link_mobile_edge, config.link_edge_cloud, config.compute, config.sizes),
    )


def _verify_point(config, cached_records, baseline_records, cache_stats, summaries):
    """Internal consistency checks; violations are fatal."""
    problems = []
    forms = {kind: closed_forms(config, kind) for kind in TaskKind}
    for rec in baseline_records:
        expect = round_us(forms[rec.kind][2])
        if abs(rec.latency_us - expect) > 1:
            problems.append(f"baseline request {rec.request_id}: latency {rec.latency_us} != {expect}")
    for rec in cached_records:
        expect = round_us(forms[rec.kind][0] if rec.served_from is ServedFrom.EDGE else forms[rec.kind][1])
        if abs(rec.latency_us - expect) > 1:
            problems.append(f"cached request {rec.request_id}: latency {rec.latency_us} != {expect}")
    edge_served = sum(1 for r in cached_records if r.served_from is ServedFrom.EDGE)
    if cache_stats.hits != edge_served:
        problems.append(f"cache reports {cache_stats.hits} hits but {edge_served} responses came from the edge")
    if cache_stats.lookups != cache_stats.hits + cache_stats.misses:
        problems.append("cache stats: lookups != hits + misses")
    if cache_stats.lookups != len(cached_records):
        problems.append("cache stats: one lookup per request expected")
    for s in summaries.values():
        if not 0.0 <= s.hit_rate <= 1.0 or not 0.0 <= s.precision <= 1.0:
            problems.append(f"{s.kind}: hit_rate/precision out of range")
    live = [w > 0 for w in config.workload.kind_mix]
    if sum(live) == 1:
        kind = [TaskKind.OBJECT_RECOGNITION, TaskKind.MODEL_RENDER_3D, TaskKind.VR_PANORAMA][live.index(True)]
        hit_ms, miss_ms, _ = forms[kind]
        s = summaries["all"]
        bound = s.hit_rate * (1.0 - hit_ms / miss_ms) + 1e-9
        if s.reduction > bound:
            problems.append(f"reduction {s.reduction} exceeds analytic bound {bound}")
    if problems:
        raise SimulationError("; ".join(problems[:10]))


def run_point(config: ScenarioConfig, index: int = 0, sweep_path=None, sweep_value=None) -> PointReport:
    """Generate the trace for one scenario point and run both arms."""
    trace = generate_trace(config.workload)
    digest_before = trace.digest()
    baseline_records, _ = run_simulation(config, trace, cache_enabled=False)
    cached_records, cache_stats = run_simulation(config, trace, cache_enabled=True)
    if trace.digest() != digest_before:
        raise SimulationError("trace mutated between arms")
    summaries = summarize(cached_records, baseline_records)
    _verify_point(config, cached_records, baseline_records, cache_stats, summaries)
    return PointReport(
        index=index,
        sweep_path=sweep_path,
        sweep_value=sweep_value,
        config=config,
        trace_digest=digest_before,
        baseline_records=baseline_records,
        cached_records=cached_records,
        cache_stats=cache_stats,
        summaries=summaries,
    )


def run_scenario(raw_config: dict, seed: Optional[int] = None, out_dir=None) -> RunReport:
    """Run every sweep point of a raw config dict; optionally write CSVs."""
    raw = config_with_seed(raw_config, seed)
    parse_config(raw)  # validate before any work
    points = []
    for i, (path, value, cfg) in enumerate(sweep_points(raw)):
        if cfg.mode != "simulated":
            raise SimulationError("run_scenario drives simulated mode; use serve/replay for networked runs")
        points.append(run_point(cfg, i, path, value))
    report = RunReport(points=points)
    if out_dir is not None:
        write_reports(report, out_dir)
    return report


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def request_csv_lines(records, arm: str):
    for r in records:
        yield (
            f"{arm},{r.request_id},{r.user_id},{r.kind.token},{r.object_id},"
            f"{r.issued_at_us},{r.latency_us},{r.served_from.token},{_fmt(r.matched_distance)}"
        )


def write_reports(report: RunReport, out_dir) -> None:
    os.makedirs(out_dir, exist_ok=True)
    summary_lines = [SUMMARY_CSV_COLUMNS]
    for point in report.points:
        point_dir = os.path.join(out_dir, f"point_{point.index:03d}")
        os.makedirs(point_dir, exist_ok=True)
        lines = [REQUEST_CSV_COLUMNS]
        lines.extend(request_csv_lines(point.baseline_records, BASELINE_ARM))
        lines.extend(request_csv_lines(point.cached_records, CACHED_ARM))
        with open(os.path.join(point_dir, "requests.csv"), "w", encoding="ascii", newline="") as fh:
            fh.write("\n".join(lines) + "\n")
        for token in ["all"] + [k.token for k in TaskKind]:
            s = point.summaries.get(token)
            if s is None:
                continue
            summary_lines.append(
                f"{point.index},{_fmt(point.sweep_path)},{_fmt(point.sweep_value)},{s.kind},"
                f"{s.requests},{s.hits},{_fmt(s.hit_rate)},{_fmt(s.precision)},"
                f"{_fmt(s.baseline.mean_us)},{s.baseline.p50_us},{s.baseline.p95_us},"
                f"{_fmt(s.cached.mean_us)},{s.cached.p50_us},{s.cached.p95_us},{_fmt(s.reduction)}"
            )
    with open(os.path.join(out_dir, "summary.csv"), "w", encoding="ascii", newline="") as fh:
        fh.write("\n".join(summary_lines) + "\n")
