"""Command-line entry points.

    edgecache run        --config FILE [--seed N] [--out DIR]
    edgecache gen-trace  --config FILE --out FILE
    edgecache serve-edge  --listen ADDR --cloud ADDR --config FILE
    edgecache serve-cloud --listen ADDR --config FILE
    edgecache replay     --edge ADDR --trace FILE [--out DIR]

Exit status is 0 only when every internal invariant check passed;
config problems exit 2, runtime/invariant failures exit 1.
"""

import argparse
import sys

from .errors import ConfigError, EdgeCacheError
from .wire import DEFAULT_CLOUD_PORT, DEFAULT_EDGE_PORT


def _addr(text: str, default_port: int):
    if ":" not in text:
        return text or "127.0.0.1", default_port
    host, _, port = text.rpartition(":")
    return host or "127.0.0.1", int(port) if port else default_port


def _build_parser():
    parser = argparse.ArgumentParser(prog="edgecache")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a simulated scenario (baseline + cached arms)")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int, default=None, help="override the workload seed")
    run.add_argument("--out", default=None, help="directory for CSV reports")

    gen = sub.add_parser("gen-trace", help="generate a workload trace file")
    gen.add_argument("--config", required=True)
    gen.add_argument("--out", required=True)

    edge = sub.add_parser("serve-edge", help="run the caching edge tier")
    edge.add_argument("--listen", default=f"127.0.0.1:{DEFAULT_EDGE_PORT}")
    edge.add_argument("--cloud", default=f"127.0.0.1:{DEFAULT_CLOUD_PORT}")
    edge.add_argument("--config", required=True)

    cloud = sub.add_parser("serve-cloud", help="run the cloud tier")
    cloud.add_argument("--listen", default=f"127.0.0.1:{DEFAULT_CLOUD_PORT}")
    cloud.add_argument("--config", required=True)

    replay = sub.add_parser("replay", help="replay a trace file against a live edge")
    replay.add_argument("--edge", default=f"127.0.0.1:{DEFAULT_EDGE_PORT}")
    replay.add_argument("--trace", required=True)
    replay.add_argument("--out", default=None)
    return parser


def _cmd_run(args) -> int:
    from .harness import run_scenario
    from .scenario import load_raw

    report = run_scenario(load_raw(args.config), seed=args.seed, out_dir=args.out)
    for point in report.points:
        label = "" if point.sweep_path is None else f" {point.sweep_path}={point.sweep_value}"
        s = point.summaries["all"]
        print(
            f"point {point.index}{label}: requests={s.requests} hit_rate={s.hit_rate:.4f} "
            f"precision={s.precision:.4f} mean={s.cached.mean_us / 1000:.3f}ms "
            f"baseline={s.baseline.mean_us / 1000:.3f}ms reduction={s.reduction * 100:.2f}%"
        )
    print("all invariant checks passed")
    return 0


def _cmd_gen_trace(args) -> int:
    from .scenario import load_config
    from .workload import generate_trace, save_trace

    config = load_config(args.config)
    trace = generate_trace(config.workload)
    save_trace(trace, args.out)
    print(f"wrote {len(trace)} requests to {args.out}")
    return 0


def _cmd_serve_edge(args) -> int:
    from .netmode import EdgeServer
    from .scenario import load_config

    server = EdgeServer(_addr(args.listen, DEFAULT_EDGE_PORT), _addr(args.cloud, DEFAULT_CLOUD_PORT), load_config(args.config))
    print(f"edge listening on {server.server_address}, cloud at {server.cloud_addr}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def _cmd_serve_cloud(args) -> int:
    from .netmode import CloudServer
    from .scenario import load_config

    server = CloudServer(_addr(args.listen, DEFAULT_CLOUD_PORT), load_config(args.config))
    print(f"cloud listening on {server.server_address}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def _cmd_replay(args) -> int:
    from .netmode import replay_trace
    from .sim import ServedFrom
    from .workload import load_trace

    records = replay_trace(_addr(args.edge, DEFAULT_EDGE_PORT), load_trace(args.trace), out_dir=args.out)
    hits = sum(1 for r in records if r.served_from is ServedFrom.EDGE)
    mean_ms = sum(r.latency_us for r in records) / len(records) / 1000 if records else 0.0
    print(f"replayed {len(records)} requests: {hits} edge hits, mean latency {mean_ms:.3f}ms")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "gen-trace": _cmd_gen_trace,
    "serve-edge": _cmd_serve_edge,
    "serve-cloud": _cmd_serve_cloud,
    "replay": _cmd_replay,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except EdgeCacheError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
