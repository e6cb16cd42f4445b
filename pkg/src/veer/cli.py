"""Command-line entry points: run one scenario, run a suite, serve teleop."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .controller import Method
from .harness import run_scenario, override_scenario
from .scenario import ScenarioError, resolve_scenario


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("config", help="scenario YAML path or bundled scenario name")
    p.add_argument("--method", choices=[m.value for m in Method], default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", type=Path, default=None, help="directory for metrics/trace files")
    p.add_argument("--ticks", type=int, default=None, help="hard tick limit")
    p.add_argument("--headless", action="store_true", help="suppress progress output")


def _run_one(args) -> int:
    scenario = resolve_scenario(args.config)
    scenario = override_scenario(
        scenario,
        method=Method(args.method) if args.method else None,
        seed=args.seed,
    )
    result = run_scenario(scenario, out_dir=args.out, max_ticks=args.ticks)
    m = result.metrics
    if not args.headless:
        for line in m.deterministic_lines():
            print(line)
        print(
            f"compute_ms min/avg/max = "
            f"{m.compute_min_ms:.1f}/{m.compute_avg_ms:.1f}/{m.compute_max_ms:.1f}"
        )
    return 0 if m.success != "COLLISION" else 1


def _run_suite(args) -> int:
    configs = sorted(Path(args.dir).glob("*.yaml"))
    if not configs:
        print(f"no scenario files in {args.dir}", file=sys.stderr)
        return 2
    rows = []
    collided = False
    for cfg in configs:
        scenario = resolve_scenario(cfg)
        result = run_scenario(scenario, out_dir=args.out)
        m = result.metrics
        collided |= m.success == "COLLISION"
        rows.append(m)
        print(
            f"{m.name:<24} {m.method:<16} {m.success:<14} "
            f"v_avg={m.v_avg:6.2f}  d_min={m.d_min:6.2f}  d_avg={m.d_avg:6.2f}  "
            f"t={m.t_flight:6.1f}s"
        )
    print(f"\n{len(rows)} runs, {sum(r.success == 'COLLISION' for r in rows)} collisions")
    return 1 if collided else 0


def _serve(args) -> int:
    import uvicorn

    from .teleop import create_app

    scenario = resolve_scenario(args.config)
    app = create_app(scenario, rate_multiplier=args.rate_multiplier)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="veer", description="LiDAR range-image obstacle avoidance test bench"
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    run_p = sub.add_parser("run", help="run one scenario to completion")
    _add_run_args(run_p)
    run_p.set_defaults(fn=_run_one)

    suite_p = sub.add_parser("suite", help="run every scenario YAML in a directory")
    suite_p.add_argument("dir")
    suite_p.add_argument("--out", type=Path, default=None)
    suite_p.set_defaults(fn=_run_suite)

    serve_p = sub.add_parser("serve", help="serve the teleoperation session")
    serve_p.add_argument("config", nargs="?", default="gap")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8000)
    serve_p.add_argument("--rate-multiplier", type=float, default=1.0)
    serve_p.set_defaults(fn=_serve)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
