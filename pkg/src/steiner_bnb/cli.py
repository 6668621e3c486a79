"""Command line front end: solve, enumerate, bench, instances."""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .engine import SolveOptions, enumerate_all, solve_enhanced, solve_original
from .errors import IoError, SteinerError
from .instances import (
    PUBLISHED_COUNTS,
    Instance,
    builtin,
    builtin_instances,
    format_instance,
    parse_instance,
)
from .svg import emit_svg

EXIT_INPUT = 2
# published enhanced/original ratios on random instances: {d: {N: (cpu, topologies)}}
PUBLISHED_RATIOS = {
    2: {8: (0.7228, 0.7261), 9: (0.7760, 0.7672), 10: (0.7853, 0.7727),
        11: (0.7967, 0.7788), 12: (0.7760, 0.7561)},
    3: {8: (0.8682, 0.8565), 9: (0.8544, 0.8527), 10: (0.8304, 0.8409),
        11: (0.8005, 0.8168), 12: (0.7656, 0.7877)},
}

SCHEMES = {"original": solve_original, "enhanced": solve_enhanced}


class InputError(Exception):
    pass


def load_instance(spec: str) -> Instance:
    if spec.startswith("builtin:"):
        try:
            return builtin(spec.split(":", 1)[1])
        except KeyError as exc:
            raise InputError(exc.args[0]) from None
    path = Path(spec)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {spec}: {exc.strerror or exc}") from None
    return parse_instance(text, name=path.stem)


def stats_dict(stats) -> dict:
    d = asdict(stats)
    d["wall_time_s"] = d.pop("wall_time")
    return d


def run_report(inst: Instance, scheme: str, sol, stats, opts: SolveOptions) -> dict:
    return {
        "instance": inst.name,
        "scheme": scheme,
        "length": sol.length,
        "topology": sol.topology,
        "steiner_points": sol.steiner_positions.tolist(),
        "degenerate_pairs": [list(p) for p in sol.degenerate_pairs],
        "stats": stats_dict(stats),
        "options": asdict(opts),
    }


def _write_json(obj, path: str | None) -> None:
    text = json.dumps(obj, indent=2)
    if path is None:
        print(text)
        return
    try:
        Path(path).write_text(text + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _options(args) -> SolveOptions:
    opts = SolveOptions()
    for name in ("collision_eps", "conv_eps", "max_iters"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(opts, name, value)
    if getattr(args, "no_lower_bound", False):
        opts.use_lower_bound = False
    opts.twin_prune = getattr(args, "twin_prune", False)
    opts.error_figure_prune = getattr(args, "error_figure_prune", False)
    opts.optimize_options(False)  # validates the numeric fields
    return opts


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    opts = _options(args)
    sol, stats = SCHEMES[args.scheme](inst.points, opts)
    report = run_report(inst, args.scheme, sol, stats, opts)
    if args.svg:
        emit_svg(sol.tree, args.svg)
    if args.json:
        _write_json(report, args.json)
        print(f"{inst.name}: length {sol.length:.12g}  topology {sol.topology or '()'}")
    else:
        _write_json(report, None)
    return 0


def cmd_enumerate(args) -> int:
    inst = load_instance(args.instance)
    sol, stats = enumerate_all(inst.points, count_only=args.count_only)
    if args.count_only:
        print(stats.leaves_visited)
    else:
        print(f"{stats.leaves_visited} full topologies; minimum {sol.length:.12g} "
              f"at {sol.topology or '()'}")
    return 0


def _bench_instances(args) -> list[Instance]:
    if args.random is not None:
        n, d, count = args.random
        if n < 3 or d < 2 or count < 1:
            raise InputError("--random needs N >= 3, D >= 2, COUNT >= 1")
        rng = np.random.default_rng(args.seed)
        return [Instance(f"random-{i:03d}", rng.uniform(-1.0, 1.0, (n, d))) for i in range(count)]
    if args.directory is None:
        raise InputError("bench needs a directory or --random N D COUNT")
    root = Path(args.directory)
    if not root.is_dir():
        raise InputError(f"{root} is not a directory")
    files = sorted(p for p in root.iterdir() if p.is_file() and not p.name.startswith("."))
    if not files:
        raise InputError(f"no instance files in {root}")
    return [parse_instance(p.read_text(), name=p.stem) for p in files]


def cmd_bench(args) -> int:
    instances = _bench_instances(args)
    rows = []
    print(f"{'instance':<20} {'length':>14} {'cpu o/e [s]':>17} {'bounds o/e':>17} "
          f"{'reorgs':>7} {'published o/e':>17}")
    for inst in instances:
        row = {"instance": inst.name}
        for scheme, fn in SCHEMES.items():
            t0 = time.process_time()
            sol, stats = fn(inst.points, SolveOptions())
            row[scheme] = {"length": sol.length, "topology": sol.topology,
                           "cpu_s": time.process_time() - t0, "stats": stats_dict(stats)}
        o, e = row["original"], row["enhanced"]
        published = PUBLISHED_COUNTS.get(inst.name)
        row["published_counts"] = published
        rows.append(row)
        print(f"{inst.name:<20} {o['length']:>14.9f} "
              f"{o['cpu_s']:>8.2f}/{e['cpu_s']:<8.2f} "
              f"{o['stats']['lower_bounds_computed']:>8}/{e['stats']['lower_bounds_computed']:<8} "
              f"{e['stats']['reorganizations_taken']:>7} "
              f"{(f'{published[0]}/{published[1]}' if published else '-'):>17}")
    cpu_o = sum(r["original"]["cpu_s"] for r in rows)
    cpu_e = sum(r["enhanced"]["cpu_s"] for r in rows)
    lb_o = sum(r["original"]["stats"]["lower_bounds_computed"] for r in rows)
    lb_e = sum(r["enhanced"]["stats"]["lower_bounds_computed"] for r in rows)
    per_lb = [r["enhanced"]["stats"]["lower_bounds_computed"]
              / max(r["original"]["stats"]["lower_bounds_computed"], 1) for r in rows]
    per_cpu = [r["enhanced"]["cpu_s"] / r["original"]["cpu_s"] for r in rows
               if r["original"]["cpu_s"] > 0]
    shapes = {(i.size, i.dimension) for i in instances}
    ref = None
    if len(shapes) == 1:
        (n, d), = shapes
        ref = PUBLISHED_RATIOS.get(d, {}).get(n)
    agg = {
        "instances": len(rows),
        "cpu_ratio": cpu_e / cpu_o if cpu_o > 0 else float("nan"),
        "lower_bound_ratio": lb_e / lb_o if lb_o > 0 else float("nan"),
        "mean_cpu_ratio": float(np.mean(per_cpu)) if per_cpu else float("nan"),
        "mean_topology_ratio": float(np.mean(per_lb)),
        "published_cpu_ratio": ref[0] if ref else None,
        "published_topology_ratio": ref[1] if ref else None,
        "max_length_gap": max(abs(r["original"]["length"] - r["enhanced"]["length"])
                              for r in rows),
    }
    note = f" (published {ref[0]} / {ref[1]})" if ref else ""
    print(f"aggregate: mean cpu ratio {agg['mean_cpu_ratio']:.4f}, "
          f"mean topology ratio {agg['mean_topology_ratio']:.4f}{note}; "
          f"pooled cpu {agg['cpu_ratio']:.4f}, pooled bounds {agg['lower_bound_ratio']:.4f}; "
          f"max length gap {agg['max_length_gap']:.2e}")
    if args.json:
        _write_json({"rows": rows, "aggregate": agg}, args.json)
    return 0


def cmd_instances(args) -> int:
    if args.dump:
        print(format_instance(load_instance("builtin:" + args.dump)), end="")
        return 0
    for inst in builtin_instances():
        print(f"{inst.name:<20} N={inst.size:<3} d={inst.dimension}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="steiner-bnb",
                                description="Exact Euclidean Steiner minimal trees.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve one instance")
    s.add_argument("instance", help="instance file or builtin:NAME")
    s.add_argument("--scheme", choices=sorted(SCHEMES), default="enhanced")
    s.add_argument("--no-lower-bound", action="store_true")
    s.add_argument("--twin-prune", action="store_true")
    s.add_argument("--collision-eps", type=float)
    s.add_argument("--conv-eps", type=float)
    s.add_argument("--max-iters", type=int)
    s.add_argument("--json", metavar="PATH")
    s.add_argument("--svg", metavar="PATH")
    s.add_argument("--error-figure-prune", action="store_true",
                   help="diagnostics: re-enable the unsound 'L - E < L*' pre-optimization test")
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("enumerate", help="visit every full topology")
    e.add_argument("instance")
    e.add_argument("--count-only", action="store_true")
    e.set_defaults(func=cmd_enumerate)

    b = sub.add_parser("bench", help="compare both schemes")
    b.add_argument("directory", nargs="?")
    b.add_argument("--random", nargs=3, type=int, metavar=("N", "D", "COUNT"))
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--json", metavar="PATH")
    b.set_defaults(func=cmd_bench)

    i = sub.add_parser("instances", help="built-in instances")
    g = i.add_mutually_exclusive_group()
    g.add_argument("--list", action="store_true")
    g.add_argument("--dump", metavar="NAME")
    i.set_defaults(func=cmd_instances)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (InputError, SteinerError, IoError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:  # option validation
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
