"""Command line interface.

Subcommands mirror the pipeline stages: extract, build, size, cluster,
render, report and pipeline. Every run is driven by a YAML config
file; --seed and --out override the file. Exit codes: 0 success, 2
input or configuration error, 3 model infeasibility.

Set DHFORGE_LOG=debug|info|warning to control verbosity.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import exports, pipeline
from .config import RunConfig, load_config
from .errors import InfeasibleModelError, InputError

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3


def _configure_logging() -> None:
    level_name = os.environ.get("DHFORGE_LOG", "warning").upper()
    level = getattr(logging, level_name, logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _load(args) -> RunConfig:
    return load_config(args.config, seed=args.seed, output_dir=args.out)


def _pick_graph(args, config: RunConfig) -> Path:
    """Explicit --graph wins; otherwise the newest pipeline stage file."""
    if args.graph is not None:
        return Path(args.graph)
    for name in ("model_clustered.json", "model_sized.json", "model.json"):
        candidate = config.output_dir / name
        if candidate.is_file():
            return candidate
    raise InputError(
        f"no graph document found under {config.output_dir}; run 'dhforge build' or pass --graph"
    )


def _import_graph(path: Path):
    if not path.is_file():
        raise InputError(f"graph file not found: {path}")
    return exports.import_graph_json(path.read_text(), str(path))


def _write(path: Path, content: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(content)
    print(path)


def cmd_extract(args) -> int:
    config = _load(args)
    polylines, _ = pipeline.extract_raster_network(config)
    if not polylines:
        log.warning("extraction produced no polylines (no pixels matched the target color)")
    _write(config.output_dir / "extracted_network.geojson", exports.dump_polylines_geojson(polylines))
    return EXIT_OK


def cmd_build(args) -> int:
    config = _load(args)
    result = pipeline.build_model(config, want_snapshots=args.snapshots)
    out = config.output_dir
    if result.extracted is not None:
        _write(out / "extracted_network.geojson", exports.dump_polylines_geojson(result.extracted))
    _write(out / "model.json", exports.export_graph_json(result.graph, result.proj, result.provenance))
    if args.snapshots:
        for name, content in result.snapshots:
            _write(out / "snapshots" / f"{name}.json", content)
    return EXIT_OK


def cmd_size(args) -> int:
    config = _load(args)
    g, proj, provenance = _import_graph(_pick_graph(args, config))
    events = exports.RunEvents()
    pipeline.size_model(g, config, events)
    _write(config.output_dir / "model_sized.json", exports.export_graph_json(g, proj, provenance))
    return EXIT_OK


def cmd_cluster(args) -> int:
    config = _load(args)
    if config.cluster is None:
        raise InputError("config has no cluster section")
    g, proj, provenance = _import_graph(_pick_graph(args, config))
    profiles = pipeline.profiles_from_graph(g, config)
    events = exports.RunEvents()
    pipeline.cluster_model(g, config, profiles, proj, provenance, events)
    _write(config.output_dir / "model_clustered.json", exports.export_graph_json(g, proj, provenance))
    return EXIT_OK


def cmd_render(args) -> int:
    config = _load(args)
    g, _, _ = _import_graph(_pick_graph(args, config))
    _write(config.output_dir / "model.svg", exports.render_svg(g))
    return EXIT_OK


def cmd_report(args) -> int:
    config = _load(args)
    g, _, provenance = _import_graph(_pick_graph(args, config))
    text = exports.summarize(g, provenance=provenance)
    _write(config.output_dir / "report.txt", text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_pipeline(args) -> int:
    config = _load(args)
    written = pipeline.run_pipeline(
        config,
        want_snapshots=args.snapshots,
        no_cluster=args.no_cluster,
        cluster_before_sizing=args.cluster_before_sizing,
    )
    for path in written.values():
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dhforge",
        description="Generate graph-based district heating system models from open geodata.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func, help_text: str, graph_arg: bool = False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="YAML run configuration")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="override the output directory")
        if graph_arg:
            p.add_argument("--graph", default=None, help="graph JSON to operate on")
        p.set_defaults(func=func)
        return p

    add("extract", cmd_extract, "extract network polylines from a raster map")
    p_build = add("build", cmd_build, "build the connected model from the configured inputs")
    p_build.add_argument("--snapshots", action="store_true", help="write per-stage graph documents")
    add("size", cmd_size, "assign nominal flows and pipe diameters", graph_arg=True)
    add("cluster", cmd_cluster, "aggregate building nodes into consumer nodes", graph_arg=True)
    add("render", cmd_render, "render the model to SVG", graph_arg=True)
    add("report", cmd_report, "print and write the model summary", graph_arg=True)
    p_pipe = add("pipeline", cmd_pipeline, "run build, size, cluster, render and report")
    p_pipe.add_argument("--snapshots", action="store_true", help="write per-stage graph documents")
    p_pipe.add_argument("--no-cluster", action="store_true", help="skip the clustering stage")
    p_pipe.add_argument(
        "--cluster-before-sizing",
        action="store_true",
        help="aggregate consumers before assigning pipe diameters",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InfeasibleModelError as exc:
        print(f"infeasible model: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
