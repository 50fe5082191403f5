"""End-to-end model generation: network, buildings, demand, plants,
sizing and optional clustering, in the workflow order.

The CLI wraps these functions; they are equally usable from Python.
All inputs are read up front so every export carries the complete
provenance (seed, config hash, input digests).
"""

from __future__ import annotations

import hashlib
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import assemble, demand, exports, hydro, ingest, rastermap, simplify
from .config import RunConfig
from .errors import InputError
from .geo import GeoPoint, Projection, bounding_box_center
from .netgraph import NetworkGraph, NodeKind

log = logging.getLogger(__name__)


def _read_text(path: Path | None, role: str) -> str:
    if path is None:
        raise InputError(f"{role} input is not configured")
    if not path.is_file():
        raise InputError(f"{role} file not found: {path}")
    return path.read_text()


def _read_bytes(path: Path | None, role: str) -> bytes:
    if path is None:
        raise InputError(f"{role} input is not configured")
    if not path.is_file():
        raise InputError(f"{role} file not found: {path}")
    return path.read_bytes()


def _digest(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()[:16]


@dataclass
class BuildResult:
    graph: NetworkGraph
    proj: Projection
    profiles: demand.BuildingProfiles
    provenance: exports.Provenance
    events: exports.RunEvents
    snapshots: list[tuple[str, str]] = field(default_factory=list)
    extracted: list[list[GeoPoint]] | None = None


def extract_raster_network(config: RunConfig) -> tuple[list[list[GeoPoint]], Projection]:
    """Run the raster extraction chain configured under network.raster."""
    raster_cfg = config.network_raster
    if raster_cfg is None:
        raise InputError("no raster network source configured")
    raster = rastermap.RasterMap.from_png(_read_bytes(raster_cfg.png, "raster map"))
    control_points = rastermap.load_control_points(
        _read_text(raster_cfg.control_points, "control points"), str(raster_cfg.control_points)
    )
    if not control_points:
        raise InputError(f"{raster_cfg.control_points}: no control points")
    proj = Projection(bounding_box_center([cp.geo for cp in control_points]))
    polylines = rastermap.extract_network(
        raster, control_points, raster_cfg.color, raster_cfg.tolerance, proj, raster_cfg.dilation
    )
    return polylines, proj


def _network_from_config(config: RunConfig, inputs: dict[str, str]):
    """Load the configured network source into a junction graph."""
    extracted = None
    if config.network_kml is not None:
        text = _read_text(config.network_kml, "network KML")
        inputs["network_kml"] = _digest(text.encode("utf-8"))
        polylines = ingest.parse_kml(text, str(config.network_kml))
        if not polylines:
            raise InputError(f"{config.network_kml}: no LineString geometry found")
        proj = Projection(bounding_box_center([p for line in polylines for p in line]))
    elif config.network_raster is not None:
        inputs["network_png"] = _digest(_read_bytes(config.network_raster.png, "raster map"))
        inputs["control_points"] = _digest(
            _read_bytes(config.network_raster.control_points, "control points")
        )
        polylines, proj = extract_raster_network(config)
        extracted = polylines
    else:
        text = _read_text(config.network_graph, "network graph")
        inputs["network_graph"] = _digest(text.encode("utf-8"))
        g, proj, _ = exports.import_graph_json(text, str(config.network_graph))
        return g, proj, extracted
    plane = [proj.project_path(line) for line in polylines]
    g = ingest.polylines_to_graph(plane, config.snap_tolerance)
    return g, proj, extracted


def _clone_graph(g: NetworkGraph, proj: Projection) -> NetworkGraph:
    clone, _, _ = exports.import_graph_json(exports.export_graph_json(g, proj))
    return clone


def build_model(config: RunConfig, want_snapshots: bool = False) -> BuildResult:
    """Stages: network ingest, buffer filter, connection sampling,
    construction years, demand completion, building and plant
    attachment. Returns the connected model plus its demand profiles."""
    events = exports.RunEvents()
    inputs: dict[str, str] = {}
    t0 = time.perf_counter()

    g, proj, extracted = _network_from_config(config, inputs)
    components = g.connected_components()
    if len(components) > 1:
        events.notes.append(f"network has {len(components)} disconnected components")
    log.info("network: %d junctions, %d edges", g.num_nodes(), g.num_edges())

    buildings_text = _read_text(config.buildings, "buildings")
    inputs["buildings"] = _digest(buildings_text.encode("utf-8"))
    buildings = ingest.load_buildings(buildings_text, str(config.buildings))
    assemble.project_buildings(buildings, proj)

    blocks: list[ingest.BlockRecord] = []
    if config.blocks is not None:
        blocks_text = _read_text(config.blocks, "blocks")
        inputs["blocks"] = _digest(blocks_text.encode("utf-8"))
        blocks = assemble.project_blocks(ingest.load_blocks(blocks_text, str(config.blocks)), proj)

    census: list[ingest.CensusCell] = []
    if config.census is not None:
        census_text = _read_text(config.census, "census")
        inputs["census"] = _digest(census_text.encode("utf-8"))
        census = ingest.load_census(census_text, str(config.census))

    plants: list[ingest.PlantRecord] = []
    if config.plants is not None:
        plants_text = _read_text(config.plants, "plants")
        inputs["plants"] = _digest(plants_text.encode("utf-8"))
        plants = assemble.project_plants(ingest.load_plants(plants_text, str(config.plants)), proj)

    weather_text = _read_text(config.weather, "weather")
    inputs["weather"] = _digest(weather_text.encode("utf-8"))
    weather = ingest.load_weather(weather_text, str(config.weather))

    provenance = exports.Provenance(config.seed, config.config_hash, inputs)
    snapshots: list[tuple[str, str]] = []
    if want_snapshots:
        snapshots.append(("step1_network", exports.export_graph_json(g, proj, provenance)))

    kept = assemble.filter_by_buffer(g, buildings, config.buffer_threshold)
    log.info("buffer %.0f m: %d of %d buildings kept", config.buffer_threshold, len(kept), len(buildings))
    if want_snapshots:
        staged = _clone_graph(g, proj)
        for b in kept:
            staged.add_node(f"b_{b.id}", NodeKind.BUILDING, b.centroid, {"usage_type": b.usage_type})
        snapshots.append(("step2_buffered_buildings", exports.export_graph_json(staged, proj, provenance)))

    connected = assemble.sample_connections(kept, blocks, config.assembly_config())
    log.info("connection sampling: %d of %d buildings connected", len(connected), len(kept))

    if census or any(b.construction_year is not None for b in connected):
        assemble.assign_construction_years(connected, census)
    else:
        events.notes.append("construction years unavailable (no census data, no explicit years)")

    for b in connected:
        b.annual_demand = demand.complete_annual_demand(b, config.demand.specific_demand)

    profiles = demand.BuildingProfiles(
        weather, config.demand.slp_params, config.demand.calendar_year
    )
    for b in connected:
        profiles.register(f"b_{b.id}", b.usage_type, b.annual_demand)

    node_ids = assemble.attach_buildings(g, connected)
    for node_id in node_ids:
        g.nodes[node_id].attrs["nominal_load"] = profiles.peak(node_id)

    attached, skipped = assemble.attach_plants(g, plants, config.plant_attach_max)
    events.skipped_plants = skipped
    if not attached:
        events.notes.append("no plants attached; the model cannot be sized")
    if want_snapshots:
        snapshots.append(("step3_connected", exports.export_graph_json(g, proj, provenance)))

    log.info("build finished in %.2f s", time.perf_counter() - t0)
    return BuildResult(g, proj, profiles, provenance, events, snapshots, extracted)


def load_sizing_catalog(config: RunConfig, inputs: dict[str, str] | None = None):
    if config.catalog is not None:
        text = _read_text(config.catalog, "pipe catalog")
        if inputs is not None:
            inputs["catalog"] = _digest(text.encode("utf-8"))
        return tuple(ingest.load_catalog(text, str(config.catalog)))
    return hydro.default_catalog()


def size_model(g: NetworkGraph, config: RunConfig, events: exports.RunEvents) -> hydro.SizingSummary:
    """Route nominal flows and assign catalog diameters in place."""
    t0 = time.perf_counter()
    catalog = load_sizing_catalog(config)
    summary = hydro.size_network(g, config.sizing_config(catalog), config.fluid)
    events.flagged_edges = summary.flagged_edges
    log.info(
        "sizing finished in %.2f s (%d flagged edges)",
        time.perf_counter() - t0,
        summary.flagged_count,
    )
    return summary


def profiles_from_graph(g: NetworkGraph, config: RunConfig) -> demand.BuildingProfiles:
    """Rebuild building profiles from node attributes, for runs that
    start from an imported graph document."""
    weather = ingest.load_weather(_read_text(config.weather, "weather"), str(config.weather))
    profiles = demand.BuildingProfiles(
        weather, config.demand.slp_params, config.demand.calendar_year
    )
    for node in g.nodes_of_kind(NodeKind.BUILDING):
        try:
            profiles.register(node.id, node.attrs["usage_type"], float(node.attrs["annual_demand"]))
        except KeyError as exc:
            raise InputError(
                f"building node {node.id!r} lacks the {exc.args[0]!r} attribute needed for clustering"
            ) from None
    return profiles


def cluster_model(
    g: NetworkGraph,
    config: RunConfig,
    profiles,
    proj: Projection,
    provenance: exports.Provenance,
    events: exports.RunEvents,
    snapshots: list[tuple[str, str]] | None = None,
):
    """Contract pass-through junctions (optional) and aggregate the
    building nodes into config.cluster.k consumer nodes."""
    settings = config.cluster
    if settings is None:
        raise InputError("clustering requested but no cluster section configured")
    t0 = time.perf_counter()
    if settings.contract_degree2:
        simplify.contract_degree2(g)
        if snapshots is not None:
            snapshots.append(("step4_simplified", exports.export_graph_json(g, proj, provenance)))
    points = {n.id: n.pos for n in g.nodes_of_kind(NodeKind.BUILDING)}
    assignment = simplify.kmeans(points, settings.to_cluster_config(config.seed))
    _, consumer_profiles = simplify.aggregate_clusters(g, assignment, profiles)
    if snapshots is not None:
        snapshots.append(("step5_clustered", exports.export_graph_json(g, proj, provenance)))
    events.notes.append(
        f"clustered {len(points)} buildings into {len(assignment.centroids)} consumer nodes"
    )
    log.info("clustering finished in %.2f s", time.perf_counter() - t0)
    return consumer_profiles


def run_pipeline(
    config: RunConfig,
    *,
    want_snapshots: bool = False,
    no_cluster: bool = False,
    cluster_before_sizing: bool = False,
) -> dict[str, Path]:
    """Full run: build, size, optional clustering, render and report.

    Returns the written artifact paths. Outputs are byte-identical
    across runs with the same config and seed.
    """
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    written: dict[str, Path] = {}

    def write(name: str, content: str) -> None:
        path = out / name
        path.write_text(content)
        written[name] = path

    result = build_model(config, want_snapshots)
    g, proj = result.graph, result.proj
    if result.extracted is not None:
        write("extracted_network.geojson", exports.dump_polylines_geojson(result.extracted))
    write("model.json", exports.export_graph_json(g, proj, result.provenance))

    do_cluster = (config.cluster is not None) and not no_cluster
    snapshots = result.snapshots if want_snapshots else None
    if do_cluster and cluster_before_sizing:
        cluster_model(
            g, config, result.profiles, proj, result.provenance, result.events, snapshots
        )
    size_model(g, config, result.events)
    write("model_sized.json", exports.export_graph_json(g, proj, result.provenance))
    if do_cluster and not cluster_before_sizing:
        cluster_model(
            g, config, result.profiles, proj, result.provenance, result.events, snapshots
        )
    if do_cluster:
        write("model_clustered.json", exports.export_graph_json(g, proj, result.provenance))

    write("model.geojson", exports.export_geojson(g, proj, result.provenance))
    write("model.svg", exports.render_svg(g))
    write("report.txt", exports.summarize(g, result.events, result.provenance))
    if want_snapshots:
        snap_dir = out / "snapshots"
        snap_dir.mkdir(exist_ok=True)
        for name, content in result.snapshots:
            path = snap_dir / f"{name}.json"
            path.write_text(content)
            written[f"snapshots/{name}.json"] = path
    return written
