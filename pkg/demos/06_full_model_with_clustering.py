"""
A complete model, end to end
============================

Network, buildings, demand, plant, diameters, then aggregation of the
building nodes into a smaller set of consumer nodes. Writes the SVG
map and the run report next to this script.
"""

import random
from pathlib import Path

import numpy as np

from dhforge.assemble import AssemblyConfig, attach_buildings, attach_plants, filter_by_buffer
from dhforge.demand import DEFAULT_SLP_PARAMS, BuildingProfiles, WeatherSeries
from dhforge.exports import Provenance, RunEvents, render_svg, summarize
from dhforge.geo import GeoPoint, PlanePoint
from dhforge.hydro import FluidProps, SizingConfig, default_catalog, size_network
from dhforge.ingest import BuildingRecord, PlantRecord
from dhforge.netgraph import NetworkGraph, NodeKind
from dhforge.simplify import ClusterConfig, aggregate_clusters, contract_degree2, kmeans

SEED = 7
rng = random.Random(SEED)

# --- 1. the pipe network: a comb of five streets off a trunk ---------
graph = NetworkGraph()
graph.add_node("n0", NodeKind.JUNCTION, PlanePoint(0, 0))
graph.add_node("n1", NodeKind.JUNCTION, PlanePoint(1500, 0))
graph.add_edge("n0", "n1", 1500.0)
for i in range(5):
    x = 250.0 * (i + 1)
    edge, _, foot = graph.nearest_edge(PlanePoint(x, 0.0))
    junction = graph.split_edge(edge, foot)
    top = f"t{i}"
    graph.add_node(top, NodeKind.JUNCTION, PlanePoint(x, 400.0))
    graph.add_edge(junction, top, 400.0)

# --- 2. buildings along the streets ----------------------------------
buildings = []
for i in range(60):
    street = rng.randrange(5)
    x = 250.0 * (street + 1) + rng.uniform(15.0, 70.0) * rng.choice((-1, 1))
    y = rng.uniform(30.0, 380.0)
    b = BuildingRecord(
        id=f"h{i:02d}",
        footprint=[],
        usage_type=rng.choice(["residential", "residential", "office", "commercial"]),
        annual_demand=round(rng.uniform(8_000.0, 45_000.0), 1),
        construction_year=rng.randint(1920, 2010),
    )
    b.centroid = PlanePoint(x, y)
    buildings.append(b)

kept = filter_by_buffer(graph, buildings, threshold=100.0)
attach_buildings(graph, kept)
print(f"{len(kept)} of {len(buildings)} buildings attached")

# --- 3. hourly profiles and design loads -----------------------------
hours = np.arange(8760)
weather = WeatherSeries(10.0 - 12.0 * np.cos(2 * np.pi * hours / 8760)
                        + 3.0 * np.sin(2 * np.pi * (hours % 24) / 24))
profiles = BuildingProfiles(weather, DEFAULT_SLP_PARAMS, calendar_year=2023)
for b in kept:
    node_id = f"b_{b.id}"
    profiles.register(node_id, b.usage_type, b.annual_demand)
    graph.nodes[node_id].attrs["nominal_load"] = profiles.peak(node_id)

# --- 4. plant and pipe diameters --------------------------------------
plant = PlantRecord(id="hp", pos=GeoPoint(0, 0), name="heating plant", capacity=12_000.0)
plant.pos_plane = PlanePoint(-40.0, 20.0)
attach_plants(graph, [plant], max_dist=200.0)
summary = size_network(graph, SizingConfig(catalog=default_catalog()), FluidProps())
print(f"sized {graph.num_edges()} pipes ({summary.flagged_count} beyond the catalog)")

# --- 5. shrink the model: contract pass-throughs, cluster buildings ---
contract_degree2(graph)
points = {n.id: n.pos for n in graph.nodes_of_kind(NodeKind.BUILDING)}
assignment = kmeans(points, ClusterConfig(k=12, seed=SEED))
aggregate_clusters(graph, assignment, profiles)
consumers = graph.nodes_of_kind(NodeKind.CONSUMER)
print(f"clustered {len(points)} buildings into {len(consumers)} consumer nodes")
total = sum(c.attrs["annual_demand"] for c in consumers)
print(f"aggregated annual demand: {total / 1000.0:.1f} MWh (conserved)")

# --- 6. artifacts ------------------------------------------------------
out = Path(__file__).parent
(out / "demo_model.svg").write_text(render_svg(graph))
report = summarize(graph, RunEvents(), Provenance(seed=SEED))
(out / "demo_report.txt").write_text(report)
print(f"\nwrote {out / 'demo_model.svg'} and {out / 'demo_report.txt'}")
print()
print(report)
