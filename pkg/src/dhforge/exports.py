"""Serialization of the model: GeoJSON, graph JSON, SVG map, report.

Every export is byte-deterministic for a fixed model: features sort by
id, JSON keys sort alphabetically, and floats use repr so geographic
round trips stay lossless. Geographic exports are WGS84; plane
coordinates never leave the process.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import InputError
from .geo import GeoPoint, Projection
from .netgraph import NetworkGraph, NodeKind

SCHEMA_VERSION = "1"


@dataclass
class Provenance:
    """What produced a model: seed, config digest, input file digests."""

    seed: int | None = None
    config_hash: str | None = None
    inputs: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"seed": self.seed, "config_hash": self.config_hash, "inputs": dict(self.inputs)}

    @classmethod
    def from_dict(cls, data: dict) -> "Provenance":
        return cls(
            seed=data.get("seed"),
            config_hash=data.get("config_hash"),
            inputs=dict(data.get("inputs") or {}),
        )


@dataclass
class RunEvents:
    """Noteworthy pipeline events surfaced in the report."""

    skipped_plants: list[str] = field(default_factory=list)
    flagged_edges: list[tuple[str, str]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


def _node_feature(node, proj: Projection) -> dict:
    geo = proj.unproject(node.pos)
    props = {"kind": node.kind.value}
    props.update({k: node.attrs[k] for k in sorted(node.attrs)})
    return {
        "type": "Feature",
        "id": node.id,
        "geometry": {"type": "Point", "coordinates": [geo.lon, geo.lat]},
        "properties": props,
    }


def _edge_feature(edge, g: NetworkGraph, proj: Projection) -> dict:
    a = proj.unproject(g.nodes[edge.u].pos)
    b = proj.unproject(g.nodes[edge.v].pos)
    props = {"u": edge.u, "v": edge.v, "length_m": edge.length}
    if edge.dn is not None:
        props["dn"] = edge.dn
    if edge.inner_diameter is not None:
        props["inner_diameter_m"] = edge.inner_diameter
    if edge.nominal_flow is not None:
        props["nominal_flow_kg_s"] = edge.nominal_flow
    if edge.insulation_class is not None:
        props["insulation_class"] = edge.insulation_class
    return {
        "type": "Feature",
        "geometry": {"type": "LineString", "coordinates": [[a.lon, a.lat], [b.lon, b.lat]]},
        "properties": props,
    }


def export_geojson(g: NetworkGraph, proj: Projection, provenance: Provenance | None = None) -> str:
    """FeatureCollection with one Point per node and one LineString per
    edge, in sorted order. The projection origin travels along as a
    foreign member so the export can be re-imported losslessly."""
    features = [_node_feature(g.nodes[i], proj) for i in sorted(g.nodes)]
    features += [
        _edge_feature(g.get_edge(u, v), g, proj)
        for u, v in sorted(e.key() for e in g.edges())
    ]
    doc = {
        "type": "FeatureCollection",
        "projection_origin": [proj.origin.lon, proj.origin.lat],
        "provenance": (provenance or Provenance()).to_dict(),
        "features": features,
    }
    return json.dumps(doc, indent=1, sort_keys=True)


def import_geojson(text: str, source: str = "<geojson>") -> tuple[NetworkGraph, Projection]:
    """Rebuild a graph from :func:`export_geojson` output."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{source}: invalid JSON: {exc}") from None
    origin = doc.get("projection_origin")
    if not isinstance(origin, list) or len(origin) != 2:
        raise InputError(f"{source}: missing projection_origin")
    proj = Projection(GeoPoint(origin[0], origin[1]))
    g = NetworkGraph()
    edges = []
    for feature in doc.get("features", []):
        gtype = (feature.get("geometry") or {}).get("type")
        props = feature.get("properties") or {}
        if gtype == "Point":
            lon, lat = feature["geometry"]["coordinates"]
            attrs = {k: v for k, v in props.items() if k != "kind"}
            g.add_node(feature["id"], NodeKind(props["kind"]), proj.project(GeoPoint(lon, lat)), attrs)
        elif gtype == "LineString":
            edges.append(props)
    for props in edges:
        g.add_edge(
            props["u"],
            props["v"],
            props["length_m"],
            dn=props.get("dn"),
            inner_diameter=props.get("inner_diameter_m"),
            nominal_flow=props.get("nominal_flow_kg_s"),
            insulation_class=props.get("insulation_class"),
        )
    return g, proj


def dump_polylines_geojson(polylines: list[list[GeoPoint]]) -> str:
    """LineString FeatureCollection for extracted network polylines."""
    features = [
        {
            "type": "Feature",
            "geometry": {
                "type": "LineString",
                "coordinates": [[p.lon, p.lat] for p in line],
            },
            "properties": {"index": i},
        }
        for i, line in enumerate(polylines)
    ]
    return json.dumps({"type": "FeatureCollection", "features": features}, indent=1, sort_keys=True)


def export_graph_json(
    g: NetworkGraph, proj: Projection, provenance: Provenance | None = None
) -> str:
    """Full graph document: nodes with WGS84 positions and attributes,
    edges with lengths and sizing data, plus provenance."""
    nodes = []
    for node_id in sorted(g.nodes):
        node = g.nodes[node_id]
        geo = proj.unproject(node.pos)
        nodes.append(
            {
                "id": node.id,
                "kind": node.kind.value,
                "lon": geo.lon,
                "lat": geo.lat,
                "attrs": {k: node.attrs[k] for k in sorted(node.attrs)},
            }
        )
    edges = []
    for u, v in sorted(e.key() for e in g.edges()):
        edge = g.get_edge(u, v)
        edges.append(
            {
                "u": edge.u,
                "v": edge.v,
                "length_m": edge.length,
                "dn": edge.dn,
                "inner_diameter_m": edge.inner_diameter,
                "nominal_flow_kg_s": edge.nominal_flow,
                "insulation_class": edge.insulation_class,
            }
        )
    doc = {
        "schema_version": SCHEMA_VERSION,
        "projection_origin": {"lon": proj.origin.lon, "lat": proj.origin.lat},
        "provenance": (provenance or Provenance()).to_dict(),
        "nodes": nodes,
        "edges": edges,
    }
    return json.dumps(doc, indent=1, sort_keys=True)


def import_graph_json(text: str, source: str = "<graph>") -> tuple[NetworkGraph, Projection, Provenance]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{source}: invalid JSON: {exc}") from None
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise InputError(f"{source}: unsupported schema_version {version!r}")
    origin = doc.get("projection_origin") or {}
    try:
        proj = Projection(GeoPoint(origin["lon"], origin["lat"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{source}: bad projection_origin: {exc}") from None
    g = NetworkGraph()
    for record in doc.get("nodes", []):
        try:
            g.add_node(
                record["id"],
                NodeKind(record["kind"]),
                proj.project(GeoPoint(record["lon"], record["lat"])),
                dict(record.get("attrs") or {}),
            )
        except (KeyError, ValueError) as exc:
            raise InputError(f"{source}: bad node record: {exc}") from None
    for record in doc.get("edges", []):
        try:
            g.add_edge(
                record["u"],
                record["v"],
                record["length_m"],
                dn=record.get("dn"),
                inner_diameter=record.get("inner_diameter_m"),
                nominal_flow=record.get("nominal_flow_kg_s"),
                insulation_class=record.get("insulation_class"),
            )
        except (KeyError, ValueError) as exc:
            raise InputError(f"{source}: bad edge record: {exc}") from None
    return g, proj, Provenance.from_dict(doc.get("provenance") or {})


@dataclass(frozen=True)
class SvgStyle:
    stroke_min: float = 0.5
    stroke_max: float = 6.0
    building_radius: float = 2.0
    consumer_radius: float = 3.5
    plant_half_width: float = 6.0
    margin_fraction: float = 0.02
    pipe_color: str = "#1f4e79"
    building_color: str = "#d95f02"
    consumer_color: str = "#7b3294"
    plant_color: str = "#c00000"


def _stroke_width(diameter: float | None, d_min: float, d_max: float, style: SvgStyle) -> float:
    if diameter is None or d_max <= d_min:
        return style.stroke_min
    frac = (diameter - d_min) / (d_max - d_min)
    return style.stroke_min + frac * (style.stroke_max - style.stroke_min)


def render_svg(g: NetworkGraph, style: SvgStyle | None = None) -> str:
    """SVG map of the model. Pipe stroke width scales linearly with the
    inner diameter; buildings and consumers are circles, plants are
    squares. Output is deterministic (sorted elements, fixed number
    formatting)."""
    style = style or SvgStyle()
    if not g.nodes:
        return '<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 1 1"/>\n'
    xs = [n.pos.x for n in g.nodes.values()]
    ys = [n.pos.y for n in g.nodes.values()]
    span_x = max(xs) - min(xs) or 1.0
    span_y = max(ys) - min(ys) or 1.0
    margin = style.margin_fraction * max(span_x, span_y)
    x0, y0 = min(xs) - margin, min(ys) - margin
    width, height = span_x + 2 * margin, span_y + 2 * margin
    top = y0 + height

    def sx(x: float) -> str:
        return f"{x - x0:.3f}"

    def sy(y: float) -> str:
        return f"{top - y:.3f}"  # SVG y axis points down

    diameters = [e.inner_diameter for e in g.edges() if e.inner_diameter is not None]
    d_min = min(diameters) if diameters else 0.0
    d_max = max(diameters) if diameters else 0.0

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width:.3f} {height:.3f}">',
        f'<g stroke="{style.pipe_color}" stroke-linecap="round" fill="none">',
    ]
    for u, v in sorted(e.key() for e in g.edges()):
        edge = g.get_edge(u, v)
        a, b = g.nodes[edge.u].pos, g.nodes[edge.v].pos
        w = _stroke_width(edge.inner_diameter, d_min, d_max, style)
        parts.append(
            f'<line x1="{sx(a.x)}" y1="{sy(a.y)}" x2="{sx(b.x)}" y2="{sy(b.y)}" '
            f'stroke-width="{w:.3f}"/>'
        )
    parts.append("</g>")
    for node_id in sorted(g.nodes):
        node = g.nodes[node_id]
        if node.kind is NodeKind.BUILDING:
            parts.append(
                f'<circle cx="{sx(node.pos.x)}" cy="{sy(node.pos.y)}" '
                f'r="{style.building_radius}" fill="{style.building_color}"/>'
            )
        elif node.kind is NodeKind.CONSUMER:
            parts.append(
                f'<circle cx="{sx(node.pos.x)}" cy="{sy(node.pos.y)}" '
                f'r="{style.consumer_radius}" fill="{style.consumer_color}"/>'
            )
        elif node.kind is NodeKind.PLANT:
            half = style.plant_half_width
            parts.append(
                f'<rect x="{float(sx(node.pos.x)) - half:.3f}" y="{float(sy(node.pos.y)) - half:.3f}" '
                f'width="{2 * half}" height="{2 * half}" fill="{style.plant_color}"/>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def summarize(
    g: NetworkGraph,
    events: RunEvents | None = None,
    provenance: Provenance | None = None,
) -> str:
    """Plain-text model statistics: node counts per kind, network
    length, demand totals, the DN histogram and pipeline events."""
    events = events or RunEvents()
    provenance = provenance or Provenance()
    kind_counts = {kind: 0 for kind in NodeKind}
    for node in g.nodes.values():
        kind_counts[node.kind] += 1
    annual_total = sum(
        float(n.attrs.get("annual_demand", 0.0))
        for n in g.nodes.values()
        if n.kind in (NodeKind.BUILDING, NodeKind.CONSUMER)
    )
    dn_hist: dict[str, int] = {}
    dn_diameter: dict[str, float] = {}
    for edge in g.edges():
        if edge.dn is not None:
            dn_hist[edge.dn] = dn_hist.get(edge.dn, 0) + 1
            if edge.inner_diameter is not None:
                dn_diameter[edge.dn] = edge.inner_diameter

    lines = [
        "district heating model summary",
        "==============================",
        f"junctions:        {kind_counts[NodeKind.JUNCTION]}",
        f"buildings:        {kind_counts[NodeKind.BUILDING]}",
        f"plants:           {kind_counts[NodeKind.PLANT]}",
        f"consumers:        {kind_counts[NodeKind.CONSUMER]}",
        f"edges:            {g.num_edges()}",
        f"total length:     {g.total_length() / 1000.0:.3f} km",
        f"annual demand:    {annual_total / 1000.0:.3f} MWh",
    ]
    if dn_hist:
        lines.append("pipe diameters:")
        for dn in sorted(dn_hist, key=lambda d: (dn_diameter.get(d, 0.0), d)):
            lines.append(f"  {dn:<8} {dn_hist[dn]}")
    if events.skipped_plants:
        lines.append(f"skipped plants:   {', '.join(sorted(events.skipped_plants))}")
    if events.flagged_edges:
        keys = ", ".join(f"{u}-{v}" for u, v in sorted(events.flagged_edges))
        lines.append(f"flagged edges (catalog exceeded): {keys}")
    for note in events.notes:
        lines.append(f"note: {note}")
    if provenance.seed is not None:
        lines.append(f"seed:             {provenance.seed}")
    if provenance.config_hash is not None:
        lines.append(f"config hash:      {provenance.config_hash}")
    return "\n".join(lines) + "\n"
