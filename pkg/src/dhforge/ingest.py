"""Parsers for the vector and tabular input formats.

Every loader either returns fully validated records or raises
:class:`InputError` naming the offending element, so bad rows never
slip through silently. Loaders take file content as text plus a source
label used in error messages.
"""

from __future__ import annotations

import csv
import io
import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass

from .errors import InputError
from .geo import GeoPoint, PlanePoint, Polygon, Polyline
from .netgraph import NetworkGraph, NodeKind

USAGE_TYPES = ("residential", "office", "commercial", "industrial", "other")

GeoRing = list[GeoPoint]


@dataclass
class BuildingRecord:
    id: str
    footprint: list[GeoRing]  # exterior ring first, then holes
    usage_type: str
    floor_area: float | None = None
    annual_demand: float | None = None
    block_id: str | None = None
    construction_year: int | None = None
    # filled by assemble.project_buildings
    plane: Polygon | None = None
    centroid: PlanePoint | None = None


@dataclass
class BlockRecord:
    block_id: str
    polygon: list[GeoRing]
    connection_proportion: float | None = None
    plane: Polygon | None = None


@dataclass(frozen=True)
class CensusCell:
    grid_x: int
    grid_y: int
    construction_year: int


@dataclass
class PlantRecord:
    id: str
    pos: GeoPoint
    name: str
    capacity: float | None = None
    plant_type: str | None = None
    pos_plane: PlanePoint | None = None


# -- KML network files -------------------------------------------------


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def parse_kml(text: str, source: str = "<kml>") -> list[list[GeoPoint]]:
    """Extract every LineString under any Placemark as a geo polyline.

    MultiGeometry children are included; Points and Polygons are
    ignored. Altitude values in coordinate tuples are discarded.
    """
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise InputError(f"{source}: malformed XML: {exc}") from None

    polylines: list[list[GeoPoint]] = []
    pm_index = -1
    for elem in root.iter():
        if _local(elem.tag) != "Placemark":
            continue
        pm_index += 1
        ls_list = [child for child in elem.iter() if _local(child.tag) == "LineString"]
        for ls_index, ls in enumerate(ls_list):
            locus = f"{source}: placemark {pm_index}, linestring {ls_index}"
            coords = next((c for c in ls.iter() if _local(c.tag) == "coordinates"), None)
            if coords is None or not (coords.text or "").strip():
                raise InputError(f"{locus}: missing coordinates")
            points: list[GeoPoint] = []
            tokens = coords.text.split()
            if len(tokens) < 2:
                raise InputError(f"{locus}: fewer than 2 coordinate tuples")
            for token in tokens:
                parts = token.split(",")
                if len(parts) < 2:
                    raise InputError(f"{locus}: bad coordinate tuple {token!r}")
                try:
                    lon, lat = float(parts[0]), float(parts[1])
                except ValueError:
                    raise InputError(f"{locus}: non-numeric coordinate {token!r}") from None
                try:
                    point = GeoPoint(lon, lat)
                except ValueError as exc:
                    raise InputError(f"{locus}: {exc}") from None
                # drop consecutive duplicates; they carry no geometry
                if not points or points[-1] != point:
                    points.append(point)
            if len(points) < 2:
                raise InputError(f"{locus}: degenerate linestring (single distinct point)")
            polylines.append(points)
    return polylines


# -- polylines to graph -------------------------------------------------


class _SnapIndex:
    """Grid-hashed lookup of existing node positions within a tolerance."""

    def __init__(self, tol: float):
        self.tol = tol
        self.cell = tol if tol > 0 else 1.0
        self._cells: dict[tuple[int, int], list[tuple[PlanePoint, str, int]]] = {}
        self._count = 0

    def _key(self, p: PlanePoint) -> tuple[int, int]:
        return (int(p.x // self.cell), int(p.y // self.cell))

    def find(self, p: PlanePoint) -> str | None:
        cx, cy = self._key(p)
        best: tuple[float, int, str] | None = None
        for kx in (cx - 1, cx, cx + 1):
            for ky in (cy - 1, cy, cy + 1):
                for pos, node_id, seq in self._cells.get((kx, ky), ()):
                    d = p.distance_to(pos)
                    if d <= self.tol and (best is None or (d, seq) < best[:2]):
                        best = (d, seq, node_id)
        return best[2] if best else None

    def insert(self, p: PlanePoint, node_id: str) -> None:
        self._cells.setdefault(self._key(p), []).append((p, node_id, self._count))
        self._count += 1


def polylines_to_graph(polylines: list[Polyline], snap_tol: float = 1.0) -> NetworkGraph:
    """Merge projected polylines into a junction graph.

    Vertices within ``snap_tol`` of an already-created node reuse that
    node; consecutive vertices become edges with Euclidean length, and
    duplicate edges collapse to one.
    """
    g = NetworkGraph()
    index = _SnapIndex(snap_tol)
    for pl in polylines:
        prev: str | None = None
        for pt in pl.points:
            node_id = index.find(pt)
            if node_id is None:
                node_id = g.new_node_id("n")
                g.add_node(node_id, NodeKind.JUNCTION, pt)
                index.insert(pt, node_id)
            if prev is not None and prev != node_id and not g.has_edge(prev, node_id):
                g.add_edge(prev, node_id)
            prev = node_id
    return g


# -- GeoJSON loaders -----------------------------------------------------


def _load_feature_collection(text: str, source: str) -> list[dict]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{source}: invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise InputError(f"{source}: expected a GeoJSON FeatureCollection")
    features = doc.get("features")
    if not isinstance(features, list):
        raise InputError(f"{source}: FeatureCollection without a features list")
    return features


def _geo_ring(raw, locus: str) -> GeoRing:
    if not isinstance(raw, list) or len(raw) < 3:
        raise InputError(f"{locus}: ring must be a list of at least 3 positions")
    ring = []
    for pos in raw:
        if not isinstance(pos, list) or len(pos) < 2:
            raise InputError(f"{locus}: bad position {pos!r}")
        try:
            ring.append(GeoPoint(float(pos[0]), float(pos[1])))
        except (TypeError, ValueError) as exc:
            raise InputError(f"{locus}: {exc}") from None
    if ring[0] == ring[-1]:  # store rings open; closure is implied
        ring = ring[:-1]
    if len(ring) < 3:
        raise InputError(f"{locus}: ring has fewer than 3 distinct positions")
    return ring


def _ring_shoelace_deg(ring: GeoRing) -> float:
    area = 0.0
    n = len(ring)
    for i in range(n):
        a, b = ring[i], ring[(i + 1) % n]
        area += a.lon * b.lat - b.lon * a.lat
    return abs(area) / 2.0


def _polygon_rings(geometry: dict, locus: str) -> list[GeoRing]:
    """Rings of a Polygon, or of the largest part of a MultiPolygon."""
    gtype = geometry.get("type")
    coords = geometry.get("coordinates")
    if gtype == "Polygon":
        parts = [coords]
    elif gtype == "MultiPolygon":
        parts = coords
    else:
        raise InputError(f"{locus}: expected Polygon or MultiPolygon, got {gtype!r}")
    if not isinstance(parts, list) or not parts:
        raise InputError(f"{locus}: empty polygon coordinates")
    ring_sets = [[_geo_ring(r, locus) for r in part] for part in parts]
    return max(ring_sets, key=lambda rings: _ring_shoelace_deg(rings[0]))


def _opt_number(props: dict, key: str, locus: str, *, lo=None, hi=None, strict_lo=False):
    value = props.get(key)
    if value is None:
        return None
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise InputError(f"{locus}: {key} must be a number, got {value!r}")
    value = float(value)
    if lo is not None and (value <= lo if strict_lo else value < lo):
        raise InputError(f"{locus}: {key} out of range: {value}")
    if hi is not None and value > hi:
        raise InputError(f"{locus}: {key} out of range: {value}")
    return value


def _req_string(props: dict, key: str, locus: str) -> str:
    value = props.get(key)
    if not isinstance(value, str) or not value:
        raise InputError(f"{locus}: missing required string property {key!r}")
    return value


def load_buildings(text: str, source: str = "<buildings>") -> list[BuildingRecord]:
    records = []
    seen_ids: set[str] = set()
    for i, feature in enumerate(_load_feature_collection(text, source)):
        locus = f"{source}: feature {i}"
        props = feature.get("properties") or {}
        bid = _req_string(props, "id", locus)
        if bid in seen_ids:
            raise InputError(f"{locus}: duplicate building id {bid!r}")
        seen_ids.add(bid)
        usage = _req_string(props, "usage_type", locus)
        if usage not in USAGE_TYPES:
            raise InputError(f"{locus}: unknown usage_type {usage!r}")
        year = props.get("construction_year")
        if year is not None:
            if not isinstance(year, int) or not 1500 <= year <= 2100:
                raise InputError(f"{locus}: construction_year out of range: {year!r}")
        block_id = props.get("block_id")
        if block_id is not None and not isinstance(block_id, str):
            raise InputError(f"{locus}: block_id must be a string")
        records.append(
            BuildingRecord(
                id=bid,
                footprint=_polygon_rings(feature.get("geometry") or {}, locus),
                usage_type=usage,
                floor_area=_opt_number(props, "floor_area_m2", locus, lo=0.0, strict_lo=True),
                annual_demand=_opt_number(props, "annual_demand_kwh", locus, lo=0.0),
                block_id=block_id,
                construction_year=year,
            )
        )
    return records


def load_blocks(text: str, source: str = "<blocks>") -> list[BlockRecord]:
    records = []
    seen: set[str] = set()
    for i, feature in enumerate(_load_feature_collection(text, source)):
        locus = f"{source}: feature {i}"
        props = feature.get("properties") or {}
        block_id = _req_string(props, "block_id", locus)
        if block_id in seen:
            raise InputError(f"{locus}: duplicate block_id {block_id!r}")
        seen.add(block_id)
        records.append(
            BlockRecord(
                block_id=block_id,
                polygon=_polygon_rings(feature.get("geometry") or {}, locus),
                connection_proportion=_opt_number(
                    props, "connection_proportion", locus, lo=0.0, hi=1.0
                ),
            )
        )
    return records


def load_plants(text: str, source: str = "<plants>") -> list[PlantRecord]:
    records = []
    seen: set[str] = set()
    for i, feature in enumerate(_load_feature_collection(text, source)):
        locus = f"{source}: feature {i}"
        props = feature.get("properties") or {}
        pid = _req_string(props, "id", locus)
        if pid in seen:
            raise InputError(f"{locus}: duplicate plant id {pid!r}")
        seen.add(pid)
        geometry = feature.get("geometry") or {}
        if geometry.get("type") != "Point":
            raise InputError(f"{locus}: expected Point geometry")
        coords = geometry.get("coordinates")
        if not isinstance(coords, list) or len(coords) < 2:
            raise InputError(f"{locus}: bad Point coordinates {coords!r}")
        try:
            pos = GeoPoint(float(coords[0]), float(coords[1]))
        except (TypeError, ValueError) as exc:
            raise InputError(f"{locus}: {exc}") from None
        plant_type = props.get("plant_type")
        if plant_type is not None and not isinstance(plant_type, str):
            raise InputError(f"{locus}: plant_type must be a string")
        records.append(
            PlantRecord(
                id=pid,
                pos=pos,
                name=_req_string(props, "name", locus),
                capacity=_opt_number(props, "capacity_kw", locus, lo=0.0, strict_lo=True),
                plant_type=plant_type,
            )
        )
    return records


# -- CSV loaders ----------------------------------------------------------


def _csv_rows(text: str, source: str, header: list[str]) -> list[list[str]]:
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row]
    if not rows:
        raise InputError(f"{source}: empty file")
    if [h.strip() for h in rows[0]] != header:
        raise InputError(f"{source}: expected header {','.join(header)!r}, got {rows[0]!r}")
    return rows[1:]


def load_census(text: str, source: str = "<census>") -> list[CensusCell]:
    cells = []
    seen: set[tuple[int, int]] = set()
    for row_no, row in enumerate(_csv_rows(text, source, ["grid_x", "grid_y", "construction_year"]), start=2):
        locus = f"{source}: row {row_no}"
        try:
            gx, gy, year = int(row[0]), int(row[1]), int(row[2])
        except (ValueError, IndexError):
            raise InputError(f"{locus}: expected three integers, got {row!r}") from None
        if not 1500 <= year <= 2100:
            raise InputError(f"{locus}: construction_year out of range: {year}")
        if (gx, gy) in seen:
            raise InputError(f"{locus}: duplicate census cell ({gx}, {gy})")
        seen.add((gx, gy))
        cells.append(CensusCell(gx, gy, year))
    return cells


def load_catalog(text: str, source: str = "<catalog>"):
    from .hydro import PipeCatalogEntry

    entries = []
    for row_no, row in enumerate(_csv_rows(text, source, ["dn", "inner_diameter_m", "roughness_mm"]), start=2):
        locus = f"{source}: row {row_no}"
        if len(row) < 3 or not row[0].strip():
            raise InputError(f"{locus}: expected dn,inner_diameter_m,roughness_mm, got {row!r}")
        try:
            inner = float(row[1])
            rough = float(row[2])
        except ValueError:
            raise InputError(f"{locus}: non-numeric value in {row!r}") from None
        if inner <= 0.0:
            raise InputError(f"{locus}: inner diameter must be positive: {inner}")
        if rough < 0.0:
            raise InputError(f"{locus}: roughness must be non-negative: {rough}")
        if entries and inner <= entries[-1].inner_diameter:
            raise InputError(f"{locus}: inner diameters must be strictly increasing")
        entries.append(PipeCatalogEntry(dn=row[0].strip(), inner_diameter=inner, roughness=rough))
    if not entries:
        raise InputError(f"{source}: catalog has no entries")
    return entries


def load_weather(text: str, source: str = "<weather>"):
    from .demand import HOURS_PER_YEAR, WeatherSeries

    temps = []
    rows = _csv_rows(text, source, ["hour", "ambient_temp_c"])
    if len(rows) != HOURS_PER_YEAR:
        raise InputError(f"{source}: expected {HOURS_PER_YEAR} rows, got {len(rows)}")
    for row_no, row in enumerate(rows, start=2):
        locus = f"{source}: row {row_no}"
        try:
            hour = int(row[0])
            temp = float(row[1])
        except (ValueError, IndexError):
            raise InputError(f"{locus}: expected hour,temperature, got {row!r}") from None
        if hour != row_no - 2:
            raise InputError(f"{locus}: hours must run 0..{HOURS_PER_YEAR - 1} in order, got {hour}")
        if not -50.0 <= temp <= 60.0:
            raise InputError(f"{locus}: temperature out of range: {temp}")
        temps.append(temp)
    return WeatherSeries(temps)


# -- serialization back out ------------------------------------------------


def dump_buildings_geojson(records: list[BuildingRecord]) -> str:
    """GeoJSON for building records; load_buildings inverts it exactly."""
    features = []
    for r in records:
        props: dict = {"id": r.id, "usage_type": r.usage_type}
        if r.floor_area is not None:
            props["floor_area_m2"] = r.floor_area
        if r.annual_demand is not None:
            props["annual_demand_kwh"] = r.annual_demand
        if r.block_id is not None:
            props["block_id"] = r.block_id
        if r.construction_year is not None:
            props["construction_year"] = r.construction_year
        rings = [[[p.lon, p.lat] for p in ring] + [[ring[0].lon, ring[0].lat]] for ring in r.footprint]
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "Polygon", "coordinates": rings},
                "properties": props,
            }
        )
    return json.dumps({"type": "FeatureCollection", "features": features}, indent=1, sort_keys=True)
