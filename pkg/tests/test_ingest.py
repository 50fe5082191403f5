import json
import random

import pytest

import _toycity
from dhforge.errors import InputError
from dhforge.geo import GeoPoint, PlanePoint, Polyline
from dhforge.ingest import (
    dump_buildings_geojson,
    load_blocks,
    load_buildings,
    load_catalog,
    load_census,
    load_plants,
    load_weather,
    parse_kml,
    polylines_to_graph,
)

KML_HEAD = '<?xml version="1.0"?><kml xmlns="http://www.opengis.net/kml/2.2"><Document>'
KML_TAIL = "</Document></kml>"


def _kml(body: str) -> str:
    return KML_HEAD + body + KML_TAIL


class TestParseKml:
    def test_single_linestring(self):
        text = _kml("<Placemark><LineString><coordinates>7.0,51.5 7.01,51.5</coordinates></LineString></Placemark>")
        lines = parse_kml(text)
        assert len(lines) == 1
        assert lines[0] == [GeoPoint(7.0, 51.5), GeoPoint(7.01, 51.5)]

    def test_multigeometry_yields_two_polylines(self):
        text = _kml(
            "<Placemark><MultiGeometry>"
            "<LineString><coordinates>7.0,51.5 7.01,51.5</coordinates></LineString>"
            "<LineString><coordinates>7.0,51.6 7.01,51.6</coordinates></LineString>"
            "</MultiGeometry></Placemark>"
        )
        assert len(parse_kml(text)) == 2

    def test_altitude_discarded(self):
        text = _kml("<Placemark><LineString><coordinates>7.0,51.5,12.5 7.01,51.5,13.0</coordinates></LineString></Placemark>")
        lines = parse_kml(text)
        assert lines[0][0] == GeoPoint(7.0, 51.5)

    def test_points_and_polygons_ignored(self):
        text = _kml(
            "<Placemark><Point><coordinates>7.0,51.5</coordinates></Point></Placemark>"
            "<Placemark><Polygon><outerBoundaryIs><LinearRing>"
            "<coordinates>7,51 7.1,51 7.1,51.1 7,51</coordinates>"
            "</LinearRing></outerBoundaryIs></Polygon></Placemark>"
        )
        assert parse_kml(text) == []

    def test_non_numeric_coordinate_names_placemark(self):
        text = _kml("<Placemark><LineString><coordinates>7.0,abc 7.01,51.5</coordinates></LineString></Placemark>")
        with pytest.raises(InputError, match="placemark 0"):
            parse_kml(text)

    def test_single_point_linestring_rejected(self):
        text = _kml("<Placemark><LineString><coordinates>7.0,51.5</coordinates></LineString></Placemark>")
        with pytest.raises(InputError, match="fewer than 2"):
            parse_kml(text)

    def test_malformed_xml_rejected(self):
        with pytest.raises(InputError, match="malformed XML"):
            parse_kml("<kml><unclosed")

    def test_toycity_network(self):
        lines = parse_kml(_toycity.kml_text())
        assert len(lines) == 3  # spine + two branch segments


def _line(*pts) -> Polyline:
    return Polyline([PlanePoint(x, y) for x, y in pts])


class TestPolylinesToGraph:
    def test_shared_endpoint_single_component(self):
        g = polylines_to_graph([_line((0, 0), (10, 0)), _line((10, 0), (10, 10))], snap_tol=0.0)
        assert g.num_nodes() == 3
        assert len(g.connected_components()) == 1

    def test_snap_tolerance_merges_close_endpoints(self):
        g = polylines_to_graph([_line((0, 0), (10, 0)), _line((10, 0.5), (10, 10))], snap_tol=1.0)
        assert len(g.connected_components()) == 1

    def test_beyond_tolerance_stays_apart(self):
        g = polylines_to_graph([_line((0, 0), (10, 0)), _line((10, 1.5), (10, 10))], snap_tol=1.0)
        assert len(g.connected_components()) == 2

    def test_duplicate_edges_merged(self):
        g = polylines_to_graph([_line((0, 0), (10, 0)), _line((0, 0), (10, 0))], snap_tol=0.0)
        assert g.num_edges() == 1

    def test_total_length_preserved_without_snapping(self):
        rng = random.Random(13)
        lines = []
        total = 0.0
        for _ in range(20):
            pts = [(rng.uniform(0, 1000), rng.uniform(0, 1000))]
            for _ in range(rng.randint(1, 5)):
                x, y = pts[-1]
                pts.append((x + rng.uniform(1, 50), y + rng.uniform(1, 50)))
            line = _line(*pts)
            lines.append(line)
            total += line.length()
        g = polylines_to_graph(lines, snap_tol=0.0)
        assert g.total_length() == pytest.approx(total, rel=1e-6)

    def test_empty_input_empty_graph(self):
        g = polylines_to_graph([], snap_tol=1.0)
        assert g.num_nodes() == 0


class TestLoadBuildings:
    def test_toycity_buildings(self):
        records = load_buildings(_toycity.buildings_geojson())
        assert len(records) == 13
        by_id = {r.id: r for r in records}
        assert by_id["b01"].annual_demand == 18000.0
        assert by_id["b02"].floor_area == 120.0
        assert by_id["b07"].construction_year == 1975
        assert by_id["b04"].usage_type == "office"

    def test_unknown_usage_rejected(self):
        doc = {
            "type": "FeatureCollection",
            "features": [
                {
                    "type": "Feature",
                    "geometry": {"type": "Polygon", "coordinates": [[[7, 51], [7.1, 51], [7.1, 51.1], [7, 51]]]},
                    "properties": {"id": "x", "usage_type": "castle"},
                }
            ],
        }
        with pytest.raises(InputError, match="usage_type"):
            load_buildings(json.dumps(doc))

    def test_duplicate_id_rejected(self):
        base = json.loads(_toycity.buildings_geojson())
        base["features"].append(base["features"][0])
        with pytest.raises(InputError, match="duplicate"):
            load_buildings(json.dumps(base))

    def test_multipolygon_takes_largest_part(self):
        small = [[[7.0, 51.0], [7.0001, 51.0], [7.0001, 51.0001], [7.0, 51.0]]]
        large = [[[7.0, 51.0], [7.01, 51.0], [7.01, 51.01], [7.0, 51.0]]]
        doc = {
            "type": "FeatureCollection",
            "features": [
                {
                    "type": "Feature",
                    "geometry": {"type": "MultiPolygon", "coordinates": [small, large]},
                    "properties": {"id": "x", "usage_type": "other"},
                }
            ],
        }
        records = load_buildings(json.dumps(doc))
        assert records[0].footprint[0][1].lon == pytest.approx(7.01)

    def test_year_out_of_range_rejected(self):
        doc = json.loads(_toycity.buildings_geojson())
        doc["features"][0]["properties"]["construction_year"] = 1200
        with pytest.raises(InputError, match="construction_year"):
            load_buildings(json.dumps(doc))

    def test_round_trip_identical_records(self):
        records = load_buildings(_toycity.buildings_geojson())
        again = load_buildings(dump_buildings_geojson(records))
        assert again == records


class TestLoadBlocks:
    def test_toycity_blocks(self):
        blocks = load_blocks(_toycity.blocks_geojson())
        assert [b.block_id for b in blocks] == ["A", "B"]
        assert blocks[0].connection_proportion == 0.6
        assert blocks[1].connection_proportion is None

    def test_out_of_range_proportion_rejected(self):
        doc = json.loads(_toycity.blocks_geojson())
        doc["features"][0]["properties"]["connection_proportion"] = 1.2
        with pytest.raises(InputError, match="connection_proportion"):
            load_blocks(json.dumps(doc))


class TestLoadPlants:
    def test_toycity_plants(self):
        plants = load_plants(_toycity.plants_geojson())
        assert len(plants) == 1
        assert plants[0].id == "hp1"
        assert plants[0].capacity == 5000.0

    def test_non_point_geometry_rejected(self):
        doc = json.loads(_toycity.plants_geojson())
        doc["features"][0]["geometry"] = {"type": "Polygon", "coordinates": [[[7, 51], [7.1, 51], [7.1, 51.1], [7, 51]]]}
        with pytest.raises(InputError, match="Point"):
            load_plants(json.dumps(doc))


class TestLoadCensus:
    def test_toycity_census(self):
        cells = load_census(_toycity.census_csv())
        assert len(cells) == len(_toycity.CENSUS_CELLS)
        assert cells[0].grid_x == 1 and cells[0].construction_year == 1955

    def test_duplicate_cell_rejected(self):
        text = "grid_x,grid_y,construction_year\n1,1,1950\n1,1,1960\n"
        with pytest.raises(InputError, match="duplicate"):
            load_census(text)

    def test_year_range_enforced(self):
        with pytest.raises(InputError, match="out of range"):
            load_census("grid_x,grid_y,construction_year\n0,0,1200\n")

    def test_negative_grid_indices_allowed(self):
        cells = load_census("grid_x,grid_y,construction_year\n-3,-1,1950\n")
        assert cells[0].grid_x == -3


class TestLoadCatalog:
    def test_toycity_catalog(self):
        entries = load_catalog(_toycity.catalog_csv())
        assert [e.dn for e in entries] == ["DN50", "DN80", "DN100", "DN150", "DN200"]
        assert entries[0].inner_diameter == 0.054

    def test_non_increasing_diameters_rejected(self):
        text = "dn,inner_diameter_m,roughness_mm\nDN80,0.08,0.1\nDN50,0.054,0.1\n"
        with pytest.raises(InputError, match="strictly increasing"):
            load_catalog(text)

    def test_bad_header_rejected(self):
        with pytest.raises(InputError, match="header"):
            load_catalog("a,b\n1,2\n")


class TestLoadWeather:
    def test_full_year_accepted(self):
        series = load_weather(_toycity.weather_csv())
        assert series.values.shape == (8760,)
        assert series.values[0] == pytest.approx(_toycity.weather_temperature(0))

    def test_short_year_rejected(self):
        lines = _toycity.weather_csv().splitlines()[:-1]
        with pytest.raises(InputError, match="8760"):
            load_weather("\n".join(lines) + "\n")

    def test_out_of_order_hours_rejected(self):
        lines = _toycity.weather_csv().splitlines()
        lines[1], lines[2] = lines[2], lines[1]
        with pytest.raises(InputError, match="in order"):
            load_weather("\n".join(lines) + "\n")

    def test_temperature_range_enforced(self):
        lines = _toycity.weather_csv().splitlines()
        lines[5] = "4,95.0"
        with pytest.raises(InputError, match="out of range"):
            load_weather("\n".join(lines) + "\n")
