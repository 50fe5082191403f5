import math
import random

import pytest

from dhforge.geo import (
    EARTH_RADIUS_M,
    GeoPoint,
    PlanePoint,
    Polygon,
    Polyline,
    Projection,
    bounding_box_center,
    point_segment_distance,
    polygon_centroid_area,
    polygon_contains,
)


class TestProjection:
    def test_origin_maps_to_zero(self):
        proj = Projection(GeoPoint(7.1, 51.5))
        p = proj.project(proj.origin)
        assert p.x == 0.0 and p.y == 0.0

    def test_eastward_offset_matches_formula(self):
        # hand evaluation of x = R * cos(lat0) * dlon_rad at lat0 = 51.5
        proj = Projection(GeoPoint(7.0, 51.5))
        p = proj.project(GeoPoint(7.01, 51.5))
        expected_x = EARTH_RADIUS_M * math.cos(math.radians(51.5)) * math.radians(0.01)
        assert p.x == pytest.approx(expected_x, rel=1e-12)
        assert p.x == pytest.approx(692.2, abs=0.2)
        assert p.y == 0.0

    def test_northward_offset_matches_formula(self):
        proj = Projection(GeoPoint(7.0, 51.5))
        p = proj.project(GeoPoint(7.0, 51.51))
        assert p.y == pytest.approx(EARTH_RADIUS_M * math.radians(0.01), rel=1e-12)
        assert p.x == 0.0

    def test_round_trip_city_scale(self):
        proj = Projection(GeoPoint(7.0, 51.5))
        rng = random.Random(7)
        for _ in range(100):
            p = GeoPoint(7.0 + rng.uniform(-0.3, 0.3), 51.5 + rng.uniform(-0.3, 0.3))
            q = proj.unproject(proj.project(p))
            assert abs(q.lon - p.lon) < 1e-9
            assert abs(q.lat - p.lat) < 1e-9

    def test_invalid_coordinates_rejected(self):
        with pytest.raises(ValueError):
            GeoPoint(181.0, 0.0)
        with pytest.raises(ValueError):
            GeoPoint(0.0, 91.0)
        with pytest.raises(ValueError):
            PlanePoint(float("nan"), 0.0)

    def test_bounding_box_center(self):
        pts = [GeoPoint(7.0, 51.0), GeoPoint(7.4, 51.2), GeoPoint(7.2, 51.1)]
        center = bounding_box_center(pts)
        assert center.lon == pytest.approx(7.2)
        assert center.lat == pytest.approx(51.1)
        with pytest.raises(ValueError):
            bounding_box_center([])


class TestPointSegmentDistance:
    def test_perpendicular_drop(self):
        d, foot = point_segment_distance(PlanePoint(0, 5), PlanePoint(-10, 0), PlanePoint(10, 0))
        assert d == pytest.approx(5.0)
        assert (foot.x, foot.y) == (0.0, 0.0)

    def test_clamped_to_endpoint(self):
        # beyond the b end: plain Pythagoras from (20,5) to (10,0)
        d, foot = point_segment_distance(PlanePoint(20, 5), PlanePoint(-10, 0), PlanePoint(10, 0))
        assert d == pytest.approx(math.hypot(10.0, 5.0))
        assert d == pytest.approx(11.1803, abs=1e-4)
        assert (foot.x, foot.y) == (10.0, 0.0)

    def test_point_on_segment(self):
        d, foot = point_segment_distance(PlanePoint(3, 0), PlanePoint(-10, 0), PlanePoint(10, 0))
        assert d == 0.0
        assert (foot.x, foot.y) == (3.0, 0.0)

    def test_degenerate_segment_rejected(self):
        with pytest.raises(ValueError):
            point_segment_distance(PlanePoint(0, 0), PlanePoint(1, 1), PlanePoint(1, 1))

    def test_clamp_at_a_equals_point_distance(self):
        rng = random.Random(3)
        for _ in range(50):
            a = PlanePoint(rng.uniform(-10, 10), rng.uniform(-10, 10))
            b = PlanePoint(a.x + rng.uniform(1, 5), a.y + rng.uniform(1, 5))
            # point behind a along the reversed direction clamps at a
            p = PlanePoint(a.x - (b.x - a.x), a.y - (b.y - a.y))
            d, foot = point_segment_distance(p, a, b)
            assert d == pytest.approx(p.distance_to(a))
            assert foot.distance_to(a) < 1e-12


def _unit_square():
    return Polygon([PlanePoint(0, 0), PlanePoint(1, 0), PlanePoint(1, 1), PlanePoint(0, 1)])


class TestPolygonCentroidArea:
    def test_unit_square(self):
        centroid, area = polygon_centroid_area(_unit_square())
        assert area == pytest.approx(1.0)
        assert (centroid.x, centroid.y) == (pytest.approx(0.5), pytest.approx(0.5))

    def test_right_triangle(self):
        poly = Polygon([PlanePoint(0, 0), PlanePoint(4, 0), PlanePoint(0, 3)])
        centroid, area = polygon_centroid_area(poly)
        assert area == pytest.approx(6.0)
        assert centroid.x == pytest.approx(4.0 / 3.0)
        assert centroid.y == pytest.approx(1.0)

    def test_square_with_centered_hole(self):
        hole = [PlanePoint(0.25, 0.25), PlanePoint(0.75, 0.25), PlanePoint(0.75, 0.75), PlanePoint(0.25, 0.75)]
        poly = Polygon(_unit_square().exterior, [hole])
        centroid, area = polygon_centroid_area(poly)
        assert area == pytest.approx(0.75)
        assert centroid.x == pytest.approx(0.5)
        assert centroid.y == pytest.approx(0.5)

    def test_zero_area_rejected(self):
        poly = Polygon([PlanePoint(0, 0), PlanePoint(1, 1), PlanePoint(2, 2)])
        with pytest.raises(ValueError):
            polygon_centroid_area(poly)

    def test_area_invariant_under_reversal_and_rotation(self):
        rng = random.Random(11)
        for _ in range(20):
            n = rng.randint(3, 9)
            # star-shaped polygon: strictly increasing angles, random radii
            angles = sorted(rng.uniform(0, 2 * math.pi) for _ in range(n))
            if len(set(angles)) < n:
                continue
            ring = [
                PlanePoint(10 * math.cos(a) * rng.uniform(0.5, 1.5), 10 * math.sin(a) * rng.uniform(0.5, 1.5))
                for a in angles
            ]
            _, base = polygon_centroid_area(Polygon(ring))
            _, reversed_area = polygon_centroid_area(Polygon(ring[::-1]))
            shift = rng.randrange(n)
            _, rotated_area = polygon_centroid_area(Polygon(ring[shift:] + ring[:shift]))
            assert reversed_area == pytest.approx(base, rel=1e-12)
            assert rotated_area == pytest.approx(base, rel=1e-12)

    def test_closed_ring_input_normalized(self):
        ring = [PlanePoint(0, 0), PlanePoint(1, 0), PlanePoint(1, 1), PlanePoint(0, 0)]
        poly = Polygon(ring)
        assert len(poly.exterior) == 3

    def test_too_few_vertices_rejected(self):
        with pytest.raises(ValueError):
            Polygon([PlanePoint(0, 0), PlanePoint(1, 0)])


class TestPolygonContains:
    def test_inside_outside_and_hole(self):
        hole = [PlanePoint(0.4, 0.4), PlanePoint(0.6, 0.4), PlanePoint(0.6, 0.6), PlanePoint(0.4, 0.6)]
        poly = Polygon(_unit_square().exterior, [hole])
        assert polygon_contains(poly, PlanePoint(0.1, 0.1))
        assert not polygon_contains(poly, PlanePoint(1.5, 0.5))
        assert not polygon_contains(poly, PlanePoint(0.5, 0.5))  # inside the hole


class TestPolyline:
    def test_length(self):
        line = Polyline([PlanePoint(0, 0), PlanePoint(3, 4), PlanePoint(3, 10)])
        assert line.length() == pytest.approx(11.0)

    def test_rejects_short_or_degenerate(self):
        with pytest.raises(ValueError):
            Polyline([PlanePoint(0, 0)])
        with pytest.raises(ValueError):
            Polyline([PlanePoint(0, 0), PlanePoint(0, 0)])
