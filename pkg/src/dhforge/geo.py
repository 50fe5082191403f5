"""Planar geometry and local map projection.

All network computations run on a local plane in meters. Geographic
coordinates (WGS84 lon/lat) only appear at the I/O boundary; a
:class:`Projection` fixed per run converts between the two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

EARTH_RADIUS_M = 6_371_000.0


@dataclass(frozen=True)
class GeoPoint:
    """WGS84 coordinate in degrees."""

    lon: float
    lat: float

    def __post_init__(self):
        if not (-180.0 <= self.lon <= 180.0):
            raise ValueError(f"longitude out of range: {self.lon}")
        if not (-90.0 <= self.lat <= 90.0):
            raise ValueError(f"latitude out of range: {self.lat}")


@dataclass(frozen=True)
class PlanePoint:
    """Point on the local projected plane, meters east (x) / north (y)."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite plane coordinates: ({self.x}, {self.y})")

    def distance_to(self, other: "PlanePoint") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Projection:
    """Equirectangular projection centered on ``origin``.

    x = R * cos(lat0) * dlon_rad, y = R * dlat_rad. Adequate at city
    scale (sub-0.1% distortion within tens of km); every plane
    coordinate of one run must share the same origin.
    """

    origin: GeoPoint

    @property
    def _coslat(self) -> float:
        return math.cos(math.radians(self.origin.lat))

    def project(self, p: GeoPoint) -> PlanePoint:
        x = EARTH_RADIUS_M * self._coslat * math.radians(p.lon - self.origin.lon)
        y = EARTH_RADIUS_M * math.radians(p.lat - self.origin.lat)
        return PlanePoint(x, y)

    def unproject(self, p: PlanePoint) -> GeoPoint:
        lon = self.origin.lon + math.degrees(p.x / (EARTH_RADIUS_M * self._coslat))
        lat = self.origin.lat + math.degrees(p.y / EARTH_RADIUS_M)
        return GeoPoint(lon, lat)

    def project_path(self, points: list[GeoPoint]) -> "Polyline":
        return Polyline([self.project(p) for p in points])

    def project_rings(self, rings: list[list[GeoPoint]]) -> "Polygon":
        projected = [[self.project(p) for p in ring] for ring in rings]
        return Polygon(projected[0], projected[1:])


def bounding_box_center(points: list[GeoPoint]) -> GeoPoint:
    """Center of the lon/lat bounding box; the conventional run origin."""
    if not points:
        raise ValueError("cannot compute center of empty point set")
    lons = [p.lon for p in points]
    lats = [p.lat for p in points]
    return GeoPoint((min(lons) + max(lons)) / 2.0, (min(lats) + max(lats)) / 2.0)


class Polyline:
    """Ordered plane points, length >= 2, no zero-length steps."""

    __slots__ = ("points",)

    def __init__(self, points: list[PlanePoint]):
        if len(points) < 2:
            raise ValueError("polyline needs at least 2 points")
        for a, b in zip(points, points[1:]):
            if a.x == b.x and a.y == b.y:
                raise ValueError("polyline has two identical consecutive points")
        self.points = tuple(points)

    def length(self) -> float:
        return sum(a.distance_to(b) for a, b in zip(self.points, self.points[1:]))

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __eq__(self, other) -> bool:
        return isinstance(other, Polyline) and self.points == other.points

    def __repr__(self) -> str:
        return f"Polyline({len(self.points)} points, {self.length():.1f} m)"


class Polygon:
    """Plane polygon: exterior ring plus optional holes.

    Rings are stored open (no duplicated closing vertex); closure is
    implied. Ring orientation is not significant, areas are taken as
    absolute values with holes subtracted.
    """

    __slots__ = ("exterior", "holes")

    def __init__(self, exterior: list[PlanePoint], holes: list[list[PlanePoint]] | None = None):
        self.exterior = _normalize_ring(exterior)
        self.holes = tuple(_normalize_ring(h) for h in (holes or []))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Polygon)
            and self.exterior == other.exterior
            and self.holes == other.holes
        )

    def __repr__(self) -> str:
        return f"Polygon({len(self.exterior)} vertices, {len(self.holes)} holes)"


def _normalize_ring(ring: list[PlanePoint]) -> tuple[PlanePoint, ...]:
    pts = list(ring)
    if len(pts) >= 2 and pts[0].x == pts[-1].x and pts[0].y == pts[-1].y:
        pts = pts[:-1]
    if len({(p.x, p.y) for p in pts}) < 3:
        raise ValueError("polygon ring needs at least 3 distinct vertices")
    return tuple(pts)


def point_segment_distance(
    p: PlanePoint, a: PlanePoint, b: PlanePoint
) -> tuple[float, PlanePoint]:
    """Distance from ``p`` to segment [a, b] and the closest segment point."""
    dx, dy = b.x - a.x, b.y - a.y
    seg_len_sq = dx * dx + dy * dy
    if seg_len_sq == 0.0:
        raise ValueError("degenerate segment: endpoints coincide")
    t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / seg_len_sq
    t = min(1.0, max(0.0, t))
    foot = PlanePoint(a.x + t * dx, a.y + t * dy)
    return p.distance_to(foot), foot


def _ring_signed_area_centroid(ring: tuple[PlanePoint, ...]) -> tuple[float, float, float]:
    # Shoelace; centroid weighted by the cross terms. Returns signed area.
    area2 = 0.0
    cx = 0.0
    cy = 0.0
    n = len(ring)
    for i in range(n):
        a = ring[i]
        b = ring[(i + 1) % n]
        cross = a.x * b.y - b.x * a.y
        area2 += cross
        cx += (a.x + b.x) * cross
        cy += (a.y + b.y) * cross
    area = area2 / 2.0
    if area2 != 0.0:
        cx /= 3.0 * area2
        cy /= 3.0 * area2
    return area, cx, cy


def polygon_centroid_area(poly: Polygon) -> tuple[PlanePoint, float]:
    """Area (m^2, holes subtracted) and area-weighted centroid."""
    ext_area, ext_cx, ext_cy = _ring_signed_area_centroid(poly.exterior)
    total = abs(ext_area)
    mx = abs(ext_area) * ext_cx
    my = abs(ext_area) * ext_cy
    for hole in poly.holes:
        h_area, h_cx, h_cy = _ring_signed_area_centroid(hole)
        total -= abs(h_area)
        mx -= abs(h_area) * h_cx
        my -= abs(h_area) * h_cy
    if total <= 0.0:
        raise ValueError("polygon has zero or negative net area")
    return PlanePoint(mx / total, my / total), total


def polygon_contains(poly: Polygon, p: PlanePoint) -> bool:
    """Ray-casting containment test; holes punch out."""
    if not _ring_contains(poly.exterior, p):
        return False
    return not any(_ring_contains(hole, p) for hole in poly.holes)


def _ring_contains(ring: tuple[PlanePoint, ...], p: PlanePoint) -> bool:
    inside = False
    n = len(ring)
    j = n - 1
    for i in range(n):
        a, b = ring[i], ring[j]
        if (a.y > p.y) != (b.y > p.y):
            x_cross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x
            if p.x < x_cross:
                inside = not inside
        j = i
    return inside
