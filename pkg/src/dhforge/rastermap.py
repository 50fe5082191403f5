"""Network extraction from image-based maps.

An operator map drawn in a known line color becomes a polyline set in
four steps: color masking, skeletonization to one-pixel width, walking
the skeleton into pixel chains, and mapping pixel coordinates to the
plane through an affine transform fitted to geo-reference points.

Pixel coordinates are (col, row) with row 0 at the top, matching image
conventions; control points use the same convention.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import InputError
from .geo import GeoPoint, PlanePoint, Projection

log = logging.getLogger(__name__)

#: 8-neighborhood offsets in row-major scan order, as (drow, dcol).
_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))


@dataclass
class RasterMap:
    """RGB pixel grid; shape (height, width, 3), dtype uint8."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels, dtype=np.uint8)
        if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"raster must have shape (h, w, 3), got {arr.shape}")
        self.pixels = arr

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @classmethod
    def from_png(cls, path_or_bytes) -> "RasterMap":
        if isinstance(path_or_bytes, (bytes, bytearray)):
            img = Image.open(io.BytesIO(path_or_bytes))
        else:
            img = Image.open(path_or_bytes)
        return cls(np.asarray(img.convert("RGB"), dtype=np.uint8))


@dataclass(frozen=True)
class ControlPoint:
    col: float
    row: float
    geo: GeoPoint


@dataclass(frozen=True)
class AffineTransform:
    """(col, row) -> plane meters: x = a*col + b*row + c, y = d*col + e*row + f."""

    a: float
    b: float
    c: float
    d: float
    e: float
    f: float

    def apply(self, col: float, row: float) -> PlanePoint:
        return PlanePoint(
            self.a * col + self.b * row + self.c,
            self.d * col + self.e * row + self.f,
        )


def load_control_points(text: str, source: str = "<control-points>") -> list[ControlPoint]:
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row]
    if not rows or [h.strip() for h in rows[0]] != ["col", "row", "lon", "lat"]:
        raise InputError(f"{source}: expected header col,row,lon,lat")
    points = []
    for row_no, row in enumerate(rows[1:], start=2):
        try:
            col, prow, lon, lat = (float(v) for v in row[:4])
            points.append(ControlPoint(col, prow, GeoPoint(lon, lat)))
        except (ValueError, IndexError) as exc:
            raise InputError(f"{source}: row {row_no}: {exc}") from None
    return points


def fit_affine(control_points: list[ControlPoint], proj: Projection) -> AffineTransform:
    """Least-squares affine fit from pixel to plane coordinates.

    Needs at least three control points that are not collinear in
    pixel space; with exactly three the fit is exact.
    """
    if len(control_points) < 3:
        raise InputError(f"need at least 3 control points, got {len(control_points)}")
    design = np.array([[cp.col, cp.row, 1.0] for cp in control_points])
    if np.linalg.matrix_rank(design) < 3:
        raise InputError("control points are collinear in pixel space")
    targets = np.array([(proj.project(cp.geo).x, proj.project(cp.geo).y) for cp in control_points])
    coeffs, *_ = np.linalg.lstsq(design, targets, rcond=None)
    (a, d), (b, e), (c, f) = coeffs
    if abs(a * e - b * d) < 1e-12:
        raise InputError("degenerate affine transform (zero determinant)")
    return AffineTransform(a, b, c, d, e, f)


def color_mask(raster: RasterMap, rgb_target: tuple[int, int, int], tolerance: int) -> np.ndarray:
    """Boolean mask of pixels within Chebyshev distance ``tolerance`` of
    the target color (max absolute channel difference)."""
    if tolerance < 0:
        raise ValueError("tolerance must be non-negative")
    diff = np.abs(raster.pixels.astype(np.int16) - np.array(rgb_target, dtype=np.int16))
    return diff.max(axis=2) <= tolerance


def dilate(mask: np.ndarray, radius: int) -> np.ndarray:
    """Binary dilation with a square element, ``radius`` passes."""
    out = mask.copy()
    for _ in range(radius):
        grown = out.copy()
        grown[1:, :] |= out[:-1, :]
        grown[:-1, :] |= out[1:, :]
        grown[:, 1:] |= out[:, :-1]
        grown[:, :-1] |= out[:, 1:]
        grown[1:, 1:] |= out[:-1, :-1]
        grown[1:, :-1] |= out[:-1, 1:]
        grown[:-1, 1:] |= out[1:, :-1]
        grown[:-1, :-1] |= out[1:, 1:]
        out = grown
    return out


def thin(mask: np.ndarray) -> np.ndarray:
    """Zhang-Suen thinning to a one-pixel-wide skeleton.

    Runs both sub-iterations until a full pass removes nothing; the
    result is a subset of the mask and deterministic.
    """
    img = mask.astype(np.uint8)
    while True:
        removed_any = False
        for step in (0, 1):
            p = np.pad(img, 1)
            p2 = p[:-2, 1:-1]
            p3 = p[:-2, 2:]
            p4 = p[1:-1, 2:]
            p5 = p[2:, 2:]
            p6 = p[2:, 1:-1]
            p7 = p[2:, :-2]
            p8 = p[1:-1, :-2]
            p9 = p[:-2, :-2]
            ring = (p2, p3, p4, p5, p6, p7, p8, p9, p2)
            b = sum(ring[:8], np.zeros_like(p2, dtype=np.int16))
            a = sum(((ring[i] == 0) & (ring[i + 1] == 1)) for i in range(8)).astype(np.int16)
            if step == 0:
                gaps = (p2 * p4 * p6 == 0) & (p4 * p6 * p8 == 0)
            else:
                gaps = (p2 * p4 * p8 == 0) & (p2 * p6 * p8 == 0)
            removable = (img == 1) & (b >= 2) & (b <= 6) & (a == 1) & gaps
            if removable.any():
                img[removable] = 0
                removed_any = True
        if not removed_any:
            return img.astype(bool)


def trace(skeleton: np.ndarray) -> list[list[tuple[int, int]]]:
    """Walk a thinned mask into pixel polylines of (col, row) pairs.

    Runs go between anchor pixels (anything with a neighbor count other
    than 2); junction pixels end up shared between the runs they join.
    Closed loops with no anchor become closed polylines. Isolated
    pixels are dropped. Start order is row-major, so the output order
    is reproducible.
    """
    pixel_set = {(int(r), int(c)) for r, c in np.argwhere(skeleton)}

    def adjacent(px):
        r, c = px
        return [(r + dr, c + dc) for dr, dc in _OFFSETS if (r + dr, c + dc) in pixel_set]

    degree = {px: len(adjacent(px)) for px in pixel_set}
    anchors = sorted(px for px in pixel_set if degree[px] != 2)
    used: set[tuple[tuple[int, int], tuple[int, int]]] = set()
    covered: set[tuple[int, int]] = set()
    paths: list[list[tuple[int, int]]] = []

    def walk(start, first):
        used.add((start, first))
        used.add((first, start))
        path = [start, first]
        prev, cur = start, first
        while degree[cur] == 2:
            nxt = next(n for n in adjacent(cur) if n != prev)
            if (cur, nxt) in used:
                break  # closed back onto the walked run
            used.add((cur, nxt))
            used.add((nxt, cur))
            path.append(nxt)
            prev, cur = cur, nxt
        covered.update(path)
        return path

    for start in anchors:
        if degree[start] == 0:
            continue
        for neighbor in adjacent(start):
            if (start, neighbor) not in used:
                paths.append(walk(start, neighbor))

    # pure cycles: every pixel has exactly two neighbors
    for start in sorted(pixel_set):
        if degree[start] == 2 and start not in covered:
            paths.append(walk(start, adjacent(start)[0]))

    return [[(c, r) for r, c in path] for path in paths]


def extract_network(
    raster: RasterMap,
    control_points: list[ControlPoint],
    rgb_target: tuple[int, int, int],
    tolerance: int,
    proj: Projection,
    dilation: int = 0,
) -> list[list[GeoPoint]]:
    """Full extraction chain: mask, thin, trace, georeference.

    Returns WGS84 polylines ready for projection and graph building.
    """
    for cp in control_points:
        if not (0 <= cp.col < raster.width and 0 <= cp.row < raster.height):
            raise InputError(f"control point ({cp.col}, {cp.row}) outside raster bounds")
    transform = fit_affine(control_points, proj)
    mask = color_mask(raster, rgb_target, tolerance)
    if dilation:
        mask = dilate(mask, dilation)
    skeleton = thin(mask)
    pixel_paths = trace(skeleton)
    polylines = []
    for path in pixel_paths:
        geo_points = [proj.unproject(transform.apply(col, row)) for col, row in path]
        polylines.append(geo_points)
    n_components = count_components(skeleton)
    if n_components > 1:
        log.info("extracted network has %d disconnected components", n_components)
    return polylines


def count_components(mask: np.ndarray) -> int:
    """Number of 8-connected components in a boolean mask."""
    remaining = {(int(r), int(c)) for r, c in np.argwhere(mask)}
    count = 0
    while remaining:
        count += 1
        stack = [min(remaining)]
        remaining.discard(stack[0])
        while stack:
            r, c = stack.pop()
            for dr, dc in _OFFSETS:
                nb = (r + dr, c + dc)
                if nb in remaining:
                    remaining.discard(nb)
                    stack.append(nb)
    return count
