"""Model assembly: which buildings join the network and how.

The steps mirror the generation workflow: keep buildings within a
buffer distance of the network, sample per-block connection
proportions, fill construction years from the census grid, then attach
the connected buildings and nearby plants with perpendicular service
pipes. Every step is deterministic for a fixed seed; buildings mutate
the graph in sorted-id order.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleModelError
from .geo import PlanePoint, Projection, polygon_centroid_area, polygon_contains
from .ingest import BlockRecord, BuildingRecord, CensusCell, PlantRecord
from .netgraph import NetworkGraph, NodeKind, PipeEdge, is_main_edge
from .rng import CounterRng

log = logging.getLogger(__name__)

#: Shortest allowed service pipe; avoids zero-length edges when a
#: centroid or plant sits exactly on the main line.
MIN_SERVICE_LENGTH_M = 1.0

CENSUS_CELL_SIZE_M = 100.0
YEAR_NEIGHBOR_COUNT = 5


@dataclass(frozen=True)
class AssemblyConfig:
    seed: int
    buffer_threshold: float = 100.0  # m
    plant_attach_max: float = 200.0  # m

    def __post_init__(self):
        if self.buffer_threshold <= 0 or self.plant_attach_max <= 0:
            raise ValueError("assembly distances must be positive")


def round_half_up(x: float) -> int:
    """Round to the nearest integer, .5 upward.

    The value is first snapped to 9 decimals so that products like
    0.15 * 10 land on their intended .5 boundary despite binary
    floating point.
    """
    return math.floor(round(x, 9) + 0.5)


def project_buildings(buildings: list[BuildingRecord], proj: Projection) -> list[BuildingRecord]:
    """Fill plane footprints and centroids in place; returns the list."""
    for b in buildings:
        b.plane = proj.project_rings(b.footprint)
        b.centroid, _ = polygon_centroid_area(b.plane)
    return buildings


def project_blocks(blocks: list[BlockRecord], proj: Projection) -> list[BlockRecord]:
    for blk in blocks:
        blk.plane = proj.project_rings(blk.polygon)
    return blocks


def project_plants(plants: list[PlantRecord], proj: Projection) -> list[PlantRecord]:
    for p in plants:
        p.pos_plane = proj.project(p.pos)
    return plants


class MainEdgeIndex:
    """Vectorized nearest-main-edge queries that track graph splits.

    Holds segment endpoint arrays for pipes between junctions. A query
    scans all live segments at once; ties keep the earliest-inserted
    edge, matching NetworkGraph.nearest_edge. Split edges are masked
    dead and their halves appended, so thousands of sequential
    building attachments stay cheap.
    """

    def __init__(self, g: NetworkGraph, capacity: int = 1024):
        self._g = g
        self._keys: list[tuple[str, str]] = []
        self._pos_of: dict[tuple[str, str], int] = {}
        self._n = 0
        self._ax = np.empty(capacity)
        self._ay = np.empty(capacity)
        self._dx = np.empty(capacity)
        self._dy = np.empty(capacity)
        self._seg_sq = np.empty(capacity)
        self._alive = np.zeros(capacity, dtype=bool)
        for edge in g.edges():
            if is_main_edge(g, edge):
                self._append(edge)

    def _grow(self) -> None:
        cap = max(2 * self._alive.size, 16)
        for name in ("_ax", "_ay", "_dx", "_dy", "_seg_sq"):
            old = getattr(self, name)
            new = np.empty(cap)
            new[: self._n] = old[: self._n]
            setattr(self, name, new)
        alive = np.zeros(cap, dtype=bool)
        alive[: self._n] = self._alive[: self._n]
        self._alive = alive

    def _append(self, edge: PipeEdge) -> None:
        if self._n == self._alive.size:
            self._grow()
        pos_u = self._g.nodes[edge.u].pos
        pos_v = self._g.nodes[edge.v].pos
        i = self._n
        self._ax[i] = pos_u.x
        self._ay[i] = pos_u.y
        self._dx[i] = pos_v.x - pos_u.x
        self._dy[i] = pos_v.y - pos_u.y
        self._seg_sq[i] = self._dx[i] ** 2 + self._dy[i] ** 2
        self._alive[i] = True
        self._keys.append(edge.key())
        self._pos_of[edge.key()] = i
        self._n += 1

    def __len__(self) -> int:
        return int(self._alive[: self._n].sum())

    def _dist_sq(self, p: PlanePoint) -> tuple[np.ndarray, np.ndarray]:
        n = self._n
        ax, ay = self._ax[:n], self._ay[:n]
        dx, dy = self._dx[:n], self._dy[:n]
        t = np.clip(((p.x - ax) * dx + (p.y - ay) * dy) / self._seg_sq[:n], 0.0, 1.0)
        d_sq = (p.x - (ax + t * dx)) ** 2 + (p.y - (ay + t * dy)) ** 2
        d_sq[~self._alive[:n]] = np.inf
        return d_sq, t

    def nearest(self, p: PlanePoint) -> tuple[PipeEdge, float, PlanePoint]:
        if len(self) == 0:
            raise InfeasibleModelError("graph has no main edges")
        d_sq, t = self._dist_sq(p)
        i = int(np.argmin(d_sq))
        foot = PlanePoint(
            float(self._ax[i] + t[i] * self._dx[i]),
            float(self._ay[i] + t[i] * self._dy[i]),
        )
        return self._g.get_edge(*self._keys[i]), math.sqrt(float(d_sq[i])), foot

    def distances(self, points: list[PlanePoint]) -> np.ndarray:
        """Min distance from each point to any live main edge."""
        if len(self) == 0:
            raise InfeasibleModelError("graph has no main edges")
        out = np.empty(len(points))
        for i, p in enumerate(points):
            d_sq, _ = self._dist_sq(p)
            out[i] = math.sqrt(float(d_sq.min()))
        return out

    def record_split(self, old_edge: PipeEdge, junction_id: str) -> None:
        """Replace a split edge by its two halves."""
        pos = self._pos_of.pop(old_edge.key(), None)
        if pos is not None:
            self._alive[pos] = False
        for end in (old_edge.u, old_edge.v):
            new_edge = self._g.get_edge(end, junction_id)
            if new_edge is not None and is_main_edge(self._g, new_edge):
                self._append(new_edge)


def filter_by_buffer(
    g: NetworkGraph, buildings: list[BuildingRecord], threshold: float
) -> list[BuildingRecord]:
    """Buildings whose centroid lies within ``threshold`` meters of any
    network edge, in input order. The boundary itself is kept."""
    if g.num_edges() == 0:
        raise InfeasibleModelError("cannot buffer an edgeless network")
    index = MainEdgeIndex(g)
    dists = index.distances([_centroid_of(b) for b in buildings])
    return [b for b, d in zip(buildings, dists) if d <= threshold]


def _centroid_of(b: BuildingRecord) -> PlanePoint:
    if b.centroid is None:
        raise ValueError(f"building {b.id!r} has no projected centroid")
    return b.centroid


def sample_connections(
    kept: list[BuildingRecord], blocks: list[BlockRecord], cfg: AssemblyConfig
) -> list[BuildingRecord]:
    """Pick the connected buildings per block connection proportion.

    For a block with proportion p and n member buildings, exactly
    round-half-up(p*n) members are drawn uniformly without replacement
    from a stream keyed by (seed, block id), so results repeat across
    runs and other blocks never shift the draw. Blocks without a
    proportion and buildings outside every block connect fully.
    """
    members: dict[str, list[BuildingRecord]] = {}
    connected: list[BuildingRecord] = []
    selected_ids: set[str] = set()
    for b in kept:
        block = _containing_block(b, blocks)
        if block is None or block.connection_proportion is None:
            selected_ids.add(b.id)
        else:
            members.setdefault(block.block_id, []).append(b)
    for block_id in sorted(members):
        group = members[block_id]
        proportion = next(
            blk.connection_proportion for blk in blocks if blk.block_id == block_id
        )
        count = round_half_up(proportion * len(group))
        rng = CounterRng(cfg.seed, "connection-sample", block_id)
        for i in rng.sample_without_replacement(len(group), count):
            selected_ids.add(group[i].id)
    for b in kept:
        if b.id in selected_ids:
            connected.append(b)
    return connected


def _containing_block(b: BuildingRecord, blocks: list[BlockRecord]) -> BlockRecord | None:
    centroid = _centroid_of(b)
    for blk in blocks:
        if blk.plane is None:
            raise ValueError(f"block {blk.block_id!r} has no projected polygon")
        if polygon_contains(blk.plane, centroid):
            return blk
    return None


def assign_construction_years(
    buildings: list[BuildingRecord], census_cells: list[CensusCell]
) -> list[BuildingRecord]:
    """Fill missing construction years in place.

    Explicit years win; otherwise the census cell containing the
    centroid decides; buildings outside the grid get the rounded mean
    year of their 5 nearest neighbors that have a year after the
    census pass.
    """
    cells = {(c.grid_x, c.grid_y): c.construction_year for c in census_cells}
    missing: list[BuildingRecord] = []
    for b in buildings:
        if b.construction_year is not None:
            continue
        centroid = _centroid_of(b)
        cell = (math.floor(centroid.x / CENSUS_CELL_SIZE_M), math.floor(centroid.y / CENSUS_CELL_SIZE_M))
        if cell in cells:
            b.construction_year = cells[cell]
        else:
            missing.append(b)
    donors = [b for b in buildings if b.construction_year is not None]
    if missing and not donors:
        raise InfeasibleModelError(
            "no construction year available anywhere: census grid empty and no explicit years"
        )
    if missing:
        donor_x = np.array([_centroid_of(b).x for b in donors])
        donor_y = np.array([_centroid_of(b).y for b in donors])
        donor_rank = np.argsort(np.argsort([b.id for b in donors]))
        donor_years = np.array([b.construction_year for b in donors], dtype=np.float64)
        for b in missing:
            c = _centroid_of(b)
            d_sq = (donor_x - c.x) ** 2 + (donor_y - c.y) ** 2
            order = np.lexsort((donor_rank, d_sq))
            nearest = order[: min(YEAR_NEIGHBOR_COUNT, len(donors))]
            b.construction_year = round_half_up(float(donor_years[nearest].mean()))
    return buildings


_BUILDING_ATTR_FIELDS = ("usage_type", "annual_demand", "construction_year", "block_id", "floor_area")


def attach_building(
    g: NetworkGraph, b: BuildingRecord, index: MainEdgeIndex | None = None
) -> str:
    """Connect one building: split the nearest main pipe at the foot of
    the perpendicular and add a service edge from the new junction to a
    Building node at the centroid. Returns the building node id."""
    if index is None:
        index = MainEdgeIndex(g)
    centroid = _centroid_of(b)
    edge, dist, foot = index.nearest(centroid)
    junction_id = g.split_edge(edge, foot)
    if junction_id not in (edge.u, edge.v):
        index.record_split(edge, junction_id)
    node_id = f"b_{b.id}"
    attrs = {k: getattr(b, k) for k in _BUILDING_ATTR_FIELDS if getattr(b, k) is not None}
    g.add_node(node_id, NodeKind.BUILDING, centroid, attrs)
    g.add_edge(node_id, junction_id, max(dist, MIN_SERVICE_LENGTH_M))
    return node_id


def attach_buildings(g: NetworkGraph, buildings: list[BuildingRecord]) -> list[str]:
    """Attach every building in sorted-id order; returns node ids."""
    index = MainEdgeIndex(g)
    return [attach_building(g, b, index) for b in sorted(buildings, key=lambda b: b.id)]


def attach_plants(
    g: NetworkGraph, plants: list[PlantRecord], max_dist: float
) -> tuple[list[str], list[str]]:
    """Attach plants within ``max_dist`` of the network.

    Returns (attached node ids, skipped plant ids). Plants farther
    than the limit are reported, not fatal; an empty plant list only
    logs a warning because the model then cannot be sized.
    """
    if not plants:
        log.warning("no plants supplied: the model will have no supply node")
        return [], []
    index = MainEdgeIndex(g)
    attached: list[str] = []
    skipped: list[str] = []
    for p in sorted(plants, key=lambda p: p.id):
        if p.pos_plane is None:
            raise ValueError(f"plant {p.id!r} has no projected position")
        edge, dist, foot = index.nearest(p.pos_plane)
        if dist > max_dist:
            skipped.append(p.id)
            log.info("plant %s is %.0f m from the network (limit %.0f m); skipped", p.id, dist, max_dist)
            continue
        junction_id = g.split_edge(edge, foot)
        if junction_id not in (edge.u, edge.v):
            index.record_split(edge, junction_id)
        node_id = f"p_{p.id}"
        attrs = {"name": p.name}
        if p.capacity is not None:
            attrs["capacity_kw"] = p.capacity
        if p.plant_type is not None:
            attrs["plant_type"] = p.plant_type
        g.add_node(node_id, NodeKind.PLANT, p.pos_plane, attrs)
        g.add_edge(node_id, junction_id, max(dist, MIN_SERVICE_LENGTH_M))
        attached.append(node_id)
    return attached, skipped
