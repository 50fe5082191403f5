"""Model size reduction.

Two independent reductions: contraction of pass-through junctions
(degree-2 nodes whose removal merges their pipes), and spatial k-means
aggregation of building nodes into consumer nodes carrying the summed
demand of their members.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .geo import PlanePoint
from .netgraph import NetworkGraph, NodeKind
from .rng import CounterRng

MIN_CONSUMER_EDGE_M = 1.0


@dataclass(frozen=True)
class ClusterConfig:
    k: int
    seed: int
    max_iter: int = 100
    tol: float = 1e-3  # m, centroid shift below which Lloyd stops

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"cluster count must be >= 1, got {self.k}")
        if self.max_iter < 1 or self.tol < 0:
            raise ValueError("bad iteration limits")


@dataclass
class ClusterAssignment:
    labels: dict[str, int]  # point id -> cluster index
    centroids: dict[int, PlanePoint]  # cluster index -> centroid

    def members(self, cluster: int) -> list[str]:
        return sorted(pid for pid, c in self.labels.items() if c == cluster)


def contract_degree2(g: NetworkGraph) -> NetworkGraph:
    """Remove pass-through junctions, merging their two pipes, until no
    more can go.

    Only Junction nodes of degree exactly 2 are candidates. A node is
    kept when its two pipes disagree on diameter attributes, or when
    merging would create a parallel edge; total network length and all
    distances between retained nodes are unchanged.
    """
    while True:
        removed = False
        candidates = sorted(
            n.id
            for n in g.nodes.values()
            if n.kind is NodeKind.JUNCTION and g.degree(n.id) == 2
        )
        for node_id in candidates:
            if node_id not in g.nodes or g.degree(node_id) != 2:
                continue
            left_id, right_id = g.neighbors(node_id)
            e_left = g.get_edge(node_id, left_id)
            e_right = g.get_edge(node_id, right_id)
            same_pipe = (
                e_left.dn == e_right.dn
                and e_left.inner_diameter == e_right.inner_diameter
                and e_left.insulation_class == e_right.insulation_class
            )
            if not same_pipe or g.has_edge(left_id, right_id):
                continue
            flows = [f for f in (e_left.nominal_flow, e_right.nominal_flow) if f is not None]
            g.remove_node(node_id)
            g.add_edge(
                left_id,
                right_id,
                e_left.length + e_right.length,
                dn=e_left.dn,
                inner_diameter=e_left.inner_diameter,
                nominal_flow=max(flows) if flows else None,
                insulation_class=e_left.insulation_class,
            )
            removed = True
        if not removed:
            return g


def _assign_labels(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Nearest-centroid labels; ties go to the lowest cluster index."""
    n = len(points)
    k = len(centroids)
    labels = np.empty(n, dtype=np.int64)
    chunk = max(1, (1 << 22) // max(k, 1))
    for start in range(0, n, chunk):
        block = points[start : start + chunk]
        d_sq = ((block[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        labels[start : start + chunk] = np.argmin(d_sq, axis=1)
    return labels


def _repair_empty(labels: np.ndarray, points: np.ndarray, centroids: np.ndarray, k: int) -> bool:
    """Give each empty cluster the farthest point of the largest one."""
    repaired = False
    for cluster in range(k):
        if np.any(labels == cluster):
            continue
        sizes = np.bincount(labels, minlength=k)
        donor = int(np.argmax(sizes))
        member_idx = np.flatnonzero(labels == donor)
        d_sq = ((points[member_idx] - centroids[donor]) ** 2).sum(axis=1)
        stolen = int(member_idx[int(np.argmax(d_sq))])
        labels[stolen] = cluster
        centroids[cluster] = points[stolen]
        repaired = True
    return repaired


def kmeans(points: dict[str, PlanePoint], cfg: ClusterConfig) -> ClusterAssignment:
    """Lloyd's algorithm with k-means++ style seeding.

    Deterministic for a fixed seed: the seeding draws come from a
    counter-based stream, assignment ties go to the lowest cluster
    index, and empty clusters steal the farthest point of the largest
    cluster. Stops when no centroid moves more than cfg.tol.
    """
    ids = sorted(points)
    n = len(ids)
    if cfg.k > n:
        raise InputError(f"cannot form {cfg.k} clusters from {n} points")
    coords = np.array([(points[i].x, points[i].y) for i in ids])

    rng = CounterRng(cfg.seed, "kmeans")
    centroids = np.empty((cfg.k, 2))
    centroids[0] = coords[rng.below(n)]
    d_sq = ((coords - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, cfg.k):
        total = float(d_sq.sum())
        if total <= 0.0:
            pick = rng.below(n)
        else:
            r = rng.unit() * total
            pick = min(int(np.searchsorted(np.cumsum(d_sq), r, side="right")), n - 1)
        centroids[j] = coords[pick]
        d_sq = np.minimum(d_sq, ((coords - centroids[j]) ** 2).sum(axis=1))

    labels = np.zeros(n, dtype=np.int64)
    for _ in range(cfg.max_iter):
        labels = _assign_labels(coords, centroids)
        repaired = _repair_empty(labels, coords, centroids, cfg.k)
        new_centroids = centroids.copy()
        for cluster in range(cfg.k):
            member_idx = np.flatnonzero(labels == cluster)
            if len(member_idx):
                new_centroids[cluster] = coords[member_idx].mean(axis=0)
        shift = float(np.hypot(*(new_centroids - centroids).T).max())
        centroids = new_centroids
        if shift <= cfg.tol and not repaired:
            break

    return ClusterAssignment(
        labels={ids[i]: int(labels[i]) for i in range(n)},
        centroids={
            c: PlanePoint(float(centroids[c, 0]), float(centroids[c, 1])) for c in range(cfg.k)
        },
    )


def within_cluster_ss(points: dict[str, PlanePoint], assignment: ClusterAssignment) -> float:
    """Sum over clusters of squared distances to the cluster mean."""
    total = 0.0
    for cluster in sorted(assignment.centroids):
        member_ids = assignment.members(cluster)
        xs = np.array([(points[i].x, points[i].y) for i in member_ids])
        total += float(((xs - xs.mean(axis=0)) ** 2).sum())
    return total


def aggregate_clusters(
    g: NetworkGraph, assignment: ClusterAssignment, profiles
) -> tuple[NetworkGraph, dict[str, np.ndarray]]:
    """Replace building nodes by one consumer node per cluster.

    The consumer sits at the cluster centroid, sums its members'
    annual demand and hourly profiles (``profiles`` maps building node
    id to the hourly array), averages their construction years, and
    connects to the network junction nearest the centroid. Member
    buildings and their service pipes are removed. Returns the graph
    and the summed profile per consumer node id.
    """
    building_ids = sorted(n.id for n in g.nodes_of_kind(NodeKind.BUILDING))
    assigned = sorted(assignment.labels)
    if assigned != building_ids:
        extra = set(assigned) - set(building_ids)
        miss = set(building_ids) - set(assigned)
        raise InputError(
            f"assignment does not partition the building nodes "
            f"({len(miss)} missing, {len(extra)} unknown)"
        )

    junctions = sorted(g.nodes_of_kind(NodeKind.JUNCTION), key=lambda n: n.id)
    if not junctions:
        raise InputError("graph has no junctions to reattach consumers to")
    jx = np.array([n.pos.x for n in junctions])
    jy = np.array([n.pos.y for n in junctions])

    consumer_profiles: dict[str, np.ndarray] = {}
    new_consumers: list[tuple[str, PlanePoint, dict, str, float]] = []
    for cluster in sorted(assignment.centroids):
        members = assignment.members(cluster)
        centroid = assignment.centroids[cluster]
        annual = sum(float(g.nodes[m].attrs.get("annual_demand", 0.0)) for m in members)
        profile_sum = None
        for m in members:
            arr = np.asarray(profiles[m], dtype=np.float64)
            profile_sum = arr.copy() if profile_sum is None else profile_sum + arr
        years = [
            g.nodes[m].attrs["construction_year"]
            for m in members
            if "construction_year" in g.nodes[m].attrs
        ]
        attrs = {
            "annual_demand": annual,
            "nominal_load": float(profile_sum.max()),
            "member_count": len(members),
        }
        if years:
            attrs["construction_year"] = math.floor(sum(years) / len(years) + 0.5)
        d_sq = (jx - centroid.x) ** 2 + (jy - centroid.y) ** 2
        nearest = junctions[int(np.argmin(d_sq))]
        node_id = f"c{cluster}"
        new_consumers.append((node_id, centroid, attrs, nearest.id, math.sqrt(float(d_sq.min()))))
        consumer_profiles[node_id] = profile_sum

    for building_id in building_ids:
        g.remove_node(building_id)
    for node_id, centroid, attrs, junction_id, dist in new_consumers:
        g.add_node(node_id, NodeKind.CONSUMER, centroid, attrs)
        g.add_edge(node_id, junction_id, max(dist, MIN_CONSUMER_EDGE_M))
    return g, consumer_profiles
