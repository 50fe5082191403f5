"""Geometric graph model of a district heating system.

Junctions, buildings, plants and aggregated consumers are nodes; pipes
are undirected edges with a length and optional sizing attributes. One
edge per node pair, no self loops. All queries break ties
deterministically (lexicographic node id, or edge insertion order) so
that identical inputs always yield identical models.
"""

from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass, field
from typing import Callable, Iterator

from .errors import InfeasibleModelError
from .geo import PlanePoint, point_segment_distance


class NodeKind(enum.Enum):
    JUNCTION = "junction"
    BUILDING = "building"
    PLANT = "plant"
    CONSUMER = "consumer"


#: Node kinds that demand or supply heat; they are never contracted away.
PROTECTED_KINDS = frozenset({NodeKind.BUILDING, NodeKind.PLANT, NodeKind.CONSUMER})


@dataclass
class Node:
    id: str
    kind: NodeKind
    pos: PlanePoint
    attrs: dict = field(default_factory=dict)


@dataclass
class PipeEdge:
    u: str
    v: str
    length: float
    dn: str | None = None
    inner_diameter: float | None = None
    nominal_flow: float | None = None
    insulation_class: str | None = None

    def key(self) -> tuple[str, str]:
        return (self.u, self.v) if self.u <= self.v else (self.v, self.u)

    def other(self, node_id: str) -> str:
        return self.v if node_id == self.u else self.u


def edge_key(u: str, v: str) -> tuple[str, str]:
    return (u, v) if u <= v else (v, u)


class NetworkGraph:
    """Undirected geometric multigraph-free pipe network."""

    def __init__(self):
        self.nodes: dict[str, Node] = {}
        self._edges: dict[tuple[str, str], PipeEdge] = {}
        self._adj: dict[str, dict[str, PipeEdge]] = {}
        self._id_counters: dict[str, int] = {}

    # -- construction -------------------------------------------------

    def add_node(self, node_id: str, kind: NodeKind, pos: PlanePoint, attrs: dict | None = None) -> Node:
        if node_id in self.nodes:
            raise ValueError(f"duplicate node id: {node_id!r}")
        attrs = dict(attrs or {})
        if attrs.get("annual_demand") is not None and attrs["annual_demand"] < 0:
            raise ValueError(f"node {node_id!r}: annual_demand must be non-negative")
        year = attrs.get("construction_year")
        if year is not None and not 1500 <= year <= 2100:
            raise ValueError(f"node {node_id!r}: construction_year out of range: {year}")
        node = Node(node_id, kind, pos, attrs)
        self.nodes[node_id] = node
        self._adj[node_id] = {}
        return node

    def add_edge(
        self,
        u: str,
        v: str,
        length: float | None = None,
        *,
        dn: str | None = None,
        inner_diameter: float | None = None,
        nominal_flow: float | None = None,
        insulation_class: str | None = None,
    ) -> PipeEdge:
        if u == v:
            raise ValueError(f"self-loop on node {u!r}")
        for end in (u, v):
            if end not in self.nodes:
                raise ValueError(f"edge endpoint {end!r} not in graph")
        key = edge_key(u, v)
        if key in self._edges:
            raise ValueError(f"edge {key} already present")
        if length is None:
            length = self.nodes[u].pos.distance_to(self.nodes[v].pos)
        if length <= 0.0:
            raise ValueError(f"edge {key} has non-positive length {length}")
        edge = PipeEdge(u, v, length, dn, inner_diameter, nominal_flow, insulation_class)
        self._edges[key] = edge
        self._adj[u][v] = edge
        self._adj[v][u] = edge
        return edge

    def remove_node(self, node_id: str) -> None:
        if node_id not in self.nodes:
            raise ValueError(f"unknown node id: {node_id!r}")
        for neighbor in list(self._adj[node_id]):
            self.remove_edge(node_id, neighbor)
        del self._adj[node_id]
        del self.nodes[node_id]

    def remove_edge(self, u: str, v: str) -> None:
        key = edge_key(u, v)
        if key not in self._edges:
            raise ValueError(f"unknown edge: {key}")
        del self._edges[key]
        del self._adj[u][v]
        del self._adj[v][u]

    def new_node_id(self, prefix: str) -> str:
        """Fresh id with the given prefix; deterministic counter per prefix."""
        n = self._id_counters.get(prefix, 0)
        while f"{prefix}{n}" in self.nodes:
            n += 1
        self._id_counters[prefix] = n + 1
        return f"{prefix}{n}"

    # -- queries ------------------------------------------------------

    def edges(self) -> Iterator[PipeEdge]:
        """Edges in insertion order."""
        return iter(self._edges.values())

    def get_edge(self, u: str, v: str) -> PipeEdge | None:
        return self._edges.get(edge_key(u, v))

    def has_edge(self, u: str, v: str) -> bool:
        return edge_key(u, v) in self._edges

    def neighbors(self, node_id: str) -> list[str]:
        return sorted(self._adj[node_id])

    def degree(self, node_id: str) -> int:
        return len(self._adj[node_id])

    def num_nodes(self) -> int:
        return len(self.nodes)

    def num_edges(self) -> int:
        return len(self._edges)

    def total_length(self) -> float:
        return sum(e.length for e in self._edges.values())

    def nodes_of_kind(self, kind: NodeKind) -> list[Node]:
        return [n for n in self.nodes.values() if n.kind is kind]

    def connected_components(self) -> list[set[str]]:
        """Components ordered by their lexicographically smallest node id."""
        seen: set[str] = set()
        components = []
        for start in sorted(self.nodes):
            if start in seen:
                continue
            comp = {start}
            stack = [start]
            while stack:
                current = stack.pop()
                for neighbor in self._adj[current]:
                    if neighbor not in comp:
                        comp.add(neighbor)
                        stack.append(neighbor)
            seen |= comp
            components.append(comp)
        return components

    def shortest_path(self, src: str, dst: str) -> tuple[list[str], float] | None:
        """Minimum-length path, or None when unreachable.

        Equal-length alternatives resolve to the path through the
        smaller node id.
        """
        for end in (src, dst):
            if end not in self.nodes:
                raise ValueError(f"unknown node id: {end!r}")
        if src == dst:
            return [src], 0.0
        dist, pred, _ = self.shortest_path_tree([src])
        if dst not in dist:
            return None
        path = [dst]
        while path[-1] != src:
            path.append(pred[path[-1]])
        path.reverse()
        return path, dist[dst]

    def shortest_path_tree(
        self, sources: list[str]
    ) -> tuple[dict[str, float], dict[str, str], dict[str, str]]:
        """Multi-source Dijkstra by edge length.

        Returns (distance, predecessor, source) maps over reachable
        nodes. Ties settle toward the lexicographically smaller source,
        then the smaller node id, so the tree is unique.
        """
        dist: dict[str, float] = {}
        pred: dict[str, str] = {}
        source_of: dict[str, str] = {}
        heap: list[tuple[float, str, str, str]] = []
        for s in sorted(sources):
            if s not in self.nodes:
                raise ValueError(f"unknown source node: {s!r}")
            heapq.heappush(heap, (0.0, s, s, s))
        while heap:
            d, src_id, node, parent = heapq.heappop(heap)
            if node in dist:
                continue
            dist[node] = d
            source_of[node] = src_id
            if parent != node:
                pred[node] = parent
            for neighbor, edge in self._adj[node].items():
                if neighbor not in dist:
                    heapq.heappush(heap, (d + edge.length, src_id, neighbor, node))
        return dist, pred, source_of

    def nearest_edge(
        self,
        p: PlanePoint,
        edge_ok: Callable[[PipeEdge], bool] | None = None,
    ) -> tuple[PipeEdge, float, PlanePoint]:
        """Edge minimizing point-to-segment distance; ties keep the
        earlier-inserted edge. ``edge_ok`` restricts the candidates."""
        best: tuple[PipeEdge, float, PlanePoint] | None = None
        for edge in self._edges.values():
            if edge_ok is not None and not edge_ok(edge):
                continue
            d, foot = point_segment_distance(p, self.nodes[edge.u].pos, self.nodes[edge.v].pos)
            if best is None or d < best[1]:
                best = (edge, d, foot)
        if best is None:
            raise InfeasibleModelError("graph has no candidate edges")
        return best

    def split_edge(self, edge: PipeEdge, foot: PlanePoint, tol: float = 1e-6) -> str:
        """Insert a junction at ``foot`` on ``edge``; returns its node id.

        A foot within ``tol`` of an endpoint is degenerate: no split,
        the endpoint id is returned. Lengths of the halves are the
        parametric fractions of the original length, so their sum is
        conserved even when the stored length is not the chord length.
        """
        pos_u = self.nodes[edge.u].pos
        pos_v = self.nodes[edge.v].pos
        if foot.distance_to(pos_u) <= tol:
            return edge.u
        if foot.distance_to(pos_v) <= tol:
            return edge.v
        d, on_seg = point_segment_distance(foot, pos_u, pos_v)
        if d > tol:
            raise ValueError(f"split point {foot} is {d:.3g} m off the edge segment")
        t = on_seg.distance_to(pos_u) / pos_u.distance_to(pos_v)
        new_id = self.new_node_id("s")
        self.remove_edge(edge.u, edge.v)
        self.add_node(new_id, NodeKind.JUNCTION, on_seg)
        for end, frac in ((edge.u, t), (edge.v, 1.0 - t)):
            self.add_edge(
                end,
                new_id,
                edge.length * frac,
                dn=edge.dn,
                inner_diameter=edge.inner_diameter,
                nominal_flow=edge.nominal_flow,
                insulation_class=edge.insulation_class,
            )
        return new_id


def is_main_edge(g: NetworkGraph, edge: PipeEdge) -> bool:
    """True for pipes between junctions (service connections excluded)."""
    return (
        g.nodes[edge.u].kind is NodeKind.JUNCTION
        and g.nodes[edge.v].kind is NodeKind.JUNCTION
    )
