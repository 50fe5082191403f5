"""Nominal mass flows, flow routing and pipe diameter selection.

Each demand node's design flow follows its shortest path to the
nearest plant; per-edge flows are the sums of the traversing building
flows. Diameters come from a discrete catalog: the smallest entry that
respects both the pressure gradient and the velocity limit.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from importlib import resources

from .errors import InfeasibleModelError, InputError
from .netgraph import NetworkGraph, NodeKind

log = logging.getLogger(__name__)

RE_LAMINAR = 2300.0
RE_TURBULENT = 4000.0


@dataclass(frozen=True)
class FluidProps:
    """Water around 85 degC by default."""

    rho: float = 960.0  # kg/m^3
    cp: float = 4.18  # kJ/(kg K)
    mu: float = 3.55e-4  # Pa s

    def __post_init__(self):
        if self.rho <= 0 or self.cp <= 0 or self.mu <= 0:
            raise ValueError("fluid properties must be positive")


@dataclass(frozen=True)
class PipeCatalogEntry:
    dn: str
    inner_diameter: float  # m
    roughness: float  # mm

    def __post_init__(self):
        if self.inner_diameter <= 0:
            raise ValueError(f"{self.dn}: inner diameter must be positive")
        if self.roughness < 0:
            raise ValueError(f"{self.dn}: roughness must be non-negative")


@dataclass(frozen=True)
class SizingConfig:
    delta_t: float = 30.0  # K, substation temperature spread
    r_max: float = 250.0  # Pa/m
    v_max: float = 3.0  # m/s
    catalog: tuple[PipeCatalogEntry, ...] = ()

    def __post_init__(self):
        if self.delta_t <= 0 or self.r_max <= 0 or self.v_max <= 0:
            raise ValueError("sizing limits must be positive")
        diameters = [e.inner_diameter for e in self.catalog]
        if any(b <= a for a, b in zip(diameters, diameters[1:])):
            raise ValueError("catalog inner diameters must be strictly increasing")


def default_catalog() -> tuple[PipeCatalogEntry, ...]:
    """Handbook-typical DN25..DN500 steel pipe catalog shipped as a
    data asset; replace it with the operator's series when known."""
    from .ingest import load_catalog

    text = resources.files("dhforge").joinpath("data/pipe_catalog.csv").read_text()
    return tuple(load_catalog(text, source="dhforge:data/pipe_catalog.csv"))


def nominal_mass_flow(q_nom: float, cfg: SizingConfig, fluid: FluidProps) -> float:
    """Design mass flow in kg/s for a load of q_nom kW."""
    if q_nom < 0:
        raise ValueError(f"load must be non-negative, got {q_nom}")
    return q_nom / (fluid.cp * cfg.delta_t)


def friction_factor(re: float, rel_rough: float) -> float:
    """Darcy friction factor.

    Laminar 64/Re below 2300, explicit Swamee-Jain from 4000 up, and a
    linear blend in between so the function is continuous.
    """
    if re <= 0:
        raise ValueError(f"Reynolds number must be positive, got {re}")

    def swamee_jain(r: float) -> float:
        return 0.25 / math.log10(rel_rough / 3.7 + 5.74 / r**0.9) ** 2

    if re < RE_LAMINAR:
        return 64.0 / re
    if re >= RE_TURBULENT:
        return swamee_jain(re)
    w = (re - RE_LAMINAR) / (RE_TURBULENT - RE_LAMINAR)
    return (1.0 - w) * (64.0 / RE_LAMINAR) + w * swamee_jain(RE_TURBULENT)


def pressure_gradient(
    m_dot: float, entry: PipeCatalogEntry, fluid: FluidProps
) -> tuple[float, float]:
    """Darcy-Weisbach specific pressure drop (Pa/m) and velocity (m/s)."""
    if m_dot < 0:
        raise ValueError(f"mass flow must be non-negative, got {m_dot}")
    if m_dot == 0.0:
        return 0.0, 0.0
    d = entry.inner_diameter
    v = 4.0 * m_dot / (fluid.rho * math.pi * d * d)
    re = 4.0 * m_dot / (math.pi * d * fluid.mu)
    lam = friction_factor(re, entry.roughness * 1e-3 / d)
    return lam * fluid.rho * v * v / (2.0 * d), v


def select_diameter(
    m_dot: float, cfg: SizingConfig, fluid: FluidProps
) -> tuple[PipeCatalogEntry, bool]:
    """Smallest catalog entry meeting both limits.

    Returns (entry, True) on success; when even the largest entry
    exceeds a limit, returns (largest, False) so callers can flag the
    edge instead of aborting.
    """
    if not cfg.catalog:
        raise InputError("pipe catalog is empty")
    if m_dot == 0.0:
        return cfg.catalog[0], True
    for entry in cfg.catalog:
        r, v = pressure_gradient(m_dot, entry, fluid)
        if r <= cfg.r_max and v <= cfg.v_max:
            return entry, True
    return cfg.catalog[-1], False


def route_flows(
    g: NetworkGraph,
    cfg: SizingConfig,
    fluid: FluidProps,
    plants: list[str] | None = None,
) -> dict[tuple[str, str], float]:
    """Accumulate nominal flows along shortest paths to the nearest plant.

    Returns a directed map: key (a, b) carries the flow moving from a
    toward b on a's plant-bound path. Undirected magnitudes come from
    :func:`edge_flow_magnitudes`. Nodes without a nominal_load
    attribute contribute zero flow but must still be reachable.
    """
    if plants is None:
        plants = sorted(n.id for n in g.nodes_of_kind(NodeKind.PLANT))
    if not plants:
        raise InfeasibleModelError("no supply node: the model has no plants")
    demand_ids = sorted(
        n.id for n in g.nodes.values() if n.kind in (NodeKind.BUILDING, NodeKind.CONSUMER)
    )
    dist, pred, _ = g.shortest_path_tree(plants)
    unreachable = [node_id for node_id in demand_ids if node_id not in dist]
    if unreachable:
        raise InfeasibleModelError(
            f"{len(unreachable)} demand node(s) unreachable from any plant: "
            + ", ".join(unreachable[:20])
        )
    flows: dict[tuple[str, str], float] = {}
    for node_id in demand_ids:
        m_dot = nominal_mass_flow(float(g.nodes[node_id].attrs.get("nominal_load", 0.0)), cfg, fluid)
        if m_dot == 0.0:
            continue
        current = node_id
        while current in pred:
            parent = pred[current]
            key = (current, parent)
            flows[key] = flows.get(key, 0.0) + m_dot
            current = parent
    return flows


def edge_flow_magnitudes(
    g: NetworkGraph, flows: dict[tuple[str, str], float]
) -> dict[tuple[str, str], float]:
    """Per-edge flow magnitude keyed by the canonical edge key."""
    out: dict[tuple[str, str], float] = {}
    for edge in g.edges():
        out[edge.key()] = flows.get((edge.u, edge.v), 0.0) + flows.get((edge.v, edge.u), 0.0)
    return out


@dataclass
class SizingSummary:
    flagged_edges: list[tuple[str, str]] = field(default_factory=list)
    total_plant_inflow: float = 0.0

    @property
    def flagged_count(self) -> int:
        return len(self.flagged_edges)


def size_network(g: NetworkGraph, cfg: SizingConfig, fluid: FluidProps) -> SizingSummary:
    """Assign nominal_flow, dn and inner_diameter to every edge in place.

    Edges whose flow exceeds the largest catalog entry keep that entry
    and are reported in the summary rather than failing the run.
    """
    directed = route_flows(g, cfg, fluid)
    magnitudes = edge_flow_magnitudes(g, directed)
    summary = SizingSummary()
    for edge in g.edges():
        m_dot = magnitudes[edge.key()]
        entry, ok = select_diameter(m_dot, cfg, fluid)
        edge.nominal_flow = m_dot
        edge.dn = entry.dn
        edge.inner_diameter = entry.inner_diameter
        if not ok:
            summary.flagged_edges.append(edge.key())
    plant_ids = {n.id for n in g.nodes_of_kind(NodeKind.PLANT)}
    summary.total_plant_inflow = sum(
        flow for (a, b), flow in sorted(directed.items()) if b in plant_ids
    )
    if summary.flagged_edges:
        log.warning("%d edge(s) exceed the largest catalog diameter", len(summary.flagged_edges))
    return summary
