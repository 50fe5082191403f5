import math

import numpy as np
import pytest

import _toycity
from dhforge.errors import InfeasibleModelError, InputError
from dhforge.geo import PlanePoint
from dhforge.hydro import (
    FluidProps,
    PipeCatalogEntry,
    SizingConfig,
    default_catalog,
    edge_flow_magnitudes,
    friction_factor,
    nominal_mass_flow,
    pressure_gradient,
    route_flows,
    select_diameter,
    size_network,
)
from dhforge.ingest import load_catalog
from dhforge.netgraph import NetworkGraph, NodeKind

FLUID = FluidProps()  # rho 960, cp 4.18, mu 3.55e-4


@pytest.fixture(scope="module")
def catalog():
    return tuple(load_catalog(_toycity.catalog_csv()))


@pytest.fixture(scope="module")
def cfg(catalog):
    return SizingConfig(delta_t=30.0, r_max=250.0, v_max=3.0, catalog=catalog)


def colebrook(re: float, rel_rough: float) -> float:
    """Iterated Colebrook-White friction factor (test oracle)."""
    inv_sqrt = 4.0  # arbitrary positive start
    for _ in range(200):
        nxt = -2.0 * math.log10(rel_rough / 3.7 + 2.51 * inv_sqrt / re)
        if abs(nxt - inv_sqrt) < 1e-13:
            inv_sqrt = nxt
            break
        inv_sqrt = nxt
    return 1.0 / inv_sqrt**2


class TestNominalMassFlow:
    def test_design_point_is_exactly_one(self, cfg):
        # 125.4 kW / (4.18 kJ/kgK * 30 K) = 1.0 kg/s
        assert nominal_mass_flow(125.4, cfg, FLUID) == pytest.approx(1.0, abs=1e-12)

    def test_zero_load(self, cfg):
        assert nominal_mass_flow(0.0, cfg, FLUID) == 0.0

    def test_linearity(self, cfg):
        assert nominal_mass_flow(250.8, cfg, FLUID) == pytest.approx(
            2.0 * nominal_mass_flow(125.4, cfg, FLUID), rel=1e-12
        )


class TestFrictionFactor:
    def test_laminar(self):
        assert friction_factor(1000.0, 1e-4) == pytest.approx(0.064, rel=1e-12)

    def test_swamee_jain_hand_value(self):
        rel = 1e-4 / 0.054
        assert friction_factor(66430.0, rel) == pytest.approx(0.0257, rel=0.02)

    def test_continuity_at_boundaries(self):
        rel = 1e-3
        assert friction_factor(2300.0 - 1e-9, rel) == pytest.approx(
            friction_factor(2300.0, rel), abs=1e-9
        )
        assert friction_factor(4000.0 - 1e-9, rel) == pytest.approx(
            friction_factor(4000.0, rel), abs=1e-9
        )

    def test_within_five_percent_of_colebrook(self):
        res = np.logspace(math.log10(4e3), 7, 20)
        roughs = np.logspace(-6, math.log10(5e-2), 10)
        for re in res:
            for rel in roughs:
                sj = friction_factor(float(re), float(rel))
                cw = colebrook(float(re), float(rel))
                assert abs(sj - cw) / cw < 0.05


class TestPressureGradient:
    def test_hand_evaluated_chain(self):
        entry = PipeCatalogEntry("DN50", 0.054, 0.1)
        r, v = pressure_gradient(1.0, entry, FLUID)
        assert v == pytest.approx(0.455, rel=0.02)
        assert r == pytest.approx(47.0, rel=0.02)

    def test_zero_flow(self):
        entry = PipeCatalogEntry("DN50", 0.054, 0.1)
        assert pressure_gradient(0.0, entry, FLUID) == (0.0, 0.0)

    def test_quadrupling_flow_roughly_sixteenfold_gradient(self):
        entry = PipeCatalogEntry("DN100", 0.1071, 0.1)
        r1, v1 = pressure_gradient(1.0, entry, FLUID)
        r4, v4 = pressure_gradient(4.0, entry, FLUID)
        assert v4 == pytest.approx(4.0 * v1, rel=1e-9)
        assert r4 == pytest.approx(16.0 * r1, rel=0.2)


class TestSelectDiameter:
    def test_low_flow_smallest_feasible(self, cfg):
        entry, ok = select_diameter(1.0, cfg, FLUID)
        assert ok and entry.dn == "DN50"

    def test_higher_flow_steps_up(self, cfg):
        entry, ok = select_diameter(3.0, cfg, FLUID)
        assert ok and entry.dn == "DN80"

    def test_zero_flow_smallest(self, cfg):
        entry, ok = select_diameter(0.0, cfg, FLUID)
        assert ok and entry.dn == "DN50"

    def test_catalog_exceeded_flags_largest(self, catalog):
        tiny = SizingConfig(delta_t=30.0, r_max=250.0, v_max=3.0, catalog=catalog[:2])
        entry, ok = select_diameter(50.0, tiny, FLUID)
        assert not ok and entry.dn == "DN80"

    def test_empty_catalog_rejected(self):
        cfg = SizingConfig()
        with pytest.raises(InputError, match="empty"):
            select_diameter(1.0, cfg, FLUID)

    def test_monotone_in_flow(self, cfg):
        flows = np.linspace(0.0, 120.0, 300)
        last = 0.0
        for f in flows:
            entry, _ = select_diameter(float(f), cfg, FLUID)
            assert entry.inner_diameter >= last
            last = entry.inner_diameter

    def test_velocity_limit_can_govern(self, catalog):
        loose_r = SizingConfig(delta_t=30.0, r_max=1e9, v_max=1.0, catalog=catalog)
        entry, ok = select_diameter(3.0, loose_r, FLUID)
        r, v = pressure_gradient(3.0, entry, FLUID)
        assert ok and v <= 1.0

    def test_default_catalog_loads(self):
        entries = default_catalog()
        assert entries[0].dn == "DN25"
        assert entries[-1].dn == "DN500"


def _line_city(loads):
    """Plant P - A - B line with building loads (kW) at A and B."""
    g = NetworkGraph()
    g.add_node("P", NodeKind.PLANT, PlanePoint(0, 0))
    g.add_node("A", NodeKind.JUNCTION, PlanePoint(100, 0))
    g.add_node("B", NodeKind.JUNCTION, PlanePoint(200, 0))
    g.add_edge("P", "A", 100.0)
    g.add_edge("A", "B", 100.0)
    for junction, load in loads.items():
        bid = f"b_{junction.lower()}"
        g.add_node(bid, NodeKind.BUILDING, PlanePoint(g.nodes[junction].pos.x, 10), {"nominal_load": load})
        g.add_edge(bid, junction, 10.0)
    return g


class TestRouteFlows:
    def test_line_accumulation(self, cfg):
        # 0.5 kg/s at A and 0.2 kg/s at B: P-A carries 0.7, A-B carries 0.2
        g = _line_city({"A": 0.5 * FLUID.cp * 30.0, "B": 0.2 * FLUID.cp * 30.0})
        flows = route_flows(g, cfg, FLUID)
        magnitudes = edge_flow_magnitudes(g, flows)
        assert magnitudes[("A", "P")] == pytest.approx(0.7, rel=1e-12)
        assert magnitudes[("A", "B")] == pytest.approx(0.2, rel=1e-12)

    def test_single_building_unique_path(self, cfg):
        g = _line_city({"B": 125.4})
        flows = route_flows(g, cfg, FLUID)
        magnitudes = edge_flow_magnitudes(g, flows)
        assert magnitudes[("A", "P")] == pytest.approx(1.0)
        assert magnitudes[("A", "B")] == pytest.approx(1.0)
        assert magnitudes[("B", "b_b")] == pytest.approx(1.0)

    def test_equidistant_plants_tie_to_smaller_id(self, cfg):
        g = NetworkGraph()
        g.add_node("p_a", NodeKind.PLANT, PlanePoint(0, 0))
        g.add_node("p_b", NodeKind.PLANT, PlanePoint(200, 0))
        g.add_node("m", NodeKind.JUNCTION, PlanePoint(100, 0))
        g.add_node("b_x", NodeKind.BUILDING, PlanePoint(100, 10), {"nominal_load": 125.4})
        g.add_edge("p_a", "m", 100.0)
        g.add_edge("p_b", "m", 100.0)
        g.add_edge("b_x", "m", 10.0)
        flows = route_flows(g, cfg, FLUID)
        assert ("m", "p_a") in flows
        assert ("m", "p_b") not in flows

    def test_no_plants_rejected(self, cfg):
        g = NetworkGraph()
        g.add_node("b_x", NodeKind.BUILDING, PlanePoint(0, 0), {"nominal_load": 10.0})
        with pytest.raises(InfeasibleModelError, match="no supply node"):
            route_flows(g, cfg, FLUID)

    def test_unreachable_building_listed(self, cfg):
        g = _line_city({"A": 100.0})
        g.add_node("b_far", NodeKind.BUILDING, PlanePoint(999, 999), {"nominal_load": 5.0})
        with pytest.raises(InfeasibleModelError, match="b_far"):
            route_flows(g, cfg, FLUID)

    def test_flow_conservation_at_junctions(self, cfg):
        g = _toy_tree(cfg)
        flows = route_flows(g, cfg, FLUID)
        for node in g.nodes.values():
            if node.kind is not NodeKind.JUNCTION:
                continue
            net = 0.0
            for neighbor in g.neighbors(node.id):
                net += flows.get((node.id, neighbor), 0.0)
                net -= flows.get((neighbor, node.id), 0.0)
            assert net == pytest.approx(0.0, abs=1e-9)

    def test_plant_inflow_equals_building_flows(self, cfg):
        g = _toy_tree(cfg)
        flows = route_flows(g, cfg, FLUID)
        plant_in = sum(f for (a, b), f in flows.items() if b == "P")
        total = sum(
            nominal_mass_flow(n.attrs["nominal_load"], cfg, FLUID)
            for n in g.nodes_of_kind(NodeKind.BUILDING)
        )
        assert plant_in == pytest.approx(total, abs=1e-9)


def _toy_tree(cfg):
    """Plant at the root of a small binary tree with leaf buildings."""
    g = NetworkGraph()
    g.add_node("P", NodeKind.PLANT, PlanePoint(0, 0))
    g.add_node("j0", NodeKind.JUNCTION, PlanePoint(100, 0))
    g.add_node("j1", NodeKind.JUNCTION, PlanePoint(200, 100))
    g.add_node("j2", NodeKind.JUNCTION, PlanePoint(200, -100))
    g.add_edge("P", "j0", 100.0)
    g.add_edge("j0", "j1", 140.0)
    g.add_edge("j0", "j2", 140.0)
    loads = {"j1": 210.0, "j2": 95.0, "j0": 44.0}
    for junction, load in loads.items():
        bid = f"b_{junction}"
        pos = g.nodes[junction].pos
        g.add_node(bid, NodeKind.BUILDING, PlanePoint(pos.x, pos.y + 20), {"nominal_load": load})
        g.add_edge(bid, junction, 20.0)
    return g


class TestSizeNetwork:
    def test_line_composition(self, cfg):
        g = _line_city({"A": 0.5 * FLUID.cp * 30.0, "B": 0.2 * FLUID.cp * 30.0})
        size_network(g, cfg, FLUID)
        pa = g.get_edge("P", "A")
        ab = g.get_edge("A", "B")
        assert pa.nominal_flow == pytest.approx(0.7)
        assert ab.nominal_flow == pytest.approx(0.2)
        assert pa.dn == "DN50" and ab.dn == "DN50"
        assert all(e.dn is not None and e.nominal_flow is not None for e in g.edges())

    def test_zero_demand_gets_smallest_dn(self, cfg):
        g = _line_city({"A": 0.0, "B": 0.0})
        size_network(g, cfg, FLUID)
        assert all(e.dn == "DN50" for e in g.edges())
        assert all(e.nominal_flow == 0.0 for e in g.edges())

    def test_star_of_identical_buildings_identical_service_dn(self, cfg):
        g = NetworkGraph()
        g.add_node("P", NodeKind.PLANT, PlanePoint(0, 0))
        g.add_node("hub", NodeKind.JUNCTION, PlanePoint(50, 0))
        g.add_edge("P", "hub", 50.0)
        for i in range(10):
            bid = f"b_{i}"
            angle = 2 * math.pi * i / 10
            g.add_node(
                bid,
                NodeKind.BUILDING,
                PlanePoint(50 + 30 * math.cos(angle), 30 * math.sin(angle)),
                {"nominal_load": 50.0},
            )
            g.add_edge(bid, "hub", 30.0)
        size_network(g, cfg, FLUID)
        service_dns = {g.get_edge(f"b_{i}", "hub").dn for i in range(10)}
        assert len(service_dns) == 1

    def test_tree_dn_non_increasing_toward_leaves(self, cfg):
        g = _toy_tree(cfg)
        size_network(g, cfg, FLUID)
        root = g.get_edge("P", "j0")
        for leaf_edge in (g.get_edge("j0", "j1"), g.get_edge("j0", "j2")):
            assert leaf_edge.inner_diameter <= root.inner_diameter

    def test_flagged_edges_reported(self, catalog):
        tight = SizingConfig(delta_t=30.0, r_max=5.0, v_max=0.05, catalog=catalog[:1])
        g = _line_city({"B": 500.0})
        summary = size_network(g, tight, FLUID)
        assert summary.flagged_count > 0
        assert all(e.dn == "DN50" for e in g.edges() if e.nominal_flow)
