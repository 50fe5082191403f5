"""
Nominal flows and catalog pipe diameters
========================================

With the routing and the plant location known, every building's design
flow follows its shortest path to the plant; pipes then get the
smallest catalog diameter that respects the pressure-gradient and
velocity limits.
"""

from dhforge.geo import PlanePoint
from dhforge.hydro import (
    FluidProps,
    SizingConfig,
    default_catalog,
    edge_flow_magnitudes,
    nominal_mass_flow,
    pressure_gradient,
    route_flows,
    size_network,
)
from dhforge.netgraph import NetworkGraph, NodeKind

fluid = FluidProps()  # water around 85 degC
cfg = SizingConfig(delta_t=30.0, r_max=250.0, v_max=3.0, catalog=default_catalog())

print("design flow for a 125.4 kW building at 30 K spread:",
      f"{nominal_mass_flow(125.4, cfg, fluid):.3f} kg/s")

# a plant feeding two street branches
g = NetworkGraph()
g.add_node("p_plant", NodeKind.PLANT, PlanePoint(0, 0), {"name": "plant"})
g.add_node("j_main", NodeKind.JUNCTION, PlanePoint(200, 0))
g.add_node("j_north", NodeKind.JUNCTION, PlanePoint(500, 200))
g.add_node("j_south", NodeKind.JUNCTION, PlanePoint(500, -200))
g.add_edge("p_plant", "j_main", 200.0)
g.add_edge("j_main", "j_north", 360.0)
g.add_edge("j_main", "j_south", 360.0)

loads = {"j_north": [420.0, 180.0, 95.0], "j_south": [640.0, 310.0]}
for junction, kw_list in loads.items():
    for i, kw in enumerate(kw_list):
        bid = f"b_{junction[2:]}{i}"
        pos = g.nodes[junction].pos
        g.add_node(bid, NodeKind.BUILDING, PlanePoint(pos.x + 20 * (i + 1), pos.y + 30), {"nominal_load": kw})
        g.add_edge(bid, junction, 36.0)

flows = route_flows(g, cfg, fluid)
magnitudes = edge_flow_magnitudes(g, flows)
print("\nper-edge design flows (kg/s):")
for (u, v), m in sorted(magnitudes.items()):
    print(f"  {u:<10} - {v:<10} {m:6.2f}")

size_network(g, cfg, fluid)
print("\nselected diameters:")
for edge in sorted(g.edges(), key=lambda e: e.key()):
    r, vel = pressure_gradient(edge.nominal_flow, next(
        c for c in cfg.catalog if c.dn == edge.dn
    ), fluid)
    print(f"  {edge.u:<10} - {edge.v:<10} {edge.dn:<6} "
          f"({edge.inner_diameter * 1000:5.1f} mm, {r:6.1f} Pa/m, {vel:4.2f} m/s)")

root = g.get_edge("p_plant", "j_main")
print(f"\nthe trunk carries everything: {root.nominal_flow:.2f} kg/s in {root.dn}")
