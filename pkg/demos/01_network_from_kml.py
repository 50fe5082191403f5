"""
Build a pipe network graph from an operator KML file
====================================================

Operators often publish their route geometry as KML. This demo parses
a small inline document, projects it to a local plane and merges the
polylines into a junction graph.
"""

from dhforge.geo import Projection, bounding_box_center
from dhforge.ingest import parse_kml, polylines_to_graph

KML = """<?xml version="1.0" encoding="UTF-8"?>
<kml xmlns="http://www.opengis.net/kml/2.2">
 <Document>
  <Placemark>
   <name>main route</name>
   <LineString>
    <coordinates>
     7.000,51.500 7.004,51.500 7.008,51.501 7.012,51.501
    </coordinates>
   </LineString>
  </Placemark>
  <Placemark>
   <name>branch</name>
   <MultiGeometry>
    <LineString><coordinates>7.004,51.500 7.004,51.503</coordinates></LineString>
    <LineString><coordinates>7.004,51.503 7.009,51.503</coordinates></LineString>
   </MultiGeometry>
  </Placemark>
 </Document>
</kml>
"""

# 1. parse: every LineString under a Placemark becomes a WGS84 polyline
polylines = parse_kml(KML)
print(f"parsed {len(polylines)} polylines")

# 2. project about the network's bounding-box center
origin = bounding_box_center([p for line in polylines for p in line])
proj = Projection(origin)
print(f"projection origin: lon={origin.lon:.4f} lat={origin.lat:.4f}")

# 3. snap shared vertices together and build the graph
graph = polylines_to_graph([proj.project_path(line) for line in polylines], snap_tol=1.0)
print(f"graph: {graph.num_nodes()} junctions, {graph.num_edges()} pipes")
print(f"total route length: {graph.total_length():.0f} m")
print(f"connected components: {len(graph.connected_components())}")

# the branch shares a vertex with the main route, so everything is one piece
for node_id in sorted(graph.nodes):
    if graph.degree(node_id) != 2:
        pos = graph.nodes[node_id].pos
        print(f"  {node_id}: degree {graph.degree(node_id)} at ({pos.x:.0f}, {pos.y:.0f}) m")
