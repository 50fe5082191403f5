"""
Recover a network from an image-based map
=========================================

When only a picture of the network exists, the route geometry can be
recovered by color masking, skeletonization and georeferencing with a
few control points. Here we fabricate such a map, then run the
extraction chain and compare against the drawn truth.
"""

import numpy as np
from PIL import Image, ImageDraw

from dhforge.geo import GeoPoint, PlanePoint, Projection
from dhforge.ingest import polylines_to_graph
from dhforge.rastermap import ControlPoint, RasterMap, extract_network

METERS_PER_PIXEL = 10.0
SIZE = (160, 120)  # (width, height) pixels
proj = Projection(GeoPoint(7.0, 51.5))

# --- fabricate the "operator map": blue lines on white ---------------
truth = [
    [(150.0, 300.0), (900.0, 300.0), (1400.0, 700.0)],
    [(900.0, 300.0), (900.0, 1000.0)],
]
img = Image.new("RGB", SIZE, (255, 255, 255))
draw = ImageDraw.Draw(img)
for path in truth:
    pixels = [(x / METERS_PER_PIXEL, SIZE[1] - 1 - y / METERS_PER_PIXEL) for x, y in path]
    draw.line(pixels, fill=(0, 20, 230), width=4)
raster = RasterMap(np.asarray(img, dtype=np.uint8))
print(f"map: {raster.width} x {raster.height} px at {METERS_PER_PIXEL} m/px")


# --- three geo-reference points anchor pixel space to the world ------
def control(col, row):
    x = col * METERS_PER_PIXEL
    y = (SIZE[1] - 1 - row) * METERS_PER_PIXEL
    return ControlPoint(col, row, proj.unproject(PlanePoint(x, y)))


control_points = [control(0, 0), control(SIZE[0] - 1, 0), control(0, SIZE[1] - 1)]

# --- extract: mask the line color, thin to 1 px, trace, unproject ----
polylines = extract_network(raster, control_points, (0, 20, 230), tolerance=40, proj=proj)
print(f"extracted {len(polylines)} polylines")

graph = polylines_to_graph([proj.project_path(line) for line in polylines], snap_tol=1.0)
print(f"graph: {graph.num_nodes()} nodes, {graph.num_edges()} edges, "
      f"{len(graph.connected_components())} component(s)")

# endpoints of the recovered network should mirror the drawn branches
leaves = [n for n in sorted(graph.nodes) if graph.degree(n) == 1]
print(f"network endpoints: {len(leaves)}")
for node_id in leaves:
    pos = graph.nodes[node_id].pos
    print(f"  {node_id}: ({pos.x:7.1f}, {pos.y:7.1f}) m")
print("drawn endpoints were:", [p for path in truth for p in (path[0], path[-1])])
