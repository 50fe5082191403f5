import pytest

import _toycity


@pytest.fixture(scope="session")
def toycity_dir(tmp_path_factory):
    """Toy city input files written once per session."""
    directory = tmp_path_factory.mktemp("toycity")
    _toycity.write_inputs(directory)
    return directory


@pytest.fixture()
def toy_graph():
    """The toy network as an in-memory junction graph (plane space)."""
    from dhforge.geo import Projection, bounding_box_center
    from dhforge.ingest import parse_kml, polylines_to_graph

    polylines = parse_kml(_toycity.kml_text())
    proj = Projection(bounding_box_center([p for line in polylines for p in line]))
    g = polylines_to_graph([proj.project_path(line) for line in polylines], snap_tol=1.0)
    return g, proj
