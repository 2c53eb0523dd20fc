import numpy as np
import pytest

from helmuc.mesh import Mesh, build_uniform_mesh

UNIT = (0.0, 1.0, 0.0, 1.0)


@pytest.fixture
def unit2():
    return build_uniform_mesh(UNIT, 2, 2)


@pytest.fixture
def two_triangles():
    return build_uniform_mesh(UNIT, 1, 1)


def single_triangle_mesh(points=((0.0, 0.0), (1.0, 0.0), (0.0, 1.0))) -> Mesh:
    return Mesh(
        vertices=np.array(points, dtype=float),
        triangles=np.array([[0, 1, 2]]),
        interior_faces=np.zeros((0, 4), dtype=np.int64),
        boundary_vertex=np.ones(3, dtype=bool),
        domain=UNIT,
        h=1 / np.sqrt(3),
        cell_size=np.sqrt(2),
        n_boundary_edges=3,
        shape=(1, 1),
    )


def pytest_terminal_summary(terminalreporter):
    from tests import acceptance_log

    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_log.LINES:
            terminalreporter.write_line(line)
