import numpy as np
import pytest
from hypothesis import given, strategies as st

from maxwell_p1 import build_structured_mesh, element_geometry
from maxwell_p1.mesh import MAX_LEVEL


def test_level_one_counts(meshes):
    mesh = meshes(1)
    assert (mesh.nel, mesh.nno) == (8, 9)
    assert mesh.boundary_node.sum() == 8
    assert not mesh.boundary_node[4]
    np.testing.assert_allclose(mesh.nodes[4], [0.5, 0.5])


def test_level_six_counts(meshes):
    mesh = meshes(6)
    assert (mesh.nel, mesh.nno) == (8192, 4225)
    assert mesh.boundary_node.sum() == 4 * 64


@pytest.mark.parametrize("level", [1, 2, 3, 5])
def test_areas_positive_and_sum_to_one(meshes, level):
    mesh = meshes(level)
    np.testing.assert_allclose(mesh.area, 0.5 * mesh.h**2, rtol=1e-12)
    assert mesh.area.sum() == pytest.approx(1.0, abs=1e-12)


def test_lexicographic_numbering(meshes):
    mesh = meshes(2)
    n = 4
    for idx in (0, 3, 7, 24):
        j, i = divmod(idx, n + 1)
        np.testing.assert_allclose(mesh.nodes[idx], [i / n, j / n])


def test_reference_triangle_gradients(meshes):
    mesh = meshes(1)
    # first element is [ll, lr, ur] of the lower-left cell
    g = element_geometry(mesh, 0)
    s = 1.0 / mesh.h
    np.testing.assert_allclose(g.basis_gradients, s * np.array([[-1, 0], [1, -1], [0, 1]]), atol=1e-12)
    # gradients of a partition of unity sum to zero
    np.testing.assert_allclose(mesh.grad.sum(axis=1), 0.0, atol=1e-10)


@pytest.mark.parametrize("level", [1, 3])
def test_swap_maps_elements_to_elements(meshes, level):
    mesh = meshes(level)
    perm = mesh.swap_permutation()
    np.testing.assert_allclose(mesh.nodes[perm], mesh.nodes[:, ::-1])
    tris = {frozenset(t) for t in mesh.triangles.tolist()}
    swapped = {frozenset(perm[t].tolist()) for t in mesh.triangles}
    assert tris == swapped


def test_node_valence(meshes):
    mesh = meshes(3)
    count = np.bincount(mesh.triangles.ravel(), minlength=mesh.nno)
    assert np.all(count[~mesh.boundary_node] == 6)
    n = 8
    # the diagonal runs lower-left to upper-right, so those two corners get two elements
    corners = {0: 2, n: 1, n * (n + 1): 1, (n + 1) ** 2 - 1: 2}
    for node, expected in corners.items():
        assert count[node] == expected


@pytest.mark.parametrize("level", [0, -1, MAX_LEVEL + 1])
def test_out_of_range_level(level):
    with pytest.raises(ValueError):
        build_structured_mesh(level)


def test_non_integer_level():
    with pytest.raises(TypeError):
        build_structured_mesh(2.5)


def test_element_index_out_of_range(meshes):
    with pytest.raises(IndexError):
        element_geometry(meshes(1), 8)


def test_geometry_is_read_only(meshes):
    mesh = meshes(1)
    with pytest.raises(ValueError):
        mesh.nodes[0, 0] = 1.0


def test_dump_format(meshes, tmp_path):
    mesh = meshes(1)
    path = tmp_path / "mesh.txt"
    mesh.dump(path)
    lines = path.read_text().splitlines()
    assert lines[0].split() == ["9", "8"]
    assert len(lines) == 1 + 9 + 8
    x, y, flag = lines[5].split()
    assert (float(x), float(y), int(flag)) == (0.5, 0.5, 0)


@given(st.integers(min_value=1, max_value=5), st.data())
def test_midpoints_lie_on_edges(level, data):
    mesh = build_structured_mesh(level)
    k = data.draw(st.integers(min_value=0, max_value=mesh.nel - 1))
    v = mesh.nodes[mesh.triangles[k]]
    np.testing.assert_allclose(mesh.midpoints[k, 0], 0.5 * (v[0] + v[1]))
    np.testing.assert_allclose(mesh.midpoints[k, 1], 0.5 * (v[1] + v[2]))
    np.testing.assert_allclose(mesh.midpoints[k, 2], 0.5 * (v[2] + v[0]))
