"""Structured triangulations of the unit square.

Nodes are numbered lexicographically, row by row from ``y = 0``: the node in
column ``i`` and row ``j`` of an ``n x n`` cell grid has index ``j*(n+1) + i``.
Each square cell is cut along its lower-left to upper-right diagonal, which
keeps the triangle set invariant under the swap ``(x, y) -> (y, x)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAX_LEVEL = 12

# Local edge q joins vertices EDGE_VERTICES[q]; its midpoint is quadrature node q.
EDGE_VERTICES = np.array([[0, 1], [1, 2], [2, 0]])


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


class Mesh:
    """Immutable P1 triangulation with a per-element geometry cache.

    Attributes
    ----------
    level : int
        Refinement level ``l`` (``h = 2**-l``); ``-1`` for meshes built
        directly from a cell count that is not a power of two.
    h : float
        Edge length of the square cells.
    nodes : (nno, 2) float array
    triangles : (nel, 3) int array, counterclockwise vertex order
    boundary_node : (nno,) bool array
    area : (nel,) float array
    centroid : (nel, 2) float array
    grad : (nel, 3, 2) float array
        Constant gradients of the three nodal basis functions on each element.
    midpoints : (nel, 3, 2) float array
        Edge midpoints, ordered as ``EDGE_VERTICES``.
    """

    def __init__(self, nodes, triangles, boundary_node, h, level=-1):
        self.nodes = _readonly(np.ascontiguousarray(nodes, dtype=float))
        self.triangles = _readonly(np.ascontiguousarray(triangles, dtype=np.int64))
        self.boundary_node = _readonly(np.asarray(boundary_node, dtype=bool))
        self.h = float(h)
        self.level = int(level)

        v = self.nodes[self.triangles]  # (nel, 3, 2)
        d1 = v[:, 1] - v[:, 0]
        d2 = v[:, 2] - v[:, 0]
        det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        self.area = _readonly(0.5 * det)
        self.centroid = _readonly(v.mean(axis=1))

        # Gradient of the basis function at vertex i is the inward normal of the
        # opposite edge scaled by 1/(2 area): rot90(S_k - S_j) / det.
        grad = np.empty_like(v)
        for i in range(3):
            j, k = (i + 1) % 3, (i + 2) % 3
            e = v[:, k] - v[:, j]
            grad[:, i, 0] = -e[:, 1] / det
            grad[:, i, 1] = e[:, 0] / det
        self.grad = _readonly(grad)
        self.midpoints = _readonly(
            0.5 * (v[:, EDGE_VERTICES[:, 0]] + v[:, EDGE_VERTICES[:, 1]])
        )

    @property
    def nno(self) -> int:
        return self.nodes.shape[0]

    @property
    def nel(self) -> int:
        return self.triangles.shape[0]

    def __repr__(self):
        return f"Mesh(level={self.level}, nel={self.nel}, nno={self.nno})"

    def swap_permutation(self) -> np.ndarray:
        """Node permutation induced by ``(x, y) -> (y, x)``.

        ``perm[i]`` is the index of the node located at the mirror image of
        node ``i``.
        """
        n = round(1.0 / self.h)
        idx = np.arange(self.nno)
        j, i = divmod(idx, n + 1)
        return i * (n + 1) + j

    def dump(self, path) -> None:
        """Write nodes (``x y boundary_flag``) then elements (``i j k``)."""
        path = Path(path)
        with path.open("w") as fh:
            fh.write(f"{self.nno} {self.nel}\n")
            for (x, y), b in zip(self.nodes, self.boundary_node):
                fh.write(f"{float(x)!r} {float(y)!r} {int(b)}\n")
            for tri in self.triangles:
                fh.write("{} {} {}\n".format(*tri))


@dataclass(frozen=True)
class ElementGeometry:
    area: float
    vertices: np.ndarray
    centroid: np.ndarray
    basis_gradients: np.ndarray
    edge_midpoints: np.ndarray


def structured_mesh(ncells: int, level: int = -1) -> Mesh:
    """Triangulate ``[0,1]^2`` with ``ncells x ncells`` squares, two triangles each."""
    if ncells < 1:
        raise ValueError(f"ncells must be positive, got {ncells}")
    n = ncells
    h = 1.0 / n
    coords = np.arange(n + 1) * h
    coords[-1] = 1.0
    xx, yy = np.meshgrid(coords, coords)
    nodes = np.column_stack([xx.ravel(), yy.ravel()])

    j, i = np.divmod(np.arange(n * n), n)
    ll = j * (n + 1) + i
    lr = ll + 1
    ul = ll + n + 1
    ur = ul + 1
    lower = np.column_stack([ll, lr, ur])
    upper = np.column_stack([ll, ur, ul])
    triangles = np.empty((2 * n * n, 3), dtype=np.int64)
    triangles[0::2] = lower
    triangles[1::2] = upper

    jj, ii = np.divmod(np.arange((n + 1) ** 2), n + 1)
    boundary = (ii == 0) | (ii == n) | (jj == 0) | (jj == n)
    return Mesh(nodes, triangles, boundary, h, level)


def build_structured_mesh(level: int) -> Mesh:
    """Mesh of level ``l``: ``2**l`` cells per side, ``h = 2**-l``.

    >>> m = build_structured_mesh(1)
    >>> m.nel, m.nno
    (8, 9)
    """
    if isinstance(level, bool) or not isinstance(level, (int, np.integer)):
        raise TypeError(f"level must be an integer, got {level!r}")
    if not 1 <= level <= MAX_LEVEL:
        raise ValueError(f"level must lie in [1, {MAX_LEVEL}], got {level}")
    return structured_mesh(2**level, level=int(level))


def element_geometry(mesh: Mesh, k: int) -> ElementGeometry:
    if not 0 <= k < mesh.nel:
        raise IndexError(f"element index {k} out of range for {mesh.nel} elements")
    return ElementGeometry(
        area=float(mesh.area[k]),
        vertices=mesh.nodes[mesh.triangles[k]].copy(),
        centroid=mesh.centroid[k].copy(),
        basis_gradients=mesh.grad[k].copy(),
        edge_midpoints=mesh.midpoints[k].copy(),
    )
