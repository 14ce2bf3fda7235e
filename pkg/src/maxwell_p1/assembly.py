"""Assembly of the lumped mass, stiffness, div-div operators and load vectors.

Vector unknowns use a component-major block layout: DOF ``i`` is the first
component at node ``i`` and DOF ``nno + i`` the second. Every sparse operator
of a mesh shares one CSR sparsity pattern covering all component couplings,
so sums and differences of operators are plain operations on ``.data``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .mesh import EDGE_VERTICES, Mesh

# VERTEX_EDGES[i] lists the two local edges (midpoint nodes) touching vertex i.
VERTEX_EDGES = np.array([[0, 2], [0, 1], [1, 2]])

# Load quadrature nodes are moved this fraction of the way from each edge
# midpoint toward the centroid, so sources that jump across mesh lines are
# sampled from the element's own side.
INTERIOR_PULL = 1e-10


@dataclass(frozen=True)
class DofMap:
    nno: int
    constrained: np.ndarray  # (ndof,) bool

    @classmethod
    def from_mesh(cls, mesh: Mesh) -> "DofMap":
        c = np.concatenate([mesh.boundary_node, mesh.boundary_node])
        c.flags.writeable = False
        return cls(mesh.nno, c)

    @property
    def ndof(self) -> int:
        return 2 * self.nno

    @property
    def free(self) -> np.ndarray:
        return np.flatnonzero(~self.constrained)

    @property
    def n_constrained(self) -> int:
        return int(self.constrained.sum())

    def component(self, c: int) -> slice:
        return slice(c * self.nno, (c + 1) * self.nno)


@dataclass(frozen=True)
class LumpedMass:
    """Diagonal of the lumped mass matrix, length ``ndof``."""

    diag: np.ndarray

    def __len__(self):
        return self.diag.shape[0]


class _Pattern:
    """CSR pattern of all 6x6 element couplings and the scatter map into it."""

    def __init__(self, mesh: Mesh):
        nno = mesh.nno
        ndof = 2 * nno
        tri = mesh.triangles
        local = np.concatenate([tri, tri + nno], axis=1)  # (nel, 6)
        rows = np.repeat(local, 6, axis=1).ravel()
        cols = np.tile(local, (1, 6)).ravel()
        keys = rows * ndof + cols
        uniq, slot = np.unique(keys, return_inverse=True)
        self.ndof = ndof
        self.slot = slot
        self.indices = (uniq % ndof).astype(np.int32)
        counts = np.bincount(uniq // ndof, minlength=ndof)
        self.indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int32)
        self.nnz = uniq.size

    def build(self, local_values: np.ndarray) -> sp.csr_matrix:
        """Sum (nel, 6, 6) element matrices into a CSR matrix on this pattern."""
        data = np.bincount(self.slot, weights=local_values.ravel(), minlength=self.nnz)
        return self.from_data(data)

    def from_data(self, data: np.ndarray) -> sp.csr_matrix:
        return sp.csr_matrix(
            (data, self.indices.copy(), self.indptr.copy()), shape=(self.ndof, self.ndof)
        )


def _pattern(mesh: Mesh) -> _Pattern:
    pat = mesh.__dict__.get("_csr_pattern")
    if pat is None:
        pat = _Pattern(mesh)
        mesh.__dict__["_csr_pattern"] = pat
    return pat


@lru_cache(maxsize=None)
def _midpoint_basis() -> np.ndarray:
    """``phi[q, j]``: value of vertex basis j at edge midpoint q."""
    phi = np.zeros((3, 3))
    for q, (a, b) in enumerate(EDGE_VERTICES):
        phi[q, a] = phi[q, b] = 0.5
    return phi


def assemble_lumped_mass(mesh: Mesh, model) -> LumpedMass:
    """Vertex-rule mass with the coefficient frozen at each centroid.

    ``M_ii = sum over K containing node i of eps(G_K) * area(K) / 3``,
    repeated for both components.
    """
    eps_c = np.asarray(model.value(mesh.centroid[:, 0], mesh.centroid[:, 1]), dtype=float)
    w = np.repeat(eps_c * mesh.area / 3.0, 3)
    scalar = np.bincount(mesh.triangles.ravel(), weights=w, minlength=mesh.nno)
    if not np.all(scalar > 0):
        raise ValueError("lumped mass has a nonpositive entry; coefficient must be positive")
    return LumpedMass(np.concatenate([scalar, scalar]))


def assemble_stiffness(mesh: Mesh) -> sp.csr_matrix:
    """Vector Laplacian ``(grad u, grad v)``: two identical scalar blocks."""
    g = mesh.grad
    scalar = mesh.area[:, None, None] * np.einsum("kia,kja->kij", g, g)
    local = np.zeros((mesh.nel, 6, 6))
    local[:, :3, :3] = scalar
    local[:, 3:, 3:] = scalar
    return _pattern(mesh).build(local)


def assemble_div_div(mesh: Mesh, coefficient) -> sp.csr_matrix:
    """``(div(eps u), div v)`` with ``div(eps u) = grad eps . u + eps div u``.

    The coefficient terms are integrated with the three-point edge-midpoint
    rule. Row index is the test DOF, column the trial DOF. With a constant
    unit coefficient this is the plain ``(div u, div v)`` matrix.
    """
    mx, my = mesh.midpoints[..., 0], mesh.midpoints[..., 1]
    eps = np.asarray(coefficient.value(mx, my), dtype=float)
    ex, ey = coefficient.gradient(mx, my)
    w = mesh.area / 3.0
    eps_int = w * eps.sum(axis=1)  # (nel,)
    phi = _midpoint_basis()
    # grad-eps moments against each trial basis: (nel, 2, 3)
    geps = np.stack([np.asarray(ex, dtype=float), np.asarray(ey, dtype=float)], axis=1)
    moments = w[:, None, None] * np.einsum("kcq,qj->kcj", geps, phi)

    g = mesh.grad  # (nel, 3, 2): g[k, i, d] = d phi_i / d x_d
    # trial[k, c, j] = integral of the c-th component divergence factor
    trial = eps_int[:, None, None] * np.transpose(g, (0, 2, 1)) + moments
    # local[k, d, i, c, j] = d_d phi_i * trial[k, c, j]
    local = np.einsum("kid,kcj->kdicj", g, trial).reshape(mesh.nel, 6, 6)
    return _pattern(mesh).build(local)


def assemble_operator(mesh: Mesh, model) -> sp.csr_matrix:
    """``A = K + (D_eps - D)``, all on the shared pattern.

    The difference is taken first so a unit coefficient gives ``A == K``
    bit for bit.
    """
    from .permittivity import ConstantPermittivity

    pat = _pattern(mesh)
    k = assemble_stiffness(mesh)
    d_eps = assemble_div_div(mesh, model)
    d_one = assemble_div_div(mesh, ConstantPermittivity(1.0))
    return pat.from_data(k.data + (d_eps.data - d_one.data))


def _load_from_midpoint_values(mesh: Mesh, fq: np.ndarray) -> np.ndarray:
    """Assemble ``(f, phi_i)`` from ``fq`` of shape (nel, 3, 2) at edge midpoints."""
    w = (mesh.area / 3.0)[:, None, None]
    # each vertex basis is 1/2 at its two adjacent midpoints
    local = 0.5 * w * fq[:, VERTEX_EDGES].sum(axis=2)  # (nel, 3, 2)
    tri = mesh.triangles.ravel()
    out = np.empty(2 * mesh.nno)
    for c in range(2):
        out[c * mesh.nno : (c + 1) * mesh.nno] = np.bincount(
            tri, weights=local[..., c].ravel(), minlength=mesh.nno
        )
    return out


def _load_points(mesh: Mesh):
    p = mesh.midpoints + INTERIOR_PULL * (mesh.centroid[:, None, :] - mesh.midpoints)
    return p[..., 0], p[..., 1]


def assemble_load(mesh: Mesh, source, t: float) -> np.ndarray:
    """Load vector ``(f(., t), v)`` by the edge-midpoint rule, unconstrained.

    ``f`` is sampled at the one-sided limits inside each element (see
    ``INTERIOR_PULL``).
    """
    mx, my = _load_points(mesh)
    fq = np.asarray(source(mx, my, t), dtype=float)
    return _load_from_midpoint_values(mesh, fq)


def load_function(mesh: Mesh, source, dofmap: DofMap | None = None):
    """Return ``F(t)``, the (constrained) load vector at time ``t``.

    Sources exposing ``stationary``, ``spatial`` and ``time_factors`` are
    assembled once; anything else is re-assembled at every call.
    """
    if all(hasattr(source, a) for a in ("stationary", "spatial", "time_factors")):
        mx, my = _load_points(mesh)
        b0 = _load_from_midpoint_values(mesh, source.stationary(mx, my))
        b1 = _load_from_midpoint_values(mesh, source.spatial(mx, my))
        if dofmap is not None:
            b0[dofmap.constrained] = 0.0
            b1[dofmap.constrained] = 0.0

        def load(t):
            a, b = source.time_factors(t)
            return a * b0 + b * b1

        return load

    def load(t):
        f = assemble_load(mesh, source, t)
        if dofmap is not None:
            f[dofmap.constrained] = 0.0
        return f

    return load


def apply_dirichlet(obj, dofmap: DofMap):
    """Impose homogeneous Dirichlet conditions on an assembled object.

    Sparse operators get zeroed constrained rows (the stored pattern is kept),
    lumped masses a unit diagonal on constrained DOFs, and vectors zeroed
    constrained entries. A new object is returned.
    """
    mask = dofmap.constrained
    if isinstance(obj, LumpedMass):
        d = obj.diag.copy()
        d[mask] = 1.0
        return LumpedMass(d)
    if sp.issparse(obj):
        a = obj.tocsr(copy=True)
        row_of = np.repeat(np.arange(a.shape[0]), np.diff(a.indptr))
        a.data[mask[row_of]] = 0.0
        return a
    v = np.array(obj, dtype=float, copy=True)
    v[mask] = 0.0
    return v


def dump_matrix(a: sp.spmatrix, path) -> None:
    """Write stored entries as zero-based ``row col value`` lines."""
    coo = a.tocoo()
    with Path(path).open("w") as fh:
        for r, c, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{r} {c} {v!r}\n")
