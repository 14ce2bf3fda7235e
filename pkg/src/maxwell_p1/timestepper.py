"""Explicit centred (leapfrog) time stepping with a lumped mass.

Each step solves, on free DOFs,

    M (e^{k+1} - 2 e^k + e^{k-1}) / tau^2 + A e^k = F(k tau)

with ``M`` diagonal, so no linear system is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from .assembly import (
    DofMap,
    LumpedMass,
    apply_dirichlet,
    assemble_lumped_mass,
    assemble_operator,
    load_function,
)
from .mesh import Mesh


class BlowUpError(RuntimeError):
    """The discrete solution became non-finite or exceeded the blow-up limit."""

    def __init__(self, k: int, max_abs: float):
        self.k = k
        self.max_abs = max_abs
        super().__init__(f"solution blew up at step {k} (max |e_h| = {max_abs:.3e})")


@dataclass(frozen=True)
class TimeGrid:
    T: float
    N: int

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"final time must be positive, got {self.T}")
        if self.N < 1:
            raise ValueError(f"step count must be >= 1, got {self.N}")

    @property
    def tau(self) -> float:
        return self.T / self.N

    @classmethod
    def from_step(cls, T: float, tau: float) -> "TimeGrid":
        """Grid with ``N = round(T / tau)``; ``tau`` must divide ``T``."""
        n = round(T / tau)
        if n < 1 or not math.isclose(n * tau, T, rel_tol=1e-9):
            raise ValueError(f"time step {tau} does not divide final time {T}")
        return cls(T, n)

    def time(self, k: float) -> float:
        return k * self.tau


@dataclass
class FieldState:
    e_prev: np.ndarray
    e_curr: np.ndarray
    k: int


@dataclass
class Problem:
    """Everything the time loop needs for one mesh and coefficient."""

    mesh: Mesh
    dofmap: DofMap
    A: sp.csr_matrix
    M: LumpedMass
    load: Callable[[float], np.ndarray]
    e0h: Optional[np.ndarray] = None
    e1h: Optional[np.ndarray] = None


def build_problem(mesh: Mesh, model, source=None, e0h=None, e1h=None) -> Problem:
    """Assemble constrained operators and load for ``mesh`` and ``model``."""
    dofmap = DofMap.from_mesh(mesh)
    A = apply_dirichlet(assemble_operator(mesh, model), dofmap)
    M = apply_dirichlet(assemble_lumped_mass(mesh, model), dofmap)
    if source is None:
        zero = np.zeros(dofmap.ndof)
        load = lambda t: zero  # noqa: E731
    else:
        load = load_function(mesh, source, dofmap)
    return Problem(mesh, dofmap, A, M, load, e0h, e1h)


def initialize(mesh: Mesh, dofmap: DofMap, e0h, e1h, grid: TimeGrid) -> FieldState:
    """``e^0 = e0h`` and ``e^1 = e^0 + tau e1h``, constrained."""
    n = dofmap.ndof
    e0 = np.zeros(n) if e0h is None else np.asarray(e0h, dtype=float)
    e1 = np.zeros(n) if e1h is None else np.asarray(e1h, dtype=float)
    if e0.shape != (n,) or e1.shape != (n,):
        raise ValueError(
            f"initial fields must have shape ({n},), got {e0.shape} and {e1.shape}"
        )
    prev = apply_dirichlet(e0, dofmap)
    curr = apply_dirichlet(e0 + grid.tau * e1, dofmap)
    return FieldState(prev, curr, 1)


def _advance(e_prev, e_curr, A, minv, F, tau2, mask, k, limit):
    e_next = 2.0 * e_curr - e_prev + tau2 * minv * (F - A @ e_curr)
    e_next[mask] = 0.0
    peak = float(np.max(np.abs(e_next))) if e_next.size else 0.0
    if not math.isfinite(peak) or peak > limit:
        raise BlowUpError(k + 1, peak)
    return e_next


def step(
    state: FieldState,
    A,
    M: LumpedMass,
    load: Callable[[float], np.ndarray],
    grid: TimeGrid,
    dofmap: DofMap | None = None,
    limit: float = math.inf,
) -> FieldState:
    """Advance ``(e^{k-1}, e^k)`` to ``(e^k, e^{k+1})``.

    The load is evaluated at ``t = k tau``. Constrained DOFs are those of
    ``dofmap``; without one, nothing is constrained.
    """
    if state.k < 1:
        raise ValueError("step requires k >= 1")
    mask = np.zeros(len(M), dtype=bool) if dofmap is None else dofmap.constrained
    F = load(grid.time(state.k))
    e_next = _advance(
        state.e_prev, state.e_curr, A, 1.0 / M.diag, F, grid.tau**2, mask, state.k, limit
    )
    return FieldState(state.e_curr, e_next, state.k + 1)


@dataclass
class RunResult:
    state: FieldState
    snapshots: list = field(default_factory=list)  # (k, e^k) pairs


def run(
    problem: Problem,
    grid: TimeGrid,
    observer: Callable[[int, np.ndarray, np.ndarray], None] | None = None,
    snapshot_every: int = 0,
    snapshot_dir=None,
    limit: float = math.inf,
) -> RunResult:
    """Initialise and take ``N - 1`` steps, reaching ``e^N``.

    ``observer(k, e_prev, e_curr)`` is called after every step with the
    new index ``k`` of ``e_curr``. With ``snapshot_every = s > 0`` every
    ``s``-th state is kept in memory and, if ``snapshot_dir`` is given, also
    written there as a plain-text vector.
    """
    state = initialize(problem.mesh, problem.dofmap, problem.e0h, problem.e1h, grid)
    minv = 1.0 / problem.M.diag
    tau2 = grid.tau**2
    mask = problem.dofmap.constrained
    A = problem.A
    out_dir = Path(snapshot_dir) if snapshot_dir is not None else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)

    snapshots = []

    def keep(k, e):
        if snapshot_every and k % snapshot_every == 0:
            snapshots.append((k, e.copy()))
            if out_dir is not None:
                np.savetxt(out_dir / f"step_{k:06d}.txt", e, fmt="%.17g")

    keep(0, state.e_prev)
    keep(1, state.e_curr)
    e_prev, e_curr = state.e_prev, state.e_curr
    for k in range(1, grid.N):
        F = problem.load(grid.time(k))
        e_next = _advance(e_prev, e_curr, A, minv, F, tau2, mask, k, limit)
        e_prev, e_curr = e_curr, e_next
        if observer is not None:
            observer(k + 1, e_prev, e_curr)
        keep(k + 1, e_curr)
    return RunResult(FieldState(e_prev, e_curr, grid.N), snapshots)


@dataclass(frozen=True)
class CflReport:
    C: float
    nu: float
    h_over_nu: float
    eta_bound: float  # 1 / (2 eta)
    tau: float
    cfl_ok: bool
    eta_ok: bool

    @property
    def ok(self) -> bool:
        return self.cfl_ok and self.eta_ok


def check_cfl(grid: TimeGrid, mesh: Mesh, diagnostics, C: float = 1.0) -> CflReport:
    """Advisory check of ``tau <= h / nu`` and ``tau <= 1 / (2 eta)``.

    ``nu = C sqrt(1 + 3 ||eps - 1||_inf)``; ``C`` is not known a priori, so
    the report never aborts a run.
    """
    if not C > 0:
        raise ValueError(f"CFL constant must be positive, got {C}")
    nu = C * math.sqrt(1.0 + 3.0 * diagnostics.sup_eps_minus_one)
    h_over_nu = mesh.h / nu
    eta_bound = 1.0 / (2.0 * diagnostics.eta)
    tau = grid.tau
    return CflReport(
        C=C,
        nu=nu,
        h_over_nu=h_over_nu,
        eta_bound=eta_bound,
        tau=tau,
        cfl_ok=tau <= h_over_nu,
        eta_ok=tau <= eta_bound,
    )
