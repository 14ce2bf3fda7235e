"""Convergence studies over (m, level) grids."""

from __future__ import annotations

import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from ..error_norms import ErrorAccumulator, finalize
from ..manufactured import ExactSolution, ManufacturedSource
from ..mesh import build_structured_mesh
from ..permittivity import BumpPermittivity, CoefficientDiagnostics, compute_diagnostics
from ..timestepper import BlowUpError, TimeGrid, build_problem, check_cfl, initialize, run
from .config import StudyConfig

log = logging.getLogger(__name__)

# A run counts as unstable once max |e_h| exceeds this multiple of the
# largest exact nodal value at the final time.
BLOWUP_FACTOR = 1e6


@dataclass
class RunRecord:
    m: int
    level: int
    nel: int
    nno: int
    h: float
    tau: float
    steps: int
    status: str  # "ok" or "blowup"
    e1: Optional[float] = None
    e2: Optional[float] = None
    e3: Optional[float] = None
    r1: Optional[float] = None
    r2: Optional[float] = None
    r3: Optional[float] = None
    max_abs_eh: Optional[float] = None
    max_abs_exact: Optional[float] = None
    blowup_step: Optional[int] = None
    cfl_nu: float = 0.0
    cfl_h_over_nu: float = 0.0
    cfl_eta_bound: float = 0.0
    cfl_ok: bool = True
    eta_ok: bool = True
    wall_clock: Optional[float] = None

    @property
    def errors(self) -> tuple:
        return self.e1, self.e2, self.e3

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass
class SlopeFit:
    slope: float
    intercept: float
    residual: float
    levels: list

    @classmethod
    def fit(cls, h, err, levels) -> "SlopeFit":
        """Least squares line through ``(log h, log err)``."""
        x, y = np.log(np.asarray(h)), np.log(np.asarray(err))
        coef, res, *_ = np.polyfit(x, y, 1, full=True)
        residual = float(res[0]) if len(res) else 0.0
        return cls(float(coef[0]), float(coef[1]), residual, list(levels))


@dataclass
class StudyResult:
    config: StudyConfig
    runs: list = field(default_factory=list)  # RunRecord, sorted by (m, level)
    diagnostics: dict = field(default_factory=dict)  # m -> CoefficientDiagnostics
    slopes: dict = field(default_factory=dict)  # m -> {"e1": SlopeFit, ...}

    def runs_for(self, m: int) -> list:
        return [r for r in self.runs if r.m == m]

    def run(self, m: int, level: int) -> RunRecord:
        for r in self.runs:
            if r.m == m and r.level == level:
                return r
        raise KeyError((m, level))

    @property
    def any_blowup(self) -> bool:
        return any(not r.ok for r in self.runs)

    def to_dict(self, include_timing: bool = True) -> dict:
        runs = []
        for r in self.runs:
            d = asdict(r)
            if not include_timing:
                d["wall_clock"] = None
            runs.append(d)
        return {
            "config": self.config.to_dict(),
            "runs": runs,
            "diagnostics": {str(m): asdict(d) for m, d in self.diagnostics.items()},
            "slopes": {
                str(m): {k: asdict(v) for k, v in fits.items()} for m, fits in self.slopes.items()
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StudyResult":
        return cls(
            config=StudyConfig.from_dict(d["config"]),
            runs=[RunRecord(**r) for r in d["runs"]],
            diagnostics={int(m): CoefficientDiagnostics(**v) for m, v in d["diagnostics"].items()},
            slopes={
                int(m): {k: SlopeFit(**v) for k, v in fits.items()}
                for m, fits in d["slopes"].items()
            },
        )


def run_case(
    m: int,
    level: int,
    T: float = 0.5,
    tau_base: float = 0.025,
    cfl_C: float = 1.0,
    diagnostics: CoefficientDiagnostics | None = None,
    snapshot_every: int = 0,
    snapshot_dir=None,
) -> RunRecord:
    """One mesh level of the manufactured-solution problem for exponent ``m``."""
    start = time.perf_counter()
    model = BumpPermittivity(m)
    exact = ExactSolution(model)
    source = ManufacturedSource(exact)
    mesh = build_structured_mesh(level)
    grid = TimeGrid.from_step(T, tau_base * 2.0**-level)
    if diagnostics is None:
        diagnostics = compute_diagnostics(model)
    cfl = check_cfl(grid, mesh, diagnostics, cfl_C)

    problem = build_problem(mesh, model, source)
    acc = ErrorAccumulator(mesh, exact, grid.tau)
    limit = BLOWUP_FACTOR * acc.max_abs_exact * 0.5 * T * T
    if limit <= 0:
        limit = math.inf
    rec = RunRecord(
        m=m,
        level=level,
        nel=mesh.nel,
        nno=mesh.nno,
        h=mesh.h,
        tau=grid.tau,
        steps=grid.N,
        status="ok",
        cfl_nu=cfl.nu,
        cfl_h_over_nu=cfl.h_over_nu,
        cfl_eta_bound=cfl.eta_bound,
        cfl_ok=cfl.cfl_ok,
        eta_ok=cfl.eta_ok,
    )
    # e^1 is part of the maxima even though no step produces it.
    first = initialize(mesh, problem.dofmap, problem.e0h, problem.e1h, grid)
    acc.add_state(1, first.e_curr)
    try:
        run(
            problem,
            grid,
            observer=acc,
            snapshot_every=snapshot_every,
            snapshot_dir=snapshot_dir,
            limit=limit,
        )
    except BlowUpError as exc:
        log.warning("m=%d level=%d: %s", m, level, exc)
        rec.status = "blowup"
        rec.blowup_step = exc.k
    else:
        rep = finalize(acc, level, mesh)
        rec.e1, rec.e2, rec.e3 = rep.e1, rep.e2, rep.e3
        rec.max_abs_eh = acc.max_abs_eh
        rec.max_abs_exact = acc.max_abs_exact_seen
    rec.wall_clock = time.perf_counter() - start
    return rec


def _ratios(runs: list) -> None:
    prev = None
    for r in runs:
        if prev is not None and prev.ok and r.ok and prev.level == r.level - 1:
            r.r1, r.r2, r.r3 = (
                p / c if c > 0 else math.inf for p, c in zip(prev.errors, r.errors)
            )
        prev = r


def fit_slopes(runs: list, n_last: int = 4) -> dict:
    """Slopes of log e_j against log h over the last ``n_last`` completed levels."""
    done = [r for r in runs if r.ok][-n_last:]
    if len(done) < 2:
        return {}
    h = [r.h for r in done]
    lv = [r.level for r in done]
    return {
        name: SlopeFit.fit(h, [getattr(r, name) for r in done], lv)
        for name in ("e1", "e2", "e3")
        if all(getattr(r, name) > 0 for r in done)
    }


def _case(args):
    return run_case(*args)


def run_study(config: StudyConfig) -> StudyResult:
    """Run every (m, level) of ``config`` and attach ratios and slopes."""
    diagnostics = {m: compute_diagnostics(BumpPermittivity(m)) for m in config.m_values}
    tasks = []
    for m, level in config.runs:
        snap_dir = None
        if config.snapshot_every:
            snap_dir = config.out / "snapshots" / f"m{m}_l{level}"
        tasks.append(
            (
                m,
                level,
                config.T,
                config.tau_base,
                config.cfl_C,
                diagnostics[m],
                config.snapshot_every,
                snap_dir,
            )
        )
    if config.serial or len(tasks) == 1:
        records = [_case(t) for t in tasks]
    else:
        workers = config.jobs or os.cpu_count() or 1
        # Largest runs first keeps the pool busy.
        order = sorted(range(len(tasks)), key=lambda i: -tasks[i][1])
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            done = list(pool.map(_case, [tasks[i] for i in order]))
        records = [None] * len(tasks)
        for i, rec in zip(order, done):
            records[i] = rec

    records.sort(key=lambda r: (r.m, r.level))
    result = StudyResult(config=config, runs=records, diagnostics=diagnostics)
    for m in config.m_values:
        runs = result.runs_for(m)
        _ratios(runs)
        result.slopes[m] = fit_slopes(runs, config.fit_levels)
    return result


def fit_applies(result: StudyResult, rec: RunRecord) -> bool:
    fits = result.slopes.get(rec.m) or {}
    return any(rec.level in f.levels for f in fits.values())


__all__ = [
    "BLOWUP_FACTOR",
    "RunRecord",
    "SlopeFit",
    "StudyResult",
    "fit_applies",
    "fit_slopes",
    "run_case",
    "run_study",
]
