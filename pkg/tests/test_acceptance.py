"""Acceptance criteria 1-9.

Each test records one status line (shown in the terminal summary and printed
to stdout) and then asserts. Criterion 3 is advisory: it reports drift of
the absolute errors but does not gate.
"""

import time
import warnings

import numpy as np
import pytest

from maxwell_p1 import (
    BumpPermittivity,
    ConstantPermittivity,
    ExactSolution,
    ManufacturedSource,
    TimeGrid,
    assemble_div_div,
    assemble_lumped_mass,
    assemble_operator,
    assemble_stiffness,
    fd_oracle_f,
    run,
)
from maxwell_p1.harness.config import StudyConfig
from maxwell_p1.harness.study import run_case, run_study
from maxwell_p1.permittivity import SUPPORT
from maxwell_p1.timestepper import build_problem
from oracles import COEFFICIENTS, richardson_div_div

RATE_M = (2, 3, 6, 7)
OTHER_M = (4, 5, 8, 9)
RUNTIME_TARGET = 300.0


def record(log, n, ok, detail, status=None):
    status = status or ("PASS" if ok else "FAIL")
    log[n] = (status, detail)
    print(f"criterion {n}: {status}  {detail}")


@pytest.fixture(scope="module")
def studies(tmp_path_factory):
    out = tmp_path_factory.mktemp("acceptance")
    start = time.perf_counter()
    rate = run_study(StudyConfig(m_values=RATE_M, out=out))
    elapsed = time.perf_counter() - start
    rest = run_study(StudyConfig(m_values=OTHER_M, out=out))
    return rate, rest, elapsed


def test_criterion_1_rates(studies, acceptance_log):
    rate, _, elapsed = studies
    bands = {"e1": (2.0, 0.25), "e2": (1.0, 0.2), "e3": (1.0, 0.15)}
    parts, ok = [], True
    for m in RATE_M:
        fits = rate.slopes[m]
        assert fits["e1"].levels == [3, 4, 5, 6]
        cells = []
        for name, (target, tol) in bands.items():
            good = abs(fits[name].slope - target) <= tol
            ok &= good
            cells.append(f"{name}={fits[name].slope:.3f}{'' if good else '!'}")
        parts.append(f"m={m}: " + " ".join(cells))
    ok &= elapsed < RUNTIME_TARGET
    record(acceptance_log, 1, ok, "; ".join(parts) + f"; study {elapsed:.1f}s")
    assert ok


def test_criterion_2_ratios(studies, acceptance_log):
    rate, _, _ = studies
    bands = {"r1": (3.3, 4.7), "r2": (1.7, 2.3), "r3": (1.85, 2.15)}
    bad = []
    for m in RATE_M:
        for level in (5, 6):
            r = rate.run(m, level)
            for name, (lo, hi) in bands.items():
                v = getattr(r, name)
                if not lo <= v <= hi:
                    bad.append(f"m={m} l={level} {name}={v:.3f}")
    detail = "all ratios in range" if not bad else "out of range: " + ", ".join(bad)
    record(acceptance_log, 2, not bad, detail)
    assert not bad


def test_criterion_3_absolute_errors(studies, acceptance_log):
    rate, _, _ = studies
    r = rate.run(2, 6)
    ranges = {"e1": (4e-5, 8e-5), "e2": (0.004, 0.009), "e3": (0.022, 0.045)}
    cells, ok = [], True
    for name, (lo, hi) in ranges.items():
        v = getattr(r, name)
        good = lo <= v <= hi
        ok &= good
        cells.append(f"{name}={v:.3g} in [{lo:g}, {hi:g}]: {'yes' if good else 'no'}")
    status = "PASS" if ok else "FAIL (advisory, does not gate)"
    record(acceptance_log, 3, ok, "; ".join(cells), status)
    if not ok:
        warnings.warn("absolute errors at m=2, level 6 drift from the reference values")


def _near_support_edge(v, margin):
    return any(abs(v - s) < margin for s in SUPPORT)


def test_criterion_4_manufactured_oracles(acceptance_log):
    rng = np.random.default_rng(4)
    step = 5e-4
    margin = 2 * step
    worst_div, worst_f = 0.0, 0.0
    for m in range(2, 10):
        exact = ExactSolution(BumpPermittivity(m))
        model = exact.model
        x, y = rng.uniform(0, 1, size=(2, 1000))
        t = 0.5
        gx, gy = model.gradient(x, y)
        e = exact.e(x, y, t)
        ge = exact.grad_e(x, y, t)
        div = gx * e[:, 0] + gy * e[:, 1] + model.value(x, y) * (ge[:, 0, 0] + ge[:, 1, 1])
        worst_div = max(worst_div, float(np.max(np.abs(div))))

        source = ManufacturedSource(exact)
        count = 0
        while count < 100:
            px, py = rng.uniform(margin, 1 - margin, size=2)
            if _near_support_edge(px, margin) or _near_support_edge(py, margin):
                continue  # stencil would straddle the support edge of eps
            pt = rng.uniform(0, 0.5)
            diff = np.abs(source(px, py, pt) - fd_oracle_f(exact, px, py, pt, step))
            worst_f = max(worst_f, float(np.max(diff)))
            count += 1
    ok = worst_div < 1e-8 and worst_f < 1e-6
    record(acceptance_log, 4, ok, f"max |div(eps e)| = {worst_div:.2e}, max |f - f_FD| = {worst_f:.2e}")
    assert ok


def test_criterion_5_reduction(meshes, acceptance_log):
    mesh = meshes(4)
    nno = mesh.nno
    one = ConstantPermittivity(1.0)
    a = assemble_operator(mesh, one).toarray()
    k = assemble_stiffness(mesh).toarray()
    equal = np.array_equal(a, k)
    cross = not np.any(a[:nno, nno:]) and not np.any(a[nno:, :nno])

    # force only the first component: the second must stay exactly zero
    def f(x, y, t):
        x = np.asarray(x, dtype=float)
        return np.stack([np.sin(np.pi * x) * np.sin(np.pi * y) * (1 + t), 0 * x], axis=-1)

    problem = build_problem(mesh, one, f)
    res = run(problem, TimeGrid(0.5, 80))
    decoupled = not np.any(res.state.e_curr[nno:]) and np.any(res.state.e_curr[:nno])
    ok = equal and cross and bool(decoupled)
    record(acceptance_log, 5, ok, f"A == K: {equal}; cross blocks zero: {cross}; "
           f"second component untouched: {bool(decoupled)}")
    assert ok


def test_criterion_6_brute_force_assembly(meshes, acceptance_log):
    mesh = meshes(1)
    assert mesh.nel == 8
    worst = {}
    for name, coef in COEFFICIENTS.items():
        diff = assemble_div_div(mesh, coef).toarray() - richardson_div_div(mesh, coef)
        worst[name] = float(np.max(np.abs(diff)))
    ok = max(worst.values()) < 1e-10
    record(acceptance_log, 6, ok, ", ".join(f"eps={n}: {v:.1e}" for n, v in worst.items()))
    assert ok


def test_criterion_7_stability(studies, acceptance_log):
    rate, rest, _ = studies
    runs = rate.runs + rest.runs
    bad = [
        (r.m, r.level)
        for r in runs
        if not r.ok or r.max_abs_eh > 10 * r.max_abs_exact
    ]
    worst = max(r.max_abs_eh / r.max_abs_exact for r in runs if r.ok)
    blow = run_case(2, 3, T=100.0, tau_base=4.0)
    ok = len(runs) == 48 and not bad and blow.status == "blowup"
    record(
        acceptance_log,
        7,
        ok,
        f"{len(runs) - len(bad)}/{len(runs)} runs bounded (worst max|e_h|/max|e| = {worst:.3f}); "
        f"tau = 4h at level 3: {blow.status} at step {blow.blowup_step}",
    )
    assert ok


def test_criterion_8_swap_antisymmetry(meshes, acceptance_log):
    worst_rel, worst_abs_l1 = 0.0, 0.0
    for m in RATE_M:
        model = BumpPermittivity(m)
        for level in (1, 2, 3, 4):
            mesh = meshes(level)
            perm = mesh.swap_permutation()
            nno = mesh.nno
            acc = [0.0, 0.0]

            def observer(k, prev, curr):
                acc[0] = max(acc[0], float(np.max(np.abs(curr[:nno] + curr[nno:][perm]))))
                acc[1] = max(acc[1], float(np.max(np.abs(curr))))

            problem = build_problem(mesh, model, ManufacturedSource(ExactSolution(model)))
            run(problem, TimeGrid.from_step(0.5, 0.025 * mesh.h), observer=observer)
            if level == 1:
                # only the centre node is free and the field vanishes there
                worst_abs_l1 = max(worst_abs_l1, acc[0], acc[1])
            else:
                worst_rel = max(worst_rel, acc[0] / acc[1])
    ok = worst_rel <= 1e-10 and worst_abs_l1 < 1e-14
    record(acceptance_log, 8, ok, f"levels 2-4 relative defect {worst_rel:.1e}; "
           f"level 1 field and defect at most {worst_abs_l1:.1e}")
    assert ok


def test_criterion_9_mass(meshes, acceptance_log):
    sums_one = [
        assemble_lumped_mass(meshes(lv), ConstantPermittivity(1.0)).diag[: meshes(lv).nno].sum()
        for lv in range(1, 7)
    ]
    bump = assemble_lumped_mass(meshes(6), BumpPermittivity(2)).diag[: meshes(6).nno].sum()
    err_one = max(abs(s - 1.0) for s in sums_one)
    ok = err_one <= 1e-12 and abs(bump - 1.0625) <= 1e-3
    record(acceptance_log, 9, ok, f"unit sum error {err_one:.1e}; m=2 sum {bump:.6f}")
    assert ok
