"""Relative error functionals maximised over the time levels.

For a run with time step ``tau`` the three reported numbers are

    e1 = max_k ||e^k - e_h^k||            / max_k ||e^k||
    e2 = max_k ||grad(e^k - e_h^k)||      / max_k ||grad e^k||
    e3 = max_k ||d_t e^{k+1/2} - (e_h^{k+1} - e_h^k)/tau|| / max_k ||d_t e^{k+1/2}||

(ratios of maxima). Integrals use a quadrature rule on each triangle with the
exact field evaluated at the quadrature points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .mesh import Mesh


@dataclass(frozen=True)
class Rule:
    """Triangle quadrature: barycentric points (nq, 3) and weights summing to 1."""

    bary: np.ndarray
    weights: np.ndarray


def midpoint_rule() -> Rule:
    # Same node order as Mesh.midpoints.
    bary = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])
    return Rule(bary, np.full(3, 1.0 / 3.0))


def composite_centroid_rule(refinements: int) -> Rule:
    """Centroid rule on the ``4**refinements`` subtriangles of uniform refinement."""
    tris = [np.eye(3)]
    for _ in range(refinements):
        nxt = []
        for t in tris:
            a, b, c = t
            ab, bc, ca = (a + b) / 2, (b + c) / 2, (c + a) / 2
            nxt += [np.array(v) for v in ([a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca])]
        tris = nxt
    bary = np.array([t.mean(axis=0) for t in tris])
    return Rule(bary, np.full(len(tris), 1.0 / len(tris)))


def _rule(rule) -> Rule:
    if rule is None or rule == "midpoint":
        return midpoint_rule()
    if rule == "composite16":
        return composite_centroid_rule(2)
    if isinstance(rule, Rule):
        return rule
    raise ValueError(f"unknown quadrature rule {rule!r}")


def _points(mesh: Mesh, rule: Rule):
    """Physical coordinates (nel, nq) of the rule's points."""
    v = mesh.nodes[mesh.triangles]  # (nel, 3, 2)
    p = np.einsum("qi,kia->kqa", rule.bary, v)
    return p[..., 0], p[..., 1]


def _split(e_h: np.ndarray, nno: int) -> np.ndarray:
    """Block DOF vector -> nodal values (nno, 2)."""
    return np.column_stack([e_h[:nno], e_h[nno:]])


def _p1_at_points(mesh: Mesh, e_h: np.ndarray, rule: Rule) -> np.ndarray:
    vals = _split(e_h, mesh.nno)[mesh.triangles]  # (nel, 3, 2)
    return np.einsum("qi,kic->kqc", rule.bary, vals)


def _p1_gradient(mesh: Mesh, e_h: np.ndarray) -> np.ndarray:
    """Elementwise constant Jacobian ``[k, c, a] = d e_c / d x_a``."""
    vals = _split(e_h, mesh.nno)[mesh.triangles]
    return np.einsum("kic,kia->kca", vals, mesh.grad)


def _integrate(mesh: Mesh, rule: Rule, sq: np.ndarray) -> float:
    """Integrate pointwise squared magnitudes ``sq`` of shape (nel, nq)."""
    return float(np.sum(mesh.area * (sq @ rule.weights)))


def l2_error_at(mesh: Mesh, e_h, exact, t: float, rule=None):
    """Squared ``(||e - e_h||^2, ||e||^2)`` at time ``t``."""
    r = _rule(rule)
    x, y = _points(mesh, r)
    ex = exact.e(x, y, t)
    diff = ex - _p1_at_points(mesh, np.asarray(e_h, dtype=float), r)
    return _integrate(mesh, r, np.sum(diff**2, -1)), _integrate(mesh, r, np.sum(ex**2, -1))


def h1_semi_error_at(mesh: Mesh, e_h, exact, t: float, rule=None):
    """Squared ``(|e - e_h|_1^2, |e|_1^2)`` at time ``t``."""
    r = _rule(rule)
    x, y = _points(mesh, r)
    g = exact.grad_e(x, y, t)  # (nel, nq, 2, 2)
    gh = _p1_gradient(mesh, np.asarray(e_h, dtype=float))[:, None]
    return (
        _integrate(mesh, r, np.sum((g - gh) ** 2, axis=(-2, -1))),
        _integrate(mesh, r, np.sum(g**2, axis=(-2, -1))),
    )


def dt_error_half_step(mesh: Mesh, e_h_k, e_h_k1, exact, t_half: float, tau: float, rule=None):
    """Squared L2 error of the discrete rate ``(e_h^{k+1} - e_h^k)/tau`` at ``t_half``."""
    r = _rule(rule)
    x, y = _points(mesh, r)
    dt = exact.dt_e(x, y, t_half)
    rate = (np.asarray(e_h_k1, dtype=float) - np.asarray(e_h_k, dtype=float)) / tau
    diff = dt - _p1_at_points(mesh, rate, r)
    return _integrate(mesh, r, np.sum(diff**2, -1)), _integrate(mesh, r, np.sum(dt**2, -1))


def _point_operators(mesh: Mesh, rule: Rule):
    """Sparse maps from block DOF vectors to quadrature values and gradients.

    Returns ``(P, G)``: ``P @ e_h`` is (nel*nq*2,) ordered [element, point,
    component]; ``G @ e_h`` is (nel*4,) ordered [element, component, direction].
    """
    nel, nq, nno = mesh.nel, rule.bary.shape[0], mesh.nno
    tri = mesh.triangles
    rows, cols, vals = [], [], []
    base = np.arange(nel)[:, None, None] * (nq * 2)
    for c in range(2):
        r = base + np.arange(nq)[None, :, None] * 2 + c  # (nel, nq, 1)
        rows.append(np.broadcast_to(r, (nel, nq, 3)).ravel())
        cols.append(np.broadcast_to(tri[:, None, :] + c * nno, (nel, nq, 3)).ravel())
        vals.append(np.broadcast_to(rule.bary[None], (nel, nq, 3)).ravel())
    P = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(nel * nq * 2, 2 * nno),
    )
    rows, cols, vals = [], [], []
    for c in range(2):
        for a in range(2):
            r = np.arange(nel)[:, None] * 4 + 2 * c + a
            rows.append(np.broadcast_to(r, (nel, 3)).ravel())
            cols.append((tri + c * nno).ravel())
            vals.append(mesh.grad[:, :, a].ravel())
    G = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(nel * 4, 2 * nno),
    )
    return P, G


class ErrorAccumulator:
    """Running maxima of the squared numerators and denominators.

    Usable directly as a time-loop observer: ``acc(k, e_prev, e_curr)``
    records the state error of ``e^k`` and the rate error at ``k - 1/2``.
    The exact solution must be separable in time like the manufactured one
    (``e = S t^2/2``), exposing ``profile`` and ``profile_gradient``; its
    values at the quadrature points are computed once.
    """

    def __init__(self, mesh: Mesh, exact, tau: float, rule=None):
        self.mesh = mesh
        self.exact = exact
        self.tau = float(tau)
        self.rule = _rule(rule)
        x, y = _points(mesh, self.rule)
        nq = self.rule.bary.shape[0]
        self._P, self._G = _point_operators(mesh, self.rule)
        self._S = exact.profile(x, y).ravel()
        # elementwise-constant P1 gradients are compared at every point
        self._GS = exact.profile_gradient(x, y).reshape(mesh.nel, nq, 4)
        self._wp = np.repeat((mesh.area[:, None] * self.rule.weights[None, :]).ravel(), 2)
        self._wg = mesh.area[:, None] * self.rule.weights[None, :]  # (nel, nq)
        self._S_sq = float(self._wp @ self._S**2)
        self._G_sq = float(np.sum(self._wg * np.sum(self._GS**2, -1)))
        self.num = np.zeros(3)
        self.den = np.zeros(3)
        self.max_abs_eh = 0.0
        self.max_abs_exact = float(
            np.max(np.abs(exact.profile(mesh.nodes[:, 0], mesh.nodes[:, 1])))
        )
        self.max_time = 0.0

    def _update(self, j, num, den):
        if den == 0.0 and num == 0.0:
            return
        self.num[j] = max(self.num[j], num)
        self.den[j] = max(self.den[j], den)

    def add_state(self, k: int, e_h: np.ndarray) -> None:
        t = k * self.tau
        a = 0.5 * t * t
        diff = a * self._S - self._P @ e_h
        self._update(0, float(self._wp @ (diff * diff)), a * a * self._S_sq)
        gh = (self._G @ e_h).reshape(self.mesh.nel, 1, 4)
        gdiff = a * self._GS - gh
        self._update(1, float(np.sum(self._wg * np.sum(gdiff * gdiff, -1))), a * a * self._G_sq)
        self.max_abs_eh = max(self.max_abs_eh, float(np.max(np.abs(e_h))))
        self.max_time = max(self.max_time, t)

    def add_rate(self, k: int, e_k: np.ndarray, e_k1: np.ndarray) -> None:
        t = (k + 0.5) * self.tau
        diff = t * self._S - self._P @ ((e_k1 - e_k) / self.tau)
        self._update(2, float(self._wp @ (diff * diff)), t * t * self._S_sq)

    def __call__(self, k: int, e_prev: np.ndarray, e_curr: np.ndarray) -> None:
        self.add_state(k, e_curr)
        self.add_rate(k - 1, e_prev, e_curr)

    @property
    def max_abs_exact_seen(self) -> float:
        """Largest nodal |e| over the recorded time range."""
        return self.max_abs_exact * 0.5 * self.max_time**2


class DegenerateProblemError(ValueError):
    pass


@dataclass
class ErrorReport:
    level: int
    nel: int
    nno: int
    e1: float
    e2: float
    e3: float
    r1: Optional[float] = None
    r2: Optional[float] = None
    r3: Optional[float] = None

    @property
    def errors(self) -> tuple[float, float, float]:
        return self.e1, self.e2, self.e3

    def with_ratios(self, previous: "ErrorReport | None") -> "ErrorReport":
        if previous is None:
            return ErrorReport(self.level, self.nel, self.nno, self.e1, self.e2, self.e3)
        r = [p / c if c > 0 else float("inf") for p, c in zip(previous.errors, self.errors)]
        return ErrorReport(self.level, self.nel, self.nno, self.e1, self.e2, self.e3, *r)


def finalize(acc: ErrorAccumulator, level: int, mesh: Mesh) -> ErrorReport:
    if np.any(acc.den <= 0):
        raise DegenerateProblemError(
            "an error functional has a zero denominator; the exact solution vanishes"
        )
    e = np.sqrt(acc.num / acc.den)
    return ErrorReport(level, mesh.nel, mesh.nno, float(e[0]), float(e[1]), float(e[2]))


def attach_ratios(reports: list[ErrorReport]) -> list[ErrorReport]:
    """Consecutive-level ratios ``e(l-1)/e(l)`` for reports sorted by level."""
    out, prev = [], None
    for rep in reports:
        out.append(rep.with_ratios(prev))
        prev = rep
    return out
