"""Permittivity coefficients and the derived stability diagnostics.

A coefficient is any object with vectorised ``value(x, y)``,
``gradient(x, y) -> (dx, dy)`` and ``hessian(x, y) -> (dxx, dxy, dyy)``
methods. Arrays broadcast; scalars give scalars.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

SUPPORT = (0.25, 0.75)


class ConstantPermittivity:
    def __init__(self, c: float = 1.0):
        self.c = float(c)

    def value(self, x, y):
        return np.full(np.broadcast(x, y).shape, self.c)[()]

    def gradient(self, x, y):
        z = np.zeros(np.broadcast(x, y).shape)[()]
        return z, z

    def hessian(self, x, y):
        z = np.zeros(np.broadcast(x, y).shape)[()]
        return z, z, z

    def __repr__(self):
        return f"ConstantPermittivity({self.c})"


class FunctionCoefficient:
    """Coefficient assembled from user callables.

    ``hessian`` may be omitted when only value and gradient are needed
    (assembly never uses it).
    """

    def __init__(
        self,
        value: Callable,
        gradient: Callable,
        hessian: Callable | None = None,
        name: str = "custom",
    ):
        self._value = value
        self._gradient = gradient
        self._hessian = hessian
        self.name = name

    def value(self, x, y):
        shape = np.broadcast(x, y).shape
        return np.broadcast_to(self._value(x, y), shape).astype(float)[()]

    def gradient(self, x, y):
        shape = np.broadcast(x, y).shape
        gx, gy = self._gradient(x, y)
        return (
            np.broadcast_to(gx, shape).astype(float)[()],
            np.broadcast_to(gy, shape).astype(float)[()],
        )

    def hessian(self, x, y):
        if self._hessian is None:
            raise NotImplementedError(f"coefficient {self.name!r} has no Hessian")
        shape = np.broadcast(x, y).shape
        return tuple(np.broadcast_to(c, shape).astype(float)[()] for c in self._hessian(x, y))

    def __repr__(self):
        return f"FunctionCoefficient({self.name!r})"


class BumpPermittivity:
    """``1 + sin^m(pi(2x-1/2)) sin^m(pi(2y-1/2))`` on ``[1/4, 3/4]^2``, 1 elsewhere."""

    def __init__(self, m: int):
        if isinstance(m, bool) or int(m) != m or m < 2:
            raise ValueError(f"exponent m must be an integer >= 2, got {m!r}")
        self.m = int(m)

    def __repr__(self):
        return f"BumpPermittivity(m={self.m})"

    def _factor(self, s):
        """Return (g, g', g'') for g(s) = sin^m(pi(2s - 1/2)), zero off the support."""
        s = np.asarray(s, dtype=float)
        m = self.m
        inside = (s >= SUPPORT[0]) & (s <= SUPPORT[1])
        arg = np.pi * (2.0 * s - 0.5)
        sn = np.where(inside, np.sin(arg), 0.0)
        cs = np.cos(arg)
        k = 2.0 * np.pi
        g = sn**m
        g1 = np.where(inside, m * sn ** (m - 1) * cs * k, 0.0)
        g2 = np.where(
            inside, k * k * (m * (m - 1) * sn ** (m - 2) * cs * cs - m * sn**m), 0.0
        )
        return g, g1, g2

    def value(self, x, y):
        gx, _, _ = self._factor(x)
        gy, _, _ = self._factor(y)
        return (1.0 + gx * gy)[()]

    def gradient(self, x, y):
        gx, dgx, _ = self._factor(x)
        gy, dgy, _ = self._factor(y)
        return (dgx * gy)[()], (gx * dgy)[()]

    def hessian(self, x, y):
        gx, dgx, ddgx = self._factor(x)
        gy, dgy, ddgy = self._factor(y)
        return (ddgx * gy)[()], (dgx * dgy)[()], (gx * ddgy)[()]


@dataclass(frozen=True)
class CoefficientDiagnostics:
    eta: float
    sup_eps_minus_one: float
    seminorm_1: float
    seminorm_2: float
    gradient_norm: str = "euclidean"
    samples: int = 1001


def compute_diagnostics(
    model, samples: int = 1001, box: tuple[float, float] = SUPPORT, chunk: int = 256
) -> CoefficientDiagnostics:
    """Sample the coefficient on a uniform ``samples x samples`` grid over ``box``.

    ``seminorm_1`` is the largest Euclidean norm of the gradient,
    ``seminorm_2`` the largest absolute Hessian entry, and
    ``eta = 2 + seminorm_1 + 2*seminorm_2``. The grid is swept in row chunks
    so fine samplings do not materialise at once.
    """
    t = np.linspace(box[0], box[1], samples)
    sup = s1 = s2 = 0.0
    for start in range(0, samples, chunk):
        yy, xx = np.meshgrid(t[start : start + chunk], t, indexing="ij")
        eps = model.value(xx, yy)
        gx, gy = model.gradient(xx, yy)
        hxx, hxy, hyy = model.hessian(xx, yy)
        sup = max(sup, float(np.max(np.abs(eps - 1.0))))
        s1 = max(s1, float(np.sqrt(np.max(gx * gx + gy * gy))))
        s2 = max(s2, float(max(np.max(np.abs(h)) for h in (hxx, hxy, hyy))))
    return CoefficientDiagnostics(
        eta=2.0 + s1 + 2.0 * s2,
        sup_eps_minus_one=sup,
        seminorm_1=s1,
        seminorm_2=s2,
        samples=samples,
    )
