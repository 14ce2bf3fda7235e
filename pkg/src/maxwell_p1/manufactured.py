"""Manufactured solution and source term for the model problem.

The exact field factorises as ``e = W(x, y) t^2 / (2 eps)`` with

    W1 =  pi sin^2(pi x) sin(2 pi y),
    W2 = -pi sin^2(pi y) sin(2 pi x),

so ``eps e = W t^2/2`` is divergence free. Writing ``S = W / eps`` the source
of ``eps e_tt - lap e - grad div((eps-1) e) = f`` reduces, via
``div((eps-1) e) = -div e``, to

    f = W - (t^2/2) L,   L1 = d_yy S1 - d_xy S2,   L2 = d_xx S2 - d_xy S1.
"""

from __future__ import annotations

import numpy as np

PI = np.pi


def _w1_derivs(x, y):
    """W1 and its derivatives: (w, wx, wy, wxx, wxy, wyy)."""
    sx = np.sin(PI * x)
    s2x, c2x = np.sin(2 * PI * x), np.cos(2 * PI * x)
    s2y, c2y = np.sin(2 * PI * y), np.cos(2 * PI * y)
    sx2 = sx * sx
    w = PI * sx2 * s2y
    wx = PI**2 * s2x * s2y
    wy = 2 * PI**2 * sx2 * c2y
    wxx = 2 * PI**3 * c2x * s2y
    wxy = 2 * PI**3 * s2x * c2y
    wyy = -4 * PI**3 * sx2 * s2y
    return w, wx, wy, wxx, wxy, wyy


def _w_derivs(x, y):
    """Both components of W with derivatives, each as (w, wx, wy, wxx, wxy, wyy).

    W2(x, y) = -W1(y, x), so x- and y-derivatives trade places.
    """
    w1 = _w1_derivs(x, y)
    w, wx, wy, wxx, wxy, wyy = _w1_derivs(y, x)
    w2 = (-w, -wy, -wx, -wyy, -wxy, -wxx)
    return w1, w2


class ExactSolution:
    """Closed-form exact field for a given permittivity model."""

    def __init__(self, model):
        self.model = model

    def profile(self, x, y):
        """Return ``S = W / eps`` as an array with a trailing component axis."""
        eps = self.model.value(x, y)
        (w1, *_), (w2, *_) = _w_derivs(x, y)
        return np.stack([w1 / eps, w2 / eps], axis=-1)

    def profile_gradient(self, x, y):
        """Jacobian of ``S``: ``[..., c, a] = d S_c / d x_a`` (quotient rule)."""
        eps = self.model.value(x, y)
        ex, ey = self.model.gradient(x, y)
        out = []
        for w, wx, wy, *_ in _w_derivs(x, y):
            out.append(
                np.stack([wx / eps - w * ex / eps**2, wy / eps - w * ey / eps**2], axis=-1)
            )
        return np.stack(out, axis=-2)

    def profile_hessian(self, x, y):
        """Second derivatives of ``S``: tuple per component of (Sxx, Sxy, Syy)."""
        eps = self.model.value(x, y)
        ex, ey = self.model.gradient(x, y)
        exx, exy, eyy = self.model.hessian(x, y)
        q = 1.0 / eps
        qx, qy = -ex * q * q, -ey * q * q
        qxx = -exx * q * q + 2 * ex * ex * q**3
        qxy = -exy * q * q + 2 * ex * ey * q**3
        qyy = -eyy * q * q + 2 * ey * ey * q**3
        out = []
        for w, wx, wy, wxx, wxy, wyy in _w_derivs(x, y):
            sxx = wxx * q + 2 * wx * qx + w * qxx
            sxy = wxy * q + wx * qy + wy * qx + w * qxy
            syy = wyy * q + 2 * wy * qy + w * qyy
            out.append((sxx, sxy, syy))
        return tuple(out)

    def e(self, x, y, t):
        return self.profile(x, y) * (0.5 * t * t)

    def dt_e(self, x, y, t):
        return self.profile(x, y) * t

    def grad_e(self, x, y, t):
        return self.profile_gradient(x, y) * (0.5 * t * t)


class ManufacturedSource:
    """Right-hand side ``f(x, y, t) = W - (t^2/2) L`` for an :class:`ExactSolution`.

    ``stationary`` (``W``) and ``spatial`` (``L``) are exposed separately so
    load vectors can be assembled once and recombined for every time level.
    """

    def __init__(self, exact: ExactSolution):
        self.exact = exact

    def stationary(self, x, y):
        (w1, *_), (w2, *_) = _w_derivs(x, y)
        return np.stack([w1, w2], axis=-1)

    def spatial(self, x, y):
        (s1xx, s1xy, s1yy), (s2xx, s2xy, s2yy) = self.exact.profile_hessian(x, y)
        return np.stack([s1yy - s2xy, s2xx - s1xy], axis=-1)

    def time_factors(self, t):
        """Weights ``(a, b)`` with ``f(t) = a * stationary + b * spatial``."""
        return 1.0, -0.5 * t * t

    def __call__(self, x, y, t):
        a, b = self.time_factors(t)
        return a * self.stationary(x, y) + b * self.spatial(x, y)


def _d1(g, h):
    """Fourth-order central first-derivative from samples g(-2h..2h)."""
    return (g[-2] - 8 * g[-1] + 8 * g[1] - g[2]) / (12 * h)


def _d2(g, h):
    return (-g[-2] + 16 * g[-1] - 30 * g[0] + 16 * g[1] - g[2]) / (12 * h * h)


def fd_oracle_f(exact: ExactSolution, x: float, y: float, t: float, step: float = 5e-4):
    """Source term by finite differences of the exact field alone.

    Uses fourth-order central stencils for ``lap e`` and for
    ``grad div((eps-1) e)`` (computed directly, not through the divergence
    identity) and a second difference in time for ``e_tt``, which is exact
    for the quadratic time dependence. The default step keeps the stencil
    error near 1e-7 for every exponent 2..9; at 1e-3 it reaches 1e-5 where
    the stencil straddles the edge of the coefficient support.
    """
    if not 1e-4 <= step <= 1e-2:
        raise ValueError(f"step must lie in [1e-4, 1e-2], got {step}")
    margin = 2 * step
    if min(x, y, 1 - x, 1 - y) < margin:
        raise ValueError(f"point ({x}, {y}) closer than {margin} to the boundary")

    model = exact.model
    offs = range(-2, 3)

    def field(dx, dy):
        return exact.e(x + dx * step, y + dy * step, t)

    def weighted(dx, dy):
        xx, yy = x + dx * step, y + dy * step
        return (model.value(xx, yy) - 1.0) * exact.e(xx, yy, t)

    gxx = {i: field(i, 0) for i in offs}
    gyy = {j: field(0, j) for j in offs}
    lap = _d2(gxx, step) + _d2(gyy, step)

    # d/dx div u: second x-derivative of u1 plus mixed derivative of u2.
    u1x = {i: weighted(i, 0)[0] for i in offs}
    u2y = {j: weighted(0, j)[1] for j in offs}
    mixed = {}
    for i in offs:
        row = {j: weighted(i, j)[1] for j in offs}
        mixed[i] = _d1(row, step)  # d u2 / dy at x + i*step
    ddx_div = _d2(u1x, step) + _d1(mixed, step)
    mixed = {}
    for j in offs:
        col = {i: weighted(i, j)[0] for i in offs}
        mixed[j] = _d1(col, step)  # d u1 / dx at y + j*step
    ddy_div = _d1(mixed, step) + _d2(u2y, step)

    dt = 0.05
    ett = (exact.e(x, y, t + dt) - 2 * exact.e(x, y, t) + exact.e(x, y, t - dt)) / dt**2
    eps = model.value(x, y)
    return eps * ett - lap - np.array([ddx_div, ddy_div])
