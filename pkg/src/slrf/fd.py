"""Finite-difference Ricci flow on ds^2 = h(rho) drho^2 + m(rho) dtheta^2.

A conventional metric-based axisymmetric solver,
used as an independent reference for the lattice methods.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import FlowConfig
from .engine import FlowResult, StepDiagnostics, _quadratic_half, drive
from .lattice import _even_weights, profile


class FDError(ValueError):
    """The metric left the admissible set (m <= 0, h <= 0 or non-finite)."""


@dataclass
class MetricGrid:
    h: np.ndarray
    m: np.ndarray
    t: float = 0.0

    def __post_init__(self) -> None:
        self.h = np.asarray(self.h, dtype=float)
        self.m = np.asarray(self.m, dtype=float)
        if self.h.shape != self.m.shape:
            raise ValueError("h and m must have the same shape")

    @property
    def n_points(self) -> int:
        return self.h.size

    @property
    def delta_rho(self) -> float:
        return math.pi / (self.h.size - 1)

    @property
    def rho(self) -> np.ndarray:
        return np.linspace(0.0, math.pi, self.h.size)

    def copy(self) -> "MetricGrid":
        return MetricGrid(self.h.copy(), self.m.copy(), self.t)

    def check(self) -> None:
        if not (np.all(np.isfinite(self.h)) and np.all(np.isfinite(self.m))):
            raise FDError(f"non-finite metric at t={self.t}")
        if np.any(self.h <= 0):
            raise FDError(f"h <= 0 at t={self.t}")
        if np.any(self.m[1:-1] <= 0):
            raise FDError(f"m <= 0 at an interior point at t={self.t} (neck collapse)")


def init_metric(c3: float, c5: float, n_points: int) -> MetricGrid:
    if abs(1 + 3 * c3 + 5 * c5) < 1e-12:
        raise ValueError("1 + 3*c3 + 5*c5 must be nonzero")
    rho = np.linspace(0.0, math.pi, n_points)
    g = profile(rho, c3, c5)
    if np.any(g[1:-1] <= 0):
        raise FDError("initial data has m <= 0 at an interior point")
    m = g * g
    m[0] = m[-1] = 0.0
    return MetricGrid(np.ones(n_points), m, 0.0)


def fd_rhs_interior(grid: MetricGrid, form: str = "sqrt") -> tuple[np.ndarray, np.ndarray]:
    """(dm/dt, dh/dt) at the interior points, central differences in rho.

    ``form="literal"`` differences m directly in the flow equations. Its
    1/rho^2 terms cancel analytically near a pole but not after
    discretisation, leaving an O(1) error in dh/dt at the first points off
    each pole. ``form="sqrt"`` (default) evaluates the same equations via
    y = sqrt(m):

        dm/dt = 2 y y''/h - y y' h'/h^2,    dh/dt = 2 y''/y - y' h'/(y h)
    """
    d = grid.delta_rho
    m, h = grid.m, grid.h
    mc, hc = m[1:-1], h[1:-1]
    if np.any(mc <= 0) or np.any(hc <= 0):
        raise FDError("m or h nonpositive at an interior point")
    h1 = (h[2:] - h[:-2]) / (2 * d)
    if form == "literal":
        m1 = (m[2:] - m[:-2]) / (2 * d)
        m2 = (m[2:] - 2 * mc + m[:-2]) / (d * d)
        dm = -m1 * m1 / (2 * mc * hc) + m2 / hc - m1 * h1 / (2 * hc * hc)
        dh = -m1 * m1 / (2 * mc * mc) + m2 / mc - m1 * h1 / (2 * mc * hc)
        return dm, dh
    if form != "sqrt":
        raise ValueError(f"unknown form {form!r}")
    y = np.sqrt(np.maximum(m, 0.0))
    yc = y[1:-1]
    y1 = (y[2:] - y[:-2]) / (2 * d)
    y2 = (y[2:] - 2 * yc + y[:-2]) / (d * d)
    dm = 2 * yc * y2 / hc - yc * y1 * h1 / (hc * hc)
    dh = 2 * y2 / yc - y1 * h1 / (yc * hc)
    return dm, dh


def _pole_rate(m0, m1, m2, h0, h1, d):
    # even extension: m(-rho) = m(rho), h(-rho) = h(rho)
    m_dd = 2 * (m1 - m0) / (d * d)
    m_dddd = (2 * m2 - 8 * m1 + 6 * m0) / d**4
    h_dd = 2 * (h1 - h0) / (d * d)
    if m_dd <= 0:
        raise FDError("m'' <= 0 at a pole (degenerate cap)")
    return m_dddd / (2 * m_dd) - h_dd / h0


def fd_rhs_poles(grid: MetricGrid) -> tuple[np.ndarray, np.ndarray]:
    """(dm/dt, dh/dt) at rho = 0 and rho = pi.

    dh/dt = m''''/(2 m'') - h''/h, the rho -> 0 limit of the interior h
    equation for smooth (odd sqrt(m), even h) data.
    """
    if grid.n_points < 5:
        raise FDError("need at least 5 points for the pole stencils")
    d = grid.delta_rho
    m, h = grid.m, grid.h
    north = _pole_rate(m[0], m[1], m[2], h[0], h[1], d)
    south = _pole_rate(m[-1], m[-2], m[-3], h[-1], h[-2], d)
    return np.zeros(2), np.array([north, south])


def fd_rhs(grid: MetricGrid, form: str = "sqrt") -> tuple[np.ndarray, np.ndarray]:
    dm_i, dh_i = fd_rhs_interior(grid, form)
    dm_p, dh_p = fd_rhs_poles(grid)
    dm = np.concatenate([[dm_p[0]], dm_i, [dm_p[1]]])
    dh = np.concatenate([[dh_p[0]], dh_i, [dh_p[1]]])
    return dm, dh


def smoothness_repair(grid: MetricGrid, n_g: int = 2, m_g: int = 4,
                      pin_pole_h: bool = True) -> MetricGrid:
    """Replace sqrt(m) within n_g points of each pole by an odd interpolant.

    sqrt(m)/rho is fitted as a polynomial in rho**2 through the points
    n_g..m_g, which keeps sqrt(m) odd about the pole. With `pin_pole_h` the
    pole value of h is then set to the square of that fit at rho = 0, so that
    (sqrt m)' = sqrt h holds at both poles.
    """
    out = grid.copy()
    y = np.sqrt(np.maximum(out.m, 0.0))
    d = grid.delta_rho
    r = np.arange(m_g + 1) * d
    inner = np.arange(1, n_g)
    # the last row of weights evaluates the fit at rho = 0
    weights = _even_weights(r[n_g:].tolist(), r[inner].tolist() + [0.0])
    for view, hview in ((y, out.h), (y[::-1], out.h[::-1])):
        ratio = (view[n_g : m_g + 1] / r[n_g:]).tolist()
        fits = [sum(w * f for w, f in zip(row, ratio)) for row in weights]
        view[inner] = r[inner] * np.array(fits[:-1])
        view[0] = 0.0
        if pin_pole_h:
            hview[0] = fits[-1] ** 2
    out.m = y * y
    return out


def fd_step(grid: MetricGrid, dt: float, scheme: str = "rk4", n_g: int = 2, m_g: int = 4,
            form: str = "sqrt") -> MetricGrid:
    """Advance (h, m) by one FTCS or RK4 step, then repair sqrt(m) at the poles."""
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    if dt == 0:
        return grid.copy()

    def rates(h, m):
        dm, dh = fd_rhs(MetricGrid(h, m), form)
        return dh, dm

    h0, m0 = grid.h, grid.m
    if scheme == "ftcs":
        dh, dm = rates(h0, m0)
        h = h0 + dt * dh
        m = m0 + dt * dm
    elif scheme == "rk4":
        k1 = rates(h0, m0)
        k2 = rates(h0 + 0.5 * dt * k1[0], m0 + 0.5 * dt * k1[1])
        k3 = rates(h0 + 0.5 * dt * k2[0], m0 + 0.5 * dt * k2[1])
        k4 = rates(h0 + dt * k3[0], m0 + dt * k3[1])
        h = h0 + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        m = m0 + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    new = MetricGrid(h, m, grid.t + dt)
    new.check()
    new = smoothness_repair(new, n_g, m_g)
    new.check()
    return new


def arclength(grid: MetricGrid) -> np.ndarray:
    """Proper distance from the north pole, trapezoidal in sqrt(h)."""
    q = np.sqrt(grid.h)
    return np.concatenate([[0.0], np.cumsum(0.5 * (q[1:] + q[:-1]) * grid.delta_rho)])


def reparametrize(grid: MetricGrid) -> MetricGrid:
    """Resample onto a rho grid uniform in proper arclength (h becomes constant)."""
    n = grid.n_points
    sigma = arclength(grid)
    S = float(sigma[-1])
    half = (n - 1) // 2
    m_new = np.empty(n)
    targets = np.arange(half + 1) * (S / (n - 1))
    for sig, m, out, count in (
        (sigma, grid.m, m_new, half + 1),
        (S - sigma[::-1], grid.m[::-1], m_new[::-1], n - 1 - half),
    ):
        s = np.concatenate([[-sig[1]], sig])
        fm = np.concatenate([[m[1]], m])
        (vals,) = _quadratic_half(s, (fm,), targets[:count])
        out[:count] = vals
    m_new[0] = m_new[-1] = 0.0
    h_new = np.full(n, (S / math.pi) ** 2)
    return MetricGrid(h_new, m_new, grid.t)


def select_fd_timestep(grid: MetricGrid, config: FlowConfig) -> float:
    if config.fd_dt is not None:
        return config.fd_dt
    d = grid.delta_rho
    if config.timestep_mode == "paper-literal":
        dt = config.C * float(np.max(np.sqrt(grid.h))) * d
    else:
        dt = config.C * float(np.min(grid.h)) * d * d
    if not dt > 0 or math.isnan(dt):
        raise FDError(f"invalid time step {dt}")
    return dt


def metric_curvature(grid: MetricGrid) -> np.ndarray:
    """Ricci scalar 2K at the interior points, K = -(1/(y sqrt h)) (y'/sqrt h)'."""
    d = grid.delta_rho
    y = np.sqrt(grid.m)
    h = grid.h
    yc, hc = y[1:-1], h[1:-1]
    y1 = (y[2:] - y[:-2]) / (2 * d)
    y2 = (y[2:] - 2 * yc + y[:-2]) / (d * d)
    h1 = (h[2:] - h[:-2]) / (2 * d)
    return 2 * (-y2 / (yc * hc) + y1 * h1 / (2 * yc * hc * hc))


def _fd_diagnostics(grid: MetricGrid, n: int, dt: float, regridded: bool) -> StepDiagnostics:
    return StepDiagnostics(
        step_index=n,
        t=grid.t,
        dt=dt,
        max_R=float(np.max(metric_curvature(grid))),
        min_L_y=float(np.min(np.sqrt(grid.h))) * grid.delta_rho,
        min_interior_L_x=float(np.sqrt(np.min(grid.m[1:-1]))),
        regrid_performed=regridded,
    )


def run_fd(config: FlowConfig, grid: MetricGrid | None = None) -> FlowResult:
    g0 = init_metric(config.c3, config.c5, config.N) if grid is None else grid
    n_g, m_g = config.n_g, config.m_g
    result = drive(
        g0,
        config,
        step=lambda g, dt: fd_step(g, dt, config.fd_scheme, n_g, m_g, config.fd_form),
        timestep=lambda g: select_fd_timestep(g, config),
        regridder=reparametrize,
        diagnose=_fd_diagnostics,
        errors=(FDError,),
    )
    result.metadata.update(
        method="fd",
        smoothness_repair="even-polynomial substitute for the original f(rho)",
        fd_form=config.fd_form,
        filtering="none",
    )
    return result
