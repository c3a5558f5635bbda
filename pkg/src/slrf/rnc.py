"""Riemann normal coordinate checks for the ladder cell.

In two dimensions the curvature tensor is fixed by the Ricci scalar,
``R_{abcd} = (R/2)(g_ac g_bd - g_ad g_bc)``, so ``R_xyxy = R/2``.

Cell layout: the origin o is the centre of rung (a d) of length L_xo with
a = (L_xo/2, 0) and d = -a. The next rung (b c) has b = (x_b, y_b),
c = (-x_b, y_b) with y_b > 0; the previous rung (e f) has f = (x_f, y_f),
e = (-x_f, y_f) with y_f < 0. The rail segments are a-b (length ds_p) and
a-f (length ds_m).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .config import FlowConfig
from .engine import lattice_laplacian
from .lattice import LadderLattice, interior_d1, interior_d2

PERTURBATIVE_LIMIT = 0.1


def rnc_length_sq(xi, xj, R: float) -> float:
    """Squared geodesic length between two points, to O(L^5)."""
    xi = np.asarray(xi, dtype=float)
    xj = np.asarray(xj, dtype=float)
    d = xj - xi
    cross = xi[0] * xj[1] - xi[1] * xj[0]
    return float(d @ d - (R / 6.0) * cross * cross)


def rnc_tangent(xi, xj, L_ij: float, R: float) -> np.ndarray:
    """Unit tangent at xi of the geodesic towards xj, to O(L^4)."""
    if not L_ij > 0:
        raise ValueError("L_ij must be positive")
    xi = np.asarray(xi, dtype=float)
    xj = np.asarray(xj, dtype=float)
    d = xj - xi
    bend = 0.5 * R * (d * (d @ xi) - xi * (d @ d))
    return (d - bend / 3.0) / L_ij


@dataclass
class CellGeometry:
    L_xo: float
    L_xp: float
    L_xm: float
    ds_p: float
    ds_m: float
    R: float
    x_b: float
    y_b: float
    x_f: float
    y_f: float

    @property
    def vertices(self) -> dict[str, np.ndarray]:
        h = self.L_xo / 2
        return {
            "o": np.array([0.0, 0.0]),
            "a": np.array([h, 0.0]),
            "d": np.array([-h, 0.0]),
            "b": np.array([self.x_b, self.y_b]),
            "c": np.array([-self.x_b, self.y_b]),
            "f": np.array([self.x_f, self.y_f]),
            "e": np.array([-self.x_f, self.y_f]),
        }

    def leg_residuals(self) -> np.ndarray:
        """Given minus reconstructed squared lengths for legs bc, ef, ab, af."""
        v = self.vertices
        R = self.R
        return np.array([
            self.L_xp**2 - rnc_length_sq(v["c"], v["b"], R),
            self.L_xm**2 - rnc_length_sq(v["e"], v["f"], R),
            self.ds_p**2 - rnc_length_sq(v["a"], v["b"], R),
            self.ds_m**2 - rnc_length_sq(v["a"], v["f"], R),
        ])


def _half_cell(L_xo, L_x, ds, R):
    gap = (L_xo - L_x) ** 2 - 4 * ds * ds
    x = (48 * L_x - gap * R * L_x) / 96
    y2 = (-24 * gap - gap * (L_xo**2 + L_x * L_xo - L_x**2) * R) / 96
    return x, y2


def printed_y_sq(L_xo: float, L_x: float, ds: float, R: float) -> float:
    """y^2 from the published closed form, kept for comparison only.

    It carries 48 where the order-by-order solution has 24, and an O(R)
    factor of 4 L_xo^2 in place of L_xo^2, so at R = 0 with equal rungs it
    gives y^2 = 2 ds^2 instead of ds^2.
    """
    gap = (L_xo - L_x) ** 2 - 4 * ds * ds
    return (-48 * gap - gap * (4 * L_xo**2 + L_x * L_xo - L_x**2) * R) / 96


def solve_cell_perturbative(
    L_xo: float, L_xp: float, L_xm: float, ds_p: float, ds_m: float, R: float, tol: float = 1e-12
) -> CellGeometry:
    """Vertex coordinates of a ladder cell to first order in R.

    The leg equations are expanded as x = x0 + x1 R, y^2 = w0 + w1 R and
    solved order by order.
    """
    legs = (L_xo, L_xp, L_xm, ds_p, ds_m)
    if min(legs) <= 0:
        raise ValueError("leg lengths must be positive")
    if abs(R) * max(legs) ** 2 >= PERTURBATIVE_LIMIT:
        warnings.warn("cell is outside the perturbative regime |R| L^2 < 0.1", stacklevel=2)
    x_b, yb2 = _half_cell(L_xo, L_xp, ds_p, R)
    x_f, yf2 = _half_cell(L_xo, L_xm, ds_m, R)
    scale = max(legs) ** 2
    if yb2 < -tol * scale or yf2 < -tol * scale:
        raise ValueError("inconsistent cell: negative y^2")
    return CellGeometry(
        L_xo, L_xp, L_xm, ds_p, ds_m, R,
        x_b, math.sqrt(max(yb2, 0.0)), x_f, -math.sqrt(max(yf2, 0.0)),
    )


def tangent_continuity_residual(cell: CellGeometry) -> float:
    """x-component of v_p + v_m at vertex a, expanded to first order in R."""
    L, R = cell.L_xo, cell.R
    total = 0.0
    for Lx, ds in ((cell.L_xp, cell.ds_p), (cell.L_xm, cell.ds_m)):
        total += 0.5 * (Lx - L) / ds
        total -= (2 * L + Lx) * ((L - Lx) ** 2 - 4 * ds * ds) * R / (96 * ds)
    return total


def tangent_continuity_direct(cell: CellGeometry) -> float:
    """Same quantity from the solved coordinates and the tangent formula."""
    v = cell.vertices
    vp = rnc_tangent(v["a"], v["b"], cell.ds_p, cell.R)
    vm = rnc_tangent(v["a"], v["f"], cell.ds_m, cell.R)
    return float(vp[0] + vm[0])


def deviation_ode_residual(L, R, s, dL=None, d2L=None) -> tuple[np.ndarray, np.ndarray]:
    """Residuals of the rung ODE and of its geodesic-deviation limit.

    Returns ``(L'' + RL/2 - RL(L')^2/8, L'' + RL/2)``. Derivatives are taken
    by three-point stencils unless supplied; the end samples are NaN then.
    """
    L = np.asarray(L, dtype=float)
    R = np.broadcast_to(np.asarray(R, dtype=float), L.shape)
    s = np.asarray(s, dtype=float)
    if dL is None or d2L is None:
        h = np.diff(s)
        d1 = np.full(L.shape, np.nan)
        d2 = np.full(L.shape, np.nan)
        d1[1:-1] = interior_d1(L, h)
        d2[1:-1] = interior_d2(L, h)
        dL = d1 if dL is None else np.asarray(dL, dtype=float)
        d2L = d2 if d2L is None else np.asarray(d2L, dtype=float)
    else:
        dL = np.asarray(dL, dtype=float)
        d2L = np.asarray(d2L, dtype=float)
    geodesic = d2L + 0.5 * R * L
    full = geodesic - 0.125 * R * L * dL * dL
    return full, geodesic


def laplacian_identity_check(lattice: LadderLattice, f, exact, config: FlowConfig | None = None) -> float:
    """max_i |lattice Laplacian of f - exact| over the interior vertices."""
    config = config or FlowConfig(N=lattice.N)
    lap = lattice_laplacian(f, lattice, config)
    err = np.abs(lap - np.asarray(exact, dtype=float))
    return float(np.max(err[1:-1]))
