"""Closed-form test geometries and discretisation-order studies."""
from __future__ import annotations

import math

import numpy as np

from .config import FlowConfig
from .embedding import GeneratingCurve, curve_distance, embed_lattice, embed_metric
from .engine import curvature_from_legs
from .fd import init_metric
from .lattice import LadderLattice, cumulative_arclength, init_lattice
from .rnc import laplacian_identity_check, solve_cell_perturbative, tangent_continuity_residual

DELTA_THETA = 2 * math.pi / 256


def sphere_lattice(N: int, radius: float = 1.0, delta_theta: float = DELTA_THETA) -> LadderLattice:
    """Round-sphere ladder: rungs r sin(s/r) dtheta, uniform rails, R = 2/r^2."""
    s = np.linspace(0.0, math.pi * radius, N + 1)
    L_x = radius * np.sin(s / radius) * delta_theta
    L_x[0] = L_x[-1] = 0.0
    L_y = np.full(N, math.pi * radius / N)
    R = np.full(N + 1, 2.0 / radius**2)
    return LadderLattice(L_x, L_y, R)


def semicircle(radius: float = 1.0, n: int = 2001) -> GeneratingCurve:
    phi = np.linspace(0.0, math.pi, n)
    return GeneratingCurve(-radius * np.cos(phi), radius * np.sin(phi), "exact", 0.0)


def ratio(coarse: float, fine: float) -> float:
    return coarse / fine if fine != 0 else math.inf


def curvature_error(N: int) -> float:
    """max |R - 2| of the leg-derived curvature on the unit-sphere lattice."""
    lat = sphere_lattice(N)
    return float(np.max(np.abs(curvature_from_legs(lat, FlowConfig(c3=0, c5=0, N=N)) - 2.0)))


def laplacian_error(N: int) -> float:
    """Lattice Laplacian of cos s against its exact value -2 cos s."""
    lat = sphere_lattice(N)
    s = cumulative_arclength(lat)
    return laplacian_identity_check(lat, np.cos(s), -2 * np.cos(s), FlowConfig(c3=0, c5=0, N=N))


def random_cells(rng: np.random.Generator, count: int = 100) -> list[tuple[float, ...]]:
    """Leg sets (L_xo, L_xp, L_xm, ds_p, ds_m) with a real flat-space solution."""
    cells = []
    while len(cells) < count:
        L = rng.uniform(0.5, 1.0)
        Lp, Lm = L * (1 + rng.uniform(-0.3, 0.3, size=2))
        dp, dm = rng.uniform(0.4, 1.0, size=2)
        if 4 * dp * dp - (L - Lp) ** 2 > 0.05 and 4 * dm * dm - (L - Lm) ** 2 > 0.05:
            cells.append((L, Lp, Lm, dp, dm))
    return cells


def cell_residual(legs: tuple[float, ...], R: float) -> float:
    """max |given - reconstructed| squared leg length for the perturbative cell."""
    cell = solve_cell_perturbative(*legs, R)
    return float(np.max(np.abs(cell.leg_residuals())))


def sphere_cell(s0: float, h: float, dphi: float) -> tuple[float, ...]:
    """Legs of a unit-sphere ladder cell centred at colatitude s0.

    Rungs are geodesic distances between meridians dphi apart; rails are
    meridian arcs of length h.
    """

    def rung(s):
        c = math.cos(s) ** 2 + math.sin(s) ** 2 * math.cos(dphi)
        return math.acos(min(1.0, c))

    return rung(s0), rung(s0 + h), rung(s0 - h), h, h


def tangent_residual_on_sphere(h: float, s0: float = 1.0) -> float:
    """Tangent-continuity residual for a unit-sphere cell with all legs ~ h."""
    cell = solve_cell_perturbative(*sphere_cell(s0, h, h), 2.0)
    return abs(tangent_continuity_residual(cell))


def embedding_pair_distance(c3: float, c5: float, N: int, n_fd: int) -> float:
    """t=0 distance between the lattice and metric embeddings of one geometry."""
    lat = init_lattice(FlowConfig(c3=c3, c5=c5, N=N))
    grid = init_metric(c3, c5, n_fd)
    return curve_distance(embed_lattice(lat), embed_metric(grid))


def convergence_report() -> list[str]:
    lines = []
    e1, e2 = curvature_error(100), curvature_error(200)
    lines.append(f"curvature_from_legs  max|R-2|  N=100 {e1:.3e}  N=200 {e2:.3e}  ratio {ratio(e1, e2):.3f}")
    l1, l2 = laplacian_error(100), laplacian_error(200)
    lines.append(f"lattice Laplacian    max err   N=100 {l1:.3e}  N=200 {l2:.3e}  ratio {ratio(l1, l2):.3f}")
    rng = np.random.default_rng(0)
    ratios = [ratio(cell_residual(c, 0.05), cell_residual(c, 0.025)) for c in random_cells(rng)]
    lines.append(f"cell leg residuals   R halving ratio min {min(ratios):.3f} max {max(ratios):.3f}")
    t1, t2 = tangent_residual_on_sphere(0.1), tangent_residual_on_sphere(0.05)
    lines.append(f"tangent continuity   h=0.1 {t1:.3e}  h=0.05 {t2:.3e}  order {math.log2(ratio(t1, t2)):.2f}")
    d1 = curve_distance(embed_lattice(sphere_lattice(200)), semicircle())
    lines.append(f"sphere embedding     N=200 distance to semicircle {d1:.3e}")
    return lines
