"""Generating curves of the isometric embedding in E^3.

Rotating a generating curve (x_i, y_i), y >= 0, about the x-axis reproduces
the axisymmetric surface. Curves are centred so the equator vertex sits at
x = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fd import MetricGrid
from .lattice import LadderLattice


class EmbeddingFailed(ValueError):
    pass


@dataclass
class GeneratingCurve:
    x: np.ndarray
    y: np.ndarray
    source: str
    t: float
    x_shift: float = 0.0  # x of the equator vertex before centring
    alpha: float | None = None

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])


def _equator_x(x: np.ndarray) -> float:
    n = x.size
    if n % 2:
        return float(x[n // 2])
    return 0.5 * float(x[n // 2 - 1] + x[n // 2])


def embed_metric(grid: MetricGrid, tol: float | None = None, source: str = "fd") -> GeneratingCurve:
    """x' = sqrt(h - (sqrt m)'^2), y = sqrt(m), integrated by the trapezoidal rule.

    The radicand is a difference of O(1) terms each carrying O(drho^2)
    truncation error, so the default tolerance on negative radicands is
    ``1e-9 + 10 drho^2`` relative to h.
    """
    d = grid.delta_rho
    if tol is None:
        tol = 1e-9 + 10 * d * d
    y = np.sqrt(np.maximum(grid.m, 0.0))
    # sqrt(m) is odd about each pole, so central differences need no
    # one-sided stencil; at the poles themselves y' = sqrt(h) and q = 0.
    ext = np.concatenate([[-y[1]], y, [-y[-2]]])
    dy = (ext[2:] - ext[:-2]) / (2 * d)
    q = grid.h - dy * dy
    q[0] = q[-1] = 0.0
    bad = q < -tol * grid.h
    if np.any(bad):
        i = int(np.argmax(bad))
        raise EmbeddingFailed(f"radicand {q[i]:.3e} < 0 at rho index {i} (t={grid.t})")
    speed = np.sqrt(np.maximum(q, 0.0))
    x = np.concatenate([[0.0], np.cumsum(0.5 * (speed[1:] + speed[:-1]) * d)])
    shift = _equator_x(x)
    return GeneratingCurve(x - shift, y, source, grid.t, shift)


def embed_lattice(
    lattice: LadderLattice,
    delta_theta: float | None = None,
    tol: float = 1e-9,
    source: str = "slrf",
) -> GeneratingCurve:
    """Chain the ladder vertices into the xy-plane.

    The opening angle alpha between the two rails comes from the first rung,
    ``L_x1^2 = 2 L_y0^2 (1 - cos alpha)``, unless `delta_theta` is given.
    Each rung is then the chord ``2 y sin(alpha/2)`` of a rotation about the
    x-axis, and successive vertices are ``L_y`` apart.
    """
    Lx, Ly = lattice.L_x, lattice.L_y
    N = lattice.N
    if np.any(Lx[1:-1] <= 0):
        raise EmbeddingFailed("nonpositive interior rung")
    if delta_theta is None:
        ratio = Lx[1] / (2 * Ly[0])
        if not 0 < ratio <= 1:
            raise EmbeddingFailed("first rung longer than twice the first rail segment")
        alpha = 2 * math.asin(ratio)
    else:
        alpha = float(delta_theta)
    chord = 2 * math.sin(alpha / 2)
    y = Lx / chord
    y[0] = y[-1] = 0.0
    rad = Ly**2 - np.diff(y) ** 2
    bad = rad < -tol * Ly**2
    if np.any(bad):
        i = int(np.argmax(bad))
        raise EmbeddingFailed(
            f"rail segment {i} shorter than the radius change it spans (t={lattice.t})"
        )
    x = np.concatenate([[0.0], np.cumsum(np.sqrt(np.maximum(rad, 0.0)))])
    shift = float(x[N // 2]) if N % 2 == 0 else _equator_x(x)
    return GeneratingCurve(x - shift, y, source, lattice.t, shift, alpha)


def rotation_system_residual(curve: GeneratingCurve, lattice: LadderLattice) -> np.ndarray:
    """Rung residuals of the in-plane rotation variant of the vertex chaining.

    Rotating each vertex about the origin of the xy-plane by alpha (rather
    than about the x-axis) gives rung lengths that differ from L_x away from
    x = 0. Returns ``L_x^2 - |p'_i - p_i|^2`` per vertex for the chained curve.
    """
    if curve.alpha is None:
        raise ValueError("curve carries no opening angle")
    a = curve.alpha
    x = curve.x + curve.x_shift
    y = curve.y
    xr = x * math.cos(a) + y * math.sin(a)
    yr = -x * math.sin(a) + y * math.cos(a)
    return lattice.L_x**2 - ((xr - x) ** 2 + (yr - y) ** 2)


def _resample(curve: GeneratingCurve, n: int) -> np.ndarray:
    p = curve.points
    seg = np.hypot(np.diff(p[:, 0]), np.diff(p[:, 1]))
    s = np.concatenate([[0.0], np.cumsum(seg)])
    u = s / s[-1]
    target = np.linspace(0.0, 1.0, n)
    return np.column_stack([np.interp(target, u, p[:, 0]), np.interp(target, u, p[:, 1])])


def curve_distance(a: GeneratingCurve, b: GeneratingCurve, n: int = 512) -> float:
    """Max pointwise distance after resampling both curves by normalised arclength."""
    pa, pb = _resample(a, n), _resample(b, n)
    return float(np.max(np.hypot(pa[:, 0] - pb[:, 0], pa[:, 1] - pb[:, 1])))
