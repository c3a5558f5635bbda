"""Ladder lattice state, initial data, pole ghosts and nonuniform stencils.

Vertices run from 0 (north pole) to N (south pole). ``L_x[i]`` is the rung
through vertex i, ``L_y[i]`` the rail segment joining vertices i and i+1.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import FlowConfig


class LatticeError(ValueError):
    """Invalid or degenerate lattice data (NaN, nonpositive lengths, ...)."""


@dataclass
class LadderLattice:
    L_x: np.ndarray
    L_y: np.ndarray
    R: np.ndarray
    t: float = 0.0

    def __post_init__(self) -> None:
        self.L_x = np.asarray(self.L_x, dtype=float)
        self.L_y = np.asarray(self.L_y, dtype=float)
        self.R = np.asarray(self.R, dtype=float)
        n = self.L_y.size
        if self.L_x.size != n + 1 or self.R.size != n + 1:
            raise LatticeError("L_x and R need one entry per vertex, L_y one per segment")

    @property
    def N(self) -> int:
        return self.L_y.size

    @property
    def n_vertices(self) -> int:
        return self.L_y.size + 1

    def copy(self) -> "LadderLattice":
        return LadderLattice(self.L_x.copy(), self.L_y.copy(), self.R.copy(), self.t)

    def check(self) -> None:
        """Raise LatticeError unless the lattice invariants hold."""
        if not (np.all(np.isfinite(self.L_x)) and np.all(np.isfinite(self.L_y))
                and np.all(np.isfinite(self.R))):
            raise LatticeError(f"non-finite lattice data at t={self.t}")
        if np.any(self.L_y <= 0):
            raise LatticeError(f"nonpositive rail segment at t={self.t}")
        if np.any(self.L_x[1:-1] <= 0):
            raise LatticeError(f"nonpositive interior rung at t={self.t}")
        if self.L_x[0] != 0 or self.L_x[-1] != 0:
            raise LatticeError("pole rungs must be exactly zero")


@dataclass
class GhostView:
    """Lattice data extended ``depth`` vertices past each pole.

    Vertex arrays cover indices -depth..N+depth and segment arrays cover
    -depth..N+depth-1; use ``v(i)`` / ``seg(i)`` to map lattice indices to
    array positions.
    """

    L_x: np.ndarray
    L_y: np.ndarray
    R: np.ndarray
    depth: int
    N: int = field(default=0)

    def v(self, i: int) -> int:
        return i + self.depth

    def seg(self, i: int) -> int:
        return i + self.depth


# ---------------------------------------------------------------------------
# initial data

def profile(rho, c3: float, c5: float):
    """sqrt(m) for the two-parameter initial metric (h = 1), signed."""
    d = 1 + 3 * c3 + 5 * c5
    return (np.sin(rho) + c3 * np.sin(3 * rho) + c5 * np.sin(5 * rho)) / d


def profile_dd(rho, c3: float, c5: float):
    d = 1 + 3 * c3 + 5 * c5
    return -(np.sin(rho) + 9 * c3 * np.sin(3 * rho) + 25 * c5 * np.sin(5 * rho)) / d


def analytic_curvature(rho, c3: float, c5: float):
    """R = -2 (sqrt m)'' / sqrt m for the h = 1 initial metric (interior only)."""
    return -2 * profile_dd(rho, c3, c5) / profile(rho, c3, c5)


def initial_area(c3: float, c5: float) -> float:
    """Area of the initial surface, 2 pi * int_0^pi sqrt(m) d rho (closed form)."""
    d = 1 + 3 * c3 + 5 * c5
    return 2 * np.pi * (2 + 2 * c3 / 3 + 2 * c5 / 5) / d


def extinction_time(c3: float, c5: float) -> float:
    # dA/dt = -int R dA = -8 pi on any closed S^2 geometry.
    return initial_area(c3, c5) / (8 * np.pi)


def init_lattice(config: FlowConfig) -> LadderLattice:
    N = config.N
    half = N // 2
    rho = np.arange(half + 1) * np.pi / N
    g = profile(rho, config.c3, config.c5)
    if np.any(g[1:] <= 0):
        raise LatticeError("initial data has m <= 0 at an interior vertex")

    L_x = np.empty(N + 1)
    L_x[: half + 1] = g * config.delta_theta
    L_x[0] = 0.0
    L_x[half:] = L_x[half::-1]

    L_y = np.full(N, np.pi / N)

    R = np.empty(N + 1)
    R[1 : half + 1] = analytic_curvature(rho[1:], config.c3, config.c5)
    R[half:] = R[half::-1]
    lat = LadderLattice(L_x, L_y, R, 0.0)
    fill_poles(lat.R, lat.L_y, config.n_g, config.m_g, upto=1)
    if config.r_seed == "legs":
        from .engine import curvature_from_legs

        lat.R = curvature_from_legs(lat, config)
    lat.check()
    return lat


# ---------------------------------------------------------------------------
# ghosts and arclength

def extend_over_poles(lattice: LadderLattice, m_g: int) -> GhostView:
    N = lattice.N
    if not 0 < m_g < N / 2:
        raise LatticeError("ghost depth must satisfy 0 < m_g < N/2")
    j = np.arange(m_g, 0, -1)  # m_g .. 1

    Lx = lattice.L_x
    north_x = -Lx[j]
    south_x = -Lx[N - j[::-1]]
    L_x = np.concatenate([north_x, Lx, south_x])

    R = lattice.R
    R_ext = np.concatenate([R[j], R, R[N - j[::-1]]])

    Ly = lattice.L_y
    # segment -j copies segment j-1; segment N-1+j copies segment N-j
    north_y = Ly[j - 1]
    south_y = Ly[N - j[::-1]]
    L_y = np.concatenate([north_y, Ly, south_y])
    return GhostView(L_x, L_y, R_ext, m_g, N)


def cumulative_arclength(obj) -> np.ndarray:
    """Arclength of each vertex from the north pole (negative past it for ghosts)."""
    L_y = obj.L_y
    s = np.concatenate([[0.0], np.cumsum(L_y)])
    if isinstance(obj, GhostView):
        s -= s[obj.depth]
    return s


def pole_distances(L_y: np.ndarray, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Arclength of the first `count` vertices from the north and south poles."""
    north = np.concatenate([[0.0], np.cumsum(L_y[: count - 1])])
    south = np.concatenate([[0.0], np.cumsum(L_y[::-1][: count - 1])])
    return north, south


# ---------------------------------------------------------------------------
# nonuniform three-point stencils

def stencil_d1(fm, f0, fp, hm, hp):
    return (hm * hm * fp + (hp * hp - hm * hm) * f0 - hp * hp * fm) / (hp * hm * (hp + hm))


def stencil_d2(fm, f0, fp, hm, hp):
    return 2 * (hm * fp - (hp + hm) * f0 + hp * fm) / (hp * hm * (hp + hm))


def _neighbors(s, i):
    if i - 1 < 0 or i + 1 >= len(s):
        raise IndexError(f"index {i} has no neighbour on both sides")
    return s[i] - s[i - 1], s[i + 1] - s[i]


def d_ds(f, s, i: int) -> float:
    hm, hp = _neighbors(s, i)
    return float(stencil_d1(f[i - 1], f[i], f[i + 1], hm, hp))


def d2_ds2(f, s, i: int) -> float:
    hm, hp = _neighbors(s, i)
    return float(stencil_d2(f[i - 1], f[i], f[i + 1], hm, hp))


def interior_d1(f: np.ndarray, spacing: np.ndarray) -> np.ndarray:
    """First derivative at every interior vertex from segment lengths."""
    return stencil_d1(f[:-2], f[1:-1], f[2:], spacing[:-1], spacing[1:])


def interior_d2(f: np.ndarray, spacing: np.ndarray) -> np.ndarray:
    return stencil_d2(f[:-2], f[1:-1], f[2:], spacing[:-1], spacing[1:])


# ---------------------------------------------------------------------------
# even interpolation about a pole

def even_interpolate(s_samples, f_samples, targets) -> np.ndarray:
    """Evaluate the polynomial in s**2 through (s_k, f_k) at `targets`.

    The interpolant has degree len(samples)-1 in s**2, so the result is an
    even function of s.
    """
    u = np.asarray(s_samples, dtype=float) ** 2
    f = np.asarray(f_samples, dtype=float)
    ut = np.asarray(targets, dtype=float) ** 2
    if u.size != f.size or u.size == 0:
        raise ValueError("need matching, nonempty sample arrays")
    diffs = u[:, None] - u[None, :]
    np.fill_diagonal(diffs, 1.0)
    if np.any(diffs == 0):
        raise ValueError("coincident interpolation abscissae")
    out = np.zeros_like(ut)
    for k in range(u.size):
        w = np.ones_like(ut)
        for j in range(u.size):
            if j != k:
                w = w * (ut - u[j]) / (u[k] - u[j])
        out = out + f[k] * w
    return out


def _even_weights(s_samples, s_targets):
    # Lagrange weights in u = s**2; plain floats, the stencils are tiny.
    u = [x * x for x in s_samples]
    rows = []
    for st in s_targets:
        ut = st * st
        row = []
        for k, uk in enumerate(u):
            w = 1.0
            for j, uj in enumerate(u):
                if j != k:
                    w *= (ut - uj) / (uk - uj)
            row.append(w)
        rows.append(row)
    return rows


def fill_poles(values: np.ndarray, L_y: np.ndarray, n_g: int, m_g: int,
               upto: int | None = None) -> None:
    """Overwrite the near-pole entries of a vertex field in place.

    Indices ``0..upto-1`` counted from each pole (default ``upto = n_g``) are
    replaced by even interpolation of the samples n_g..m_g.
    """
    count = n_g if upto is None else upto
    N = L_y.size
    for pole in (0, 1):
        seg = L_y[:m_g].tolist() if pole == 0 else L_y[N - m_g :][::-1].tolist()
        s = [0.0]
        for d in seg:
            s.append(s[-1] + d)
        if pole == 0:
            samples = values[n_g : m_g + 1].tolist()
        else:
            samples = values[N - m_g : N - n_g + 1][::-1].tolist()
        for j, row in enumerate(_even_weights(s[n_g:], s[:count])):
            v = sum(w * f for w, f in zip(row, samples))
            values[j if pole == 0 else N - j] = v
