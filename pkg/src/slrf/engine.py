"""Smooth-lattice Ricci flow on the ladder lattice.

Two ways of obtaining the Ricci scalar are supported:

* ``slrf-v1`` recomputes R from the rungs through the geodesic deviation
  relation ``R = -(2/L_x) d^2 L_x / ds^2``;
* ``slrf-v2`` carries R as state and evolves it with
  ``dR/dt = R^2 + (1/L_x)(dL_x/ds)(dR/ds) + d^2R/ds^2``.

In both cases every leg shrinks at the rate ``-int R/2 ds`` along the leg.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .config import FlowConfig
from .lattice import (
    LadderLattice,
    LatticeError,
    extinction_time,
    fill_poles,
    init_lattice,
    interior_d1,
    interior_d2,
)


@dataclass
class StepDiagnostics:
    step_index: int
    t: float
    dt: float
    max_R: float
    min_L_y: float
    min_interior_L_x: float
    regrid_performed: bool


@dataclass
class FlowResult:
    snapshots: list
    diagnostics: list[StepDiagnostics]
    reason: str  # "stop_factor" | "max_steps" | "t_end" | "failure"
    message: str = ""
    dt_initial: float | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return self.reason == "failure"

    @property
    def final(self):
        return self.snapshots[-1]


# ---------------------------------------------------------------------------
# spatial operators (array level, used inside the integrators)

def _curvature(L_x: np.ndarray, L_y: np.ndarray, n_g: int, m_g: int) -> np.ndarray:
    N = L_y.size
    inner = L_x[1:-1]
    if not np.all(inner > 0):
        raise LatticeError("nonpositive interior rung in curvature stencil")
    R = np.empty(N + 1)
    R[1:-1] = -2.0 * interior_d2(L_x, L_y) / inner
    fill_poles(R, L_y, n_g, m_g)
    return R


def _laplacian(f: np.ndarray, L_x: np.ndarray, L_y: np.ndarray, n_g: int, m_g: int) -> np.ndarray:
    N = L_y.size
    inner = L_x[1:-1]
    if not np.all(inner > 0):
        raise LatticeError("nonpositive interior rung in Laplacian stencil")
    out = np.empty(N + 1)
    out[1:-1] = interior_d1(L_x, L_y) / inner * interior_d1(f, L_y) + interior_d2(f, L_y)
    fill_poles(out, L_y, n_g, m_g)
    return out


def _leg_rates(L_x: np.ndarray, L_y: np.ndarray, R: np.ndarray):
    dLx = -0.5 * R * L_x
    dLy = -0.25 * (R[:-1] + R[1:]) * L_y
    return dLx, dLy


# ---------------------------------------------------------------------------
# public operators

def curvature_from_legs(lattice: LadderLattice, config: FlowConfig) -> np.ndarray:
    """Ricci scalar per vertex from the rung profile.

    Vertices closer than ``n_g`` to a pole are filled by even interpolation
    in s**2 of the values at n_g..m_g.
    """
    return _curvature(lattice.L_x, lattice.L_y, config.n_g, config.m_g)


def lattice_laplacian(f, lattice: LadderLattice, config: FlowConfig) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.size != lattice.n_vertices:
        raise ValueError("f must have one value per vertex")
    return _laplacian(f, lattice.L_x, lattice.L_y, config.n_g, config.m_g)


def leg_rates(lattice: LadderLattice, R) -> tuple[np.ndarray, np.ndarray]:
    """Time derivatives of rungs and rail segments (trapezoidal rule on -R/2)."""
    R = np.asarray(R, dtype=float)
    if not np.all(np.isfinite(R)):
        raise LatticeError("non-finite curvature passed to leg_rates")
    return _leg_rates(lattice.L_x, lattice.L_y, R)


def select_timestep(lattice: LadderLattice, config: FlowConfig) -> float:
    if config.timestep_mode == "paper-literal":
        dt = config.C * float(np.max(lattice.L_y))
    else:
        dt = config.C * float(np.min(lattice.L_y)) ** 2
    if not dt > 0 or math.isnan(dt):
        raise LatticeError(f"invalid time step {dt}")
    return dt


def _check_stage(L_x, L_y, R=None) -> None:
    if not (np.all(np.isfinite(L_x)) and np.all(np.isfinite(L_y))):
        raise LatticeError("non-finite leg lengths")
    if np.any(L_y <= 0):
        raise LatticeError("rail segment collapsed to nonpositive length")
    if R is not None and not np.all(np.isfinite(R)):
        raise LatticeError("non-finite curvature")


def rk4_step_v1(lattice: LadderLattice, dt: float, config: FlowConfig) -> LadderLattice:
    if not dt > 0:
        raise ValueError("dt must be positive")
    n_g, m_g = config.n_g, config.m_g
    Lx0, Ly0 = lattice.L_x, lattice.L_y

    def rates(Lx, Ly):
        _check_stage(Lx, Ly)
        return _leg_rates(Lx, Ly, _curvature(Lx, Ly, n_g, m_g))

    k1x, k1y = rates(Lx0, Ly0)
    k2x, k2y = rates(Lx0 + 0.5 * dt * k1x, Ly0 + 0.5 * dt * k1y)
    k3x, k3y = rates(Lx0 + 0.5 * dt * k2x, Ly0 + 0.5 * dt * k2y)
    k4x, k4y = rates(Lx0 + dt * k3x, Ly0 + dt * k3y)
    Lx = Lx0 + dt / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
    Ly = Ly0 + dt / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y)
    Lx[0] = Lx[-1] = 0.0
    _check_stage(Lx, Ly)
    return LadderLattice(Lx, Ly, _curvature(Lx, Ly, n_g, m_g), lattice.t + dt)


def rk4_step_v2(lattice: LadderLattice, dt: float, config: FlowConfig) -> LadderLattice:
    if not dt > 0:
        raise ValueError("dt must be positive")
    n_g, m_g = config.n_g, config.m_g

    def rates(Lx, Ly, R):
        _check_stage(Lx, Ly, R)
        dLx, dLy = _leg_rates(Lx, Ly, R)
        dR = R * R + _laplacian(R, Lx, Ly, n_g, m_g)
        return dLx, dLy, dR

    def stage(base, k, h):
        Lx, Ly, R = (b + h * d for b, d in zip(base, k))
        # pole interpolation is applied to every stage state
        fill_poles(R, Ly, n_g, m_g)
        return Lx, Ly, R

    y0 = (lattice.L_x, lattice.L_y, lattice.R)
    k1 = rates(*y0)
    k2 = rates(*stage(y0, k1, 0.5 * dt))
    k3 = rates(*stage(y0, k2, 0.5 * dt))
    k4 = rates(*stage(y0, k3, dt))
    Lx, Ly, R = (
        y + dt / 6.0 * (a + 2 * b + 2 * c + d) for y, a, b, c, d in zip(y0, k1, k2, k3, k4)
    )
    Lx[0] = Lx[-1] = 0.0
    fill_poles(R, Ly, n_g, m_g)
    _check_stage(Lx, Ly, R)
    return LadderLattice(Lx, Ly, R, lattice.t + dt)


# ---------------------------------------------------------------------------
# regridding

def _quadratic_half(s_old, fields, targets):
    """Quadratic interpolation of ghost-padded fields at distances `targets`.

    ``s_old`` starts with one ghost vertex (at -s_1) followed by vertices
    0..N measured from the same pole. The stencil is centred on the old
    vertex nearest each target; ties go to the vertex farther from the pole.
    """
    pos = s_old[1:]
    hi = np.searchsorted(pos, targets, side="left")
    hi = np.clip(hi, 1, pos.size - 2)
    lo = hi - 1
    pick_hi = (pos[hi] - targets) <= (targets - pos[lo])
    c = np.where(pick_hi, hi, lo) + 1  # +1: ghost offset
    x0, x1, x2 = s_old[c - 1], s_old[c], s_old[c + 1]
    w0 = (targets - x1) * (targets - x2) / ((x0 - x1) * (x0 - x2))
    w1 = (targets - x0) * (targets - x2) / ((x1 - x0) * (x1 - x2))
    w2 = (targets - x0) * (targets - x1) / ((x2 - x0) * (x2 - x1))
    return [w0 * f[c - 1] + w1 * f[c] + w2 * f[c + 1] for f in fields]


def regrid(lattice: LadderLattice, config: FlowConfig) -> LadderLattice:
    """Resample onto uniformly spaced rail segments with the same total length."""
    N = lattice.N
    if N < 2:
        raise LatticeError("regrid needs at least 3 vertices")
    S = float(np.sum(lattice.L_y))
    half = N // 2
    new_Lx = np.empty(N + 1)
    new_R = np.empty(N + 1)
    targets = np.arange(half + 1) * (S / N)

    for Lx, Ly, R, out_x, out_R, count in (
        (lattice.L_x, lattice.L_y, lattice.R, new_Lx, new_R, half + 1),
        (lattice.L_x[::-1], lattice.L_y[::-1], lattice.R[::-1], new_Lx[::-1], new_R[::-1], N - half),
    ):
        s = np.concatenate([[-Ly[0], 0.0], np.cumsum(Ly)])
        fx = np.concatenate([[-Lx[1]], Lx])
        fR = np.concatenate([[R[1]], R])
        vx, vR = _quadratic_half(s, (fx, fR), targets[:count])
        out_x[:count] = vx
        out_R[:count] = vR

    new_Lx[0] = new_Lx[N] = 0.0
    new_Ly = np.full(N, S / N)
    fill_poles(new_R, new_Ly, config.n_g, config.m_g, upto=1)
    out = LadderLattice(new_Lx, new_Ly, new_R, lattice.t)
    out.check()
    return out


# ---------------------------------------------------------------------------
# run loop

def drive(
    state,
    config: FlowConfig,
    step: Callable,
    timestep: Callable,
    regridder: Callable | None,
    diagnose: Callable,
    errors: tuple = (LatticeError,),
) -> FlowResult:
    """Generic stepping loop shared by the lattice and finite-difference runs.

    Terminates when the stable time step falls below ``dt_initial /
    stop_factor`` ("stop_factor"), at ``max_steps`` or ``t_end``, or on a
    numerical failure ("failure"), which is reported rather than raised.
    """
    snapshots = [state]
    diagnostics: list[StepDiagnostics] = []
    snap_dt = config.snapshot_dt
    if snap_dt is None and config.snapshot_every is None:
        snap_dt = extinction_time(config.c3, config.c5) / 20
    next_k = 1
    dt0 = None
    n = 0
    reason, message = "", ""
    tiny = 1e-12

    while True:
        if config.max_steps is not None and n >= config.max_steps:
            reason = "max_steps"
            break
        if config.t_end is not None and state.t >= config.t_end - tiny:
            reason = "t_end"
            break
        try:
            dt = timestep(state)
        except errors as exc:
            reason, message = "failure", str(exc)
            break
        if dt0 is None:
            dt0 = dt
        elif dt < dt0 / config.stop_factor:
            reason = "stop_factor"
            break

        land = None
        if snap_dt is not None:
            target = next_k * snap_dt
            while target <= state.t + tiny:
                next_k += 1
                target = next_k * snap_dt
            if state.t + dt >= target - tiny:
                land = target
        if config.t_end is not None and state.t + dt >= config.t_end - tiny:
            land = config.t_end if land is None else min(land, config.t_end)
        step_dt = dt if land is None else land - state.t

        try:
            with np.errstate(over="raise", invalid="raise", divide="raise"):
                new = step(state, step_dt)
                if land is not None:
                    new.t = land
                n += 1
                did_regrid = False
                if regridder is not None and config.regrid_every and n % config.regrid_every == 0:
                    new = regridder(new)
                    did_regrid = True
        except (FloatingPointError,) + tuple(errors) as exc:
            reason, message = "failure", f"step {n + 1} at t={state.t:.6g}: {exc}"
            break
        state = new
        diagnostics.append(diagnose(state, n, step_dt, did_regrid))

        take = False
        if snap_dt is not None and land is not None and abs(land - next_k * snap_dt) <= tiny:
            take = True
            next_k += 1
        if config.snapshot_every and n % config.snapshot_every == 0:
            take = True
        if take:
            snapshots.append(state)

    if snapshots[-1] is not state:
        snapshots.append(state)
    return FlowResult(snapshots, diagnostics, reason, message, dt0)


def _lattice_diagnostics(lat: LadderLattice, n: int, dt: float, regridded: bool) -> StepDiagnostics:
    return StepDiagnostics(
        step_index=n,
        t=lat.t,
        dt=dt,
        max_R=float(np.max(lat.R)),
        min_L_y=float(np.min(lat.L_y)),
        min_interior_L_x=float(np.min(lat.L_x[1:-1])),
        regrid_performed=regridded,
    )


def run_flow(config: FlowConfig, lattice: LadderLattice | None = None) -> FlowResult:
    if config.method == "fd":
        raise ValueError("run_flow drives the lattice methods; use fd.run_fd for 'fd'")
    lat = init_lattice(config) if lattice is None else lattice
    stepper = rk4_step_v1 if config.method == "slrf-v1" else rk4_step_v2
    result = drive(
        lat,
        config,
        step=lambda s, dt: stepper(s, dt, config),
        timestep=lambda s: select_timestep(s, config),
        regridder=lambda s: regrid(s, config),
        diagnose=_lattice_diagnostics,
    )
    result.metadata["method"] = config.method
    return result
