import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from slrf.config import FlowConfig, build_config
from slrf.engine import (
    curvature_from_legs,
    lattice_laplacian,
    leg_rates,
    regrid,
    rk4_step_v1,
    rk4_step_v2,
    run_flow,
    select_timestep,
)
from slrf.lattice import LadderLattice, LatticeError, cumulative_arclength, init_lattice
from slrf.oracles import curvature_error, sphere_lattice

SPHERE = FlowConfig(c3=0, c5=0, N=100)


# --- curvature and Laplacian ---------------------------------------------------

def test_sphere_curvature_error_and_order():
    e100, e200 = curvature_error(100), curvature_error(200)
    assert e100 <= 1e-2
    assert e100 / e200 == pytest.approx(4, rel=0.05)


def test_linear_rungs_have_zero_curvature():
    N = 40
    lat = sphere_lattice(N)
    s = cumulative_arclength(lat)
    lat.L_x = 0.01 * np.minimum(s, s[-1] - s)  # a double cone
    lat.L_x[0] = lat.L_x[-1] = 0.0
    R = curvature_from_legs(lat, FlowConfig(c3=0, c5=0, N=N))
    np.testing.assert_allclose(R[:N // 2], 0.0, atol=1e-10)
    assert R[N // 2] > 0  # the equatorial kink carries the curvature


@given(st.floats(0.01, 100.0), st.sampled_from([(0.766, -0.091), (0.021, 0.598), (0.3, 0.1)]))
def test_curvature_is_invariant_under_rung_scaling(lam, c):
    cfg = FlowConfig(c3=c[0], c5=c[1], N=60)
    lat = init_lattice(cfg)
    scaled = lat.copy()
    scaled.L_x = lat.L_x * lam
    np.testing.assert_allclose(curvature_from_legs(scaled, cfg), curvature_from_legs(lat, cfg),
                               rtol=1e-12, atol=1e-10)


def test_curvature_scale_ten_identical():
    lat = init_lattice(build_config("single-dumbbell"))
    scaled = lat.copy()
    scaled.L_x = lat.L_x * 10
    cfg = build_config("single-dumbbell")
    np.testing.assert_allclose(curvature_from_legs(scaled, cfg), curvature_from_legs(lat, cfg), rtol=1e-13,
                               atol=1e-12)


def test_curvature_rejects_collapsed_rung():
    lat = sphere_lattice(20)
    lat.L_x[5] = 0.0
    with pytest.raises(LatticeError):
        curvature_from_legs(lat, FlowConfig(c3=0, c5=0, N=20))


def test_laplacian_of_constants_vanishes():
    lat = init_lattice(build_config("double-dumbbell"))
    np.testing.assert_allclose(lattice_laplacian(np.full(101, 3.7), lat, SPHERE), 0.0, atol=1e-12)
    sphere = sphere_lattice(100)
    lap = lattice_laplacian(sphere.R, sphere, SPHERE)
    np.testing.assert_allclose(sphere.R**2 + lap, 4.0, atol=1e-12)


def test_laplacian_of_cos_s():
    lat = sphere_lattice(100)
    s = cumulative_arclength(lat)
    lap = lattice_laplacian(np.cos(s), lat, SPHERE)
    assert np.max(np.abs(lap + 2 * np.cos(s))) < 1e-3


# --- rates and time step ------------------------------------------------------

def test_leg_rates_examples():
    lat = sphere_lattice(100)
    dLx, dLy = leg_rates(lat, lat.R)
    np.testing.assert_allclose(dLx, -lat.L_x, atol=1e-15)
    np.testing.assert_allclose(dLy, -lat.L_y, atol=1e-15)
    dLx, dLy = leg_rates(lat, np.zeros(101))
    assert not dLx.any() and not dLy.any()
    small = LadderLattice([0, 1, 0], [0.1, 0.2], [2, 4, 0])
    assert leg_rates(small, small.R)[1][0] == pytest.approx(-0.15)
    with pytest.raises(LatticeError):
        leg_rates(small, [0, np.nan, 0])


def test_select_timestep_modes():
    lat = sphere_lattice(100)
    lit = SPHERE.with_(timestep_mode="paper-literal")
    assert select_timestep(lat, lit) == pytest.approx(0.1 * math.pi / 100)
    assert select_timestep(lat, SPHERE) == pytest.approx(9.8696e-5, rel=1e-4)
    half = lat.copy()
    half.L_y[7] /= 2
    assert select_timestep(half, SPHERE) == pytest.approx(select_timestep(lat, SPHERE) / 4)


# --- single steps ---------------------------------------------------------------

def test_v2_sphere_step_is_exact_to_rk4_order():
    lat = sphere_lattice(100)
    dt = 1e-4
    new = rk4_step_v2(lat, dt, SPHERE)
    np.testing.assert_allclose(new.L_y / lat.L_y, math.sqrt(1 - 2 * dt), rtol=1e-12)
    np.testing.assert_allclose(new.R, 2 / (1 - 2 * dt), rtol=1e-12)
    assert new.t == dt


def test_v1_sphere_step_tracks_the_shrinking_law():
    # R comes from the leg stencil, so the rate error is that of the
    # discrete curvature (max|R - 2| ~ 1.6e-4 at N=100) times dt / 2.
    lat = sphere_lattice(100)
    dt = 1e-4
    new = rk4_step_v1(lat, dt, SPHERE)
    bound = curvature_error(100) * dt / 2 * 1.01
    assert np.max(np.abs(new.L_y / lat.L_y - math.sqrt(1 - 2 * dt))) <= bound
    assert new.L_x[0] == 0 and new.L_x[-1] == 0


def test_flat_state_frozen_under_v2():
    lat = sphere_lattice(20)
    lat.R[:] = 0
    new = rk4_step_v2(lat, 1e-3, FlowConfig(c3=0, c5=0, N=20))
    np.testing.assert_array_equal(new.L_x, lat.L_x)
    np.testing.assert_array_equal(new.L_y, lat.L_y)
    np.testing.assert_array_equal(new.R, 0.0)


@pytest.mark.parametrize("step", [rk4_step_v1, rk4_step_v2])
def test_steps_reject_nonpositive_dt(step):
    with pytest.raises(ValueError):
        step(sphere_lattice(20), 0.0, FlowConfig(c3=0, c5=0, N=20))


@pytest.mark.parametrize("method", ["slrf-v1", "slrf-v2"])
@pytest.mark.parametrize("preset", ["single-dumbbell", "double-dumbbell"])
def test_symmetry_preserved_for_100_steps(method, preset):
    cfg = build_config(preset, method=method, max_steps=100, regrid_every=10)
    lat = run_flow(cfg).final
    scale = np.max(lat.L_x)
    assert np.max(np.abs(lat.L_x - lat.L_x[::-1])) <= 1e-10 * scale
    assert np.max(np.abs(lat.L_y - lat.L_y[::-1])) <= 1e-10 * np.max(lat.L_y)


# --- regridding -----------------------------------------------------------------

def test_regrid_identity_on_uniform_quadratic_data():
    N = 40
    S = 3.0
    s = np.linspace(0, S, N + 1)
    lat = LadderLattice(0.05 * s * (S - s), np.full(N, S / N), np.full(N + 1, 1.3), t=0.7)
    out = regrid(lat, FlowConfig(c3=0, c5=0, N=N))
    np.testing.assert_allclose(out.L_x, lat.L_x, atol=1e-12)
    np.testing.assert_allclose(out.R, lat.R, atol=1e-12)
    np.testing.assert_allclose(out.L_y, lat.L_y, atol=1e-12)
    assert out.t == 0.7


def _perturbed_sphere(N, seed=0):
    rng = np.random.default_rng(seed)
    half = N // 2
    w = 1 + 0.3 * rng.uniform(-1, 1, half)
    seg = np.r_[w, w[::-1]]
    seg *= np.pi / seg.sum()
    s = np.r_[0, np.cumsum(seg)]
    dth = 2 * np.pi / 256
    L_x = np.sin(s) * dth
    L_x[0] = L_x[-1] = 0
    return LadderLattice(L_x, seg, np.full(N + 1, 2.0))


def test_regrid_sphere_interpolation_error_is_third_order():
    errs = []
    for N in (50, 100, 200):
        out = regrid(_perturbed_sphere(N), FlowConfig(c3=0, c5=0, N=N))
        s = cumulative_arclength(out)
        assert abs(out.L_y.sum() - np.pi) <= 1e-12 * np.pi
        errs.append(np.max(np.abs(out.L_x - np.sin(s) * 2 * np.pi / 256)) / (2 * np.pi / 256))
    assert errs[0] <= 5 / 50**3
    # random spacing makes the exact ratio noisy; the trend must be ~cubic
    assert errs[0] / errs[2] >= 30


@given(st.integers(0, 10_000))
def test_regrid_preserves_total_length_and_symmetry(seed):
    lat = _perturbed_sphere(30, seed)
    out = regrid(lat, FlowConfig(c3=0, c5=0, N=30))
    assert abs(out.L_y.sum() - lat.L_y.sum()) <= 1e-12 * lat.L_y.sum()
    np.testing.assert_allclose(out.L_x, out.L_x[::-1], rtol=0, atol=1e-15)


# --- run loop -------------------------------------------------------------------

def test_max_steps_zero_returns_initial_snapshot():
    res = run_flow(SPHERE.with_(max_steps=0))
    assert len(res.snapshots) == 1 and res.reason == "max_steps"
    assert res.diagnostics == []


def test_run_flow_refuses_fd():
    with pytest.raises(ValueError):
        run_flow(SPHERE.with_(method="fd", N=101))


def test_snapshots_land_on_requested_times():
    res = run_flow(SPHERE.with_(snapshot_dt=0.01, t_end=0.05))
    times = [s.t for s in res.snapshots]
    assert times == pytest.approx([0, 0.01, 0.02, 0.03, 0.04, 0.05], abs=1e-15)
    assert res.reason == "t_end"
    assert all(d.dt > 0 for d in res.diagnostics)


def test_regrid_neutral_on_uniform_sphere_flow():
    base = run_flow(SPHERE.with_(max_steps=100, regrid_every=0)).final
    extra = run_flow(SPHERE.with_(max_steps=100, regrid_every=7)).final
    assert abs(extra.L_y.sum() / base.L_y.sum() - 1) <= 1e-8


def test_collapse_reports_failure_instead_of_raising():
    lat = sphere_lattice(20)
    lat.L_x[3] = -1e-3  # invalid rung, the first stencil must refuse it
    res = run_flow(FlowConfig(c3=0, c5=0, N=20), lattice=lat)
    assert res.failed and res.message


@pytest.fixture(scope="module")
def sphere_pair(cached_run):
    return {m: cached_run(build_config("sphere", method=m, N=100)) for m in ("slrf-v1", "slrf-v2")}


def test_sphere_runs_stop_on_time_step_reduction(sphere_pair):
    for res in sphere_pair.values():
        assert res.reason == "stop_factor"
        assert 0 < 1 - 2 * res.final.t < 0.02


def test_sphere_methods_agree_on_rail_length(sphere_pair):
    def lengths(res):
        return {round(s.t, 12): s.L_y.sum() for s in res.snapshots if s.t <= 0.4 + 1e-12}

    a, b = lengths(sphere_pair["slrf-v1"]), lengths(sphere_pair["slrf-v2"])
    assert len(a) >= 17
    assert max(abs(a[t] / b[t] - 1) for t in a) <= 1e-3


def test_sphere_rail_length_strictly_decreasing(sphere_pair):
    for res in sphere_pair.values():
        S = [s.L_y.sum() for s in res.snapshots]
        assert all(b < a for a, b in zip(S, S[1:]))


def test_v2_curvature_consistent_with_legs(cached_run):
    errs = []
    for N in (100, 200):
        cfg = build_config("sphere", method="slrf-v2", N=N, t_end=0.25)
        lat = next(s for s in cached_run(cfg).snapshots if abs(s.t - 0.25) < 1e-12)
        errs.append(np.max(np.abs(lat.R - curvature_from_legs(lat, cfg))))
    assert errs[0] / errs[1] == pytest.approx(4, rel=0.2)


def test_single_dumbbell_runs_to_positive_curvature(cached_run):
    res = cached_run(build_config("single-dumbbell", method="slrf-v1"))
    assert res.reason == "stop_factor"
    assert np.all(res.final.R > 0)
    assert all(np.all(np.isfinite(s.L_x)) for s in res.snapshots)
