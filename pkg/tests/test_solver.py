import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import perturbed_state
from nsacvdw import FarField, Grid1D, State, VdwParams
from nsacvdw.eos import Region, classify_state, spinodal
from nsacvdw.errors import (
    AdmissibilityError,
    BoundViolation,
    CflViolation,
    ConfigError,
    NoConvergence,
    NonpositiveTemperature,
    ProfileError,
    SingularSystem,
    VolumeCutoff,
)
from nsacvdw.solver import (
    SERIES_COLUMNS,
    SimConfig,
    chemical_potential,
    init_state,
    picard_step,
    run,
    solve_tridiagonal,
    step_imex,
)
from nsacvdw.solver.mms import DEFAULT_FAR, ManufacturedProblem, convergence_ladder, observed_orders
from nsacvdw.solver.operators import central, divergence, face_grad, face_mean
from nsacvdw.solver.stepping import max_stable_dt, sound_speed


def constant(grid, far, chi=1.0):
    n = grid.n
    return State(grid, 0.0, np.full(n, far.v_bar), np.zeros(n), np.full(n, far.theta_bar),
                 np.full(n, chi))


# -- tridiagonal kernel ----------------------------------------------------


def test_identity_system():
    r = np.array([1.0, -2.0, 3.5])
    assert np.array_equal(solve_tridiagonal(np.zeros(2), np.ones(3), np.zeros(2), r), r)


def test_small_system_against_elimination():
    x = solve_tridiagonal([1.0, 1.0], [2.0, 2.0, 2.0], [1.0, 1.0], [1.0, 0.0, 0.0])
    assert x == pytest.approx([0.75, -0.5, 0.25], abs=1e-15)


def test_random_dominant_systems():
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 40))
        lo, up = rng.normal(size=n - 1), rng.normal(size=n - 1)
        d = np.abs(np.r_[0, lo]) + np.abs(np.r_[up, 0]) + rng.uniform(0.1, 2, n)
        d *= rng.choice([-1, 1], n)
        rhs = rng.normal(size=n)
        x = solve_tridiagonal(lo, d, up, rhs)
        dense = np.diag(d) + np.diag(lo, -1) + np.diag(up, 1)
        oracle = np.linalg.solve(dense, rhs)
        worst = max(worst, np.linalg.norm(x - oracle) / np.linalg.norm(oracle))
    assert worst < 1e-12


def test_non_dominant_system_rejected():
    with pytest.raises(SingularSystem):
        solve_tridiagonal([3.0], [1.0, 1.0], [0.0], [1.0, 1.0])
    with pytest.raises(SingularSystem):
        # weakly dominant everywhere with no strict row: singular
        solve_tridiagonal([-1.0, -1.0], [1.0, 2.0, 1.0], [-1.0, -1.0], [0.0, 0.0, 0.0])


def test_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        solve_tridiagonal([1.0], [2.0, 2.0, 2.0], [1.0, 1.0], [1.0, 0.0, 0.0])


# -- stencils and chemical potential ---------------------------------------


@pytest.mark.parametrize("value", [1.0, -1.0, 0.0])
def test_mu_vanishes_on_pure_phases(reduced, value):
    grid = Grid1D(0, 1, 33)
    s = constant(grid, FarField(3.0, 1.2), chi=value)
    assert np.all(chemical_potential(reduced, s) == 0.0)


def test_mu_constant_half():
    p = VdwParams(epsilon=1.0)
    grid = Grid1D(0, 1, 33)
    mu = chemical_potential(p, constant(grid, FarField(3.0, 1.2), chi=0.5))
    assert mu[1:-1] == pytest.approx(np.full(31, -0.375))
    assert mu[0] == mu[-1] == 0.0


def test_mu_second_order_on_tanh():
    p = VdwParams(epsilon=0.7)
    errs = []
    for n in (101, 201, 401):
        grid = Grid1D(-3, 3, n)
        x = grid.x
        s = State(grid, 0.0, np.ones(n), np.zeros(n), np.ones(n), np.tanh(x))
        exact = (np.tanh(x) ** 3 - np.tanh(x)) / 0.7 + 0.7 * 2 * np.tanh(x) / np.cosh(x) ** 2
        errs.append(np.max(np.abs(chemical_potential(p, s) - exact)[1:-1]))
    assert observed_orders(errs) == pytest.approx([2, 2], abs=0.1)


def test_mu_rejects_cutoff(reduced):
    grid = Grid1D(0, 1, 33)
    s = constant(grid, FarField(3.0, 1.2))
    s.v[4] = reduced.b
    with pytest.raises(BoundViolation):
        chemical_potential(reduced, s)


def test_stencils_on_quadratic():
    grid = Grid1D(0, 1, 21)
    f = grid.x**2
    assert face_mean(f).shape == face_grad(f, grid.dx).shape == (20,)
    assert central(f, grid.dx)[1:-1] == pytest.approx(2 * grid.x[1:-1])
    assert divergence(face_grad(f, grid.dx), grid.dx)[1:-1] == pytest.approx(np.full(19, 2.0))


# -- configuration ---------------------------------------------------------


@pytest.mark.parametrize("kwargs", [dict(dt=0), dict(t_end=-1), dict(cfl=1.0), dict(mode="X"),
                                    dict(stepper="rk4"), dict(output_every=0)])
def test_sim_config_validation(kwargs):
    base = dict(dt=0.1, t_end=1.0)
    base.update(kwargs)
    with pytest.raises(ValueError):
        SimConfig(**base)


def test_step_count():
    assert SimConfig(dt=0.1, t_end=1.0).n_steps == 10
    assert SimConfig(dt=0.3, t_end=1.0).n_steps == 4


# -- steppers --------------------------------------------------------------


@pytest.mark.parametrize("stepper", ["imex", "picard"])
@pytest.mark.parametrize("mode", ["NSAC", "NS"])
def test_constant_state_is_fixed(stepper, mode, smooth_params, smooth_far):
    grid = Grid1D(-5, 5, 65)
    s0 = constant(grid, smooth_far)
    cfg = SimConfig(dt=0.05, t_end=5.0, mode=mode, stepper=stepper)
    result = run(smooth_params, smooth_far, s0, cfg)
    final = result.snapshots[-1]
    assert result.series.size == 100
    for a, b in zip(final.fields(), s0.fields()):
        assert np.max(np.abs(a - b)) < 1e-13


def test_picard_constant_state_one_iteration(smooth_params, smooth_far):
    grid = Grid1D(-5, 5, 65)
    _, rep = picard_step(smooth_params, smooth_far, constant(grid, smooth_far),
                         SimConfig(dt=0.05, t_end=1.0, stepper="picard"))
    assert rep.iterations == 1 and rep.diffs == [0.0] and rep.converged


def test_picard_first_iterate_equals_imex(smooth_params, smooth_far, small_grid):
    s = perturbed_state(small_grid, smooth_far)
    cfg1 = SimConfig(dt=small_grid.dx, t_end=1.0, stepper="picard", picard_max_iter=1,
                     picard_tol=1e30, cfl=0.9)
    first, _ = picard_step(smooth_params, smooth_far, s, cfg1)
    imex = step_imex(smooth_params, smooth_far, s, SimConfig(dt=small_grid.dx, t_end=1.0, cfl=0.9))
    for a, b in zip(first.fields(), imex.fields()):
        assert np.max(np.abs(a - b)) <= 1e-12


def test_picard_contracts(smooth_params, smooth_far, small_grid):
    s = perturbed_state(small_grid, smooth_far)
    cfg = SimConfig(dt=small_grid.dx, t_end=1.0, stepper="picard", cfl=0.9)
    _, rep = picard_step(smooth_params, smooth_far, s, cfg)
    assert rep.converged and rep.diffs[-1] < 1e-10
    assert all(r < 1 for r in rep.contraction)
    assert rep.m1_obs > 0 and rep.m2_obs > smooth_params.v_min and rep.m_big_obs > 0


def test_picard_no_convergence(smooth_params, smooth_far, small_grid):
    s = perturbed_state(small_grid, smooth_far)
    cfg = SimConfig(dt=small_grid.dx, t_end=1.0, stepper="picard", picard_max_iter=2, cfl=0.9)
    with pytest.raises(NoConvergence):
        picard_step(smooth_params, smooth_far, s, cfg)


def test_mass_identity_each_step(smooth_params, smooth_far, small_grid):
    s = perturbed_state(small_grid, smooth_far)
    cfg = SimConfig(dt=0.02, t_end=1.0)
    w = small_grid.weights
    for _ in range(20):
        new = step_imex(smooth_params, smooth_far, s, cfg)
        u = new.u
        flux = 0.5 * (u[-1] + u[-2]) - 0.5 * (u[0] + u[1])
        assert abs(np.dot(w, new.v - s.v) - cfg.dt * flux) < 1e-14
        s = new


def test_boundaries_pinned(smooth_params, smooth_far, small_grid):
    s0 = perturbed_state(small_grid, smooth_far)
    s0.chi = np.tanh(small_grid.x / 0.5)
    s0.chi[0], s0.chi[-1] = -1.0, 1.0
    s0.u[0] = s0.u[-1] = 0.0
    result = run(smooth_params, smooth_far, s0, SimConfig(dt=0.02, t_end=0.4, output_every=5))
    for s in result.snapshots:
        for name, a, b in zip("vutc", s.fields(), s0.fields()):
            assert (name, a[0], a[-1]) == (name, b[0], b[-1])


def test_ns_mode_matches_nsac_with_pure_phase(smooth_params, smooth_far, small_grid):
    s0 = perturbed_state(small_grid, smooth_far, chi_dip=0.0)
    ns = run(smooth_params, smooth_far, s0, SimConfig(dt=0.02, t_end=0.4, mode="NS"))
    nsac = run(smooth_params, smooth_far, s0, SimConfig(dt=0.02, t_end=0.4, mode="NSAC"))
    for a, b in zip(ns.snapshots[-1].fields()[:3], nsac.snapshots[-1].fields()[:3]):
        assert np.max(np.abs(a - b)) < 1e-13


def test_cfl_violation_names_node(reduced):
    grid = Grid1D(-5, 5, 65)
    far = FarField(3.0, 1.2)
    s = constant(grid, far)
    limit = max_stable_dt(reduced, s, 0.4)
    with pytest.raises(CflViolation) as info:
        step_imex(reduced, far, s, SimConfig(dt=2 * limit, t_end=1.0))
    assert info.value.node is not None and info.value.step is None


def test_sound_speed_includes_thermal_part(reduced):
    # isothermal speed vanishes on the spinodal, the adiabatic one does not
    va, _ = spinodal(reduced, 0.9)
    assert sound_speed(reduced, va, 0.9) > 0


def _spike(field, node, rate):
    def source(t, x):
        out = [np.zeros_like(x) for _ in range(4)]
        out[field][node] = rate
        return out
    return source


def test_negative_temperature_aborts_with_location(smooth_params, smooth_far, small_grid):
    s = perturbed_state(small_grid, smooth_far)
    cfg = SimConfig(dt=0.02, t_end=1.0)
    with pytest.raises(NonpositiveTemperature) as info:
        run(smooth_params, smooth_far, s, cfg, source=_spike(2, 40, -1e4))
    exc = info.value
    assert exc.step == 1 and abs(exc.node - 40) <= 1
    assert exc.partial.abort["error"] == "NonpositiveTemperature"
    assert exc.partial.series.size == 0


def test_volume_cutoff_aborts(smooth_params, smooth_far, small_grid):
    s = perturbed_state(small_grid, smooth_far)
    cfg = SimConfig(dt=0.02, t_end=1.0)
    with pytest.raises(VolumeCutoff) as info:
        run(smooth_params, smooth_far, s, cfg, source=_spike(0, 40, -200.0))
    assert info.value.node == 40


def test_beta_zero_guard(smooth_far, small_grid):
    p = VdwParams(beta=0.0, c_v=5.0, epsilon=1.0)
    s = perturbed_state(small_grid, smooth_far)
    with pytest.raises(ConfigError) as info:
        run(p, smooth_far, s, SimConfig(dt=0.02, t_end=0.04))
    assert info.value.key == "params.beta"
    with pytest.warns(RuntimeWarning):
        run(p, smooth_far, s, SimConfig(dt=0.02, t_end=0.04, allow_unproven=True))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        run(p, smooth_far, s, SimConfig(dt=0.02, t_end=0.04, mode="NS"))


def test_run_series_and_snapshots(smooth_params, smooth_far, small_grid):
    s0 = constant(small_grid, smooth_far)
    result = run(smooth_params, smooth_far, s0, SimConfig(dt=0.01, t_end=0.1, output_every=3))
    assert result.series.dtype.names == SERIES_COLUMNS
    assert result.series.size == 10
    assert result.steps == [0, 3, 6, 9, 10]
    for name in ("e_kin", "e_W", "e_phi", "e_psi", "e_total", "V", "mass"):
        assert np.all(result.series[name] == 0.0)
    times = [s.t for s in result.snapshots]
    assert all(a < b for a, b in zip(times, times[1:]))
    snaps, series = result
    assert snaps is result.snapshots and series is result.series


@settings(max_examples=15, deadline=None)
@given(st.floats(0.0, 0.1), st.floats(-0.05, 0.05), st.floats(0.0, 0.1))
def test_perturbations_keep_bounds_and_energy(dv, du, dth):
    p = VdwParams(epsilon=1.0, c_v=5.0)
    far = FarField(3.0, 1.2)
    grid = Grid1D(-5, 5, 65)
    s0 = perturbed_state(grid, far, dv, du, dth)
    result = run(p, far, s0, SimConfig(dt=0.05, t_end=0.5))
    series = result.series
    assert np.all(series["min_v"] > p.v_min)
    assert np.all(series["min_theta"] > 0)
    assert np.all(series["max_abs_chi"] <= 1 + 1e-8)
    assert np.all(series["V"] >= 0)


# -- initial profiles ------------------------------------------------------


def test_constant_profile(reduced):
    grid = Grid1D(-5, 5, 33)
    s = init_state(grid, FarField(3.0, 1.2), {"kind": "constant"}, reduced)
    assert np.all(s.v == 3.0) and np.all(s.u == 0) and np.all(s.theta == 1.2) and np.all(s.chi == 1)


def test_tanh_profile():
    grid = Grid1D(-5, 5, 33)
    s = init_state(grid, FarField(3.0, 1.2), {"kind": "tanh_interface", "width": 0.3})
    assert s.chi[0] == -1.0 and s.chi[-1] == 1.0
    assert np.all(np.diff(s.chi) > 0)


def test_elliptic_bump_center_is_unstable(reduced):
    far = FarField(0.5, 0.9)
    grid = Grid1D(-5, 5, 101)
    va, vb = spinodal(reduced, 0.9)
    s = init_state(grid, far, {"kind": "elliptic_bump"}, reduced)
    mid = s.v[50]
    assert mid == pytest.approx(0.5 * (va + vb), rel=1e-12)
    assert classify_state(reduced, mid, 0.9) is Region.UNSTABLE
    assert s.v[0] == s.v[-1] == 0.5


def test_perturbation_profile_with_interface(reduced):
    grid = Grid1D(-5, 5, 101)
    s = init_state(grid, FarField(3.0, 1.2), {"kind": "perturbation", "interface_width": 0.5})
    assert s.chi[0] == -1 and s.chi[-1] == 1 and s.v.max() == pytest.approx(3.05, rel=1e-3)


@pytest.mark.parametrize("profile, far", [
    ({"kind": "elliptic_bump"}, FarField(3.0, 1.2)),
    ({"kind": "elliptic_bump", "v_mid": 3.0}, FarField(0.5, 0.9)),
    ({"kind": "nope"}, FarField(3.0, 1.2)),
    ({"kind": "constant", "width": 1}, FarField(3.0, 1.2)),
    ({"kind": "tanh_interface", "width": 0}, FarField(3.0, 1.2)),
])
def test_profile_errors(reduced, profile, far):
    with pytest.raises(ProfileError):
        init_state(Grid1D(-5, 5, 33), far, profile, reduced)


def test_inadmissible_far_field(reduced):
    va, vb = spinodal(reduced, 0.9)
    with pytest.raises(AdmissibilityError):
        init_state(Grid1D(-5, 5, 33), FarField(0.5 * (va + vb), 0.9), {"kind": "constant"}, reduced)


def test_manufactured_profile_matches_exact(reduced):
    grid = Grid1D(0, 1, 33)
    s = init_state(grid, DEFAULT_FAR, {"kind": "manufactured"}, reduced)
    exact = ManufacturedProblem(reduced).exact(0.0, grid.x)
    for a, b in zip(s.fields(), exact):
        assert np.array_equal(a, b)


# -- manufactured solutions ------------------------------------------------


def test_manufactured_spatial_order_small(smooth_params):
    prob = ManufacturedProblem(smooth_params)
    rows = convergence_ladder(prob, 2, n0=64, dt_of_dx=lambda dx: 40 * dx**2)
    order = observed_orders([r["error"] for r in rows])[0]
    assert order > 1.7


def test_observed_orders():
    assert observed_orders([4.0, 1.0, 0.25]) == pytest.approx([2.0, 2.0])
