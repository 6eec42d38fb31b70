import math

import numpy as np
import pytest

from stobruss.exceptions import ConfigError, IntegrationFault, InvalidArgumentError
from stobruss.model import BrusselatorParams, equilibrium, linearize, reaction_terms
from stobruss.sde import (
    THREADS_ENV,
    FieldState,
    SpatialGrid,
    TimeGrid,
    check_cfl,
    diffusion_number,
    em_step_mode,
    initial_condition,
    laplacian_neumann,
    member_seeds,
    sample_noise_path,
    simulate_field,
    simulate_field_ensemble,
    simulate_mode,
    simulate_modes_ensemble,
    step_linear_field,
    step_nonlinear_field,
    thread_count,
)
from stobruss.spectral import EigenMode, ModeMatrices, discrete_mu, mode_matrices, neumann_eigenpairs

GRID = SpatialGrid(1.0, 50)


def _mm(A, su, sv, k=1):
    A = np.asarray(A, dtype=float)
    Bn = np.diag([su, sv])
    return ModeMatrices(k, 0.0, A, Bn, A - 0.5 * Bn @ Bn)


# --- grids and noise ---------------------------------------------------------


def test_grids():
    g = SpatialGrid.from_spacing(1.0, 0.02)
    assert g.N == 50 and g.dx == pytest.approx(0.02)
    assert g.nodes[0] == pytest.approx(0.01) and g.nodes[-1] == pytest.approx(0.99)
    assert TimeGrid(50, 0.005).n_steps == 10000
    with pytest.raises(InvalidArgumentError):
        SpatialGrid.from_spacing(1.0, 0.03)
    with pytest.raises(InvalidArgumentError):
        TimeGrid(1.0, 0.3)
    with pytest.raises(InvalidArgumentError):
        SpatialGrid(1.0, 2)


def test_noise_path_count_and_determinism():
    assert sample_noise_path(TimeGrid(1.0, 0.5), 3).increments.size == 2
    a = sample_noise_path(TimeGrid(10, 0.01), (4, 2, 0)).increments
    b = sample_noise_path(TimeGrid(10, 0.01), (4, 2, 0)).increments
    np.testing.assert_array_equal(a, b)
    c = sample_noise_path(TimeGrid(10, 0.01), (4, 3, 0)).increments
    assert not np.array_equal(a, c)


def test_noise_variance():
    inc = sample_noise_path(TimeGrid(5000.0, 0.005), 11).increments
    assert inc.size == 10**6
    assert abs(inc.var() - 0.005) <= 3e-5


def test_coarsened_path_sums_exactly():
    path = sample_noise_path(TimeGrid(1.0, 1e-3), 5)
    coarse = path.coarsen(5)
    np.testing.assert_array_equal(coarse.increments, path.increments.reshape(-1, 5).sum(axis=1))
    assert coarse.W[-1] == pytest.approx(path.W[-1], abs=1e-13)
    with pytest.raises(InvalidArgumentError):
        path.coarsen(7)


def test_member_seeds_distinct():
    seeds = {s for r in range(50) for s in member_seeds(9, r)}
    assert len(seeds) == 100


# --- mode stepping -----------------------------------------------------------


def test_em_step_examples():
    mm = _mm([[-1, 0], [0, -1]], 1.0, 1.0)
    np.testing.assert_array_equal(em_step_mode([0, 0], mm, 0.3, 0.01), [0, 0])
    np.testing.assert_allclose(em_step_mode([1, 0], mm, 0.1, 0.01), [1.09, 0.0], rtol=1e-15)
    mm2 = _mm([[0.2, 1.0], [-1.0, -0.4]], 0.5, 2.0)
    V = np.array([0.3, -0.8])
    np.testing.assert_allclose(em_step_mode(V, mm2, 0.0, 0.02), V + mm2.A_k @ V * 0.02)


def test_em_step_fault():
    with pytest.raises(IntegrationFault):
        em_step_mode([1e308, 1e308], _mm([[1e10, 0], [0, 0]], 0, 0), 0.0, 1.0)


def test_simulate_mode_scalar_exponential():
    lam, dt = -0.7, 0.01
    tg = TimeGrid(20.0, dt)
    traj = simulate_mode(_mm([[lam, 0], [0, lam]], 0, 0), [3.0, 4.0], tg)
    expected = math.log(5.0) + np.arange(tg.n_steps + 1) * math.log1p(lam * dt)
    np.testing.assert_allclose(traj.log_norms, expected, atol=1e-10)
    assert abs(traj.log_norms[-1] - (math.log(5) + lam * 20)) < 0.1


def test_renormalisation_neutral(turing):
    mm = mode_matrices(linearize(turing), turing.d_u, turing.d_v, 0.0, 1.5, neumann_eigenpairs(1.0, 20)[-1])
    tg = TimeGrid(60.0, 0.005)
    runs = [simulate_mode(mm, [1.0, 1.0], tg, seed=7, renorm_threshold=r).log_norms for r in (1e3, 1e6, 1e9)]
    for r in runs[1:]:
        assert np.max(np.abs(r - runs[0])) <= 1e-9
    # the series grows far beyond every threshold
    assert runs[0][-1] > math.log(1e9)


def test_simulate_mode_rejects_zero():
    with pytest.raises(InvalidArgumentError):
        simulate_mode(_mm(np.eye(2), 0, 0), [0, 0], TimeGrid(1, 0.1))


def test_mode_ensemble_matches_single(turing):
    co = linearize(turing)
    mms = [mode_matrices(co, turing.d_u, turing.d_v, 0.3, 0.9, m) for m in neumann_eigenpairs(1.0, 4)]
    tg = TimeGrid(2.0, 0.01)
    times, s = simulate_modes_ensemble(mms, [1, 1], tg, 3, base_seed=5, threads=2)
    for r in range(3):
        noise = sample_noise_path(tg, member_seeds(5, r)[0])
        for i, mm in enumerate(mms):
            np.testing.assert_array_equal(s[:, i, r], simulate_mode(mm, [1, 1], tg, noise=noise).log_norms)


# --- Laplacian ---------------------------------------------------------------


def test_laplacian_constant_and_conservation():
    assert np.all(laplacian_neumann(np.full(50, 2.5), 0.02) == 0)
    w = np.random.default_rng(0).normal(size=50)
    assert abs(laplacian_neumann(w, 0.02).sum()) <= 1e-9 * np.abs(laplacian_neumann(w, 0.02)).sum()


@pytest.mark.parametrize("k", range(1, 11))
def test_laplacian_discrete_eigenfunctions(k):
    x = GRID.nodes
    w = np.cos((k - 1) * math.pi * x / GRID.L)
    lap = laplacian_neumann(w, GRID.dx)
    np.testing.assert_allclose(lap, -discrete_mu(k, GRID.N, GRID.dx) * w, atol=1e-9 * (1 + (k * 10) ** 2))


def test_laplacian_ghost_cells():
    w = np.arange(5.0) ** 2
    padded = np.concatenate([[w[0]], w, [w[-1]]])
    np.testing.assert_allclose(laplacian_neumann(w, 0.5), (padded[:-2] - 2 * w + padded[2:]) / 0.25)


# --- field stepping ----------------------------------------------------------


def test_linear_step_origin_invariant(turing):
    co = linearize(turing)
    z = FieldState(np.zeros(50), np.zeros(50))
    out = step_linear_field(z, co, turing.d_u, turing.d_v, (1.0, 2.0), 0.3, 0.005, GRID)
    assert np.all(out.u == 0) and np.all(out.v == 0)


def test_nonlinear_step_equilibrium_exact(turing, nonlinear_stable):
    for p in (turing, nonlinear_stable):
        ui, vi = equilibrium(p)
        assert reaction_terms(p, ui, vi) == (0.0, 0.0)
        s = FieldState(np.full(50, ui), np.full(50, vi))
        out = step_nonlinear_field(s, p, (1.25, 3.0), 0.7, 0.005, GRID)
        assert np.all(out.u == ui) and np.all(out.v == vi)


def test_constant_state_follows_mode_one(turing):
    co = linearize(turing)
    M = np.array(co.matrix())
    s = FieldState(np.full(50, 0.2), np.full(50, -0.1))
    V = np.array([0.2, -0.1])
    for j in range(200):
        dW = 0.01 * math.sin(j)
        s = step_linear_field(s, co, turing.d_u, turing.d_v, (0.5, 0.5), dW, 0.005, GRID)
        V = V + M @ V * 0.005 + 0.5 * V * dW
        np.testing.assert_allclose([s.u.mean(), s.v.mean()], V, rtol=1e-10)
        assert np.ptp(s.u) <= 1e-14 and np.ptp(s.v) <= 1e-14


def test_spatial_mean_follows_mode_one_ode(turing):
    co = linearize(turing)
    M = np.array(co.matrix())
    s = initial_condition("linear-perturbation", turing, GRID, seed=3)
    V = np.array([s.u.mean(), s.v.mean()])
    for _ in range(100):
        s = step_linear_field(s, co, turing.d_u, turing.d_v, (0.0, 0.0), 0.0, 0.005, GRID)
        V = V + M @ V * 0.005
        np.testing.assert_allclose([s.u.mean(), s.v.mean()], V, rtol=1e-10)


@pytest.mark.parametrize("k", [2, 5, 12])
def test_eigenfunction_stays_in_mode(turing, k):
    co = linearize(turing)
    mode = EigenMode(k, 0.0)
    phi = mode.phi(GRID.nodes)
    s = FieldState(phi.copy(), np.zeros(50))
    mu_h = float(discrete_mu(k, GRID.N, GRID.dx))
    Ah = np.array([[co.a - turing.d_u * mu_h, co.b], [co.c, co.d - turing.d_v * mu_h]])
    V = np.array([1.0, 0.0])
    for _ in range(20):
        s = step_linear_field(s, co, turing.d_u, turing.d_v, (0.0, 0.0), 0.0, 0.005, GRID)
        V = V + Ah @ V * 0.005
    np.testing.assert_allclose(s.u, V[0] * phi, atol=1e-12)
    np.testing.assert_allclose(s.v, V[1] * phi, atol=1e-12)


def test_nonlinear_constant_state_matches_ode(turing):
    T, dt = 2.0, 1e-3
    tg = TimeGrid(T, dt)
    init = FieldState(np.full(50, 1.3), np.full(50, 1.5))
    traj = simulate_field("nonlinear", turing, (0.0, 0.0), GRID, tg, init, snapshot_times=[T])

    def rhs(y):
        return np.array(reaction_terms(turing, y[0], y[1]))

    y = np.array([1.3, 1.5])
    h = 1e-4
    for _ in range(int(T / h)):
        k1 = rhs(y)
        k2 = rhs(y + h / 2 * k1)
        k3 = rhs(y + h / 2 * k2)
        k4 = rhs(y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    assert np.max(np.abs(traj.final.u - y[0])) < 5 * dt
    assert np.max(np.abs(traj.final.v - y[1])) < 5 * dt


def test_shared_noise_hook(turing):
    seen = []

    def hook(dw_u, dw_v):
        seen.append((np.array(dw_u), np.array(dw_v)))

    tg = TimeGrid(0.05, 0.005)
    path = sample_noise_path(tg, 1)
    init = initial_condition("paper-nonlinear", turing, GRID, seed=1)
    simulate_field("nonlinear", turing, (0.4, 1.1), GRID, tg, init, noise_path=path, hook=hook)
    assert len(seen) == tg.n_steps
    for j, (a, b) in enumerate(seen):
        np.testing.assert_array_equal(a, b)
        assert np.all(a == path.increments[j])


# --- CFL, faults, determinism --------------------------------------------------


def test_cfl_ratio_of_reference_grid(turing):
    assert diffusion_number(turing, GRID, TimeGrid(50, 0.005)) == pytest.approx(0.025)
    check_cfl(turing, GRID, TimeGrid(50, 0.005))


def test_cfl_violation(turing):
    with pytest.raises(ConfigError):
        simulate_field("linear", turing, (0, 0), GRID, TimeGrid(10, 0.5),
                       FieldState(np.zeros(50), np.zeros(50)))


def test_zero_linear_trajectory(turing):
    traj = simulate_field("linear", turing, (1.0, 1.0), GRID, TimeGrid(1, 0.005),
                          FieldState(np.zeros(50), np.zeros(50)), seed=2)
    assert np.all(traj.l2_u == 0) and np.all(traj.l2_v == 0)


def test_integration_fault_reports_time(nonlinear_stable):
    init = initial_condition("paper-nonlinear", nonlinear_stable, GRID, seed=0)
    with pytest.raises(IntegrationFault) as err:
        simulate_field("nonlinear", nonlinear_stable, (0.0, 40.0), GRID, TimeGrid(20, 0.005), init, seed=0)
    assert err.value.time is not None and err.value.location is not None


def test_same_seed_bitwise(turing):
    tg = TimeGrid(5.0, 0.005)
    init = initial_condition("paper-nonlinear", turing, GRID, seed=4)
    a = simulate_field("nonlinear", turing, (0.6, 0.6), GRID, tg, init, seed=(4, 0, 0))
    b = simulate_field("nonlinear", turing, (0.6, 0.6), GRID, tg, init, seed=(4, 0, 0))
    assert a.l2_u.tobytes() == b.l2_u.tobytes() and a.final.v.tobytes() == b.final.v.tobytes()


@pytest.mark.parametrize("threads", [1, 2, 3, 7])
def test_ensemble_independent_of_chunking(turing, threads):
    tg = TimeGrid(2.0, 0.005)
    ref = simulate_field_ensemble("linear", turing, (0.5, 0.5), GRID, tg, 7, base_seed=3, threads=1)
    ens = simulate_field_ensemble("linear", turing, (0.5, 0.5), GRID, tg, 7, base_seed=3, threads=threads)
    assert ens.l2_u.tobytes() == ref.l2_u.tobytes()
    assert ens.final_v.tobytes() == ref.final_v.tobytes()


def test_ensemble_member_equals_single_run(turing):
    tg = TimeGrid(2.0, 0.005)
    ens = simulate_field_ensemble("nonlinear", turing, (0.3, 0.8), GRID, tg, 4, base_seed=8, threads=2)
    noise_seed, init_seed = member_seeds(8, 2)
    init = initial_condition("paper-nonlinear", turing, GRID, init_seed)
    one = simulate_field("nonlinear", turing, (0.3, 0.8), GRID, tg, init, seed=noise_seed)
    assert ens.l2_u[:, 2].tobytes() == one.l2_u.tobytes()


def test_ensemble_fault_masking(nonlinear_stable):
    tg = TimeGrid(20.0, 0.005)
    with pytest.raises(IntegrationFault):
        simulate_field_ensemble("nonlinear", nonlinear_stable, (0.0, 40.0), GRID, tg, 3, on_fault="raise")
    ens = simulate_field_ensemble("nonlinear", nonlinear_stable, (0.0, 40.0), GRID, tg, 3, on_fault="mask")
    assert set(ens.faults) == {0, 1, 2}
    assert not ens.ok.any() and np.isnan(ens.l2_u[-1]).all()


def test_thread_count_env(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    assert thread_count() == 3
    monkeypatch.delenv(THREADS_ENV)
    assert thread_count() >= 1
    for bad in ("0", "x"):
        monkeypatch.setenv(THREADS_ENV, bad)
        with pytest.raises(ConfigError):
            thread_count()


# --- initial data ----------------------------------------------------------------


def test_initial_condition_examples(turing):
    ui, vi = equilibrium(turing)
    eq = initial_condition("paper-nonlinear", turing, GRID, xi=(0.0, 0.0))
    assert np.all(eq.u == ui) and np.all(eq.v == vi)
    s = initial_condition("paper-nonlinear", turing, GRID, xi=(1.0, 0.5))
    assert s.u[0] == pytest.approx(ui + 0.1 * (1 + math.cos(3 * GRID.dx / 2)), rel=1e-15)
    assert s.v[0] == pytest.approx(vi + 0.05 * (1 + math.sin(3 * GRID.dx / 2)), rel=1e-15)
    zero = initial_condition("linear-perturbation", turing, GRID, xi=(0.0, 0.0))
    assert np.all(zero.u == 0) and np.all(zero.v == 0)
    lin = initial_condition("linear-perturbation", turing, GRID, seed=3)
    nl = initial_condition("paper-nonlinear", turing, GRID, seed=3)
    np.testing.assert_allclose(lin.u, nl.u - ui, atol=1e-15)
    big = initial_condition("custom-amplitude", turing, GRID, seed=3, amplitude=10.0)
    np.testing.assert_allclose(big.u, 100 * lin.u, rtol=1e-13)
    with pytest.raises(InvalidArgumentError):
        initial_condition("gaussian", turing, GRID)


def test_nonfinite_state_rejected():
    with pytest.raises(IntegrationFault):
        FieldState(np.array([1.0, np.nan, 0.0]), np.zeros(3))
