import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from fermivac.continuity import continuity_defect
from fermivac.dynamics import (
    GaugeProfile,
    PotentialField,
    TimeGrid,
    default_pair,
    electric_field,
    energy_rate_check,
    evolve,
    gauge_pump_experiment,
    gauge_pump_sweep,
    hamiltonian_at,
    pair_coupling,
    pair_superposition,
    pure_gauge_potential,
    reference_run,
    sinusoidal_gauge,
    smoothstep,
    smoothstep_rate,
)
from fermivac.fock import EigenstateSpec


@pytest.mark.parametrize("args", [(0, 1, 0), (0, 1, -1e-3), (1, 1, 1e-3), (0, 1, 0.3)])
def test_time_grid_validation(args):
    with pytest.raises(ValueError):
        TimeGrid(*args)


def test_time_grid_nodes():
    grid = TimeGrid(0.0, 1.0, 0.25)
    assert grid.steps == 4
    assert np.allclose(grid.times, [0, 0.25, 0.5, 0.75, 1.0])
    assert grid.refined().dt == 0.125


@given(s=st.floats(-0.5, 1.5))
def test_smoothstep_bounds(s):
    v = smoothstep(s)
    assert 0.0 <= v <= 1.0
    assert smoothstep_rate(s) >= 0


def test_smoothstep_rate_is_derivative():
    s = np.linspace(0.01, 0.99, 50)
    h = 1e-6
    assert np.allclose((smoothstep(s + h) - smoothstep(s - h)) / (2 * h), smoothstep_rate(s), atol=1e-8)


def test_free_evolution_of_eigenstate_is_stationary(space3):
    grid = TimeGrid(0.0, 0.5, 1e-2)
    state, energy = space3.number_eigenstate(EigenstateSpec((2,), (1,)))
    traj = evolve(space3, state, PotentialField.zero(grid, 3))
    assert np.allclose(traj.xi_f, energy, atol=1e-12)
    assert np.abs(traj.rho_e - traj.rho_e[0]).max() <= 1e-12
    assert np.abs(traj.norm - 1).max() <= 1e-12


def test_unnormalized_initial_state_rejected(space3):
    with pytest.raises(ValueError):
        evolve(space3, 2 * space3.vacuum_state(), PotentialField.zero(TimeGrid(0, 0.1, 0.05), 3))


@pytest.mark.parametrize("n", [3, 5])
def test_constant_potential_matches_matrix_exponential(spaces, n):
    space = spaces[n]
    grid = TimeGrid(0.0, 0.05, 1e-2)
    rng = np.random.default_rng(n)
    A0 = np.broadcast_to(rng.normal(size=n), (grid.steps + 1, n)).copy()
    A = np.broadcast_to(rng.normal(size=n), (grid.steps + 1, n)).copy()
    pot = PotentialField(grid, A0, A)
    initial = pair_superposition(space, EigenstateSpec((1,), (1,)))
    traj = evolve(space, initial, pot, keep_states=True)
    h = hamiltonian_at(space, pot, 0.0).toarray()
    exact = expm(-1j * h * grid.duration) @ initial
    assert np.abs(traj.states[-1] - exact).max() <= 1e-10


def test_hamiltonian_only_at_nodes_and_midpoints(space3):
    pot = PotentialField.zero(TimeGrid(0, 1, 0.1), 3)
    hamiltonian_at(space3, pot, 0.05)
    with pytest.raises(ValueError):
        hamiltonian_at(space3, pot, 0.03)


def test_pure_gauge_requires_quiet_start(space3):
    grid = TimeGrid(0, 0.1, 0.01)
    chi = np.ones((grid.steps + 1, 3))
    with pytest.raises(ValueError):
        pure_gauge_potential(GaugeProfile(grid, chi, np.zeros_like(chi)), space3.config)


def test_pure_gauge_carries_no_electric_field(space3):
    grid = TimeGrid(0, 1, 1e-3)
    pot = pure_gauge_potential(sinusoidal_gauge(grid, space3.config), space3.config)
    # only the finite-difference time derivative contributes
    assert np.abs(electric_field(pot, space3.config)).max() <= 1e-5


def test_uniform_gauge_leaves_observables_unchanged(space3):
    grid = TimeGrid(0, 1, 1e-2)
    initial = pair_superposition(space3)
    s = grid.times / grid.duration
    chi = np.repeat(smoothstep(s)[:, None], 3, axis=1)
    chi_dot = np.repeat(smoothstep_rate(s)[:, None], 3, axis=1) / grid.duration
    profile = GaugeProfile(grid, chi, chi_dot)
    rep = gauge_pump_experiment(space3, 1.0, grid, initial, recipe="custom", profile=profile)
    assert rep.max_obs_gauge_shift <= 1e-12
    assert rep.max_current_gauge_shift <= 1e-12
    assert rep.xi_meas == pytest.approx(rep.xi_initial, abs=1e-12)


def test_residual_tracks_defect_expectation(space3):
    grid = TimeGrid(0, 1, 1e-3)
    ref = reference_run(space3, pair_superposition(space3), grid)
    expected = np.array([
        [np.vdot(s, continuity_defect(space3, x) @ s).real for x in range(3)] for s in ref.states
    ])
    assert np.abs(ref.L - expected)[1:-1].max() <= 1e-5
    assert np.abs(expected).max() > 1e-2


def test_zero_strength_pump_has_no_gap(space3):
    rep = gauge_pump_experiment(space3, 0.0, TimeGrid(0, 0.5, 1e-3))
    assert abs(rep.gap) <= 1e-10
    assert rep.max_obs_gauge_shift == 0


def test_degenerate_recipe_is_vacuous(space3):
    # the vacuum does not move, so d rho / dt = 0 and the recipe has nothing to pump
    rep = gauge_pump_experiment(space3, 1.0, TimeGrid(0, 0.2, 1e-2), space3.vacuum_state())
    assert rep.vacuous


def test_unknown_recipe_rejected(space3):
    with pytest.raises(ValueError):
        gauge_pump_experiment(space3, 1.0, TimeGrid(0, 0.1, 1e-2), recipe="bogus")


def test_default_pair_maximizes_coupling(space3):
    best = pair_coupling(space3, default_pair(space3))
    labels = space3.basis.positive_labels
    assert all(pair_coupling(space3, EigenstateSpec((j,), (v,))) <= best for j in labels for v in labels)


def test_energy_rate_residual_shrinks_with_dt(space3):
    initial = pair_superposition(space3)
    res = []
    for dt in (4e-3, 2e-3):
        grid = TimeGrid(0, 1, dt)
        pot = pure_gauge_potential(sinusoidal_gauge(grid, space3.config, 0.5), space3.config)
        res.append(energy_rate_check(evolve(space3, initial, pot), pot, space3.config))
    assert res[1] < res[0] / 3


def test_trajectory_csv_columns(space3, tmp_path):
    traj = evolve(space3, space3.vacuum_state(), PotentialField.zero(TimeGrid(0, 0.02, 0.01), 3))
    path = tmp_path / "traj.csv"
    traj.to_csv(path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["t", "norm", "xi_f", "rho_e[0]", "rho_e[1]", "rho_e[2]", "J_e[0]", "J_e[1]", "J_e[2]",
                       "L[0]", "L[1]", "L[2]"]
    assert len(rows) == 4


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_norm_conserved_under_random_potentials(space3, seed):
    rng = np.random.default_rng(seed)
    grid = TimeGrid(0, 0.1, 1e-2)
    pot = PotentialField(grid, rng.normal(size=(grid.steps + 1, 3)), rng.normal(size=(grid.steps + 1, 3)))
    traj = evolve(space3, pair_superposition(space3), pot)
    assert np.abs(traj.norm - 1).max() <= 1e-12


def test_l_dot_recipe_dichotomy(space3):
    grid = TimeGrid(0, 1, 2e-3)
    reps = gauge_pump_sweep(space3, [0.1, 1.0, 10.0], grid, recipe="L_dot")
    preds = [r.xi_pred for r in reps]
    assert all(b < a for a, b in zip(preds, preds[1:]))
    assert all(r.min_xi_f >= -1e-10 for r in reps)
    assert not any(r.vacuous for r in reps)
