import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fermivac.dynamics import GaugeProfile, PotentialField, TimeGrid, evolve, sinusoidal_gauge
from fermivac.fock import EigenstateSpec
from fermivac.response import (
    dyson_current,
    first_order_current,
    gauge_variation_direct,
    gauge_variation_schwinger,
    interaction_operator,
    interaction_state,
    ramped_scalar_potential,
    reconcile,
)

GRID = TimeGrid(0.0, 1.0, 1e-3)


def test_zero_potential_gives_zero(space3):
    pot = PotentialField.zero(GRID, 3)
    assert all(first_order_current(space3, pot, x, 1.0) == 0 for x in range(3))


def test_uniform_scalar_potential_gives_zero(space3):
    A0 = np.repeat(np.sin(GRID.times)[:, None], 3, axis=1)
    pot = PotentialField(GRID, A0, np.zeros_like(A0))
    assert abs(first_order_current(space3, pot, 1, 1.0)) <= 1e-14


def test_linear_in_amplitude(space3):
    pot = ramped_scalar_potential(GRID, space3.config, 0.7)
    one = first_order_current(space3, pot, 1, 1.0)
    two = first_order_current(space3, pot.scaled(2.0), 1, 1.0)
    assert one != 0
    assert two == pytest.approx(2 * one, rel=1e-12)


def test_time_must_be_a_node(space3):
    with pytest.raises(ValueError):
        first_order_current(space3, ramped_scalar_potential(GRID, space3.config), 0, 0.0005)


def test_non_eigenstate_reference_rejected(space3):
    v = (space3.vacuum_state() + space3.basis_state(0)) / np.sqrt(2)
    with pytest.raises(ValueError):
        first_order_current(space3, ramped_scalar_potential(GRID, space3.config), 0, 1.0, v)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6), t=st.floats(-5, 5))
def test_interaction_picture_preserves_expectations(space3, seed, t):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=64) + 1j * rng.normal(size=64)
    v /= np.linalg.norm(v)
    op = space3.current_operator(int(rng.integers(3)))
    # <psi_I(t)| O_I(t) |psi_I(t)> with psi_I = e^{iH0 t} psi(t); here psi(t) = v
    lhs = np.vdot(interaction_state(space3, v, t), interaction_operator(space3, op, t) @ interaction_state(space3, v, t))
    assert lhs == pytest.approx(np.vdot(v, op @ v), abs=1e-12)


def test_interaction_operator_identity_at_zero(space3):
    op = space3.charge_operator(0)
    assert np.abs((interaction_operator(space3, op, 0.0) - op).toarray()).max() == 0


def test_vacuum_expectation_phase_invariant(space3):
    vac = space3.vacuum_state()
    op = space3.current_operator(2)
    assert np.vdot(vac, interaction_operator(space3, op, 3.3) @ vac) == pytest.approx(np.vdot(vac, op @ vac))


def test_zero_gauge_gives_zero(space3):
    chi = GaugeProfile.zero(GRID, 3)
    assert gauge_variation_direct(space3, chi, 0, 1.0) == 0
    assert gauge_variation_schwinger(space3, chi, 0, 1.0) == (0.0, 0.0)


@pytest.mark.parametrize("x", [0, 1, 2])
def test_reconciliation_identity(space3, x):
    row = reconcile(space3, sinusoidal_gauge(GRID, space3.config), x, 1.0)
    assert abs(row.residual) <= 1e-8
    assert abs(row.schwinger_form) <= 1e-12


def test_reconciliation_modified_vacuum(space3):
    state = space3.modified_vacuum(1.2)
    row = reconcile(space3, sinusoidal_gauge(GRID, space3.config), 1, 1.0, state=state)
    assert abs(row.residual) <= 1e-8
    assert abs(row.schwinger_form) <= 1e-12


def test_gauge_variation_nonzero_under_truncation(space3):
    # the direct gauge variation is carried entirely by the defect correction
    row = reconcile(space3, sinusoidal_gauge(GRID, space3.config), 1, 1.0)
    assert abs(row.direct) > 1e-3


def test_single_site_everything_zero(spaces):
    space = spaces[1]
    grid = TimeGrid(0, 0.5, 1e-3)
    row = reconcile(space, sinusoidal_gauge(grid, space.config), 0, 0.5)
    assert abs(row.direct) <= 1e-14 and abs(row.schwinger_form) <= 1e-14 and abs(row.defect_correction) <= 1e-14


def test_dyson_first_order_matches_response_kernel(space3):
    pot = ramped_scalar_potential(GRID, space3.config)
    electron, _ = space3.number_eigenstate(EigenstateSpec((2,), ()))
    for state in (None, electron):
        j = dyson_current(space3, pot, 1, 1.0, state)
        assert j[1] == pytest.approx(first_order_current(space3, pot, 1, 1.0, state), abs=1e-10)


def test_dyson_zeroth_order_is_free_expectation(space3):
    electron, _ = space3.number_eigenstate(EigenstateSpec((2,), ()))
    pot = ramped_scalar_potential(GRID, space3.config)
    j = dyson_current(space3, pot, 0, 1.0, electron, order=1)
    assert len(j) == 2
    assert j[0] == pytest.approx(np.vdot(electron, space3.current_operator(0) @ electron).real)
    with pytest.raises(ValueError):
        dyson_current(space3, pot, 0, 1.0, order=3)


def test_coarse_grid_warns(space3):
    grid = TimeGrid(0, 4, 0.2)
    A0 = np.cos(40 * grid.times)[:, None] * np.cos(space3.config.positions)[None, :]
    pot = PotentialField(grid, A0, np.zeros_like(A0))
    with pytest.warns(RuntimeWarning):
        first_order_current(space3, pot, 1, 4.0)


def test_exact_minus_first_order_is_second_order(space3):
    # a one-electron reference: in the vacuum the second-order current vanishes by charge symmetry
    electron, _ = space3.number_eigenstate(EigenstateSpec((2,), ()))
    grid = TimeGrid(0.0, 2.0, 1e-3)
    pot = ramped_scalar_potential(grid, space3.config)
    j0 = evolve(space3, electron, pot.scaled(0.0)).J_e[-1, 1]
    j1 = first_order_current(space3, pot, 1, 2.0, electron)
    eps = [0.04, 0.02, 0.01]
    errs = [abs(evolve(space3, electron, pot.scaled(e)).J_e[-1, 1] - j0 - e * j1) for e in eps]
    slope = np.polyfit(np.log(eps), np.log(errs), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.2)
