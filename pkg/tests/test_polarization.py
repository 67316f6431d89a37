import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fermivac.polarization import (
    FourMomentum,
    gauge_integrand,
    gauge_transform_potential,
    gauss_legendre,
    growth_exponent,
    log_slope,
    nongauge_integrand,
    pi_gauge_scalar,
    pi_nongauge_scalar,
    polarization_tensor,
    vacuum_current,
    ward_contract,
)

component = st.floats(-3, 3, allow_nan=False)


def four_momenta(max_k0=1.5):
    return st.builds(FourMomentum, st.floats(-max_k0, max_k0), component, component, component)


def test_empty_interval_is_zero():
    assert pi_gauge_scalar(0.0, 1.0, 2.0) == 0.0
    assert pi_gauge_scalar(0.0, 1.0, 1.0) == 0.0
    assert pi_nongauge_scalar(1.0, 2.0) == 0.0


def test_nongauge_below_threshold_rejected():
    with pytest.raises(ValueError):
        pi_nongauge_scalar(1.0, 1.5)


@pytest.mark.parametrize("k2", [4.0, 5.0])
def test_at_or_above_pair_threshold_rejected(k2):
    with pytest.raises(ValueError):
        pi_gauge_scalar(k2, 1.0, 10.0)


def test_integrands_vanish_at_threshold():
    assert gauge_integrand(2.0, 1.0, 0.0) == 0.0
    assert nongauge_integrand(2.0, 1.0) == 0.0


@pytest.mark.parametrize("cutoff", [10.0, 100.0, 1000.0])
def test_against_fixed_order_oracle(cutoff):
    g_ref = gauss_legendre(lambda z: gauge_integrand(z, 1.0, 0.0), 2.0, cutoff)
    ng_ref = gauss_legendre(lambda z: nongauge_integrand(z, 1.0), 2.0, cutoff)
    assert pi_gauge_scalar(0.0, 1.0, cutoff) == pytest.approx(g_ref, rel=1e-7)
    assert pi_nongauge_scalar(1.0, cutoff) == pytest.approx(ng_ref, rel=1e-7)


def test_oracle_on_closed_form():
    # int_0^1 z^2 dz = 1/3
    assert gauss_legendre(lambda z: z**2, 0.0, 1.0, nodes=20) == pytest.approx(1 / 3, rel=1e-14)


def test_spacelike_momentum_lowers_gauge_integral():
    assert pi_gauge_scalar(-1.0, 1.0, 100.0) < pi_gauge_scalar(0.0, 1.0, 100.0)


def test_gauge_integral_log_growth():
    cutoffs = [10.0, 100.0, 1000.0]
    # z * integrand -> 1 for large z
    assert log_slope(cutoffs, [pi_gauge_scalar(0.0, 1.0, c) for c in cutoffs]) == pytest.approx(1.0, abs=0.02)


def test_nongauge_doubling_ratio():
    ratio = pi_nongauge_scalar(1.0, 2000.0) / pi_nongauge_scalar(1.0, 1000.0)
    assert ratio == pytest.approx(4.0, rel=0.05)


def test_nongauge_growth_exponent():
    cutoffs = [10.0, 100.0, 1000.0]
    assert growth_exponent(cutoffs, [pi_nongauge_scalar(1.0, c) for c in cutoffs]) == pytest.approx(2.0, abs=0.05)


@settings(max_examples=30, deadline=None)
@given(a=st.floats(2.01, 500), b=st.floats(2.01, 500))
def test_nongauge_increasing(a, b):
    if a == b:
        return
    lo, hi = sorted((a, b))
    assert 0 < pi_nongauge_scalar(1.0, lo) < pi_nongauge_scalar(1.0, hi)


@settings(max_examples=100, deadline=None)
@given(k=four_momenta())
def test_gauge_part_transverse(k):
    res = polarization_tensor(k, 1.0, 100.0)
    gauge, _ = ward_contract(k, res)
    assert np.abs(gauge).max() <= 1e-12


def test_nongauge_contraction_timelike_k():
    k = FourMomentum(1.0)
    _, ng = ward_contract(k, polarization_tensor(k, 1.0, 100.0))
    assert np.all(ng == 0)


def test_nongauge_contraction_unit_spatial_k():
    k = FourMomentum(0.0, 1.0)
    res = polarization_tensor(k, 1.0, 100.0)
    _, ng = ward_contract(k, res)
    # k_1 = g_11 k^1 = -1
    assert ng[1] == pytest.approx(-res.scalar_NG)
    assert ng[0] == ng[2] == ng[3] == 0


@settings(max_examples=30, deadline=None)
@given(k=four_momenta())
def test_nongauge_contraction_nonzero_for_spatial_k(k):
    res = polarization_tensor(k, 1.0, 50.0)
    _, ng = ward_contract(k, res)
    assert np.allclose(ng[1:], res.scalar_NG * k.lower[1:])
    if np.any(k.upper[1:] != 0):
        assert np.abs(ng[1:]).max() > 0


def test_tensor_structure():
    k = FourMomentum(0.5, 0.2, -0.1, 0.3)
    res = polarization_tensor(k, 1.0, 30.0)
    assert np.allclose(res.tensor_G, res.tensor_G.T)
    assert np.all(np.diag(res.tensor_NG) == [0, res.scalar_NG, res.scalar_NG, res.scalar_NG])
    assert res.coupling == pytest.approx(2 / (3 * math.pi))
    assert np.allclose(res.physical_tensor, res.coupling * res.tensor)
    assert res.quadrature_error >= 0


def test_gauge_transform_zero_chi_is_identity():
    k = np.array([[0.3, 1.0, 0.0, 0.2], [1.0, 0.0, 0.5, 0.0]])
    A = np.array([[1.0, 2.0, 3.0, 4.0], [0.0, -1.0, 0.5, 2.0]])
    assert np.array_equal(gauge_transform_potential(k, A, np.zeros(2)), A.astype(complex))


def test_gauge_transform_grid_mismatch():
    with pytest.raises(ValueError):
        gauge_transform_potential(np.zeros((2, 4)), np.zeros((3, 4)), np.zeros(2))
    with pytest.raises(ValueError):
        gauge_transform_potential(np.zeros((2, 4)), np.zeros((2, 4)), np.zeros(3))


@settings(max_examples=30, deadline=None)
@given(k=four_momenta(), chi_re=st.floats(-2, 2), chi_im=st.floats(-2, 2))
def test_gauge_part_current_is_gauge_invariant(k, chi_re, chi_im):
    res = polarization_tensor(k, 1.0, 100.0)
    A = np.array([[0.1, -0.4, 0.2, 0.7]])
    shifted = gauge_transform_potential(k.upper[None, :], A, np.array([chi_re + 1j * chi_im]))
    delta = vacuum_current(res.tensor_G, shifted) - vacuum_current(res.tensor_G, A)
    assert np.abs(delta).max() <= 1e-10 * max(1.0, abs(chi_re) + abs(chi_im))


def test_full_tensor_current_shift_magnitude():
    k = FourMomentum(0.0, 1.0)
    res = polarization_tensor(k, 1.0, 100.0)
    shifted = gauge_transform_potential(k.upper[None, :], np.zeros((1, 4)), np.ones(1))
    delta = vacuum_current(res.tensor, shifted)[0]
    assert np.linalg.norm(delta) == pytest.approx(res.scalar_NG, rel=1e-12)
