"""Cutoff-regulated vacuum-polarization integrals and Ward contractions.

Both scalar integrals diverge, so the upper limit is an explicit cutoff.  The
square-root zero at z = 2m is removed by z = 2m cosh(u) before handing the
integrand to adaptive quadrature.  Tensors use the metric diag(+1, -1, -1, -1)
and are stored without the coupling 2 q^2 / (3 pi); `PolarizationResult.coupling`
carries it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.special import roots_legendre

METRIC = np.diag([1.0, -1.0, -1.0, -1.0])
CONVENTION = (
    "metric diag(+,-,-,-); contraction pi^{mu nu} k_nu with k_nu = g_{nu rho} k^rho; "
    "non-gauge tensor diagonal, zero for mu = 0, scalar_NG on spatial entries"
)
QUAD_EPSREL = 1e-12


@dataclass(frozen=True)
class FourMomentum:
    k0: float
    k1: float = 0.0
    k2: float = 0.0
    k3: float = 0.0

    @property
    def upper(self) -> np.ndarray:
        return np.array([self.k0, self.k1, self.k2, self.k3], dtype=float)

    @property
    def lower(self) -> np.ndarray:
        return METRIC @ self.upper

    @property
    def square(self) -> float:
        return float(self.upper @ self.lower)


def gauge_integrand(z, m: float, k_squared: float):
    z = np.asarray(z, dtype=float)
    return (z**2 + 2 * m**2) * np.sqrt(np.maximum(z**2 - 4 * m**2, 0.0)) / (z**2 * (z**2 - k_squared))


def nongauge_integrand(z, m: float):
    z = np.asarray(z, dtype=float)
    return (z**2 + 2 * m**2) * np.sqrt(np.maximum(z**2 - 4 * m**2, 0.0)) / z**2


def _cosh_quad(integrand, m: float, cutoff: float) -> tuple[float, float]:
    # z = 2m cosh u, dz = 2m sinh u du; sqrt(z^2 - 4m^2) = 2m sinh u
    u_max = math.acosh(cutoff / (2 * m))

    def f(u):
        z = 2 * m * math.cosh(u)
        sh = 2 * m * math.sinh(u)
        return integrand(z) * sh * sh

    value, err = quad(f, 0.0, u_max, epsabs=0.0, epsrel=QUAD_EPSREL, limit=500)
    return value, err


def _gauge_reduced(m: float, k_squared: float):
    # integrand with the sqrt factor stripped (restored by the substitution)
    return lambda z: (z * z + 2 * m * m) / (z * z * (z * z - k_squared))


def _nongauge_reduced(m: float):
    return lambda z: (z * z + 2 * m * m) / (z * z)


def pi_gauge_scalar_with_error(k_squared: float, m: float, cutoff: float) -> tuple[float, float]:
    if not m > 0:
        raise ValueError(f"mass must be > 0, got {m}")
    if k_squared >= 4 * m * m:
        raise ValueError(f"k^2 = {k_squared} at or above the pair threshold 4 m^2 = {4 * m * m}")
    if cutoff <= 2 * m:
        return 0.0, 0.0
    return _cosh_quad(_gauge_reduced(m, k_squared), m, cutoff)


def pi_gauge_scalar(k_squared: float, m: float, cutoff: float) -> float:
    """int_{2m}^{cutoff} (z^2 + 2m^2) sqrt(z^2 - 4m^2) / (z^2 (z^2 - k^2)) dz."""
    return pi_gauge_scalar_with_error(k_squared, m, cutoff)[0]


def pi_nongauge_scalar_with_error(m: float, cutoff: float) -> tuple[float, float]:
    if not m > 0:
        raise ValueError(f"mass must be > 0, got {m}")
    if cutoff < 2 * m:
        raise ValueError(f"cutoff {cutoff} below the threshold 2m = {2 * m}")
    if cutoff == 2 * m:
        return 0.0, 0.0
    return _cosh_quad(_nongauge_reduced(m), m, cutoff)


def pi_nongauge_scalar(m: float, cutoff: float) -> float:
    """int_{2m}^{cutoff} (z^2 + 2m^2) sqrt(z^2 - 4m^2) / z^2 dz."""
    return pi_nongauge_scalar_with_error(m, cutoff)[0]


@lru_cache(maxsize=4)
def _legendre_nodes(nodes: int):
    return roots_legendre(nodes)


def gauss_legendre(f, a: float, b: float, nodes: int = 10_000) -> float:
    """Fixed-order Gauss-Legendre rule on [a, b] in the original variable."""
    x, w = _legendre_nodes(nodes)
    z = 0.5 * (b - a) * x + 0.5 * (b + a)
    return float(0.5 * (b - a) * np.sum(w * f(z)))


@dataclass
class PolarizationResult:
    k: FourMomentum
    mass: float
    cutoff: float
    charge: float
    scalar_G: float
    scalar_NG: float
    tensor_G: np.ndarray
    tensor_NG: np.ndarray
    quadrature_error: float
    convention: str = CONVENTION

    @property
    def tensor(self) -> np.ndarray:
        return self.tensor_G + self.tensor_NG

    @property
    def coupling(self) -> float:
        return 2 * self.charge**2 / (3 * math.pi)

    @property
    def physical_tensor(self) -> np.ndarray:
        return self.coupling * self.tensor


def polarization_tensor(k: FourMomentum, m: float, cutoff: float, charge: float = 1.0) -> PolarizationResult:
    """Gauge part (k^mu k^nu - g^{mu nu} k^2) G plus the diagonal non-gauge part."""
    g_val, g_err = pi_gauge_scalar_with_error(k.square, m, cutoff)
    ng_val, ng_err = pi_nongauge_scalar_with_error(m, cutoff)
    ku = k.upper
    tensor_g = (np.outer(ku, ku) - METRIC * k.square) * g_val
    # no summation over the repeated mu: explicit component loop
    tensor_ng = np.zeros((4, 4))
    for mu in range(1, 4):
        tensor_ng[mu, mu] = ng_val
    return PolarizationResult(k, m, cutoff, charge, g_val, ng_val, tensor_g, tensor_ng, g_err + ng_err)


def ward_contract(k: FourMomentum, result: PolarizationResult) -> tuple[np.ndarray, np.ndarray]:
    """(pi_G^{mu nu} k_nu, pi_NG^{mu nu} k_nu)."""
    kl = k.lower
    return result.tensor_G @ kl, result.tensor_NG @ kl


def vacuum_current(tensor: np.ndarray, potential_lower: np.ndarray) -> np.ndarray:
    """J^mu(k) = pi^{mu nu}(k) A_nu(k); works on a leading k-grid axis."""
    return np.einsum("...mn,...n->...m", tensor, potential_lower)


def gauge_transform_potential(k_grid: np.ndarray, potential: np.ndarray, chi: np.ndarray) -> np.ndarray:
    """A_nu(k) -> A_nu(k) + i k_nu chi(k).

    `k_grid` holds contravariant components (n_k, 4), `potential` covariant
    components (n_k, 4), `chi` shape (n_k,).
    """
    k_grid = np.atleast_2d(np.asarray(k_grid, dtype=float))
    potential = np.atleast_2d(np.asarray(potential, dtype=complex))
    chi = np.atleast_1d(np.asarray(chi, dtype=complex))
    if k_grid.shape != potential.shape or k_grid.shape[-1] != 4 or chi.shape != k_grid.shape[:1]:
        raise ValueError(
            f"grid mismatch: k {k_grid.shape}, potential {potential.shape}, chi {chi.shape}"
        )
    k_lower = k_grid @ METRIC
    return potential + 1j * k_lower * chi[:, None]


def growth_exponent(cutoffs, values) -> float:
    """Least-squares slope of log(value) against log(cutoff)."""
    return float(np.polyfit(np.log(cutoffs), np.log(values), 1)[0])


def log_slope(cutoffs, values) -> float:
    """Least-squares slope of value against log(cutoff)."""
    return float(np.polyfit(np.log(cutoffs), values, 1)[0])


TAIL_COEFFICIENT = 1.0  # z * gauge_integrand(z) -> 1 as z -> infinity, for any m and k^2
