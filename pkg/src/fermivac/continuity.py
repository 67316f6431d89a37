"""Continuity defect, Schwinger terms and the double-commutator sum rule.

Two currents are compared.  The local current J(x) is the bilinear built from
the field operator; on a truncated mode set its divergence no longer matches
i[H0, rho(x)], and the mismatch is the defect D(x).  The conserved current
J_c(q) is *defined* from i[H0, rho(q)] and so satisfies continuity exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .fock import FockSpace, commutator, max_abs
from .lattice import spectral_derivative_matrix


def divergence(values: np.ndarray, config) -> np.ndarray:
    """Spectral d/dx of a field sampled on the sites (last axis)."""
    deriv = spectral_derivative_matrix(config)
    return np.asarray(values) @ deriv.T


def current_divergence(space: FockSpace, site: int) -> sp.csr_matrix:
    deriv = spectral_derivative_matrix(space.config)
    out = sp.csr_matrix((space.dim, space.dim), dtype=complex)
    for y, coeff in enumerate(deriv[site]):
        if coeff != 0:
            out = out + coeff * space.current_operator(y)
    return out.tocsr()


def continuity_defect(space: FockSpace, site: int) -> sp.csr_matrix:
    """D(x) = i[H0, rho(x)] + div J(x)."""
    key = ("defect", site)
    if key not in space._cache:
        h0 = space.h0_operator()
        op = 1j * commutator(h0, space.charge_operator(site)) + current_divergence(space, site)
        space._cache[key] = op.tocsr()
    return space._cache[key]


def operator_norm(op) -> float:
    """Spectral norm of a Hermitian operator."""
    if sp.issparse(op):
        if op.nnz == 0:
            return 0.0
        if op.shape[0] <= 2048:
            op = op.toarray()
        else:
            from scipy.sparse.linalg import eigsh

            vals = eigsh(op, k=2, which="LM", return_eigenvectors=False)
            return float(np.abs(vals).max())
    return float(np.abs(np.linalg.eigvalsh(op)).max())


def continuity_defect_norms(space: FockSpace) -> np.ndarray:
    return np.array([operator_norm(continuity_defect(space, x)) for x in range(space.config.sites)])


def schwinger_term(space: FockSpace, state: np.ndarray, x: int, y: int) -> complex:
    """<state|[J(x), rho(y)]|state>."""
    j_s = space.current_operator(x) @ state
    r_s = space.charge_operator(y) @ state
    # both operators Hermitian: <J rho> - <rho J> = 2i Im <J s | rho s>
    return 2j * np.vdot(j_s, r_s).imag


def schwinger_matrix(space: FockSpace, state: np.ndarray) -> np.ndarray:
    n = space.config.sites
    return np.array([[schwinger_term(space, state, x, y) for y in range(n)] for x in range(n)])


def _require_eigenstate(space: FockSpace, state: np.ndarray) -> float:
    ok, energy = space.is_eigenstate(state)
    if not ok:
        raise ValueError("state is not an H0 eigenstate")
    return energy


def sum_rule(space: FockSpace, state: np.ndarray, x: int) -> tuple[float, float]:
    """(lhs, rhs) with lhs = <[[H0, rho], rho]> and rhs = -2 sum_n (xi_n - xi_s)|<n|rho|s>|^2."""
    xi_s = _require_eigenstate(space, state)
    h0 = space.h0_operator()
    rho = space.charge_operator(x)
    rs = rho @ state
    hrs = h0 @ rs
    lhs = np.vdot(state, h0 @ (rho @ rs)) - 2 * np.vdot(rs, hrs) + np.vdot(state, rho @ (rho @ (h0 @ state)))
    rhs = -2 * np.sum((space.energies - xi_s) * np.abs(rs) ** 2)
    return float(lhs.real), float(rhs)


@dataclass
class SchwingerReport:
    direct_term: np.ndarray
    sumrule_lhs: np.ndarray
    sumrule_rhs: np.ndarray
    defect_norm: float
    tolerance: float = 1e-10

    @property
    def sumrule_defect(self) -> float:
        return float(np.abs(self.sumrule_lhs - self.sumrule_rhs).max())

    @property
    def consistent(self) -> bool:
        return self.sumrule_defect <= self.tolerance


def schwinger_report(space: FockSpace, state: np.ndarray) -> SchwingerReport:
    sites = range(space.config.sites)
    pairs = [sum_rule(space, state, x) for x in sites]
    return SchwingerReport(
        direct_term=schwinger_matrix(space, state),
        sumrule_lhs=np.array([p[0] for p in pairs]),
        sumrule_rhs=np.array([p[1] for p in pairs]),
        defect_norm=float(continuity_defect_norms(space).max()),
    )


def vacuum_positivity(space: FockSpace, x: int) -> float:
    """2 sum_n xi_n |<n|rho(x)|0>|^2."""
    rs = space.charge_operator(x) @ space.vacuum_state()
    return float(2 * np.sum(space.energies * np.abs(rs) ** 2))


def fourier_charge(space: FockSpace, k: int) -> sp.csr_matrix:
    """rho(q) = a sum_x exp(-i q x) rho(x) at lattice momentum q = 2 pi k / L."""
    cfg = space.config
    q = 2 * np.pi * k / cfg.length
    out = sp.csr_matrix((space.dim, space.dim), dtype=complex)
    for x, pos in enumerate(cfg.positions):
        out = out + cfg.spacing * np.exp(-1j * q * pos) * space.charge_operator(x)
    return out.tocsr()


def _nonzero_momentum(space: FockSpace, k: int) -> float:
    half = (space.config.sites - 1) // 2
    if k == 0 or abs(k) > half:
        raise ValueError(f"momentum index must be nonzero and within +-{half}, got {k}")
    return 2 * np.pi * k / space.config.length


def conserved_current(space: FockSpace, k: int) -> sp.csr_matrix:
    """J_c(q) = -[H0, rho(q)] / q, so that i[H0, rho(q)] = -i q J_c(q) exactly."""
    q = _nonzero_momentum(space, k)
    return (-commutator(space.h0_operator(), fourier_charge(space, k)) / q).tocsr()


def conserved_current_schwinger(space: FockSpace, state: np.ndarray, k: int) -> complex:
    """<state|[J_c(q), rho(-q)]|state>."""
    jc = conserved_current(space, k)
    rho_minus = fourier_charge(space, -k)
    return complex(np.vdot(state, jc @ (rho_minus @ state)) - np.vdot(state, rho_minus @ (jc @ state)))


def conserved_schwinger_spectral(space: FockSpace, state: np.ndarray, k: int) -> float:
    """Same quantity via the spectral sum (1/q) sum_n (xi_n - xi_s)(|<n|rho(q)|s>|^2 + |<n|rho(-q)|s>|^2)."""
    q = _nonzero_momentum(space, k)
    xi_s = _require_eigenstate(space, state)
    v = fourier_charge(space, k) @ state
    u = fourier_charge(space, -k) @ state
    return float(np.sum((space.energies - xi_s) * (np.abs(u) ** 2 + np.abs(v) ** 2)) / q)


def _reduction_deviation(space: FockSpace, r: int, s: int, n: int, m: int) -> float:
    cr, cn = space._create[r], space._create[n]
    as_, am = space._destroy[s], space._destroy[m]
    lhs = commutator(commutator(cr, as_), commutator(cn, am))
    rhs = sp.csr_matrix((space.dim, space.dim), dtype=complex)
    if s == n:
        rhs = rhs + 4 * (cr @ am)
    if r == m:
        rhs = rhs - 4 * (cn @ as_)
    return max_abs(lhs - rhs)


def anticommutator_reduction_check(
    space: FockSpace,
    samples: int | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """Max deviation of [[a_r^dag, a_s], [a_n^dag, a_m]] = 4(a_r^dag a_m d_sn - a_n^dag a_s d_rm).

    Exhausts all quadruples when `samples` is None, otherwise draws `samples`
    random quadruples (bit positions) from `rng`.
    """
    nm = space.num_modes
    if samples is None:
        quads = itertools.product(range(nm), repeat=4)
    else:
        rng = np.random.default_rng(0) if rng is None else rng
        quads = (tuple(int(i) for i in row) for row in rng.integers(0, nm, size=(samples, 4)))
    return max(_reduction_deviation(space, *quad) for quad in quads)
