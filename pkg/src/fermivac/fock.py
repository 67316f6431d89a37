"""Exact fermionic Fock space over a ModeBasis.

Basis states are integers; bit i is the occupation of mode ``basis.modes[i]``
in the bare (a_n) language.  Sign convention: a_n picks up (-1)**(number of
occupied modes at lower bit positions).  Electron/positron operators follow
the relabeling b_j = a_j, d_j = a_{-j}^dag for j > 0, so the vacuum has every
negative-energy bit set and every positive-energy bit clear.

Operators are scipy.sparse CSR matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np
import scipy.sparse as sp

from .lattice import ALPHA, LatticeConfig, ModeBasis, build_mode_basis, single_particle_hamiltonian

MAX_MODES = 14


@dataclass(frozen=True)
class EigenstateSpec:
    """Electron labels j_1..j_s and positron labels v_1..v_r (positive indices).

    A positron label v refers to the vacated negative-energy mode with index -v.
    """

    electrons: tuple[int, ...] = ()
    positrons: tuple[int, ...] = ()

    def __post_init__(self):
        for name, labels in (("electron", self.electrons), ("positron", self.positrons)):
            if len(set(labels)) != len(labels):
                raise ValueError(f"repeated {name} index in {labels} (Pauli exclusion)")
            if any(j <= 0 for j in labels):
                raise ValueError(f"{name} indices must be positive, got {labels}")


def _parity_below(states: np.ndarray, pos: int) -> np.ndarray:
    mask = (1 << pos) - 1
    return np.bitwise_count(states & mask) & 1


def _annihilator(num_modes: int, pos: int) -> sp.csr_matrix:
    dim = 1 << num_modes
    states = np.arange(dim, dtype=np.int64)
    src = states[(states >> pos) & 1 == 1]
    dst = src ^ (1 << pos)
    data = 1.0 - 2.0 * _parity_below(src, pos)
    return sp.csr_matrix((data.astype(complex), (dst, src)), shape=(dim, dim))


class FockSpace:
    """Second-quantized operators over every mode of a lattice.

    All operator getters are cached; the instance is safe to share read-only.
    """

    def __init__(self, config: LatticeConfig | ModeBasis):
        basis = config if isinstance(config, ModeBasis) else build_mode_basis(config)
        if len(basis) > MAX_MODES:
            raise ValueError(f"{len(basis)} modes exceeds the exact-diagonalization limit {MAX_MODES}")
        self.basis = basis
        self.config = basis.config
        self.num_modes = len(basis)
        self.dim = 1 << self.num_modes
        self._cache: dict = {}

    def __repr__(self):
        return f"FockSpace(sites={self.config.sites}, modes={self.num_modes}, dim={self.dim})"

    # -- ladder operators ------------------------------------------------------

    @cached_property
    def _destroy(self) -> list[sp.csr_matrix]:
        return [_annihilator(self.num_modes, i) for i in range(self.num_modes)]

    @cached_property
    def _create(self) -> list[sp.csr_matrix]:
        return [a.conj().T.tocsr() for a in self._destroy]

    def a(self, label: int, dagger: bool = False) -> sp.csr_matrix:
        """Bare operator a_n (or a_n^dag) for signed mode index n."""
        pos = self.basis.position(label)
        return self._create[pos] if dagger else self._destroy[pos]

    def ladder(self, label: int, kind: Literal["create", "destroy"]) -> sp.csr_matrix:
        if kind not in ("create", "destroy"):
            raise ValueError(f"kind must be 'create' or 'destroy', got {kind!r}")
        return self.a(label, dagger=kind == "create")

    def b(self, j: int, dagger: bool = False) -> sp.csr_matrix:
        if j <= 0:
            raise KeyError(f"electron index must be positive, got {j}")
        return self.a(j, dagger)

    def d(self, j: int, dagger: bool = False) -> sp.csr_matrix:
        if j <= 0:
            raise KeyError(f"positron index must be positive, got {j}")
        return self.a(-j, not dagger)

    def one_body(self, h: np.ndarray) -> sp.csr_matrix:
        """sum_{nm} h[n, m] a_n^dag a_m, with h indexed by bit position."""
        h = np.asarray(h)
        out = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for n, m in zip(*np.nonzero(np.abs(h) > 0)):
            out = out + h[n, m] * (self._create[n] @ self._destroy[m])
        return out.tocsr()

    @cached_property
    def identity(self) -> sp.csr_matrix:
        return sp.identity(self.dim, dtype=complex, format="csr")

    # -- field, charge, current ------------------------------------------------

    def _check_site(self, site: int):
        if not 0 <= site < self.config.sites:
            raise IndexError(f"site {site} outside [0, {self.config.sites})")

    def field_operator(self, site: int) -> tuple[sp.csr_matrix, sp.csr_matrix]:
        """(psi_1(x), psi_2(x)) = sum_n a_n phi_n(x)."""
        self._check_site(site)
        key = ("psi", site)
        if key not in self._cache:
            phi = self.basis.wavefunctions[:, site, :]
            comps = []
            for a in range(2):
                op = sp.csr_matrix((self.dim, self.dim), dtype=complex)
                for n in range(self.num_modes):
                    if phi[n, a] != 0:
                        op = op + phi[n, a] * self._destroy[n]
                comps.append(op.tocsr())
            self._cache[key] = tuple(comps)
        return self._cache[key]

    def density_matrix_elements(self, site: int, spin_matrix: np.ndarray | None = None) -> np.ndarray:
        """M[n, m] = phi_n(x)^dag S phi_m(x) for S = identity or a 2x2 matrix."""
        phi = self.basis.wavefunctions[:, site, :]
        s = np.eye(2) if spin_matrix is None else spin_matrix
        return phi.conj() @ s @ phi.T

    def _bilinear(self, site: int, spin_matrix: np.ndarray | None) -> sp.csr_matrix:
        # (q/2)[psi^dag, S psi] = q (sum M_nm a_n^dag a_m - tr(M)/2)
        mat = self.density_matrix_elements(site, spin_matrix)
        q = self.config.charge
        op = q * self.one_body(mat) - 0.5 * q * np.trace(mat) * self.identity
        return op.tocsr()

    def charge_operator(self, site: int) -> sp.csr_matrix:
        self._check_site(site)
        key = ("rho", site)
        if key not in self._cache:
            self._cache[key] = self._bilinear(site, None)
        return self._cache[key]

    def current_operator(self, site: int) -> sp.csr_matrix:
        self._check_site(site)
        key = ("J", site)
        if key not in self._cache:
            self._cache[key] = self._bilinear(site, ALPHA)
        return self._cache[key]

    @property
    def charges(self) -> list[sp.csr_matrix]:
        return [self.charge_operator(x) for x in range(self.config.sites)]

    @property
    def currents(self) -> list[sp.csr_matrix]:
        return [self.current_operator(x) for x in range(self.config.sites)]

    def total_charge(self) -> sp.csr_matrix:
        a = self.config.spacing
        return (a * sum(self.charges)).tocsr()

    # -- free Hamiltonian ------------------------------------------------------

    @cached_property
    def vacuum_energy(self) -> float:
        """E_vac = sum of E_n over the positive-energy modes."""
        return float(sum(m.energy for m in self.basis if m.label > 0))

    @cached_property
    def energies(self) -> np.ndarray:
        """Subtracted H0 eigenvalue of every basis state (H0 is diagonal)."""
        states = np.arange(self.dim, dtype=np.int64)
        xi = np.zeros(self.dim)
        for i, mode in enumerate(self.basis):
            bit = (states >> i) & 1
            # electron present if a positive bit is set; positron present if a negative bit is clear
            present = bit if mode.label > 0 else 1 - bit
            xi += mode.energy * present
        return xi

    def h0_operator(self, subtracted: bool = True) -> sp.csr_matrix:
        shift = 0.0 if subtracted else self.vacuum_energy
        return sp.diags(self.energies - shift, format="csr").astype(complex)

    def h0_from_fields(self) -> sp.csr_matrix:
        """Unsubtracted H0 assembled as (1/2) a sum_x [psi^dag, H0 psi] in position space."""
        cfg = self.config
        h1 = single_particle_hamiltonian(cfg)
        psi = [c for x in range(cfg.sites) for c in self.field_operator(x)]
        out = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for i, pi in enumerate(psi):
            pi_dag = pi.conj().T.tocsr()
            for j, pj in enumerate(psi):
                if h1[i, j] != 0:
                    out = out + h1[i, j] * (pi_dag @ pj - pj @ pi_dag)
        return (0.5 * cfg.spacing * out).tocsr()

    # -- states ----------------------------------------------------------------

    @cached_property
    def vacuum_index(self) -> int:
        return sum(1 << i for i, m in enumerate(self.basis) if m.label < 0)

    @cached_property
    def bare_vacuum_index(self) -> int:
        return 0

    def basis_state(self, index: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[index] = 1.0
        return v

    def vacuum_state(self) -> np.ndarray:
        return self.basis_state(self.vacuum_index)

    def bare_vacuum(self) -> np.ndarray:
        return self.basis_state(self.bare_vacuum_index)

    def band_edge_check(self, cutoff: float, tol: float = 1e-9):
        energies = self.basis.energies
        if np.any(np.abs(energies - cutoff) <= tol):
            raise ValueError(f"cutoff {cutoff} coincides with a mode energy (ambiguous band edge)")

    def modified_vacuum_index(self, cutoff: float) -> int:
        if not cutoff > self.config.mass:
            raise ValueError(f"cutoff must exceed the mass {self.config.mass}, got {cutoff}")
        self.band_edge_check(cutoff)
        return sum(
            1 << i for i, m in enumerate(self.basis) if m.label < 0 and m.energy <= cutoff
        )

    def modified_vacuum(self, cutoff: float) -> np.ndarray:
        """Negative-energy modes filled only down to -cutoff; positive modes empty."""
        return self.basis_state(self.modified_vacuum_index(cutoff))

    def number_eigenstate(self, spec: EigenstateSpec) -> tuple[np.ndarray, float]:
        """b^dag_{j1}..b^dag_{js} d^dag_{v1}..d^dag_{vr} |0> and its energy."""
        state = self.vacuum_state()
        ops = [self.b(j, True) for j in spec.electrons] + [self.d(v, True) for v in spec.positrons]
        for op in reversed(ops):
            state = op @ state
        energy = sum(self.basis.mode(j).energy for j in spec.electrons) + sum(
            self.basis.mode(-v).energy for v in spec.positrons
        )
        return state, float(energy)

    def occupation_counts(self, index: int) -> tuple[int, int]:
        """(electrons, positrons) in basis state `index`."""
        ne = npos = 0
        for i, m in enumerate(self.basis):
            bit = (index >> i) & 1
            if m.label > 0:
                ne += bit
            else:
                npos += 1 - bit
        return ne, npos

    def is_eigenstate(self, state: np.ndarray, tol: float = 1e-10) -> tuple[bool, float]:
        xi = self.energies
        energy = float(np.real(np.vdot(state, xi * state)) / np.vdot(state, state).real)
        resid = float(np.linalg.norm(xi * state - energy * state))
        return resid <= tol, energy


def expectation(op: sp.spmatrix | np.ndarray, state: np.ndarray) -> complex:
    return complex(np.vdot(state, op @ state))


def commutator(a, b):
    return a @ b - b @ a


def anticommutator(a, b):
    return a @ b + b @ a


def max_abs(op) -> float:
    if sp.issparse(op):
        return float(np.abs(op.data).max()) if op.nnz else 0.0
    return float(np.abs(op).max()) if np.size(op) else 0.0


def random_occupations(space: FockSpace, count: int, rng: np.random.Generator) -> list[int]:
    """Distinct basis-state indices drawn without replacement."""
    return [int(i) for i in rng.choice(space.dim, size=count, replace=False)]

