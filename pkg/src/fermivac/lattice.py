"""Single-particle Dirac plane waves on a periodic 1-D lattice.

Two-component reduction: alpha = sigma_x, beta = sigma_z.  The derivative is
spectral (diagonal in momentum), so plane waves are exact eigenfunctions of the
lattice Hamiltonian and orthonormality/completeness hold to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
ALPHA = SIGMA_X
BETA = SIGMA_Z


@dataclass(frozen=True)
class LatticeConfig:
    sites: int = 3
    length: float = 2 * math.pi
    mass: float = 1.0
    charge: float = 1.0

    def __post_init__(self):
        if int(self.sites) != self.sites or self.sites < 1:
            raise ValueError(f"sites must be a positive integer, got {self.sites}")
        if self.sites % 2 == 0:
            raise ValueError(f"sites must be odd, got {self.sites}")
        if not self.length > 0:
            raise ValueError(f"length must be > 0, got {self.length}")
        if not self.mass > 0:
            raise ValueError(f"mass must be > 0, got {self.mass}")

    @property
    def spacing(self) -> float:
        return self.length / self.sites

    @property
    def positions(self) -> np.ndarray:
        return np.arange(self.sites) * self.spacing

    @property
    def momentum_indices(self) -> np.ndarray:
        half = (self.sites - 1) // 2
        return np.arange(-half, half + 1)

    @property
    def momenta(self) -> np.ndarray:
        return 2 * math.pi * self.momentum_indices / self.length


def dirac_matrix(p: float, m: float) -> np.ndarray:
    """2x2 momentum-space Dirac Hamiltonian alpha*p + beta*m."""
    return ALPHA * p + BETA * m


def dirac_spinor(p: float, m: float, branch: int) -> np.ndarray:
    """Unit eigenvector of alpha*p + beta*m with eigenvalue branch*E.

    Phase fixed so that p = 0 gives (1, 0) for branch +1 and (0, 1) for -1.
    """
    energy = math.hypot(p, m)
    norm = math.sqrt((energy + m) ** 2 + p**2)
    if branch == 1:
        return np.array([energy + m, p], dtype=complex) / norm
    if branch == -1:
        return np.array([-p, energy + m], dtype=complex) / norm
    raise ValueError(f"branch must be +1 or -1, got {branch}")


@dataclass(frozen=True)
class Mode:
    """One plane-wave solution; `label` is the signed index n (n > 0 iff branch +1)."""

    momentum_index: int
    momentum: float
    branch: int
    energy: float
    spinor: np.ndarray = field(repr=False, compare=False)
    label: int = 0

    @property
    def eigenvalue(self) -> float:
        return self.branch * self.energy


@dataclass(frozen=True)
class ModeBasis:
    """Ordered single-particle modes.

    Order: ascending energy, ties by ascending momentum index, then branch +1
    before -1.  The position of a mode in `modes` is its bit position in the
    Fock space.
    """

    config: LatticeConfig
    modes: tuple[Mode, ...]

    def __len__(self) -> int:
        return len(self.modes)

    def __iter__(self):
        return iter(self.modes)

    @cached_property
    def _position(self) -> dict[int, int]:
        return {mode.label: i for i, mode in enumerate(self.modes)}

    def position(self, label: int) -> int:
        """Bit position of the mode with signed index `label`."""
        try:
            return self._position[label]
        except KeyError:
            raise KeyError(f"no mode with index {label}") from None

    def mode(self, label: int) -> Mode:
        return self.modes[self.position(label)]

    def label_of(self, momentum_index: int, branch: int) -> int:
        for mode in self.modes:
            if mode.momentum_index == momentum_index and mode.branch == branch:
                return mode.label
        raise KeyError(f"no mode with k={momentum_index}, branch={branch}")

    @property
    def positive_labels(self) -> list[int]:
        return sorted(m.label for m in self.modes if m.label > 0)

    @property
    def energies(self) -> np.ndarray:
        return np.array([m.energy for m in self.modes])

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([m.eigenvalue for m in self.modes])

    @cached_property
    def wavefunctions(self) -> np.ndarray:
        """Array phi[n, x, a] of mode functions at every site."""
        return np.stack([mode_wavefunction(self.config, m) for m in self.modes])

    def without(self, labels: Iterable[int]) -> "ModeBasis":
        drop = set(labels)
        return ModeBasis(self.config, tuple(m for m in self.modes if m.label not in drop))


def build_mode_basis(config: LatticeConfig) -> ModeBasis:
    """All 2*N_s plane-wave modes, with signed labels +-1, +-2, ... by energy."""
    m = config.mass
    raw = []
    for k, p in zip(config.momentum_indices, config.momenta):
        energy = math.hypot(p, m)
        for branch in (1, -1):
            raw.append((energy, int(k), branch, float(p)))
    raw.sort(key=lambda r: (round(r[0], 12), r[1], -r[2]))

    modes = []
    rank = {1: 0, -1: 0}
    for energy, k, branch, p in raw:
        rank[branch] += 1
        modes.append(
            Mode(
                momentum_index=k,
                momentum=p,
                branch=branch,
                energy=energy,
                spinor=dirac_spinor(p, m, branch),
                label=branch * rank[branch],
            )
        )
    return ModeBasis(config, tuple(modes))


def mode_wavefunction(config: LatticeConfig, mode: Mode) -> np.ndarray:
    """Mode function at every site, shape (N_s, 2)."""
    phase = np.exp(1j * mode.momentum * config.positions) / math.sqrt(config.length)
    return phase[:, None] * mode.spinor[None, :]


def mode_function(config: LatticeConfig, mode: Mode, site: int) -> np.ndarray:
    if not 0 <= site < config.sites:
        raise IndexError(f"site {site} outside [0, {config.sites})")
    x = site * config.spacing
    return mode.spinor * np.exp(1j * mode.momentum * x) / math.sqrt(config.length)


def orthonormality_deviation(basis: ModeBasis) -> float:
    """max |a * sum_x phi_n^dag phi_m - delta_nm|."""
    phi = basis.wavefunctions
    gram = basis.config.spacing * np.einsum("nxa,mxa->nm", phi.conj(), phi)
    return float(np.abs(gram - np.eye(len(basis))).max())


def check_completeness(basis: ModeBasis) -> float:
    """max |sum_n phi_n(x) phi_n(y)^dag - delta_xy I / a| over all site pairs."""
    cfg = basis.config
    phi = basis.wavefunctions
    total = np.einsum("nxa,nyb->xayb", phi, phi.conj())
    target = np.einsum("xy,ab->xayb", np.eye(cfg.sites), np.eye(2)) / cfg.spacing
    return float(np.abs(total - target).max())


def eigen_residual(mode: Mode, mass: float) -> float:
    u = mode.spinor
    return float(np.linalg.norm(dirac_matrix(mode.momentum, mass) @ u - mode.eigenvalue * u))


def spectral_derivative_matrix(config: LatticeConfig) -> np.ndarray:
    """Real antisymmetric matrix D with (D f)_j = d f / dx at site j (spectral)."""
    x = config.positions
    fourier = np.exp(1j * np.outer(x, config.momenta)) / math.sqrt(config.sites)
    deriv = fourier @ np.diag(1j * config.momenta) @ fourier.conj().T
    return deriv.real


def single_particle_hamiltonian(config: LatticeConfig) -> np.ndarray:
    """Dirac Hamiltonian -i alpha d/dx + beta m on (site, spinor), index 2*site + a."""
    deriv = spectral_derivative_matrix(config)
    return np.kron(-1j * deriv, ALPHA) + np.kron(np.eye(config.sites), BETA * config.mass)


def basis_vectors(basis: ModeBasis) -> np.ndarray:
    """Columns are the modes as unit vectors in the (site, spinor) space."""
    phi = basis.wavefunctions
    return math.sqrt(basis.config.spacing) * phi.reshape(len(basis), -1).T


def spectrum_symmetric(modes: Sequence[Mode]) -> bool:
    """Every (k, +1, E) has a partner (k, -1, E) with equal |energy| and label -n."""
    by_label = {m.label: m for m in modes}
    for m in modes:
        partner = by_label.get(-m.label)
        if partner is None or partner.momentum_index != m.momentum_index:
            return False
        if abs(partner.energy - m.energy) > 1e-14:
            return False
    return True
