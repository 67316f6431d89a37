"""Dense brute-force constructions used to cross-check the sparse path.

Ladder matrices come from explicit Kronecker products of 2x2 blocks (Jordan-Wigner
strings), not from bit arithmetic.  Keep this module free of imports from
``fock`` so the two routes stay independent.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

from .lattice import ALPHA, ModeBasis

MAX_DENSE_DIM = 4096

_LOWER = np.array([[0, 1], [0, 0]], dtype=complex)  # |1> -> |0>, basis order (|0>, |1>)
_Z = np.diag([1.0, -1.0]).astype(complex)
_I = np.eye(2, dtype=complex)


def dense_annihilators(num_modes: int) -> list[np.ndarray]:
    """a_i for every bit position i; bit 0 is the least significant Kronecker factor."""
    if 1 << num_modes > MAX_DENSE_DIM:
        raise ValueError(f"dense oracle limited to dimension {MAX_DENSE_DIM}")
    ops = []
    for i in range(num_modes):
        # kron order runs from the most significant bit down to bit 0
        factors = [_I] * (num_modes - 1 - i) + [_LOWER] + [_Z] * i
        ops.append(reduce(np.kron, factors))
    return ops


def dense_field(basis: ModeBasis, annihilators: list[np.ndarray], site: int) -> list[np.ndarray]:
    phi = basis.wavefunctions[:, site, :]
    return [sum(phi[n, a] * annihilators[n] for n in range(len(basis))) for a in range(2)]


def dense_bilinear(basis: ModeBasis, annihilators, site: int, spin=None) -> np.ndarray:
    """(q/2)[psi^dag, S psi] built directly from field operators."""
    s = np.eye(2) if spin is None else spin
    psi = dense_field(basis, annihilators, site)
    q = basis.config.charge
    out = 0
    for a in range(2):
        for b in range(2):
            if s[a, b] != 0:
                pa_dag = psi[a].conj().T
                out = out + s[a, b] * (pa_dag @ psi[b] - psi[b] @ pa_dag)
    return 0.5 * q * out


def dense_charge(basis, annihilators, site):
    return dense_bilinear(basis, annihilators, site)


def dense_current(basis, annihilators, site):
    return dense_bilinear(basis, annihilators, site, ALPHA)


def dense_h0(basis: ModeBasis, annihilators) -> np.ndarray:
    """Unsubtracted H0 = sum_n lambda_n E_n a_n^dag a_n."""
    return sum(
        m.eigenvalue * (annihilators[i].conj().T @ annihilators[i]) for i, m in enumerate(basis)
    )


def enumerate_energies(basis: ModeBasis) -> np.ndarray:
    """Energy of every bit string by direct enumeration of electrons and holes."""
    dim = 1 << len(basis)
    out = np.empty(dim)
    for s in range(dim):
        e = 0.0
        for i, m in enumerate(basis):
            occ = (s >> i) & 1
            if (m.label > 0 and occ) or (m.label < 0 and not occ):
                e += m.energy
        out[s] = e
    return out
