"""Operator-identity suite: canonical relations checked on the sparse Fock operators.

Every function returns a maximum absolute deviation.  The dense Kronecker
construction in ``oracle`` supplies the independent reference for the ladder
matrices and the bilinears.
"""

from __future__ import annotations

import numpy as np

from . import oracle
from .continuity import anticommutator_reduction_check
from .fock import FockSpace, anticommutator, commutator, max_abs

EXHAUSTIVE_REDUCTION_MODES = 6


def _diff_identity(op, coeff: complex, space: FockSpace) -> float:
    if coeff == 0:
        return max_abs(op)
    return max_abs(op - coeff * space.identity)


def dense_oracle_deviation(space: FockSpace) -> dict[str, float]:
    """Sparse ladders, charges, currents and H0 against the Kronecker construction."""
    ann = oracle.dense_annihilators(space.num_modes)
    basis = space.basis
    sites = range(space.config.sites)
    ladders = max(float(np.abs(space._destroy[i].toarray() - ann[i]).max()) for i in range(space.num_modes))
    charges = max(
        float(np.abs(space.charge_operator(x).toarray() - oracle.dense_charge(basis, ann, x)).max()) for x in sites
    )
    currents = max(
        float(np.abs(space.current_operator(x).toarray() - oracle.dense_current(basis, ann, x)).max()) for x in sites
    )
    h0 = float(np.abs(space.h0_operator(subtracted=False).toarray() - oracle.dense_h0(basis, ann)).max())
    energies = float(np.abs(space.energies - oracle.enumerate_energies(basis)).max())
    return {"ladders": ladders, "charges": charges, "currents": currents, "h0": h0, "energies": energies}


def mode_anticommutators(space: FockSpace) -> float:
    """{a_i, a_j^dag} = delta_ij and {a_i, a_j} = 0."""
    worst = 0.0
    for i in range(space.num_modes):
        for j in range(space.num_modes):
            ai, aj = space._destroy[i], space._destroy[j]
            worst = max(worst, _diff_identity(anticommutator(ai, space._create[j]), float(i == j), space))
            worst = max(worst, max_abs(anticommutator(ai, aj)))
    return worst


def particle_anticommutators(space: FockSpace) -> float:
    """{b_j, b_k^dag} = {d_j, d_k^dag} = delta_jk; mixed electron/positron brackets vanish."""
    labels = space.basis.positive_labels
    worst = 0.0
    for j in labels:
        for k in labels:
            delta = float(j == k)
            worst = max(worst, _diff_identity(anticommutator(space.b(j), space.b(k, True)), delta, space))
            worst = max(worst, _diff_identity(anticommutator(space.d(j), space.d(k, True)), delta, space))
            worst = max(worst, max_abs(anticommutator(space.b(j), space.d(k))))
            worst = max(worst, max_abs(anticommutator(space.b(j), space.d(k, True))))
    return worst


def h0_ladder_commutators(space: FockSpace) -> float:
    """[H0, b_j^dag] = E_j b_j^dag, [H0, d_j^dag] = E_j d_j^dag and the adjoint relations."""
    h0 = space.h0_operator()
    worst = 0.0
    for j in space.basis.positive_labels:
        e = space.basis.mode(j).energy
        e_pos = space.basis.mode(-j).energy
        worst = max(worst, max_abs(commutator(h0, space.b(j, True)) - e * space.b(j, True)))
        worst = max(worst, max_abs(commutator(h0, space.b(j)) + e * space.b(j)))
        worst = max(worst, max_abs(commutator(h0, space.d(j, True)) - e_pos * space.d(j, True)))
        worst = max(worst, max_abs(commutator(h0, space.d(j)) + e_pos * space.d(j)))
    return worst


def field_anticommutators(space: FockSpace) -> float:
    """{psi_a(x), psi_b(y)^dag} = delta_ab delta_xy / a and {psi_a(x), psi_b(y)} = 0."""
    cfg = space.config
    fields = [(x, c, op) for x in range(cfg.sites) for c, op in enumerate(space.field_operator(x))]
    worst = 0.0
    for x, a, pa in fields:
        for y, b, pb in fields:
            delta = float(x == y and a == b) / cfg.spacing
            pb_dag = pb.conj().T.tocsr()
            worst = max(worst, _diff_identity(anticommutator(pa, pb_dag), delta, space))
            worst = max(worst, max_abs(anticommutator(pa, pb)))
    return worst


def reduction_deviation(space: FockSpace, rng: np.random.Generator | None = None, samples: int = 400) -> float:
    """Double-commutator reduction, exhaustive for small mode sets, sampled otherwise."""
    if space.num_modes <= EXHAUSTIVE_REDUCTION_MODES:
        return anticommutator_reduction_check(space)
    return anticommutator_reduction_check(space, samples=samples, rng=rng)


def identity_suite(space: FockSpace, rng: np.random.Generator | None = None) -> dict[str, float]:
    out = {f"oracle_{k}": v for k, v in dense_oracle_deviation(space).items()}
    out["mode_anticommutators"] = mode_anticommutators(space)
    out["particle_anticommutators"] = particle_anticommutators(space)
    out["h0_ladder_commutators"] = h0_ladder_commutators(space)
    out["field_anticommutators"] = field_anticommutators(space)
    out["double_commutator_reduction"] = reduction_deviation(space, rng)
    return out


def spectrum_summary(space: FockSpace, tol: float = 1e-12) -> dict:
    """Minimum of the subtracted H0, its multiplicity and the ground-state index."""
    xi = np.sort(space.energies)
    low = float(xi[0])
    return {
        "min_eigenvalue": low,
        "ground_multiplicity": int(np.sum(np.abs(xi - low) <= tol)),
        "ground_is_vacuum": bool(space.energies[space.vacuum_index] == low),
    }

