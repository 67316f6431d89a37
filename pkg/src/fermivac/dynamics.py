"""Real-time evolution under external potentials and the gauge-pumping runs.

H(t) = H0 - a sum_x J(x) A(x, t) + a sum_x rho(x) A0(x, t).  Steps use the
exponential of H at the interval midpoint, where the potential is the average
of the two neighbouring nodes; the propagator is exactly unitary.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.integrate import simpson
from scipy.sparse.linalg import expm_multiply

from .continuity import continuity_defect, divergence
from .fock import EigenstateSpec, FockSpace, commutator
from .lattice import spectral_derivative_matrix

DENSE_LIMIT = 256
NORM_TOL = 1e-8


class NormDriftError(RuntimeError):
    pass


@dataclass(frozen=True)
class TimeGrid:
    t_i: float = 0.0
    t_f: float = 2.0
    dt: float = 1e-3

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not self.t_f > self.t_i:
            raise ValueError(f"t_f must exceed t_i, got {self.t_i}..{self.t_f}")
        steps = (self.t_f - self.t_i) / self.dt
        if abs(steps - round(steps)) > 1e-6:
            raise ValueError(f"(t_f - t_i) / dt = {steps} is not an integer")

    @property
    def steps(self) -> int:
        return int(round((self.t_f - self.t_i) / self.dt))

    @property
    def times(self) -> np.ndarray:
        return self.t_i + self.dt * np.arange(self.steps + 1)

    @property
    def duration(self) -> float:
        return self.t_f - self.t_i

    def refined(self) -> "TimeGrid":
        return TimeGrid(self.t_i, self.t_f, self.dt / 2)


@dataclass
class GaugeProfile:
    """chi and d chi / dt sampled at (time node, site)."""

    grid: TimeGrid
    chi: np.ndarray
    chi_dot: np.ndarray

    @classmethod
    def from_functions(cls, grid: TimeGrid, config, chi: Callable, chi_dot: Callable) -> "GaugeProfile":
        t = grid.times[:, None]
        x = config.positions[None, :]
        return cls(grid, np.broadcast_to(chi(x, t), (t.size, x.size)).astype(float),
                   np.broadcast_to(chi_dot(x, t), (t.size, x.size)).astype(float))

    @classmethod
    def zero(cls, grid: TimeGrid, sites: int) -> "GaugeProfile":
        shape = (grid.steps + 1, sites)
        return cls(grid, np.zeros(shape), np.zeros(shape))


@dataclass
class PotentialField:
    grid: TimeGrid
    A0: np.ndarray
    A: np.ndarray

    @classmethod
    def zero(cls, grid: TimeGrid, sites: int) -> "PotentialField":
        shape = (grid.steps + 1, sites)
        return cls(grid, np.zeros(shape), np.zeros(shape))

    def scaled(self, factor: float) -> "PotentialField":
        return PotentialField(self.grid, factor * self.A0, factor * self.A)

    def at(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Potentials at a node, or the node average at an interval midpoint."""
        pos = (t - self.grid.t_i) / self.grid.dt
        node = round(pos)
        if abs(pos - node) < 1e-9 and 0 <= node <= self.grid.steps:
            return self.A0[node], self.A[node]
        lo = math.floor(pos)
        if abs(pos - lo - 0.5) < 1e-9 and 0 <= lo < self.grid.steps:
            return 0.5 * (self.A0[lo] + self.A0[lo + 1]), 0.5 * (self.A[lo] + self.A[lo + 1])
        raise ValueError(f"t = {t} is neither a grid node nor an interval midpoint")


def smoothstep(s):
    """C1 ramp: 0 with zero slope at s = 0, 1 with zero slope at s = 1."""
    s = np.clip(s, 0.0, 1.0)
    return s * s * (3 - 2 * s)


def smoothstep_rate(s):
    inside = (s >= 0) & (s <= 1)
    return np.where(inside, 6 * s * (1 - s), 0.0)


def pure_gauge_potential(profile: GaugeProfile, config) -> PotentialField:
    """A0 = d chi / dt, A = -d chi / dx (spectral)."""
    if np.abs(profile.chi[0]).max() > 1e-12 or np.abs(profile.chi_dot[0]).max() > 1e-12:
        raise ValueError("gauge profile must vanish with its time derivative at t_i")
    grad = divergence(profile.chi, config)
    return PotentialField(profile.grid, profile.chi_dot.copy(), -grad)


def electric_field(potential: PotentialField, config) -> np.ndarray:
    """E = -(dA/dt + dA0/dx) on the grid (time derivative by finite differences)."""
    dA_dt = np.gradient(potential.A, potential.grid.dt, axis=0, edge_order=2)
    return -(dA_dt + divergence(potential.A0, config))


class _Operators:
    """Per-space operator bundle used inside the time loop."""

    def __init__(self, space: FockSpace):
        self.space = space
        self.sites = space.config.sites
        self.a = space.config.spacing
        self.h0_diag = space.energies
        rho, cur = space.charges, space.currents
        self.stack = sp.vstack(rho + cur).tocsr()
        self.dense = space.dim <= DENSE_LIMIT
        if self.dense:
            self.rho = np.stack([r.toarray() for r in rho])
            self.cur = np.stack([j.toarray() for j in cur])
        else:
            self.rho, self.cur = rho, cur

    def hamiltonian(self, A0: np.ndarray, A: np.ndarray):
        a = self.a
        if self.dense:
            h = np.diag(self.h0_diag).astype(complex)
            h += a * np.tensordot(A0, self.rho, axes=1) - a * np.tensordot(A, self.cur, axes=1)
            return h
        h = sp.diags(self.h0_diag).astype(complex).tocsr()
        for x in range(self.sites):
            if A0[x]:
                h = h + a * A0[x] * self.rho[x]
            if A[x]:
                h = h - a * A[x] * self.cur[x]
        return h.tocsr()

    def step(self, h, state: np.ndarray, dt: float) -> np.ndarray:
        if self.dense:
            w, v = np.linalg.eigh(h)
            return v @ (np.exp(-1j * w * dt) * (v.conj().T @ state))
        return expm_multiply(-1j * dt * h, state)

    def observables(self, state: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        xi = float(np.real(np.vdot(state, self.h0_diag * state)))
        applied = (self.stack @ state).reshape(2 * self.sites, -1)
        vals = np.real(applied @ state.conj())
        return xi, vals[: self.sites], vals[self.sites:]


def hamiltonian_at(space: FockSpace, potential: PotentialField, t: float):
    """H(t) as a sparse matrix; t must be a grid node or interval midpoint."""
    A0, A = potential.at(t)
    a = space.config.spacing
    h = space.h0_operator()
    for x in range(space.config.sites):
        if A0[x]:
            h = h + a * A0[x] * space.charge_operator(x)
        if A[x]:
            h = h - a * A[x] * space.current_operator(x)
    return h.tocsr()


@dataclass
class TrajectoryRecord:
    t: np.ndarray
    norm: np.ndarray
    xi_f: np.ndarray
    rho_e: np.ndarray
    J_e: np.ndarray
    L: np.ndarray
    states: np.ndarray | None = field(default=None, repr=False)

    def to_csv(self, path):
        sites = self.rho_e.shape[1]
        header = ["t", "norm", "xi_f"]
        header += [f"rho_e[{x}]" for x in range(sites)]
        header += [f"J_e[{x}]" for x in range(sites)]
        header += [f"L[{x}]" for x in range(sites)]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for i in range(self.t.size):
                row = [self.t[i], self.norm[i], self.xi_f[i], *self.rho_e[i], *self.J_e[i], *self.L[i]]
                writer.writerow([repr(float(v)) for v in row])


def evolve(
    space: FockSpace,
    initial: np.ndarray,
    potential: PotentialField,
    keep_states: bool = False,
    ops: _Operators | None = None,
) -> TrajectoryRecord:
    """Midpoint-exponential evolution with observables recorded at every node."""
    norm0 = np.linalg.norm(initial)
    if abs(norm0 - 1) > 1e-10:
        raise ValueError(f"initial state must be normalized, |psi| = {norm0}")
    ops = ops or _Operators(space)
    grid = potential.grid
    n_t = grid.steps + 1
    sites = space.config.sites
    norm = np.empty(n_t)
    xi = np.empty(n_t)
    rho = np.empty((n_t, sites))
    cur = np.empty((n_t, sites))
    states = np.empty((n_t, space.dim), dtype=complex) if keep_states else None

    state = np.asarray(initial, dtype=complex).copy()
    for k in range(n_t):
        norm[k] = np.linalg.norm(state)
        if abs(norm[k] - 1) > NORM_TOL:
            raise NormDriftError(f"norm drifted to {norm[k]!r} at t = {grid.times[k]}")
        xi[k], rho[k], cur[k] = ops.observables(state)
        if keep_states:
            states[k] = state
        if k == grid.steps:
            break
        A0 = 0.5 * (potential.A0[k] + potential.A0[k + 1])
        A = 0.5 * (potential.A[k] + potential.A[k + 1])
        state = ops.step(ops.hamiltonian(A0, A), state, grid.dt)

    record = TrajectoryRecord(grid.times, norm, xi, rho, cur, np.zeros_like(rho), states)
    record.L = continuity_residual(record, space.config)
    return record


def continuity_residual(trajectory: TrajectoryRecord, config) -> np.ndarray:
    """L(x, t) = d rho_e / dt + d J_e / dx; second-order differences in time."""
    dt = trajectory.t[1] - trajectory.t[0]
    drho = np.gradient(trajectory.rho_e, dt, axis=0, edge_order=2)
    return drho + divergence(trajectory.J_e, config)


def energy_rate_check(trajectory: TrajectoryRecord, potential: PotentialField, config) -> float:
    """max over interior nodes of |d xi_f/dt - a sum_x (dJ_e/dt A - d rho_e/dt A0)|."""
    if trajectory.t.size < 3:
        raise ValueError("energy-rate check needs at least 3 time nodes")
    dt = trajectory.t[1] - trajectory.t[0]
    lhs = np.gradient(trajectory.xi_f, dt, edge_order=2)
    dJ = np.gradient(trajectory.J_e, dt, axis=0, edge_order=2)
    drho = np.gradient(trajectory.rho_e, dt, axis=0, edge_order=2)
    rhs = config.spacing * np.sum(dJ * potential.A - drho * potential.A0, axis=1)
    return float(np.abs(lhs - rhs)[1:-1].max())


# -- gauge pumping -------------------------------------------------------------


def pair_coupling(space: FockSpace, spec: EigenstateSpec) -> float:
    """xi_pair^2 * a sum_x |<pair|rho(x)|0>|^2, the pumping strength of a pair."""
    pair, xi = space.number_eigenstate(spec)
    vac = space.vacuum_state()
    a = space.config.spacing
    total = sum(abs(np.vdot(pair, space.charge_operator(x) @ vac)) ** 2 for x in range(space.config.sites))
    return xi**2 * a * total


def default_pair(space: FockSpace) -> EigenstateSpec:
    """Electron/positron pair with the largest pumping strength (first in label order on ties)."""
    labels = space.basis.positive_labels
    best, best_val = None, -1.0
    for j in labels:
        for v in labels:
            spec = EigenstateSpec((j,), (v,))
            val = pair_coupling(space, spec)
            if val > best_val * (1 + 1e-12) + 1e-300:
                best, best_val = spec, val
    return best


def pair_superposition(space: FockSpace, spec: EigenstateSpec | None = None) -> np.ndarray:
    """(|0> + |pair>) / sqrt(2)."""
    spec = spec or default_pair(space)
    pair, _ = space.number_eigenstate(spec)
    return (space.vacuum_state() + pair) / math.sqrt(2)


def _heisenberg_rate(space: FockSpace, op) -> sp.csr_matrix:
    return (1j * commutator(space.h0_operator(), op)).tocsr()


def _expect_rows(states: np.ndarray, op) -> np.ndarray:
    return np.real(np.einsum("ti,ti->t", states.conj(), (op @ states.T).T))


@dataclass
class PumpReport:
    recipe: str
    f: float
    xi_initial: float
    xi_pred: float
    xi_meas: float
    gap: float
    max_obs_gauge_shift: float
    max_current_gauge_shift: float
    min_xi_f: float
    vacuous: bool
    trajectory: TrajectoryRecord | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        keys = ["recipe", "f", "xi_initial", "xi_pred", "xi_meas", "gap", "max_obs_gauge_shift",
                "max_current_gauge_shift", "min_xi_f", "vacuous"]
        return {k: getattr(self, k) for k in keys}


def reference_run(space: FockSpace, initial: np.ndarray, grid: TimeGrid) -> TrajectoryRecord:
    return evolve(space, initial, PotentialField.zero(grid, space.config.sites), keep_states=True)


def rho_dot_profile(space: FockSpace, reference: TrajectoryRecord, f: float, grid: TimeGrid):
    """chi(x, t) = f w(t) c(x), c = d rho_e / dt at t_f of the reference run, w a C1 ramp.

    Returns (profile, c).
    """
    final = reference.states[-1]
    c = np.array([
        np.real(np.vdot(final, _heisenberg_rate(space, space.charge_operator(x)) @ final))
        for x in range(space.config.sites)
    ])
    s = (grid.times - grid.t_i) / grid.duration
    chi = f * smoothstep(s)[:, None] * c[None, :]
    chi_dot = f * (smoothstep_rate(s) / grid.duration)[:, None] * c[None, :]
    return GaugeProfile(grid, chi, chi_dot), c


def defect_rates(space: FockSpace, reference: TrajectoryRecord) -> tuple[np.ndarray, np.ndarray]:
    """dL/dt and d^2L/dt^2 along a free reference run, from Heisenberg derivatives of D(x)."""
    first, second = [], []
    for x in range(space.config.sites):
        k1 = _heisenberg_rate(space, continuity_defect(space, x))
        k2 = _heisenberg_rate(space, k1)
        first.append(_expect_rows(reference.states, k1))
        second.append(_expect_rows(reference.states, k2))
    return np.array(first).T, np.array(second).T


def l_dot_profile(space: FockSpace, reference: TrajectoryRecord, f: float, grid: TimeGrid):
    """chi = -f b(t) dL/dt with b = sin^2(pi s) vanishing (with slope) at both ends.

    Returns (profile, dL/dt, b).
    """
    dL, d2L = defect_rates(space, reference)
    s = (grid.times - grid.t_i) / grid.duration
    b = np.sin(np.pi * s) ** 2
    b_dot = np.pi * np.sin(2 * np.pi * s) / grid.duration
    chi = -f * b[:, None] * dL
    chi_dot = -f * (b_dot[:, None] * dL + b[:, None] * d2L)
    return GaugeProfile(grid, chi, chi_dot), dL, b


def predicted_free_energy(space: FockSpace, reference: TrajectoryRecord, profile: GaugeProfile) -> float:
    """Gauge-invariance counterfactual: chi-independent observables taken from the reference run."""
    a = space.config.spacing
    dL, _ = defect_rates(space, reference)
    bulk = simpson(a * np.sum(profile.chi * dL, axis=1), x=reference.t)
    final = reference.states[-1]
    c = np.array([
        np.real(np.vdot(final, _heisenberg_rate(space, space.charge_operator(x)) @ final))
        for x in range(space.config.sites)
    ])
    return float(reference.xi_f[0] + bulk - a * np.sum(c * profile.chi[-1]))


def gauge_pump_experiment(
    space: FockSpace,
    f: float,
    grid: TimeGrid,
    initial: np.ndarray | None = None,
    recipe: Literal["rho_dot", "L_dot", "custom"] = "rho_dot",
    profile: GaugeProfile | None = None,
    reference: TrajectoryRecord | None = None,
    keep_trajectory: bool = False,
) -> PumpReport:
    """Reference run, chi from the recipe, pure-gauge rerun, predicted vs measured free energy."""
    if initial is None:
        initial = pair_superposition(space)
    if reference is None:
        reference = reference_run(space, initial, grid)
    a = space.config.spacing
    xi_i = float(reference.xi_f[0])

    if recipe == "rho_dot":
        profile, c = rho_dot_profile(space, reference, f, grid)
        vacuous = bool(np.abs(c).max() < 1e-12)
        xi_pred = xi_i - f * a * float(np.sum(c**2))
    elif recipe == "L_dot":
        profile, dL, b = l_dot_profile(space, reference, f, grid)
        vacuous = bool(np.abs(dL).max() < 1e-12)
        xi_pred = xi_i - f * float(simpson(b * a * np.sum(dL**2, axis=1), x=reference.t))
    elif recipe == "custom":
        if profile is None:
            raise ValueError("custom recipe needs a GaugeProfile")
        vacuous = False
        xi_pred = predicted_free_energy(space, reference, profile)
    else:
        raise ValueError(f"unknown recipe {recipe!r}")

    run = evolve(space, initial, pure_gauge_potential(profile, space.config))
    xi_meas = float(run.xi_f[-1])
    return PumpReport(
        recipe=recipe,
        f=float(f),
        xi_initial=xi_i,
        xi_pred=float(xi_pred),
        xi_meas=xi_meas,
        gap=xi_meas - float(xi_pred),
        max_obs_gauge_shift=float(np.abs(run.rho_e - reference.rho_e).max()),
        max_current_gauge_shift=float(np.abs(run.J_e - reference.J_e).max()),
        min_xi_f=float(run.xi_f.min()),
        vacuous=vacuous,
        trajectory=run if keep_trajectory else None,
    )


def gauge_pump_sweep(
    space: FockSpace,
    strengths: Sequence[float],
    grid: TimeGrid,
    initial: np.ndarray | None = None,
    recipe: str = "rho_dot",
    keep_trajectory: bool = False,
) -> list[PumpReport]:
    if initial is None:
        initial = pair_superposition(space)
    reference = reference_run(space, initial, grid)
    return [
        gauge_pump_experiment(space, f, grid, initial, recipe, reference=reference,
                              keep_trajectory=keep_trajectory)
        for f in strengths
    ]


def sinusoidal_gauge(grid: TimeGrid, config, amplitude: float = 1.0, mode: int = 1) -> GaugeProfile:
    """chi = amplitude * w(t) cos(2 pi mode x / L) with the C1 ramp w."""
    kx = 2 * np.pi * mode / config.length
    T = grid.duration
    return GaugeProfile.from_functions(
        grid,
        config,
        lambda x, t: amplitude * smoothstep((t - grid.t_i) / T) * np.cos(kx * x),
        lambda x, t: amplitude * smoothstep_rate((t - grid.t_i) / T) / T * np.cos(kx * x),
    )


def spatial_derivative(config) -> np.ndarray:
    return spectral_derivative_matrix(config)
