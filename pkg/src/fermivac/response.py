"""First-order (linear-response) vacuum current in the interaction picture.

Everything is evaluated in the number basis, where H0 is diagonal, so
exp(+-i H0 t) is a vector of phases.  Time integrals use composite Simpson on
the potential's grid.  The sign convention is the standard Dyson one,
J^(1)(x, t) = -i <s|[J_I(x, t), int V_I(t') dt']|s>.
"""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse as sp
from scipy.integrate import cumulative_simpson, simpson

from .continuity import continuity_defect
from .dynamics import GaugeProfile, PotentialField, _Operators, evolve, pure_gauge_potential, smoothstep
from .fock import FockSpace

QUAD_WARN = 1e-8


def interaction_operator(space: FockSpace, op, t: float):
    """exp(i H0 t) op exp(-i H0 t)."""
    phase = np.exp(1j * space.energies * t)
    if sp.issparse(op):
        return (sp.diags(phase) @ op @ sp.diags(phase.conj())).tocsr()
    return phase[:, None] * np.asarray(op) * phase.conj()[None, :]


def interaction_state(space: FockSpace, state: np.ndarray, t: float) -> np.ndarray:
    return np.exp(1j * space.energies * t) * state


def _reference_state(space: FockSpace, state):
    if state is None:
        return space.vacuum_state(), 0.0
    ok, xi = space.is_eigenstate(state)
    if not ok:
        raise ValueError("response reference state must be an H0 eigenstate")
    return np.asarray(state, dtype=complex), xi


def _node(grid, t: float) -> int:
    pos = (t - grid.t_i) / grid.dt
    k = int(round(pos))
    if abs(pos - k) > 1e-9 or not 0 <= k <= grid.steps:
        raise ValueError(f"t = {t} is not a node of the potential grid")
    return k


def _quadrature(values: np.ndarray, times: np.ndarray, label: str) -> complex:
    if times.size < 2:
        return 0.0
    full = simpson(values, x=times)
    if times.size >= 5:
        coarse = simpson(values[::2], x=times[::2]) if times.size % 2 else None
        if coarse is not None:
            err = abs(full - coarse) / 15
            if err > QUAD_WARN * max(1.0, abs(full)):
                warnings.warn(
                    f"{label}: time grid too coarse for the integrand, estimated error {err:.2e}",
                    RuntimeWarning,
                    stacklevel=3,
                )
    return full


def _retarded_integral(space, state, xi_s, probe, sources, coefficients, times, t, label):
    """int dt' sum_y c_y(t') <s| P_I(t) S_y,I(t') |s> over the nodes up to t.

    `probe` and every source are Hermitian.
    """
    p_s = probe @ state
    weights = np.array([np.conj(p_s) * (src @ state) for src in sources])  # (n_src, dim)
    keep = np.nonzero(np.abs(weights).max(axis=0) > 0)[0]
    if keep.size == 0:
        return 0.0
    delta = space.energies[keep] - xi_s
    phases = np.exp(-1j * np.outer(t - times, delta))  # (n_t, n_keep)
    kernel = phases @ weights[:, keep].T  # (n_t, n_src)
    integrand = np.sum(kernel * coefficients, axis=1)
    return _quadrature(integrand, times, label)


def first_order_current(
    space: FockSpace, potential: PotentialField, x: int, t: float, state: np.ndarray | None = None
) -> float:
    """Linear-response change of <J(x)> at time t, potential switched on at the grid start."""
    state, xi_s = _reference_state(space, state)
    k = _node(potential.grid, t)
    if np.allclose(state, space.vacuum_state()):
        zeroth = np.vdot(state, space.current_operator(x) @ state)
        if abs(zeroth) > 1e-12:
            raise RuntimeError(f"vacuum current expectation is {zeroth}, expected 0")
    times = potential.grid.times[: k + 1]
    a = space.config.spacing
    sources = space.currents + space.charges
    coeff = np.hstack([-a * potential.A[: k + 1], a * potential.A0[: k + 1]])
    g = _retarded_integral(space, state, xi_s, space.current_operator(x), sources, coeff, times, t,
                           "first_order_current")
    # -i <[J_I, int V_I]> = -i (G - conj G) = 2 Im G
    return float(2 * np.imag(g))


def gauge_variation_direct(
    space: FockSpace, chi: GaugeProfile, x: int, t: float, state: np.ndarray | None = None
) -> float:
    """First-order current produced by the pure-gauge potential (chi_dot, -grad chi)."""
    return first_order_current(space, pure_gauge_potential(chi, space.config), x, t, state)


def gauge_variation_schwinger(
    space: FockSpace, chi: GaugeProfile, x: int, t: float, state: np.ndarray | None = None
) -> tuple[float, float]:
    """(Schwinger-term form, defect correction) of the gauge variation.

    Integrating rho_I chi_dot by parts with the exact truncated identity
    d rho_I / dt = -div J_I + D_I leaves the equal-time commutator term plus
    a correction carried by the continuity defect D.
    """
    state, xi_s = _reference_state(space, state)
    k = _node(chi.grid, t)
    a = space.config.spacing
    sites = space.config.sites
    j_s = space.current_operator(x) @ state
    schwinger = sum(
        2 * np.vdot(j_s, space.charge_operator(y) @ state).imag * a * chi.chi[k, y] for y in range(sites)
    )
    times = chi.grid.times[: k + 1]
    defects = [continuity_defect(space, y) for y in range(sites)]
    g = _retarded_integral(space, state, xi_s, space.current_operator(x), defects,
                           a * chi.chi[: k + 1], times, t, "defect_correction")
    # +i <[J_I, int a sum chi D_I]> = -2 Im G
    return float(schwinger), float(-2 * np.imag(g))


@dataclass
class ResponseRow:
    chi_id: str
    x: int
    t: float
    direct: float
    schwinger_form: float
    defect_correction: float
    residual: float
    tag: str = "gauge-variation-reconciliation"

    def to_dict(self) -> dict:
        return asdict(self)


def reconcile(space: FockSpace, chi: GaugeProfile, x: int, t: float, chi_id: str = "chi",
              state: np.ndarray | None = None) -> ResponseRow:
    direct = gauge_variation_direct(space, chi, x, t, state)
    schwinger, defect = gauge_variation_schwinger(space, chi, x, t, state)
    return ResponseRow(chi_id, x, float(t), direct, schwinger, defect, direct - schwinger - defect)


def dyson_current(
    space: FockSpace,
    potential: PotentialField,
    x: int,
    t: float,
    state: np.ndarray | None = None,
    order: int = 2,
) -> list[float]:
    """Order-by-order <J(x)> from the iterated Dyson series, [J0, J1, ..., J_order].

    Independent of `first_order_current`: it propagates interaction-picture
    state corrections by cumulative quadrature instead of using response kernels.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    state, _ = _reference_state(space, state)
    grid = potential.grid
    k = _node(grid, t)
    times = grid.times[: k + 1]
    a = space.config.spacing
    xi = space.energies
    rho, cur = space.charges, space.currents

    def v_interaction(idx: int, vec: np.ndarray) -> np.ndarray:
        tt = times[idx]
        w = np.exp(-1j * xi * tt) * vec
        out = np.zeros_like(w)
        for y in range(space.config.sites):
            if potential.A0[idx, y]:
                out += a * potential.A0[idx, y] * (rho[y] @ w)
            if potential.A[idx, y]:
                out -= a * potential.A[idx, y] * (cur[y] @ w)
        return np.exp(1j * xi * tt) * out

    psi0 = interaction_state(space, state, times[0])
    corrections = [np.broadcast_to(psi0, (times.size, space.dim))]
    for _ in range(order):
        prev = corrections[-1]
        rate = np.array([-1j * v_interaction(i, prev[i]) for i in range(times.size)])
        if times.size < 3:
            cum = np.zeros_like(rate)
        else:
            # cumulative_simpson is real-only
            cum = cumulative_simpson(rate.real, x=times, axis=0, initial=0) + 1j * cumulative_simpson(
                rate.imag, x=times, axis=0, initial=0
            )
        corrections.append(cum)

    j_int = interaction_operator(space, space.current_operator(x), t)
    final = [c[-1] for c in corrections]

    def pair(u, v):
        return np.vdot(u, j_int @ v)

    terms = [pair(final[0], final[0]).real, 2 * pair(final[0], final[1]).real]
    if order == 2:
        terms.append((pair(final[1], final[1]) + 2 * pair(final[0], final[2])).real)
    return [float(v) for v in terms]


def ramped_scalar_potential(grid, config, amplitude: float = 1.0, mode: int = 1) -> PotentialField:
    """A0 = amplitude * w(t) cos(2 pi mode x / L) with the C1 ramp w, A = 0."""
    s = (grid.times - grid.t_i) / grid.duration
    profile = np.cos(2 * np.pi * mode * config.positions / config.length)
    A0 = amplitude * smoothstep(s)[:, None] * profile[None, :]
    return PotentialField(grid, A0, np.zeros_like(A0))


def richardson_derivative(
    space: FockSpace, potential: PotentialField, epsilon: float, state: np.ndarray | None = None
) -> np.ndarray:
    """d<J(x, t_f)>/d eps at eps = 0 from exact evolution, for every site.

    Symmetric differences at eps and eps/2 cancel the even orders; combining
    them as (4 D(eps/2) - D(eps)) / 3 removes the eps^2 term.
    """
    state, _ = _reference_state(space, state)
    ops = _Operators(space)

    def final_current(scale):
        return evolve(space, state, potential.scaled(scale), ops=ops).J_e[-1]

    def symmetric(h):
        return (final_current(h) - final_current(-h)) / (2 * h)

    return (4 * symmetric(epsilon / 2) - symmetric(epsilon)) / 3
