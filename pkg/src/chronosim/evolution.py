"""Exact and first-order evolution of (center of mass) x (clock) states.

Composite matrices use the index ``j * d + n`` for cm basis state ``j`` and
clock level ``n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .clocks import ClockModel, clock_free_evolve
from .errors import InvalidOperatorError, InvalidParameterError, ResolutionError, ShapeError
from .hamiltonian import HamiltonianDecomposition
from .ordering import NumericNormalForm, OrderedPolynomial, expectation_of_ordered
from .states import (
    DEPHASE_POINTS_PER_SPREAD,
    GridDensity,
    GridSpec,
    PacketMixture,
    PureCMState,
    auto_grid,
    check_coverage,
    packets_of,
)

MOMENTUM_GRID_STD = 10.0


@dataclass(frozen=True)
class CompositeState:
    matrix: np.ndarray = field(repr=False)
    grid: GridSpec | None
    clock_dim: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % self.clock_dim:
            raise ShapeError(f"composite matrix shape {m.shape} incompatible with clock dim {self.clock_dim}")
        object.__setattr__(self, "matrix", m)

    @property
    def n_cm(self) -> int:
        return self.matrix.shape[0] // self.clock_dim


@dataclass
class EvolutionReport:
    rho_clock: np.ndarray
    method: str
    t: float
    diagnostics: dict = field(default_factory=dict)
    state: CompositeState | None = None


def product_state(rho_cm: GridDensity, rho_clock) -> CompositeState:
    return CompositeState(np.kron(rho_cm.matrix, np.asarray(rho_clock, dtype=complex)), rho_cm.grid, len(rho_clock))


def partial_trace_cm(state: CompositeState) -> np.ndarray:
    n, d = state.n_cm, state.clock_dim
    return np.einsum("jajb->ab", state.matrix.reshape(n, d, n, d))


def _clock_diagnostics(rho: np.ndarray) -> dict:
    herm = 0.5 * (rho + rho.conj().T)
    return {
        "trace_drift": float(abs(np.trace(rho) - 1.0)),
        "hermiticity_error": float(np.max(np.abs(rho - rho.conj().T))),
        "min_eigenvalue": float(np.linalg.eigvalsh(herm)[0]),
    }


def _evolve_pure_rows(amps, clock: ClockModel, phases: np.ndarray) -> np.ndarray:
    """Reduced clock state of ``sum_k amps[k] |k> (x) U_k |clock0>``, U_k diagonal."""
    psi = amps[:, None] * clock.initial_state[None, :] * phases
    return psi.T @ psi.conj()


def _evolve_density(rho_cm: np.ndarray, clock: ClockModel, phases: np.ndarray) -> CompositeState:
    """Evolve ``rho_cm (x) rho_clock0`` under a Hamiltonian diagonal in (cm basis) x (levels)."""
    phi = phases.reshape(-1)
    rho = np.kron(rho_cm, clock.rho0)
    return phi[:, None] * rho * phi.conj()[None, :]


def dispersion_phases(p, clock: ClockModel, m: float, t: float, c: float = 1.0) -> np.ndarray:
    """``exp(-i t sqrt((m c^2 + e_n)^2 + p^2 c^2))`` for every (p, level) pair."""
    p = np.asarray(p, dtype=float)
    rest = m * c**2 + clock.energies
    e0 = np.sqrt(rest[0] ** 2 + (p * c) ** 2)
    en = np.sqrt(rest[None, :] ** 2 + (p[:, None] * c) ** 2)
    # level gaps in a cancellation-free form
    gaps = (rest[None, :] ** 2 - rest[0] ** 2) / (en + e0[:, None])
    return np.exp(-1j * t * e0)[:, None] * np.exp(-1j * t * gaps)


def dispersion_rate(p, clock: ClockModel, m: float, level: int = 1, c: float = 1.0) -> float:
    """Per-branch rate ``(E_n(p) - E_0(p)) / (e_n - e_0)`` of a momentum eigenstate."""
    rest = m * c**2 + clock.energies
    e0 = np.hypot(rest[0], p * c)
    en = np.hypot(rest[level], p * c)
    return float((rest[level] ** 2 - rest[0] ** 2) / (en + e0) / (clock.energies[level] - clock.energies[0]))


def momentum_grid_for(state, n_p: int, n_std=MOMENTUM_GRID_STD) -> np.ndarray:
    pks = packets_of(state)
    lo = min(pk.p_mean - n_std * pk.p_spread for pk in pks)
    hi = max(pk.p_mean + n_std * pk.p_spread for pk in pks)
    p = np.linspace(lo, hi, n_p)
    dp = p[1] - p[0]
    smallest = min(pk.p_spread for pk in pks)
    if smallest < DEPHASE_POINTS_PER_SPREAD * dp:
        raise ResolutionError(
            f"momentum grid of {n_p} points over [{lo:g}, {hi:g}] under-resolves "
            f"p_spread={smallest:g}; need >= {DEPHASE_POINTS_PER_SPREAD:g} points per spread"
        )
    return p


def exact_flat_space_evolve(state, clock: ClockModel, m: float, t: float, n_p: int = 512, c: float = 1.0) -> EvolutionReport:
    """Brute-force flat-space evolution under the full square-root Hamiltonian.

    The Hamiltonian is diagonal in (momentum) x (clock level), so every joint
    eigencomponent just picks up its phase.  Pure packet states are sampled on
    a momentum grid of ``n_p`` points; grid densities are transformed to their
    own conjugate momentum grid and evolved as full composite matrices.
    """
    if isinstance(state, GridDensity):
        rho_p = state.momentum_matrix()
        phases = dispersion_phases(state.grid.p, clock, m, t, c)
        comp = CompositeState(_evolve_density(rho_p, clock, phases), None, clock.dim)
        rho = partial_trace_cm(comp)
        diag = {"n_p": state.grid.n, "input_trace_drift": float(abs(np.trace(rho_p) - 1.0))}
        return EvolutionReport(rho, "exact-flat", t, {**_clock_diagnostics(rho), **diag}, comp)

    if isinstance(state, PureCMState):
        components = [(1.0, state)]
    elif isinstance(state, PacketMixture):
        components = list(state.components)
    else:
        raise InvalidParameterError(f"unsupported state type {type(state).__name__}")

    p = momentum_grid_for(state, n_p)
    dp = p[1] - p[0]
    # trapezoid weights; the end points sit ~10 spreads out so this is spectral
    quad = np.full(p.size, dp)
    quad[[0, -1]] *= 0.5
    phases = dispersion_phases(p, clock, m, t, c)
    rho = np.zeros((clock.dim, clock.dim), dtype=complex)
    norm = 0.0
    for w, st in components:
        amps = st.amplitude(p) * np.sqrt(quad)
        norm += w * float(np.sum(np.abs(amps) ** 2))
        rho += w * _evolve_pure_rows(amps, clock, phases)
    rho /= norm
    diag = {"n_p": n_p, "input_trace_drift": float(abs(norm - 1.0))}
    return EvolutionReport(rho, "exact-flat", t, {**_clock_diagnostics(rho), **diag})


def gravitational_phases(x, clock: ClockModel, g: float, t: float, c: float = 1.0) -> np.ndarray:
    """Clock phases for ``H_clock (1 + (1 + kappa) g x / c^2)`` at each position."""
    rate = 1.0 + (1.0 + clock.kappa) * g * np.asarray(x, dtype=float) / c**2
    return np.exp(-1j * t * rate[:, None] * clock.energies[None, :])


def gravitational_limit_evolve(state, clock: ClockModel, g: float, t: float, n_x: int = 512, c: float = 1.0) -> EvolutionReport:
    """Large-mass gravitational evolution: a position-weighted mixture of clock rates."""
    if isinstance(state, GridDensity):
        phases = gravitational_phases(state.grid.x, clock, g, t, c)
        comp = CompositeState(_evolve_density(state.matrix, clock, phases), state.grid, clock.dim)
        rho = partial_trace_cm(comp)
        diag = {"n_x": state.grid.n, "input_trace_drift": float(abs(state.trace() - 1.0))}
        return EvolutionReport(rho, "gravitational-limit", t, {**_clock_diagnostics(rho), **diag}, comp)

    if isinstance(state, PureCMState):
        components = [(1.0, state)]
    elif isinstance(state, PacketMixture):
        components = list(state.components)
    else:
        raise InvalidParameterError(f"unsupported state type {type(state).__name__}")
    grid = auto_grid(state, n_x)
    check_coverage(state, grid)
    x = grid.x
    phases = gravitational_phases(x, clock, g, t, c)
    rho = np.zeros((clock.dim, clock.dim), dtype=complex)
    norm = 0.0
    for w, st in components:
        amps = st.position_amplitude(x) * np.sqrt(grid.dx)
        norm += w * float(np.sum(np.abs(amps) ** 2))
        rho += w * _evolve_pure_rows(amps, clock, phases)
    rho /= norm
    diag = {"n_x": n_x, "input_trace_drift": float(abs(norm - 1.0))}
    return EvolutionReport(rho, "gravitational-limit", t, {**_clock_diagnostics(rho), **diag})


def exact_grid_evolve(rho0: CompositeState, h_total, t: float) -> EvolutionReport:
    """``exp(-iHt) rho0 exp(iHt)`` by dense eigendecomposition."""
    h = np.asarray(h_total, dtype=complex)
    if h.shape != rho0.matrix.shape:
        raise ShapeError(f"Hamiltonian shape {h.shape} != state shape {rho0.matrix.shape}")
    scale = max(1.0, float(np.max(np.abs(h))))
    if np.max(np.abs(h - h.conj().T)) > 1e-10 * scale:
        raise InvalidOperatorError("total Hamiltonian is not Hermitian")
    evals, evecs = np.linalg.eigh(0.5 * (h + h.conj().T))
    u = (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T
    out = CompositeState(u @ rho0.matrix @ u.conj().T, rho0.grid, rho0.clock_dim)
    rho = partial_trace_cm(out)
    return EvolutionReport(rho, "exact-grid", t, _clock_diagnostics(rho), out)


def _commutator(a, b):
    return a @ b - b @ a


def dyson_first_order_clock_state(
    rho_cm0, rho_clock0, clock: ClockModel, decomp: HamiltonianDecomposition, t: float, method: str = "operator"
) -> EvolutionReport:
    """First-order reduced clock state.

    rho(t) = rho0(t) - i t ([Hc, rho0(t)] <V1> + [Hc^2, rho0(t)] <V2>)

    with ``rho0(t)`` the free clock evolution and ``<Vi>`` taken in the initial
    cm state.  The result is returned as computed; loss of positivity at large
    coupling is reported in the diagnostics, never clamped.
    """
    v1 = expectation_of_ordered(decomp.v1, rho_cm0, method)
    v2 = expectation_of_ordered(decomp.v2, rho_cm0, method)
    return dyson_from_expectations(rho_clock0, clock, v1, v2, t)


def dyson_from_expectations(rho_clock0, clock: ClockModel, v1: complex, v2: complex, t: float) -> EvolutionReport:
    free = clock_free_evolve(clock, rho_clock0, t)
    hc = clock.hamiltonian
    corr = -1j * t * (_commutator(hc, free) * v1 + _commutator(hc @ hc, free) * v2)
    rho = free + corr
    diag = _clock_diagnostics(rho)
    diag.update(
        v1=complex(v1),
        v2=complex(v2),
        correction_ratio=float(np.linalg.norm(corr) / np.linalg.norm(free)),
    )
    return EvolutionReport(rho, "dyson", t, diag)


def bch_first_order_interaction(
    v: OrderedPolynomial, h_cm: OrderedPolynomial, t_prime: float, hbar: float = 1.0
) -> NumericNormalForm:
    """``V + (i t'/hbar) [H_cm, V]`` in normal form (x left of p)."""
    vn = v.normal_form(hbar)
    hn = h_cm.normal_form(hbar)
    return (vn + hn.commutator(vn, hbar).scale(1j * t_prime / hbar)).pruned()


def momentum_eigenstate_evolve(p: float, clock: ClockModel, m: float, t: float, c: float = 1.0) -> EvolutionReport:
    """Reduced clock state for a sharp cm momentum ``p`` (the clock stays pure)."""
    psi = clock.initial_state * dispersion_phases(np.array([p]), clock, m, t, c)[0]
    rho = np.outer(psi, psi.conj())
    return EvolutionReport(rho, "momentum-eigenstate", t, _clock_diagnostics(rho))
