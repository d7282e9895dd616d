"""Center-of-mass states: Gaussian packets, superpositions, mixtures and grids.

Units are hbar = c = 1 throughout.  A packet's momentum amplitude is

    psi(p) = (2 pi s^2)^(-1/4) exp(-(p - p0)^2 / (4 s^2) - i p x0 + i phase)

so the position spread is ``1 / (2 s)`` and shifting ``x0`` only changes the
momentum-space phase.  Grid densities store the discrete position matrix
``rho[j, l] = <x_j|rho|x_l> dx`` whose plain trace is the physical trace.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from . import _gaussian
from .errors import DegenerateStateError, InvalidParameterError, ResolutionError

#: Half-width, in standard deviations, a grid must cover around every packet.
COVERAGE_STD = 6.0
#: Momentum samples required per momentum spread before dephasing.
DEPHASE_POINTS_PER_SPREAD = 8.0
DEFAULT_GRID_POINTS = 512
DEFAULT_GRID_STD = 8.0


@dataclass(frozen=True)
class WavePacket:
    p_mean: float
    p_spread: float
    x_mean: float = 0.0
    global_phase: float = 0.0

    def __post_init__(self):
        if not self.p_spread > 0:
            raise InvalidParameterError(f"p_spread must be > 0, got {self.p_spread}")

    @property
    def x_spread(self) -> float:
        return 0.5 / self.p_spread

    def function(self):
        return _gaussian.packet_function(
            self.p_mean, self.p_spread, self.x_mean, self.global_phase
        )

    def amplitude(self, p):
        """Momentum-space amplitude psi(p)."""
        return _gaussian.evaluate(self.function(), p)

    def position_amplitude(self, x):
        x = np.asarray(x, dtype=float)
        sx = self.x_spread
        norm = (2.0 * np.pi * sx**2) ** -0.25
        d = x - self.x_mean
        return norm * np.exp(-(d**2) / (4.0 * sx**2) + 1j * (self.p_mean * d + self.global_phase))

    def inner(self, other: "WavePacket") -> complex:
        """Analytic overlap <self|other>."""
        return _gaussian.inner(self.function(), other.function())


def make_gaussian_packet(p_mean, p_spread, x_mean=0.0, phase=0.0) -> WavePacket:
    return WavePacket(float(p_mean), float(p_spread), float(x_mean), float(phase))


@dataclass(frozen=True)
class PureCMState:
    """``normalization * sum(amp * packet)``."""

    terms: tuple
    normalization: float = 1.0

    @classmethod
    def from_terms(cls, terms: Sequence[tuple[complex, WavePacket]]) -> "PureCMState":
        terms = tuple((complex(a), pk) for a, pk in terms)
        if not terms:
            raise InvalidParameterError("a pure state needs at least one packet")
        norm2 = sum(
            (np.conj(ai) * aj * pi.inner(pj)).real
            for ai, pi in terms
            for aj, pj in terms
        )
        if norm2 <= 1e-14:
            raise DegenerateStateError(f"superposition has vanishing norm ({norm2:.3e})")
        return cls(terms, float(norm2**-0.5))

    @property
    def packets(self) -> list[WavePacket]:
        return [pk for _, pk in self.terms]

    def weighted_terms(self):
        return [(self.normalization * a, pk) for a, pk in self.terms]

    def amplitude(self, p):
        p = np.asarray(p, dtype=float)
        out = np.zeros(p.shape, dtype=complex)
        for a, pk in self.weighted_terms():
            out += a * pk.amplitude(p)
        return out

    def position_amplitude(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for a, pk in self.weighted_terms():
            out += a * pk.position_amplitude(x)
        return out

    def norm(self) -> float:
        return float(
            sum(
                (np.conj(ai) * aj * pi.inner(pj)).real
                for ai, pi in self.weighted_terms()
                for aj, pj in self.weighted_terms()
            )
        )


@dataclass(frozen=True)
class PacketMixture:
    components: tuple  # (weight, PureCMState) pairs, weights summing to 1

    @property
    def packets(self) -> list[WavePacket]:
        return [pk for _, st in self.components for pk in st.packets]


@dataclass(frozen=True)
class GridSpec:
    """Periodic position grid ``x_j = x_min + j dx`` with ``dx = (x_max - x_min) / n``."""

    n: int
    x_min: float
    x_max: float

    def __post_init__(self):
        if self.n < 2 or not self.x_max > self.x_min:
            raise InvalidParameterError(f"invalid grid {self}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    @property
    def p(self) -> np.ndarray:
        """Conjugate momenta in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, self.dx)

    @property
    def dp(self) -> float:
        return 2.0 * np.pi / (self.n * self.dx)

    @property
    def p_max(self) -> float:
        return np.pi / self.dx

    def fourier_matrix(self) -> np.ndarray:
        """Unitary map from discrete position to discrete momentum amplitudes."""
        return np.exp(-1j * np.outer(self.p, self.x)) / np.sqrt(self.n)


@dataclass(frozen=True)
class GridDensity:
    matrix: np.ndarray = field(repr=False)
    grid: GridSpec

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (self.grid.n, self.grid.n):
            raise InvalidParameterError(f"matrix shape {m.shape} does not match grid n={self.grid.n}")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def momentum_matrix(self) -> np.ndarray:
        f = self.grid.fourier_matrix()
        return f @ self.matrix @ f.conj().T


CMDensity = Union[PacketMixture, GridDensity]
CMState = Union[PureCMState, PacketMixture, GridDensity]


def superpose(theta, phi, psi1: WavePacket, psi2: WavePacket) -> PureCMState:
    """cos(theta)|psi1> + sin(theta) e^{i phi}|psi2>, normalized analytically."""
    return PureCMState.from_terms(
        [(np.cos(theta), psi1), (np.sin(theta) * np.exp(1j * phi), psi2)]
    )


def pure(packet: WavePacket) -> PureCMState:
    return PureCMState(((1.0 + 0j, packet),), 1.0)


def mix(states: Sequence[tuple[float, Union[PureCMState, WavePacket]]]) -> PacketMixture:
    weights = np.array([float(w) for w, _ in states])
    if len(weights) == 0 or np.any(weights < 0) or not np.any(weights > 0):
        raise InvalidParameterError("mixture weights must be >= 0 with at least one > 0")
    weights = weights / weights.sum()
    comps = []
    for w, (_, st) in zip(weights, states):
        if isinstance(st, WavePacket):
            st = pure(st)
        comps.append((float(w), st))
    return PacketMixture(tuple(comps))


def packets_of(state: CMState) -> list[WavePacket]:
    if isinstance(state, GridDensity):
        return []
    return state.packets


def _components(state):
    if isinstance(state, PureCMState):
        return [(1.0, state)]
    if isinstance(state, PacketMixture):
        return list(state.components)
    raise TypeError(f"not a packet state: {type(state).__name__}")


def momentum_density(state: CMState, p):
    p = np.asarray(p, dtype=float)
    if isinstance(state, GridDensity):
        g = state.grid
        order = np.argsort(g.p)
        diag = np.real(np.diag(state.momentum_matrix()))[order] / g.dp
        return np.interp(p, g.p[order], diag, left=0.0, right=0.0)
    return sum(w * np.abs(st.amplitude(p)) ** 2 for w, st in _components(state))


def position_density(state: CMState, x):
    x = np.asarray(x, dtype=float)
    if isinstance(state, GridDensity):
        g = state.grid
        return np.interp(x, g.x, np.real(np.diag(state.matrix)) / g.dx, left=0.0, right=0.0)
    return sum(w * np.abs(st.position_amplitude(x)) ** 2 for w, st in _components(state))


def auto_grid(state: CMState, n=DEFAULT_GRID_POINTS, n_std=DEFAULT_GRID_STD, dephasing=False) -> GridSpec:
    """Grid covering ``n_std`` position spreads of every packet.

    With ``dephasing=True`` the extent is widened until the momentum spacing
    resolves every packet's momentum spread.
    """
    if isinstance(state, GridDensity):
        return state.grid
    pks = packets_of(state)
    lo = min(pk.x_mean - n_std * pk.x_spread for pk in pks)
    hi = max(pk.x_mean + n_std * pk.x_spread for pk in pks)
    if dephasing:
        needed = 2.0 * np.pi * DEPHASE_POINTS_PER_SPREAD / min(pk.p_spread for pk in pks)
        if hi - lo < needed:
            mid = 0.5 * (hi + lo)
            lo, hi = mid - 0.5 * needed, mid + 0.5 * needed
    return GridSpec(int(n), float(lo), float(hi))


def check_coverage(state: CMState, grid: GridSpec, n_std=COVERAGE_STD):
    for i, pk in enumerate(packets_of(state)):
        if pk.x_mean - n_std * pk.x_spread < grid.x_min or pk.x_mean + n_std * pk.x_spread > grid.x_max:
            raise ResolutionError(
                f"packet {i} (x_mean={pk.x_mean:g}, x_spread={pk.x_spread:g}) not covered "
                f"by grid [{grid.x_min:g}, {grid.x_max:g}]"
            )
        if abs(pk.p_mean) + n_std * pk.p_spread > grid.p_max:
            raise ResolutionError(
                f"packet {i} momentum range exceeds grid Nyquist momentum {grid.p_max:g}; "
                "use more points"
            )


def to_grid(state: CMState, grid: GridSpec | None = None) -> GridDensity:
    if isinstance(state, GridDensity):
        if grid is not None and grid != state.grid:
            raise InvalidParameterError("regridding a grid density is not supported")
        return state
    grid = grid or auto_grid(state)
    check_coverage(state, grid)
    x = grid.x
    rho = np.zeros((grid.n, grid.n), dtype=complex)
    for w, st in _components(state):
        v = st.position_amplitude(x) * np.sqrt(grid.dx)
        rho += w * np.outer(v, v.conj())
    return GridDensity(rho, grid)


def dephase_momentum(state: CMState, grid: GridSpec | None = None) -> GridDensity:
    """Erase all coherences between distinct momentum eigenstates of the grid."""
    if isinstance(state, GridDensity):
        rho = state if grid is None else to_grid(state, grid)
    else:
        grid = grid or auto_grid(state, dephasing=True)
        for i, pk in enumerate(packets_of(state)):
            if pk.p_spread < DEPHASE_POINTS_PER_SPREAD * grid.dp:
                raise ResolutionError(
                    f"packet {i}: momentum spacing {grid.dp:g} gives fewer than "
                    f"{DEPHASE_POINTS_PER_SPREAD:g} points per p_spread={pk.p_spread:g}"
                )
        rho = to_grid(state, grid)
    f = rho.grid.fourier_matrix()
    diag = np.real(np.diag(rho.momentum_matrix()))
    return GridDensity((f.conj().T * diag) @ f, rho.grid)


def dephase_position(state: CMState, grid: GridSpec | None = None) -> GridDensity:
    rho = to_grid(state, grid)
    return GridDensity(np.diag(np.real(np.diag(rho.matrix))).astype(complex), rho.grid)


def gaussian_grid_state(grid: GridSpec, x_mean, x_spread, p_mean=0.0, chirp=0.0) -> GridDensity:
    """Pure (optionally chirped) Gaussian sampled directly on a grid.

    The chirp adds ``exp(i chirp (x - x_mean)^2)``, correlating x and p.
    """
    x = grid.x
    d = x - x_mean
    psi = np.exp(-(d**2) / (4.0 * x_spread**2) + 1j * p_mean * x + 1j * chirp * d**2)
    psi /= np.sqrt(np.sum(np.abs(psi) ** 2))
    return GridDensity(np.outer(psi, psi.conj()), grid)


def grid_from_wavefunction(grid: GridSpec, psi) -> GridDensity:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.sqrt(np.sum(np.abs(psi) ** 2))
    return GridDensity(np.outer(psi, psi.conj()), grid)


def is_valid_density(rho: GridDensity, trace_tol=1e-10, herm_tol=1e-12, psd_tol=-1e-10) -> bool:
    m = rho.matrix
    if abs(np.trace(m) - 1) > trace_tol or np.max(np.abs(m - m.conj().T)) > herm_tol:
        return False
    return np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0] >= psd_tol
