"""Internal clock mechanisms and their covariant time observables."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import lcm

import numpy as np

from .errors import InvalidParameterError, ShapeError, UnsupportedSpectrumError


@dataclass(frozen=True)
class ClockModel:
    """Clock Hamiltonian ``diag(energies)`` with initial state and gravity sensitivity.

    ``kappa`` scales how strongly the clock Hamiltonian itself depends on the
    local potential; it only enters gravitational evolutions.
    """

    energies: np.ndarray = field(repr=False)
    initial_state: np.ndarray = field(repr=False)
    kappa: float = 0.0
    label: str = "clock"

    def __post_init__(self):
        e = np.array(self.energies, dtype=float)
        psi = np.array(self.initial_state, dtype=complex)
        if e.ndim != 1 or e.size < 2:
            raise InvalidParameterError("a clock needs at least two levels")
        if np.any(np.diff(e) <= 0):
            raise InvalidParameterError("clock energies must be strictly increasing")
        if psi.shape != e.shape:
            raise ShapeError(f"initial state shape {psi.shape} != ({e.size},)")
        if abs(np.linalg.norm(psi) - 1.0) > 1e-12:
            raise InvalidParameterError("initial clock state must be normalized")
        e.flags.writeable = False
        psi.flags.writeable = False
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "initial_state", psi)

    @property
    def dim(self) -> int:
        return self.energies.size

    @property
    def hamiltonian(self) -> np.ndarray:
        return np.diag(self.energies).astype(complex)

    @property
    def rho0(self) -> np.ndarray:
        return np.outer(self.initial_state, self.initial_state.conj())

    def with_kappa(self, kappa: float) -> "ClockModel":
        return replace(self, kappa=float(kappa))


def two_level_clock(omega: float, kappa: float = 0.0) -> ClockModel:
    if not omega > 0:
        raise InvalidParameterError(f"omega must be > 0, got {omega}")
    return ClockModel(
        np.array([0.0, omega]), np.ones(2) / np.sqrt(2.0), kappa, f"two-level(omega={omega:g})"
    )


def oscillator_clock(omega: float, dim: int, kappa: float = 0.0) -> ClockModel:
    if not omega > 0:
        raise InvalidParameterError(f"omega must be > 0, got {omega}")
    if dim < 3:
        raise InvalidParameterError(f"oscillator clock needs dim >= 3, got {dim}")
    return ClockModel(
        omega * np.arange(dim, dtype=float),
        np.ones(dim) / np.sqrt(dim),
        kappa,
        f"oscillator(omega={omega:g}, dim={dim})",
    )


def clock_free_evolve(clock: ClockModel, rho_clock, t: float) -> np.ndarray:
    rho = np.asarray(rho_clock, dtype=complex)
    if rho.shape != (clock.dim, clock.dim):
        raise ShapeError(f"clock density shape {rho.shape} != ({clock.dim}, {clock.dim})")
    phase = np.exp(-1j * clock.energies * t)
    return phase[:, None] * rho * phase.conj()[None, :]


def base_frequency(energies, max_denominator=1000, tol=1e-9) -> tuple[float, np.ndarray]:
    """Largest frequency w0 such that every gap from the ground level is an integer multiple.

    Returns ``(w0, n)`` with ``energies - energies[0] == w0 * n``.
    """
    gaps = np.asarray(energies, dtype=float) - energies[0]
    ref = gaps[1]
    ratios = [Fraction(g / ref).limit_denominator(max_denominator) for g in gaps]
    for r, g in zip(ratios, gaps):
        if abs(float(r) * ref - g) > tol * max(1.0, abs(g)):
            raise UnsupportedSpectrumError(f"energy gaps {gaps} are not commensurate")
    den = lcm(*(r.denominator for r in ratios))
    ints = [int(r * den) for r in ratios]
    common = np.gcd.reduce(ints[1:])
    ints = np.array(ints) // common
    return ref * common / den, ints


@dataclass(frozen=True)
class TimePOVM:
    taus: np.ndarray
    effects: np.ndarray  # (n_outcomes, d, d)
    period: float

    def __iter__(self):
        return iter(zip(self.taus, self.effects))

    def __len__(self):
        return len(self.taus)


def covariant_time_povm(clock: ClockModel, n_outcomes: int) -> TimePOVM:
    """Effects ``(d/n)|tau_k><tau_k|`` on ``n`` equally spaced readouts over one period.

    ``|tau> = d^{-1/2} sum_n exp(-i e_n tau)|e_n>``.  Completeness is exact when
    the integer level indices relative to the base frequency are all below ``n``.
    """
    w0, ints = base_frequency(clock.energies)
    if n_outcomes < clock.dim or n_outcomes <= ints.max():
        raise UnsupportedSpectrumError(
            f"need n_outcomes >= {max(clock.dim, ints.max() + 1)} for a complete POVM"
        )
    d = clock.dim
    period = 2.0 * np.pi / w0
    taus = period * np.arange(n_outcomes) / n_outcomes
    kets = np.exp(-1j * np.outer(taus, clock.energies)) / np.sqrt(d)
    effects = (d / n_outcomes) * kets[:, :, None] * kets.conj()[:, None, :]
    return TimePOVM(taus, effects, period)
