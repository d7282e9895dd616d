"""Weak-field, slow-motion decomposition of the clock Hamiltonian.

H = H_clock + H_cm + H_clock V1 + H_clock^2 V2 with

    H_cm = m c^2 + p^2/2m + m g x + (3g / 2 m c^2) <p^2 x>
    V1   = -p^2 / 2 m^2 c^2 + g x / c^2 - (3g / 2 m^2 c^4) <p^2 x>
    V2   = p^2 / 2 m^3 c^4 + (3g / 2 m^3 c^6) <p^2 x>

where <p^2 x> carries the chosen ordering (Weyl by default).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clocks import ClockModel
from .errors import InvalidParameterError
from .ordering import WEYL, OrderedMonomial, OrderedPolynomial, polynomial, polynomial_matrix
from .states import GridSpec


@dataclass(frozen=True)
class HamiltonianDecomposition:
    h_cm: OrderedPolynomial
    v1: OrderedPolynomial
    v2: OrderedPolynomial
    m: float
    g: float
    c: float = 1.0
    ordering: object = WEYL


def decompose_hamiltonian(m: float, g: float = 0.0, ordering=WEYL, c: float = 1.0) -> HamiltonianDecomposition:
    if not m > 0:
        raise InvalidParameterError(f"mass must be > 0, got {m}")
    c2 = c * c
    h_cm = polynomial(
        OrderedMonomial(m * c2, 0, 0),
        OrderedMonomial(1.0 / (2.0 * m), 2, 0),
        OrderedMonomial(m * g, 0, 1),
        OrderedMonomial(3.0 * g / (2.0 * m * c2), 2, 1, ordering),
    )
    v1 = polynomial(
        OrderedMonomial(-1.0 / (2.0 * m**2 * c2), 2, 0),
        OrderedMonomial(g / c2, 0, 1),
        OrderedMonomial(-3.0 * g / (2.0 * m**2 * c2**2), 2, 1, ordering),
    )
    v2 = polynomial(
        OrderedMonomial(1.0 / (2.0 * m**3 * c2**2), 2, 0),
        OrderedMonomial(3.0 * g / (2.0 * m**3 * c2**3), 2, 1, ordering),
    )
    return HamiltonianDecomposition(h_cm, v1, v2, float(m), float(g), float(c), ordering)


def total_grid_hamiltonian(decomp: HamiltonianDecomposition, clock: ClockModel, grid: GridSpec) -> np.ndarray:
    """Dense H on (grid) x (clock), composite index ``j * d + n``."""
    d = clock.dim
    hc = clock.hamiltonian
    eye_g = np.eye(grid.n)
    h = np.kron(eye_g, hc)
    h = h + np.kron(polynomial_matrix(decomp.h_cm, grid), np.eye(d))
    h = h + np.kron(polynomial_matrix(decomp.v1, grid), hc)
    h = h + np.kron(polynomial_matrix(decomp.v2, grid), hc @ hc)
    return h
